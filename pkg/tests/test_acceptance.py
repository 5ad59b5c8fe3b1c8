"""Acceptance gate: one PASS/FAIL line per criterion with measured values and tolerances."""

import time

import numpy as np
import pytest

from gpw import geodesics, geometry, killing, models, operators
from gpw.geometry import Mf
from gpw.smoothfn import derivative, eval_tower, parse

FLEET = {
    "0": "poly:0",
    "y^2": "poly:0,0,1",
    "e^y": "exp:1@1",
    "y^4": "poly:0,0,0,0,1",
    "e^y+e^2y": "exp:1@1+1@2",
}
CURVED = ["y^2", "e^y", "y^4", "e^y+e^2y"]
C3 = ["e^y", "y^4", "e^y+e^2y"]  # f'' and f''' both nonzero (y^4 away from 0)


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, text: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {text}")

    return emit


def _f(name):
    return parse(FLEET[name])


def test_criterion_01_curvature_tower(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    value_err = 0.0
    stray = 0
    fd_err = 0.0
    for name in ["y^2", "y^4", "e^y", "e^y+e^2y"]:
        f = _f(name)
        spec = Mf(f)
        for P in rng.uniform(-1, 1, (5, 4)):
            for k in range(5):
                T = geometry.curvature(spec, P, k)
                key = (0, 1, 1, 0) + (1,) * k
                exact = eval_tower(f, P[1], k + 2).values[k + 2]
                value_err = max(value_err, abs(T[key] - exact))
                stray += sum(1 for idx in T.entries if not set(idx) <= {0, 1})
            fd = geometry.curvature_fd_oracle(spec, P)
            fd_err = max(fd_err, geometry.curvature(spec, P, 0).max_abs_difference(fd))
    elapsed = time.perf_counter() - t0
    ok = value_err == 0.0 and stray == 0 and fd_err <= 1e-5 and elapsed < 1.0
    report(
        1,
        ok,
        f"orbit value error {value_err:.1e} (exact), off-block entries {stray}, "
        f"FD max diff {fd_err:.2e} <= 1e-5, runtime {elapsed:.2f}s < 1s",
    )
    assert ok


def test_criterion_02_geodesics(report):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    rk_err = 0.0
    rt_err = 0.0
    times = np.linspace(0.0, 10.0, 11)
    for name in FLEET:
        spec = Mf(_f(name))
        starts = rng.uniform(-1, 1, (50, 4))
        vels = rng.uniform(-0.5, 0.5, (50, 4))
        _, hist = geodesics.rk4_batch(spec, starts, vels, 10.0, 10_000, record=10)
        for j, t in enumerate(times):
            closed = geodesics.geodesic_batch(spec, starts, vels, t)
            rk_err = max(rk_err, float(np.abs(hist[:, j, :4] - closed).max()))
        P = rng.uniform(-1, 1, (100, 4))
        Q = rng.uniform(-1, 1, (100, 4))
        V = geodesics.log_map_batch(spec, P, Q)
        rt_err = max(rt_err, float(np.abs(geodesics.exp_map_batch(spec, P, V) - Q).max()))
        V = rng.uniform(-1, 1, (100, 4))
        back = geodesics.log_map_batch(spec, P, geodesics.exp_map_batch(spec, P, V))
        rt_err = max(rt_err, float(np.abs(back - V).max()))
    elapsed = time.perf_counter() - t0
    ok = rk_err <= 1e-6 and rt_err <= 1e-9 and elapsed < 30.0
    report(
        2,
        ok,
        f"RK4(1e4 steps) vs closed form on 5x50 geodesics, t in [0,10]: {rk_err:.2e} <= 1e-6; "
        f"exp/log round trip on 5x100 pairs: {rt_err:.2e} <= 1e-9; runtime {elapsed:.1f}s < 30s",
    )
    assert ok


def test_criterion_03_operators(report):
    lines = []
    ok = True
    for name in CURVED:
        spec = Mf(_f(name))
        oss = operators.verify_osserman(spec, 1000, seed=3)
        ip = operators.verify_ivanov_petrova(spec, 1000, seed=3)
        good = (
            oss.passed
            and ip.passed
            and oss.profiles == {"spacelike": [1, 0], "timelike": [1, 0]}
            and ip.profiles == {"spacelike": [2, 0], "timelike": [2, 0]}
            and oss.max_square <= 1e-9
            and ip.max_square <= 1e-9
        )
        ok = ok and good
        lines.append(
            f"{name}: J {oss.profiles['spacelike']}/{oss.profiles['timelike']} |J^2| {oss.max_square:.1e}, "
            f"R(pi) {ip.profiles['spacelike']}/{ip.profiles['timelike']} |R^2| {ip.max_square:.1e}"
        )
    report(3, ok, "1000 samples per class, square tol 1e-9; " + "; ".join(lines))
    assert ok


def test_criterion_04_ricci_and_scalars(report):
    grid = geometry.grid_points([0.0, 0.0, 0.0, 0.0], 1.0, 5)
    closed_max = 0.0
    fd_max = 0.0
    for name in FLEET:
        spec = Mf(_f(name))
        ric, sc = geometry.ricci_and_scalars_batch(spec, grid, "closed")
        closed_max = max(closed_max, float(np.abs(ric).max()), *(float(np.abs(v).max()) for v in sc.values()))
        ric, sc = geometry.ricci_and_scalars_batch(spec, grid, "fd")
        fd_max = max(fd_max, float(np.abs(ric).max()), *(float(np.abs(v).max()) for v in sc.values()))
    ok = closed_max <= 1e-9 and fd_max <= 1e-4
    report(
        4,
        ok,
        f"Ricci + 5 scalars on 5^4 grid x 5 metrics: closed {closed_max:.1e} <= 1e-9, FD {fd_max:.2e} <= 1e-4",
    )
    assert ok


def test_criterion_05_models(report):
    rng = np.random.default_rng(5)
    u0_err = 0.0
    u1_err = 0.0
    alpha_err = 0.0
    for name in CURVED:
        f = _f(name)
        for _ in range(100):
            P = rng.uniform(-1, 1, 4)
            if name == "y^4":
                P[1] = rng.uniform(0.05, 1.5)
            u0_err = max(u0_err, models.u0_frame_model(f, P).distance(models.u0_model()))
            if name in C3:
                V = models.normalize_to_V(f, P, K=1)
                u1_err = max(u1_err, V.distance(models.u1_model()))
                for p in range(2, 7):
                    a = models.alpha(f, P, p, check=False)
                    b = models.alpha_curvature_ratio(f, P, p)
                    alpha_err = max(alpha_err, abs(a - b) / max(1.0, abs(a)))
    ok = u0_err <= 1e-12 and u1_err <= 1e-12 and alpha_err <= 1e-12
    report(
        5,
        ok,
        f"U0 distance {u0_err:.1e}, U1 distance {u1_err:.1e}, alpha cross-formula {alpha_err:.1e} (all <= 1e-12, 100 points each)",
    )
    assert ok


def test_criterion_06_symmetry_groups(report):
    rng = np.random.default_rng(6)
    d0, d1 = models.group_dimension("G0"), models.group_dimension("G1")
    members = 0
    rejected = 0
    for _ in range(100):
        T0 = models.random_g0(rng)
        T1 = models.random_g1(rng)
        members += models.g0_member(T0) and models.g1_member(T1)
        E = rng.standard_normal((4, 4))
        E *= 1e-3 / np.abs(E).max()
        rejected += (not models.g0_member(T0 + E)) and (not models.g1_member(T1 + E))
    ok = d0 == 4 and d1 == 2 and members == 100 and rejected == 100
    report(6, ok, f"dim G0 = {d0} (4), dim G1 = {d1} (2), members accepted {members}/100, perturbations rejected {rejected}/100")
    assert ok


def test_criterion_07_alpha_values(report):
    q = parse("poly:0,0,0,0,1")
    a2, a3 = models.alpha(q, 1.0, 2), models.alpha(q, 1.0, 3)
    err = max(abs(a2 - 0.5), abs(a3))
    for y in (0.3, 2.0, -1.5):
        err = max(err, abs(models.alpha(q, y, 2) - 0.5), abs(models.alpha(q, y, 3)))
    exp_err = 0.0
    for a, lam in ((1.0, 1.0), (2.0, 3.0), (-0.5, -2.0)):
        f = parse(f"exp:{a / lam**2}@{lam}")
        for y in np.linspace(-1, 1, 7):
            exp_err = max(exp_err, max(abs(v - 1.0) for v in models.alpha_sequence(f, y, 8)))
    ok = err <= 1e-12 and exp_err <= 1e-12
    report(7, ok, f"alpha_2(y^4) = {a2}, alpha_3(y^4) = {a3} (err {err:.1e}); exponential alpha_2..8 - 1 max {exp_err:.1e} <= 1e-12")
    assert ok


def test_criterion_08_alpha2_ode(report):
    err = 0.0
    routes = []
    for k in (0.0, 0.5, 1.0, 2.0, -1.0):
        fam = models.solve_alpha2_ode(k)
        try:
            f = fam.metric_function(a=1.3, shift=0.8)
            vals = [models.alpha(f, y, 2) for y in (0.2, 0.9, 1.7)]
            routes.append(f"k={k:g}:f")
        except Exception:  # f'' = a/(y+b) has no representable f; use f'' directly
            h = fam.profile(a=1.3, shift=0.8)
            vals = [models.alpha_of_profile(h, y, 2) for y in (0.2, 0.9, 1.7)]
            routes.append(f"k={k:g}:f''")
        err = max(err, max(abs(v - k) for v in vals))
    ok = err <= 1e-10
    report(8, ok, f"alpha_2 round trip max error {err:.1e} <= 1e-10 ({', '.join(routes)})")
    assert ok


def test_criterion_09_isometry(report):
    res = models.build_isometry(parse("exp:1@1"), 0.0, parse("exp:2@3"), 5.0, K=8)
    rng = np.random.default_rng(9)
    mism = []
    for y1, y2 in rng.uniform(-1, 1, (5, 2)):
        r = models.build_isometry(parse("exp:1@1"), y1, parse("exp:1@1+1@2"), y2, K=4)
        mism.append(r.mismatch_p)
    ok = res.success and res.residual <= 1e-6 and all(p == 2 for p in mism)
    report(9, ok, f"e^y@0 -> 2e^3y@5: {res.status}, grid residual {res.residual:.1e} <= 1e-6; mismatch p at 5 point pairs {mism}")
    assert ok


def test_criterion_10_killing(report):
    t0 = time.perf_counter()
    dims = {}
    res_max = 0.0
    flow_max = 0.0
    bracket_max = 0.0
    expected = {"0": 10, "y^2": 8, "e^y": 6, "y^4": 6, "e^y+e^2y": 5}
    rng = np.random.default_rng(10)
    for name in FLEET:
        f = _f(name)
        dims[name] = killing.killing_dimension(f)
        fields = killing.catalog(f)
        pts = rng.uniform(-1, 1, (100, 4))
        for X in fields:
            res_max = max(res_max, float(np.abs(killing.killing_residual(f, X, pts)).max()))
            for t in (0.5, -1.0):
                flow_max = max(flow_max, killing.flow_isometry_residual(f, X, t, pts[:10]))
        table = killing.bracket_table(f, fields)
        bracket_max = max(bracket_max, table["span_residual"])
    elapsed = time.perf_counter() - t0
    ok = dims == expected and res_max <= 1e-10 and flow_max <= 1e-8 and bracket_max <= 1e-9 and elapsed < 60
    report(
        10,
        ok,
        f"dims {list(dims.values())} (10/8/6/6/5), residual {res_max:.1e} <= 1e-10, "
        f"flow pullback {flow_max:.1e} <= 1e-8, bracket span {bracket_max:.1e} <= 1e-9, runtime {elapsed:.1f}s < 60s",
    )
    assert ok


def test_criterion_11_classification(report):
    expected = {
        "0": "Flat",
        "y^2": "SymmetricNonFlat",
        "e^y": "Homogeneous",
        "y^4": "LocallyHomogeneousPower",
        "e^y+e^2y": "Generic",
    }
    got = {}
    disagreements = 0
    cases = {name: _f(name) for name in FLEET}
    for c in (2.0, 0.5):
        fam = models.AlphaFamily(1.0 - 1.0 / c, "power", c)
        cases[f"f''=1.5(y+0.5)^{c:g}"] = fam.metric_function(a=1.5, shift=0.5)
        expected[f"f''=1.5(y+0.5)^{c:g}"] = "LocallyHomogeneousPower"
    for label, f in cases.items():
        try:
            cls = models.classify(f)
        except ArithmeticError:
            disagreements += 1
            continue
        got[label] = cls.kind.value
        disagreements += cls.witness["structural"] != cls.witness["numeric"]
    ok = got == expected and disagreements == 0
    report(11, ok, f"{got}; structural/numeric disagreements {disagreements}")
    assert ok
