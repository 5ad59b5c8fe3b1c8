import numpy as np
import pytest
import sympy

from gpw.killing import (
    COORDS,
    KillingField,
    bracket_table,
    catalog,
    complete_field,
    constraint_check,
    dimension_certificate,
    flow,
    flow_isometry_residual,
    isotropy_at,
    isotropy_matrix,
    isotropy_symmetry_check,
    killing_dimension,
    killing_residual,
    lie_bracket,
    transitivity_rank,
)
from gpw.smoothfn import PowerTranslate, parse, primitive

x, y, xt, yt = COORDS
EXP = parse("exp:1@1")
SQUARE = parse("poly:0,0,1")
QUARTIC = parse("poly:0,0,0,0,1")


def _by_name(f):
    return {X.name: X for X in catalog(f)}


def test_x5_for_exponential_is_killing(rng):
    F = primitive(EXP).to_sympy(y)
    X5 = KillingField("X5", (y, 0, 2 * F, -xt))
    pts = rng.uniform(-1, 1, (20, 4))
    assert np.abs(killing_residual(EXP, X5, pts)).max() <= 1e-10


def test_scaling_field_is_not_killing():
    X = KillingField("S", (x, 0, 0, 0))
    assert np.abs(killing_residual(SQUARE, X, [0.3, 0.2, 0.1, 0.0])).max() > 0.1


def test_tilde_translation_exact():
    X = KillingField("T", (0, 0, 1, 0))
    assert not killing_residual(SQUARE, X, np.ones((3, 4))).any()


def test_universal_fields_pass_constraints(rng):
    grid = rng.uniform(0.1, 1, (10, 4))
    fields = _by_name(QUARTIC)
    for name in ("X1", "X2", "X3", "X4", "X5"):
        assert constraint_check(QUARTIC, fields[name], grid)


def test_exponential_x6_is_specific(rng):
    X6 = _by_name(EXP)["X6"]
    grid = rng.uniform(-1, 1, (10, 4))
    assert constraint_check(EXP, X6, grid)
    assert not constraint_check(SQUARE, X6, grid)
    assert constraint_check(SQUARE, KillingField("Z", (0, 0, 0, 0)), grid)


def test_catalog_sizes():
    assert len(catalog(parse("exp:1@1+1@2"))) == 5
    assert len(catalog(SQUARE)) == 8
    assert len(catalog(EXP)) == 6
    assert len(catalog(parse("poly:0"))) == 10


def test_catalog_named_fields():
    X7 = _by_name(SQUARE)["X7"]
    assert [sympy.expand(c) for c in X7.components] == [0, x, sympy.expand(y * x**2 - yt), -x**3 / 3]
    X6 = _by_name(EXP)["X6"]
    diff = [sympy.simplify(c - e) for c, e in zip(X6.components, (-x / 2, 1, xt / 2, 0))]
    assert diff == [0, 0, 0, 0]


def test_admissibility_is_checked():
    with pytest.raises(ValueError):
        complete_field(parse("exp:1@1+1@2"), "bad", xi=(0, 1))


@pytest.mark.parametrize("dsl, dim", [("poly:0", 10), ("poly:0,0,1", 8), ("exp:1@1", 6), ("poly:0,0,0,0,1", 6), ("exp:1@1+1@2", 5)])
def test_killing_dimension(dsl, dim):
    assert killing_dimension(parse(dsl)) == dim


def test_power_case_certificate():
    cert = dimension_certificate(PowerTranslate(1.0, 1.0, 2.5))
    assert cert.consistent and cert.table == 6 and cert.parameter_count == 6


def test_flow_x1_and_identity(rng):
    X1 = _by_name(SQUARE)["X1"]
    P = rng.uniform(-1, 1, 4)
    assert np.array_equal(flow(X1, 0.7, P), P + [0.7, 0, 0, 0])
    for X in catalog(SQUARE):
        assert np.allclose(flow(X, 0.0, P), P, atol=1e-15)


def test_flow_x6_square_closed_form(rng):
    X6 = _by_name(SQUARE)["X6"]
    P = rng.uniform(-1, 1, 4)
    t = 1.7
    xx, yy, a, b = P
    expected = [xx, yy + t, a + 2 * xx * yy * t + xx * t**2, b - xx**2 * t]
    assert np.allclose(flow(X6, t, P), expected, atol=1e-14)


def test_closed_flows_agree_with_integrator(rng):
    pts = rng.uniform(-1, 1, (5, 4))
    for f in (SQUARE, EXP):
        for X in catalog(f):
            if X.flow_impl is None:
                continue
            a = flow(X, 0.8, pts, "closed")
            b = flow(X, 0.8, pts, "integrate")
            assert np.abs(a - b).max() <= 1e-10, X.name


def test_flow_group_law(rng):
    P = rng.uniform(-1, 1, (4, 4))
    for X in catalog(QUARTIC):
        lhs = flow(X, 0.3, flow(X, 0.4, P))
        assert np.abs(lhs - flow(X, 0.7, P)).max() <= 1e-10, X.name


def test_flows_are_isometries(rng):
    pts = rng.uniform(-0.5, 0.5, (6, 4))
    pts[:, 1] = rng.uniform(0.2, 0.8, 6)
    for f in (SQUARE, EXP, QUARTIC, parse("poly:1,3")):
        for X in catalog(f):
            assert flow_isometry_residual(f, X, 0.5, pts) <= 1e-8, (f.to_dsl(), X.name)


def test_brackets_examples():
    fields = _by_name(SQUARE)
    assert lie_bracket(fields["X1"], fields["X4"]).components == fields["X3"].components
    assert lie_bracket(fields["X2"], fields["X3"]).is_zero()
    Z = lie_bracket(fields["X1"], fields["X5"])
    assert Z.is_zero()


def test_bracket_table_closes():
    table = bracket_table(parse("exp:1@1+1@2"))
    assert table["span_residual"] <= 1e-9
    assert table["killing_residual"] <= 1e-10


def test_isotropy_matrices_at_origin():
    fields = _by_name(EXP)
    A4 = isotropy_matrix(fields["X4"], np.zeros(4))
    expected = np.zeros((4, 4))
    expected[3, 0] = 1.0  # d_x -> d_yt
    expected[2, 1] = -1.0  # d_y -> -d_xt
    assert np.array_equal(A4, expected)
    A5 = isotropy_matrix(fields["X5"], np.zeros(4))
    expected = np.zeros((4, 4))
    expected[0, 1] = 1.0
    expected[2, 1] = 2.0 * EXP(0.0)
    expected[3, 2] = -1.0
    assert np.allclose(A5, expected)
    assert not isotropy_matrix(KillingField("Z", (0, 0, 0, 0)), np.zeros(4)).any()


def test_isotropy_matrix_requires_vanishing_field():
    with pytest.raises(ValueError):
        isotropy_matrix(_by_name(EXP)["X1"], np.zeros(4))


def test_isotropy_lies_in_model_group(rng):
    for f in (SQUARE, EXP, QUARTIC, parse("exp:1@1+1@2")):
        P = np.array([0.2, 0.5, -0.3, 0.1])
        for A in isotropy_at(f, P):
            assert isotropy_symmetry_check(f, A, P)


def test_transitivity():
    assert transitivity_rank(EXP, np.zeros(4)) == 4
    assert transitivity_rank(SQUARE, np.zeros(4)) == 4
    assert transitivity_rank(QUARTIC, [0, 1, 0, 0]) == 4
