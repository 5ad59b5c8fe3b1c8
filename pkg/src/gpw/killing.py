"""Killing vector fields of ``Mf``.

For nonlinear ``f`` every Killing field has the normal form

    X = (xi_1 + A_11 x + A_12 y) dx + (xi_2 + A_21 x + A_22 y) dy
        - (xt_1(x, y) + A_11 xt + A_21 yt) dxt - (xt_2(x, y) + A_12 xt + A_22 yt) dyt

subject to::

    0 = -2 f A_11 - f' (xi_2 + A_21 x + A_22 y) - d_x xt_1
    0 = -2 f A_12 - d_x xt_2 - d_y xt_1
    0 = -d_y xt_2

Solving these leaves five parameters that are always free (``xi_1``,
``A_12`` and three integration constants) plus the solutions in
``(A_11, A_21, A_22, xi_2)`` of the linear conditions

    A_21 f''' = 0,     2 (A_11 + A_22) f'' + (xi_2 + A_22 y) f''' = 0.

Fields are sympy expressions in ``x, y, xt, yt``.  Every field is
certified by the coordinate Killing equation with Christoffel symbols
from :mod:`gpw.geometry`, which shares no code with the normal form.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import sympy

from .geometry import Mf, christoffel_batch, metric_batch
from .models import (
    Kind,
    classify,
    g0_member,
    g1_member,
    group_dimension,
    u0_frame,
    v_frame,
)
from .smoothfn import SmoothFunction, derivative, primitive, sum_of

__all__ = [
    "DimensionCertificate",
    "KillingField",
    "NormalForm",
    "bracket_table",
    "catalog",
    "complete_field",
    "constraint_check",
    "dimension_certificate",
    "flow",
    "flow_isometry_residual",
    "isotropy_at",
    "isotropy_matrix",
    "killing_dimension",
    "killing_residual",
    "lie_bracket",
    "span_residual",
    "transitivity_rank",
]

x, y, xt, yt = COORDS = sympy.symbols("x y xt yt", real=True)
RESIDUAL_TOL = 1e-10
DIMENSION_TABLE = {Kind.FLAT: 10, Kind.SYMMETRIC: 8, Kind.HOMOGENEOUS: 6, Kind.POWER: 6, Kind.GENERIC: 5}


@dataclass(frozen=True)
class NormalForm:
    xi: tuple[float, float]
    A: tuple[tuple[float, float], tuple[float, float]]
    xt1: sympy.Expr
    xt2: sympy.Expr


@dataclass(frozen=True)
class KillingField:
    """Vector field ``sum_a components[a] d_a`` on ``(x, y, xt, yt)``."""

    name: str
    components: tuple
    normal_form: NormalForm | None = None
    flow_impl: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(sympy.sympify(c) for c in self.components))

    @functools.cached_property
    def _fn(self):
        return sympy.lambdify(COORDS, list(self.components), modules="numpy")

    @functools.cached_property
    def _jac_fn(self):
        J = [[sympy.diff(c, v) for v in COORDS] for c in self.components]
        return sympy.lambdify(COORDS, J, modules="numpy")

    def evaluate(self, pts) -> np.ndarray:
        """Component values, ``(N, 4)``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = self._fn(*pts.T)
        return np.stack([np.broadcast_to(np.asarray(v, dtype=float), pts.shape[:1]) for v in vals], axis=1)

    def jacobian(self, pts) -> np.ndarray:
        """``J[n, a, b] = d_b X^a``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = self._jac_fn(*pts.T)
        return np.stack(
            [np.stack([np.broadcast_to(np.asarray(v, dtype=float), pts.shape[:1]) for v in row], axis=1) for row in vals],
            axis=1,
        )

    def is_zero(self) -> bool:
        return all(sympy.simplify(c) == 0 for c in self.components)

    def __str__(self) -> str:
        names = ("d_x", "d_y", "d_xt", "d_yt")
        terms = [f"({c}) {n}" for c, n in zip(self.components, names) if c != 0]
        return f"{self.name} = " + (" + ".join(terms) if terms else "0")

    def to_json(self) -> dict:
        return {"name": self.name, "components": [str(c) for c in self.components]}


# ----------------------------------------------------------------------------
# construction


def _symbols_of(f: SmoothFunction):
    fy = f.to_sympy(y)
    Fy = primitive(f).to_sympy(y)
    return fy, Fy


def from_normal_form(name: str, xi, A, xt1, xt2) -> KillingField:
    xi = tuple(float(v) for v in xi)
    A = tuple(tuple(float(v) for v in row) for row in A)
    xt1, xt2 = sympy.sympify(xt1), sympy.sympify(xt2)
    comps = (
        xi[0] + A[0][0] * x + A[0][1] * y,
        xi[1] + A[1][0] * x + A[1][1] * y,
        -(xt1 + A[0][0] * xt + A[1][0] * yt),
        -(xt2 + A[0][1] * xt + A[1][1] * yt),
    )
    return KillingField(name, tuple(_clean(c) for c in comps), NormalForm(xi, A, xt1, xt2))


def _clean(e):
    """Expand and turn float coefficients that are integers into integers."""
    e = sympy.expand(e)
    return e.xreplace({n: sympy.Integer(int(n)) for n in e.atoms(sympy.Float) if float(n).is_integer()})


def normal_form_of(X: KillingField) -> NormalForm | None:
    """Recover ``(xi, A, xt_1, xt_2)`` from components, or ``None`` if ``X`` is not of that shape."""
    if X.normal_form is not None:
        return X.normal_form
    c0, c1, c2, c3 = (sympy.expand(c) for c in X.components)
    aff = []
    for c in (c0, c1):
        poly = sympy.Poly(c, x, y, xt, yt) if c.free_symbols <= set(COORDS) else None
        if poly is None or poly.total_degree() > 1 or c.has(xt) or c.has(yt):
            return None
        aff.append((float(c.subs({x: 0, y: 0})), float(sympy.diff(c, x)), float(sympy.diff(c, y))))
    xi = (aff[0][0], aff[1][0])
    A = ((aff[0][1], aff[0][2]), (aff[1][1], aff[1][2]))
    xt1 = sympy.expand(-c2 - A[0][0] * xt - A[1][0] * yt)
    xt2 = sympy.expand(-c3 - A[0][1] * xt - A[1][1] * yt)
    if xt1.has(xt) or xt1.has(yt) or xt2.has(xt) or xt2.has(yt):
        return None
    return NormalForm(xi, A, xt1, xt2)


def complete_field(f: SmoothFunction, name: str, xi=(0.0, 0.0), A=((0.0, 0.0), (0.0, 0.0))) -> KillingField:
    """Solve the constraint system for ``xt_1, xt_2`` given ``(xi, A)``.

    Integration constants are set to zero.  Raises ``ValueError`` when the
    seed violates ``d_y xt_2 = 0`` for this ``f``.
    """
    fy, Fy = _symbols_of(f)
    (A11, A12), (A21, A22) = A
    s = sympy.Symbol("s", real=True)
    rhs1 = -2 * fy * A11 - sympy.diff(fy, y) * (xi[1] + A21 * s + A22 * y)
    xt1 = sympy.integrate(rhs1, (s, 0, x)) - 2 * A12 * Fy
    rhs2 = (-2 * fy * A12 - sympy.diff(xt1, y)).subs(x, s)
    xt2 = sympy.integrate(rhs2, (s, 0, x))
    leftover = sympy.simplify(sympy.diff(xt2, y))
    if leftover != 0:
        raise ValueError(f"seed {name} is not admissible for f = {f.to_dsl()}: d_y xt_2 = {leftover}")
    return from_normal_form(name, xi, A, sympy.expand(xt1), sympy.expand(xt2))


def _universal(f: SmoothFunction) -> list[KillingField]:
    _, Fy = _symbols_of(f)
    return [
        from_normal_form("X1", (1, 0), ((0, 0), (0, 0)), 0, 0),
        from_normal_form("X2", (0, 0), ((0, 0), (0, 0)), -1, 0),
        from_normal_form("X3", (0, 0), ((0, 0), (0, 0)), 0, -1),
        from_normal_form("X4", (0, 0), ((0, 0), (0, 0)), y, -x),
        from_normal_form("X5", (0, 0), ((0, 1), (0, 0)), -2 * Fy, 0),
    ]


def _flat_catalog(f: SmoothFunction) -> list[KillingField]:
    """Translations and ``o(2,2)`` in flat coordinates, pulled back to the chart.

    For ``f = c0 + c1 y`` the map ``(x, y, xt, yt) -> (x, y, xt - c0 x - c1 x y, yt + c1 x^2 / 2)``
    is an isometry onto the flat hyperbolic metric.
    """
    c0 = float(f(0.0))
    c1 = float(derivative(f, 1)(0.0))
    w = sympy.Matrix([x, y, xt - c0 * x - c1 * x * y, yt + c1 * x**2 / 2])
    D = w.jacobian(sympy.Matrix(COORDS))
    Dinv = sympy.simplify(D.inv())
    gens = []
    for i in range(4):
        b = np.zeros(4)
        b[i] = 1.0
        gens.append((f"T{i + 1}", np.zeros((4, 4)), b))
    H = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    k = 0
    for i, j in itertools.combinations(range(4), 2):
        # M = E_ij H - E_ji H spans the H-antisymmetric matrices
        E = np.zeros((4, 4))
        E[i, j], E[j, i] = 1.0, -1.0
        k += 1
        gens.append((f"L{k}", E @ H, np.zeros(4)))
    out = []
    for name, M, b in gens:
        vec = Dinv * (sympy.Matrix(M) * w + sympy.Matrix(b))
        comps = tuple(_clean(sympy.nsimplify(sympy.expand(c), rational=False)) for c in vec)
        X = KillingField(name, comps, None, _flat_flow(M, b, c0, c1))
        object.__setattr__(X, "normal_form", normal_form_of(X))
        out.append(X)
    return out


def catalog(f: SmoothFunction, classification=None) -> list[KillingField]:
    """A basis of Killing fields assembled from the classification of ``f``."""
    cls = classification or classify(f)
    if cls.kind is not classify(f).kind:
        raise ValueError("classification is inconsistent with f")
    kind = cls.kind
    if kind is Kind.FLAT:
        return _flat_catalog(f)
    fields = _universal(f)
    if kind is Kind.SYMMETRIC:
        fields += [
            complete_field(f, "X6", xi=(0, 1)),
            complete_field(f, "X7", A=((0, 0), (1, 0))),
            complete_field(f, "X8", A=((1, 0), (0, -1))),
        ]
    elif kind is Kind.HOMOGENEOUS:
        lam = cls.params["lambda"]
        fields.append(complete_field(f, "X6", xi=(0, 1), A=((-lam / 2, 0), (0, 0))))
    elif kind is Kind.POWER:
        c = cls.params["c"] + 2.0  # exponent of f itself
        b = cls.params["b"]
        fields.append(complete_field(f, "X6", xi=(0, -2 * b / c), A=((1, 0), (0, -2 / c))))
    return [_attach_flow(f, X, kind) for X in fields]


# ----------------------------------------------------------------------------
# residuals and constraints


def killing_residual(f: SmoothFunction, X: KillingField, P) -> np.ndarray:
    """``K_ij = g(nabla_i X, e_j) + g(nabla_j X, e_i)``; ``(4, 4)`` for one point or ``(N, 4, 4)``."""
    pts = np.asarray(P, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    spec = Mf(f)
    g = metric_batch(spec, pts)
    G = christoffel_batch(spec, pts)
    V = X.evaluate(pts)
    cov = np.einsum("nai->nia", X.jacobian(pts)) + np.einsum("naib,nb->nia", G, V)  # (nabla_i X)^a
    low = np.einsum("nja,nia->nij", g, cov)
    K = low + np.swapaxes(low, 1, 2)
    return K[0] if single else K


def constraint_values(f: SmoothFunction, X: KillingField, pts) -> np.ndarray:
    """The three scalar constraints at ``pts``, ``(N, 3)``."""
    nf = normal_form_of(X)
    if nf is None:
        raise ValueError(f"{X.name} is not in the normal form")
    fy, _ = _symbols_of(f)
    (A11, A12), (A21, A22) = nf.A
    exprs = [
        -2 * fy * A11 - sympy.diff(fy, y) * (nf.xi[1] + A21 * x + A22 * y) - sympy.diff(nf.xt1, x),
        -2 * fy * A12 - sympy.diff(nf.xt2, x) - sympy.diff(nf.xt1, y),
        -sympy.diff(nf.xt2, y),
    ]
    fn = sympy.lambdify((x, y), exprs, modules="numpy")
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    vals = fn(pts[:, 0], pts[:, 1])
    return np.stack([np.broadcast_to(np.asarray(v, dtype=float), pts.shape[:1]) for v in vals], axis=1)


def constraint_check(f: SmoothFunction, X: KillingField, grid, tol: float = RESIDUAL_TOL) -> bool:
    """True iff the three constraints vanish on ``grid``; agreement with the residual is enforced."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    ok = bool(np.abs(constraint_values(f, X, grid)).max() <= tol)
    res = bool(np.abs(killing_residual(f, X, grid)).max() <= tol)
    if ok != res:
        raise ArithmeticError(f"constraint and residual verdicts disagree for {X.name}")
    return ok


# ----------------------------------------------------------------------------
# flows


def _affine_exp(M: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """``exp(t [[M, b], [0, 0]])`` for the affine ODE ``z' = M z + b``."""
    n = M.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = M
    aug[:n, n] = b
    return scipy.linalg.expm(t * aug)


def _flat_flow(M, b, c0, c1):
    def run(t, pts):
        w = np.stack(
            [pts[:, 0], pts[:, 1], pts[:, 2] - c0 * pts[:, 0] - c1 * pts[:, 0] * pts[:, 1], pts[:, 3] + c1 * pts[:, 0] ** 2 / 2],
            axis=1,
        )
        E = _affine_exp(M, b, t)
        w = w @ E[:4, :4].T + E[:4, 4]
        return np.stack(
            [w[:, 0], w[:, 1], w[:, 2] + c0 * w[:, 0] + c1 * w[:, 0] * w[:, 1], w[:, 3] - c1 * w[:, 0] ** 2 / 2], axis=1
        )

    return run


_GL = np.polynomial.legendre.leggauss(32)


def _integrated_flow(X: KillingField) -> Callable:
    """Variation-of-constants flow for a normal-form field.

    ``(x, y)`` follows ``z' = xi + A z``; ``w = (xt, yt)`` follows
    ``w' = -A^T w - xt(z)``, integrated with composite 32-node Gauss-Legendre.
    """
    nf = normal_form_of(X)
    A = np.array(nf.A)
    xi = np.array(nf.xi)
    src = sympy.lambdify((x, y), [nf.xt1, nf.xt2], modules="numpy")

    def run(t, pts):
        t = float(t)
        E = _affine_exp(A, xi, t)
        z0 = pts[:, :2]
        z = z0 @ E[:2, :2].T + E[:2, 2]
        w = pts[:, 2:] @ scipy.linalg.expm(-A.T * t).T
        if t != 0.0:
            panels = max(1, math.ceil(abs(t)))
            u, wts = _GL
            acc = np.zeros_like(w)
            for k in range(panels):
                s = t * (k + (u + 1) / 2) / panels
                for sj, wj in zip(s, wts * t / (2 * panels)):
                    Es = _affine_exp(A, xi, sj)
                    zs = z0 @ Es[:2, :2].T + Es[:2, 2]
                    vals = src(zs[:, 0], zs[:, 1])
                    q = np.stack([np.broadcast_to(np.asarray(v, dtype=float), zs.shape[:1]) for v in vals], axis=1)
                    acc += wj * q @ scipy.linalg.expm(-A.T * (t - sj)).T
            w = w - acc
        return np.concatenate([z, w], axis=1)

    return run


def _closed_flow(f: SmoothFunction, name: str, kind: Kind, params: dict) -> Callable | None:
    """Displayed flows for the catalog fields, with the sign of the ``yt`` terms of X5 corrected."""
    F = primitive(f)
    exact_square = kind is Kind.SYMMETRIC and sum_of(f).to_dsl() == "poly:0,0,1"
    if name == "X1":
        return lambda t, p: p + np.array([t, 0, 0, 0])
    if name == "X2":
        return lambda t, p: p + np.array([0, 0, t, 0])
    if name == "X3":
        return lambda t, p: p + np.array([0, 0, 0, t])
    if name == "X4":
        return lambda t, p: np.stack([p[:, 0], p[:, 1], p[:, 2] - t * p[:, 1], p[:, 3] + t * p[:, 0]], axis=1)
    if name == "X5":
        def x5(t, p):
            Fy = F._evaluate(p[:, 1])
            return np.stack([p[:, 0] + t * p[:, 1], p[:, 1], p[:, 2] + 2 * Fy * t, p[:, 3] - t * p[:, 2] - Fy * t**2], axis=1)
        return x5
    if name == "X6" and exact_square:
        return lambda t, p: np.stack(
            [p[:, 0], p[:, 1] + t, p[:, 2] + 2 * p[:, 0] * p[:, 1] * t + p[:, 0] * t**2, p[:, 3] - p[:, 0] ** 2 * t], axis=1
        )
    if name == "X7" and exact_square:
        return lambda t, p: np.stack(
            [
                p[:, 0],
                p[:, 1] + p[:, 0] * t,
                p[:, 2] + (p[:, 1] * p[:, 0] ** 2 - p[:, 3]) * t + (2.0 / 3.0) * p[:, 0] ** 3 * t**2,
                p[:, 3] - p[:, 0] ** 3 * t / 3,
            ],
            axis=1,
        )
    if name == "X8" and exact_square:
        return lambda t, p: p * np.exp(np.array([t, -t, -t, t]))
    if name == "X6" and kind is Kind.HOMOGENEOUS and _is_pure_exponential(f):
        lam = params["lambda"]
        return lambda t, p: p * np.array([np.exp(-lam * t / 2), 1, np.exp(lam * t / 2), 1]) + np.array([0, t, 0, 0])
    if name == "X6" and kind is Kind.POWER and _is_pure_power(f):
        c = params["c"] + 2.0
        return lambda t, p: p * np.exp(np.array([t, -2 * t / c, -t, 2 * t / c]))
    return None


def _is_pure_exponential(f: SmoothFunction) -> bool:
    from .smoothfn import ExpSum

    g = sum_of(f)
    return isinstance(g, ExpSum) and len(g.terms) == 1


def _is_pure_power(f: SmoothFunction) -> bool:
    from .smoothfn import Polynomial, PowerTranslate

    g = sum_of(f)
    if isinstance(g, PowerTranslate):
        return g.b == 0
    return isinstance(g, Polynomial) and sum(1 for c in g.coefficients if c != 0) == 1


def _attach_flow(f: SmoothFunction, X: KillingField, kind: Kind) -> KillingField:
    params = classify(f).params
    impl = _closed_flow(f, X.name, kind, params)
    return KillingField(X.name, X.components, X.normal_form, impl)


def flow(X: KillingField, t: float, P, method: str = "auto") -> np.ndarray:
    """``Phi_t^X(P)`` for one point ``(4,)`` or a batch ``(N, 4)``.

    ``method`` is ``"closed"`` (displayed formula), ``"integrate"``
    (variation of constants) or ``"auto"`` (closed when available).
    """
    pts = np.asarray(P, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if method == "closed" or (method == "auto" and X.flow_impl is not None):
        if X.flow_impl is None:
            raise ValueError(f"no closed-form flow for {X.name}")
        out = X.flow_impl(t, pts)
    elif method in ("integrate", "auto"):
        if normal_form_of(X) is None:
            raise ValueError(f"{X.name} has no normal form to integrate")
        out = _integrated_flow(X)(t, pts)
    else:
        raise ValueError(f"unknown flow method {method!r}")
    return out[0] if single else out


def flow_isometry_residual(f: SmoothFunction, X: KillingField, t: float, pts, method: str = "auto", h: float = 1e-3) -> float:
    """Max ``|D Phi^T g(Phi) D Phi - g|`` over ``pts`` with a fourth-order difference Jacobian."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    spec = Mf(f)
    J = np.empty(pts.shape + (4,))
    for b in range(4):
        e = np.zeros(4)
        e[b] = h
        ev = lambda q: flow(X, t, q, method)
        J[:, :, b] = (-ev(pts + 2 * e) + 8 * ev(pts + e) - 8 * ev(pts - e) + ev(pts - 2 * e)) / (12 * h)
    pulled = np.einsum("nab,nac,ncd->nbd", J, metric_batch(spec, flow(X, t, pts, method)), J)
    return float(np.abs(pulled - metric_batch(spec, pts)).max())


# ----------------------------------------------------------------------------
# brackets


def lie_bracket(X: KillingField, Y: KillingField, name: str | None = None) -> KillingField:
    """Coordinate bracket ``[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a``."""
    comps = tuple(
        _clean(sum(X.components[b] * sympy.diff(Y.components[a], COORDS[b]) - Y.components[b] * sympy.diff(X.components[a], COORDS[b]) for b in range(4)))
        for a in range(4)
    )
    out = KillingField(name or f"[{X.name},{Y.name}]", comps)
    object.__setattr__(out, "normal_form", normal_form_of(out))
    return out


def span_residual(Z: KillingField, basis: list[KillingField], pts) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``Z`` in ``basis`` from values at ``pts`` and the relative residual."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    B = np.stack([X.evaluate(pts).ravel() for X in basis], axis=1)
    z = Z.evaluate(pts).ravel()
    coef, *_ = np.linalg.lstsq(B, z, rcond=None)
    res = float(np.abs(B @ coef - z).max()) / max(1.0, float(np.abs(z).max()))
    return coef, res


def bracket_table(f: SmoothFunction, fields: list[KillingField] | None = None, n_points: int = 40, seed: int = 0) -> dict:
    """Pairwise brackets, their structure constants in the catalog and closure residuals."""
    fields = fields or catalog(f)
    rng = np.random.default_rng(seed)
    pts = _sample_box(f, rng, n_points)
    n = len(fields)
    C = np.zeros((n, n, n))
    span_max = 0.0
    killing_max = 0.0
    for i, j in itertools.combinations(range(n), 2):
        Z = lie_bracket(fields[i], fields[j])
        coef, res = span_residual(Z, fields, pts)
        C[i, j], C[j, i] = coef, -coef
        span_max = max(span_max, res)
        killing_max = max(killing_max, float(np.abs(killing_residual(f, Z, pts)).max()))
    C = np.round(C, 10) + 0.0
    return {
        "names": [X.name for X in fields],
        "structure_constants": C,
        "span_residual": span_max,
        "killing_residual": killing_max,
    }


def _sample_box(f: SmoothFunction, rng: np.random.Generator, n: int, box: float = 1.0) -> np.ndarray:
    lo, hi = f.domain
    pts = rng.uniform(-box, box, size=(n, 4))
    if lo > -box or hi < box:
        a = max(lo, -box) if math.isfinite(lo) else -box
        b = min(hi, box) if math.isfinite(hi) else box
        pad = 0.05 * (b - a)
        pts[:, 1] = rng.uniform(a + pad, b - pad, size=n)
    return pts


# ----------------------------------------------------------------------------
# isotropy and dimension


def isotropy_matrix(X: KillingField, P, tol: float = 1e-12) -> np.ndarray:
    """``DX(P)``, column ``b`` being the image of ``d_b``; ``X`` must vanish at ``P``."""
    P = np.asarray(P, dtype=float)
    v = X.evaluate(P)[0]
    if np.abs(v).max() > tol:
        raise ValueError(f"{X.name} does not vanish at {P.tolist()}")
    return X.jacobian(P)[0]


def isotropy_at(f: SmoothFunction, P, fields: list[KillingField] | None = None) -> list[np.ndarray]:
    """Isotropy matrices spanning the catalog fields that vanish at ``P``."""
    fields = fields or catalog(f)
    P = np.asarray(P, dtype=float)
    V = np.stack([X.evaluate(P)[0] for X in fields], axis=1)  # (4, n)
    _, s, vt = np.linalg.svd(V)
    rank = int(np.sum(s > 1e-10 * max(1.0, s.max())))
    null = vt[rank:]
    jac = np.stack([X.jacobian(P)[0] for X in fields])  # (n, 4, 4)
    return [np.einsum("k,kab->ab", c, jac) for c in null]


def isotropy_symmetry_check(f: SmoothFunction, A: np.ndarray, P, eps: float = 0.1) -> bool:
    """Does ``exp(eps A)`` lie in the symmetry group of the model at ``P``?

    ``G1`` is used where ``f'''(P) != 0``, ``G0`` where only ``f''(P) != 0``,
    and bare metric preservation otherwise.
    """
    y0 = float(P[1])
    S = scipy.linalg.expm(eps * np.asarray(A))
    h2 = float(derivative(f, 2)(y0))
    h3 = float(derivative(f, 3)(y0))
    if h2 != 0 and h3 != 0:
        E = v_frame(f, P)
        Theta = (np.linalg.inv(E) @ S @ E).T
        return g1_member(Theta, tol=1e-9)
    if h2 != 0:
        E, _ = u0_frame(f, P)
        Theta = (np.linalg.inv(E) @ S @ E).T
        return g0_member(Theta, tol=1e-9)
    g = metric_batch(Mf(f), np.asarray(P, dtype=float))
    return bool(np.abs(S.T @ g @ S - g).max() <= 1e-9)


def free_parameter_count(f: SmoothFunction, n_points: int = 24) -> int:
    """Dimension of the solution space of the normal-form system.

    Five parameters are always free; the rest is the null space of the
    conditions on ``(A_11, A_21, A_22, xi_2)`` sampled over ``y``.
    """
    lo, hi = f.domain
    a = max(lo, -2.0) if math.isfinite(lo) else -2.0
    b = min(hi, 2.0) if math.isfinite(hi) else 2.0
    pad = 0.05 * (b - a)
    ys = np.linspace(a + pad, b - pad, n_points)
    h2 = derivative(f, 2)._evaluate(ys)
    h3 = derivative(f, 3)._evaluate(ys)
    rows = [np.stack([0 * ys, h3, 0 * ys, 0 * ys], axis=1), np.stack([2 * h2, 0 * ys, 2 * h2 + ys * h3, h3], axis=1)]
    C = np.concatenate(rows)
    s = np.linalg.svd(C, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * max(1.0, s.max()))) if s.size else 0
    return 5 + 4 - rank


@dataclass
class DimensionCertificate:
    kind: str
    table: int
    catalog_size: int
    catalog_certified: bool
    parameter_count: int | None
    isotropy_bound: int
    orbit_bound: int

    @property
    def upper_bound(self) -> int:
        return self.isotropy_bound + self.orbit_bound

    @property
    def consistent(self) -> bool:
        ok = self.catalog_certified and self.catalog_size == self.table == self.upper_bound
        return ok and (self.parameter_count is None or self.parameter_count == self.table)

    def to_json(self) -> dict:
        return {
            "class": self.kind,
            "dimension": self.table,
            "catalog_size": self.catalog_size,
            "catalog_certified": self.catalog_certified,
            "parameter_count": self.parameter_count,
            "isotropy_bound": self.isotropy_bound,
            "orbit_bound": self.orbit_bound,
            "upper_bound": self.upper_bound,
            "consistent": self.consistent,
        }


def dimension_certificate(f: SmoothFunction, n_points: int = 100, seed: int = 0) -> DimensionCertificate:
    """Catalog size (certified) against isotropy plus orbit dimension bound."""
    cls = classify(f)
    kind = cls.kind
    fields = catalog(f, cls)
    pts = _sample_box(f, np.random.default_rng(seed), n_points)
    certified = all(np.abs(killing_residual(f, X, pts)).max() <= RESIDUAL_TOL for X in fields)
    group = {Kind.FLAT: "metric", Kind.SYMMETRIC: "G0"}.get(kind, "G1")
    orbit = 3 if kind is Kind.GENERIC else 4
    params = None if kind is Kind.FLAT else free_parameter_count(f)
    return DimensionCertificate(kind.value, DIMENSION_TABLE[kind], len(fields), certified, params, group_dimension(group), orbit)


def killing_dimension(f: SmoothFunction) -> int:
    """``dim g_f`` from the classification table; raises if the certificate is inconsistent."""
    cert = dimension_certificate(f)
    if not cert.consistent:
        raise ArithmeticError(f"dimension certificate inconsistent: {cert.to_json()}")
    return cert.table


def transitivity_rank(f: SmoothFunction, P, names=("X1", "X2", "X3", "X6"), h: float = 1e-5) -> int:
    """Rank of the orbit map ``t -> Phi^{X6}_{t4} Phi^{X3}_{t3} Phi^{X2}_{t2} Phi^{X1}_{t1}(P)`` at ``t = 0``."""
    by_name = {X.name: X for X in catalog(f)}
    fields = [by_name[n] for n in names]
    P = np.asarray(P, dtype=float)

    def orbit(ts):
        q = P.copy()
        for X, t in zip(fields, ts):
            q = flow(X, t, q)
        return q

    J = np.empty((4, len(fields)))
    for k in range(len(fields)):
        e = np.zeros(len(fields))
        e[k] = h
        J[:, k] = (orbit(e) - orbit(-e)) / (2 * h)
    s = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(s > 1e-8 * s.max()))

