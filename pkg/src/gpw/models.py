"""Model structures, alpha invariants, model symmetry groups and classification.

A model is a 4-dimensional space with basis ``(X, Y, Xt, Yt)``, the
hyperbolic inner product ``<X, Xt> = <Y, Yt> = 1`` and a tower of tensors
``A^k`` whose only nonzero orbit is ``A^k(X, Y, Y, X; Y, ..., Y)``.

Matrices acting on a model use the row convention: row ``i`` of ``Theta``
holds the coefficients of ``Theta(e_i)`` in the basis ``(X, Y, Xt, Yt)``.
Frames on a manifold are stored column-wise as coordinate vectors.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geodesics import exp_map_batch, log_map_batch
from .geometry import CurvatureTable, Mf, curvature, grid_points, metric_batch
from .smoothfn import (
    ExpSum,
    Polynomial,
    PowerTranslate,
    SmoothFunction,
    UnrepresentableError,
    derivative,
    eval_tower,
    sum_of,
)

__all__ = [
    "AlphaFamily",
    "ClassViolation",
    "Classification",
    "FRAME_NAMES",
    "HYPERBOLIC",
    "IsometryResult",
    "Kind",
    "ModelStructure",
    "alpha",
    "alpha_curvature_ratio",
    "alpha_of_profile",
    "alpha_sequence",
    "block_form",
    "build_isometry",
    "classify",
    "coordinate_frame",
    "g0_member",
    "g1_member",
    "group_dimension",
    "model_at",
    "normalize_to_V",
    "random_g0",
    "random_g1",
    "solve_alpha2_ode",
    "u0_frame",
    "u0_model",
    "u1_model",
    "v_frame",
]

FRAME_NAMES = ("X", "Y", "Xt", "Yt")
HYPERBOLIC = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
MEMBER_TOL = 1e-10
ALPHA_TOL = 1e-12


class ClassViolation(ValueError):
    """Raised when a profile fails a sign or nonvanishing requirement at a point."""


def _y_of(P) -> float:
    arr = np.atleast_1d(np.asarray(P, dtype=float))
    return float(arr[1]) if arr.size >= 2 else float(arr[0])


def _point_of(P) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(P, dtype=float))
    if arr.size == 1:
        return np.array([0.0, arr[0], 0.0, 0.0])
    return arr


# ----------------------------------------------------------------------------
# model structures


def orbit_table(value: float, k: int, names=FRAME_NAMES) -> CurvatureTable:
    """Sparse tensor whose only orbit is ``(0, 1, 1, 0; 1, ..., 1) -> value``."""
    if value == 0:
        return CurvatureTable(k, tuple(names), {})
    tail = (1,) * k
    entries = {
        (0, 1, 1, 0) + tail: value,
        (1, 0, 1, 0) + tail: -value,
        (0, 1, 0, 1) + tail: -value,
        (1, 0, 0, 1) + tail: value,
    }
    return CurvatureTable(k, tuple(names), entries)


def transform_table(table: CurvatureTable, E: np.ndarray, names=FRAME_NAMES) -> CurvatureTable:
    """Evaluate a covariant tensor on the columns of ``E``.

    ``T'(i_1..i_n) = sum_j T(j_1..j_n) E[j_1, i_1] ... E[j_n, i_n]``, expanded
    only over the nonzero entries of ``table`` and of ``E``.
    """
    nz_rows = [[(i, E[j, i]) for i in range(E.shape[1]) if E[j, i] != 0] for j in range(E.shape[0])]
    out: dict[tuple, float] = {}
    for idx, v in table.entries.items():
        for combo in itertools.product(*(nz_rows[j] for j in idx)):
            key = tuple(c[0] for c in combo)
            out[key] = out.get(key, 0.0) + v * math.prod(c[1] for c in combo)
    scale = max((abs(v) for v in out.values()), default=0.0)
    out = {k: v for k, v in out.items() if abs(v) > 1e-15 * scale}
    return CurvatureTable(table.order, tuple(names), out)


@dataclass(frozen=True)
class ModelStructure:
    """Inner product and tensor tower on the frame ``(X, Y, Xt, Yt)``."""

    inner: np.ndarray
    tower: tuple[CurvatureTable, ...]
    label: str = ""
    sign_flag: int = 1

    @property
    def K(self) -> int:
        return len(self.tower) - 1

    def values(self) -> list[float]:
        """``A^k(X, Y, Y, X; Y, ..., Y)`` for ``k = 0..K``."""
        return [float(t[(0, 1, 1, 0) + (1,) * t.order]) for t in self.tower]

    def dense(self, k: int) -> np.ndarray:
        return self.tower[k].to_dense()

    def truncate(self, K: int) -> "ModelStructure":
        return ModelStructure(self.inner, self.tower[: K + 1], self.label, self.sign_flag)

    def transformed(self, Theta: np.ndarray) -> "ModelStructure":
        """Pull back along ``Theta`` (row convention)."""
        E = np.asarray(Theta, dtype=float).T
        return ModelStructure(
            E.T @ self.inner @ E,
            tuple(transform_table(t, E) for t in self.tower),
            self.label,
            self.sign_flag,
        )

    def distance(self, other: "ModelStructure") -> float:
        """Largest absolute difference of inner product and tower entries."""
        d = float(np.abs(self.inner - other.inner).max())
        for a, b in zip(self.tower, other.tower):
            d = max(d, a.max_abs_difference(b))
        return d

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "inner": self.inner.tolist(),
            "tower": [t.to_json() for t in self.tower],
            "sign_flag": self.sign_flag,
        }


def u0_model() -> ModelStructure:
    return ModelStructure(HYPERBOLIC.copy(), (orbit_table(1.0, 0),), "U0")


def u1_model() -> ModelStructure:
    return ModelStructure(HYPERBOLIC.copy(), (orbit_table(1.0, 0), orbit_table(1.0, 1)), "U1")


def coordinate_frame(f: SmoothFunction, P) -> np.ndarray:
    """Columns ``X = dx + f dxt``, ``Y = dy``, ``Xt = dxt``, ``Yt = dyt``."""
    E = np.eye(4)
    E[2, 0] = f(_y_of(P))
    return E


def _frame_model(f: SmoothFunction, P, K: int, E: np.ndarray, label: str, sign_flag: int = 1) -> ModelStructure:
    spec = Mf(f)
    pt = _point_of(P)
    g = metric_batch(spec, pt)
    tower = tuple(transform_table(curvature(spec, pt, k), E) for k in range(K + 1))
    return ModelStructure(E.T @ g @ E, tower, label, sign_flag)


def model_at(f: SmoothFunction, P, K: int = 2) -> ModelStructure:
    """The truncated model ``U^K_{f,P}`` read off the manifold in the frame of :func:`coordinate_frame`."""
    return _frame_model(f, P, K, coordinate_frame(f, P), "U_fP")


def u0_frame(f: SmoothFunction, P) -> tuple[np.ndarray, int]:
    """Frame normalizing ``A^0`` to ``sign * U^0``; also returns ``sign = sign f''(P)``."""
    h = float(derivative(f, 2)(_y_of(P)))
    if h == 0:
        raise ClassViolation("f'' vanishes at the base point")
    s = 1 if h > 0 else -1
    E = coordinate_frame(f, P)
    E[:, 1] /= math.sqrt(abs(h))
    E[:, 3] *= math.sqrt(abs(h))
    return E, s


def u0_frame_model(f: SmoothFunction, P) -> ModelStructure:
    E, s = u0_frame(f, P)
    return _frame_model(f, P, 0, E, "U0_fP", s)


def _epsilons(f: SmoothFunction, P) -> tuple[float, float, int]:
    y = _y_of(P)
    _, _, h2, h3 = eval_tower(f, y, 3).values
    if h2 == 0:
        raise ClassViolation(f"f'' vanishes at y={y}")
    if h3 == 0:
        raise ClassViolation(f"f''' vanishes at y={y}")
    s = 1 if h2 > 0 else -1
    h2, h3 = s * h2, s * h3
    eps2 = h2 / h3
    eps1 = 1.0 / (eps2 * math.sqrt(h2))
    return eps1, eps2, s


def v_frame(f: SmoothFunction, P) -> np.ndarray:
    """Columns ``X1 = e1 X``, ``Y1 = e2 Y``, ``Xt1 = Xt / e1``, ``Yt1 = Yt / e2``."""
    eps1, eps2, _ = _epsilons(f, P)
    E = coordinate_frame(f, P)
    E[:, 0] *= eps1
    E[:, 1] *= eps2
    E[:, 2] /= eps1
    E[:, 3] /= eps2
    return E


def normalize_to_V(f: SmoothFunction, P, K: int = 8) -> ModelStructure:
    """The rescaled model ``V^K_{f,P}``: ``B^0 = B^1 = 1`` and ``B^k = alpha_k`` for ``k >= 2``.

    When ``f'' < 0`` the tensors come out negated and ``sign_flag = -1``.
    """
    _, _, s = _epsilons(f, P)
    return _frame_model(f, P, K, v_frame(f, P), "V_fP", s)


# ----------------------------------------------------------------------------
# alpha invariants


def alpha(f: SmoothFunction, P, p: int, check: bool = True) -> float:
    """``alpha_p = f^(p+2) (f'')^(p-1) (f''')^(-p)`` at ``P``.

    With ``check`` the value is compared against :func:`alpha_curvature_ratio`.
    """
    if p < 2:
        raise ValueError("alpha_p is defined for p >= 2")
    y = _y_of(P)
    t = eval_tower(f, y, p + 2).values
    if t[2] == 0 or t[3] == 0:
        raise ClassViolation(f"alpha needs f'' and f''' nonzero at y={y}")
    value = t[p + 2] * t[2] ** (p - 1) / t[3] ** p
    if check:
        ratio = alpha_curvature_ratio(f, P, p)
        if abs(value - ratio) > ALPHA_TOL * max(1.0, abs(value)):
            raise ArithmeticError(f"alpha routes disagree: {value} vs {ratio}")
    return value


def alpha_curvature_ratio(f: SmoothFunction, P, p: int) -> float:
    """``nabla^p R(X,Y,Y,X;Y..) R(X,Y,Y,X)^(p-1) / nabla R(X,Y,Y,X;Y)^p`` from curvature tables."""
    spec = Mf(f)
    pt = _point_of(P)
    key = lambda k: ("x", "y", "y", "x") + ("y",) * k
    r0 = curvature(spec, pt, 0)[key(0)]
    r1 = curvature(spec, pt, 1)[key(1)]
    rp = curvature(spec, pt, p)[key(p)]
    if r0 == 0 or r1 == 0:
        raise ClassViolation("curvature ratio needs R and nabla R nonzero")
    return rp * r0 ** (p - 1) / r1**p


def alpha_sequence(f: SmoothFunction, P, K: int = 8, check: bool = True) -> list[float]:
    return [alpha(f, P, p, check=check) for p in range(2, K + 1)]


def alpha_of_profile(h: SmoothFunction, y: float, p: int) -> float:
    """``alpha_p`` written through ``h = f''``: ``h^(p) h^(p-1) / (h')^p``."""
    t = eval_tower(h, y, p).values
    if t[0] == 0 or t[1] == 0:
        raise ClassViolation(f"alpha needs h and h' nonzero at y={y}")
    return t[p] * t[0] ** (p - 1) / t[1] ** p


# ----------------------------------------------------------------------------
# symmetry groups of the models


def block_form(alpha_mat, gamma) -> np.ndarray:
    """``[[alpha, gamma alpha^{-T}], [0, alpha^{-T}]]``."""
    a = np.asarray(alpha_mat, dtype=float)
    g = np.asarray(gamma, dtype=float)
    ait = np.linalg.inv(a).T
    return np.block([[a, g @ ait], [np.zeros((2, 2)), ait]])


def _preserves(Theta: np.ndarray, model: ModelStructure, tol: float) -> bool:
    Theta = np.asarray(Theta, dtype=float)
    if Theta.shape != (4, 4) or not np.all(np.isfinite(Theta)):
        return False
    image = model.transformed(Theta)
    return image.distance(model) <= tol * max(1.0, float(np.abs(Theta).max()) ** 2)


def _block_conditions(Theta: np.ndarray, tol: float) -> tuple[bool, np.ndarray]:
    a, b, c, d = Theta[:2, :2], Theta[:2, 2:], Theta[2:, :2], Theta[2:, 2:]
    det = np.linalg.det(a)
    if np.abs(c).max() > tol or abs(abs(det) - 1) > tol:
        return False, a
    ait = np.linalg.inv(a).T
    gamma = b @ a.T
    ok = np.abs(d - ait).max() <= tol and np.abs(gamma + gamma.T).max() <= tol
    return bool(ok), a


def g0_member(Theta, method: str = "both", tol: float = MEMBER_TOL) -> bool:
    """Does ``Theta`` preserve the inner product and ``A^0`` of ``U^0``?

    ``method`` is ``"direct"`` (tensor preservation), ``"block"`` (matrix
    shape) or ``"both"``, which raises if the two disagree.
    """
    Theta = np.asarray(Theta, dtype=float)
    direct = _preserves(Theta, u0_model(), tol) if method in ("direct", "both") else None
    block = _block_conditions(Theta, tol)[0] if method in ("block", "both") else None
    if method == "both" and direct != block:
        raise ArithmeticError("direct and block membership tests disagree")
    return bool(direct if direct is not None else block)


def g1_member(Theta, method: str = "both", tol: float = MEMBER_TOL, identity_component: bool = False) -> bool:
    """Does ``Theta`` preserve the inner product, ``A^0`` and ``A^1`` of ``U^1``?

    The block test asks for ``alpha = [[s, 0], [a21, 1]]`` with ``s = +-1``;
    ``identity_component=True`` narrows this to ``s = 1`` and skips the
    direct test, which cannot see components.
    """
    Theta = np.asarray(Theta, dtype=float)
    ok, a = _block_conditions(Theta, tol)
    s_ok = abs(a[0, 0] - 1) <= tol if identity_component else abs(abs(a[0, 0]) - 1) <= tol
    block = ok and abs(a[0, 1]) <= tol and abs(a[1, 1] - 1) <= tol and s_ok
    if identity_component:
        return bool(block)
    direct = _preserves(Theta, u1_model(), tol) if method in ("direct", "both") else None
    if method == "both" and direct != block:
        raise ArithmeticError("direct and block membership tests disagree")
    return bool(direct if direct is not None else block)


def _linear_constraints(model: ModelStructure | None) -> np.ndarray:
    """Rows: linearised preservation conditions on the 16 entries of ``Theta - I``."""
    inner = HYPERBOLIC
    rows = []
    for a, b in itertools.product(range(4), repeat=2):
        M = np.zeros((4, 4))
        M[a, b] = 1.0
        col = [(M @ inner + inner @ M.T).ravel()]
        if model is not None:
            for t in model.tower:
                T = t.to_dense()
                n = T.ndim
                d = np.zeros_like(T)
                for slot in range(n):
                    d += np.moveaxis(np.tensordot(M, T, axes=([1], [slot])), 0, slot)
                col.append(d.ravel())
        rows.append(np.concatenate(col))
    return np.array(rows).T


def group_dimension(which: str) -> int:
    """``16 - rank`` of the linearised preservation constraints at the identity.

    ``which`` is ``"G0"``, ``"G1"`` or ``"metric"`` (inner product only).
    """
    model = {"G0": u0_model(), "G1": u1_model(), "metric": None}[which]
    C = _linear_constraints(model)
    s = np.linalg.svd(C, compute_uv=False)
    big = s.max()
    if np.any((s > 1e-10 * big) & (s < 1e-6 * big)):
        raise ArithmeticError("rank indecision in the constraint system")
    return 16 - int(np.sum(s > 1e-8 * big))


def random_g0(rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((2, 2))
    while abs(np.linalg.det(a)) < 1e-3:
        a = rng.standard_normal((2, 2))
    a = a / math.sqrt(abs(np.linalg.det(a)))
    s = rng.standard_normal()
    return block_form(a, [[0.0, s], [-s, 0.0]])


def random_g1(rng: np.random.Generator, identity_component: bool = True) -> np.ndarray:
    a21, s = rng.standard_normal(2)
    sign = 1.0 if identity_component or rng.random() < 0.5 else -1.0
    return block_form([[sign, 0.0], [a21, 1.0]], [[0.0, s], [-s, 0.0]])


# ----------------------------------------------------------------------------
# classification


class Kind(str, enum.Enum):
    FLAT = "Flat"
    SYMMETRIC = "SymmetricNonFlat"
    HOMOGENEOUS = "Homogeneous"
    POWER = "LocallyHomogeneousPower"
    GENERIC = "Generic"


@dataclass(frozen=True)
class Classification:
    kind: Kind
    params: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"class": self.kind.value, "params": self.params, "witness": self.witness}


def _power_form(h: SmoothFunction) -> tuple[float, float, float] | None:
    """``(a, b, c)`` with ``h = a (y + b)^c`` if ``h`` has that shape structurally."""
    if isinstance(h, PowerTranslate):
        return h.a, h.b, h.c
    if isinstance(h, Polynomial) and h.degree >= 1:
        c = h.coefficients
        n = h.degree
        a = c[n]
        b = c[n - 1] / (n * a)
        expected = PowerTranslate(a, b, n).expanded().coefficients
        scale = max(abs(v) for v in c)
        if len(expected) == len(c) and all(abs(u - v) <= 1e-12 * scale for u, v in zip(c, expected)):
            return a, b, float(n)
    return None


def _structural(f: SmoothFunction) -> tuple[Kind, dict]:
    h = sum_of(derivative(f, 2))
    if h.is_zero():
        return Kind.FLAT, {}
    if isinstance(h, Polynomial) and h.degree == 0:
        return Kind.SYMMETRIC, {"c": h.coefficients[0]}
    if isinstance(h, ExpSum) and len(h.terms) == 1 and h.terms[0][1] != 0:
        a, lam = h.terms[0]
        return Kind.HOMOGENEOUS, {"a": a, "lambda": lam}
    pw = _power_form(h)
    if pw is not None:
        return Kind.POWER, {"a": pw[0], "b": pw[1], "c": pw[2]}
    return Kind.GENERIC, {}


def _sample_interval(f: SmoothFunction, domain) -> tuple[float, float]:
    lo, hi = f.domain
    if domain is not None:
        lo, hi = max(lo, domain[0]), min(hi, domain[1])
    if not lo < hi:
        raise ValueError("requested domain does not meet the domain of f")
    a = lo if math.isfinite(lo) else -2.0
    b = hi if math.isfinite(hi) else 2.0
    if not math.isfinite(lo) and math.isfinite(hi):
        a = hi - 4.0
    if math.isfinite(lo) and not math.isfinite(hi):
        b = lo + 4.0
    pad = 0.05 * (b - a)
    return a + pad, b - pad


def _numeric(f: SmoothFunction, domain, n: int = 100, tol: float = 1e-9) -> tuple[Kind, dict]:
    a, b = _sample_interval(f, domain)
    ys = np.linspace(a, b, n)
    towers = np.array([eval_tower(f, float(y), 4).values for y in ys])
    h, h1, h2 = towers[:, 2], towers[:, 3], towers[:, 4]
    scale = max(1.0, float(np.abs(towers[:, 2:]).max()))
    if np.abs(h).max() <= tol * scale:
        return Kind.FLAT, {}
    if np.abs(h1).max() <= tol * scale:
        return Kind.SYMMETRIC, {}
    ok = (np.abs(h) > tol * scale) & (np.abs(h1) > tol * scale)
    a2 = h2[ok] * h[ok] / h1[ok] ** 2
    info = {"alpha2_min": float(a2.min()), "alpha2_max": float(a2.max()), "grid": [float(a), float(b), n]}
    if a2.max() - a2.min() > tol * max(1.0, float(np.abs(a2).max())):
        return Kind.GENERIC, info
    # log-affinity of |h|: (log|h|)'' = (h h'' - h'^2) / h^2 vanishes everywhere
    log_curv = (h * h2 - h1**2) / h**2
    if np.abs(log_curv).max() <= tol * max(1.0, float(np.abs(h1 / h).max()) ** 2):
        return Kind.HOMOGENEOUS, info
    return Kind.POWER, info


def classify(f: SmoothFunction, domain: tuple[float, float] | None = None) -> Classification:
    """Structural recognition of ``f''``, cross-checked by ``alpha_2`` constancy on a grid.

    A disagreement between the two recognizers raises ``ArithmeticError``.
    """
    kind, params = _structural(f)
    numeric_kind, info = _numeric(f, domain)
    if numeric_kind != kind:
        raise ArithmeticError(f"structural {kind.value} vs numeric {numeric_kind.value}")
    witness = {"structural": kind.value, "numeric": numeric_kind.value, **info}
    if kind is Kind.GENERIC:
        a, b = _sample_interval(f, domain)
        ys = np.linspace(a, b, 25)
        t = np.array([eval_tower(f, float(y), 3).values for y in ys])
        witness["one_curvature_homogeneous"] = bool(
            np.all(t[:, 2] != 0) and np.all(t[:, 3] != 0) and (np.all(t[:, 2] * t[:, 3] > 0) or np.all(t[:, 2] * t[:, 3] < 0))
        )
    return Classification(kind, params, witness)


# ----------------------------------------------------------------------------
# alpha_2 = k


@dataclass(frozen=True)
class AlphaFamily:
    """Solutions of ``alpha_2 = k``: ``f'' = a e^{lambda y}`` or ``f'' = a (y + b)^c``."""

    k: float
    kind: str  # "exponential" or "power"
    c: float | None = None

    def profile(self, a: float = 1.0, shift: float = 1.0) -> SmoothFunction:
        """``f''`` for the given amplitude and rate (exponential) or translation (power)."""
        if self.kind == "exponential":
            return ExpSum(((a, shift),))
        return PowerTranslate(a, shift, self.c)

    def metric_function(self, a: float = 1.0, shift: float = 1.0) -> SmoothFunction:
        """A representable ``f`` with ``f''`` equal to :meth:`profile`."""
        if self.kind == "exponential":
            return ExpSum(((a / shift**2, shift),))
        c = self.c
        if c in (-1.0, -2.0):
            raise UnrepresentableError(f"f'' = a (y + b)^{c} integrates to a logarithm")
        return PowerTranslate(a / ((c + 1) * (c + 2)), shift, c + 2)

    def describe(self) -> str:
        if self.kind == "exponential":
            return "f'' = a exp(lambda y)"
        return f"f'' = a (y + b)^{self.c:g}"

    def to_json(self) -> dict:
        return {"k": self.k, "family": self.kind, "c": self.c, "description": self.describe()}


def solve_alpha2_ode(k: float) -> AlphaFamily:
    """``k = 1`` gives exponentials, otherwise powers with ``c = 1 / (1 - k)``."""
    if k == 1:
        return AlphaFamily(float(k), "exponential")
    return AlphaFamily(float(k), "power", 1.0 / (1.0 - k))


# ----------------------------------------------------------------------------
# isometries


@dataclass
class IsometryResult:
    status: str  # "isometry", "mismatch" or "inconclusive"
    alphas_from: list[float]
    alphas_to: list[float]
    mismatch_p: int | None = None
    frame_map: np.ndarray | None = None
    residual: float | None = None
    grid_size: int = 0
    tolerances: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.status == "isometry"

    def __call__(self, Q):
        if self._map is None:
            raise RuntimeError("no isometry available")
        return self._map(Q)

    _map: object = None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "alphas_from": self.alphas_from,
            "alphas_to": self.alphas_to,
            "mismatch_p": self.mismatch_p,
            "frame_map": None if self.frame_map is None else self.frame_map.tolist(),
            "grid_residual": self.residual,
            "grid_size": self.grid_size,
            "tolerances": self.tolerances,
        }


def _jacobian_fd(fun, pts: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Fourth-order central differences; ``(N, 4) -> (N, 4, 4)`` with ``J[n, a, b] = d_b phi^a``."""
    out = np.empty(pts.shape + (pts.shape[1],))
    for b in range(pts.shape[1]):
        e = np.zeros(pts.shape[1])
        e[b] = h
        out[:, :, b] = (-fun(pts + 2 * e) + 8 * fun(pts + e) - 8 * fun(pts - e) + fun(pts - 2 * e)) / (12 * h)
    return out


def build_isometry(
    f1: SmoothFunction,
    P1,
    f2: SmoothFunction,
    P2,
    K: int = 8,
    grid_n: int = 5,
    half_width: float = 1.0,
    alpha_tol: float = 1e-9,
    grid_tol: float = 1e-6,
) -> IsometryResult:
    """Compare alpha sequences and, if they agree up to ``K``, build ``exp o Phi o log``.

    ``Phi`` sends the normalized frame at ``P1`` to that at ``P2``; the point
    map is certified by pulling back the metric on a ``grid_n**4`` grid
    around ``P1``.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    P1, P2 = _point_of(P1), _point_of(P2)
    a1 = alpha_sequence(f1, P1, K)
    a2 = alpha_sequence(f2, P2, K)
    tols = {"alpha": alpha_tol, "grid": grid_tol}
    for p, (u, v) in enumerate(zip(a1, a2), start=2):
        if abs(u - v) > alpha_tol * max(1.0, abs(u), abs(v)):
            return IsometryResult("mismatch", a1, a2, mismatch_p=p, tolerances=tols)
    F1, F2 = v_frame(f1, P1), v_frame(f2, P2)
    Phi = F2 @ np.linalg.inv(F1)
    s1, s2 = Mf(f1), Mf(f2)

    def phi(Q):
        Q = np.atleast_2d(Q)
        return exp_map_batch(s2, P2, log_map_batch(s1, P1, Q) @ Phi.T)

    grid = grid_points(P1, half_width, grid_n)
    J = _jacobian_fd(phi, grid)
    pulled = np.einsum("nab,nac,ncd->nbd", J, metric_batch(s2, phi(grid)), J)
    residual = float(np.abs(pulled - metric_batch(s1, grid)).max())
    status = "isometry" if residual <= grid_tol else "inconclusive"
    res = IsometryResult(status, a1, a2, frame_map=Phi, residual=residual, grid_size=len(grid), tolerances=tols)
    res._map = phi
    return res
