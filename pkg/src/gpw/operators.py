"""Jacobi and skew-symmetric curvature operators and their Jordan profiles.

Conventions::

    J(xi) eta = R(eta, xi) xi            M[a, b] = g^{ad} R_{b c e d} xi^c xi^e
    R(pi) eta = R(e1, e2) eta            M[a, b] = g^{ad} R_{c e b d} e1^c e2^e

The Jordan form of a nilpotent operator is recorded as the rank sequence of
its powers, which determines the block sizes and avoids computing a Jordan
basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import MetricSpec, as_coords, curvature_tensor, hyperbolic_frame, metric_at

__all__ = [
    "JordanProfile",
    "NilpotencyError",
    "OperatorReport",
    "OrientedPlane",
    "jacobi_matrix",
    "jacobi_operator",
    "jordan_profile",
    "orthonormal_plane",
    "sample_planes",
    "sample_unit_vectors",
    "skew_curvature_operator",
    "skew_matrix",
    "verify_ivanov_petrova",
    "verify_osserman",
]

NULL_TOL = 1e-8
RANK_TOL = 1e-8
SQUARE_TOL = 1e-9
ADJOINT_TOL = 1e-10


class NilpotencyError(ValueError):
    """Raised when a matrix handed to :func:`jordan_profile` is not nilpotent."""


@dataclass(frozen=True)
class JordanProfile:
    rank_sequence: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rank_sequence", tuple(int(r) for r in self.rank_sequence))

    def as_list(self) -> list[int]:
        return list(self.rank_sequence)

    def block_sizes(self) -> list[int]:
        """Jordan block sizes from the rank drops (blocks of size 1 omitted)."""
        r = self.rank_sequence
        # blocks of size >= k + 2 number r[k] - r[k + 1]
        ge = [r[k] - r[k + 1] for k in range(len(r) - 1)] + [0]
        sizes = []
        for k in range(len(ge) - 1):
            sizes += [k + 2] * (ge[k] - ge[k + 1])
        return sorted(sizes, reverse=True)


@dataclass(frozen=True)
class OrientedPlane:
    e1: np.ndarray
    e2: np.ndarray
    sign: int  # +1 spacelike, -1 timelike

    def flipped(self) -> "OrientedPlane":
        return OrientedPlane(self.e2, self.e1, self.sign)


def _sv_rank(M: np.ndarray, threshold: float) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > threshold))


def jordan_profile(M: np.ndarray, tol: float = RANK_TOL) -> JordanProfile:
    """Ranks of ``M, M^2, ...`` up to and including the first zero.

    ``M`` must be nilpotent: ``||M^n|| <= tol ||M||^n`` with ``n = dim``.
    Ranks use singular values above ``tol * ||M||^k``.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    norm = np.linalg.norm(M, 2)
    if norm == 0.0:
        return JordanProfile(())
    if np.linalg.norm(np.linalg.matrix_power(M, n), 2) > tol * norm**n:
        raise NilpotencyError("matrix is not nilpotent within tolerance")
    ranks = []
    power = np.eye(n)
    for k in range(1, n + 1):
        power = power @ M
        ranks.append(_sv_rank(power, tol * norm**k))
        if ranks[-1] == 0:
            break
    return JordanProfile(ranks)


# ----------------------------------------------------------------------------
# operators from (g, R) arrays


def _raise(g: np.ndarray, lowered: np.ndarray) -> np.ndarray:
    """``g^{-1} @ lowered``, exact when ``g`` has the plane wave block shape."""
    p = g.shape[0] // 2
    if np.array_equal(g[p:, p:], np.zeros((p, p))) and np.array_equal(g[:p, p:], np.eye(p)) and np.array_equal(
        g[p:, :p], np.eye(p)
    ):
        ginv = np.zeros_like(g)
        ginv[:p, p:] = np.eye(p)
        ginv[p:, :p] = np.eye(p)
        ginv[p:, p:] = -g[:p, :p]
        return ginv @ lowered
    return np.linalg.solve(g, lowered)


def _norm_sq(g: np.ndarray, v: np.ndarray) -> float:
    return float(v @ g @ v)


def jacobi_matrix(g: np.ndarray, R: np.ndarray, xi: np.ndarray, null_tol: float = NULL_TOL) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if abs(_norm_sq(g, xi)) <= null_tol:
        raise ValueError("Jacobi operator needs a non-null direction")
    lowered = np.einsum("bced,c,e->db", R, xi, xi)
    return _raise(g, lowered)


def skew_matrix(g: np.ndarray, R: np.ndarray, plane: OrientedPlane) -> np.ndarray:
    lowered = np.einsum("cebd,c,e->db", R, plane.e1, plane.e2)
    return _raise(g, lowered)


def orthonormal_plane(g: np.ndarray, u, v, tol: float = NULL_TOL) -> OrientedPlane:
    """Oriented orthonormal basis of ``span(u, v)``; rejects planes with null vectors."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    gram = np.array([[u @ g @ u, u @ g @ v], [v @ g @ u, v @ g @ v]])
    scale = max(1.0, float(np.max(np.abs(gram))))
    if np.linalg.det(gram) <= tol * scale**2:
        raise ValueError("plane is degenerate or indefinite")
    sign = 1 if gram[0, 0] > 0 else -1
    e1 = u / np.sqrt(abs(gram[0, 0]))
    w = v - sign * (v @ g @ e1) * e1
    e2 = w / np.sqrt(abs(w @ g @ w))
    return OrientedPlane(e1, e2, sign)


# ----------------------------------------------------------------------------
# manifold-level wrappers


def jacobi_operator(spec: MetricSpec, P, xi, null_tol: float = NULL_TOL) -> np.ndarray:
    """Matrix of ``eta -> R(eta, xi) xi`` in coordinates at ``P``."""
    P = as_coords(P)
    return jacobi_matrix(metric_at(spec, P), curvature_tensor(spec, P, 0), xi, null_tol)


def skew_curvature_operator(spec: MetricSpec, P, plane: OrientedPlane | tuple) -> np.ndarray:
    """Matrix of ``eta -> R(e1, e2) eta`` at ``P``; a raw ``(u, v)`` pair is orthonormalized first."""
    P = as_coords(P)
    g = metric_at(spec, P)
    if not isinstance(plane, OrientedPlane):
        plane = orthonormal_plane(g, *plane)
    return skew_matrix(g, curvature_tensor(spec, P, 0), plane)


# ----------------------------------------------------------------------------
# sampling


def _sample_points(spec: MetricSpec, rng: np.random.Generator, n: int, box: float, y_range) -> np.ndarray:
    out = []
    while sum(len(o) for o in out) < n:
        pts = rng.uniform(-box, box, size=(2 * n, spec.dim))
        if y_range is not None:
            pts[:, 1] = rng.uniform(y_range[0], y_range[1], size=2 * n)
        ok = np.array([spec.in_domain(q[: spec.p]) for q in pts])
        out.append(pts[ok])
    return np.concatenate(out)[:n]


def sample_unit_vectors(
    g: np.ndarray, rng: np.random.Generator, sign: int, null_tol: float = NULL_TOL, frame: np.ndarray | None = None
) -> np.ndarray:
    """One unit vector with ``g(v, v) = sign``, by rejection from Gaussian directions.

    Directions are isotropic in the coordinates of ``frame`` (columns), the
    identity by default.
    """
    frame = np.eye(g.shape[0]) if frame is None else frame
    while True:
        v = rng.standard_normal(g.shape[0])
        v = frame @ (v / np.linalg.norm(v))
        q = v @ g @ v
        if abs(q) > null_tol and np.sign(q) == sign:
            return v / np.sqrt(abs(q))


def sample_planes(g: np.ndarray, rng: np.random.Generator, sign: int, frame: np.ndarray | None = None) -> OrientedPlane:
    frame = np.eye(g.shape[0]) if frame is None else frame
    while True:
        u, v = (frame @ rng.standard_normal((g.shape[0], 2))).T
        try:
            plane = orthonormal_plane(g, u / np.linalg.norm(u), v / np.linalg.norm(v))
        except ValueError:
            continue
        if plane.sign == sign:
            return plane


@dataclass
class OperatorReport:
    property: str
    metric: str
    n_samples: int
    seed: int
    profiles: dict = field(default_factory=dict)  # "spacelike"/"timelike" -> rank list or None if mixed
    uniform: bool = True
    max_square: float = 0.0
    max_adjoint: float = 0.0
    max_rank_mismatch: int = 0
    counterexample: dict | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.uniform and self.counterexample is None

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "metric": self.metric,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "profiles": self.profiles,
            "uniform": self.uniform,
            "max_square_residual": self.max_square,
            "max_adjoint_residual": self.max_adjoint,
            "counterexample": self.counterexample,
            "tolerances": self.tolerances,
            "pass": self.passed,
        }


def _verify(kind: str, spec: MetricSpec, n_samples: int, seed: int, box: float, y_range) -> OperatorReport:
    rng = np.random.default_rng(seed)
    report = OperatorReport(
        kind,
        spec.describe(),
        n_samples,
        seed,
        tolerances={"null": NULL_TOL, "rank": RANK_TOL, "square": SQUARE_TOL, "adjoint": ADJOINT_TOL},
    )
    for sign, label in ((1, "spacelike"), (-1, "timelike")):
        pts = _sample_points(spec, rng, n_samples, box, y_range)
        seen: tuple | None = None
        for P in pts:
            g = metric_at(spec, P)
            R = curvature_tensor(spec, P, 0)
            frame = hyperbolic_frame(spec, P)
            if kind == "osserman":
                xi = sample_unit_vectors(g, rng, sign, frame=frame)
                M = jacobi_matrix(g, R, xi)
                gm = g @ M
                adj = np.abs(gm - gm.T).max()
                extra = float(np.abs(M @ xi).max())
                witness = {"point": P.tolist(), "vector": xi.tolist()}
            else:
                plane = sample_planes(g, rng, sign, frame=frame)
                M = skew_matrix(g, R, plane)
                gm = g @ M
                adj = np.abs(gm + gm.T).max()
                extra = 0.0
                witness = {"point": P.tolist(), "e1": plane.e1.tolist(), "e2": plane.e2.tolist()}
            scale = max(1.0, float(np.abs(gm).max()))
            report.max_adjoint = max(report.max_adjoint, float(adj) / scale)
            square = float(np.abs(M @ M).max())
            report.max_square = max(report.max_square, square, extra)
            try:
                prof = jordan_profile(M).rank_sequence
            except NilpotencyError:
                prof = None
            bad = prof is None or (seen is not None and prof != seen)
            bad = bad or max(square, extra) > SQUARE_TOL or adj / scale > ADJOINT_TOL
            if bad and report.counterexample is None:
                report.uniform = report.uniform and prof is not None and (seen is None or prof == seen)
                report.counterexample = {"class": label, "profile": None if prof is None else list(prof), **witness}
            if seen is None:
                seen = prof
        report.profiles[label] = None if seen is None else list(seen)
    return report


def verify_osserman(spec: MetricSpec, n_samples: int = 1000, seed: int = 0, box: float = 2.0, y_range=None) -> OperatorReport:
    """Sample spacelike and timelike unit vectors and compare Jacobi profiles."""
    return _verify("osserman", spec, n_samples, seed, box, y_range)


def verify_ivanov_petrova(spec: MetricSpec, n_samples: int = 1000, seed: int = 0, box: float = 2.0, y_range=None) -> OperatorReport:
    """Sample definite oriented planes and compare skew curvature profiles."""
    return _verify("ivanov_petrova", spec, n_samples, seed, box, y_range)
