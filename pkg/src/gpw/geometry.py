"""Metrics, connections and curvature towers of generalized plane waves.

A generalized plane wave on ``R^{2p}`` with coordinates
``(x_1..x_p, xt_1..xt_p)`` has metric

    g(d_i, d_j) = Xi_ij(x),   g(d_i, dt_j) = delta_ij,   g(dt_i, dt_j) = 0.

Three families are supported:

``Mf``    p = 2 and ``Xi_11 = -2 f(y)``, everything else zero.
``PXi``   an arbitrary symmetric ``Xi`` given symbolically in ``x``.
``Hpsi``  the graph hypersurface of ``psi`` in ``R^{p,p+1}``, ``Xi_ij = psi_i psi_j``.

Curvature convention: ``R(a, b, c, d) = g((nabla_a nabla_b - nabla_b nabla_a
- nabla_[a,b]) c, d)`` so that ``R(dx, dy, dy, dx) = +f''`` on ``Mf``.  With
this choice every component of ``nabla^k R`` carrying an ``xt`` index vanishes
and the ``x``-block components are plain partial derivatives of
``d_a Gamma_bcd - d_b Gamma_acd``.

Every closed-form quantity has an independent finite-difference twin that
only ever calls :func:`metric_batch`.
"""

from __future__ import annotations

import abc
import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import sympy

from .smoothfn import SmoothFunction, derivative

__all__ = [
    "ChartPoint",
    "CurvatureTable",
    "Embedding",
    "Hpsi",
    "MetricSpec",
    "Mf",
    "PXi",
    "K_MAX",
    "as_coords",
    "christoffel",
    "christoffel_batch",
    "christoffel_fd_batch",
    "christoffel_table",
    "coordinate_names",
    "covariant_derivative_fd_oracle",
    "curvature",
    "curvature_fd_batch",
    "curvature_fd_oracle",
    "curvature_tensor",
    "embed_hypersurface",
    "hyperbolic_frame",
    "metric_at",
    "metric_batch",
    "ricci_and_scalars",
    "ricci_and_scalars_batch",
    "second_fundamental_form",
]

K_MAX = 8
FD_STEP = 1e-4
SCALAR_NAMES = ("scalar", "ricci_sq", "riemann_sq", "riemann_cubed", "nabla_riemann_sq")


def coordinate_names(p: int) -> tuple[str, ...]:
    if p == 2:
        return ("x", "y", "xt", "yt")
    return tuple(f"x{i}" for i in range(1, p + 1)) + tuple(f"xt{i}" for i in range(1, p + 1))


@dataclass(frozen=True)
class ChartPoint:
    """``(x_1..x_p, xt_1..xt_p)``; for ``Mf`` this is ``(x, y, xt, yt)``."""

    x: tuple[float, ...]
    x_tilde: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        xt = tuple(float(v) for v in self.x_tilde)
        if len(x) != len(xt) or len(x) < 2:
            raise ValueError("x and x_tilde need equal length p >= 2")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x_tilde", xt)

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "ChartPoint":
        arr = [float(v) for v in arr]
        p = len(arr) // 2
        return cls(tuple(arr[:p]), tuple(arr[p:]))

    @property
    def p(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.array(self.x + self.x_tilde)


def as_coords(P) -> np.ndarray:
    if isinstance(P, ChartPoint):
        return P.as_array()
    arr = np.asarray(P, dtype=float)
    if arr.ndim != 1 or arr.size % 2 or arr.size < 4:
        raise ValueError(f"expected 2p >= 4 chart coordinates, got shape {arr.shape}")
    return arr


# ----------------------------------------------------------------------------
# metric specifications


class MetricSpec(abc.ABC):
    """Chart-level description of a generalized plane wave metric."""

    p: int
    sign_flag: int = 1

    @abc.abstractmethod
    def xi(self, x: np.ndarray) -> np.ndarray:
        """``Xi_ij`` for ``x`` of shape ``(..., p)``; returns ``(..., p, p)``."""

    @abc.abstractmethod
    def gamma_lower(self, x: np.ndarray) -> np.ndarray:
        """``Gamma_ijk = 1/2 (d_i Xi_jk + d_j Xi_ik - d_k Xi_ij)``, shape ``(..., p, p, p)``."""

    @abc.abstractmethod
    def curvature_block(self, x: np.ndarray, k: int) -> np.ndarray:
        """x-block of ``nabla^k R`` at one point, shape ``(p,) * (4 + k)``."""

    @abc.abstractmethod
    def describe(self) -> str: ...

    def in_domain(self, x: np.ndarray) -> bool:
        with np.errstate(all="ignore"):
            return bool(np.all(np.isfinite(self.xi(np.asarray(x, dtype=float)))))

    @property
    def dim(self) -> int:
        return 2 * self.p

    @property
    def names(self) -> tuple[str, ...]:
        return coordinate_names(self.p)


@dataclass(frozen=True)
class Mf(MetricSpec):
    """``g(dx, dx) = -2 f(y)``, ``g(dx, dxt) = g(dy, dyt) = 1``."""

    f: SmoothFunction
    sign_flag: int = 1

    p = 2

    def in_domain(self, x):
        return self.f.in_domain(np.asarray(x, dtype=float)[..., 1])

    def xi(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = -2.0 * self.f._evaluate(x[..., 1])
        return out

    def gamma_lower(self, x):
        x = np.asarray(x, dtype=float)
        fp = derivative(self.f, 1)._evaluate(x[..., 1])
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 1] = fp
        out[..., 0, 1, 0] = -fp
        out[..., 1, 0, 0] = -fp
        return out

    def curvature_block(self, x, k):
        v = float(derivative(self.f, k + 2)._evaluate(np.asarray(float(x[1]))))
        out = np.zeros((2,) * (4 + k))
        tail = (1,) * k
        out[(0, 1, 1, 0) + tail] = v
        out[(1, 0, 1, 0) + tail] = -v
        out[(0, 1, 0, 1) + tail] = -v
        out[(1, 0, 0, 1) + tail] = v
        return out

    def as_pxi(self) -> "PXi":
        x1, x2 = sympy.symbols("x1 x2")
        return PXi([[-2 * self.f.to_sympy(x2), 0], [0, 0]], symbols=(x1, x2))

    def describe(self):
        return f"Mf({self.f.to_dsl()})"


def _lambdify_array(exprs: np.ndarray, syms: Sequence[sympy.Symbol]) -> Callable:
    """Vectorised evaluator for an object array of sympy expressions."""
    shape = exprs.shape
    flat = [sympy.sympify(e) for e in exprs.ravel()]
    fn = sympy.lambdify(list(syms), flat, modules="numpy")

    def evaluate(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = fn(*[x[..., i] for i in range(x.shape[-1])])
        out = np.empty(lead + (len(flat),))
        for i, v in enumerate(vals):
            out[..., i] = np.broadcast_to(np.asarray(v, dtype=float), lead)
        return out.reshape(lead + shape)

    return evaluate


class PXi(MetricSpec):
    """General generalized plane wave with symbolic ``Xi(x_1..x_p)``."""

    def __init__(self, xi, symbols: Sequence[sympy.Symbol] | None = None, sign_flag: int = 1):
        xi = sympy.Matrix(xi)
        p = xi.shape[0]
        if xi.shape != (p, p) or p < 2:
            raise ValueError("Xi must be a square matrix of size p >= 2")
        if xi != xi.T:
            raise ValueError("Xi must be symmetric")
        self.p = p
        self.sign_flag = sign_flag
        self.symbols = tuple(symbols) if symbols else sympy.symbols(f"x1:{p + 1}")
        self.xi_expr = xi
        self._xi_fn = _lambdify_array(np.array(xi.tolist(), dtype=object), self.symbols)
        self._block_cache: dict[tuple[str, int], Callable] = {}

    def describe(self):
        return f"PXi({self.xi_expr.tolist()})"

    def __repr__(self):
        return self.describe()

    def xi(self, x):
        return self._xi_fn(x)

    @functools.cached_property
    def gamma_expr(self) -> np.ndarray:
        p, X, s = self.p, self.xi_expr, self.symbols
        out = np.empty((p, p, p), dtype=object)
        for i, j, k in itertools.product(range(p), repeat=3):
            out[i, j, k] = sympy.expand(
                (sympy.diff(X[j, k], s[i]) + sympy.diff(X[i, k], s[j]) - sympy.diff(X[i, j], s[k])) / 2
            )
        return out

    @functools.cached_property
    def _gamma_fn(self):
        return _lambdify_array(self.gamma_expr, self.symbols)

    def gamma_lower(self, x):
        return self._gamma_fn(x)

    @functools.cached_property
    def riemann_expr(self) -> np.ndarray:
        p, G, s = self.p, self.gamma_expr, self.symbols
        out = np.empty((p,) * 4, dtype=object)
        for a, b, c, d in itertools.product(range(p), repeat=4):
            out[a, b, c, d] = sympy.expand(sympy.diff(G[b, c, d], s[a]) - sympy.diff(G[a, c, d], s[b]))
        return out

    def _tower_expr(self, base: np.ndarray, k: int) -> np.ndarray:
        p, s = self.p, self.symbols
        memo: dict[tuple, sympy.Expr] = {}

        def d(idx: tuple, js: tuple) -> sympy.Expr:
            key = (idx, js)
            if key not in memo:
                memo[key] = base[idx] if not js else sympy.diff(d(idx, js[:-1]), s[js[-1]])
            return memo[key]

        out = np.empty((p,) * (4 + k), dtype=object)
        for full in itertools.product(range(p), repeat=4 + k):
            out[full] = d(full[:4], tuple(sorted(full[4:])))
        return out

    def _block_fn(self, route: str, k: int) -> Callable:
        key = (route, k)
        if key not in self._block_cache:
            self._block_cache[key] = _lambdify_array(
                self._tower_expr(self._route_base(route), k), self.symbols
            )
        return self._block_cache[key]

    def _route_base(self, route: str) -> np.ndarray:
        if route != "christoffel":
            raise ValueError(f"unknown curvature route {route!r}")
        return self.riemann_expr

    def curvature_block(self, x, k, route: str = "christoffel"):
        return self._block_fn(route, k)(np.asarray(x, dtype=float)[: self.p])


class Hpsi(PXi):
    """Hypersurface ``(x, xt) -> sum x_i e_i + xt_i et_i + psi(x) ec`` in ``R^{p,p+1}``.

    Curvature is available along two routes: ``"christoffel"`` (as a plane
    wave with ``Xi_ij = psi_i psi_j``) and ``"gauss"`` (minors of the Hessian).
    """

    def __init__(self, psi, symbols: Sequence[sympy.Symbol] | None = None, sign_flag: int = 1):
        psi = sympy.sympify(psi)
        syms = tuple(symbols) if symbols else tuple(sorted(psi.free_symbols, key=lambda t: t.name))
        if len(syms) < 2:
            syms = sympy.symbols("x1 x2")
        grad = [sympy.diff(psi, v) for v in syms]
        xi = sympy.Matrix(len(syms), len(syms), lambda i, j: grad[i] * grad[j])
        super().__init__(xi, symbols=syms, sign_flag=sign_flag)
        self.psi = psi
        self.grad_expr = grad
        self.hessian_expr = sympy.hessian(psi, syms)
        self._grad_fn = _lambdify_array(np.array(grad, dtype=object), syms)
        self._hess_fn = _lambdify_array(np.array(self.hessian_expr.tolist(), dtype=object), syms)
        self._psi_fn = _lambdify_array(np.array([psi], dtype=object), syms)

    @classmethod
    def from_profile(cls, f: SmoothFunction) -> "Hpsi":
        """``psi = x1**2 / 2 + f(x2)``, locally isometric to ``Mf(f)``."""
        x1, x2 = sympy.symbols("x1 x2")
        return cls(x1**2 / 2 + f.to_sympy(x2), symbols=(x1, x2))

    def describe(self):
        return f"Hpsi({self.psi})"

    def psi_value(self, x) -> float:
        return float(self._psi_fn(np.asarray(x, dtype=float)[: self.p])[0])

    def gradient(self, x) -> np.ndarray:
        return self._grad_fn(np.asarray(x, dtype=float)[: self.p])

    def hessian(self, x) -> np.ndarray:
        return self._hess_fn(np.asarray(x, dtype=float)[: self.p])

    @functools.cached_property
    def gauss_expr(self) -> np.ndarray:
        p, L = self.p, self.hessian_expr
        out = np.empty((p,) * 4, dtype=object)
        for a, b, c, d in itertools.product(range(p), repeat=4):
            out[a, b, c, d] = sympy.expand(L[a, d] * L[b, c] - L[a, c] * L[b, d])
        return out

    def _route_base(self, route):
        if route == "gauss":
            return self.gauss_expr
        return super()._route_base(route)


# ----------------------------------------------------------------------------
# metric and connection


def _check_domain(spec: MetricSpec, P: np.ndarray) -> None:
    if not spec.in_domain(P[: spec.p]):
        raise ValueError(f"point {P.tolist()} outside the domain of {spec.describe()}")


def metric_batch(spec: MetricSpec, points: np.ndarray) -> np.ndarray:
    """Metric matrices for points of shape ``(..., 2p)``."""
    points = np.asarray(points, dtype=float)
    p = spec.p
    out = np.zeros(points.shape[:-1] + (2 * p, 2 * p))
    out[..., :p, :p] = spec.xi(points[..., :p])
    eye = np.eye(p)
    out[..., :p, p:] = eye
    out[..., p:, :p] = eye
    return out


def metric_at(spec: MetricSpec, P) -> np.ndarray:
    P = as_coords(P)
    _check_domain(spec, P)
    return metric_batch(spec, P)


def christoffel_batch(spec: MetricSpec, points: np.ndarray) -> np.ndarray:
    """Second-kind symbols ``Gamma[..., a, b, c] = Gamma^a_bc``.

    Only ``Gamma^{xt_k}_{ij} = Gamma_ijk`` can be nonzero.
    """
    points = np.asarray(points, dtype=float)
    p = spec.p
    out = np.zeros(points.shape[:-1] + (2 * p,) * 3)
    G = spec.gamma_lower(points[..., :p])
    out[..., p:, :p, :p] = np.moveaxis(G, -1, -3)
    return out


def christoffel(spec: MetricSpec, P) -> np.ndarray:
    P = as_coords(P)
    _check_domain(spec, P)
    return christoffel_batch(spec, P)


def christoffel_table(spec: MetricSpec, P) -> dict[tuple[str, str, str], float]:
    """Nonzero ``Gamma^a_bc`` keyed by ``(b, c, a)`` names, i.e. ``nabla_b d_c`` has ``d_a`` part."""
    G = christoffel(spec, P)
    names = spec.names
    return {
        (names[b], names[c], names[a]): float(G[a, b, c])
        for a, b, c in zip(*np.nonzero(G))
    }


# ----------------------------------------------------------------------------
# curvature


@dataclass(frozen=True)
class CurvatureTable:
    """Sparse components of ``nabla^k R``; index tuples are ``(i1..i4, j1..jk)``."""

    order: int
    names: tuple[str, ...]
    entries: dict

    @classmethod
    def from_block(cls, block: np.ndarray, names: Sequence[str], order: int) -> "CurvatureTable":
        entries = {
            tuple(int(i) for i in idx): float(block[idx]) for idx in zip(*np.nonzero(block))
        }
        return cls(order, tuple(names), entries)

    def _index(self, idx) -> tuple[int, ...]:
        return tuple(self.names.index(i) if isinstance(i, str) else int(i) for i in idx)

    def __getitem__(self, idx) -> float:
        return self.entries.get(self._index(idx), 0.0)

    def component(self, *idx) -> float:
        return self[idx]

    def __len__(self) -> int:
        return len(self.entries)

    def is_empty(self) -> bool:
        return not self.entries

    def to_dense(self) -> np.ndarray:
        out = np.zeros((len(self.names),) * (4 + self.order))
        for idx, v in self.entries.items():
            out[idx] = v
        return out

    def max_abs_difference(self, other: "CurvatureTable") -> float:
        keys = set(self.entries) | set(other.entries)
        return max((abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) for k in keys), default=0.0)

    def to_json(self) -> list[dict]:
        return [
            {"indices": [self.names[i] for i in idx], "value": v}
            for idx, v in sorted(self.entries.items())
        ]


def curvature(spec: MetricSpec, P, k: int = 0, *, k_max: int = K_MAX, route: str | None = None) -> CurvatureTable:
    """Closed-form ``nabla^k R`` at ``P`` as a sparse table over coordinate names."""
    if k < 0 or k > k_max:
        raise ValueError(f"order k={k} outside 0..{k_max}")
    P = as_coords(P)
    _check_domain(spec, P)
    if route is None:
        block = spec.curvature_block(P[: spec.p], k)
    else:
        block = spec.curvature_block(P[: spec.p], k, route=route)
    return CurvatureTable.from_block(block, spec.names, k)


def curvature_tensor(spec: MetricSpec, P, k: int = 0, **kw) -> np.ndarray:
    """Dense ``(2p,) * (4 + k)`` array of ``nabla^k R`` at ``P``."""
    table = curvature(spec, P, k, **kw)
    return table.to_dense()


def _fd_jacobian(func: Callable[[np.ndarray], np.ndarray], points: np.ndarray, h: float) -> np.ndarray:
    """Central differences with one Richardson step; ``(N, d) -> (N, d, ...)``."""
    N, d = points.shape
    eye = np.eye(d)
    offs = np.concatenate([h * eye, -h * eye, 0.5 * h * eye, -0.5 * h * eye])  # (4d, d)
    Q = (points[:, None, :] + offs[None]).reshape(-1, d)
    V = func(Q)
    V = V.reshape((N, 4, d) + V.shape[1:])
    coarse = (V[:, 0] - V[:, 1]) / (2 * h)
    fine = (V[:, 2] - V[:, 3]) / h
    return (4.0 * fine - coarse) / 3.0


def christoffel_fd_batch(spec: MetricSpec, points: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """``Gamma^a_bc`` from differenced metric values only."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    g = metric_batch(spec, points)
    ginv = np.linalg.inv(g)
    dg = _fd_jacobian(lambda q: metric_batch(spec, q), points, h)  # (N, e, a, b) = d_e g_ab
    lowered = 0.5 * (
        np.einsum("nbdc->ndbc", dg) + np.einsum("ncdb->ndbc", dg) - dg
    )  # (N, d, b, c) = Gamma_{d,bc} with the first index lowered
    return np.einsum("nad,ndbc->nabc", ginv, lowered)


def _riemann_from(g: np.ndarray, G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """``R_abcd`` from metric, ``Gamma^a_bc`` and ``dG[e, a, b, c] = d_e Gamma^a_bc`` (batched)."""
    # op[l, c, a, b] = (R(d_a, d_b) d_c)^l
    op = (
        np.einsum("nalbc->nlcab", dG)
        - np.einsum("nblac->nlcab", dG)
        + np.einsum("nlam,nmbc->nlcab", G, G)
        - np.einsum("nlbm,nmac->nlcab", G, G)
    )
    return np.einsum("ndl,nlcab->nabcd", g, op)


def curvature_fd_batch(spec: MetricSpec, points: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    g = metric_batch(spec, points)
    G = christoffel_fd_batch(spec, points, h)
    dG = _fd_jacobian(lambda q: christoffel_fd_batch(spec, q, h), points, h)
    return _riemann_from(g, G, dG)


def curvature_fd_oracle(spec: MetricSpec, P, h: float = FD_STEP) -> CurvatureTable:
    """``R`` from :func:`metric_at` alone by nested central differences.

    Entries are stored densely (every index tuple), since the differenced
    values are never exactly zero.
    """
    if not h > 1e-12:
        raise ValueError("finite-difference step underflow")
    P = as_coords(P)
    _check_domain(spec, P)
    R = curvature_fd_batch(spec, P[None], h)[0]
    entries = {idx: float(R[idx]) for idx in itertools.product(range(spec.dim), repeat=4)}
    return CurvatureTable(0, spec.names, entries)


def covariant_derivative_fd_oracle(
    spec: MetricSpec, points: np.ndarray, h: float = FD_STEP, h_outer: float = 1e-2, chunk: int = 16
) -> np.ndarray:
    """``nabla R`` from differenced metric values; shape ``(N, e, a, b, c, d)``.

    The outer derivative of the differenced curvature uses the larger step
    ``h_outer`` to keep rounding noise of the inner differences in check.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = []
    for start in range(0, len(points), chunk):
        pts = points[start : start + chunk]
        R = curvature_fd_batch(spec, pts, h)
        G = christoffel_fd_batch(spec, pts, h)
        dR = _fd_jacobian(lambda q: curvature_fd_batch(spec, q, h), pts, h_outer)
        nab = (
            dR
            - np.einsum("nmea,nmbcd->neabcd", G, R)
            - np.einsum("nmeb,namcd->neabcd", G, R)
            - np.einsum("nmec,nabmd->neabcd", G, R)
            - np.einsum("nmed,nabcm->neabcd", G, R)
        )
        out.append(nab)
    return np.concatenate(out)


def _scalars(g: np.ndarray, R: np.ndarray, dR: np.ndarray) -> tuple[np.ndarray, dict[str, float]]:
    ginv = np.linalg.inv(g)
    ric = np.einsum("ad,abcd->bc", ginv, R)
    ric_up = ginv @ ric @ ginv
    R_up = np.einsum("abcd,ai,bj,ck,dl->ijkl", R, ginv, ginv, ginv, ginv, optimize=True)
    R_mixed = np.einsum("abcd,ci,dj->abij", R, ginv, ginv, optimize=True)
    dR_up = np.einsum("eabcd,ez,ai,bj,ck,dl->zijkl", dR, ginv, ginv, ginv, ginv, ginv, optimize=True)
    scalars = {
        "scalar": float(np.einsum("bc,bc->", ginv, ric)),
        "ricci_sq": float(np.einsum("ab,ab->", ric, ric_up)),
        "riemann_sq": float(np.einsum("abcd,abcd->", R, R_up)),
        "riemann_cubed": float(np.einsum("abcd,cdef,efab->", R_mixed, R_mixed, R_mixed, optimize=True)),
        "nabla_riemann_sq": float(np.einsum("eabcd,eabcd->", dR, dR_up)),
    }
    return ric, scalars


def ricci_and_scalars(spec: MetricSpec, P, method: str = "closed") -> tuple[np.ndarray, dict[str, float]]:
    """Ricci tensor and the five-entry scalar catalog at ``P``.

    ``method="closed"`` contracts the closed-form tower; ``method="fd"`` uses
    only differenced metric values.  Catalog: scalar curvature, ``|Ric|^2``,
    ``|R|^2``, ``R_ab^cd R_cd^ef R_ef^ab`` and ``|nabla R|^2``.
    """
    P = as_coords(P)
    _check_domain(spec, P)
    g = metric_at(spec, P)
    if abs(np.linalg.det(g)) < 1e-300:
        raise np.linalg.LinAlgError("singular metric")
    if method == "closed":
        R = curvature_tensor(spec, P, 0)
        dR = curvature_tensor(spec, P, 1)
        dR = np.moveaxis(dR, -1, 0)  # derivative index first
    elif method == "fd":
        R = curvature_fd_batch(spec, P[None])[0]
        dR = covariant_derivative_fd_oracle(spec, P[None])[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    return _scalars(g, R, dR)


def ricci_and_scalars_batch(spec: MetricSpec, points, method: str = "closed") -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """:func:`ricci_and_scalars` over ``(N, 2p)`` points, differencing in batches."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    for P in points:
        _check_domain(spec, P)
    g = metric_batch(spec, points)
    if method == "closed":
        R = np.stack([curvature_tensor(spec, P, 0) for P in points])
        dR = np.stack([np.moveaxis(curvature_tensor(spec, P, 1), -1, 0) for P in points])
    elif method == "fd":
        R = curvature_fd_batch(spec, points)
        dR = covariant_derivative_fd_oracle(spec, points, chunk=128)
    else:
        raise ValueError(f"unknown method {method!r}")
    rics, values = [], {name: [] for name in SCALAR_NAMES}
    for n in range(len(points)):
        ric, sc = _scalars(g[n], R[n], dR[n])
        rics.append(ric)
        for name in SCALAR_NAMES:
            values[name].append(sc[name])
    return np.stack(rics), {k: np.array(v) for k, v in values.items()}


# ----------------------------------------------------------------------------
# frames and the hypersurface picture


def hyperbolic_frame(spec: MetricSpec, P) -> np.ndarray:
    """Columns ``X_i = d_i - 1/2 sum_j Xi_ij dt_j`` then ``Xt_i = dt_i``."""
    P = as_coords(P)
    _check_domain(spec, P)
    p = spec.p
    F = np.eye(2 * p)
    F[p:, :p] = -0.5 * spec.xi(P[:p])
    return F


def second_fundamental_form(spec: Hpsi, P) -> np.ndarray:
    """``L_ij = d_i d_j psi`` at the x-part of ``P``."""
    if not isinstance(spec, Hpsi):
        raise TypeError("second fundamental form needs an Hpsi metric")
    return spec.hessian(np.asarray(P, dtype=float)[: spec.p])


@dataclass(frozen=True)
class Embedding:
    point: np.ndarray  # image in R^{p,p+1}, basis (e_1..e_p, et_1..et_p, ec)
    normal: np.ndarray
    tangents: np.ndarray  # rows dPsi(d_i), then dPsi(dt_i)
    ambient: np.ndarray  # inner product of R^{p,p+1}

    def pullback(self) -> np.ndarray:
        return self.tangents @ self.ambient @ self.tangents.T


def ambient_inner_product(p: int) -> np.ndarray:
    n = 2 * p + 1
    A = np.zeros((n, n))
    A[:p, p : 2 * p] = np.eye(p)
    A[p : 2 * p, :p] = np.eye(p)
    A[-1, -1] = 1.0
    return A


def embed_hypersurface(spec: Hpsi, P) -> Embedding:
    """Image point, unit normal ``-sum psi_i et_i + ec`` and tangent images."""
    if not isinstance(spec, Hpsi):
        raise TypeError("embedding needs an Hpsi metric")
    P = np.asarray(P, dtype=float)
    p = spec.p
    if P.size == p:
        P = np.concatenate([P, np.zeros(p)])
    x, xt = P[:p], P[p:]
    grad = spec.gradient(x)
    point = np.concatenate([x, xt, [spec.psi_value(x)]])
    normal = np.concatenate([np.zeros(p), -grad, [1.0]])
    tangents = np.zeros((2 * p, 2 * p + 1))
    tangents[:p, :p] = np.eye(p)
    tangents[:p, -1] = grad
    tangents[p:, p : 2 * p] = np.eye(p)
    return Embedding(point, normal, tangents, ambient_inner_product(p))


def grid_points(center: Iterable[float], half_width: float, n: int) -> np.ndarray:
    """Tensor grid of ``n`` points per axis around ``center``."""
    center = np.asarray(list(center), dtype=float)
    axes = [np.linspace(c - half_width, c + half_width, n) for c in center]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(center))


def signature(g: np.ndarray, tol: float = 1e-12) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(g)
    scale = max(1.0, float(np.max(np.abs(ev))))
    return int(np.sum(ev < -tol * scale)), int(np.sum(ev > tol * scale))

