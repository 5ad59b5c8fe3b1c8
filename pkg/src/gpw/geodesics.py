"""Closed-form geodesics, exponential map and its inverse.

Along a geodesic of a generalized plane wave the ``x`` coordinates are
affine, ``x(t) = alpha + beta t``, and the ``xt`` coordinates are

    xt_k(t) = alphat_k + betat_k t - sum_ij beta_i beta_j int_0^t (t - r) Gamma_ijk(x(r)) dr.

The iterated integral has been folded into a single one with kernel
``t - r``.  For ``Mf`` only ``f'`` enters, and the kernel integral has an
exact expression through a primitive of ``f``.  The system is triangular in
``(x, xt)`` so the inverse of the exponential map needs no iteration.

:func:`rk4_oracle` integrates the second-order geodesic equation built from
the dense Christoffel symbols and shares nothing else with the closed form.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import ChartPoint, MetricSpec, Mf, as_coords, christoffel_batch, metric_batch
from .smoothfn import SmoothFunction, UnrepresentableError, derivative, primitive

__all__ = [
    "GeodesicSpec",
    "exp_map",
    "exp_map_batch",
    "geodesic_at",
    "geodesic_batch",
    "kernel_integral",
    "log_map",
    "log_map_batch",
    "rk4_batch",
    "rk4_oracle",
    "rk4_trajectory",
    "speed_drift",
    "trajectory",
]

GL_NODES = 32
MAX_PANELS = 256


@functools.lru_cache(maxsize=None)
def _gauss_legendre(n: int = GL_NODES) -> tuple[np.ndarray, np.ndarray]:
    u, w = np.polynomial.legendre.leggauss(n)
    return (u + 1.0) / 2.0, w / 2.0  # nodes and weights on [0, 1]


def _panel_rule(t: np.ndarray, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss nodes ``r`` and weights on ``[0, t]``, shape ``t.shape + (panels * 32,)``."""
    u, w = _gauss_legendre()
    edges = np.arange(panels)[:, None]
    s = ((edges + u[None]) / panels).ravel()
    ws = np.tile(w, panels) / panels
    t = np.asarray(t, dtype=float)[..., None]
    return t * s, t * ws


@dataclass(frozen=True)
class GeodesicSpec:
    """Initial point ``(alpha, alphat)`` and velocity ``(beta, betat)``."""

    start: ChartPoint
    beta: tuple[float, ...]
    beta_tilde: tuple[float, ...]

    def __post_init__(self):
        beta = tuple(float(v) for v in self.beta)
        bt = tuple(float(v) for v in self.beta_tilde)
        if not (len(beta) == len(bt) == self.start.p):
            raise ValueError("velocity does not match the chart dimension")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta_tilde", bt)

    @classmethod
    def from_arrays(cls, start, velocity) -> "GeodesicSpec":
        start = as_coords(start)
        velocity = np.asarray(velocity, dtype=float)
        p = start.size // 2
        return cls(ChartPoint.from_array(start), tuple(velocity[:p]), tuple(velocity[p:]))

    @property
    def velocity(self) -> np.ndarray:
        return np.array(self.beta + self.beta_tilde)


# ----------------------------------------------------------------------------
# the kernel integral


def kernel_integral(f: SmoothFunction, a, b, t) -> np.ndarray:
    """``I(t) = int_0^t (t - r) f'(a + b r) dr``, broadcast over ``a, b, t``.

    Uses ``(F(a+bt) - F(a) - b t f(a)) / b**2`` when ``|b t| > 1`` and a
    primitive ``F`` exists, and 32-node Gauss-Legendre otherwise.
    """
    a, b, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, t)))
    out = np.empty(a.shape)
    fp = derivative(f, 1)
    try:
        F = primitive(f)
    except UnrepresentableError:
        F = None
    closed = np.abs(b * t) > 1.0 if F is not None else np.zeros(a.shape, dtype=bool)
    if closed.any():
        ac, bc, tc = a[closed], b[closed], t[closed]
        with np.errstate(over="ignore", invalid="ignore"):
            out[closed] = (F._evaluate(ac + bc * tc) - F._evaluate(ac) - bc * tc * f._evaluate(ac)) / bc**2
    quad = ~closed
    if quad.any():
        aq, bq, tq = a[quad], b[quad], t[quad]
        spread = float(np.max(np.abs(bq * tq), initial=0.0))
        panels = min(MAX_PANELS, max(1, math.ceil(spread)))
        r, w = _panel_rule(tq, panels)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = (tq[:, None] - r) * fp._evaluate(aq[:, None] + bq[:, None] * r)
        out[quad] = np.sum(w * vals, axis=-1)
    return out


def _correction_general(spec: MetricSpec, alpha: np.ndarray, beta: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``sum_ij beta_i beta_j int_0^t (t - r) Gamma_ijk(alpha + beta r) dr``; shapes ``(N, p)``."""
    panels = min(MAX_PANELS, max(1, math.ceil(float(np.max(np.abs(t), initial=0.0)))))
    r, w = _panel_rule(t, panels)  # (N, M)
    x = alpha[:, None, :] + beta[:, None, :] * r[..., None]
    G = spec.gamma_lower(x)  # (N, M, p, p, p)
    contracted = np.einsum("nmijk,ni,nj->nmk", G, beta, beta)
    return np.einsum("nm,nmk->nk", w * (t[:, None] - r), contracted)


def _correction(spec: MetricSpec, alpha, beta, t) -> np.ndarray:
    if isinstance(spec, Mf):
        I = kernel_integral(spec.f, alpha[:, 1], beta[:, 1], t)
        out = np.empty_like(alpha)
        out[:, 0] = -2.0 * beta[:, 0] * beta[:, 1] * I
        out[:, 1] = beta[:, 0] ** 2 * I
        return out
    return _correction_general(spec, alpha, beta, t)


# ----------------------------------------------------------------------------
# closed form


def geodesic_batch(spec: MetricSpec, starts, velocities, t) -> np.ndarray:
    """Positions at time ``t`` for many geodesics; ``starts``/``velocities`` are ``(N, 2p)``."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    velocities = np.atleast_2d(np.asarray(velocities, dtype=float))
    starts, velocities = np.broadcast_arrays(starts, velocities)
    p = spec.p
    t = np.broadcast_to(np.asarray(t, dtype=float), starts.shape[:1])
    alpha, beta = starts[:, :p], velocities[:, :p]
    x = alpha + beta * t[:, None]
    xt = starts[:, p:] + velocities[:, p:] * t[:, None] - _correction(spec, alpha, beta, t)
    return np.concatenate([x, xt], axis=1)


def geodesic_at(spec: MetricSpec, g: GeodesicSpec, t: float) -> ChartPoint:
    """Closed-form point on the geodesic ``g`` at time ``t``."""
    out = geodesic_batch(spec, g.start.as_array(), g.velocity, t)[0]
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"geodesic value overflowed at t={t}")
    return ChartPoint.from_array(out)


def trajectory(spec: MetricSpec, g: GeodesicSpec, times) -> np.ndarray:
    """Closed-form positions at each of ``times``, shape ``(len(times), 2p)``."""
    times = np.asarray(times, dtype=float)
    n = times.size
    return geodesic_batch(spec, np.tile(g.start.as_array(), (n, 1)), np.tile(g.velocity, (n, 1)), times)


def exp_map_batch(spec: MetricSpec, P, V) -> np.ndarray:
    return geodesic_batch(spec, P, V, 1.0)


def exp_map(spec: MetricSpec, P, v) -> ChartPoint:
    return ChartPoint.from_array(exp_map_batch(spec, as_coords(P), v)[0])


def log_map_batch(spec: MetricSpec, P, Q) -> np.ndarray:
    """Initial velocities of the geodesics from ``P`` reaching ``Q`` at ``t = 1``."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    P, Q = np.broadcast_arrays(P, Q)
    p = spec.p
    beta = Q[:, :p] - P[:, :p]
    ones = np.ones(len(P))
    beta_t = Q[:, p:] - P[:, p:] + _correction(spec, P[:, :p], beta, ones)
    return np.concatenate([beta, beta_t], axis=1)


def log_map(spec: MetricSpec, P, Q) -> np.ndarray:
    return log_map_batch(spec, as_coords(P), as_coords(Q))[0]


# ----------------------------------------------------------------------------
# numerical oracle


def _rhs(spec: MetricSpec, state: np.ndarray) -> np.ndarray:
    n = state.shape[1] // 2
    pos, vel = state[:, :n], state[:, n:]
    G = christoffel_batch(spec, pos)
    acc = -np.einsum("nabc,nb,nc->na", G, vel, vel)
    return np.concatenate([vel, acc], axis=1)


def rk4_batch(spec: MetricSpec, starts, velocities, t: float, steps: int, record: int = 0):
    """Classical RK4 on the geodesic equation for many geodesics at once.

    Returns the final state ``(N, 4p)`` or, when ``record > 0``, also the
    states at ``record + 1`` equally spaced sample indices.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    state = np.concatenate(
        [np.atleast_2d(np.asarray(starts, dtype=float)), np.atleast_2d(np.asarray(velocities, dtype=float))],
        axis=1,
    )
    h = float(t) / steps
    keep = set(np.linspace(0, steps, record + 1).round().astype(int)) if record else set()
    history = [state.copy()] if 0 in keep else []
    for i in range(1, steps + 1):
        k1 = _rhs(spec, state)
        k2 = _rhs(spec, state + 0.5 * h * k1)
        k3 = _rhs(spec, state + 0.5 * h * k2)
        k4 = _rhs(spec, state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if i in keep:
            history.append(state.copy())
    if record:
        return state, np.stack(history, axis=1)
    return state


def rk4_oracle(spec: MetricSpec, g: GeodesicSpec, t: float, steps: int = 10_000) -> ChartPoint:
    """Point reached by integrating the geodesic equation numerically."""
    state = rk4_batch(spec, g.start.as_array(), g.velocity, t, steps)
    return ChartPoint.from_array(state[0, : 2 * spec.p])


def rk4_trajectory(spec: MetricSpec, g: GeodesicSpec, t: float, steps: int = 10_000, samples: int = 100):
    """Sample times and ``(samples + 1, 4p)`` states (position then velocity)."""
    _, hist = rk4_batch(spec, g.start.as_array(), g.velocity, t, steps, record=samples)
    times = np.linspace(0, steps, samples + 1).round() * (float(t) / steps)
    return times, hist[0]


def speed_drift(spec: MetricSpec, states: np.ndarray) -> float:
    """Largest deviation of ``g(v, v)`` from its initial value along ``states``."""
    n = states.shape[-1] // 2
    g = metric_batch(spec, states[:, :n])
    speed = np.einsum("na,nab,nb->n", states[:, n:], g, states[:, n:])
    return float(np.max(np.abs(speed - speed[0])))
