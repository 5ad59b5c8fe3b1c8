"""Curvature of a plane wave and its geodesics.

The metric on R^4 with coordinates (x, y, xt, yt) is

    g = -2 f(y) dx^2 + 2 dx dxt + 2 dy dyt.

Only one component class of each covariant derivative of the curvature
survives, and it carries f^(k+2)(y).  Geodesics have closed forms, which we
compare against a Runge-Kutta integration of the geodesic equation.
"""

import numpy as np

from gpw import geodesics, geometry
from gpw.smoothfn import parse

f = parse("exp:1@1+1@2")  # f(y) = e^y + e^{2y}
spec = geometry.Mf(f)
P = np.array([0.3, 0.2, -1.0, 0.5])

print("metric at P:\n", geometry.metric_at(spec, P))
for k in range(4):
    table = geometry.curvature(spec, P, k)
    print(f"nabla^{k} R nonzero entries: {len(table)}; orbit value {table[(0, 1, 1, 0) + (1,) * k]:.6f}")

fd = geometry.curvature_fd_oracle(spec, P)
print("finite-difference curvature differs by", geometry.curvature(spec, P, 0).max_abs_difference(fd))

ric, scalars = geometry.ricci_and_scalars(spec, P)
print("Ricci max", np.abs(ric).max(), "scalars", scalars)

# a geodesic, closed form against RK4
g = geodesics.GeodesicSpec.from_arrays(P, [0.4, 0.3, 0.0, 0.1])
closed = geodesics.geodesic_at(spec, g, 5.0).as_array()
rk4 = geodesics.rk4_oracle(spec, g, 5.0, steps=10_000).as_array()
print("closed form at t=5:", closed)
print("RK4 difference:", np.abs(closed - rk4).max())

# the exponential map is inverted without iteration
Q = np.array([1.0, -0.5, 2.0, 0.0])
v = geodesics.log_map(spec, P, Q)
print("exp(log Q) - Q:", np.abs(geodesics.exp_map(spec, P, v).as_array() - Q).max())
