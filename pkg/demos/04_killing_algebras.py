"""Killing vector fields and their flows.

The dimension of the Killing algebra depends only on the shape of f'':
10 when it vanishes, 8 when it is a nonzero constant, 6 for an exponential or
a translated power, and 5 otherwise.
"""

import numpy as np

from gpw import killing
from gpw.smoothfn import parse

for dsl in ("poly:0", "poly:0,0,1", "exp:1@1", "poly:0,0,0,0,1", "exp:1@1+1@2"):
    cert = killing.dimension_certificate(parse(dsl))
    print(f"{dsl:18s} dim {cert.table}  certificate consistent: {cert.consistent}")

f = parse("poly:0,0,1")
fields = killing.catalog(f)
for X in fields:
    print(" ", X)

pts = np.random.default_rng(0).uniform(-1, 1, (20, 4))
by_name = {X.name: X for X in fields}
X7 = by_name["X7"]
print("X7 flow at t=0.5 is an isometry to", killing.flow_isometry_residual(f, X7, 0.5, pts))

table = killing.bracket_table(f, fields)
print("brackets close in the catalog span, residual", table["span_residual"])
print("[X1, X4] =", killing.lie_bracket(by_name["X1"], by_name["X4"]))
