"""Local invariants alpha_p and an explicit isometry.

alpha_p = f^(p+2) (f'')^(p-1) / (f''')^p is unchanged by isometries.  When two
metrics share the whole sequence at two points, the map
exp_{P2} o Phi o log_{P1} between normalized frames is an isometry.
"""

import numpy as np

from gpw import models
from gpw.smoothfn import parse

quartic = parse("poly:0,0,0,0,1")
print("alpha_2, alpha_3 of y^4 at y=1:", models.alpha(quartic, 1.0, 2), models.alpha(quartic, 1.0, 3))
print("alpha sequence of e^y:", models.alpha_sequence(parse("exp:1@1"), 0.0, 6))

for dsl in ("poly:0", "poly:0,0,1", "exp:1@1", "poly:0,0,0,0,1", "exp:1@1+1@2"):
    c = models.classify(parse(dsl))
    print(f"{dsl:18s} -> {c.kind.value} {c.params}")

print("alpha_2 = 1/2 family:", models.solve_alpha2_ode(0.5).describe())

res = models.build_isometry(parse("exp:1@1"), 0.0, parse("exp:2@3"), 5.0)
print("e^y at 0 vs 2 e^{3y} at 5:", res.status, "grid residual", res.residual)
print("image of the base point:", res(np.zeros(4))[0])

miss = models.build_isometry(parse("exp:1@1"), 0.3, parse("exp:1@1+1@2"), 0.3, K=4)
print("e^y vs e^y + e^{2y}:", miss.status, "at p =", miss.mismatch_p)

print("model symmetry groups: dim G0 =", models.group_dimension("G0"), " dim G1 =", models.group_dimension("G1"))
