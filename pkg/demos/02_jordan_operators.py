"""Jacobi and skew-symmetric curvature operators are nilpotent with fixed Jordan type.

For every unit vector the Jacobi operator has Jordan profile [1, 0] (one
2x2 block), and for every definite plane the skew curvature operator has
profile [2, 0] (two 2x2 blocks).  We sample both classes of vectors and planes.
"""

from gpw import geometry, operators
from gpw.smoothfn import parse

for dsl in ("poly:0,0,1", "exp:1@1+1@2", "poly:0,0,0,0,1"):
    spec = geometry.Mf(parse(dsl))
    oss = operators.verify_osserman(spec, n_samples=500, seed=7)
    ip = operators.verify_ivanov_petrova(spec, n_samples=500, seed=7)
    print(f"{dsl:18s} Jacobi {oss.profiles}  skew {ip.profiles}  pass={oss.passed and ip.passed}")

# the flat case: every operator vanishes
flat = operators.verify_osserman(geometry.Mf(parse("poly:0")), n_samples=50, seed=0)
print("flat profiles:", flat.profiles)
