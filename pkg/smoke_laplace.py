import math

import numpy as np

from levymax.contours import select_params
from levymax.laplace import BromwichScheme, GwrScheme, invert_gwr, invert_sinh_bromwich
from levymax.laplace import _gaver_sequence, _wynn_rho
from levymax.models import kobol

# which rho entries are good on 1/(q+1), T=1?
seq = _gaver_sequence(GwrScheme(T=1.0), lambda q: 1.0 / (q + 1.0))
target = math.exp(-1.0)
print("gaver seq errors:", [f"{s - target:.2e}" for s in seq])

prev2 = [0.0] * (len(seq) + 1)
prev1 = list(seq)
for k in range(1, len(seq)):
    cur = [prev2[j + 1] + k / (prev1[j + 1] - prev1[j]) for j in range(len(prev1) - 1)]
    if k % 2 == 0:
        print(f"k={k}: rho^1={cur[0] - target:.3e}", end="")
        if len(cur) > 1:
            print(f"  rho^2={cur[1] - target:.3e}")
        else:
            print()
    prev2, prev1 = prev1, cur

for T in (0.7, 3.0):
    print(f"1/q T={T}: err {invert_gwr(GwrScheme(T=T), lambda q: 1.0 / q) - 1.0:.2e}")
print(f"1/(q+1) T=1: err {invert_gwr(GwrScheme(T=1.0), lambda q: 1.0 / (q + 1.0)) - target:.2e}")
print(f"1/q^2 T=2: err {invert_gwr(GwrScheme(T=2.0), lambda q: 1.0 / q**2) - 2.0:.2e}")
shifted = invert_gwr(GwrScheme(T=1.0, shift_a=2.0), lambda q: 1.0 / (q + 1.0))
print(f"1/(q+1) T=1 shift 2: err {shifted - target:.2e}")

M12 = kobol(nu=1.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)
for fam in ("bromwich-1", "bromwich-2"):
    got = {}
    for name, f in (("1/q", lambda q: 1.0 / q), ("1/(q+1)", lambda q: 1.0 / (q + 1.0))):
        c = select_params(M12.profile, "bromwich", 1e-13, family=fam, T=1.0)
        v = invert_sinh_bromwich(BromwichScheme(c), f, T=1.0)
        got[name] = v
    print(f"{fam}: n={c.grid.size} 1/q err {got['1/q'] - 1.0:.2e}  "
          f"1/(q+1) err {got['1/(q+1)'] - target:.2e}")

errs = []
for tol in (1e-6, 1e-9, 1e-13):
    c = select_params(M12.profile, "bromwich", tol, family="bromwich-1", T=1.0)
    v = invert_sinh_bromwich(BromwichScheme(c), lambda q: 1.0 / (q + 1.0), T=1.0)
    errs.append(abs(v - target))
print("bromwich err vs tol:", [f"{e:.2e}" for e in errs])
