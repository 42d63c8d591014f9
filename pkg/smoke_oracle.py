import time

import numpy as np

from levymax.models import BrownianModel, kobol
from levymax.oracle import bm_joint_cdf, mc_extremum_transform, mc_joint_cdf

print(f"bm example: {bm_joint_cdf(0.3, 0.0, 1.0, 0.0, 0.3)!r} (want 0.47724986805182085)")
print(f"bm a1=a2=0: {bm_joint_cdf(0.3, 0.0, 1.0, 0.0, 0.0)!r}")
print(f"bm a2 huge: {bm_joint_cdf(0.3, 0.0, 1.0, 0.15, 1e9)!r} vs "
      f"{__import__('scipy.stats', fromlist=['norm']).norm.cdf(0.5)!r}")
print(f"bm a2 huge mu>0: {bm_joint_cdf(0.3, 0.2, 1.0, 0.15, 1e9)!r}")

bm = BrownianModel(sigma2=0.09, mu=0.05)
t0 = time.time()
rep = mc_joint_cdf(bm, 1.0, 0.1, 0.25, n_paths=200_000, n_steps=2_000, seed=11)
exact = bm_joint_cdf(0.3, 0.05, 1.0, 0.1, 0.25)
print(f"bm mc: {rep.value:.6f} +- {rep.est_error:.1e} vs exact {exact:.6f} "
      f"({abs(rep.value - exact) / rep.est_error:.2f} sigma, {time.time() - t0:.1f}s)")

m02 = kobol(nu=0.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)
t0 = time.time()
rep = mc_joint_cdf(m02, 0.25, -0.075, 0.025, n_paths=200_000, n_steps=1_500, seed=3)
print(f"kobol mc: {rep.value:.6f} +- {rep.est_error:.1e} vs table 0.052853 "
      f"({abs(rep.value - 0.0528532412024316) / rep.est_error:.2f} sigma, {time.time() - t0:.1f}s)")

t0 = time.time()
reps = mc_extremum_transform(m02, 4.0, [0.5, 1.5], side="min", n_paths=60_000,
                             n_steps=1_200, seed=5)
for s, r in zip([0.5, 1.5], reps):
    print(f"inf transform s={s}: {r.value:.5f} +- {r.est_error:.1e}")
print(f"({time.time() - t0:.1f}s)")
