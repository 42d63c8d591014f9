import numpy as np

from levymax.contours import SinhContour, select_params
from levymax.models import BrownianModel, kobol
from levymax.whf import build_table, decompose, phi_from_identity, phi_minus, phi_plus

rng = np.random.default_rng(7)

for mu in (0.0, 0.1):
    bm = BrownianModel(sigma2=0.09, mu=mu)
    q = 1.0
    s = np.sqrt(mu * mu + 2 * 0.09 * q)
    kp = (s - mu) / 0.09
    km = (s + mu) / 0.09
    lo = select_params(bm.profile, "eta_minus", 1e-13, hardy_norm=1e3)
    hi = select_params(bm.profile, "xi_plus", 1e-13, hardy_norm=1e3)
    xi = rng.uniform(-5, 5, 8) + 1j * rng.uniform(-0.3, 0.3, 8)
    fp = phi_plus(bm, q, xi, lo)
    fm = phi_minus(bm, q, xi, hi)
    print(f"BM mu={mu}: plus err {np.max(np.abs(fp - kp / (kp - 1j * xi))):.3e}  "
          f"minus err {np.max(np.abs(fm - km / (km + 1j * xi))):.3e}")

m02 = kobol(nu=0.2, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1)
q = np.log(2.0) / 0.25
lo = select_params(m02.profile, "eta_minus", 1e-15, hardy_norm=1e3, decay_rate=0.9)
hi = select_params(m02.profile, "xi_plus", 1e-15, hardy_norm=1e3, decay_rate=0.9)
print(f"grid sizes: lo {lo.grid.size}, hi {hi.grid.size}")
xi = rng.uniform(-20, 20, 10) + 1j * rng.uniform(-1.8, 0.9, 10)
fp = phi_plus(m02, q, xi, lo, assume_separated=True)
fm = phi_minus(m02, q, xi, hi, assume_separated=True)
prod = fp * fm
target = q / (q + np.asarray(m02.psi(xi)))
print(f"M02 identity err {np.max(np.abs(prod - target)):.3e}")

tab = build_table(m02, q, hi, lo)
shifted = SinhContour(
    omega1=lo.omega1 - 0.5, b=lo.b, omega=lo.omega, grid=lo.grid,
    strip_halfwidth=lo.strip_halfwidth,
)
mod = np.abs(lo.nodes) < 2.0
direct = phi_plus(m02, q, lo.nodes[mod], shifted, assume_separated=True)
print(f"table plus_on_minus vs shifted-copy direct ({mod.sum()} nodes): "
      f"{np.max(np.abs(tab.plus_on_minus[mod] - direct)):.3e}")
print(f"table Hermitian: {np.max(np.abs(tab.plus_on_minus[::-1] - np.conj(tab.plus_on_minus))):.3e}")

fv = kobol(nu=0.5, lambda_minus=-2.0, lambda_plus=1.0, m2=0.1, mu=0.1)
for qv in (2.0, 1e4):
    am, ev = decompose(fv, qv, "minus")
    print(f"fv q={qv}: a_minus={am:.12f}")
ap, _ = decompose(fv, 2.0, "plus")
a0, _ = decompose(m02, q, "plus")
print(f"fv a_plus={ap}  m02 a_plus={a0}")

am, ev = decompose(fv, 2.0, "minus")
big = np.array([1e5, 1e6], dtype=complex)
tail = ev(big, assume_separated=True)
print(f"tail resid at 1e5,1e6: {np.abs(tail)}  ratio={abs(tail[0] / tail[1]):.4f} (expect ~{10**0.5:.4f})")

ap2, evp = decompose(fv, 2.0, "plus")
xi_t = np.array([0.3 + 0.2j, -4.0 + 0.1j])
vp = evp(xi_t, assume_separated=True)
hi_fv = select_params(fv.profile, "xi_plus", 1e-15, hardy_norm=1e3, decay_rate=0.9)
vm = phi_minus(fv, 2.0, xi_t, hi_fv, assume_separated=True)
ident = phi_from_identity(fv, 2.0, vm, fv.psi(xi_t))
print(f"fv phi_plus drift-split vs identity: {np.max(np.abs(vp - ident)):.3e}")

mirror = kobol(nu=0.5, lambda_minus=-1.0, lambda_plus=2.0, m2=0.1, mu=-0.1)
amir, _ = decompose(mirror, 2.0, "plus")
print(f"mirror a_plus={amir:.12e} vs fv a_minus={decompose(fv, 2.0, 'minus')[0]:.12e}")
