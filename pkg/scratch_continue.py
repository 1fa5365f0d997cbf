"""Scratch: continuation through the fold + full PO characterization."""
import numpy as np
from scarbench.pes import SurrogateSurface, MassParameters, minimum_energy_path
from scarbench.classical import (
    SectionPoint, newton_fixed_point, find_periodic_orbit, continue_branch,
    suggest_dt)
from scarbench.units import hartree_to_cm

def design_U(c3, q_star, q_M, q_m):
    b4 = -c3 / 4.0
    b3 = c3 * (q_M + q_m) / 2.0
    b2 = -1.5 * c3 * q_M * q_m
    C = -c3 * (q_star**3 - 1.5 * (q_M + q_m) * q_star**2 + 3 * q_M * q_m * q_star)
    return -C, b2, b3, b4

b1, b2, b3, b4 = design_U(0.03, -0.55, -0.2, 0.35)
surf = SurrogateSurface(a1=0.45, a3=0.0, b1=b1, b2=b2, b3=b3, b4=b4)
m = MassParameters()
mep = minimum_energy_path(surf, np.linspace(0, np.pi, 181))
dt = suggest_dt(surf, m)

E0 = 0.009151
fp, T, _ = newton_fixed_point(SectionPoint(1.0871, 6.7081), E0, surf, mep, m, dt=dt)
print("unstable fp at E0:", fp)

import time
t0 = time.time()
po = find_periodic_orbit(fp, E0, surf, mep, m, dt=dt)
print(f"PO characterization took {time.time()-t0:.1f}s")
print(f"  period={po.period:.2f} action={po.action:.4f} maslov={po.maslov} "
      f"trace={po.trace:.4f} (fd {po.trace_fd:.4f}) stab={po.stability}")
print(f"  closure={po.closure_residual:.2e} det(M)={np.linalg.det(po.monodromy):.8f}")
print("  turning points:")
for tp in po.turning_points:
    print(f"    R={tp.R:.4f} theta={tp.theta:.4f} P_R={tp.P_R:+.2e} P_th={tp.P_theta:+.2e} t={tp.t:.1f}")

t0 = time.time()
scan = continue_branch(po, (0.006, 0.028), step=0.0008, surface=surf, mep=mep,
                       masses=m, dt=dt)
print(f"continuation took {time.time()-t0:.1f}s")
print("E_bif =", scan.e_bif, f"({hartree_to_cm(scan.e_bif):.2f} cm-1)" if scan.e_bif else "")
print("tr at fold =", scan.e_bif_trace)
print("E_loss =", scan.e_loss, f"({hartree_to_cm(scan.e_loss):.2f} cm-1)" if scan.e_loss else "")
print("failure =", scan.failure)
for name, branch in scan.branches.items():
    es = [s.energy for s in branch]
    print(f"branch {name}: {len(branch)} samples, E range {min(es):.6f}..{max(es):.6f}")
    for s in branch[::max(1, len(branch)//8)]:
        print(f"   E={s.energy:.6f} psi={s.psi:.4f} P={s.p_psi:+.4f} tr={s.trace:+.4f}")
