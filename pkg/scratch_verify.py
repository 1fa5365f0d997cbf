"""Scratch: verify the SN pair exists for the real dynamics and pin E_bif."""
import sys
import numpy as np
from scarbench.pes import SurrogateSurface, MassParameters, minimum_energy_path
from scarbench.classical import (
    SectionPoint, map_batch, newton_fixed_point, fd_monodromy,
    find_periodic_orbit, continue_branch, suggest_dt)
from scarbench.units import hartree_to_cm

def design_U(c3, q_star, q_M, q_m):
    b4 = -c3 / 4.0
    b3 = c3 * (q_M + q_m) / 2.0
    b2 = -1.5 * c3 * q_M * q_m
    C = -c3 * (q_star**3 - 1.5 * (q_M + q_m) * q_star**2 + 3 * q_M * q_m * q_star)
    return -C, b2, b3, b4

c3 = float(sys.argv[1]) if len(sys.argv) > 1 else 0.03
b1, b2, b3, b4 = design_U(c3, -0.55, -0.2, 0.35)
surf = SurrogateSurface(a1=0.45, a3=0.0, b1=b1, b2=b2, b3=b3, b4=b4)
print("params:", surf.params())
m = MassParameters()
mep = minimum_energy_path(surf, np.linspace(0, np.pi, 181))
dt = suggest_dt(surf, m)
print("dt =", dt)

def scan(E, psi_win=(0.7, 1.7), p_win=(-8, 8), n1=24, n2=24, thresh=0.5):
    psis = np.linspace(*psi_win, n1)
    ps = np.linspace(*p_win, n2)
    P, Q = np.meshgrid(psis, ps, indexing="ij")
    pts = np.vstack([P.ravel(), Q.ravel()])
    mapped, times = map_batch(pts, E, surf, mep, m, dt=dt, time_budget=9000.0)
    d = np.hypot(mapped[0] - pts[0], (mapped[1] - pts[1]) / 4.0)
    order = np.argsort(d)
    fps = []
    for k in order[:40]:
        if not np.isfinite(d[k]) or d[k] > thresh:
            break
        try:
            fp, T, hist = newton_fixed_point(
                SectionPoint(pts[0, k], pts[1, k]), E, surf, mep, m, dt=dt)
        except Exception:
            continue
        if not (psi_win[0] - 0.2 < fp.psi < psi_win[1] + 0.2):
            continue
        if all(abs(fp.psi - f[0].psi) + abs(fp.p_psi - f[0].p_psi) > 1e-4 for f in fps):
            J = fd_monodromy(fp, E, surf, mep, m, dt=dt)
            fps.append((fp, T, float(np.trace(J))))
        if len(fps) >= 4:
            break
    return fps

E_pred = 0.008319 * (c3 / 0.03)
for fac in (1.3, 1.1, 1.02, 0.95, 0.85):
    E = E_pred * fac
    fps = scan(E)
    print(f"E = {E:.6f} ({hartree_to_cm(E):7.1f} cm-1, {fac:.2f}x pred):")
    for fp, T, tr in fps:
        print(f"   fp psi={fp.psi:.4f} P_psi={fp.p_psi:+.4f} T={T:7.1f} tr={tr:+.4f}")
