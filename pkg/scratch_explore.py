"""Scratch: tune the surrogate so the averaged theory predicts a clean
interior fold (saddle-node of 1:1 orbits), then verify with the real map.

Averaged effective bend profile at frozen radial action J:

    W_J(q) = U(q) + omega0(q) J - a(q)^2 J^2 / (2 mu1),  q = cos(theta)

Equilibria: dW/dq = 0 -> quadratic in J; fold = interior local MIN of
J*(q) with J_c > 0 (pair exists only for J > J_c, i.e. E > E_bif).
"""
import numpy as np
from scarbench.pes import SurrogateSurface, MassParameters
from scarbench.units import hartree_to_cm

m = MassParameters()
mu1 = m.mu1


def design_U(c3, q_star, q_M, q_m):
    """Quartic U whose force -dU/dq is zero at q_star, peaks at q_M, dips at q_m."""
    b4 = -c3 / 4.0
    b3 = c3 * (q_M + q_m) / 2.0
    b2 = -1.5 * c3 * q_M * q_m
    C = -c3 * (q_star**3 - 1.5 * (q_M + q_m) * q_star**2 + 3 * q_M * q_m * q_star)
    b1 = -C
    return b1, b2, b3, b4


def recon(surf, qlo=None, qhi=0.995, n=2000):
    if qlo is None:
        qlo = -0.99
    q = np.linspace(qlo, qhi, n)
    a = surf.a0 + surf.a1 * q + surf.a3 * q**3
    da = surf.a1 + 3 * surf.a3 * q**2
    D = surf.d0 + surf.d1 * q
    om = a * np.sqrt(2 * D / mu1)
    dom = da * np.sqrt(2 * D / mu1) + a * surf.d1 / np.sqrt(2 * D * mu1)
    dU = surf._du_dq(q)
    A = -(a * da) / mu1
    B = dom
    C = dU
    disc = B * B - 4 * A * C
    J = np.full_like(q, np.nan)
    ok = disc >= 0
    r1 = (-B[ok] + np.sqrt(disc[ok])) / (2 * A[ok])
    r2 = (-B[ok] - np.sqrt(disc[ok])) / (2 * A[ok])
    cand = np.where((r1 > 0) & ((r1 < r2) | (r2 <= 0)), r1, r2)
    cand[cand <= 0] = np.nan
    J[ok] = cand
    U = surf.bend_profile(q)
    E = U + om * J - (a * J) ** 2 / (2 * mu1)
    return q, J, E, om


def analyze(surf, label="", report=True):
    # restrict to the deep-well side of the barrier
    qs = np.linspace(-1, 1, 4001)
    dU = surf._du_dq(qs)
    roots = qs[np.flatnonzero(np.sign(dU[1:]) != np.sign(dU[:-1]))]
    q_star = roots[0] if len(roots) else None
    q, J, E, om = recon(surf, qlo=(q_star + 0.03 if q_star is not None else -0.9))
    # interior local minimum of J*
    good = np.isfinite(J)
    fold = None
    idx = np.flatnonzero(good)
    for i in idx[5:-5]:
        if good[i - 1] and good[i + 1] and J[i] < J[i - 1] and J[i] < J[i + 1]:
            fold = i
            break
    if report:
        bh = hartree_to_cm(surf.bend_profile(q_star)) if q_star is not None else np.nan
        print(f"--- {label} barrier q*={q_star} height={bh:.0f} cm-1 "
              f"shallow={hartree_to_cm(surf.bend_profile(-1.0)):.0f} cm-1")
        if fold is None:
            print("    NO interior fold (J* has no interior local min)")
        else:
            print(f"    fold: q_c={q[fold]:+.3f} theta_c={np.arccos(q[fold]):.3f} "
                  f"S={2*np.pi*J[fold]:.3f} E_bif={hartree_to_cm(E[fold]):.0f} cm-1 "
                  f"({E[fold]:.6f} ha)  T~{2*np.pi/om[fold]:.0f} au")
    return fold, q, J, E


# Designed quartic profile
c3 = 0.035
b1, b2, b3, b4 = design_U(c3, q_star=-0.55, q_M=-0.10, q_m=0.45)
print("U coeffs:", b1, b2, b3, b4)
surf = SurrogateSurface(b1=b1, b2=b2, b3=b3, b4=b4)
analyze(surf, "designed c3=0.035")

# scan a few scales / dip placements / channel slopes
for c3 in (0.02, 0.03, 0.05):
    for (qM, qm) in ((-0.1, 0.45), (0.0, 0.5), (-0.2, 0.35)):
        for (a1, a3) in ((0.25, 0.15), (0.45, 0.0), (0.35, 0.25)):
            b = design_U(c3, -0.55, qM, qm)
            s = SurrogateSurface(a1=a1, a3=a3, b1=b[0], b2=b[1], b3=b[2], b4=b[3])
            analyze(s, f"c3={c3} qM={qM} qm={qm} a1={a1} a3={a3}")
