"""Minimum-energy path R_e(theta) and its smooth interpolant.

The path doubles as the Poincare sectioning surface, so its interpolant
must be C^2; a cubic spline clamped to zero slope at theta = 0 and pi
(the symmetry axes force dR_e/dtheta = 0 there) provides that.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from ..errors import DomainError, PathError

RESIDUAL_TOL = 1e-9


class MinimumEnergyPath:
    """Sampled radial minima with a clamped-cubic interpolant."""

    def __init__(self, theta, r_e, values):
        self.theta = np.asarray(theta, dtype=float)
        self.r_e = np.asarray(r_e, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = CubicSpline(
            self.theta, self.r_e, bc_type=((1, 0.0), (1, 0.0))
        )
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)
        self._vspline = CubicSpline(self.theta, self.values, bc_type=((1, 0.0), (1, 0.0)))

    def radius(self, psi):
        return self._spline(psi)

    def slope(self, psi):
        """dR_e/dtheta at psi."""
        return self._d1(psi)

    def curvature(self, psi):
        return self._d2(psi)

    def path_energy(self, psi):
        """V(R_e(psi), psi) along the path."""
        return self._vspline(psi)


def _radial_minimum(surface, theta, guess=None, scan_points=200):
    """Locate the radial minimum at one angle; returns (R, V, curvature)."""
    lo, hi = surface.r_range

    def dv(R):
        return surface.gradient(R, theta)[0]

    bracket = None
    if guess is not None:
        span = (hi - lo) / scan_points
        for widen in (2.0, 8.0, 32.0):
            a = max(lo, guess - widen * span)
            b = min(hi, guess + widen * span)
            if dv(a) < 0 < dv(b):
                bracket = (a, b)
                break
    if bracket is None:
        grid = np.linspace(lo, hi, scan_points)
        vals = surface.evaluate(grid, np.full_like(grid, theta))
        k = int(np.argmin(vals))
        if k == 0 or k == scan_points - 1:
            raise PathError(f"no bracketed radial minimum at theta={theta}")
        bracket = (grid[k - 1], grid[k + 1])
    root = brentq(dv, bracket[0], bracket[1], xtol=1e-13, rtol=1e-15)
    # Polish with one Newton step; brentq already leaves |dV/dR| ~ 1e-12.
    curv = surface.hessian(root, theta)[0]
    if curv > 0:
        root = root - dv(root) / curv
    curv = surface.hessian(root, theta)[0]
    if curv <= 0:
        raise PathError(f"radial stationary point at theta={theta} is not a minimum")
    residual = abs(dv(root))
    if residual > RESIDUAL_TOL:
        raise PathError(
            f"radial minimum at theta={theta} converged only to |dV/dR|={residual:.2e}"
        )
    return root, float(surface.evaluate(root, theta)), curv


def minimum_energy_path(surface, theta_grid) -> MinimumEnergyPath:
    """Per-angle radial minimization, warm-started from the neighbor."""
    theta_grid = np.asarray(theta_grid, dtype=float)
    if theta_grid.ndim != 1 or theta_grid.size < 4:
        raise DomainError("theta_grid must be a 1-D array with >= 4 points")
    if abs(theta_grid[0]) > 1e-9 or abs(theta_grid[-1] - np.pi) > 1e-9:
        raise DomainError("theta_grid must span [0, pi]")
    if np.any(np.diff(theta_grid) <= 0):
        raise DomainError("theta_grid must be strictly increasing")

    radii = np.empty_like(theta_grid)
    values = np.empty_like(theta_grid)
    guess = None
    for i, theta in enumerate(theta_grid):
        radii[i], values[i], _ = _radial_minimum(surface, theta, guess=guess)
        guess = radii[i]
    return MinimumEnergyPath(theta_grid, radii, values)
