"""Potential energy surfaces on (R, theta).

Two backends: a Legendre-series surface fed by a coefficient file, and
analytic surrogates.  All surfaces are even and 2*pi-periodic in theta
(they depend on theta through cos(theta) or symmetric forms), so raw
evaluation is defined for any real angle; the declared domain
``theta in [0, pi]`` is enforced only at the public, checked entry
points.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from .legendre import LegendreSeries, legendre_table


class PotentialSurface:
    """Base class: checked evaluate/gradient/hessian over a declared domain."""

    def __init__(self, r_range, theta_range=(0.0, np.pi)):
        self.r_range = (float(r_range[0]), float(r_range[1]))
        self.theta_range = (float(theta_range[0]), float(theta_range[1]))

    # Subclasses implement the raw, unchecked operations.
    def _value(self, R, theta):
        raise NotImplementedError

    def _gradient(self, R, theta):
        raise NotImplementedError

    def _hessian(self, R, theta):
        raise NotImplementedError

    def _check(self, R, theta):
        R = np.asarray(R, dtype=float)
        theta = np.asarray(theta, dtype=float)
        lo, hi = self.r_range
        if np.any(R < lo) or np.any(R > hi):
            bad = float(np.atleast_1d(R)[(np.atleast_1d(R) < lo) | (np.atleast_1d(R) > hi)][0])
        else:
            bad = None
        if bad is not None:
            raise DomainError(f"R={bad} outside declared range [{lo}, {hi}]")
        tlo, thi = self.theta_range
        eps = 1e-12
        if np.any(theta < tlo - eps) or np.any(theta > thi + eps):
            t = np.atleast_1d(theta)
            bad = float(t[(t < tlo - eps) | (t > thi + eps)][0])
            raise DomainError(f"theta={bad} outside declared range [{tlo}, {thi}]")
        return R, theta

    def evaluate(self, R, theta):
        """V(R, theta) in hartree."""
        R, theta = self._check(R, theta)
        return self._value(R, theta)

    def gradient(self, R, theta):
        """(dV/dR, dV/dtheta)."""
        R, theta = self._check(R, theta)
        return self._gradient(R, theta)

    def hessian(self, R, theta):
        """(V_RR, V_Rtheta, V_thetatheta)."""
        R, theta = self._check(R, theta)
        return self._hessian(R, theta)

    def grid_values(self, R, theta):
        """V on the outer product of 1-D coordinate arrays, shape (nR, ntheta)."""
        R = np.asarray(R, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return self.evaluate(R[:, None], theta[None, :])


class LegendreSurface(PotentialSurface):
    """Series backend: V = sum_lambda P_lambda(cos theta) v_lambda(R)."""

    def __init__(self, series: LegendreSeries, r_range=None):
        self.series = series
        if r_range is None:
            r_range = series.tabulated_range() or (0.1, 100.0)
        super().__init__(r_range)

    def _terms(self, R, theta, orders=(0,)):
        x = np.cos(theta)
        P, dP, d2P = legendre_table(self.series.lmax, x)
        vals = {}
        for order in orders:
            vals[order] = [self.series.coefficient(l, R, order) for l in range(self.series.lmax + 1)]
        return x, P, dP, d2P, vals

    def _value(self, R, theta):
        x, P, _, _, v = self._terms(R, theta, orders=(0,))
        out = 0.0
        for l in range(self.series.lmax + 1):
            out = out + P[l] * v[0][l]
        return out

    def _gradient(self, R, theta):
        theta_arr = np.asarray(theta, dtype=float)
        x, P, dP, _, v = self._terms(R, theta, orders=(0, 1))
        s = np.sin(theta_arr)
        dR = 0.0
        dx = 0.0
        for l in range(self.series.lmax + 1):
            dR = dR + P[l] * v[1][l]
            dx = dx + dP[l] * v[0][l]
        return dR, -s * dx

    def _hessian(self, R, theta):
        theta_arr = np.asarray(theta, dtype=float)
        x, P, dP, d2P, v = self._terms(R, theta, orders=(0, 1, 2))
        s = np.sin(theta_arr)
        c = np.cos(theta_arr)
        vRR = 0.0
        vRx = 0.0
        vx = 0.0
        vxx = 0.0
        for l in range(self.series.lmax + 1):
            vRR = vRR + P[l] * v[2][l]
            vRx = vRx + dP[l] * v[1][l]
            vx = vx + dP[l] * v[0][l]
            vxx = vxx + d2P[l] * v[0][l]
        # d/dtheta = -sin(theta) d/dx; second derivative by product rule.
        return vRR, -s * vRx, s * s * vxx - c * vx


class SurrogateSurface(PotentialSurface):
    """Bundled analytic surface: a Morse radial channel riding on a two-well
    angular profile, with channel stiffness and depth varying along the bend.

    With q = cos(theta):

        V(R, theta) = D(q) * (1 - exp(-a(q) (R - R0(q))))^2 + U(q)
        R0(q) = r0 + r1 q              (this line is the exact MEP)
        a(q)  = a0 + a1 q + a3 q^3
        D(q)  = d0 + d1 q
        U(q)  = b1 q + b2 q^2 + b3 q^3 + b4 q^4 - min(U(+-1))

    The two linear configurations are wells of unequal depth, separated
    by a saddle at the interior zero of dU/dq.  The angular force
    -dU/dtheta rises away from the saddle, dips to a positive local
    minimum part-way toward the deep well, and rises again; balancing it
    against the channel's action-dependent radial level creates a
    tangent (saddle-node) bifurcation of a pair of 1:1 stretch/bend
    periodic orbits at an energy pinned numerically (see
    classical.continuation and the regression tests).
    """

    def __init__(
        self,
        r0=4.2,
        r1=0.4,
        a0=0.9,
        a1=0.25,
        a3=0.15,
        d0=0.10,
        d1=0.02,
        b1=-0.008,
        b2=-0.006,
        b3=0.0,
        b4=0.0,
        r_range=(2.4, 7.5),
    ):
        super().__init__(r_range)
        self.r0, self.r1 = float(r0), float(r1)
        self.a0, self.a1, self.a3 = float(a0), float(a1), float(a3)
        self.d0, self.d1 = float(d0), float(d1)
        self.b1, self.b2 = float(b1), float(b2)
        self.b3, self.b4 = float(b3), float(b4)
        ends = [self._u_raw(q) for q in (1.0, -1.0)]
        self.u_offset = min(ends)

    def _u_raw(self, q):
        return q * (self.b1 + q * (self.b2 + q * (self.b3 + q * self.b4)))

    def _du_dq(self, q):
        return self.b1 + q * (2.0 * self.b2 + q * (3.0 * self.b3 + q * 4.0 * self.b4))

    def _d2u_dq2(self, q):
        return 2.0 * self.b2 + q * (6.0 * self.b3 + q * 12.0 * self.b4)

    # Angular profile pieces and their q-derivatives.
    def _channel(self, q):
        a = self.a0 + self.a1 * q + self.a3 * q**3
        da = self.a1 + 3 * self.a3 * q**2
        d2a = 6 * self.a3 * q
        D = self.d0 + self.d1 * q
        R0 = self.r0 + self.r1 * q
        return a, da, d2a, D, R0

    def mep_radius(self, theta):
        """Exact minimum-energy path R0(theta)."""
        return self.r0 + self.r1 * np.cos(theta)

    def bend_profile(self, q):
        """U(q) along the MEP, zero at the deeper well."""
        return self._u_raw(q) - self.u_offset

    def _value(self, R, theta):
        q = np.cos(theta)
        a, _, _, D, R0 = self._channel(q)
        f = 1.0 - np.exp(-a * (R - R0))
        return D * f * f + self.bend_profile(q)

    def _gradient(self, R, theta):
        q = np.cos(theta)
        s = np.sin(theta)
        a, da, _, D, R0 = self._channel(q)
        u = R - R0
        e = np.exp(-a * u)
        f = 1.0 - e
        dV_dR = 2.0 * D * a * f * e
        # f_q = e * g with g = a'(R - R0) - a R0'.
        g = da * u - a * self.r1
        dV_dq = self.d1 * f * f + 2.0 * D * f * e * g + self._du_dq(q)
        return dV_dR, -s * dV_dq

    def _hessian(self, R, theta):
        q = np.cos(theta)
        s = np.sin(theta)
        c = q
        a, da, d2a, D, R0 = self._channel(q)
        u = R - R0
        e = np.exp(-a * u)
        f = 1.0 - e
        g = da * u - a * self.r1
        gp = d2a * u - 2.0 * da * self.r1
        f_q = e * g
        f_qq = e * (gp - g * g)
        V_RR = 2.0 * D * a * a * e * (2.0 * e - 1.0)
        # d/dq of (2 D a f e); R0, a, D depend on q, e_q = -f_q.
        dV_dR_q = 2.0 * (
            self.d1 * a * f * e + D * da * f * e + D * a * f_q * e - D * a * f * f_q
        )
        V_q = self.d1 * f * f + 2.0 * D * f * f_q + self._du_dq(q)
        V_qq = (
            4.0 * self.d1 * f * f_q
            + 2.0 * D * (f_q * f_q + f * f_qq)
            + self._d2u_dq2(q)
        )
        V_Rtheta = -s * dV_dR_q
        V_thetatheta = s * s * V_qq - c * V_q
        return V_RR, V_Rtheta, V_thetatheta

    def gradient_scalar(self, R: float, theta: float):
        """Pure-float gradient; hot path for single-trajectory integration."""
        q = math.cos(theta)
        s = math.sin(theta)
        a = self.a0 + q * (self.a1 + self.a3 * q * q)
        da = self.a1 + 3.0 * self.a3 * q * q
        D = self.d0 + self.d1 * q
        u = R - self.r0 - self.r1 * q
        e = math.exp(-a * u)
        f = 1.0 - e
        g = da * u - a * self.r1
        du = self.b1 + q * (2.0 * self.b2 + q * (3.0 * self.b3 + q * 4.0 * self.b4))
        dV_dq = self.d1 * f * f + 2.0 * D * f * e * g + du
        return 2.0 * D * a * f * e, -s * dV_dq

    def params(self) -> dict:
        return {
            "r0": self.r0, "r1": self.r1,
            "a0": self.a0, "a1": self.a1, "a3": self.a3,
            "d0": self.d0, "d1": self.d1,
            "b1": self.b1, "b2": self.b2, "b3": self.b3, "b4": self.b4,
            "r_range": list(self.r_range),
        }


class SeparableSurface(PotentialSurface):
    """V(R, theta) = vr(R - R0(theta)) + vt(theta) from callables.

    Handy for oracle tests (harmonic channels, prescribed MEPs).  The
    callables must supply value and two derivatives via an ``order``
    argument, and ``R0`` likewise.
    """

    def __init__(self, vr, vt, R0=None, r_range=(0.5, 20.0)):
        super().__init__(r_range)
        self.vr = vr
        self.vt = vt
        self.R0 = R0 if R0 is not None else lambda theta, order=0: (
            np.zeros_like(np.asarray(theta, dtype=float))
        )

    def _value(self, R, theta):
        u = R - self.R0(theta, 0)
        return self.vr(u, 0) + self.vt(theta, 0)

    def _gradient(self, R, theta):
        u = R - self.R0(theta, 0)
        d = self.vr(u, 1)
        return d, -d * self.R0(theta, 1) + self.vt(theta, 1)

    def _hessian(self, R, theta):
        u = R - self.R0(theta, 0)
        d1 = self.vr(u, 1)
        d2 = self.vr(u, 2)
        p1 = self.R0(theta, 1)
        p2 = self.R0(theta, 2)
        return (
            d2,
            -d2 * p1,
            d2 * p1 * p1 - d1 * p2 + self.vt(theta, 2),
        )


# Named surrogates selectable from a run config.  "twowell" parameters are
# frozen; the pinned classical landmarks live in classical.continuation.
SURROGATES = {
    "twowell": dict(),
}


def make_surrogate(name: str = "twowell", **overrides) -> SurrogateSurface:
    if name not in SURROGATES:
        raise KeyError(f"unknown surrogate {name!r}; choices: {sorted(SURROGATES)}")
    params = dict(SURROGATES[name])
    params.update(overrides)
    return SurrogateSurface(**params)
