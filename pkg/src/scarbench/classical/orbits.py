"""Periodic orbits: Newton refinement on the section map, action, monodromy,
Maslov counting, and turning points.

Monodromy comes from the simultaneously integrated variational (tangent)
flow, reduced to the (psi, P_psi) section chart; a finite-difference map
Jacobian is kept alongside as a cross-check, since the trace near a
tangent bifurcation is the sensitive quantity.

Maslov convention: a librating orbit contributes 2 (one caustic at each
longitudinal turning point per period); each zero of the transverse
Jacobi field in (0, T] (a self-focal point) adds 1.  Conventions differ
across the literature; this one makes the index jump from 2 to 3 when a
self-focal point forms on a branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError
from .dynamics import (
    HamiltonianSystem,
    PhasePoint,
    SymplecticIntegrator,
    fold_theta,
)
from .section import (
    CrossingEngine,
    SectionPoint,
    lift_section_point,
    map_batch,
    section_transform,
)


@dataclass
class PeriodicOrbit:
    """Closed trajectory record with everything the scar pipeline needs."""

    initial: PhasePoint
    section_point: SectionPoint
    energy: float
    period: float
    action: float
    maslov: int
    monodromy: np.ndarray
    stability: str
    turning_points: list
    closure_residual: float
    trace_fd: float
    dt: float

    @property
    def trace(self) -> float:
        return float(np.trace(self.monodromy))

    @property
    def stability_exponent(self) -> float:
        """ln|largest Floquet multiplier| / T; zero for stable/marginal."""
        tr = self.trace
        if abs(tr) <= 2.0:
            return 0.0
        lam = abs(tr) / 2.0 + np.sqrt(tr * tr / 4.0 - 1.0)
        return float(np.log(lam) / self.period)

    def launch_point(self, which="outer") -> PhasePoint:
        """Turning point used for wave-packet launch (outer R by default)."""
        if not self.turning_points:
            return self.initial
        pts = sorted(self.turning_points, key=lambda p: p.R)
        return pts[-1] if which == "outer" else pts[0]

    def to_dict(self) -> dict:
        return {
            "initial": [self.initial.R, self.initial.theta,
                        self.initial.P_R, self.initial.P_theta],
            "section_point": [self.section_point.psi, self.section_point.p_psi,
                              self.section_point.sign],
            "energy": self.energy,
            "period": self.period,
            "action": self.action,
            "maslov": self.maslov,
            "monodromy": [list(row) for row in np.asarray(self.monodromy)],
            "stability": self.stability,
            "turning_points": [[p.R, p.theta, p.P_R, p.P_theta, p.t]
                               for p in self.turning_points],
            "closure_residual": self.closure_residual,
            "trace_fd": self.trace_fd,
            "dt": self.dt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PeriodicOrbit":
        return cls(
            initial=PhasePoint(*d["initial"]),
            section_point=SectionPoint(d["section_point"][0], d["section_point"][1],
                                       int(d["section_point"][2])),
            energy=d["energy"],
            period=d["period"],
            action=d["action"],
            maslov=int(d["maslov"]),
            monodromy=np.array(d["monodromy"]),
            stability=d["stability"],
            turning_points=[PhasePoint(*row[:4], t=row[4])
                            for row in d["turning_points"]],
            closure_residual=d["closure_residual"],
            trace_fd=d["trace_fd"],
            dt=d["dt"],
        )


def classify_stability(trace: float) -> str:
    if abs(trace) < 2.0:
        return "stable"
    if abs(trace) > 2.0:
        return "unstable"
    return "marginal"


def newton_fixed_point(guess: SectionPoint, energy, surface, mep, masses,
                       dt=None, tol=1e-10, max_iter=25, fd_h=1e-7):
    """Newton iteration on F(y) = map(y) - y with a batched FD Jacobian.

    Returns (SectionPoint, return_time, residual_history).
    """
    y = np.array([guess.psi, guess.p_psi], dtype=float)
    sign = guess.sign
    history = []
    for _ in range(max_iter):
        h1 = fd_h * max(1.0, abs(y[0]))
        h2 = fd_h * max(1.0, abs(y[1]))
        stencil = np.array([
            y,
            y + [h1, 0.0], y - [h1, 0.0],
            y + [0.0, h2], y - [0.0, h2],
        ]).T
        mapped, times = map_batch(stencil, energy, surface, mep, masses,
                                  dt=dt, required_sign=sign)
        if np.any(np.isnan(mapped)):
            raise ConvergenceError(
                f"Poincare map failed during Newton at E={energy:.8g}, "
                f"y={y.tolist()}", residuals=history)
        F = mapped[:, 0] - y
        res = float(np.max(np.abs(F)))
        history.append(res)
        if res <= tol:
            return SectionPoint(float(y[0]), float(y[1]), sign), float(times[0]), history
        J = np.empty((2, 2))
        J[:, 0] = (mapped[:, 1] - mapped[:, 2]) / (2 * h1)
        J[:, 1] = (mapped[:, 3] - mapped[:, 4]) / (2 * h2)
        A = J - np.eye(2)
        try:
            delta = np.linalg.solve(A, -F)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(A, -F, rcond=None)[0]
        # Damped update: never step more than a trust radius in one go.
        size = float(np.max(np.abs(delta)))
        trust = 0.25 * max(1.0, abs(y[1]))
        if size > trust:
            delta *= trust / size
        y = y + delta
    raise ConvergenceError(
        f"Newton did not converge after {max_iter} iterations at E={energy:.8g}; "
        f"residuals {['%.2e' % r for r in history[-5:]]}", residuals=history)


def fd_monodromy(point: SectionPoint, energy, surface, mep, masses, dt=None,
                 h=1e-6):
    """Finite-difference Jacobian of the return map at a fixed point."""
    y = point.as_array()
    h1 = h * max(1.0, abs(y[0]))
    h2 = h * max(1.0, abs(y[1]))
    stencil = np.array([
        y + [h1, 0.0], y - [h1, 0.0],
        y + [0.0, h2], y - [0.0, h2],
    ]).T
    mapped, _ = map_batch(stencil, energy, surface, mep, masses, dt=dt,
                          required_sign=point.sign)
    J = np.empty((2, 2))
    J[:, 0] = (mapped[:, 0] - mapped[:, 1]) / (2 * h1)
    J[:, 1] = (mapped[:, 2] - mapped[:, 3]) / (2 * h2)
    return J


def _lift_jacobian(point: SectionPoint, energy, surface, mep, masses, h=1e-7):
    """d(state)/d(psi, P_psi) of the constant-energy section lift, by FD."""
    cols = []
    for k, step in enumerate((h, h * max(1.0, abs(point.p_psi)))):
        plus = SectionPoint(point.psi + (step if k == 0 else 0.0),
                            point.p_psi + (step if k == 1 else 0.0), point.sign)
        minus = SectionPoint(point.psi - (step if k == 0 else 0.0),
                             point.p_psi - (step if k == 1 else 0.0), point.sign)
        xp = lift_section_point(plus, energy, surface, mep, masses)
        xm = lift_section_point(minus, energy, surface, mep, masses)
        cols.append((xp - xm) / (2 * step))
    return np.array(cols).T  # shape (4, 2)


def variational_monodromy(x0, period, surface, mep, masses, point, energy,
                          n_steps=2048, with_focal=False):
    """Integrate the 4x4 tangent flow over one period and reduce to the
    (psi, P_psi) chart; optionally also return the transverse Jacobi field
    samples used for Maslov counting.
    """
    system = HamiltonianSystem(surface, masses)
    dt = period / n_steps
    integ = SymplecticIntegrator(system, dt)
    state = np.array(x0, dtype=float)
    M = np.eye(4)

    focal = []
    if with_focal:
        # Jacobi field: zero displacement, unit transverse velocity kick.
        rdot, tdot = system.velocities(state)
        G = system.G(state[0])
        n_r, n_t = -tdot / G, masses.mu1 * rdot
        nrm = np.hypot(n_r, n_t)
        dp = np.array([0.0, 0.0, masses.mu1 * n_r / nrm, n_t / (G * nrm)])
        W = np.concatenate([M, dp.reshape(4, 1)], axis=1)
    else:
        W = M

    for k in range(n_steps):
        integ.step_tangent(state, W, dt=dt)
        if with_focal:
            rdot, tdot = system.velocities(state)
            G = system.G(state[0])
            n_r, n_t = -tdot / G, masses.mu1 * rdot
            xi = masses.mu1 * n_r * W[0, 4] + (1.0 / G) * n_t * W[1, 4]
            focal.append(xi)
    M = W[:, :4]

    # Reduce to the section chart: project the return along the flow onto
    # the section, then into (psi, P_psi); the lift Jacobian supplies the
    # in-chart tangent basis at fixed energy.
    DL = _lift_jacobian(point, energy, surface, mep, masses)
    psi, sgn = fold_theta(state[1])
    slope = float(mep.slope(psi))
    curv = float(mep.curvature(psi))
    grad_s = np.array([1.0, -slope * sgn, 0.0, 0.0])
    f = system.rhs(state)
    N = np.eye(4) - np.outer(f, grad_s) / float(grad_s @ f)
    Dpi = np.array([
        [0.0, sgn, 0.0, 0.0],
        [0.0, -curv * sgn * state[2], -slope, sgn],
    ])
    M_red = Dpi @ (N @ (M @ DL))
    if with_focal:
        return M_red, np.array(focal)
    return M_red


def _dense_orbit(x0, period, surface, mep, masses, n_steps=2048):
    """One period of the orbit sampled every integrator step."""
    system = HamiltonianSystem(surface, masses)
    dt = period / n_steps
    integ = SymplecticIntegrator(system, dt)
    states = np.empty((4, n_steps + 1))
    states[:, 0] = x0
    batch = np.array(x0, dtype=float).reshape(4, 1)
    for k in range(n_steps):
        integ.step(batch)
        states[:, k + 1] = batch[:, 0]
    t = np.arange(n_steps + 1) * dt
    return t, states, system


def _action_integral(t, states, system):
    """closed-loop action = integral of 2*T_kin dt, composite Simpson."""
    integrand = 2.0 * system.kinetic(states)
    n = t.size
    if n % 2 == 0:
        # Simpson needs an odd sample count; drop to trapezoid on last slab.
        core = _simpson(integrand[:-1], t[1] - t[0])
        return core + 0.5 * (integrand[-2] + integrand[-1]) * (t[1] - t[0])
    return _simpson(integrand, t[1] - t[0])


def _simpson(y, h):
    return h / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-2:2]))


def _turning_points(t, states, system, surface, masses):
    """P_R = 0 crossings, polished with Newton on the flow time."""
    pr = states[2]
    idx = np.flatnonzero(np.sign(pr[1:]) != np.sign(pr[:-1]))
    integ = SymplecticIntegrator(system, t[1] - t[0])
    points = []
    for i in idx:
        tau = 0.0
        state = states[:, i].copy()
        # Newton on P_R(tau) from sample i; dP_R/dt from the vector field.
        for _ in range(8):
            probe = state.reshape(4, 1).copy()
            if tau != 0.0:
                integ.step(probe, dt=tau)
            prv = probe[2, 0]
            if abs(prv) < 1e-13:
                break
            dpr = system.rhs(probe[:, 0])[2]
            if dpr == 0.0:
                break
            tau -= prv / dpr
        probe = state.reshape(4, 1).copy()
        if tau != 0.0:
            integ.step(probe, dt=tau)
        points.append(PhasePoint.from_array(probe[:, 0], t[i] + tau))
    return points


def find_periodic_orbit(guess: SectionPoint, energy, surface, mep, masses,
                        dt=None, tol=1e-10, max_iter=25,
                        characterize=True) -> PeriodicOrbit:
    """Locate and fully characterize a periodic orbit from a section guess."""
    point, period, history = newton_fixed_point(
        guess, energy, surface, mep, masses, dt=dt, tol=tol, max_iter=max_iter)
    x0 = lift_section_point(point, energy, surface, mep, masses)

    n_steps = 2048 if characterize else 512
    t, states, system = _dense_orbit(x0, period, surface, mep, masses, n_steps)
    closure = states[:, -1] - x0
    p_scale = max(1.0, float(np.max(np.abs(x0[2:]))))
    closure_norm = float(max(np.max(np.abs(closure[:2])),
                             np.max(np.abs(closure[2:])) / p_scale))

    action = float(_action_integral(t, states, system))
    M_red, focal = variational_monodromy(
        x0, period, surface, mep, masses, point, energy,
        n_steps=n_steps, with_focal=True)
    trace = float(np.trace(M_red))
    J_fd = fd_monodromy(point, energy, surface, mep, masses, dt=dt)
    turning = _turning_points(t, states, system, surface, masses)

    # Transverse Jacobi field starts at zero; skip the launch transient
    # before counting sign changes (self-focal points).
    lead = max(3, n_steps // 64)
    xi = focal[lead:]
    flips = int(np.sum(np.sign(xi[1:]) != np.sign(xi[:-1])))
    maslov = 2 + flips

    return PeriodicOrbit(
        initial=PhasePoint.from_array(x0, 0.0),
        section_point=point,
        energy=float(energy),
        period=float(period),
        action=action,
        maslov=maslov,
        monodromy=M_red,
        stability=classify_stability(trace),
        turning_points=turning,
        closure_residual=closure_norm,
        trace_fd=float(np.trace(J_fd)),
        dt=float(dt) if dt is not None else float(t[1] - t[0]),
    )
