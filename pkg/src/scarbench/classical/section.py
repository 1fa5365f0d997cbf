"""Poincare surface of section on the minimum-energy path R = R_e(theta).

Because the sectioning surface is curved, (theta, P_theta) restricted to
it is not area preserving; the canonical pair is

    psi   = theta
    P_psi = P_theta - (dR_e/dtheta)|_psi * P_R,

and the return map in (psi, P_psi) at fixed energy has unit Jacobian.
Crossing times are found by sign monitoring plus Newton polish on the
flow, to |R - R_e(psi)| <= ~1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, EscapeError, ForbiddenError
from .dynamics import (
    HamiltonianSystem,
    PhasePoint,
    SymplecticIntegrator,
    fold_theta,
    suggest_dt,
)

ON_SECTION_TOL = 1e-10


@dataclass(frozen=True)
class SectionPoint:
    """Canonical section coordinates plus the crossing direction sign."""

    psi: float
    p_psi: float
    sign: int = 1

    def as_array(self):
        return np.array([self.psi, self.p_psi])


def section_transform(point, mep, tol=ON_SECTION_TOL) -> SectionPoint:
    """Project an on-section phase point to (psi, P_psi)."""
    state = point.as_array() if isinstance(point, PhasePoint) else np.asarray(point, float)
    psi, sgn = fold_theta(state[1])
    p_r = state[2]
    p_theta = sgn * state[3]
    gap = abs(state[0] - float(mep.radius(psi)))
    if gap > tol:
        raise ContractError(
            f"point is off the section by |R - R_e(psi)| = {gap:.3e} (tol {tol:.1e})"
        )
    p_psi = p_theta - float(mep.slope(psi)) * p_r
    return SectionPoint(float(psi), float(p_psi), int(np.sign(p_r)) or 1)


def lift_section_point(point: SectionPoint, energy, surface, mep, masses):
    """Reconstruct the full phase-space state on the energy shell.

    P_R solves the quadratic that the energy condition becomes once
    P_theta = P_psi + R_e'(psi) P_R is substituted; the root with the
    requested crossing sign is taken.
    """
    psi = float(point.psi)
    R = float(mep.radius(psi))
    slope = float(mep.slope(psi))
    G = masses.angular_coefficient(R)
    V = float(surface.evaluate(R, psi))
    a = 1.0 / (2.0 * masses.mu1) + 0.5 * G * slope * slope
    b = G * slope * point.p_psi
    c = 0.5 * G * point.p_psi**2 + V - energy
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ForbiddenError(
            f"section point (psi={psi:.4f}, P_psi={point.p_psi:.4f}) is "
            f"energetically forbidden at E={energy:.6g}"
        )
    root = np.sqrt(disc)
    p_r = (-b + root) / (2 * a) if point.sign >= 0 else (-b - root) / (2 * a)
    if p_r * point.sign <= 0.0:
        raise ForbiddenError(
            f"no crossing with sign {point.sign:+d} at "
            f"(psi={psi:.4f}, P_psi={point.p_psi:.4f}, E={energy:.6g})"
        )
    p_theta = point.p_psi + slope * p_r
    return np.array([R, psi, p_r, p_theta])


class CrossingEngine:
    """Batched flow that harvests same-signed section crossings.

    Integrates all live trajectories in lock step; when the section
    function s = R - R_e(psi) changes sign for one of them, that
    trajectory's crossing is polished individually with Newton steps on
    the flow time.
    """

    def __init__(self, surface, mep, masses, dt=None, required_sign=1):
        self.surface = surface
        self.mep = mep
        self.masses = masses
        self.system = HamiltonianSystem(surface, masses)
        self.dt = suggest_dt(surface, masses) if dt is None else float(dt)
        self.integ = SymplecticIntegrator(self.system, self.dt)
        self.required_sign = required_sign

    def _s(self, states):
        psi, _ = fold_theta(states[1])
        return states[0] - self.mep.radius(psi)

    def _s_scalar(self, state):
        psi, _ = fold_theta(float(state[1]))
        return float(state[0]) - float(self.mep.radius(psi))

    def _sdot_scalar(self, state):
        psi, sgn = fold_theta(float(state[1]))
        rdot, tdot = self.system.velocities(state)
        return float(rdot) - float(self.mep.slope(psi)) * sgn * float(tdot)

    def _polish(self, state_before, s_before, tau_guess):
        """Newton on the crossing time starting from ``state_before``."""
        tau = tau_guess
        state = None
        for _ in range(12):
            state = state_before.reshape(4, 1).copy()
            self.integ.step(state, dt=tau)
            s = self._s_scalar(state[:, 0])
            if abs(s) < 1e-13:
                break
            sdot = self._sdot_scalar(state[:, 0])
            if sdot == 0.0:
                break
            tau -= s / sdot
            if not (min(0.0, self.dt) - abs(self.dt) <= tau <= abs(self.dt) * 2):
                # fell out of the bracketing step; give up on this event
                return None, None
        if state is None or abs(self._s_scalar(state[:, 0])) > ON_SECTION_TOL:
            return None, None
        return state[:, 0], tau

    def harvest(self, states, targets, time_budget, collect=True):
        """Run until every trajectory has ``targets`` accepted crossings.

        Returns (crossings, status) where crossings[i] is a list of
        (t, state) tuples and status[i] is 'ok', 'escaped' (left the
        radial domain) or 'budget'.
        """
        states = np.array(states, dtype=float)
        if states.ndim == 1:
            states = states.reshape(4, 1)
        n = states.shape[1]
        alive = np.ones(n, dtype=bool)
        status = ["budget"] * n
        found = [[] for _ in range(n)]
        t = np.zeros(n)
        lo, hi = self.surface.r_range
        s_prev = self._s(states)
        max_steps = int(np.ceil(time_budget / abs(self.dt)))
        for _ in range(max_steps):
            if not alive.any():
                break
            prev = states.copy()
            if alive.all():
                self.integ.step(states)
            else:
                sub = np.ascontiguousarray(states[:, alive])
                self.integ.step(sub)
                states[:, alive] = sub
            t[alive] += abs(self.dt)
            s_now = self._s(states)
            dead = alive & ((states[0] < lo) | (states[0] > hi))
            for i in np.flatnonzero(dead):
                status[i] = "escaped"
            alive &= ~dead
            flips = alive & (np.sign(s_now) != np.sign(s_prev)) & (s_prev != 0.0)
            for i in np.flatnonzero(flips):
                frac = s_prev[i] / (s_prev[i] - s_now[i])
                cross, tau = self._polish(prev[:, i], s_prev[i], frac * self.dt)
                if cross is None:
                    continue
                if np.sign(cross[2]) != self.required_sign:
                    continue
                t_cross = t[i] - abs(self.dt) + tau
                found[i].append((t_cross, cross if collect else None))
                if len(found[i]) >= targets:
                    alive[i] = False
                    status[i] = "ok"
            s_prev = s_now
        return found, status


def poincare_map(point: SectionPoint, energy, surface, mep, masses, dt=None,
                 time_budget=None, with_info=False):
    """Next same-signed crossing of the section, as a SectionPoint."""
    engine = CrossingEngine(surface, mep, masses, dt=dt, required_sign=point.sign)
    state = lift_section_point(point, energy, surface, mep, masses)
    if time_budget is None:
        time_budget = 400.0 * 2 * np.pi / _local_frequency(surface, masses)
    found, status = engine.harvest(state, targets=1, time_budget=time_budget)
    if not found[0]:
        raise EscapeError(
            f"no return crossing within time budget ({status[0]}) from "
            f"(psi={point.psi:.4f}, P_psi={point.p_psi:.4f}, E={energy:.6g})"
        )
    t_cross, cross = found[0][0]
    result = section_transform(cross, mep)
    if with_info:
        return result, cross, t_cross
    return result


def map_batch(points, energy, surface, mep, masses, dt=None, time_budget=None,
              required_sign=1):
    """Poincare map of many section points at once; returns (2, k) array.

    ``energy`` may be a scalar or one value per point (continuation
    stencils mix energies).  Entries that escape or fail come back as
    NaN columns.
    """
    engine = CrossingEngine(surface, mep, masses, dt=dt, required_sign=required_sign)
    pts = np.asarray(points, dtype=float).reshape(2, -1)
    k = pts.shape[1]
    energies = np.broadcast_to(np.asarray(energy, dtype=float), (k,))
    states = np.empty((4, k))
    ok = np.ones(k, dtype=bool)
    for i in range(k):
        try:
            states[:, i] = lift_section_point(
                SectionPoint(pts[0, i], pts[1, i], required_sign),
                energies[i], surface, mep, masses)
        except ForbiddenError:
            ok[i] = False
            states[:, i] = np.nan
    if time_budget is None:
        time_budget = 400.0 * 2 * np.pi / _local_frequency(surface, masses)
    out = np.full((2, k), np.nan)
    times = np.full(k, np.nan)
    live = np.flatnonzero(ok)
    if live.size:
        found, _ = engine.harvest(states[:, live], targets=1, time_budget=time_budget)
        for j, i in enumerate(live):
            if found[j]:
                t_cross, cross = found[j][0]
                sp = section_transform(cross, mep)
                out[0, i], out[1, i] = sp.psi, sp.p_psi
                times[i] = t_cross
    return out, times


def _local_frequency(surface, masses):
    from .dynamics import suggest_dt

    return 2 * np.pi / (suggest_dt(surface, masses) * 256)


def shell_sampler(energy, surface, mep, masses, rng, margin=0.999):
    """Draw section points uniformly from the energetically allowed strip."""
    while True:
        psi = rng.uniform(0.0, np.pi)
        v = float(mep.path_energy(psi))
        if v >= energy:
            continue
        G = masses.angular_coefficient(float(mep.radius(psi)))
        p_max = np.sqrt(2.0 * (energy - v) / G)
        p_psi = rng.uniform(-p_max * margin, p_max * margin)
        return SectionPoint(float(psi), float(p_psi), 1)


def composite_sos(energy, surface, mep, masses, n_trajectories=50, n_crossings=500,
                  seed=0, dt=None, time_budget_periods=None):
    """Overlay of section crossings from random energy-shell trajectories.

    Returns an array of shape (n_points, 2) with (psi, P_psi) rows,
    deterministically ordered by (trajectory index, crossing time).
    """
    rng = np.random.default_rng(seed)
    engine = CrossingEngine(surface, mep, masses, dt=dt)
    states = np.empty((4, n_trajectories))
    for i in range(n_trajectories):
        pt = shell_sampler(energy, surface, mep, masses, rng)
        states[:, i] = lift_section_point(pt, energy, surface, mep, masses)
    period = 2 * np.pi / _local_frequency(surface, masses)
    budget = (time_budget_periods or (3 * n_crossings)) * period
    found, _ = engine.harvest(states, targets=n_crossings, time_budget=budget)
    rows = []
    for i in range(n_trajectories):
        for t_cross, cross in found[i]:
            sp = section_transform(cross, engine.mep)
            rows.append((sp.psi, sp.p_psi))
    return np.array(rows) if rows else np.empty((0, 2))
