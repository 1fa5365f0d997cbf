"""Branch continuation of section fixed points and tangent-bifurcation
detection.

The fixed-point equation F(y; E) = map(y) - y = 0 is continued in
pseudo-arclength through scaled (psi, P_psi, E) space, so the fold where
the stable/unstable pair is born is traversed smoothly instead of being
a dead end.  The bifurcation energy is the arc's energy minimum, refined
by bisection-style step shrinking plus a quadratic fit; the tangency
condition tr M = 2 is checked there.  Loss of stability along the stable
branch is located by bisection on |tr M| = 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, NumericError
from .orbits import fd_monodromy, newton_fixed_point
from .section import SectionPoint, map_batch


@dataclass
class BranchSample:
    energy: float
    psi: float
    p_psi: float
    trace: float

    def to_dict(self):
        return {"energy": self.energy, "psi": self.psi,
                "p_psi": self.p_psi, "trace": self.trace}


@dataclass
class BifurcationScan:
    """Samples along the saddle-node branches plus detected landmarks."""

    branches: dict
    e_bif: float | None
    e_bif_trace: float | None
    e_loss: float | None
    fold: BranchSample | None
    failure: str | None = None

    def to_dict(self):
        return {
            "branches": {k: [s.to_dict() for s in v] for k, v in self.branches.items()},
            "e_bif": self.e_bif,
            "e_bif_trace": self.e_bif_trace,
            "e_loss": self.e_loss,
            "fold": self.fold.to_dict() if self.fold else None,
            "failure": self.failure,
        }


class _ArcSolver:
    """Pseudo-arclength corrector in scaled coordinates w = u / scale."""

    def __init__(self, surface, mep, masses, scale, dt=None, sign=1, tol=1e-9):
        self.surface = surface
        self.mep = mep
        self.masses = masses
        self.scale = np.asarray(scale, dtype=float)
        self.dt = dt
        self.sign = sign
        self.tol = tol

    def residual_and_jac(self, w):
        """Map residual F (2-vector) and dF/dw (2x3), central differences."""
        psi, p_psi, E = w * self.scale
        h0 = 1e-7
        h1 = 1e-7 * max(1.0, abs(p_psi))
        h2 = 1e-7 * max(1e-4, abs(E))
        pts = np.array([
            [psi, p_psi], [psi + h0, p_psi], [psi - h0, p_psi],
            [psi, p_psi + h1], [psi, p_psi - h1],
            [psi, p_psi], [psi, p_psi],
        ]).T
        energies = np.array([E, E, E, E, E, E + h2, E - h2])
        mapped, _ = map_batch(pts, energies, self.surface, self.mep, self.masses,
                              dt=self.dt, required_sign=self.sign)
        if np.any(np.isnan(mapped)):
            raise ConvergenceError(f"map failed in arc corrector near E={E:.8g}")
        F = mapped[:, 0] - [psi, p_psi]
        J_u = np.empty((2, 3))
        J_u[:, 0] = (mapped[:, 1] - mapped[:, 2]) / (2 * h0) - [1.0, 0.0]
        J_u[:, 1] = (mapped[:, 3] - mapped[:, 4]) / (2 * h1) - [0.0, 1.0]
        J_u[:, 2] = (mapped[:, 5] - mapped[:, 6]) / (2 * h2)
        return F, J_u * self.scale[None, :]

    def correct(self, w_pred, tangent, w_anchor, ds, max_iter=10):
        """Solve F(w)=0 with the constraint tangent . (w - anchor) = ds."""
        w = w_pred.copy()
        for _ in range(max_iter):
            F, J = self.residual_and_jac(w)
            g = float(tangent @ (w - w_anchor) - ds)
            if max(np.max(np.abs(F)), 1e-3 * abs(g)) <= self.tol:
                return w
            A = np.vstack([J, tangent])
            rhs = -np.concatenate([F, [g]])
            try:
                dw = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(f"singular arc system: {exc}")
            step = float(np.max(np.abs(dw)))
            if step > 0.5:
                dw *= 0.5 / step
            w = w + dw
        raise ConvergenceError("arc corrector stalled")

    def trace_at(self, w):
        u = w * self.scale
        pt = SectionPoint(float(u[0]), float(u[1]), self.sign)
        J = fd_monodromy(pt, float(u[2]), self.surface, self.mep, self.masses,
                         dt=self.dt)
        return float(np.trace(J))


def continue_branch(orbit, e_range, step, surface, mep, masses, dt=None,
                    max_points=240, e_bif_rel_tol=1e-4,
                    compute_traces=True) -> BifurcationScan:
    """Continue the orbit's fixed point across ``e_range``, through the fold.

    ``orbit`` may be a PeriodicOrbit or a (SectionPoint, energy) pair on
    an already-converged fixed point.  ``step`` is the nominal energy
    stride between samples; arclength steps adapt off it.
    """
    if hasattr(orbit, "section_point"):
        point, e0 = orbit.section_point, float(orbit.energy)
    else:
        point, e0 = orbit
        e0 = float(e0)
    sign = point.sign
    e_lo, e_hi = float(min(e_range)), float(max(e_range))
    e_span = max(e_hi - e_lo, abs(step))
    scale = np.array([0.2, max(0.5, abs(point.p_psi)), e_span])
    solver = _ArcSolver(surface, mep, masses, scale, dt=dt, sign=sign)

    w0 = np.array([point.psi, point.p_psi, e0]) / scale
    ds0 = abs(step) / e_span

    def traverse(direction):
        samples = [w0.copy()]
        tangent = np.array([0.0, 0.0, float(direction)])
        ds = ds0
        w_prev = w0.copy()
        failures = 0
        while len(samples) < max_points:
            try:
                w = solver.correct(w_prev + tangent * ds, tangent, w_prev, ds)
            except (ConvergenceError, NumericError):
                failures += 1
                ds *= 0.4
                if ds < ds0 * 1e-4 or failures > 40:
                    break
                continue
            failures = 0
            samples.append(w.copy())
            tangent = (w - w_prev) / np.linalg.norm(w - w_prev)
            w_prev = w
            E = w[2] * scale[2]
            if E > e_hi + abs(step) or E < e_lo - abs(step):
                break
            ds = min(ds * 1.4, ds0)
        return samples

    down = traverse(-1.0)
    up = traverse(+1.0)
    arc = list(reversed(down[1:])) + up

    if len(arc) < 3:
        return BifurcationScan({}, None, None, None, None,
                               failure="continuation lost the branch immediately")

    energies = np.array([w[2] * scale[2] for w in arc])
    k = int(np.argmin(energies))
    e_bif = None
    fold_sample = None
    if 0 < k < len(arc) - 1 and energies[k] > e_lo:
        e_bif, w_fold = _polish_fold(solver, arc[k - 1], arc[k], arc[k + 1],
                                     rel_tol=e_bif_rel_tol)
        u_fold = w_fold * scale
        fold_sample = BranchSample(float(u_fold[2]), float(u_fold[0]),
                                   float(u_fold[1]), np.nan)

    def finish(ws):
        out = []
        for w in ws:
            tr = solver.trace_at(w) if compute_traces else np.nan
            u = w * scale
            out.append(BranchSample(float(u[2]), float(u[0]), float(u[1]), tr))
        return out

    if e_bif is not None:
        side_a = finish(arc[:k + 1][::-1])  # fold outward, energy increasing
        side_b = finish(arc[k:])

        def label(side):
            trs = [s.trace for s in side[1:] if np.isfinite(s.trace)]
            if not trs:
                return "branch"
            mid = trs[min(len(trs) - 1, max(1, len(trs) // 3))]
            return "stable" if abs(mid) < 2.0 else "unstable"

        la, lb = label(side_a), label(side_b)
        if la == lb:
            la, lb = la + "_a", lb + "_b"
        branches = {la: side_a, lb: side_b}
        if fold_sample is not None:
            fold_sample.trace = solver.trace_at(
                np.array([fold_sample.psi, fold_sample.p_psi, fold_sample.energy])
                / scale)
    else:
        branches = {"branch": finish(arc)}

    e_loss = None
    stable_branch = branches.get("stable")
    if stable_branch and len(stable_branch) > 2 and compute_traces:
        e_loss = _find_trace_crossing(stable_branch, surface, mep, masses,
                                      dt, sign)

    e_bif_trace = fold_sample.trace if fold_sample is not None else None
    return BifurcationScan(branches, e_bif, e_bif_trace, e_loss, fold_sample)


def _polish_fold(solver, w_left, w_mid, w_right, rel_tol):
    """Shrink the arc bracket around the energy minimum, then fit."""
    pts = [np.asarray(w_left), np.asarray(w_mid), np.asarray(w_right)]
    e_scale = solver.scale[2]
    for _ in range(22):
        e3 = np.array([p[2] * e_scale for p in pts])
        if max(abs(e3[0] - e3[1]), abs(e3[2] - e3[1])) <= rel_tol * abs(e3[1]) * 0.25:
            break
        refined = []
        ok = True
        for a, b in ((0, 1), (1, 2)):
            gap = pts[b] - pts[a]
            nrm = float(np.linalg.norm(gap))
            try:
                refined.append(solver.correct(0.5 * (pts[a] + pts[b]),
                                              gap / nrm, pts[a], nrm / 2.0))
            except (ConvergenceError, NumericError):
                ok = False
                break
        if not ok:
            break
        triple = [pts[0], refined[0], pts[1], refined[1], pts[2]]
        es = [p[2] for p in triple]
        k = min(max(int(np.argmin(es)), 1), 3)
        pts = [triple[k - 1], triple[k], triple[k + 1]]
    e3 = np.array([p[2] * e_scale for p in pts])
    denom = e3[0] - 2 * e3[1] + e3[2]
    if denom > 0:
        return float(e3[1] - (e3[2] - e3[0]) ** 2 / (8 * denom)), pts[1]
    return float(e3[1]), pts[1]


def _find_trace_crossing(branch, surface, mep, masses, dt, sign,
                         level=2.0, bisections=24):
    """Bisection in energy on g(E) = |tr M(E)| - level along a branch."""
    samples = sorted((s for s in branch if np.isfinite(s.trace)),
                     key=lambda s: s.energy)
    bracket = None
    for s1, s2 in zip(samples[:-1], samples[1:]):
        g1, g2 = abs(s1.trace) - level, abs(s2.trace) - level
        if g1 == 0.0:
            return s1.energy
        if g1 * g2 < 0:
            bracket = (s1, s2)
            break
    if bracket is None:
        return None
    s1, s2 = bracket
    e1, e2 = s1.energy, s2.energy
    g1 = abs(s1.trace) - level
    point = SectionPoint(s1.psi, s1.p_psi, sign)
    for _ in range(bisections):
        em = 0.5 * (e1 + e2)
        try:
            point, _, _ = newton_fixed_point(point, em, surface, mep, masses,
                                             dt=dt)
        except ConvergenceError:
            break
        J = fd_monodromy(point, em, surface, mep, masses, dt=dt)
        gm = abs(float(np.trace(J))) - level
        if gm == 0.0:
            return em
        if g1 * gm < 0:
            e2 = em
        else:
            e1, g1 = em, gm
        if abs(e2 - e1) <= 1e-7 * max(abs(e1), 1e-12):
            break
    return 0.5 * (e1 + e2)
