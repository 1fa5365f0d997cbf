from .continuation import BifurcationScan, BranchSample, continue_branch
from .dynamics import (
    HamiltonianSystem,
    PhasePoint,
    SymplecticIntegrator,
    Trajectory,
    flow,
    fold_theta,
    suggest_dt,
)
from .orbits import (
    PeriodicOrbit,
    classify_stability,
    fd_monodromy,
    find_periodic_orbit,
    newton_fixed_point,
    variational_monodromy,
)
from .section import (
    CrossingEngine,
    SectionPoint,
    composite_sos,
    lift_section_point,
    map_batch,
    poincare_map,
    section_transform,
    shell_sampler,
)

__all__ = [
    "BifurcationScan",
    "BranchSample",
    "CrossingEngine",
    "HamiltonianSystem",
    "PeriodicOrbit",
    "PhasePoint",
    "SectionPoint",
    "SymplecticIntegrator",
    "Trajectory",
    "classify_stability",
    "composite_sos",
    "continue_branch",
    "fd_monodromy",
    "find_periodic_orbit",
    "flow",
    "fold_theta",
    "lift_section_point",
    "map_batch",
    "newton_fixed_point",
    "poincare_map",
    "section_transform",
    "shell_sampler",
    "suggest_dt",
    "variational_monodromy",
]
