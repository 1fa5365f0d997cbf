"""Reduced-mass bookkeeping for the triatomic Jacobi model.

The two active coordinates are R (atom to diatom center of mass) and
theta (Jacobi angle); the diatom bond is frozen at ``r_e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..units import AMU_TO_AU, DEFAULT_M_C, DEFAULT_M_LI, DEFAULT_M_N, DEFAULT_R_E


@dataclass(frozen=True)
class MassParameters:
    """Atomic masses (amu in, atomic units stored) and derived reduced masses.

    ``mu1`` couples to R and to the R-dependent part of the angular kinetic
    energy; ``mu2`` enters only through the fixed moment ``mu2 * r_e**2``.
    """

    m_li: float = DEFAULT_M_LI
    m_c: float = DEFAULT_M_C
    m_n: float = DEFAULT_M_N
    r_e: float = DEFAULT_R_E
    mu1: float = field(init=False)
    mu2: float = field(init=False)

    def __post_init__(self):
        for name in ("m_li", "m_c", "m_n", "r_e"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        m_li = self.m_li * AMU_TO_AU
        m_c = self.m_c * AMU_TO_AU
        m_n = self.m_n * AMU_TO_AU
        m_cn = m_c + m_n
        object.__setattr__(self, "mu1", m_li * m_cn / (m_li + m_cn))
        object.__setattr__(self, "mu2", m_c * m_n / m_cn)

    @property
    def inv_moment_cn(self) -> float:
        """1 / (mu2 * r_e^2), the R-independent angular kinetic coefficient."""
        return 1.0 / (self.mu2 * self.r_e**2)

    def angular_coefficient(self, R):
        """The factor multiplying P_theta^2 / 2 in the Hamiltonian."""
        return 1.0 / (self.mu1 * R**2) + self.inv_moment_cn
