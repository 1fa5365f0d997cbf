"""Unit conventions.

Everything internal is in Hartree atomic units: energies in hartree,
lengths in bohr, masses in electron masses, time in a.u. of time, and
hbar carried explicitly as a parameter (the physical value is 1 a.u.).
Wavenumbers (cm^-1) appear only at I/O boundaries.
"""

CM_PER_HARTREE = 219474.6313632

AMU_TO_AU = 1822.888486209

# Default atomic masses (amu): 7Li, 12C, 14N.
DEFAULT_M_LI = 7.016003
DEFAULT_M_C = 12.0
DEFAULT_M_N = 14.003074

# Default frozen C-N bond length (bohr).
DEFAULT_R_E = 2.186


def cm_to_hartree(e_cm: float) -> float:
    return e_cm / CM_PER_HARTREE


def hartree_to_cm(e_h: float) -> float:
    return e_h * CM_PER_HARTREE
