from .legendre import (
    AnalyticCurve,
    LegendreSeries,
    SummedCurve,
    TabulatedCurve,
    legendre_table,
    load_coefficients,
    write_coefficients,
)
from .masses import MassParameters
from .mep import MinimumEnergyPath, minimum_energy_path
from .surface import (
    LegendreSurface,
    PotentialSurface,
    SeparableSurface,
    SurrogateSurface,
    SURROGATES,
    make_surrogate,
)

__all__ = [
    "AnalyticCurve",
    "LegendreSeries",
    "LegendreSurface",
    "MassParameters",
    "MinimumEnergyPath",
    "PotentialSurface",
    "SeparableSurface",
    "SurrogateSurface",
    "SURROGATES",
    "SummedCurve",
    "TabulatedCurve",
    "legendre_table",
    "load_coefficients",
    "make_surrogate",
    "minimum_energy_path",
    "write_coefficients",
]
