"""Noncanonical oscillator algebra: symbolic normal ordering, vacuum moments,
perturbative amplitude factors, a dense Fock-space oracle and blackbody spectra."""

from .algebra import (
    Generator,
    Kind,
    ModeLabel,
    ModeTable,
    NormalForm,
    OperatorWord,
    Term,
    multiply,
    normal_order,
    parse_word,
)
from .errors import (
    ConvergenceFailure,
    DimensionCap,
    InvalidVacuum,
    MomentTooLarge,
    NcqoError,
    ParseError,
    TermExplosion,
    TruncationWarning,
    UnknownMode,
    UnsupportedVacuum,
    ZeroDenominator,
)
from .perturbation import (
    FlatVacuum,
    NPhotonSame,
    Stimulated,
    TwoDifferent,
    XFactorReport,
    decay_series_factors,
    emission_factor,
    renormalize_coupling,
    xfactor,
)
from .vacuum import MomentRequest, VacuumSpec, inv_n_moment, nphoton_norm, unit_moment, vev

__version__ = "0.1.0"

__all__ = [
    "Generator", "Kind", "ModeLabel", "ModeTable", "NormalForm", "OperatorWord", "Term",
    "multiply", "normal_order", "parse_word",
    "ConvergenceFailure", "DimensionCap", "InvalidVacuum", "MomentTooLarge", "NcqoError",
    "ParseError", "TermExplosion", "TruncationWarning", "UnknownMode", "UnsupportedVacuum",
    "ZeroDenominator",
    "FlatVacuum", "NPhotonSame", "Stimulated", "TwoDifferent", "XFactorReport",
    "decay_series_factors", "emission_factor", "renormalize_coupling", "xfactor",
    "MomentRequest", "VacuumSpec", "inv_n_moment", "nphoton_norm", "unit_moment", "vev",
]
