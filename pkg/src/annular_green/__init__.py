"""Partial-wave Green function of a 2-D annular barrier above its top (E > V0)."""

from __future__ import annotations

from .errors import (
    AnnularGreenError,
    DegenerateNumerics,
    InternalConsistencyError,
    InvalidInput,
    NearPole,
    NotDiffusionRegime,
    WronskianDegenerate,
)
from .greens import (
    CoefficientSet,
    EnergyContext,
    PotentialProfile,
    Region,
    classify_region,
    coefficient_set,
    context_from_k,
    green_block,
    green_polar_sum,
    green_radial,
    partial_wave_sum,
    wavenumbers,
)
from .oracle import GridSpec, ValidationReport, integrate_radial, oracle_green, validate
from .resonance import ResonanceRoot, ResonanceScanConfig, pole_discriminant, resonance_scan
from .special import bessel_jy, bessel_pair

__version__ = "0.1.0"
