"""
Módulo de análise: perfis de excesso de Campanato e ajuste de expoentes,
verificações de Fefferman-Phong e a decomposição por comparação.
"""

from .campanato import (
    MIN_FIT_POINTS,
    MIN_PROFILE_ENTRIES,
    PROFILE_COLUMNS,
    PROFILE_RATIO,
    AnalysisError,
    ExcessProfile,
    ExponentFit,
    ExponentReport,
    ProfileSettings,
    campanato_excess,
    default_window,
    fit_exponent,
    measure_gamma,
    profile_radii,
    radial_excess_profile,
)
from .fefferman_phong import (
    FP_COLUMNS,
    FPBattery,
    FPReport,
    check_fp_hypotheses,
    fp_balls,
    fp_battery,
    fp_ratio,
    pairing_bound,
)
from .comparison import (
    COMPARISON_COLUMNS,
    ComparisonReport,
    Decomposition,
    comparison_check,
    comparison_exponent,
    comparison_radii,
    excess_decomposition,
)
from .plotting import plot_profile, plot_refinement

__all__ = [
    'MIN_FIT_POINTS',
    'MIN_PROFILE_ENTRIES',
    'PROFILE_COLUMNS',
    'PROFILE_RATIO',
    'AnalysisError',
    'ExcessProfile',
    'ExponentFit',
    'ExponentReport',
    'ProfileSettings',
    'campanato_excess',
    'default_window',
    'fit_exponent',
    'measure_gamma',
    'profile_radii',
    'radial_excess_profile',
    'FP_COLUMNS',
    'FPBattery',
    'FPReport',
    'check_fp_hypotheses',
    'fp_balls',
    'fp_battery',
    'fp_ratio',
    'pairing_bound',
    'COMPARISON_COLUMNS',
    'ComparisonReport',
    'Decomposition',
    'comparison_check',
    'comparison_exponent',
    'comparison_radii',
    'excess_decomposition',
    'plot_profile',
    'plot_refinement',
]
