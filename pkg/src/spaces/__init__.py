"""
Módulo de espaços de funções: normas de Morrey, módulo de Stummel-Kato,
inclusões entre espaços de Morrey e o expoente de regularidade previsto.
"""

from .fitting import FitError, PowerLawFit, linear_trend, power_law_fit
from .morrey import (
    DEFAULT_BALL_RATIO,
    BallFamily,
    EmbeddingReport,
    MorreyIndex,
    NormReport,
    SpacesError,
    ball_sup_profile,
    check_embedding,
    check_embedding_hypothesis,
    disk_sums,
    embedding_refinement_study,
    morrey_exponent,
    morrey_norm,
)
from .stummel import DecayReport, StummelProfile, stummel_decay_slope, stummel_modulus, stummel_profile
from .exponents import (
    Branch,
    ExponentPrediction,
    check_hypotheses,
    degenerate_rate,
    predicted_alpha,
    singular_rate,
)

__all__ = [
    'FitError',
    'PowerLawFit',
    'linear_trend',
    'power_law_fit',
    'DEFAULT_BALL_RATIO',
    'BallFamily',
    'EmbeddingReport',
    'MorreyIndex',
    'NormReport',
    'SpacesError',
    'ball_sup_profile',
    'check_embedding',
    'check_embedding_hypothesis',
    'disk_sums',
    'embedding_refinement_study',
    'morrey_exponent',
    'morrey_norm',
    'DecayReport',
    'StummelProfile',
    'stummel_decay_slope',
    'stummel_modulus',
    'stummel_profile',
    'Branch',
    'ExponentPrediction',
    'check_hypotheses',
    'degenerate_rate',
    'predicted_alpha',
    'singular_rate',
]
