"""
Módulo do solver: minimização da energia p-Dirichlet, substituição
p-harmônica em bolas, resíduo fraco e o oráculo radial exato.
"""

from .energy import PEnergy, dirichlet_energy, load_vector
from .p_poisson import (
    HISTORY_COLUMNS,
    ConvergenceError,
    IterationRecord,
    PPoissonSolver,
    SolveResult,
    SolverConfig,
    SolverError,
    convergence_study,
    p_harmonic_replacement,
    solve_p_poisson,
)
from .weak_form import (
    TestFunction,
    WeakResidual,
    flux,
    make_test_function,
    profile_values,
    support_inside,
    test_family,
    weak_residual,
)
from .radial import RadialProfile, radial_operator_residual, radial_oracle

__all__ = [
    'PEnergy',
    'dirichlet_energy',
    'load_vector',
    'HISTORY_COLUMNS',
    'ConvergenceError',
    'IterationRecord',
    'PPoissonSolver',
    'SolveResult',
    'SolverConfig',
    'SolverError',
    'convergence_study',
    'p_harmonic_replacement',
    'solve_p_poisson',
    'TestFunction',
    'WeakResidual',
    'flux',
    'make_test_function',
    'profile_values',
    'support_inside',
    'test_family',
    'weak_residual',
    'RadialProfile',
    'radial_operator_residual',
    'radial_oracle',
]
