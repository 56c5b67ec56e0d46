"""
Módulo de casos de referência: famílias radial, de Serrin e afim, com expoentes
analíticos, execução da suíte e a testemunha de otimalidade.
"""

from .cases import (
    NOT_C1,
    BenchmarkCase,
    BenchmarkError,
    SignConvention,
    affine_case,
    case_matrix,
    default_matrix,
    parse_case,
    radial_case,
    serrin_case,
)
from .suite import (
    BENCH_COLUMNS,
    CaseResult,
    SharpnessReport,
    results_frame,
    run_case,
    run_suite,
    sharpness_witness,
    solve_case,
)

__all__ = [
    'NOT_C1',
    'BenchmarkCase',
    'BenchmarkError',
    'SignConvention',
    'affine_case',
    'case_matrix',
    'default_matrix',
    'parse_case',
    'radial_case',
    'serrin_case',
    'BENCH_COLUMNS',
    'CaseResult',
    'SharpnessReport',
    'results_frame',
    'run_case',
    'run_suite',
    'sharpness_witness',
    'solve_case',
]
