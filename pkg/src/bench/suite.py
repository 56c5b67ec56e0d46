"""
Execução dos casos de referência: solução (ou oráculo), medição do
expoente com a janela padrão e comparação com os valores analíticos.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..analysis import (
    AnalysisError,
    ProfileSettings,
    campanato_excess,
    fit_exponent,
    profile_radii,
    radial_excess_profile,
)
from ..grid import Grid, ScalarField, gradient
from ..solver import PPoissonSolver, SolverConfig
from ..spaces import BallFamily, morrey_exponent
from ..utils.exceptions import MorreyLabError
from .cases import BenchmarkCase, BenchmarkError

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ['id', 'p', 'lambda', 'alpha_pred', 'alpha_hat', 'pass']

# Espaçamento padrão dos casos
DEFAULT_H = 1.0 / 64.0

# Tolerância padrão entre α̂ e o valor analítico
EXPONENT_TOL = 0.05

# Tolerâncias da testemunha de otimalidade
MORREY_TOL = 0.1
MIN_GROWTH_RATIO = 1.15

# Raios do caminho unidimensional (casos com n != 2)
ORACLE_RADII = (0.25, 0.0025)


@dataclass
class CaseResult:
    """Linha de resultado de um caso."""
    id: str
    p: float
    lam: float
    alpha_pred: Optional[float]
    alpha_hat: Optional[float]
    passed: bool
    expected: Optional[float] = None
    window: Optional[Sequence[float]] = None
    residual: Optional[float] = None
    iterations: int = 0
    elapsed: float = 0.0
    note: str = ""

    def row(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'p': self.p,
            'lambda': self.lam,
            'alpha_pred': self.alpha_pred,
            'alpha_hat': self.alpha_hat,
            'pass': self.passed,
        }

    def to_json(self) -> Dict[str, Any]:
        data = self.row()
        data.update({
            'expected': self.expected,
            'window': list(self.window) if self.window is not None else None,
            'residual': self.residual,
            'iterations': self.iterations,
            'note': self.note,
        })
        return data


def solve_case(case: BenchmarkCase, grid: Grid, cfg: Optional[SolverConfig] = None):
    """Resolve -Δ_p u = f do caso com u exata na fronteira."""
    cfg = (cfg or SolverConfig(p=case.p)).replace(p=case.p)
    return PPoissonSolver(cfg).solve(case.source_field(grid), case.boundary_field(grid))


def _measured_field(case: BenchmarkCase, grid: Grid, oracle: bool, cfg: Optional[SolverConfig]):
    """Campo cuja regularidade é medida (Du nos radiais, u nos de Serrin)."""
    residual, iterations = None, 0
    if oracle:
        u = case.exact_field(grid)
    else:
        result = solve_case(case, grid, cfg)
        u, residual, iterations = result.u, result.residual, result.iterations
    if case.family == 'radial':
        G = case.exact_gradient(grid) if oracle else gradient(u)
    else:
        G = u
    return G, residual, iterations


def run_case(
    case: BenchmarkCase,
    h: float = DEFAULT_H,
    cfg: Optional[SolverConfig] = None,
    oracle: bool = False,
    tol: float = EXPONENT_TOL,
    profile: Optional[ProfileSettings] = None,
) -> CaseResult:
    """Mede α̂ de um caso e compara com o valor analítico.

    Nos casos radiais o expoente medido é o de Du (esperado alpha_true);
    nos de Serrin, o de u (esperado γ). Casos com n != 2 usam sempre o
    perfil unidimensional exato do oráculo.

    Args:
        case: Caso de referência.
        h: Espaçamento da malha.
        cfg: Parâmetros do solver.
        oracle: Usa a solução exata em vez do solver.
        tol: Tolerância |α̂ - esperado|.
        profile: Razão dos raios e janela de ajuste (padrão: ProfileSettings()).
    """
    profile = profile or ProfileSettings()
    start = time.perf_counter()
    expected = case.alpha_true if case.family == 'radial' else case.u_holder
    residual, iterations = None, 0

    if case.n != 2:
        if case.oracle is None:
            raise BenchmarkError(f"case {case.id}: n={case.n} only runs on the radial oracle path")
        excess = radial_excess_profile(case.oracle, profile_radii(*ORACLE_RADII, profile.ratio), case.p, case.n)
        fit = fit_exponent(excess)
    else:
        grid = Grid(case.domain_kind, h)
        G, residual, iterations = _measured_field(case, grid, oracle, cfg)
        center = (0.0, 0.0)
        window = profile.window(grid, center)
        excess = campanato_excess(G, center, profile.radii(grid, window[1]), case.p)
        fit = fit_exponent(excess, window)

    passed = bool(abs(fit.alpha_hat - expected) <= tol)
    result = CaseResult(
        id=case.id,
        p=case.p,
        lam=case.lambda_true,
        alpha_pred=case.alpha_pred,
        alpha_hat=fit.alpha_hat,
        passed=passed,
        expected=float(expected),
        window=fit.r_window,
        residual=residual,
        iterations=iterations,
        elapsed=time.perf_counter() - start,
        note=case.note,
    )
    logger.info(
        f"Caso {case.id}: α̂={fit.alpha_hat:.4f} esperado={expected:.4f} "
        f"({'passou' if passed else 'falhou'}, {result.elapsed:.1f} s)"
    )
    return result


def run_suite(
    cases: Sequence[BenchmarkCase],
    h: float = DEFAULT_H,
    cfg: Optional[SolverConfig] = None,
    oracle: bool = False,
    tol: float = EXPONENT_TOL,
    threads: int = 1,
    profile: Optional[ProfileSettings] = None,
) -> List[CaseResult]:
    """Executa os casos (em paralelo) e devolve os resultados ordenados por id.

    Falhas de um caso viram uma linha reprovada com a mensagem na nota.
    """
    def guarded(case: BenchmarkCase) -> CaseResult:
        try:
            return run_case(case, h, cfg, oracle, tol, profile)
        except MorreyLabError as e:
            logger.warning(f"Caso {case.id} falhou: {e}")
            return CaseResult(case.id, case.p, case.lambda_true, case.alpha_pred, None, False, note=str(e))

    if threads > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(guarded, cases))
    else:
        results = [guarded(case) for case in cases]
    results.sort(key=lambda r: r.id)
    logger.info(f"Suite: {sum(r.passed for r in results)}/{len(results)} caso(s) aprovados")
    return results


def results_frame(results: Sequence[CaseResult]) -> pd.DataFrame:
    """Tabela de resultados com as colunas id, p, lambda, alpha_pred, alpha_hat, pass."""
    return pd.DataFrame([r.row() for r in results], columns=BENCH_COLUMNS)


@dataclass
class SharpnessReport:
    """Testemunha de que λ > n-1 não pode ser relaxado."""
    case_id: str
    lambda_true: float
    morrey_exponent: float
    holder_u: float
    u_holder_true: float
    hs: List[float]
    max_gradients: List[float]
    growth_ratios: List[float]
    passed: bool
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        data = {
            'id': self.case_id,
            'lambda_true': self.lambda_true,
            'morrey_exponent': self.morrey_exponent,
            'holder_u': self.holder_u,
            'u_holder_true': self.u_holder_true,
            'hs': self.hs,
            'max_gradients': self.max_gradients,
            'growth_ratios': self.growth_ratios,
            'pass': self.passed,
        }
        data.update(self.extra)
        return data


def sharpness_witness(
    case: BenchmarkCase,
    hs: Sequence[float] = (1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0),
    oracle: bool = True,
    cfg: Optional[SolverConfig] = None,
    morrey_tol: float = MORREY_TOL,
    holder_tol: float = EXPONENT_TOL,
    min_growth: float = MIN_GROWTH_RATIO,
    profile: Optional[ProfileSettings] = None,
) -> SharpnessReport:
    """Expoente de Morrey de f, Hölder de u e crescimento de max|Du_h|.

    Args:
        case: Caso de Serrin.
        hs: Espaçamentos, do mais grosso ao mais fino.
        oracle: Usa u exata amostrada em vez do solver.
        cfg: Parâmetros do solver.
        morrey_tol: Tolerância do expoente de Morrey medido.
        holder_tol: Tolerância do expoente de Hölder de u.
        min_growth: Menor razão aceita entre max|Du_h| em h e em 2h.
        profile: Razão dos raios e janela do ajuste de Hölder.
    """
    profile = profile or ProfileSettings()
    if case.family != 'serrin':
        raise BenchmarkError(f"sharpness witness requires a Serrin case ({case.id})")
    hs = sorted((float(h) for h in hs), reverse=True)
    if len(hs) < 2:
        raise BenchmarkError("sharpness witness needs at least two grids")

    max_gradients = []
    u = None
    for h in hs:
        grid = Grid(case.domain_kind, h)
        u = case.exact_field(grid) if oracle else solve_case(case, grid, cfg).u
        max_gradients.append(float(gradient(u).max_norm()))
    growth = [b / a for a, b in zip(max_gradients[:-1], max_gradients[1:])]

    grid = u.grid
    f = case.source_field(grid)
    fam = BallFamily.geometric(grid, r_min=4.0 * grid.h)
    morrey_fit = morrey_exponent(f, fam, p=1.0)

    window = profile.window(grid, (0.0, 0.0))
    try:
        holder_fit = fit_exponent(campanato_excess(u, (0.0, 0.0), profile.radii(grid, window[1]), case.p), window)
        holder_u = holder_fit.alpha_hat
    except AnalysisError as e:
        logger.warning(f"Expoente de Hölder de u indisponível: {e}")
        holder_u = float('nan')

    gamma = float(case.u_holder)
    passed = (
        abs(morrey_fit.slope - case.lambda_true) <= morrey_tol
        and abs(holder_u - gamma) <= holder_tol
        and all(ratio >= min_growth for ratio in growth)
    )
    logger.info(
        f"Testemunha {case.id}: expoente de Morrey {morrey_fit.slope:.3f} (λ={case.lambda_true:g}), "
        f"Hölder de u {holder_u:.3f} (γ={gamma:g}), crescimento {['%.3f' % g for g in growth]}"
    )
    return SharpnessReport(
        case_id=case.id,
        lambda_true=case.lambda_true,
        morrey_exponent=float(morrey_fit.slope),
        holder_u=float(holder_u),
        u_holder_true=gamma,
        hs=hs,
        max_gradients=max_gradients,
        growth_ratios=growth,
        passed=bool(passed),
    )
