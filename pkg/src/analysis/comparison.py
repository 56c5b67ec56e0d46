"""
Decomposição do excesso do gradiente por comparação com a substituição
p-harmônica v de u numa bola concêntrica maior:

  ⨍_{B_r}|Du-(Du)_r|^p <= C(I₁ + I₂ + I₃)
  I₁ = ⨍_{B_r}|Du-Dv|^p,  I₂ = ⨍_{B_r}|Dv-(Dv)_r|^p,  I₃ = |(Dv)_r-(Du)_r|^p

O decaimento de I₁ em r é comparado com o expoente teórico de cada ramo.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..grid import Ball, ScalarField, gradient, node_masses
from ..solver import SolverConfig, dirichlet_energy, p_harmonic_replacement
from ..spaces import FitError, power_law_fit
from ..utils.exceptions import HypothesisError
from .campanato import MIN_PROFILE_ENTRIES, PROFILE_RATIO, AnalysisError, ExcessProfile, campanato_excess, measure_gamma, profile_radii

logger = logging.getLogger(__name__)

# Razão entre o raio da substituição e o raio de medição
REPLACEMENT_SCALE = 1.25

# Razão padrão entre raios consecutivos das bolas de comparação
COMPARISON_RATIO = 2.0 ** -0.5

# Folga da inclinação medida em relação ao expoente teórico
COMPARISON_TOL = 0.1

# I₁ abaixo deste fator de ⨍|Du|^p é tratado como nulo
VANISHING_I1 = 1e-20

COMPARISON_COLUMNS = ['radius', 'I1', 'I3', 'holder_ok', 'pairing', 'energy_u', 'energy_v']


@dataclass
class Decomposition:
    """Termos I₁, I₂ (perfil opcional) e I₃ numa bola."""
    ball: Ball
    I1: float
    I3: float
    I2_profile: Optional[ExcessProfile] = None

    @property
    def holder_ok(self) -> bool:
        # |⨍ w|^p <= ⨍|w|^p, a menos de arredondamento
        return self.I3 <= self.I1 * (1.0 + 1e-10) + 1e-300


def _check_same_grid(u: ScalarField, v: ScalarField) -> None:
    if u.grid != v.grid:
        error_msg = "grid mismatch: u and v live on different grids"
        logger.error(error_msg)
        raise AnalysisError(error_msg)


def excess_decomposition(
    u: ScalarField,
    v: ScalarField,
    b: Ball,
    p: float,
    radii: Optional[Sequence[float]] = None,
) -> Decomposition:
    """I₁, I₃ e (se radii for dado) o perfil I₂ de Dv na bola b.

    Médias ponderadas pelos pesos nodais sobre b ∩ Ω, de modo que
    I₃ <= I₁ vale exatamente (desigualdade de Jensen discreta).

    Raises:
        AnalysisError: "grid mismatch".
    """
    _check_same_grid(u, v)
    grid = u.grid
    nodes = grid.ball_nodes(b)
    if nodes.size == 0:
        raise AnalysisError(f"empty ball: {b}")
    w = grid.node_weights[nodes]
    du = gradient(u).values[nodes]
    dv = gradient(v).values[nodes]
    diff = du - dv

    I1 = float(w @ np.linalg.norm(diff, axis=1) ** p / w.sum())
    mean_diff = w @ diff / w.sum()
    I3 = float(np.linalg.norm(mean_diff) ** p)

    I2_profile = None
    if radii is not None:
        I2_profile = campanato_excess(gradient(v), b.center, radii, p)
    return Decomposition(b, I1, I3, I2_profile)


def comparison_exponent(p: float, lam: float, n: int) -> float:
    """(λ+1-n)p/(p-1) para p >= 2 e (λ+1-n/p)p-n para p < 2."""
    if p >= 2.0:
        return (lam + 1.0 - n) * p / (p - 1.0)
    return (lam + 1.0 - n / p) * p - n


def _check_comparison_hypotheses(p: float, lam: float, n: int) -> None:
    if p > n:
        error_msg = f"p > n: p={p:g}, n={n}"
        logger.error(error_msg)
        raise HypothesisError(error_msg)
    if p < 2.0 and p <= 2.0 * n / (lam + 1.0):
        error_msg = f"p ≤ 2n/(λ+1): p={p:g}, 2n/(λ+1)={2.0 * n / (lam + 1.0):.6g}"
        logger.error(error_msg)
        raise HypothesisError(error_msg)


@dataclass
class ComparisonReport:
    slope: float
    exponent: float
    p: float
    passed: bool
    rows: List[Dict[str, Any]]
    gamma_hat: Optional[float] = None
    tol: float = COMPARISON_TOL
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def rate_min(self) -> Optional[float]:
        """min(γ̂, taxa) quando γ̂ foi medido."""
        if self.gamma_hat is None:
            return None
        return min(self.gamma_hat, self.exponent / self.p)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=COMPARISON_COLUMNS)

    def to_json(self) -> Dict[str, Any]:
        data = {
            'slope': self.slope,
            'exponent': self.exponent,
            'tol': self.tol,
            'p': self.p,
            'gamma_hat': self.gamma_hat,
            'rate_min': self.rate_min,
            'balls': len(self.rows),
            'holder_ok': all(r['holder_ok'] for r in self.rows),
            'pass': self.passed,
        }
        data.update(self.extra)
        return data


def comparison_radii(grid, center: Sequence[float], scale: float = REPLACEMENT_SCALE, ratio: float = COMPARISON_RATIO) -> np.ndarray:
    """Raios de medição com a bola de substituição (scale·r) em Ω e scale·r >= 8h."""
    distance = grid.distance_to_boundary(center)
    r_max = 0.5 * distance / scale
    r_min = 8.0 * grid.h / scale
    if r_max < r_min:
        raise AnalysisError(f"balls exit domain: no room for comparison balls at {tuple(center)}")
    return profile_radii(r_max, r_min, ratio)


def comparison_check(
    u: ScalarField,
    f: ScalarField,
    p: float,
    lam: float,
    radii: Optional[Sequence[float]] = None,
    center: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
    scale: float = REPLACEMENT_SCALE,
    tol: float = COMPARISON_TOL,
    threads: int = 1,
) -> ComparisonReport:
    """Inclinação de log I₁ contra log r frente ao expoente teórico.

    Para cada raio r, v é a substituição p-harmônica de u em B_{scale·r} e
    I₁ é medido em B_r. Passa se inclinação >= expoente - tol; I₁ nulo em
    todas as bolas (u já p-harmônica) também passa.

    Args:
        u: Solução discreta.
        f: Termo fonte (para o pareamento ∫f(u-v)).
        p: Expoente.
        lam: Expoente de Morrey de f.
        radii: Raios de medição (padrão: comparison_radii).
        center: Centro comum (padrão: singularidade de f ou origem).
        cfg: Parâmetros do solver das substituições.
        scale: Razão entre as bolas de substituição e de medição.
        tol: Folga da inclinação.
        threads: Número de threads.

    Raises:
        HypothesisError: "p ≤ 2n/(λ+1)" no ramo singular.
        AnalysisError: Bolas fora de Ω ou malhas diferentes.
    """
    grid = u.grid
    _check_same_grid(u, f)
    _check_comparison_hypotheses(p, lam, grid.n)
    exponent = comparison_exponent(p, lam, grid.n)
    center = tuple(center) if center is not None else (f.singular_point or (0.0, 0.0))
    radii = np.sort(np.asarray(radii if radii is not None else comparison_radii(grid, center, scale), dtype=float))[::-1]
    masses = node_masses(f)

    def evaluate(r: float) -> Tuple[Dict[str, Any], ScalarField]:
        outer = Ball(center, scale * r)
        if not grid.ball_inside(outer):
            error_msg = f"balls exit domain: {outer}"
            logger.error(error_msg)
            raise AnalysisError(error_msg)
        v = p_harmonic_replacement(u, outer, p, cfg)
        dec = excess_decomposition(u, v, Ball(center, r), p)
        outer_nodes = grid.ball_nodes(outer)
        row = {
            'radius': float(r),
            'I1': dec.I1,
            'I3': dec.I3,
            'holder_ok': dec.holder_ok,
            'pairing': float(masses[outer_nodes] @ (u.values[outer_nodes] - v.values[outer_nodes])),
            'energy_u': dirichlet_energy(u, p, outer_nodes),
            'energy_v': dirichlet_energy(v, p, outer_nodes),
        }
        logger.debug(f"Comparação r={r:.4g}: I1={dec.I1:.4e} I3={dec.I3:.4e}")
        return row, v

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, radii))
    else:
        results = [evaluate(r) for r in radii]
    rows = [row for row, _ in results]

    I1 = np.array([row['I1'] for row in rows])
    idx = grid.domain_indices
    mean_grad = float(grid.node_weights[idx] @ gradient(u).norm().values[idx] ** p / grid.node_weights[idx].sum())
    if np.all(I1 <= VANISHING_I1 * max(1.0, mean_grad)):
        logger.info("I₁ nulo em todas as bolas: u já é p-harmônica")
        slope, passed = float('inf'), True
    else:
        try:
            fit = power_law_fit(radii, I1, min_points=2)
        except FitError as e:
            raise AnalysisError(f"degenerate profile: {e}") from e
        slope = fit.slope
        passed = bool(slope >= exponent - tol)

    gamma_hat = None
    largest_r, (_, largest_v) = radii[0], results[0]
    gamma_radii = profile_radii(largest_r, 4.0 * grid.h)
    if gamma_radii.size >= MIN_PROFILE_ENTRIES:
        fit_gamma = measure_gamma(largest_v, center, gamma_radii, p)
        if fit_gamma is not None:
            gamma_hat = fit_gamma.alpha_hat

    logger.info(
        f"Comparação: inclinação {slope:.4g} vs expoente {exponent:.4g} - {tol:g} "
        f"({'passou' if passed else 'falhou'})"
    )
    return ComparisonReport(slope, exponent, p, passed, rows, gamma_hat, tol)
