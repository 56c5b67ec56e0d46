"""
Verificações da desigualdade de Fefferman-Phong e do limite de dualidade.

Para φ com suporte compacto em B = B_r:
  ∫_B |f||φ|^p <= c r^{λ-n+p} ‖f‖_{L^{1,λ}} ∫_B |Dφ|^p
e o pareamento ∫|f||φ| <= C ‖f‖_{L^{1,λ}} ‖φ‖_{W^{1,p}}.
Só se testa a uniformidade em r da razão; a constante não é afirmada.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..grid import Ball, ScalarField, TriangleMesh, node_masses
from ..solver import TestFunction, make_test_function, support_inside
from ..spaces import linear_trend
from ..utils.exceptions import HypothesisError
from .campanato import AnalysisError

logger = logging.getLogger(__name__)

FP_COLUMNS = ['ball_x', 'ball_y', 'radius', 'lhs', 'rhs_core', 'ratio', 'phi_id']

# Tolerância padrão da tendência da razão contra ln r
FP_TREND_TOL = 0.05

# Menor raio padrão da bateria (a década começa em max(este valor, 4h))
DEFAULT_MIN_RADIUS = 0.025


@dataclass(frozen=True)
class FPReport:
    lhs: float
    rhs_core: float
    ratio: float
    ball: Ball
    phi_id: int

    def row(self) -> Dict[str, Any]:
        return {
            'ball_x': self.ball.center[0],
            'ball_y': self.ball.center[1],
            'radius': self.ball.radius,
            'lhs': self.lhs,
            'rhs_core': self.rhs_core,
            'ratio': self.ratio,
            'phi_id': self.phi_id,
        }


def check_fp_hypotheses(p: float, lam: float, n: int) -> None:
    """1 <= p < n e n-p < λ < n."""
    if p >= n:
        error_msg = f"kernel requires p < n (p={p}, n={n})"
        logger.error(error_msg)
        raise HypothesisError(error_msg)
    if p < 1.0:
        error_msg = f"p < 1 (p={p})"
        logger.error(error_msg)
        raise HypothesisError(error_msg)
    if lam <= n - p:
        error_msg = f"λ ≤ n−p: λ={lam}, n−p={n - p}"
        logger.error(error_msg)
        raise HypothesisError(error_msg)
    if lam >= n:
        error_msg = f"λ ≥ n: λ={lam}, n={n}"
        logger.error(error_msg)
        raise HypothesisError(error_msg)


def _as_test_function(phi: Union[TestFunction, ScalarField], ball: Optional[Ball]) -> Tuple[ScalarField, Ball, int]:
    if isinstance(phi, TestFunction):
        return phi.field, ball or phi.ball, phi.id
    if ball is None:
        raise AnalysisError("a ball is required when φ is a plain field")
    return phi, ball, -1


def _gradient_p_integral(phi: ScalarField, p: float, mesh: Optional[TriangleMesh] = None) -> float:
    mesh = mesh or phi.grid.triangles()
    gx, gy = mesh.gradient(phi.values)
    return mesh.area * float(np.sum((gx * gx + gy * gy) ** (0.5 * p)))


def fp_ratio(
    f: ScalarField,
    phi: Union[TestFunction, ScalarField],
    p: float,
    lam: float,
    morrey_norm_f: float,
    ball: Optional[Ball] = None,
    mesh: Optional[TriangleMesh] = None,
    abs_masses: Optional[np.ndarray] = None,
) -> FPReport:
    """Razão ∫|f||φ|^p / (r^{λ-n+p}‖f‖_{1,λ}∫|Dφ|^p).

    Args:
        f: Dado.
        phi: Função teste (ou campo, com a bola dada à parte).
        p: Expoente (1 <= p < n).
        lam: Expoente de Morrey (n-p < λ < n).
        morrey_norm_f: ‖f‖_{L^{1,λ}}.
        ball: Bola de suporte quando phi é um campo simples.
        mesh: Triangulação reutilizável.
        abs_masses: Massas nodais de |f| já calculadas.

    Raises:
        AnalysisError: "not compactly supported".
    """
    grid = f.grid
    check_fp_hypotheses(p, lam, grid.n)
    field_phi, b, phi_id = _as_test_function(phi, ball)
    if not support_inside(field_phi, b):
        error_msg = f"not compactly supported: φ {phi_id} touches ∂B ({b})"
        logger.error(error_msg)
        raise AnalysisError(error_msg)

    masses = abs_masses if abs_masses is not None else node_masses(f.abs_pow(1.0))
    lhs = float(masses @ np.abs(field_phi.values) ** p)
    grad_p = _gradient_p_integral(field_phi, p, mesh)
    rhs_core = b.radius ** (lam - grid.n + p) * morrey_norm_f * grad_p
    if lhs == 0.0:
        ratio = 0.0
    elif rhs_core > 0.0:
        ratio = lhs / rhs_core
    else:
        ratio = float('inf')
    return FPReport(lhs, rhs_core, ratio, b, phi_id)


def pairing_bound(
    f: ScalarField,
    phi: Union[TestFunction, ScalarField],
    p: float,
    lam: float,
    morrey_norm_f: float,
    ball: Optional[Ball] = None,
) -> float:
    """Razão ∫|f||φ| / (‖f‖_{1,λ}‖φ‖_{W^{1,p}}).

    Raises:
        AnalysisError: φ ≡ 0.
    """
    grid = f.grid
    check_fp_hypotheses(p, lam, grid.n)
    field_phi, _, _ = _as_test_function(phi, ball if ball is not None else getattr(phi, 'ball', None))
    if not np.any(field_phi.values != 0.0):
        error_msg = "φ ≡ 0: pairing undefined"
        logger.error(error_msg)
        raise AnalysisError(error_msg)

    masses = node_masses(f.abs_pow(1.0))
    lhs = float(masses @ np.abs(field_phi.values))
    if lhs == 0.0:
        return 0.0
    w1p = (float(grid.node_weights @ np.abs(field_phi.values) ** p) + _gradient_p_integral(field_phi, p)) ** (1.0 / p)
    if morrey_norm_f <= 0.0:
        return float('inf')
    return lhs / (morrey_norm_f * w1p)


@dataclass
class FPBattery:
    """Resultado de uma bateria de pares (tenda, bola)."""
    reports: List[FPReport]
    trend_slope: float
    max_ratio: float
    all_finite: bool
    passed: bool
    tol: float = FP_TREND_TOL
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.row() for r in self.reports], columns=FP_COLUMNS)

    def to_json(self) -> Dict[str, Any]:
        data = {
            'trials': len(self.reports),
            'trend_slope': self.trend_slope,
            'max_ratio': self.max_ratio,
            'all_finite': self.all_finite,
            'tol': self.tol,
            'pass': self.passed,
        }
        data.update(self.extra)
        return data


def fp_balls(
    grid,
    radii_range: Tuple[float, float],
    trials: int,
    seed: int,
    center: Sequence[float] = (0.0, 0.0),
) -> List[Ball]:
    """Bolas B_r(x₀) com x₀ = centro + r·ξ, ξ uniforme em B_{1/2}, r log-uniforme."""
    rng = np.random.default_rng(seed)
    r_lo, r_hi = radii_range
    balls: List[Ball] = []
    attempts = 0
    while len(balls) < trials:
        attempts += 1
        if attempts > 1000 * max(trials, 1):
            raise AnalysisError("could not place FP balls inside Ω")
        r = float(np.exp(rng.uniform(np.log(r_lo), np.log(r_hi))))
        xi = rng.uniform(-0.5, 0.5, size=2)
        if float(np.hypot(*xi)) > 0.5:
            continue
        c = (center[0] + r * xi[0], center[1] + r * xi[1])
        if grid.distance_to_boundary(c) < r:
            continue
        balls.append(Ball(c, r))
    return balls


def fp_battery(
    f: ScalarField,
    p: float,
    lam: float,
    morrey_norm_f: float,
    radii_range: Optional[Tuple[float, float]] = None,
    trials: int = 50,
    seed: int = 42,
    center: Optional[Sequence[float]] = None,
    tol: float = FP_TREND_TOL,
    threads: int = 1,
) -> FPBattery:
    """Bateria de razões de Fefferman-Phong com tendas aleatórias.

    A tendência é a inclinação de mínimos quadrados da razão contra ln r;
    passa se todas as razões forem finitas e |tendência| <= tol.

    Args:
        f: Dado.
        p: Expoente (1 <= p < n).
        lam: Expoente de Morrey.
        morrey_norm_f: ‖f‖_{L^{1,λ}}.
        radii_range: Intervalo de raios; padrão [r₀, 10r₀] com r₀ = max(0.025, 4h).
        trials: Número de pares (tenda, bola).
        seed: Semente.
        center: Ponto de referência (padrão: singularidade de f ou origem).
        tol: Tolerância da tendência.
        threads: Número de threads.
    """
    grid = f.grid
    check_fp_hypotheses(p, lam, grid.n)
    if radii_range is None:
        r_lo = max(DEFAULT_MIN_RADIUS, 4.0 * grid.h)
        radii_range = (r_lo, 10.0 * r_lo)
    if radii_range[0] < 8.0 * grid.h:
        logger.warning(f"Raio mínimo {radii_range[0]:.4g} < 8h: tendas pouco resolvidas")
    center = center if center is not None else (f.singular_point or (0.0, 0.0))
    balls = fp_balls(grid, radii_range, trials, seed, center)
    mesh = grid.triangles()
    abs_masses = node_masses(f.abs_pow(1.0))

    def evaluate(item):
        index, b = item
        phi = make_test_function(grid, b, 'tent', index)
        return fp_ratio(f, phi, p, lam, morrey_norm_f, mesh=mesh, abs_masses=abs_masses)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(evaluate, enumerate(balls)))
    else:
        reports = [evaluate(item) for item in enumerate(balls)]

    ratios = np.array([r.ratio for r in reports])
    all_finite = bool(np.all(np.isfinite(ratios)))
    trend = linear_trend(np.log([r.ball.radius for r in reports]), ratios) if all_finite and len(reports) > 1 else float('nan')
    passed = all_finite and bool(abs(trend) <= tol)
    logger.info(
        f"Fefferman-Phong: {len(reports)} pares, razão máxima {np.max(ratios, initial=0.0):.4g}, "
        f"tendência {trend:.4g} ({'passou' if passed else 'falhou'})"
    )
    return FPBattery(reports, float(trend), float(np.max(ratios, initial=0.0)), all_finite, passed, tol)
