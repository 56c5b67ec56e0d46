"""
Módulo de Stummel-Kato.

η_p(f, r) = sup_x ∫_{Ω∩B_r(x)} |f(y)|·|x-y|^{-(n-p)} dy, com o núcleo
singular integrado pela regra polar na célula do centro.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ..grid import Ball, ScalarField, node_masses, polar_cell_integral
from ..utils.exceptions import HypothesisError
from .fitting import PowerLawFit, power_law_fit
from .morrey import MIN_RADIUS_CELLS, SpacesError, center_nodes

logger = logging.getLogger(__name__)

# Número mínimo de raios para o ajuste de decaimento
MIN_DECAY_RADII = 6

_RADIUS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StummelProfile:
    """η(r) para um conjunto de raios crescentes."""
    p: float
    radii: np.ndarray
    eta: np.ndarray
    argmax_centers: np.ndarray


@dataclass(frozen=True)
class DecayReport:
    """Inclinação de log η(r) contra log r, comparada ao expoente λ-n+p."""
    slope: float
    fit: Optional[PowerLawFit]
    bound: Optional[float]
    tol: float
    passed: bool
    radii: Sequence[float] = field(default_factory=tuple)
    eta: Sequence[float] = field(default_factory=tuple)

    def to_json(self) -> Dict[str, Any]:
        return {
            'slope': self.slope,
            'bound': self.bound,
            'tol': self.tol,
            'rms_residual': None if self.fit is None else self.fit.rms_residual,
            'pass': self.passed,
            'radii': list(self.radii),
            'eta': list(self.eta),
        }


def _check_kernel(p: float, n: int) -> None:
    if p >= n:
        error_msg = f"kernel requires p < n (p={p}, n={n})"
        logger.error(error_msg)
        raise HypothesisError(error_msg)
    if p < 1.0:
        error_msg = f"kernel requires p ≥ 1 (p={p})"
        logger.error(error_msg)
        raise HypothesisError(error_msg)


def stummel_profile(
    f: ScalarField,
    p: float,
    radii: Sequence[float],
    centers: Sequence[Sequence[float]],
) -> StummelProfile:
    """η_p(f, r) para vários raios numa única passagem por centro.

    Para cada centro, as contribuições |f(y)|·|x-y|^{-(n-p)}·w_y são
    ordenadas pela distância e acumuladas; o termo da célula do centro vem
    da regra polar. O resultado é monótono não decrescente em r.

    Args:
        f: Campo amostrado.
        p: Expoente (1 <= p < n).
        radii: Raios (> 4h).
        centers: Centros (nós da malha).

    Returns:
        StummelProfile com raios em ordem crescente.
    """
    grid = f.grid
    n = grid.n
    _check_kernel(p, n)

    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size == 0:
        raise SpacesError("no radii given")
    if radii[0] <= MIN_RADIUS_CELLS * grid.h * (1.0 - _RADIUS_TOL):
        error_msg = f"radius below {MIN_RADIUS_CELLS}h: r={radii[0]:.6g}, h={grid.h:.6g}"
        logger.error(error_msg)
        raise SpacesError(error_msg)

    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if centers.shape[0] == 0:
        raise SpacesError("no centers given")
    nodes = center_nodes(grid, centers)

    absf = f.abs_pow(1.0)
    masses = node_masses(absf)
    e = float(n - p)
    r_max = float(radii[-1])

    eta = np.full(radii.size, -np.inf)
    argmax = np.zeros(radii.size, dtype=np.intp)
    for node in nodes:
        cx, cy = float(grid.x[node]), float(grid.y[node])
        near = grid.ball_nodes(Ball((cx, cy), r_max))
        near = near[near != node]
        d = np.hypot(grid.x[near] - cx, grid.y[near] - cy)
        order = np.argsort(d, kind='stable')
        d = d[order]
        contrib = masses[near[order]] * d ** (-e)

        center_term = polar_cell_integral(
            grid, int(node),
            lambda x, y: np.abs(absf.evaluate(x, y)) * np.hypot(x - cx, y - cy) ** (-e)
        )
        cumulative = np.concatenate([[0.0], np.cumsum(contrib)])
        values = center_term + cumulative[np.searchsorted(d, radii * (1.0 + _RADIUS_TOL), side='right')]

        better = values > eta
        eta[better] = values[better]
        argmax[better] = node

    return StummelProfile(p=p, radii=radii, eta=eta, argmax_centers=grid.points[argmax])


def stummel_modulus(f: ScalarField, p: float, r: float, centers: Sequence[Sequence[float]]) -> float:
    """η_p(f, r) = max sobre os centros de ∫_{Ω∩B_r(x)} |f(y)|·|x-y|^{-(n-p)} dy.

    Raises:
        HypothesisError: "kernel requires p < n".
    """
    return float(stummel_profile(f, p, [r], centers).eta[0])


def stummel_decay_slope(
    f: ScalarField,
    p: float,
    radii: Sequence[float],
    centers: Sequence[Sequence[float]],
    lam: Optional[float] = None,
    tol: float = 0.05,
) -> DecayReport:
    """Inclinação log-log de η(r), com o contrato slope >= λ-n+p-tol quando λ é dado.

    Args:
        f: Campo amostrado.
        p: Expoente do núcleo.
        radii: Pelo menos 6 raios.
        centers: Centros da busca do supremo.
        lam: Expoente de Morrey de f em L^{1,λ} (opcional).
        tol: Tolerância do contrato.

    Raises:
        SpacesError: "degenerate profile" se η(r)=0 para algum r com f≠0.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < MIN_DECAY_RADII:
        raise SpacesError(f"stummel decay needs at least {MIN_DECAY_RADII} radii ({radii.size})")
    if radii.max() < 10.0 * radii.min() * (1.0 - 1e-9):
        logger.warning(
            f"Raios cobrem menos de uma década ([{radii.min():.3g}, {radii.max():.3g}]); inclinação menos robusta"
        )

    profile = stummel_profile(f, p, radii, centers)
    n = f.grid.n
    bound = None if lam is None else float(lam - n + p)

    if np.all(profile.eta == 0.0) and f.max_abs() == 0.0 and not f.singular_nodes:
        logger.info("f ≡ 0: η(r) identicamente nulo, decaimento trivial")
        return DecayReport(np.inf, None, bound, tol, True, tuple(profile.radii), tuple(profile.eta))
    if np.any(profile.eta <= 0.0):
        error_msg = "degenerate profile: η(r) = 0 for f ≠ 0"
        logger.error(error_msg)
        raise SpacesError(error_msg)

    fit = power_law_fit(profile.radii, profile.eta, min_points=MIN_DECAY_RADII)
    passed = True if bound is None else bool(fit.slope >= bound - tol)
    logger.info(f"Decaimento de Stummel: inclinação {fit.slope:.4f} (limite {bound})")
    return DecayReport(fit.slope, fit, bound, tol, passed, tuple(profile.radii), tuple(profile.eta))
