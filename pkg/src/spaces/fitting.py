"""
Ajuste de leis de potência em escala log-log.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..utils.exceptions import MorreyLabError

logger = logging.getLogger(__name__)


class FitError(MorreyLabError, ValueError):
    """Exceção para ajustes com pontos insuficientes ou degenerados."""
    pass


@dataclass(frozen=True)
class PowerLawFit:
    """Reta ajustada a (log x, log y)."""
    slope: float
    intercept: float
    rms_residual: float
    points_used: int


def power_law_fit(x: Sequence[float], y: Sequence[float], min_points: int = 2) -> PowerLawFit:
    """Ajusta y = C·x^slope por mínimos quadrados em log-log.

    Args:
        x: Abscissas positivas (raios).
        y: Ordenadas positivas.
        min_points: Número mínimo de pontos exigido.

    Returns:
        PowerLawFit com inclinação, intercepto e resíduo RMS.

    Raises:
        FitError: Se houver menos pontos positivos que min_points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    usable = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    count = int(usable.sum())
    if count < max(min_points, 2):
        error_msg = f"fewer than {max(min_points, 2)} usable points ({count})"
        logger.error(error_msg)
        raise FitError(error_msg)

    lx = np.log(x[usable])
    ly = np.log(y[usable])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    residual = ly - (slope * lx + intercept)
    rms = float(np.sqrt(np.mean(residual ** 2)))
    return PowerLawFit(float(slope), float(intercept), rms, count)


def linear_trend(x: Sequence[float], y: Sequence[float]) -> float:
    """Inclinação de mínimos quadrados de y contra x (sem logaritmos)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0.0:
        raise FitError(f"fewer than 2 usable points ({x.size})")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
