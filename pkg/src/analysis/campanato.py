"""
Excesso de Campanato e ajuste do expoente de Hölder.

E(r) = ⨍_{B_r}|G - (G)_r|^p decai como r^{αp} quando G ∈ C^{0,α}; o
expoente é medido pela inclinação de log E contra log r.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import quad

from ..grid import Ball, Grid, ScalarField, VectorField, gradient
from ..solver import RadialProfile
from ..spaces import FitError, power_law_fit
from ..utils.config import get_setting
from ..utils.exceptions import MorreyLabError

logger = logging.getLogger(__name__)

# Razão padrão dos raios dos perfis de excesso
PROFILE_RATIO = 2.0 ** -0.25

# Número mínimo de entradas de um perfil
MIN_PROFILE_ENTRIES = 6

# Número mínimo de pontos do ajuste
MIN_FIT_POINTS = 4

# Janela padrão: [WINDOW_MIN_CELLS·h, WINDOW_FRACTION·dist(centro, ∂Ω)]
WINDOW_MIN_CELLS = 8
WINDOW_FRACTION = 0.25

PROFILE_COLUMNS = ['radius', 'excess']


class AnalysisError(MorreyLabError):
    """Exceção para erros da camada de medição."""
    pass


@dataclass(frozen=True, eq=False)
class ExcessProfile:
    """Pares (r_k, E_k) com raios estritamente decrescentes."""
    center: Tuple[float, float]
    radii: np.ndarray
    excess: np.ndarray
    p: float
    grid_h: Optional[float] = None
    boundary_distance: Optional[float] = None

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        excess = np.asarray(self.excess, dtype=float)
        if radii.shape != excess.shape:
            raise AnalysisError("profile radii and excess lengths differ")
        if np.any(np.diff(radii) >= 0.0):
            raise AnalysisError("profile radii must be strictly decreasing")
        if np.any(excess < 0.0):
            raise AnalysisError("negative excess")
        object.__setattr__(self, 'radii', radii)
        object.__setattr__(self, 'excess', excess)

    @property
    def all_zero(self) -> bool:
        return bool(np.all(self.excess == 0.0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'radius': self.radii, 'excess': self.excess}, columns=PROFILE_COLUMNS)

    def write_csv(self, path: str) -> str:
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        return path


@dataclass(frozen=True)
class ExponentFit:
    """Inclinação ajustada de log E contra log r."""
    slope: float
    alpha_hat: float
    r_window: Tuple[float, float]
    rms_residual: float
    points_used: int
    zeros_excluded: int = 0
    intercept: float = 0.0


@dataclass
class ExponentReport:
    """Resumo JSON de uma medição de expoente."""
    alpha_hat: Optional[float]
    window: Tuple[float, float]
    residual: Optional[float]
    predicted_alpha: Optional[float]
    passed: bool
    note: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        data = {
            'alpha_hat': self.alpha_hat,
            'window': list(self.window),
            'residual': self.residual,
            'predicted_alpha': self.predicted_alpha,
            'pass': self.passed,
        }
        if self.note:
            data['note'] = self.note
        data.update(self.extra)
        return data


def profile_radii(r_max: float, r_min: float, ratio: float = PROFILE_RATIO) -> np.ndarray:
    """Raios r_max·ρ^k >= r_min, decrescentes."""
    if not (0.0 < ratio < 1.0) or r_min <= 0.0 or r_max < r_min:
        raise AnalysisError(f"invalid radii range [{r_min}, {r_max}] with ratio {ratio}")
    count = int(np.floor(np.log(r_min / r_max) / np.log(ratio) + 1e-9)) + 1
    return r_max * ratio ** np.arange(count)


def default_window(
    grid: Grid,
    center: Sequence[float],
    min_cells: float = WINDOW_MIN_CELLS,
    fraction: float = WINDOW_FRACTION,
) -> Tuple[float, float]:
    """Janela [min_cells·h, fraction·dist(centro, ∂Ω)] (padrão [8h, 0.25·dist])."""
    return min_cells * grid.h, fraction * grid.distance_to_boundary(center)


@dataclass(frozen=True)
class ProfileSettings:
    """Razão dos raios e janela de ajuste dos perfis medidos na malha."""
    ratio: float = PROFILE_RATIO
    window_min_cells: float = WINDOW_MIN_CELLS
    window_fraction: float = WINDOW_FRACTION

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise AnalysisError(f"profile ratio must lie in (0, 1): {self.ratio}")
        if self.window_min_cells < 4.0:
            raise AnalysisError(f"radius below 4h: window_min_cells={self.window_min_cells}")
        if not (0.0 < self.window_fraction <= 1.0):
            raise AnalysisError(f"window fraction must lie in (0, 1]: {self.window_fraction}")

    @classmethod
    def from_settings(cls, config: Dict[str, Any]) -> "ProfileSettings":
        """Lê a seção 'analysis' do config.json."""
        return cls(
            ratio=float(get_setting(config, 'analysis.profile_ratio', PROFILE_RATIO)),
            window_min_cells=float(get_setting(config, 'analysis.window_min_cells', WINDOW_MIN_CELLS)),
            window_fraction=float(get_setting(config, 'analysis.window_fraction', WINDOW_FRACTION)),
        )

    def window(self, grid: Grid, center: Sequence[float]) -> Tuple[float, float]:
        return default_window(grid, center, self.window_min_cells, self.window_fraction)

    def radii(self, grid: Grid, r_max: float) -> np.ndarray:
        """Raios de r_max até 4h com a razão configurada."""
        return profile_radii(r_max, 4.0 * grid.h, self.ratio)


def _excess_on_nodes(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """⨍|G - (G)|^p com médias ponderadas (zero exato para G constante)."""
    ref = values[0]
    dev = values - ref
    mean_dev = weights @ dev / weights.sum()
    diff = dev - mean_dev
    if diff.ndim == 1:
        mag = np.abs(diff)
    else:
        mag = np.linalg.norm(diff, axis=1)
    return float(weights @ mag ** p / weights.sum())


def campanato_excess(
    G: Union[ScalarField, VectorField],
    center: Sequence[float],
    radii: Sequence[float],
    p: float,
) -> ExcessProfile:
    """Perfil de excesso de Campanato de um campo em bolas concêntricas.

    Args:
        G: Campo escalar ou vetorial.
        center: Centro comum das bolas.
        radii: Raios (ordenados internamente de forma decrescente).
        p: Expoente do excesso.

    Raises:
        AnalysisError: "balls exit domain" ou raios abaixo de 4h.
    """
    grid = G.grid
    center = (float(center[0]), float(center[1]))
    radii = np.sort(np.unique(np.asarray(radii, dtype=float)))[::-1]
    if radii.size < MIN_PROFILE_ENTRIES:
        raise AnalysisError(f"excess profile needs at least {MIN_PROFILE_ENTRIES} radii ({radii.size})")
    distance = grid.distance_to_boundary(center)
    if radii[0] > distance * (1.0 + 1e-12):
        error_msg = f"balls exit domain: r={radii[0]:.4g} > dist(center, ∂Ω)={distance:.4g}"
        logger.error(error_msg)
        raise AnalysisError(error_msg)
    if radii[-1] < 4.0 * grid.h * (1.0 - 1e-12):
        error_msg = f"radius below 4h: r={radii[-1]:.4g}, h={grid.h:.4g}"
        logger.error(error_msg)
        raise AnalysisError(error_msg)

    values = G.values if isinstance(G, VectorField) else np.where(np.isfinite(G.values), G.values, 0.0)
    excess = np.empty(radii.size)
    for k, r in enumerate(radii):
        nodes = grid.ball_nodes(Ball(center, r))
        excess[k] = _excess_on_nodes(values[nodes], grid.node_weights[nodes], p)
    return ExcessProfile(center, radii, excess, p, grid.h, distance)


def fit_exponent(profile: ExcessProfile, window: Optional[Tuple[float, float]] = None) -> ExponentFit:
    """Ajuste de mínimos quadrados de (log r, log E) na janela.

    Args:
        profile: Perfil de excesso.
        window: (r_lo, r_hi); padrão [8h, 0.25·dist] quando o perfil
            conhece a malha, senão todos os raios.

    Raises:
        AnalysisError: Menos de 4 pontos utilizáveis.
    """
    if window is None:
        if profile.grid_h is not None and profile.boundary_distance is not None:
            window = (WINDOW_MIN_CELLS * profile.grid_h, WINDOW_FRACTION * profile.boundary_distance)
        else:
            window = (float(profile.radii.min()), float(profile.radii.max()))
    lo, hi = float(window[0]), float(window[1])

    inside = (profile.radii >= lo * (1.0 - 1e-12)) & (profile.radii <= hi * (1.0 + 1e-12))
    zeros = int(np.sum(inside & (profile.excess <= 0.0)))
    usable = inside & (profile.excess > 0.0)
    if zeros:
        logger.warning(f"{zeros} excesso(s) nulo(s) excluído(s) do ajuste")
    if int(usable.sum()) < MIN_FIT_POINTS:
        error_msg = f"fewer than {MIN_FIT_POINTS} usable points in window [{lo:.4g}, {hi:.4g}] ({int(usable.sum())})"
        logger.error(error_msg)
        raise AnalysisError(error_msg)

    try:
        fit = power_law_fit(profile.radii[usable], profile.excess[usable], min_points=MIN_FIT_POINTS)
    except FitError as e:
        raise AnalysisError(str(e)) from e
    return ExponentFit(
        slope=fit.slope,
        alpha_hat=fit.slope / profile.p,
        r_window=(lo, hi),
        rms_residual=fit.rms_residual,
        points_used=fit.points_used,
        zeros_excluded=zeros,
        intercept=fit.intercept,
    )


def radial_excess_profile(profile: RadialProfile, radii: Sequence[float], p: float, n: Optional[int] = None) -> ExcessProfile:
    """Excesso exato de Du para o oráculo radial em bolas centradas na origem.

    Por simetria (Du)_r = 0, logo E(r) = n r^{-n} ∫_0^r |u'(ρ)|^p ρ^{n-1} dρ,
    válido em qualquer dimensão.
    """
    n = profile.n if n is None else int(n)
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    excess = np.empty(radii.size)
    for k, r in enumerate(radii):
        value, _ = quad(lambda t: abs(float(profile.du(t))) ** p * t ** (n - 1), 0.0, r, epsabs=0.0, epsrel=1e-12, limit=200)
        excess[k] = n * r ** (-n) * value
    return ExcessProfile((0.0, 0.0), radii, excess, p)


def measure_gamma(
    v: ScalarField,
    center: Sequence[float],
    radii: Sequence[float],
    p: float,
    window: Optional[Tuple[float, float]] = None,
) -> Optional[ExponentFit]:
    """γ̂ do gradiente de uma substituição p-harmônica (None se o excesso é nulo)."""
    profile = campanato_excess(gradient(v), center, radii, p)
    if profile.all_zero:
        return None
    try:
        return fit_exponent(profile, window or (float(profile.radii.min()), float(profile.radii.max())))
    except AnalysisError as e:
        logger.warning(f"γ̂ indisponível: {e}")
        return None
