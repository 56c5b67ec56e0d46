"""
Estimadores de normas de Morrey sobre campos amostrados.

A norma ‖f‖_{L^{p,λ}} é o supremo, sobre bolas B_r(x) com x ∈ Ω, de
(r^{-λ} ∫_{Ω∩B_r(x)} |f|^p)^{1/p}; o supremo é discretizado por uma
família de bolas com centros num sub-reticulado e raios geométricos.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.signal import fftconvolve

from ..grid import Ball, DomainKind, Grid, GridError, ScalarField, node_masses
from ..utils.config import get_setting
from ..utils.exceptions import HypothesisError, MorreyLabError
from .fitting import PowerLawFit, power_law_fit

logger = logging.getLogger(__name__)

# Razão geométrica padrão dos raios da família de bolas
DEFAULT_BALL_RATIO = 2.0 ** -0.5

# Número mínimo de raios de uma família geométrica
MIN_RADII = 8

# Raio mínimo, em múltiplos de h
MIN_RADIUS_CELLS = 4

_RADIUS_TOL = 1e-12


class SpacesError(MorreyLabError, ValueError):
    """Exceção para erros nos estimadores de espaços de funções."""
    pass


@dataclass(frozen=True)
class MorreyIndex:
    """Par de expoentes (p, λ) de um espaço de Morrey L^{p,λ}."""
    p: float
    lam: float
    n: int = 2

    def __post_init__(self):
        if not (1.0 <= self.p < np.inf):
            raise SpacesError(f"invalid Morrey index: p={self.p} outside [1, ∞)")
        if not (0.0 <= self.lam <= self.n):
            raise SpacesError(f"invalid Morrey index: λ={self.lam} outside [0, {self.n}]")


@dataclass(frozen=True, eq=False)
class BallFamily:
    """Família finita de bolas que discretiza o supremo sobre (x, r).

    Os centros são nós da malha e os raios formam uma sequência
    estritamente decrescente.
    """
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).reshape(-1, 2)
        radii = np.asarray(self.radii, dtype=float).ravel()
        if radii.size and (np.any(radii <= 0.0) or np.any(np.diff(radii) >= 0.0)):
            raise SpacesError("ball family radii must be positive and strictly decreasing")
        object.__setattr__(self, 'centers', centers)
        object.__setattr__(self, 'radii', radii)

    @property
    def empty(self) -> bool:
        return self.centers.shape[0] == 0 or self.radii.size == 0

    @property
    def size(self) -> int:
        return self.centers.shape[0] * self.radii.size

    def balls(self):
        for r in self.radii:
            for c in self.centers:
                yield Ball((c[0], c[1]), r)

    @classmethod
    def geometric(
        cls,
        grid: Grid,
        r_max: Optional[float] = None,
        r_min: Optional[float] = None,
        ratio: float = DEFAULT_BALL_RATIO,
        stride: Optional[int] = None,
        min_radii: int = MIN_RADII,
    ) -> "BallFamily":
        """Família com raios r_k = r_max·ρ^k ≥ r_min e centros num sub-reticulado.

        Args:
            grid: Malha do campo.
            r_max: Maior raio (padrão: diam(Ω)).
            r_min: Menor raio (padrão: 4h).
            ratio: Razão ρ ∈ (0, 1).
            stride: Espaçamento dos centros em nós (padrão: floor(r_min/h)).
            min_radii: Número mínimo de raios exigido.

        Returns:
            BallFamily com centros nos nós de Ω.
        """
        r_max = grid.diameter if r_max is None else float(r_max)
        r_min = MIN_RADIUS_CELLS * grid.h if r_min is None else float(r_min)
        if not (0.0 < ratio < 1.0):
            raise SpacesError(f"ball ratio must lie in (0, 1): {ratio}")
        if r_max > grid.diameter * (1.0 + _RADIUS_TOL):
            raise SpacesError(f"r_max={r_max} exceeds diam(Ω)={grid.diameter}")
        if r_min < MIN_RADIUS_CELLS * grid.h * (1.0 - _RADIUS_TOL):
            raise SpacesError(f"r_min={r_min} below {MIN_RADIUS_CELLS}h")

        count = int(np.floor(np.log(r_min / r_max) / np.log(ratio) + 1e-9)) + 1
        radii = r_max * ratio ** np.arange(max(count, 0))
        if radii.size < min_radii:
            error_msg = f"ball family needs at least {min_radii} radii (got {radii.size})"
            logger.error(error_msg)
            raise SpacesError(error_msg)

        stride = max(1, int(np.floor(r_min / grid.h + 1e-9))) if stride is None else int(stride)
        center = (0.5, 0.5) if grid.domain_kind is DomainKind.SQUARE else (0.0, 0.0)
        k0 = grid.nearest_node(center)
        i0, j0 = k0 % grid.nx, k0 // grid.nx
        iis = np.concatenate([np.arange(i0, -1, -stride)[::-1], np.arange(i0 + stride, grid.nx, stride)])
        jjs = np.concatenate([np.arange(j0, -1, -stride)[::-1], np.arange(j0 + stride, grid.ny, stride)])
        ii, jj = np.meshgrid(iis, jjs)
        nodes = (jj * grid.nx + ii).ravel()
        nodes = nodes[grid.in_domain[nodes]]

        logger.debug(f"Família geométrica: {nodes.size} centros, {radii.size} raios em [{radii[-1]:.4g}, {radii[0]:.4g}]")
        return cls(grid.points[nodes], radii)

    @classmethod
    def from_settings(cls, grid: Grid, config: Dict[str, Any], r_min: Optional[float] = None) -> "BallFamily":
        """Família geométrica com razão e raio mínimo da seção 'spaces' do config.json."""
        ratio = float(get_setting(config, 'spaces.ball_ratio', DEFAULT_BALL_RATIO))
        if r_min is None:
            r_min = float(get_setting(config, 'spaces.min_radius_cells', MIN_RADIUS_CELLS)) * grid.h
        return cls.geometric(grid, r_min=r_min, ratio=ratio)


@dataclass(frozen=True)
class NormReport:
    """Resultado de uma estimativa de norma com a bola maximizante."""
    p: float
    lam: float
    value: float
    argmax_center: Tuple[float, float]
    argmax_radius: float
    grid_h: float

    def to_json(self) -> Dict[str, Any]:
        return {
            'p': self.p,
            'lambda': self.lam,
            'value': self.value,
            'argmax_center': list(self.argmax_center),
            'argmax_radius': self.argmax_radius,
            'grid_h': self.grid_h,
        }


def center_nodes(grid: Grid, centers: np.ndarray) -> np.ndarray:
    """Índices dos nós correspondentes aos centros (que devem ser nós)."""
    nodes = np.array([grid.nearest_node(c) for c in centers], dtype=np.intp)
    if nodes.size:
        offset = np.hypot(grid.x[nodes] - centers[:, 0], grid.y[nodes] - centers[:, 1])
        if np.any(offset > 1e-9 * grid.h):
            error_msg = "ball centers must be grid nodes"
            logger.error(error_msg)
            raise SpacesError(error_msg)
    return nodes


def disk_stencil(grid: Grid, radius: float) -> np.ndarray:
    """Estêncil 0/1 dos deslocamentos de rede com |z| <= radius."""
    m = int(np.floor(radius / grid.h * (1.0 + _RADIUS_TOL)))
    offsets = np.arange(-m, m + 1) * grid.h
    dx, dy = np.meshgrid(offsets, offsets)
    return ((dx * dx + dy * dy) <= radius * radius * (1.0 + _RADIUS_TOL)).astype(float)


def disk_sums(grid: Grid, masses: np.ndarray, radius: float) -> np.ndarray:
    """Σ_{|y-x|<=r} q_y para todos os nós x, por convolução com o estêncil do disco."""
    image = masses.reshape(grid.shape)
    sums = fftconvolve(image, disk_stencil(grid, radius), mode='same').ravel()
    if masses.min(initial=0.0) >= 0.0:
        sums = np.maximum(sums, 0.0)
    return sums


def ball_sup_profile(f: ScalarField, fam: BallFamily, p: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """S(r) = max_x ∫_{Ω∩B_r(x)} |f|^p para cada raio da família.

    Returns:
        (S, argmax) com S por raio e o nó central maximizante.
    """
    if fam.empty:
        error_msg = "ball family empty"
        logger.error(error_msg)
        raise SpacesError(error_msg)

    grid = f.grid
    nodes = center_nodes(grid, fam.centers)
    try:
        masses = node_masses(f.abs_pow(p))
    except GridError as e:
        raise SpacesError(f"non-finite node values: {e}") from e
    if not np.all(np.isfinite(masses)):
        error_msg = "non-finite node values outside singular handling"
        logger.error(error_msg)
        raise SpacesError(error_msg)

    sup = np.empty(fam.radii.size)
    arg = np.empty(fam.radii.size, dtype=np.intp)
    for k, r in enumerate(fam.radii):
        values = disk_sums(grid, masses, r)[nodes]
        best = int(np.argmax(values))
        sup[k] = values[best]
        arg[k] = nodes[best]
    return sup, arg


def morrey_norm(f: ScalarField, idx: MorreyIndex, fam: BallFamily) -> NormReport:
    """Estimativa discreta de ‖f‖_{L^{p,λ}(Ω)}.

    Args:
        f: Campo amostrado.
        idx: Índice de Morrey (p, λ).
        fam: Família de bolas (h <= r_min/4 recomendado).

    Returns:
        NormReport com o valor e a bola maximizante.

    Raises:
        SpacesError: Família vazia ou valores não finitos fora dos nós singulares.
    """
    grid = f.grid
    if fam.radii.size and fam.radii.min() < MIN_RADIUS_CELLS * grid.h * (1.0 - _RADIUS_TOL):
        logger.warning(f"r_min={fam.radii.min():.4g} abaixo de {MIN_RADIUS_CELLS}h; erro de discretização elevado")

    sup, arg = ball_sup_profile(f, fam, idx.p)
    scaled = fam.radii ** (-idx.lam) * sup
    k = int(np.argmax(scaled))
    value = float(scaled[k] ** (1.0 / idx.p))
    node = int(arg[k])
    report = NormReport(
        p=idx.p,
        lam=idx.lam,
        value=value,
        argmax_center=(float(grid.x[node]), float(grid.y[node])),
        argmax_radius=float(fam.radii[k]),
        grid_h=grid.h,
    )
    logger.debug(f"‖f‖_(p={idx.p}, λ={idx.lam}) = {value:.6g} em B_{report.argmax_radius:.4g}{report.argmax_center}")
    return report


def morrey_exponent(
    f: ScalarField,
    fam: BallFamily,
    p: float = 1.0,
    r_window: Optional[Tuple[float, float]] = None,
) -> PowerLawFit:
    """Expoente de Morrey medido: inclinação de log S(r) contra log r.

    Para f ∈ L^{p,λ} com o supremo atingido em bolas concêntricas,
    S(r) ~ r^λ e a inclinação estima λ.

    Args:
        f: Campo amostrado.
        fam: Família de bolas.
        p: Potência aplicada a |f|.
        r_window: Janela de raios (padrão: [4h, diam(Ω)/4]).
    """
    grid = f.grid
    lo, hi = r_window if r_window is not None else (MIN_RADIUS_CELLS * grid.h, 0.25 * grid.diameter)
    sup, _ = ball_sup_profile(f, fam, p)
    inside = (fam.radii >= lo * (1.0 - _RADIUS_TOL)) & (fam.radii <= hi * (1.0 + _RADIUS_TOL))
    return power_law_fit(fam.radii[inside], sup[inside], min_points=4)


@dataclass(frozen=True)
class EmbeddingReport:
    """Comparação ‖f‖_{p,λ} <= c‖f‖_{q,μ}."""
    norm_to: NormReport
    norm_from: NormReport
    ratio: float

    def to_json(self) -> Dict[str, Any]:
        return {
            'to': self.norm_to.to_json(),
            'from': self.norm_from.to_json(),
            'ratio': self.ratio,
        }


def check_embedding_hypothesis(from_idx: MorreyIndex, to_idx: MorreyIndex) -> None:
    """Verifica p <= q e (n-μ)/q <= (n-λ)/p para L^{q,μ} ⊆ L^{p,λ}."""
    if from_idx.n != to_idx.n:
        raise SpacesError(f"dimension mismatch: {from_idx.n} != {to_idx.n}")
    n = from_idx.n
    q, mu = from_idx.p, from_idx.lam
    p, lam = to_idx.p, to_idx.lam
    if p > q:
        error_msg = f"embedding hypothesis violated: p={p} > q={q}"
        logger.error(error_msg)
        raise HypothesisError(error_msg)
    if (n - mu) / q > (n - lam) / p + 1e-12:
        error_msg = (
            f"embedding hypothesis violated: (n−μ)/q = {(n - mu) / q:.6g} > "
            f"(n−λ)/p = {(n - lam) / p:.6g}"
        )
        logger.error(error_msg)
        raise HypothesisError(error_msg)


def check_embedding(f: ScalarField, from_idx: MorreyIndex, to_idx: MorreyIndex, fam: BallFamily) -> EmbeddingReport:
    """Mede a razão ‖f‖_{L^{p,λ}} / ‖f‖_{L^{q,μ}} da inclusão L^{q,μ} ⊆ L^{p,λ}.

    Args:
        f: Campo amostrado.
        from_idx: Índice (q, μ) do espaço menor.
        to_idx: Índice (p, λ) do espaço maior.
        fam: Família de bolas comum às duas normas.

    Raises:
        HypothesisError: "embedding hypothesis violated".
    """
    check_embedding_hypothesis(from_idx, to_idx)
    norm_to = morrey_norm(f, to_idx, fam)
    norm_from = morrey_norm(f, from_idx, fam)
    if norm_from.value > 0.0:
        ratio = norm_to.value / norm_from.value
    else:
        ratio = 0.0
    return EmbeddingReport(norm_to, norm_from, ratio)


def embedding_refinement_study(
    formula,
    from_idx: MorreyIndex,
    to_idx: MorreyIndex,
    hs: Sequence[float],
    domain_kind: str = "disk",
    singular_point: Optional[Sequence[float]] = None,
    r_min: Optional[float] = None,
    ratio: float = DEFAULT_BALL_RATIO,
) -> pd.DataFrame:
    """Razão da inclusão em malhas sucessivas, com a deriva relativa.

    A família usa o mesmo r_min em todas as malhas (padrão: 4h da malha
    mais grossa), para que só a discretização mude.

    Returns:
        DataFrame com colunas h, norm_to, norm_from, ratio, drift.
    """
    check_embedding_hypothesis(from_idx, to_idx)
    r_min = MIN_RADIUS_CELLS * max(hs) if r_min is None else r_min
    rows = []
    for h in hs:
        grid = Grid(domain_kind, h)
        f = ScalarField.from_formula(grid, formula, singular_point)
        report = check_embedding(f, from_idx, to_idx, BallFamily.geometric(grid, r_min=r_min, ratio=ratio))
        rows.append({
            'h': grid.h,
            'norm_to': report.norm_to.value,
            'norm_from': report.norm_from.value,
            'ratio': report.ratio,
        })
    table = pd.DataFrame(rows, columns=['h', 'norm_to', 'norm_from', 'ratio'])
    ratios = table['ratio'].to_numpy()
    drift = np.full(len(table), np.nan)
    prev, cur = ratios[:-1], ratios[1:]
    with np.errstate(divide='ignore', invalid='ignore'):
        # dado nulo nas duas malhas: razão estável
        drift[1:] = np.where(prev > 0.0, np.abs(cur / prev - 1.0), np.where(cur > 0.0, np.inf, 0.0))
    table['drift'] = drift
    return table
