"""
Resíduo fraco e famílias de funções teste.

O resíduo de u contra φ é |∫|Du|^{p-2}Du·Dφ - ∫fφ| / ‖φ‖_{W^{1,p}}, com as
integrais avaliadas nos triângulos P1 da rede e nas massas nodais de f.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..grid import Ball, Grid, ScalarField, node_masses
from .p_poisson import SolverError

logger = logging.getLogger(__name__)

TEST_KINDS = ('tent', 'bump')


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Função teste com suporte compacto numa bola."""
    __test__ = False  # não é uma classe de teste do pytest

    id: int
    kind: str
    ball: Ball
    field: ScalarField


@dataclass(frozen=True)
class WeakResidual:
    value: float
    test_family_size: int
    worst_id: int = -1


def profile_values(grid: Grid, center: Sequence[float], support: float, kind: str) -> np.ndarray:
    """Valores nodais de uma tenda (1-ρ)₊ ou bolha (1-ρ²)₊², ρ = |x-c|/support."""
    rho = np.hypot(grid.x - center[0], grid.y - center[1]) / support
    if kind == 'tent':
        values = np.clip(1.0 - rho, 0.0, None)
    elif kind == 'bump':
        values = np.clip(1.0 - rho * rho, 0.0, None) ** 2
    else:
        raise SolverError(f"unknown test function kind '{kind}' (use tent or bump)")
    return np.where(grid.in_domain, values, 0.0)


def make_test_function(grid: Grid, ball: Ball, kind: str = 'tent', test_id: int = 0) -> TestFunction:
    """Tenda ou bolha com raio de suporte r - h, centrada na bola."""
    support = ball.radius - grid.h
    if support <= grid.h:
        raise SolverError(f"ball too small for a test function: r={ball.radius:.4g}")
    values = profile_values(grid, ball.center, support, kind)
    return TestFunction(test_id, kind, ball, ScalarField(grid, values))


def support_inside(phi: ScalarField, ball: Ball) -> bool:
    """φ ≠ 0 apenas em nós com |x - c| < r - h/2."""
    grid = phi.grid
    nonzero = np.flatnonzero(np.abs(phi.values) > 0.0)
    if nonzero.size == 0:
        return True
    d = np.hypot(grid.x[nonzero] - ball.center[0], grid.y[nonzero] - ball.center[1])
    return bool(np.all(d < ball.radius - 0.5 * grid.h))


def test_family(
    grid: Grid,
    count: int = 20,
    seed: int = 42,
    kind: str = 'mixed',
    radius_range: Optional[Tuple[float, float]] = None,
) -> List[TestFunction]:
    """Família aleatória de tendas e bolhas em bolas interiores.

    Args:
        grid: Malha.
        count: Número de funções.
        seed: Semente do gerador.
        kind: 'tent', 'bump' ou 'mixed' (alternadas).
        radius_range: Intervalo dos raios (padrão: [8h, 0.25]).

    Returns:
        Lista de TestFunction, em ordem de id.
    """
    if kind not in TEST_KINDS + ('mixed',):
        raise SolverError(f"unknown test function kind '{kind}'")
    r_lo, r_hi = radius_range if radius_range is not None else (8.0 * grid.h, 0.25)
    if r_hi < r_lo:
        raise SolverError(f"empty radius range [{r_lo}, {r_hi}]")

    rng = np.random.default_rng(seed)
    xmin, xmax, ymin, ymax = grid.extent
    family: List[TestFunction] = []
    attempts = 0
    while len(family) < count:
        attempts += 1
        if attempts > 1000 * max(count, 1):
            raise SolverError("could not place test balls inside Ω")
        r = float(np.exp(rng.uniform(np.log(r_lo), np.log(r_hi)))) if r_hi > r_lo else r_lo
        c = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
        if grid.distance_to_boundary(c) < r:
            continue
        index = len(family)
        this_kind = kind if kind != 'mixed' else TEST_KINDS[index % 2]
        family.append(make_test_function(grid, Ball(c, r), this_kind, index))
    return family


test_family.__test__ = False  # não é um teste do pytest


def flux(gx: np.ndarray, gy: np.ndarray, p: float, kappa: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """(κ² + |ξ|²)^{(p-2)/2} ξ, com fluxo nulo onde ξ = 0 e κ = 0."""
    s = kappa * kappa + gx * gx + gy * gy
    with np.errstate(divide='ignore', invalid='ignore'):
        a = np.where(s > 0.0, s ** (0.5 * (p - 2.0)), 0.0)
    return a * gx, a * gy


def weak_residual(
    u: ScalarField,
    f: ScalarField,
    p: float,
    family: Sequence[TestFunction],
    kappa: float = 0.0,
) -> WeakResidual:
    """Máximo do resíduo fraco normalizado sobre a família de testes.

    Raises:
        SolverError: Família vazia ou malhas diferentes.
    """
    if len(family) == 0:
        error_msg = "empty test family"
        logger.error(error_msg)
        raise SolverError(error_msg)
    grid = u.grid
    if f.grid != grid:
        raise SolverError("grid mismatch: u and f live on different grids")

    mesh = grid.triangles()
    values = np.where(np.isfinite(u.values), u.values, 0.0)
    fx, fy = flux(*mesh.gradient(values), p, kappa)
    masses = node_masses(f)

    worst, worst_id = 0.0, -1
    for phi in family:
        if phi.field.grid != grid:
            raise SolverError("grid mismatch: test function lives on another grid")
        px, py = mesh.gradient(phi.field.values)
        lhs = mesh.area * float(np.sum(fx * px + fy * py))
        rhs = float(masses @ phi.field.values)
        norm = (
            float(grid.node_weights @ np.abs(phi.field.values) ** p)
            + mesh.area * float(np.sum((px * px + py * py) ** (0.5 * p)))
        ) ** (1.0 / p)
        if norm == 0.0:
            continue
        value = abs(lhs - rhs) / norm
        if value > worst or worst_id < 0:
            worst, worst_id = value, phi.id
    return WeakResidual(worst, len(family), worst_id)
