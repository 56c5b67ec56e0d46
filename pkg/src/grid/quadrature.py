"""
Módulo de quadratura sobre a malha.

Regra do ponto médio nos nós (pesos h^n) e, nos nós singulares, uma regra
polar por subcélulas: a célula do nó é dividida em 8 triângulos com vértice
no nó, integrados com Gauss-Legendre no ângulo e Gauss-Legendre graduado
(r = R·τ⁴) no raio.
"""

import logging
from typing import Callable, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.special import roots_legendre

from .lattice import Ball, Grid, GridError, ScalarField, VectorField

logger = logging.getLogger(__name__)

# Número de pontos de Gauss por direção em cada subcélula polar
POLAR_ORDER = 8

# Expoente da graduação radial r = R·τ^RADIAL_GRADING
RADIAL_GRADING = 4

_OCTANTS = 8


def _polar_rule(order: int):
    """Nós e pesos da regra polar de uma célula de meia-largura unitária."""
    t, wt = roots_legendre(order)
    # [-1, 1] -> [0, 1]
    tau = 0.5 * (t + 1.0)
    wtau = 0.5 * wt

    thetas: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    step = 2.0 * np.pi / _OCTANTS
    for k in range(_OCTANTS):
        theta = k * step + 0.5 * step * (t + 1.0)
        wtheta = 0.5 * step * wt
        R = 1.0 / np.maximum(np.abs(np.cos(theta)), np.abs(np.sin(theta)))
        # r = R τ^g, dr = g R τ^{g-1} dτ; integrando f·r dr dθ
        r = np.outer(R, tau ** RADIAL_GRADING)
        jac = np.outer(R, RADIAL_GRADING * tau ** (RADIAL_GRADING - 1)) * r
        thetas.append(np.column_stack([r.ravel(), np.repeat(theta, order)]))
        weights.append((jac * np.outer(wtheta, wtau)).ravel())

    points = np.concatenate(thetas)
    return points[:, 0], points[:, 1], np.concatenate(weights)


_RULE_CACHE = {}


def _cached_rule(order: int):
    if order not in _RULE_CACHE:
        _RULE_CACHE[order] = _polar_rule(order)
    return _RULE_CACHE[order]


def singular_cell_integral(field: ScalarField, node: int, order: int = POLAR_ORDER) -> float:
    """Integral de um campo sobre a célula de um nó pela regra polar.

    A célula é o quadrado de lado h centrado no nó, recortado à caixa
    envolvente na proporção do peso do nó.

    Args:
        field: Campo com fórmula analítica (ou valor nodal finito).
        node: Índice plano do nó.
        order: Pontos de Gauss por direção.

    Returns:
        Valor aproximado da integral da célula.
    """
    grid = field.grid
    weight = float(grid.node_weights[node])
    if weight == 0.0:
        return 0.0

    if field.formula is None:
        value = float(field.values[node])
        if not np.isfinite(value):
            error_msg = f"singular node {node} has no formula and a non-finite value"
            logger.error(error_msg)
            raise GridError(error_msg)
        return weight * value

    return polar_cell_integral(grid, node, field.formula, order)


def polar_cell_integral(grid: Grid, node: int, formula, order: int = POLAR_ORDER) -> float:
    """Integral de uma fórmula f(x, y) sobre a célula de um nó pela regra polar."""
    weight = float(grid.node_weights[node])
    if weight == 0.0:
        return 0.0

    r, theta, w = _cached_rule(order)
    half = 0.5 * grid.h
    x0, y0 = grid.x[node], grid.y[node]
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.asarray(formula(x0 + half * r * np.cos(theta), y0 + half * r * np.sin(theta)), float)
    values = np.broadcast_to(values, w.shape)
    if not np.all(np.isfinite(values)):
        error_msg = f"non-finite integrand inside singular cell {node}"
        logger.error(error_msg)
        raise GridError(error_msg)

    full_cell = half * half * float(np.dot(w, values))
    return full_cell * weight / grid.h ** grid.n


def node_masses(field: ScalarField) -> np.ndarray:
    """Massas nodais q_i = w_i f_i, com a regra polar nos nós singulares.

    O resultado fica guardado no próprio campo (imutável).
    """
    cached = field.__dict__.get('_masses')
    if cached is not None:
        return cached

    grid = field.grid
    masses = np.zeros(grid.node_count)
    idx = grid.domain_indices
    masses[idx] = grid.node_weights[idx] * field.values[idx]
    for node in field.singular_nodes:
        masses[node] = singular_cell_integral(field, node)
    masses.setflags(write=False)
    object.__setattr__(field, '_masses', masses)
    return masses


def region_nodes(grid: Grid, region: Optional[Ball] = None) -> np.ndarray:
    """Nós de Ω na região (bola ou domínio inteiro); erro se vazia."""
    nodes = grid.domain_indices if region is None else grid.ball_nodes(region)
    if nodes.size == 0:
        error_msg = f"empty region: {region} does not meet Ω"
        logger.error(error_msg)
        raise GridError(error_msg)
    return nodes


def integrate(f: ScalarField, region: Optional[Ball] = None) -> float:
    """Integral de um campo escalar sobre Ω ∩ região.

    Args:
        f: Campo escalar.
        region: Bola ou None para o domínio inteiro.

    Returns:
        Soma das massas nodais da região.

    Raises:
        GridError: "empty region" quando a região não contém nós de Ω.
    """
    nodes = region_nodes(f.grid, region)
    return float(node_masses(f)[nodes].sum())


def region_measure(grid: Grid, region: Optional[Ball] = None) -> float:
    """Medida discreta |região ∩ Ω| (soma dos pesos nodais)."""
    return float(grid.node_weights[region_nodes(grid, region)].sum())


def ball_average(g: Union[ScalarField, VectorField], b: Optional[Ball]) -> Union[float, np.ndarray]:
    """Média integral de um campo escalar ou vetorial sobre b ∩ Ω.

    Args:
        g: Campo escalar ou vetorial.
        b: Bola (None = domínio inteiro).

    Returns:
        Escalar ou vetor com as médias por componente.
    """
    grid = g.grid
    nodes = region_nodes(grid, b)
    measure = float(grid.node_weights[nodes].sum())
    if isinstance(g, VectorField):
        return grid.node_weights[nodes] @ g.values[nodes] / measure
    return float(node_masses(g)[nodes].sum()) / measure


def ball_integrals(f: ScalarField, balls: Iterable[Ball]) -> np.ndarray:
    """Integrais de um mesmo campo sobre várias bolas (massas calculadas uma vez).

    Bolas vazias dão 0.
    """
    masses = node_masses(f)
    return np.array([float(masses[f.grid.ball_nodes(b)].sum()) for b in balls])


def quadrature_refinement_study(
    formula: Callable[[np.ndarray, np.ndarray], np.ndarray],
    exact: float,
    hs: Sequence[float],
    domain_kind: str = "square",
    singular_point: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """Estudo de refinamento da quadratura.

    Args:
        formula: Integrando f(x, y).
        exact: Valor exato de ∫_Ω f.
        hs: Espaçamentos, do mais grosso ao mais fino.
        domain_kind: Domínio de integração.
        singular_point: Nó singular (o mesmo para todas as malhas).

    Returns:
        DataFrame com colunas h, value, error, order.
    """
    rows = []
    for h in hs:
        grid = Grid(domain_kind, h)
        value = integrate(ScalarField.from_formula(grid, formula, singular_point))
        rows.append({'h': grid.h, 'value': value, 'error': abs(value - exact)})

    table = pd.DataFrame(rows, columns=['h', 'value', 'error'])
    errors = table['error'].to_numpy()
    steps = table['h'].to_numpy()
    order = np.full(len(table), np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        order[1:] = np.log(errors[:-1] / errors[1:]) / np.log(steps[:-1] / steps[1:])
    table['order'] = order
    logger.debug(f"Estudo de refinamento da quadratura:\n{table}")
    return table
