"""
Tabela de nós em CSV (depuração de malhas e campos).

Colunas, nesta ordem: x, y, flag, value (campo escalar) ou
x, y, flag, gx, gy (campo vetorial).
"""

import logging
import os
from typing import Union

import numpy as np
import pandas as pd

from .lattice import Grid, GridError, ScalarField, VectorField

logger = logging.getLogger(__name__)

SCALAR_COLUMNS = ['x', 'y', 'flag', 'value']
VECTOR_COLUMNS = ['x', 'y', 'flag', 'gx', 'gy']


def node_table(field: Union[ScalarField, VectorField]) -> pd.DataFrame:
    """Monta a tabela de nós de um campo."""
    grid = field.grid
    table = pd.DataFrame({'x': grid.x, 'y': grid.y, 'flag': grid.mask.astype(int)})
    if isinstance(field, VectorField):
        table['gx'] = field.values[:, 0]
        table['gy'] = field.values[:, 1]
    else:
        table['value'] = field.values
    return table


def write_node_table(field: Union[ScalarField, VectorField], path: str) -> str:
    """Grava a tabela de nós em CSV.

    Args:
        field: Campo escalar ou vetorial.
        path: Caminho do arquivo CSV.

    Returns:
        O caminho gravado.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    node_table(field).to_csv(path, index=False, float_format='%.17g')
    logger.debug(f"Tabela de nós gravada em {path}")
    return path


def read_node_table(grid: Grid, path: str) -> ScalarField:
    """Lê um campo escalar gravado por write_node_table.

    Args:
        grid: Malha em que o campo foi amostrado.
        path: Caminho do CSV.

    Returns:
        ScalarField com os valores da coluna 'value'.

    Raises:
        GridError: Se colunas, número de nós ou coordenadas não baterem com a malha.
    """
    table = pd.read_csv(path)
    if list(table.columns) != SCALAR_COLUMNS:
        error_msg = f"unexpected node table columns {list(table.columns)} (expected {SCALAR_COLUMNS})"
        logger.error(error_msg)
        raise GridError(error_msg)
    if len(table) != grid.node_count:
        error_msg = f"grid mismatch: table has {len(table)} nodes, grid has {grid.node_count}"
        logger.error(error_msg)
        raise GridError(error_msg)
    if not (np.allclose(table['x'].to_numpy(), grid.x) and np.allclose(table['y'].to_numpy(), grid.y)):
        error_msg = "grid mismatch: table coordinates differ from the grid"
        logger.error(error_msg)
        raise GridError(error_msg)
    return ScalarField(grid, table['value'].to_numpy(dtype=float))
