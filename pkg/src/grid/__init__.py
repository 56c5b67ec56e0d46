"""
Módulo de malha: discretização do domínio, campos amostrados, cálculo
discreto e quadratura com refinamento polar em nós singulares.
"""

from .lattice import (
    Ball,
    DomainKind,
    Grid,
    GridError,
    NodeFlag,
    ScalarField,
    TriangleMesh,
    VectorField,
    gradient,
)
from .quadrature import (
    ball_average,
    ball_integrals,
    integrate,
    node_masses,
    polar_cell_integral,
    quadrature_refinement_study,
    region_measure,
    region_nodes,
    singular_cell_integral,
)
from .node_table import node_table, read_node_table, write_node_table

__all__ = [
    'Ball',
    'DomainKind',
    'Grid',
    'GridError',
    'NodeFlag',
    'ScalarField',
    'TriangleMesh',
    'VectorField',
    'gradient',
    'ball_average',
    'ball_integrals',
    'integrate',
    'node_masses',
    'polar_cell_integral',
    'quadrature_refinement_study',
    'region_measure',
    'region_nodes',
    'singular_cell_integral',
    'node_table',
    'read_node_table',
    'write_node_table',
]
