"""
Módulo de banco de dados do MorreyLab.
"""

from .results_store import SCHEMA_VERSION, ResultsStore

__all__ = ['SCHEMA_VERSION', 'ResultsStore']
