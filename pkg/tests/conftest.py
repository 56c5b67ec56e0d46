"""
Fixtures compartilhadas dos testes do MorreyLab.
"""

import json
import os
import sys

import numpy as np
import pytest

# Permite importar o pacote src sem instalação
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.grid import Grid, ScalarField  # noqa: E402


@pytest.fixture
def square_grid():
    """Quadrado unitário com h = 1/8."""
    return Grid('square', 1.0 / 8.0)


@pytest.fixture
def disk_grid():
    """Disco unitário com h = 1/16."""
    return Grid('disk', 1.0 / 16.0)


@pytest.fixture
def fine_disk_grid():
    """Disco unitário com h = 1/32."""
    return Grid('disk', 1.0 / 32.0)


@pytest.fixture
def radial_source(disk_grid):
    """f = |x|^{-1/2}, singular na origem (λ = 3/2)."""
    return ScalarField.from_formula(disk_grid, lambda x, y: np.hypot(x, y) ** -0.5, (0.0, 0.0))


@pytest.fixture
def config_file(tmp_path):
    """config.json isolado: saídas, banco e log dentro de tmp_path."""
    config = {
        "output": {"dir": str(tmp_path / "runs"), "plots": False},
        "database": {"path": str(tmp_path / "data" / "results.db")},
        "logging": {"level": "WARNING", "file": None},
        "parallel": {"threads": 1},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding='utf-8')
    return str(path)


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch):
    """Variáveis de ambiente do laboratório não vazam entre testes."""
    for name in ('MORREYLAB_CONFIG', 'MORREYLAB_THREADS', 'MORREYLAB_LOG_LEVEL'):
        monkeypatch.delenv(name, raising=False)
