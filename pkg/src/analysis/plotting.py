"""
Gráficos log-log dos perfis de excesso e dos estudos de refinamento.
"""

import logging
import os
from typing import Optional

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .campanato import ExcessProfile, ExponentFit  # noqa: E402

logger = logging.getLogger(__name__)

PLOT_PARAMS = {
    'axes.labelsize': 10,
    'font.size': 9,
    'legend.fontsize': 8,
    'lines.markersize': 4,
    'lines.linewidth': 1.2,
    'figure.figsize': (4.8, 3.4),
    'figure.dpi': 150,
}


def plot_profile(profile: ExcessProfile, fit: Optional[ExponentFit], path: str) -> str:
    """Grava um PNG com o perfil E(r) e a reta ajustada.

    Args:
        profile: Perfil de excesso.
        fit: Ajuste (opcional) desenhado sobre a janela.
        path: Caminho do PNG.

    Returns:
        O caminho gravado.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with plt.rc_context(PLOT_PARAMS):
        fig, ax = plt.subplots()
        positive = profile.excess > 0.0
        ax.loglog(profile.radii[positive], profile.excess[positive], 'o', label='excesso')
        if fit is not None:
            r = np.geomspace(fit.r_window[0], fit.r_window[1], 20)
            ax.loglog(r, np.exp(fit.intercept) * r ** fit.slope, '-',
                      label=f'inclinação {fit.slope:.3f} (α̂={fit.alpha_hat:.3f})')
        ax.set_xlabel('r')
        ax.set_ylabel(f'E(r), p={profile.p:g}')
        ax.legend()
        ax.grid(True, which='both', alpha=0.3)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    logger.debug(f"Gráfico gravado em {path}")
    return path


def plot_refinement(table: pd.DataFrame, path: str, column: str = 'error') -> str:
    """PNG log-log de uma coluna de erro contra h."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with plt.rc_context(PLOT_PARAMS):
        fig, ax = plt.subplots()
        ax.loglog(table['h'], table[column], 'o-')
        ax.set_xlabel('h')
        ax.set_ylabel(column)
        ax.grid(True, which='both', alpha=0.3)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
