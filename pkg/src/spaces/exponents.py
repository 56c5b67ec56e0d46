"""
Expoente de regularidade previsto α(p, λ, n, γ) para soluções de
-Δ_p u = f com f ∈ L^{1,λ}: u ∈ C^{1,α}_loc.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

from ..utils.exceptions import HypothesisError

logger = logging.getLogger(__name__)


class Branch(Enum):
    """Ramo da fórmula de α."""
    DEGENERATE = "degenerate"  # p >= 2
    SINGULAR = "singular"      # p < 2


@dataclass(frozen=True)
class ExponentPrediction:
    """α previsto e o ramo usado."""
    alpha: float
    branch: Branch
    gamma_cap: float
    p: float
    lam: float
    n: int
    rate: float

    def to_json(self) -> Dict[str, Any]:
        return {
            'alpha': self.alpha,
            'branch': self.branch.value,
            'gamma_cap': self.gamma_cap,
            'p': self.p,
            'lambda': self.lam,
            'n': self.n,
            'rate': self.rate,
        }

    def __str__(self) -> str:
        return (
            f"alpha={self.alpha:.6g}, branch={self.branch.value} "
            f"(rate={self.rate:.6g}, gamma={self.gamma_cap:g}, p={self.p:g}, lambda={self.lam:g}, n={self.n})"
        )


def degenerate_rate(p: float, lam: float, n: int) -> float:
    """(λ+1-n)/(p-1)."""
    return ((lam + 1.0) - n) / (p - 1.0)


def singular_rate(p: float, lam: float, n: int) -> float:
    """λ+1-2n/p."""
    return (lam + 1.0) - 2.0 * n / p


def _fail(message: str) -> None:
    logger.error(message)
    raise HypothesisError(message)


def check_hypotheses(p: float, lam: float, n: int, gamma: float) -> None:
    """Verifica n-1 < λ < n, 2n/(λ+1) < p <= n e γ ∈ (0, 1).

    Raises:
        HypothesisError: Com a desigualdade violada no início da mensagem.
    """
    if n < 2:
        _fail(f"n < 2 (n={n})")
    if lam <= n - 1:
        _fail(f"λ ≤ n−1: λ={lam:g}, n−1={n - 1}")
    if lam >= n:
        _fail(f"λ ≥ n: λ={lam:g}, n={n}")
    if p <= 1.0:
        _fail(f"p ≤ 1: p={p:g}")
    if p > n:
        _fail(f"p > n: p={p:g}, n={n}")
    if p <= 2.0 * n / (lam + 1.0):
        _fail(f"p ≤ 2n/(λ+1): p={p:g}, 2n/(λ+1)={2.0 * n / (lam + 1.0):.6g}")
    if not (0.0 < gamma < 1.0):
        _fail(f"γ ∉ (0,1): γ={gamma:g}")


def predicted_alpha(p: float, lam: float, n: int = 2, gamma: float = 0.9) -> ExponentPrediction:
    """Expoente α do teorema de regularidade C^{1,α}.

    Ramo degenerado (p >= 2): min(γ, (λ+1-n)/(p-1)).
    Ramo singular (p < 2): min(γ, λ+1-2n/p). Os dois coincidem em p = 2.

    Args:
        p: Expoente do p-Laplaciano.
        lam: Expoente de Morrey de f ∈ L^{1,λ}.
        n: Dimensão.
        gamma: Expoente de Hölder do gradiente das soluções p-harmônicas.

    Returns:
        ExponentPrediction.

    Raises:
        HypothesisError: Hipóteses do teorema violadas.
    """
    check_hypotheses(p, lam, n, gamma)
    if p >= 2.0:
        branch = Branch.DEGENERATE
        rate = degenerate_rate(p, lam, n)
    else:
        branch = Branch.SINGULAR
        rate = singular_rate(p, lam, n)
    prediction = ExponentPrediction(
        alpha=min(gamma, rate),
        branch=branch,
        gamma_cap=gamma,
        p=p,
        lam=lam,
        n=n,
        rate=rate,
    )
    logger.debug(f"Previsão: {prediction}")
    return prediction
