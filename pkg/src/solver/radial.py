"""
Oráculo radial para -Δ_p u = c·|x|^{-s} na bola unitária com u(1) = 0.

Integrando uma vez o operador radial -r^{1-n}(r^{n-1}|u'|^{p-2}u')' obtém-se
u'(r) = -K r^β, com K = (c/(n-s))^{1/(p-1)} e β = (1-s)/(p-1), e
u(r) = K(1 - r^{β+1})/(β+1).
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import sympy as sp
from scipy.integrate import quad

from ..grid import Grid, ScalarField, VectorField
from .p_poisson import SolverError

logger = logging.getLogger(__name__)

# Raio mínimo das verificações pontuais
CHECK_RADIUS = 0.05

# Tolerância da substituição no operador radial
SUBSTITUTION_TOL = 1e-10


def radial_operator_residual(du_expr, source_expr, r: sp.Symbol, p: float, n: int, samples: int = 100) -> float:
    """Erro relativo máximo de -r^{1-n}(r^{n-1}|u'|^{p-2}u')' contra a fonte.

    u' deve ter sinal constante em (0, 1]; |u'|^{p-2}u' é escrito como
    sign·|u'|^{p-1} para manter a expressão diferenciável.

    Args:
        du_expr: Expressão sympy de u'(r).
        source_expr: Expressão sympy de f(r).
        r: Símbolo radial (positivo).
        p: Expoente.
        n: Dimensão.
        samples: Número de raios em [0.05, 1].
    """
    radii = np.linspace(CHECK_RADIUS, 1.0, samples)
    du_values = sp.lambdify(r, du_expr, 'numpy')(radii)
    sign = float(np.sign(np.mean(du_values)))
    flux = sign * (sign * du_expr) ** (p - 1)
    operator = -r ** (1 - n) * sp.diff(r ** (n - 1) * flux, r)
    residual = sp.lambdify(r, operator - source_expr, 'numpy')
    source = sp.lambdify(r, source_expr, 'numpy')
    scale = np.maximum(np.abs(np.broadcast_to(source(radii), radii.shape)), 1.0)
    return float(np.max(np.abs(np.broadcast_to(residual(radii), radii.shape)) / scale))


@dataclass(frozen=True)
class RadialProfile:
    """Perfil radial exato (u, u') para a fonte c·r^{-s}."""
    s: float
    c: float
    p: float
    n: int

    @property
    def K(self) -> float:
        return (self.c / (self.n - self.s)) ** (1.0 / (self.p - 1.0))

    @property
    def beta(self) -> float:
        return (1.0 - self.s) / (self.p - 1.0)

    @property
    def lam(self) -> float:
        """Expoente de Morrey da fonte em L^{1,λ}: λ = n - s."""
        return self.n - self.s

    @property
    def gradient_holder(self) -> float:
        """Expoente de Hölder exato de u' em r = 0 (β, limitado a 1)."""
        return min(1.0, self.beta)

    def u(self, r):
        r = np.asarray(r, dtype=float)
        b1 = self.beta + 1.0
        return self.K * (1.0 - r ** b1) / b1

    def du(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide='ignore'):
            return -self.K * r ** self.beta

    def source(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide='ignore'):
            return self.c * r ** (-self.s)

    def verify(self, samples: int = 100, tol: float = SUBSTITUTION_TOL) -> Dict[str, float]:
        """Autoverificação: substituição simbólica e integral de u'.

        Returns:
            {'operator_error', 'integral_error'}.

        Raises:
            SolverError: Se algum erro exceder tol.
        """
        r = sp.Symbol('r', positive=True)
        du_expr = -sp.Float(self.K) * r ** sp.Float(self.beta)
        source_expr = sp.Float(self.c) * r ** sp.Float(-self.s)
        operator_error = radial_operator_residual(du_expr, source_expr, r, self.p, self.n, samples)

        integral_error = 0.0
        for radius in np.linspace(CHECK_RADIUS, 1.0, 10):
            value, _ = quad(lambda t: -float(self.du(t)), radius, 1.0, epsabs=1e-13, epsrel=1e-13)
            expected = float(self.u(radius))
            integral_error = max(integral_error, abs(value - expected) / max(abs(expected), 1.0))

        report = {'operator_error': operator_error, 'integral_error': integral_error}
        if operator_error > tol or integral_error > tol:
            error_msg = f"radial oracle self-check failed: {report}"
            logger.error(error_msg)
            raise SolverError(error_msg)
        return report

    # ------------------------------------------------------------------
    # Amostragem na malha
    # ------------------------------------------------------------------

    def sample(self, grid: Grid) -> ScalarField:
        return ScalarField.from_formula(grid, lambda x, y: self.u(np.hypot(x, y)))

    def sample_gradient(self, grid: Grid) -> VectorField:
        def formula(x, y):
            r = np.hypot(x, y)
            with np.errstate(divide='ignore', invalid='ignore'):
                scale = np.where(r > 0.0, self.du(r) / r, 0.0)
            return scale * x, scale * y
        return VectorField.from_formula(grid, formula)

    def source_field(self, grid: Grid) -> ScalarField:
        singular = (0.0, 0.0) if self.s > 0.0 else None
        return ScalarField.from_formula(grid, lambda x, y: self.source(np.hypot(x, y)), singular)


def radial_oracle(s: float, c: Optional[float] = None, p: float = 2.0, n: int = 2) -> RadialProfile:
    """Perfil radial exato para -Δ_p u = c|x|^{-s} em B_1 com u = 0 em ∂B_1.

    Args:
        s: Expoente da singularidade (0 <= s < min(2, n), s < p).
        c: Amplitude (> 0). Se None, escolhida de modo que u(0) = 1.
        p: Expoente (1 < p <= n).
        n: Dimensão.

    Raises:
        SolverError: Parâmetros fora do domínio.
    """
    problems = []
    if not (0.0 <= s < min(2.0, n)):
        problems.append(f"s must lie in [0, min(2, n)) (s={s})")
    if not p > 1.0:
        problems.append(f"p must be > 1 (p={p})")
    if p > n:
        problems.append(f"p > n (p={p}, n={n})")
    if s >= p:
        problems.append(f"s must be < p for a finite profile (s={s}, p={p})")
    if c is not None and not c > 0.0:
        problems.append(f"c must be > 0 (c={c})")
    if problems:
        error_msg = "; ".join(problems)
        logger.error(error_msg)
        raise SolverError(error_msg)

    if c is None:
        # u(0) = K/(β+1) = 1
        beta = (1.0 - s) / (p - 1.0)
        c = (n - s) * (beta + 1.0) ** (p - 1.0)
    return RadialProfile(float(s), float(c), float(p), int(n))
