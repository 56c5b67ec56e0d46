"""
Famílias de problemas de referência com índices de Morrey conhecidos.

- Radial: f = c|x|^{-s} na bola unitária, solução exata pelo oráculo
  radial; λ = n - s e o gradiente é C^{0,α} com α = min(1, (1-s)/(p-1)).
- Serrin: u = ±|x|^γ, que resolve -Δ_p u = f com
  f = γ^{p-1}[(γ-1)(p-1)-1+n]|x|^{(γ-1)(p-1)-1}; aqui λ <= n-1 e u não
  é C¹ quando γ < 1.
- Afim: f ≡ 0 com dados de fronteira afins; a solução exata é o próprio
  campo afim, para qualquer p.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import sympy as sp

from ..grid import Grid, ScalarField, VectorField
from ..solver import RadialProfile, radial_operator_residual, radial_oracle
from ..solver.radial import CHECK_RADIUS
from ..spaces import predicted_alpha
from ..utils.exceptions import HypothesisError, MorreyLabError

logger = logging.getLogger(__name__)

# Marcador do expoente de Hölder de gradientes descontínuos
NOT_C1 = "not C¹"

# Tolerância da autoverificação simbólica dos casos
SELF_CHECK_TOL = 1e-8


class BenchmarkError(MorreyLabError):
    """Exceção para casos de referência inválidos."""
    pass


class SignConvention(Enum):
    """Convenção de sinal das funções de Serrin."""
    NEGATE_U = 'negate_u'  # u = -|x|^γ com f positiva
    NEGATE_F = 'negate_f'  # u = |x|^γ com -f

    @classmethod
    def parse(cls, value: Union[str, "SignConvention"]) -> "SignConvention":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise BenchmarkError(f"unknown sign convention '{value}' (use negate_u or negate_f)")


@dataclass(frozen=True, eq=False)
class BenchmarkCase:
    """Dado, solução exata e expoentes analíticos de um caso."""
    id: str
    family: str
    p: float
    n: int
    lambda_true: float
    alpha_true: Union[float, str]
    params: Dict[str, Any] = field(default_factory=dict)
    domain_kind: str = 'disk'
    oracle: Optional[RadialProfile] = None
    u_holder: Optional[float] = None
    alpha_pred: Optional[float] = None
    note: str = ""

    def __post_init__(self):
        if not (0.0 < self.lambda_true <= self.n):
            raise BenchmarkError(f"lambda_true={self.lambda_true} outside (0, n]")
        if isinstance(self.alpha_true, float) and not (0.0 < self.alpha_true <= 1.0):
            raise BenchmarkError(f"alpha_true={self.alpha_true} outside (0, 1]")

    # ------------------------------------------------------------------
    # Perfis radiais
    # ------------------------------------------------------------------

    def u(self, r):
        if self.oracle is not None:
            return self.oracle.u(r)
        r = np.asarray(r, dtype=float)
        return self._sign_u * r ** self.params['gamma']

    def du(self, r):
        if self.oracle is not None:
            return self.oracle.du(r)
        r = np.asarray(r, dtype=float)
        gamma = self.params['gamma']
        with np.errstate(divide='ignore'):
            return self._sign_u * gamma * r ** (gamma - 1.0)

    def source(self, r):
        if self.oracle is not None:
            return self.oracle.source(r)
        r = np.asarray(r, dtype=float)
        if self.family == 'affine':
            return np.zeros_like(r)
        with np.errstate(divide='ignore'):
            return self._sign_f * self.params['amplitude'] * r ** self.params['exponent']

    @property
    def _sign_u(self) -> float:
        return -1.0 if self.params.get('sign') == SignConvention.NEGATE_U.value else 1.0

    @property
    def _sign_f(self) -> float:
        return -1.0 if self.params.get('sign') == SignConvention.NEGATE_F.value else 1.0

    @property
    def singular(self) -> bool:
        """Fonte ilimitada na origem."""
        if self.family == 'affine':
            return False
        if self.family == 'radial':
            return self.params['s'] > 0.0
        return self.params['exponent'] < 0.0

    @property
    def holder_of_u(self) -> float:
        """Expoente de Hölder de u (γ para Serrin, 1 para os radiais)."""
        return self.u_holder if self.u_holder is not None else 1.0

    # ------------------------------------------------------------------
    # Amostragem na malha
    # ------------------------------------------------------------------

    def _require_planar(self, grid: Grid) -> None:
        if grid.n != self.n:
            raise BenchmarkError(f"case {self.id} has n={self.n}; grid has n={grid.n} (use the oracle path)")

    def _affine_values(self, x, y):
        a, b = self.params['slope']
        return a * np.asarray(x, dtype=float) + b * np.asarray(y, dtype=float) + self.params['offset']

    def source_field(self, grid: Grid) -> ScalarField:
        self._require_planar(grid)
        if self.family == 'affine':
            return ScalarField.zeros(grid)
        singular = (0.0, 0.0) if self.singular else None
        return ScalarField.from_formula(grid, lambda x, y: self.source(np.hypot(x, y)), singular)

    def exact_field(self, grid: Grid) -> ScalarField:
        self._require_planar(grid)
        if self.family == 'affine':
            return ScalarField.from_formula(grid, self._affine_values)
        return ScalarField.from_formula(grid, lambda x, y: self.u(np.hypot(x, y)))

    def exact_gradient(self, grid: Grid) -> VectorField:
        self._require_planar(grid)
        if self.family == 'affine':
            a, b = self.params['slope']
            return VectorField.from_formula(grid, lambda x, y: (np.full(np.shape(x), a), np.full(np.shape(x), b)))

        def formula(x, y):
            r = np.hypot(x, y)
            with np.errstate(divide='ignore', invalid='ignore'):
                scale = np.where(r > 0.0, self.du(r) / r, 0.0)
            return scale * x, scale * y
        return VectorField.from_formula(grid, formula)

    def boundary_field(self, grid: Grid) -> ScalarField:
        """Dados de Dirichlet: valores nodais da solução exata."""
        return self.exact_field(grid)

    def to_json(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'family': self.family,
            'p': self.p,
            'n': self.n,
            'domain': self.domain_kind,
            'params': dict(self.params),
            'lambda_true': self.lambda_true,
            'alpha_true': self.alpha_true,
            'u_holder': self.u_holder,
            'alpha_pred': self.alpha_pred,
            'note': self.note,
        }


def _prediction(p: float, lam: float, n: int, gamma: float) -> Optional[float]:
    try:
        return predicted_alpha(p, lam, n, gamma).alpha
    except HypothesisError as e:
        logger.debug(f"Sem previsão para p={p}, λ={lam}, n={n}: {e}")
        return None


def radial_case(s: float, c: Optional[float] = None, p: float = 2.0, n: int = 2, gamma: float = 0.9) -> BenchmarkCase:
    """Caso radial f = c|x|^{-s} com solução exata.

    Args:
        s: Expoente da singularidade (0 <= s < 1).
        c: Amplitude (padrão: u(0) = 1).
        p: Expoente (1 < p <= n).
        n: Dimensão.
        gamma: Teto γ da previsão.

    Raises:
        BenchmarkError: "data leaves the admissible Morrey range" para s >= 1.
    """
    if s >= 1.0 or s < 0.0:
        error_msg = f"data leaves the admissible Morrey range: s={s} (λ = n-s must lie in (n-1, n])"
        logger.error(error_msg)
        raise BenchmarkError(error_msg)
    try:
        oracle = radial_oracle(s, c, p, n)
        oracle.verify()
    except MorreyLabError as e:
        raise BenchmarkError(f"radial case self-check failed: {e}") from e

    lam = n - s
    alpha_true = min(1.0, (1.0 - s) / (p - 1.0))
    case = BenchmarkCase(
        id=f"radial-s{s:g}-p{p:g}-n{n}",
        family='radial',
        p=float(p),
        n=int(n),
        lambda_true=float(lam),
        alpha_true=float(alpha_true),
        params={'s': float(s), 'c': oracle.c},
        oracle=oracle,
        alpha_pred=_prediction(p, lam, n, gamma),
    )
    logger.debug(f"Caso {case.id}: λ={lam:g}, α={alpha_true:.6g}")
    return case


def serrin_case(
    gamma: float,
    p: float = 2.0,
    n: int = 2,
    sign_convention: Union[str, SignConvention] = SignConvention.NEGATE_U,
) -> BenchmarkCase:
    """Função de Serrin u = ±|x|^γ com a fonte correspondente.

    A construção substitui u no operador radial (sympy) e exige
    concordância com f a 1e-8 em r >= 0.05.

    Raises:
        BenchmarkError: γ fora de (0, 1], f não integrável perto da origem
            ou falha da autoverificação.
    """
    convention = SignConvention.parse(sign_convention)
    if not (0.0 < gamma <= 1.0):
        error_msg = f"gamma must lie in (0, 1] (γ={gamma})"
        logger.error(error_msg)
        raise BenchmarkError(error_msg)
    if not p > 1.0 or p > n:
        raise BenchmarkError(f"p must lie in (1, n] (p={p}, n={n})")

    exponent = (gamma - 1.0) * (p - 1.0) - 1.0
    if exponent <= -n:
        error_msg = f"data leaves the admissible Morrey range: f ~ |x|^{exponent:g} is not integrable (exponent <= -n)"
        logger.error(error_msg)
        raise BenchmarkError(error_msg)
    lam = exponent + n
    amplitude = gamma ** (p - 1.0) * lam

    r = sp.Symbol('r', positive=True)
    sign_u = -1 if convention is SignConvention.NEGATE_U else 1
    sign_f = -1 if convention is SignConvention.NEGATE_F else 1
    u_expr = sign_u * r ** sp.nsimplify(gamma)
    f_expr = sign_f * sp.Float(amplitude) * r ** sp.Float(exponent)
    residual = radial_operator_residual(sp.diff(u_expr, r), f_expr, r, p, n)
    if not residual <= SELF_CHECK_TOL:
        error_msg = f"serrin case self-check failed: residual {residual:.3e} > {SELF_CHECK_TOL:g}"
        logger.error(error_msg)
        raise BenchmarkError(error_msg)

    # λ <= n-1 para todo γ <= 1
    note = f"{NOT_C1}, λ={lam:g} ≤ n−1"
    case = BenchmarkCase(
        id=f"serrin-g{gamma:g}-p{p:g}-n{n}",
        family='serrin',
        p=float(p),
        n=int(n),
        lambda_true=float(lam),
        alpha_true=NOT_C1,
        params={'gamma': float(gamma), 'exponent': float(exponent), 'amplitude': float(amplitude), 'sign': convention.value},
        u_holder=float(gamma),
        note=note,
    )
    logger.debug(f"Caso {case.id}: λ={lam:g}, resíduo simbólico {residual:.2e} (r >= {CHECK_RADIUS})")
    return case


def affine_case(
    slope: Sequence[float] = (1.0, 0.5),
    offset: float = 0.0,
    p: float = 2.0,
    n: int = 2,
) -> BenchmarkCase:
    """Caso f ≡ 0 com dados afins; u(x) = a·x + b é a solução exata.

    f ≡ 0 pertence a todo L^{1,λ}; o caso registra λ = n e gradiente
    constante (α = 1).
    """
    if n != 2:
        raise BenchmarkError(f"affine case runs only on planar grids (n={n})")
    if not p > 1.0 or p > n:
        raise BenchmarkError(f"p must lie in (1, n] (p={p}, n={n})")
    a, b = (float(v) for v in slope)
    case = BenchmarkCase(
        id=f"affine-a{a:g}-b{b:g}-p{p:g}-n{n}",
        family='affine',
        p=float(p),
        n=int(n),
        lambda_true=float(n),
        alpha_true=1.0,
        params={'slope': (a, b), 'offset': float(offset)},
        u_holder=1.0,
        note="f ≡ 0",
    )
    logger.debug(f"Caso {case.id}: Du = ({a:g}, {b:g})")
    return case


def case_matrix(
    ps: Iterable[float] = (),
    ss: Iterable[float] = (),
    n: int = 2,
    gammas: Iterable[float] = (),
    gamma_cap: float = 0.9,
) -> List[BenchmarkCase]:
    """Produto cartesiano p × s (casos radiais) e p × γ (casos de Serrin).

    Combinações inadmissíveis são puladas com o motivo registrado no log.
    """
    ps = list(ps)
    cases: List[BenchmarkCase] = []
    for p in ps:
        if p > n:
            logger.warning(f"Pulando p={p:g}: p > n={n}")
            continue
        for s in ss:
            try:
                cases.append(radial_case(s, None, p, n, gamma_cap))
            except MorreyLabError as e:
                logger.warning(f"Pulando caso radial s={s:g}, p={p:g}: {e}")
        for gamma in gammas:
            try:
                cases.append(serrin_case(gamma, p, n))
            except MorreyLabError as e:
                logger.warning(f"Pulando caso de Serrin γ={gamma:g}, p={p:g}: {e}")
    logger.info(f"Matriz de casos: {len(cases)} caso(s) admissível(is)")
    return cases


def default_matrix(n: int = 2) -> List[BenchmarkCase]:
    """Matriz padrão: p = 2 com s ∈ {0.2, 0.5, 0.8}, p = 1.8 com s = 0.5 e Serrin γ = 0.75."""
    cases = case_matrix([2.0], [0.2, 0.5, 0.8], n)
    cases += case_matrix([1.8], [0.5], n)
    cases += case_matrix([2.0], [], n, gammas=[0.75])
    return cases


def parse_case(spec: str, p: float = 2.0, n: int = 2, gamma_cap: float = 0.9) -> BenchmarkCase:
    """Interpreta 'radial-0.5', 'serrin-0.75' ou 'affine-1' (com p e n dados à parte).

    'affine-<a>' é o caso f ≡ 0 com u = a·x₁ + a·x₂/2; 'zero' equivale a 'affine-1'.
    """
    if str(spec) == 'zero':
        spec = 'affine-1'
    family, _, value = str(spec).partition('-')
    try:
        number = float(value)
    except ValueError:
        raise BenchmarkError(f"invalid case spec '{spec}' (use radial-<s>, serrin-<γ> or affine-<a>)")
    if family == 'radial':
        return radial_case(number, None, p, n, gamma_cap)
    if family == 'serrin':
        return serrin_case(number, p, n)
    if family == 'affine':
        return affine_case((number, 0.5 * number), 0.0, p, n)
    raise BenchmarkError(f"invalid case spec '{spec}' (use radial-<s>, serrin-<γ> or affine-<a>)")
