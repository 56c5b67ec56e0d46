"""
Solver variacional para -Δ_p u = f com dados de Dirichlet.

Minimiza a energia p-Dirichlet regularizada por direções de Newton (matriz
SPD da energia κ-regularizada) com busca linear de Armijo, com κ recozido
κ_j = 2^{-j}·κ₀ e partida a quente entre os estágios.
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse.linalg import spsolve

from ..grid import Ball, Grid, ScalarField
from ..utils.config import get_setting
from ..utils.exceptions import MorreyLabError
from .energy import DEFAULT_HESSIAN_FLOOR, PEnergy, load_vector, source_scale

logger = logging.getLogger(__name__)

# Menor passo tentado pela busca linear antes de declarar estagnação
MIN_STEP = 1e-12

# Variação de energia considerada erro de arredondamento (relativa)
ROUNDOFF_ENERGY = 1e-13

# Menor raio da bola de substituição, em múltiplos de h
MIN_REPLACEMENT_CELLS = 8

HISTORY_COLUMNS = ['iter', 'energy', 'residual', 'step', 'kappa']


class SolverError(MorreyLabError):
    """Exceção para erros do solver."""
    pass


class ConvergenceError(SolverError):
    """Exceção para falta de convergência dentro de max_iter."""

    def __init__(self, message: str, last_residual: float, iterations: int):
        super().__init__(message)
        self.last_residual = last_residual
        self.iterations = iterations


@dataclass
class SolverConfig:
    """Parâmetros do solver.

    kappa=None recoze κ de kappa0 em anneal_stages estágios; um número fixa κ.
    tol=None resolve a tolerância pelo ramo de p: default_tol_p2 para p=2 e
    default_tol nos demais casos, também depois de replace(p=...).
    """
    p: float = 2.0
    kappa: Optional[float] = None
    kappa0: float = 1.0e-2
    anneal_stages: int = 6
    tol: Optional[float] = None
    max_iter: int = 200
    initial_step: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1.0e-4
    polish: bool = False
    hessian_floor: float = DEFAULT_HESSIAN_FLOOR
    default_tol: float = 1.0e-6
    default_tol_p2: float = 1.0e-8

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        problems = []
        if not self.p > 1.0:
            problems.append(f"p must be > 1 (p={self.p})")
        if self.tol is not None and not self.tol > 0.0:
            problems.append(f"tol must be > 0 (tol={self.tol})")
        if not (self.default_tol > 0.0 and self.default_tol_p2 > 0.0):
            problems.append(f"tol must be > 0 (default_tol={self.default_tol}, default_tol_p2={self.default_tol_p2})")
        if self.kappa is not None and not (0.0 <= self.kappa <= 1.0):
            problems.append(f"kappa must lie in [0, 1] (kappa={self.kappa})")
        if self.kappa is not None and self.kappa == 0.0 and self.p < 2.0:
            problems.append("p < 2 requires kappa > 0 during iteration")
        if not self.kappa0 > 0.0:
            problems.append(f"kappa0 must be > 0 (kappa0={self.kappa0})")
        if self.anneal_stages < 1:
            problems.append(f"anneal_stages must be >= 1 ({self.anneal_stages})")
        if self.max_iter < 1:
            problems.append(f"max_iter must be >= 1 ({self.max_iter})")
        if not (0.0 < self.backtrack < 1.0):
            problems.append(f"backtrack must lie in (0, 1) ({self.backtrack})")
        if not (0.0 < self.armijo < 1.0):
            problems.append(f"armijo must lie in (0, 1) ({self.armijo})")
        if not self.initial_step > 0.0:
            problems.append(f"initial_step must be > 0 ({self.initial_step})")
        if problems:
            error_msg = "; ".join(problems)
            logger.error(error_msg)
            raise SolverError(error_msg)

    @property
    def tolerance(self) -> float:
        if self.tol is not None:
            return self.tol
        return self.default_tol_p2 if self.p == 2.0 else self.default_tol

    def kappa_schedule(self) -> List[float]:
        """Valores de κ dos estágios, em ordem."""
        if self.p == 2.0:
            stages = [0.0]
        elif self.kappa is not None:
            stages = [float(self.kappa)]
        else:
            stages = [self.kappa0 * 2.0 ** (-j) for j in range(self.anneal_stages)]
        if self.polish and stages[-1] != 0.0:
            stages.append(0.0)
        return stages

    def replace(self, **changes) -> "SolverConfig":
        values = asdict(self)
        values.update(changes)
        return SolverConfig(**values)

    # ------------------------------------------------------------------
    # Formato texto "chave = valor"
    # ------------------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, base: Optional["SolverConfig"] = None) -> "SolverConfig":
        """Lê linhas 'chave = valor' (comentários com '#'); chaves desconhecidas são rejeitadas."""
        known = {f.name: f for f in fields(cls)}
        values = asdict(base) if base is not None else {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise SolverError(f"solver config line {number}: expected 'key = value': '{raw.strip()}'")
            key, value = (part.strip() for part in line.split('=', 1))
            if key not in known:
                raise SolverError(f"solver config line {number}: unknown key '{key}'")
            values[key] = _parse_value(key, value)
        return cls(**values)

    @classmethod
    def from_file(cls, path: str, base: Optional["SolverConfig"] = None) -> "SolverConfig":
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_text(f.read(), base)

    def to_text(self) -> str:
        lines = []
        for name, value in asdict(self).items():
            lines.append(f"{name} = {'none' if value is None else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_settings(cls, config: Dict[str, Any], **overrides) -> "SolverConfig":
        """Monta a configuração a partir da seção 'solver' do config.json."""
        values = {
            'kappa0': get_setting(config, 'solver.kappa0', 1.0e-2),
            'anneal_stages': get_setting(config, 'solver.anneal_stages', 6),
            'max_iter': get_setting(config, 'solver.max_iter', 200),
            'initial_step': get_setting(config, 'solver.initial_step', 1.0),
            'backtrack': get_setting(config, 'solver.backtrack', 0.5),
            'armijo': get_setting(config, 'solver.armijo', 1.0e-4),
            'polish': get_setting(config, 'solver.polish', False),
            'default_tol': get_setting(config, 'solver.tol', 1.0e-6),
            'default_tol_p2': get_setting(config, 'solver.tol_p2', 1.0e-8),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _parse_value(key: str, text: str):
    lowered = text.lower()
    if key == 'polish':
        if lowered in ('true', 'yes', '1', 'on'):
            return True
        if lowered in ('false', 'no', '0', 'off'):
            return False
        raise SolverError(f"invalid boolean for '{key}': '{text}'")
    if lowered in ('none', 'null', ''):
        if key in ('kappa', 'tol'):
            return None
        raise SolverError(f"'{key}' cannot be empty")
    try:
        if key in ('anneal_stages', 'max_iter'):
            return int(text)
        return float(text)
    except ValueError:
        raise SolverError(f"invalid value for '{key}': '{text}'") from None


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    energy: float
    residual: float
    step: float
    kappa: float


@dataclass
class SolveResult:
    """Solução com o histórico de convergência."""
    u: ScalarField
    residual: float
    iterations: int
    converged: bool
    history: List[IterationRecord] = field(default_factory=list)

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.history], columns=HISTORY_COLUMNS)

    def write_history(self, path: str) -> str:
        self.history_frame().to_csv(path, index=False, float_format='%.17g')
        return path


class PPoissonSolver:
    """Minimizador da energia p-Dirichlet com recozimento de κ."""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.history: List[IterationRecord] = []
        self._iter = 0

    def _record(self, energy: float, residual: float, step: float, kappa: float) -> None:
        self.history.append(IterationRecord(self._iter, energy, residual, step, kappa))

    def run_stage(
        self,
        problem: PEnergy,
        x: np.ndarray,
        kappa: float,
        scale: float,
        tol: float,
    ) -> Tuple[np.ndarray, float, bool]:
        """Itera Newton amortecido num estágio de κ fixo.

        Returns:
            (x, resíduo final, convergiu)
        """
        cfg = self.config
        J = problem.energy(x, kappa)
        g = problem.gradient(x, kappa)
        res = float(np.max(np.abs(g), initial=0.0)) / scale
        self._record(J, res, 0.0, kappa)

        for _ in range(cfg.max_iter):
            if res < tol:
                return x, res, True

            H = problem.hessian(x, kappa)
            d = spsolve(H.tocsc(), -g)
            gd = float(g @ d)
            if not np.all(np.isfinite(d)) or not gd < 0.0:
                logger.debug("Direção de Newton inválida; usando descida mais íngreme")
                d = -g
                gd = -float(g @ g)

            t = cfg.initial_step
            accepted = False
            while t >= MIN_STEP:
                xn = x + t * d
                Jn = problem.energy(xn, kappa)
                if Jn <= J + cfg.armijo * t * gd:
                    accepted = True
                elif Jn - J <= ROUNDOFF_ENERGY * max(1.0, abs(J)):
                    # variação no nível do arredondamento: aceita se o resíduo cai
                    gn_try = problem.gradient(xn, kappa)
                    accepted = float(np.max(np.abs(gn_try), initial=0.0)) / scale < res
                if accepted:
                    break
                t *= cfg.backtrack

            if not accepted:
                logger.warning(f"Busca linear estagnada (κ={kappa:.3g}, resíduo={res:.3e})")
                break

            x = xn
            J = Jn
            g = problem.gradient(x, kappa)
            res = float(np.max(np.abs(g), initial=0.0)) / scale
            self._iter += 1
            self._record(J, res, t, kappa)
            logger.debug(f"iter {self._iter}: J={J:.12g} resíduo={res:.3e} passo={t:.3g} κ={kappa:.3g}")

        return x, res, res < tol

    def solve(self, f: ScalarField, g_boundary: ScalarField) -> SolveResult:
        """Resolve -Δ_p u = f em Ω com u = g nos nós de fronteira.

        Args:
            f: Termo fonte (pode ter um nó singular).
            g_boundary: Dados de Dirichlet (usados nos nós de fronteira).

        Returns:
            SolveResult com u e o histórico.

        Raises:
            SolverError: p fora de (1, n] ou malhas diferentes.
            ConvergenceError: Resíduo acima da tolerância após max_iter.
        """
        cfg = self.config
        grid = f.grid
        if g_boundary.grid != grid:
            raise SolverError("grid mismatch: f and g live on different grids")
        if cfg.p > grid.n:
            error_msg = f"p > n: p={cfg.p}, n={grid.n}"
            logger.error(error_msg)
            raise SolverError(error_msg)

        free = grid.interior_indices
        base = np.where(grid.in_domain, g_boundary.values, 0.0)
        base[free] = 0.0
        if not np.all(np.isfinite(base)):
            raise SolverError("boundary data not finite")

        load = load_vector(f)
        scale = grid.h ** grid.n * (1.0 + source_scale(grid, load, free))
        problem = PEnergy(grid.triangles(), cfg.p, free, base, load, cfg.hessian_floor)
        x = self._poisson_guess(problem)

        tol = cfg.tolerance
        stages = cfg.kappa_schedule()
        polishing = cfg.polish and len(stages) > 1 and stages[-1] == 0.0
        logger.info(
            f"Resolvendo p-Poisson: p={cfg.p}, h={grid.h:.5g}, {free.size} incógnitas, "
            f"estágios κ={['%.3g' % k for k in stages]}"
        )

        self.history = []
        self._iter = 0
        res, converged = np.inf, False
        last_solved = x
        for index, kappa in enumerate(stages):
            final = index == len(stages) - 1
            x_stage, res_stage, conv_stage = self.run_stage(problem, x, kappa, scale, tol)
            logger.info(f"Estágio κ={kappa:.3g}: resíduo {res_stage:.3e} ({'convergiu' if conv_stage else 'não convergiu'})")
            if final and polishing and not conv_stage:
                logger.warning(f"Polimento κ=0 não atingiu tol={tol:g}; mantendo o estágio anterior")
                break
            x, res, converged = x_stage, res_stage, conv_stage
            last_solved = x
            if not final and not conv_stage:
                logger.warning(f"Estágio κ={kappa:.3g} não convergiu (resíduo {res_stage:.3e}); seguindo a quente")

        if not converged:
            error_msg = f"solver did not converge: residual {res:.3e} > tol {tol:g} after {self._iter} iterations"
            logger.error(error_msg)
            raise ConvergenceError(error_msg, res, self._iter)

        u = ScalarField(grid, problem.expand(last_solved))
        logger.info(f"Solução obtida em {self._iter} iterações, resíduo {res:.3e}")
        return SolveResult(u, res, self._iter, True, list(self.history))

    @staticmethod
    def _poisson_guess(problem: PEnergy) -> np.ndarray:
        """Solução do problema com p=2 (mesma carga e dados) como partida."""
        area = problem.mesh.area
        base_dx = problem.Dx @ problem.base
        base_dy = problem.Dy @ problem.base
        H = area * (problem.DxF.T @ problem.DxF + problem.DyF.T @ problem.DyF)
        rhs = problem.load_free - area * (problem.DxF.T @ base_dx + problem.DyF.T @ base_dy)
        if H.shape[0] == 0:
            return np.zeros(0)
        return np.asarray(spsolve(H.tocsc(), rhs), dtype=float)


def solve_p_poisson(f: ScalarField, g_boundary: ScalarField, cfg: Optional[SolverConfig] = None) -> ScalarField:
    """Resolve -Δ_p u = f (u = g na fronteira) e devolve u."""
    return PPoissonSolver(cfg).solve(f, g_boundary).u


def _inner_nodes(grid: Grid, active: np.ndarray) -> np.ndarray:
    """Nós ativos cujos 8 vizinhos também são ativos."""
    A = active.reshape(grid.shape)
    padded = np.pad(A, 1, constant_values=False)
    inner = A.copy()
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            inner &= padded[1 + dj:1 + dj + grid.ny, 1 + di:1 + di + grid.nx]
    return np.flatnonzero(inner.ravel())


def p_harmonic_replacement(
    u: ScalarField,
    b: Ball,
    p: float,
    cfg: Optional[SolverConfig] = None,
) -> ScalarField:
    """Substituição p-harmônica de u na bola b.

    Minimiza ∫_b |Dv|^p com v = u nos nós de b sem os 8 vizinhos em b e fora
    de b. Parte de u e termina com um estágio κ=0 iniciado do melhor entre u
    e o resultado recozido, de modo que ∫_b|Dv|^p <= ∫_b|Du|^p.

    Args:
        u: Campo com os dados de fronteira.
        b: Bola contida em Ω com pelo menos 8 nós no raio.
        p: Expoente.
        cfg: Parâmetros do solver (p é substituído).

    Raises:
        SolverError: Bola pequena demais para o estêncil ou fora de Ω.
    """
    grid = u.grid
    cfg = (cfg or SolverConfig(p=p)).replace(p=p)
    if b.radius < MIN_REPLACEMENT_CELLS * grid.h * (1.0 - 1e-12):
        error_msg = f"ball too small for the stencil: r={b.radius:.4g} < {MIN_REPLACEMENT_CELLS}h"
        logger.error(error_msg)
        raise SolverError(error_msg)
    if not grid.ball_inside(b):
        error_msg = f"replacement ball exits Ω: {b}"
        logger.error(error_msg)
        raise SolverError(error_msg)

    active = np.zeros(grid.node_count, dtype=bool)
    active[grid.ball_nodes(b)] = True
    free = _inner_nodes(grid, active)
    values = np.where(np.isfinite(u.values), u.values, 0.0)
    problem = PEnergy(grid.triangles(active), p, free, values, None, cfg.hessian_floor)
    scale = grid.h ** grid.n
    tol = cfg.tolerance

    solver = PPoissonSolver(cfg)
    x0 = problem.restrict(values)
    x = x0
    if p != 2.0:
        for kappa in cfg.kappa_schedule():
            if kappa == 0.0:
                continue
            x, _, _ = solver.run_stage(problem, x, kappa, scale, tol)
        if problem.energy(x, 0.0) > problem.energy(x0, 0.0):
            x = x0
    x, res, converged = solver.run_stage(problem, x, 0.0, scale, tol)
    if not converged:
        logger.warning(f"Substituição em {b} terminou com resíduo {res:.3e} (tol {tol:g})")
    logger.debug(f"Substituição p-harmônica em {b}: {free.size} nós livres, resíduo {res:.3e}")
    return ScalarField(grid, problem.expand(x))


def convergence_study(
    source,
    exact,
    hs: Sequence[float],
    cfg: Optional[SolverConfig] = None,
    domain_kind: str = "disk",
    singular_point: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """Erros nodais máximos e ordens observadas sob refinamento.

    Args:
        source: Fórmula f(x, y).
        exact: Fórmula da solução exata (também usada como dado de fronteira).
        hs: Espaçamentos, do mais grosso ao mais fino.
        cfg: Parâmetros do solver.
        domain_kind: Domínio.
        singular_point: Nó singular de f.

    Returns:
        DataFrame com colunas h, error, order, residual, iterations.
    """
    rows = []
    for h in hs:
        grid = Grid(domain_kind, h)
        f = ScalarField.from_formula(grid, source, singular_point)
        g = ScalarField.from_formula(grid, exact)
        result = PPoissonSolver(cfg).solve(f, g)
        idx = grid.domain_indices
        error = float(np.max(np.abs(result.u.values[idx] - g.values[idx])))
        rows.append({'h': grid.h, 'error': error, 'residual': result.residual, 'iterations': result.iterations})
        logger.info(f"Refinamento h={grid.h:.5g}: erro máximo {error:.3e}")

    table = pd.DataFrame(rows, columns=['h', 'error', 'residual', 'iterations'])
    errors = table['error'].to_numpy()
    steps = table['h'].to_numpy()
    order = np.full(len(table), np.nan)
    with np.errstate(divide='ignore', invalid='ignore'):
        order[1:] = np.log(errors[:-1] / errors[1:]) / np.log(steps[:-1] / steps[1:])
    table.insert(2, 'order', order)
    return table
