"""
Módulo da malha regular do MorreyLab.

Discretiza o domínio por uma rede uniforme de espaçamento h com máscara de
nós (exterior, interior, fronteira), e define os campos amostrados sobre ela.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from ..utils.exceptions import MorreyLabError

logger = logging.getLogger(__name__)

# Tolerância relativa para pertinência de nós (evita perder nós sobre ∂Ω)
_MEMBERSHIP_TOL = 1e-12

# Raio interno do anel
ANNULUS_INNER_RADIUS = 0.25

Formula = Callable[[np.ndarray, np.ndarray], np.ndarray]


class GridError(MorreyLabError):
    """Exceção para erros de malha e de campos amostrados."""
    pass


class DomainKind(Enum):
    """Tipos de domínio suportados."""
    DISK = "disk"
    SQUARE = "square"
    ANNULUS = "annulus"

    @classmethod
    def parse(cls, value: Union[str, "DomainKind"]) -> "DomainKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            error_msg = f"unknown domain kind: '{value}' (use disk, square or annulus)"
            logger.error(error_msg)
            raise GridError(error_msg) from None


class NodeFlag(IntEnum):
    """Classificação de cada nó da rede."""
    EXTERIOR = 0
    INTERIOR = 1
    BOUNDARY = 2


@dataclass(frozen=True)
class Ball:
    """Bola B_r(x) do plano."""
    center: Tuple[float, float]
    radius: float

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0.0:
            raise GridError(f"ball radius must be positive: {self.radius}")
        object.__setattr__(self, 'center', (float(self.center[0]), float(self.center[1])))

    def scaled(self, factor: float) -> "Ball":
        """Bola concêntrica com raio multiplicado por factor."""
        return Ball(self.center, self.radius * factor)


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Triangulação P1 regular de um subconjunto de nós da rede.

    Cada quadrado da rede com canto inferior esquerdo (i, j) gera os
    triângulos (i,j),(i+1,j),(i+1,j+1) e (i,j),(i+1,j+1),(i,j+1). Em ambos o
    gradiente é constante e dado por diferenças entre pares de vértices.
    """
    vertices: np.ndarray
    dx_pairs: np.ndarray
    dy_pairs: np.ndarray
    h: float
    node_count: int

    @property
    def size(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def area(self) -> float:
        return 0.5 * self.h * self.h

    def gradient(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Gradiente constante por triângulo de um campo nodal."""
        gx = (values[self.dx_pairs[:, 0]] - values[self.dx_pairs[:, 1]]) / self.h
        gy = (values[self.dy_pairs[:, 0]] - values[self.dy_pairs[:, 1]]) / self.h
        return gx, gy

    def operators(self) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
        """Matrizes esparsas Dx, Dy (triângulos x nós) do gradiente."""
        return self._pair_operator(self.dx_pairs), self._pair_operator(self.dy_pairs)

    def _pair_operator(self, pairs: np.ndarray) -> sparse.csr_matrix:
        m = self.size
        rows = np.concatenate([np.arange(m), np.arange(m)])
        cols = np.concatenate([pairs[:, 0], pairs[:, 1]])
        data = np.concatenate([np.full(m, 1.0 / self.h), np.full(m, -1.0 / self.h)])
        return sparse.csr_matrix((data, (rows, cols)), shape=(m, self.node_count))


class Grid:
    """Rede uniforme bidimensional com máscara de domínio.

    Os nós são armazenados em ordem linha a linha: o índice plano do nó
    (i, j) é j * nx + i, com x crescente em i e y crescente em j.
    """

    def __init__(self, domain_kind: Union[str, DomainKind] = DomainKind.DISK, h: float = 1.0 / 64.0, n: int = 2):
        """Constrói a rede.

        Args:
            domain_kind: disco unitário, quadrado unitário ou anel.
            h: Espaçamento da rede (1/h deve ser inteiro).
            n: Dimensão espacial (apenas n=2 em tempo de execução).
        """
        if n != 2:
            error_msg = f"only n=2 grids are supported at runtime (n={n})"
            logger.error(error_msg)
            raise GridError(error_msg)
        if not np.isfinite(h) or h <= 0.0:
            error_msg = f"grid spacing must be positive: h={h}"
            logger.error(error_msg)
            raise GridError(error_msg)

        cells = 1.0 / h
        if abs(cells - round(cells)) > 1e-9 * max(cells, 1.0):
            error_msg = f"1/h must be an integer: h={h}"
            logger.error(error_msg)
            raise GridError(error_msg)

        self.n = n
        self.h = 1.0 / round(cells)
        self.domain_kind = DomainKind.parse(domain_kind)

        cells = int(round(cells))
        if self.domain_kind is DomainKind.SQUARE:
            self.extent = (0.0, 1.0, 0.0, 1.0)
            self.nx = self.ny = cells + 1
        else:
            self.extent = (-1.0, 1.0, -1.0, 1.0)
            self.nx = self.ny = 2 * cells + 1

        xs = self.extent[0] + self.h * np.arange(self.nx)
        ys = self.extent[2] + self.h * np.arange(self.ny)
        X, Y = np.meshgrid(xs, ys)
        self.x = X.ravel()
        self.y = Y.ravel()

        inside = self.contains(self.x, self.y)
        self.mask = self._classify(inside.reshape(self.ny, self.nx)).ravel()
        self.node_weights = self._node_weights(inside)
        self.diameter = self._diameter()

        logger.debug(
            f"Malha {self.domain_kind.value} h={self.h:.6g}: {self.node_count} nós, "
            f"{self.interior_indices.size} interiores, {self.boundary_indices.size} de fronteira"
        )

    @classmethod
    def build(cls, domain_kind: Union[str, DomainKind], h: float) -> "Grid":
        """Constrói a malha do domínio indicado (disco, quadrado ou anel)."""
        return cls(domain_kind, h)

    def __repr__(self) -> str:
        return f"Grid(domain_kind='{self.domain_kind.value}', h={self.h!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.domain_kind is other.domain_kind and self.nx == other.nx

    def __hash__(self) -> int:
        return hash((self.domain_kind, self.nx))

    # ------------------------------------------------------------------
    # Geometria do domínio
    # ------------------------------------------------------------------

    def contains(self, x, y) -> np.ndarray:
        """Indica se os pontos (x, y) pertencem ao fecho de Ω."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.domain_kind is DomainKind.SQUARE:
            tol = _MEMBERSHIP_TOL
            return (x >= -tol) & (x <= 1.0 + tol) & (y >= -tol) & (y <= 1.0 + tol)
        r2 = x * x + y * y
        inside = r2 <= 1.0 + _MEMBERSHIP_TOL
        if self.domain_kind is DomainKind.ANNULUS:
            inside &= r2 >= ANNULUS_INNER_RADIUS ** 2 - _MEMBERSHIP_TOL
        return inside

    def distance_to_boundary(self, point: Sequence[float]) -> float:
        """Distância (analítica) de um ponto a ∂Ω; negativa fora do domínio."""
        px, py = float(point[0]), float(point[1])
        if self.domain_kind is DomainKind.SQUARE:
            return min(px, 1.0 - px, py, 1.0 - py)
        r = float(np.hypot(px, py))
        if self.domain_kind is DomainKind.ANNULUS:
            return min(1.0 - r, r - ANNULUS_INNER_RADIUS)
        return 1.0 - r

    def _diameter(self) -> float:
        if self.domain_kind is DomainKind.SQUARE:
            return float(np.sqrt(2.0))
        return 2.0

    def _classify(self, inside: np.ndarray) -> np.ndarray:
        """Nó interior: todos os 8 vizinhos no domínio; demais nós de Ω são de fronteira."""
        padded = np.pad(inside, 1, constant_values=False)
        all_neighbours = np.ones_like(inside)
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                all_neighbours &= padded[1 + dj:1 + dj + self.ny, 1 + di:1 + di + self.nx]

        flags = np.full(inside.shape, int(NodeFlag.EXTERIOR), dtype=np.int8)
        flags[inside] = int(NodeFlag.BOUNDARY)
        flags[inside & all_neighbours] = int(NodeFlag.INTERIOR)
        return flags

    def _node_weights(self, inside: np.ndarray) -> np.ndarray:
        """Peso h^n da célula de cada nó, recortado à caixa envolvente."""
        xmin, xmax, ymin, ymax = self.extent
        half = 0.5 * self.h
        fx = (np.minimum(self.x + half, xmax) - np.maximum(self.x - half, xmin)) / self.h
        fy = (np.minimum(self.y + half, ymax) - np.maximum(self.y - half, ymin)) / self.h
        weights = self.h ** self.n * fx * fy
        weights[~inside] = 0.0
        return weights

    # ------------------------------------------------------------------
    # Consultas de nós
    # ------------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> Tuple[int, int]:
        return self.ny, self.nx

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    @property
    def in_domain(self) -> np.ndarray:
        return self.mask != NodeFlag.EXTERIOR

    @property
    def domain_indices(self) -> np.ndarray:
        return np.flatnonzero(self.in_domain)

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask == NodeFlag.INTERIOR)

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask == NodeFlag.BOUNDARY)

    @property
    def measure(self) -> float:
        """Área discreta de Ω (soma dos pesos nodais)."""
        return float(self.node_weights.sum())

    def node_index(self, i: int, j: int) -> int:
        return j * self.nx + i

    def nearest_node(self, point: Sequence[float]) -> int:
        """Índice plano do nó mais próximo de um ponto da caixa envolvente."""
        xmin, xmax, ymin, ymax = self.extent
        px, py = float(point[0]), float(point[1])
        if not (xmin - self.h <= px <= xmax + self.h and ymin - self.h <= py <= ymax + self.h):
            raise GridError(f"point outside the grid box: ({px}, {py})")
        i = int(np.clip(round((px - xmin) / self.h), 0, self.nx - 1))
        j = int(np.clip(round((py - ymin) / self.h), 0, self.ny - 1))
        return self.node_index(i, j)

    def is_node(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        k = self.nearest_node(point)
        return bool(np.hypot(self.x[k] - point[0], self.y[k] - point[1]) <= tol * self.h)

    def ball_nodes(self, ball: Ball) -> np.ndarray:
        """Nós de Ω com |x - c| <= r, procurados apenas na caixa de índices da bola."""
        xmin, _, ymin, _ = self.extent
        cx, cy = ball.center
        r = ball.radius
        i0 = max(int(np.floor((cx - r - xmin) / self.h)), 0)
        i1 = min(int(np.ceil((cx + r - xmin) / self.h)), self.nx - 1)
        j0 = max(int(np.floor((cy - r - ymin) / self.h)), 0)
        j1 = min(int(np.ceil((cy + r - ymin) / self.h)), self.ny - 1)
        if i0 > i1 or j0 > j1:
            return np.empty(0, dtype=np.intp)

        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
        idx = (jj * self.nx + ii).ravel()
        d2 = (self.x[idx] - cx) ** 2 + (self.y[idx] - cy) ** 2
        keep = (d2 <= r * r * (1.0 + _MEMBERSHIP_TOL)) & self.in_domain[idx]
        return np.sort(idx[keep])

    def ball_inside(self, ball: Ball) -> bool:
        """Indica se a bola está contida em Ω (analiticamente)."""
        return self.distance_to_boundary(ball.center) >= ball.radius

    # ------------------------------------------------------------------
    # Triangulação
    # ------------------------------------------------------------------

    def triangles(self, active: Optional[np.ndarray] = None) -> TriangleMesh:
        """Triangulação P1 dos quadrados da rede com os três vértices ativos.

        Args:
            active: Máscara booleana por nó (padrão: nós de Ω).

        Returns:
            TriangleMesh com os pares de diferenças de cada triângulo.
        """
        if active is None:
            active = self.in_domain
        active = np.asarray(active, dtype=bool)

        ii, jj = np.meshgrid(np.arange(self.nx - 1), np.arange(self.ny - 1))
        a = (jj * self.nx + ii).ravel()
        b = a + 1
        c = a + 1 + self.nx
        d = a + self.nx

        lower = active[a] & active[b] & active[c]
        upper = active[a] & active[c] & active[d]
        a1, b1, c1 = a[lower], b[lower], c[lower]
        a2, c2, d2 = a[upper], c[upper], d[upper]

        vertices = np.concatenate([np.column_stack([a1, b1, c1]), np.column_stack([a2, c2, d2])])
        dx_pairs = np.concatenate([np.column_stack([b1, a1]), np.column_stack([c2, d2])])
        dy_pairs = np.concatenate([np.column_stack([c1, b1]), np.column_stack([d2, a2])])
        return TriangleMesh(vertices, dx_pairs, dy_pairs, self.h, self.node_count)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Campo escalar amostrado nos nós de uma Grid.

    Nós marcados como singulares podem ter valor não finito; a quadratura os
    integra pela regra polar usando a fórmula analítica.
    """
    grid: Grid
    values: np.ndarray
    singular_nodes: Tuple[int, ...] = ()
    formula: Optional[Formula] = field(default=None, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.node_count,):
            raise GridError(
                f"field length {values.shape} does not match node count {self.grid.node_count}"
            )
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'singular_nodes', tuple(sorted(set(int(k) for k in self.singular_nodes))))

        regular = self.grid.in_domain.copy()
        if self.singular_nodes:
            regular[list(self.singular_nodes)] = False
        if not np.all(np.isfinite(values[regular])):
            bad = int(np.flatnonzero(regular & ~np.isfinite(values))[0])
            error_msg = (
                f"non-finite value at non-singular node {bad} "
                f"({self.grid.x[bad]:.6g}, {self.grid.y[bad]:.6g})"
            )
            logger.error(error_msg)
            raise GridError(error_msg)

    @classmethod
    def from_formula(
        cls,
        grid: Grid,
        formula: Formula,
        singular_point: Optional[Sequence[float]] = None
    ) -> "ScalarField":
        """Amostra uma fórmula analítica nos nós de Ω (exterior = 0).

        Args:
            grid: Malha de amostragem.
            formula: Função vetorizada f(x, y).
            singular_point: Nó onde a fórmula explode, se houver.
        """
        singular: Tuple[int, ...] = ()
        if singular_point is not None:
            if not grid.is_node(singular_point):
                raise GridError(f"singular point {tuple(singular_point)} is not a grid node")
            singular = (grid.nearest_node(singular_point),)

        values = np.zeros(grid.node_count)
        idx = grid.domain_indices
        with np.errstate(divide='ignore', invalid='ignore'):
            values[idx] = np.broadcast_to(formula(grid.x[idx], grid.y[idx]), idx.shape)
        return cls(grid, values, singular, formula)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        c = float(value)
        return cls.from_formula(grid, lambda x, y: np.full(np.shape(x), c))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls.constant(grid, 0.0)

    @property
    def singular_point(self) -> Optional[Tuple[float, float]]:
        if not self.singular_nodes:
            return None
        k = self.singular_nodes[0]
        return float(self.grid.x[k]), float(self.grid.y[k])

    def evaluate(self, x, y) -> np.ndarray:
        """Avalia o campo em pontos arbitrários (fórmula ou nó mais próximo)."""
        if self.formula is not None:
            with np.errstate(divide='ignore', invalid='ignore'):
                return np.broadcast_to(self.formula(np.asarray(x, float), np.asarray(y, float)), np.shape(x))
        xmin, _, ymin, _ = self.grid.extent
        i = np.clip(np.rint((np.asarray(x) - xmin) / self.grid.h).astype(int), 0, self.grid.nx - 1)
        j = np.clip(np.rint((np.asarray(y) - ymin) / self.grid.h).astype(int), 0, self.grid.ny - 1)
        return self.values[j * self.grid.nx + i]

    def _derived(self, values: np.ndarray, formula: Optional[Formula], singular=None) -> "ScalarField":
        values = np.where(self.grid.in_domain, values, 0.0)
        nodes = self.singular_nodes if singular is None else singular
        return ScalarField(self.grid, values, nodes, formula)

    def abs_pow(self, p: float) -> "ScalarField":
        """Campo |f|^p."""
        base = self.formula
        formula = None if base is None else (lambda x, y: np.abs(base(x, y)) ** p)
        with np.errstate(invalid='ignore', over='ignore'):
            return self._derived(np.abs(self.values) ** p, formula)

    def scaled(self, factor: float) -> "ScalarField":
        """Campo t·f."""
        base = self.formula
        t = float(factor)
        formula = None if base is None else (lambda x, y: t * base(x, y))
        with np.errstate(invalid='ignore'):
            return self._derived(t * self.values, formula)

    def multiply(self, other: "ScalarField") -> "ScalarField":
        """Produto ponto a ponto de dois campos da mesma malha."""
        if other.grid != self.grid:
            raise GridError("grid mismatch: fields live on different grids")
        singular = tuple(set(self.singular_nodes) | set(other.singular_nodes))
        formula = None
        if self.formula is not None or other.formula is not None:
            formula = lambda x, y: self.evaluate(x, y) * other.evaluate(x, y)  # noqa: E731
        with np.errstate(invalid='ignore'):
            return self._derived(self.values * other.values, formula, singular)

    def with_kernel(self, center: Sequence[float], exponent: float) -> "ScalarField":
        """Campo f(y)·|center - y|^{-exponent}, singular em center quando exponent > 0."""
        cx, cy = float(center[0]), float(center[1])
        e = float(exponent)

        def formula(x, y):
            return self.evaluate(x, y) * np.hypot(x - cx, y - cy) ** (-e)

        singular = set(self.singular_nodes)
        if e > 0.0:
            if not self.grid.is_node((cx, cy)):
                raise GridError(f"kernel center ({cx}, {cy}) is not a grid node")
            singular.add(self.grid.nearest_node((cx, cy)))
        with np.errstate(divide='ignore', invalid='ignore'):
            kernel = np.hypot(self.grid.x - cx, self.grid.y - cy) ** (-e)
            return self._derived(self.values * kernel, formula, tuple(singular))

    def max_abs(self) -> float:
        """Máximo de |f| nos nós regulares de Ω."""
        regular = self.grid.in_domain.copy()
        if self.singular_nodes:
            regular[list(self.singular_nodes)] = False
        return float(np.max(np.abs(self.values[regular]), initial=0.0))


@dataclass(frozen=True, eq=False)
class VectorField:
    """Campo vetorial amostrado (uma linha de n componentes por nó)."""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.node_count, self.grid.n):
            raise GridError(
                f"vector field shape {values.shape} does not match ({self.grid.node_count}, {self.grid.n})"
            )
        if not np.all(np.isfinite(values[self.grid.interior_indices])):
            raise GridError("vector field not finite at interior nodes")
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_formula(cls, grid: Grid, formula: Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]) -> "VectorField":
        values = np.zeros((grid.node_count, grid.n))
        idx = grid.domain_indices
        with np.errstate(divide='ignore', invalid='ignore'):
            gx, gy = formula(grid.x[idx], grid.y[idx])
        values[idx, 0] = gx
        values[idx, 1] = gy
        values[~np.isfinite(values)] = 0.0
        return cls(grid, values)

    def component(self, k: int) -> ScalarField:
        return ScalarField(self.grid, self.values[:, k].copy())

    def norm(self) -> ScalarField:
        """Campo escalar |G|."""
        return ScalarField(self.grid, np.linalg.norm(self.values, axis=1))

    def scaled(self, factor: float) -> "VectorField":
        return VectorField(self.grid, float(factor) * self.values)

    def shifted(self, vector: Sequence[float]) -> "VectorField":
        """Campo G + v com v constante (apenas nos nós de Ω)."""
        shift = np.where(self.grid.in_domain[:, None], np.asarray(vector, float)[None, :], 0.0)
        return VectorField(self.grid, self.values + shift)

    def max_norm(self, nodes: Optional[np.ndarray] = None) -> float:
        nodes = self.grid.domain_indices if nodes is None else nodes
        return float(np.max(np.linalg.norm(self.values[nodes], axis=1), initial=0.0))


def _shifted(A: np.ndarray, k: int, axis: int, fill) -> np.ndarray:
    """Retorna B com B[..., i, ...] = A[..., i + k, ...] e fill fora da rede."""
    out = np.full_like(A, fill)
    n = A.shape[axis]
    if abs(k) >= n:
        return out
    src = [slice(None)] * A.ndim
    dst = [slice(None)] * A.ndim
    if k >= 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = A[tuple(src)]
    return out


def _axis_derivative(U: np.ndarray, M: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Derivada ao longo de um eixo: centrada se possível, senão unilateral."""
    up1, up2 = _shifted(U, 1, axis, 0.0), _shifted(U, 2, axis, 0.0)
    um1, um2 = _shifted(U, -1, axis, 0.0), _shifted(U, -2, axis, 0.0)
    mp1, mp2 = _shifted(M, 1, axis, False), _shifted(M, 2, axis, False)
    mm1, mm2 = _shifted(M, -1, axis, False), _shifted(M, -2, axis, False)

    centered = M & mp1 & mm1
    forward2 = M & mp1 & mp2
    backward2 = M & mm1 & mm2
    forward1 = M & mp1
    backward1 = M & mm1

    return np.select(
        [centered, forward2, backward2, forward1, backward1],
        [
            (up1 - um1) / (2.0 * h),
            (-3.0 * U + 4.0 * up1 - up2) / (2.0 * h),
            (3.0 * U - 4.0 * um1 + um2) / (2.0 * h),
            (up1 - U) / h,
            (U - um1) / h,
        ],
        default=0.0,
    )


def gradient(u: ScalarField) -> VectorField:
    """Gradiente discreto de um campo escalar.

    Diferenças centradas onde os dois vizinhos do eixo estão em Ω; nos nós
    junto à fronteira, fórmula unilateral de segunda ordem (ou de primeira
    ordem quando só há um vizinho). Exato para campos afins.

    Args:
        u: Campo escalar definido em todos os nós de Ω.

    Returns:
        VectorField com (∂x u, ∂y u), nulo fora de Ω.
    """
    grid = u.grid
    if u.singular_nodes:
        logger.warning("Gradiente de campo com nós singulares; valores singulares tratados como nodais")
    M = grid.in_domain.reshape(grid.shape)
    U = np.where(M, u.values.reshape(grid.shape), 0.0)
    U = np.where(np.isfinite(U), U, 0.0)
    gx = _axis_derivative(U, M, grid.h, axis=1)
    gy = _axis_derivative(U, M, grid.h, axis=0)
    return VectorField(grid, np.column_stack([gx.ravel(), gy.ravel()]))
