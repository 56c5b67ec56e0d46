"""
Energia p-Dirichlet discreta sobre a triangulação P1 da rede.

J(u) = Σ_T |T|·(1/p)(κ² + |Du_T|²)^{p/2} - Σ_{i livre} ℓ_i u_i

com ℓ_i = ∫ f φ_i aproximado pelas massas nodais de f. Os nós fixos
carregam os dados de Dirichlet.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from ..grid import Grid, ScalarField, TriangleMesh, node_masses

logger = logging.getLogger(__name__)

# Piso de κ² + |ξ|² usado apenas na matriz da direção de descida
DEFAULT_HESSIAN_FLOOR = 1e-12


class PEnergy:
    """Energia regularizada, gradiente e matriz SPD da direção de Newton.

    Args:
        mesh: Triangulação dos nós ativos.
        p: Expoente.
        free: Índices dos nós livres.
        base: Valores de todos os nós (os livres são sobrescritos).
        load: Carga ℓ por nó (zero para o problema homogêneo).
    """

    def __init__(
        self,
        mesh: TriangleMesh,
        p: float,
        free: np.ndarray,
        base: np.ndarray,
        load: Optional[np.ndarray] = None,
        hessian_floor: float = DEFAULT_HESSIAN_FLOOR,
    ):
        self.mesh = mesh
        self.p = float(p)
        self.free = np.asarray(free, dtype=np.intp)
        self.base = np.array(base, dtype=float)
        self.load = np.zeros(self.base.size) if load is None else np.asarray(load, dtype=float)
        self.load_free = self.load[self.free]
        self.hessian_floor = hessian_floor

        Dx, Dy = mesh.operators()
        self.Dx = Dx
        self.Dy = Dy
        self.DxF = Dx.tocsc()[:, self.free].tocsr()
        self.DyF = Dy.tocsc()[:, self.free].tocsr()

    def expand(self, x: np.ndarray) -> np.ndarray:
        """Vetor de todos os nós a partir dos valores livres."""
        u = self.base.copy()
        u[self.free] = x
        return u

    def restrict(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u, dtype=float)[self.free].copy()

    def _gradients(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.mesh.gradient(self.expand(x))

    def energy(self, x: np.ndarray, kappa: float) -> float:
        gx, gy = self._gradients(x)
        s = kappa * kappa + gx * gx + gy * gy
        return float(self.mesh.area * np.sum(s ** (0.5 * self.p)) / self.p - self.load_free @ x)

    def _flux_coefficient(self, s: np.ndarray) -> np.ndarray:
        """(κ² + |g|²)^{(p-2)/2}, com valor 0 onde s = 0 (fluxo nulo)."""
        with np.errstate(divide='ignore', invalid='ignore'):
            a = s ** (0.5 * (self.p - 2.0))
        return np.where(s > 0.0, a, 0.0)

    def gradient(self, x: np.ndarray, kappa: float) -> np.ndarray:
        """∇J restrito aos nós livres."""
        gx, gy = self._gradients(x)
        a = self._flux_coefficient(kappa * kappa + gx * gx + gy * gy)
        area = self.mesh.area
        return self.DxF.T @ (area * a * gx) + self.DyF.T @ (area * a * gy) - self.load_free

    def hessian(self, x: np.ndarray, kappa: float) -> sparse.csr_matrix:
        """Matriz SPD a[I + (p-2) g gᵀ/(κ²+|g|²)] montada por triângulo."""
        gx, gy = self._gradients(x)
        s = np.maximum(kappa * kappa + gx * gx + gy * gy, self.hessian_floor)
        a = s ** (0.5 * (self.p - 2.0))
        b = (self.p - 2.0) * a / s
        area = self.mesh.area
        m11 = sparse.diags(area * (a + b * gx * gx))
        m12 = sparse.diags(area * (b * gx * gy))
        m22 = sparse.diags(area * (a + b * gy * gy))
        H = self.DxF.T @ (m11 @ self.DxF + m12 @ self.DyF) + self.DyF.T @ (m12 @ self.DxF + m22 @ self.DyF)
        return H.tocsr()


def dirichlet_energy(u: ScalarField, p: float, nodes: Optional[np.ndarray] = None) -> float:
    """∫|Du|^p nos triângulos com os três vértices em nodes (padrão: Ω)."""
    grid = u.grid
    active = grid.in_domain.copy()
    if nodes is not None:
        active = np.zeros(grid.node_count, dtype=bool)
        active[np.asarray(nodes, dtype=np.intp)] = True
    mesh = grid.triangles(active)
    values = np.where(np.isfinite(u.values), u.values, 0.0)
    gx, gy = mesh.gradient(values)
    return float(mesh.area * np.sum((gx * gx + gy * gy) ** (0.5 * p)))


def load_vector(f: ScalarField) -> np.ndarray:
    """Carga ℓ_i = w_i f̃_i; nos nós singulares f̃ é a média de célula da regra polar."""
    return np.array(node_masses(f), dtype=float)


def source_scale(grid: Grid, load: np.ndarray, nodes: np.ndarray) -> float:
    """max |f̃| nos nós dados (normalização do resíduo)."""
    w = grid.node_weights[nodes]
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(w > 0.0, np.abs(load[nodes]) / w, 0.0)
    return float(np.max(ratio, initial=0.0))
