# ============================================================================
# conformal_field/grid.py - Node-centred grids over the octagon or unit disk
# ============================================================================
# Arrays are indexed [ix, iy] (meshgrid indexing="ij"); node (m, m) is z = 0.
# Surface grids carry a ghost band whose values are interpolated from the
# deck-transformed interior, so periodic closure is a sparse matrix W:
#     ghost = W @ interior
# Nodes beyond the band are nearest-filled and only feed spline evaluation.

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np
from scipy import ndimage, sparse

from models import Background, LabInputError
from surface_atlas import FundamentalOctagon, VERTEX_RADIUS

logger = logging.getLogger(__name__)

GHOST_BAND = 4
CHART_PAD = 2


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    background: Background
    cells: int
    extent: float                 # vertex radius (surface) or chart radius
    h: float
    coords: np.ndarray            # 1-D node coordinates, shared by x and y
    mask: np.ndarray              # evaluable interior nodes
    ghost: np.ndarray             # ghost band (surface grids only)
    ghost_matrix: sparse.csr_matrix
    fill_index: tuple             # nearest defined node for every node
    atlas: Optional[FundamentalOctagon] = field(default=None, repr=False)

    @property
    def shape(self):
        return self.mask.shape

    @cached_property
    def z(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.coords, self.coords, indexing="ij")
        return xx + 1j * yy

    @cached_property
    def interior_index(self) -> np.ndarray:
        """Position of each mask node in the flattened unknown vector, -1 elsewhere"""
        index = -np.ones(self.shape, dtype=np.int64)
        index[self.mask] = np.arange(int(self.mask.sum()))
        return index

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @property
    def is_surface(self) -> bool:
        return self.background == Background.HYPERBOLIC

    @cached_property
    def sigma_density(self) -> np.ndarray:
        """Conformal density of the background: (2/(1-|z|^2))^2 or 1"""
        if not self.is_surface:
            return np.ones(self.shape)
        r2 = np.minimum(np.abs(self.z) ** 2, 1.0 - 1e-12)
        return (2.0 / (1.0 - r2)) ** 2

    # ---- filling -----------------------------------------------------------

    def extend(self, interior: np.ndarray) -> np.ndarray:
        """Full nodal array from mask values: ghosts via W, the rest nearest-filled"""
        interior = np.asarray(interior, dtype=float)
        if interior.shape != (self.size,):
            raise LabInputError(f"Expected {self.size} interior values, got {interior.shape}")
        full = np.zeros(self.shape)
        full[self.mask] = interior
        if self.ghost_matrix.shape[0]:
            full[self.ghost] = self.ghost_matrix @ interior
        return full[self.fill_index]

    def synchronize(self, full: np.ndarray) -> np.ndarray:
        return self.extend(np.asarray(full)[self.mask])

    def periodicity_residual(self, full: np.ndarray) -> float:
        """Max |ghost - W interior| of a full nodal array"""
        if not self.ghost_matrix.shape[0]:
            return 0.0
        full = np.asarray(full)
        return float(np.max(np.abs(full[self.ghost] - self.ghost_matrix @ full[self.mask])))

    # ---- operators ---------------------------------------------------------

    def node_of(self, z: complex):
        m = (len(self.coords) - 1) // 2
        return int(round(z.real / self.h)) + m, int(round(z.imag / self.h)) + m

    def laplacian_full(self, full: np.ndarray) -> np.ndarray:
        """Five-point Euclidean Laplacian at every node with a full stencil (NaN on the rim)"""
        full = np.asarray(full, dtype=float)
        lap = np.full(self.shape, np.nan)
        lap[1:-1, 1:-1] = (full[2:, 1:-1] + full[:-2, 1:-1] + full[1:-1, 2:] + full[1:-1, :-2]
                           - 4.0 * full[1:-1, 1:-1]) / self.h ** 2
        return lap

    @cached_property
    def laplacian_operator(self) -> sparse.csr_matrix:
        """Euclidean five-point operator on mask unknowns, ghost-closed through W"""
        n = self.size
        index = self.interior_index
        ghost_index = -np.ones(self.shape, dtype=np.int64)
        ghost_index[self.ghost] = np.arange(int(self.ghost.sum()))
        rows_m, cols_m, rows_g, cols_g = [], [], [], []
        ix, iy = np.nonzero(self.mask)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            jx, jy = ix + dx, iy + dy
            inside = self.mask[jx, jy]
            rows_m.append(index[ix[inside], iy[inside]])
            cols_m.append(index[jx[inside], jy[inside]])
            outside = ~inside
            if np.any(outside & ~self.ghost[jx, jy]):
                raise LabInputError("Mask node has a neighbour outside the ghost band")
            rows_g.append(index[ix[outside], iy[outside]])
            cols_g.append(ghost_index[jx[outside], jy[outside]])
        rows_m, cols_m = np.concatenate(rows_m), np.concatenate(cols_m)
        A_mm = sparse.csr_matrix((np.ones(rows_m.size), (rows_m, cols_m)), shape=(n, n))
        rows_g, cols_g = np.concatenate(rows_g), np.concatenate(cols_g)
        operator = A_mm - 4.0 * sparse.identity(n, format="csr")
        if rows_g.size:
            A_mg = sparse.csr_matrix((np.ones(rows_g.size), (rows_g, cols_g)),
                                     shape=(n, int(self.ghost.sum())))
            operator = operator + A_mg @ self.ghost_matrix
        return (operator / self.h ** 2).tocsr()


# ---- builders --------------------------------------------------------------

def _node_coords(half_extent: float, h: float, pad: int) -> np.ndarray:
    m = int(math.ceil(half_extent / h)) + pad
    return h * (np.arange(2 * m + 1) - m)


def _fill_index(defined: np.ndarray) -> tuple:
    _, indices = ndimage.distance_transform_edt(~defined, return_indices=True)
    return tuple(indices)


def build_surface_grid(atlas: FundamentalOctagon, cells: int) -> SurfaceGrid:
    """Grid over the octagon: `cells` spacings across the vertex diameter"""
    if cells < 20:
        raise LabInputError("Surface grids need at least 20 cells")
    h = 2.0 * VERTEX_RADIUS / cells
    coords = _node_coords(VERTEX_RADIUS, h, GHOST_BAND + 2)
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    z = xx + 1j * yy
    mask = atlas.contains(z, tol=0.0)
    band = ndimage.binary_dilation(mask, structure=np.ones((3, 3), dtype=bool), iterations=GHOST_BAND)
    ghost = band & ~mask
    ghost_matrix = _ghost_interpolation(atlas, coords, h, mask, z[ghost])
    grid = SurfaceGrid(
        background=Background.HYPERBOLIC, cells=cells, extent=VERTEX_RADIUS, h=h, coords=coords,
        mask=mask, ghost=ghost, ghost_matrix=ghost_matrix, fill_index=_fill_index(band), atlas=atlas,
    )
    logger.info(f"✅ Surface grid: h={h:.5f}, {grid.size} interior nodes, {int(ghost.sum())} ghosts")
    return grid


def build_chart_grid(cells: int, radius: float = 1.0) -> SurfaceGrid:
    """Flat unit-disk chart; mask is the open disk of the given radius"""
    if cells < 20:
        raise LabInputError("Chart grids need at least 20 cells")
    h = 2.0 * radius / cells
    coords = _node_coords(radius, h, CHART_PAD)
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    mask = np.abs(xx + 1j * yy) < radius
    empty = sparse.csr_matrix((0, int(mask.sum())))
    grid = SurfaceGrid(
        background=Background.FLAT, cells=cells, extent=radius, h=h, coords=coords, mask=mask,
        ghost=np.zeros_like(mask), ghost_matrix=empty, fill_index=_fill_index(mask),
    )
    logger.info(f"✅ Chart grid: h={h:.5f}, {grid.size} disk nodes")
    return grid


def _ghost_interpolation(atlas: FundamentalOctagon, coords: np.ndarray, h: float,
                         mask: np.ndarray, ghost_z: np.ndarray) -> sparse.csr_matrix:
    """Bilinear weights of each ghost's canonical image on mask nodes (renormalised)"""
    n_mask = int(mask.sum())
    index = -np.ones(mask.shape, dtype=np.int64)
    index[mask] = np.arange(n_mask)
    images, _, _ = atlas.canonicalize_batch(ghost_z)
    fx = (images.real - coords[0]) / h
    fy = (images.imag - coords[0]) / h
    i0 = np.floor(fx).astype(np.int64)
    j0 = np.floor(fy).astype(np.int64)
    tx, ty = fx - i0, fy - j0
    corners = [
        (i0, j0, (1 - tx) * (1 - ty)),
        (i0 + 1, j0, tx * (1 - ty)),
        (i0, j0 + 1, (1 - tx) * ty),
        (i0 + 1, j0 + 1, tx * ty),
    ]
    weights = np.zeros((ghost_z.size, 4))
    cols = np.zeros((ghost_z.size, 4), dtype=np.int64)
    for c, (ci, cj, w) in enumerate(corners):
        node = index[ci, cj]
        usable = node >= 0
        weights[:, c] = np.where(usable, w, 0.0)
        cols[:, c] = np.where(usable, node, 0)
    totals = weights.sum(axis=1)
    orphan = totals <= 1e-14
    if np.any(orphan):
        _, (nx, ny) = ndimage.distance_transform_edt(~mask, return_indices=True)
        ri = np.clip(np.rint(fx[orphan]).astype(np.int64), 0, mask.shape[0] - 1)
        rj = np.clip(np.rint(fy[orphan]).astype(np.int64), 0, mask.shape[1] - 1)
        weights[orphan] = 0.0
        weights[orphan, 0] = 1.0
        cols[orphan, 0] = index[nx[ri, rj], ny[ri, rj]]
        totals = weights.sum(axis=1)
        logger.debug(f"{int(orphan.sum())} ghosts fell back to nearest interior node")
    weights /= totals[:, None]
    rows = np.repeat(np.arange(ghost_z.size), 4)
    matrix = sparse.csr_matrix((weights.ravel(), (rows, cols.ravel())), shape=(ghost_z.size, n_mask))
    matrix.eliminate_zeros()
    return matrix


@lru_cache(maxsize=4)
def cached_surface_grid(atlas: FundamentalOctagon, cells: int) -> SurfaceGrid:
    return build_surface_grid(atlas, cells)


@lru_cache(maxsize=4)
def cached_chart_grid(cells: int, radius: float = 1.0) -> SurfaceGrid:
    return build_chart_grid(cells, radius)
