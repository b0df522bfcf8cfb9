# ============================================================================
# conformal_modulus/annulus.py - Annular regions on grids
# ============================================================================
# An annulus is given by a defining function `level` on grid nodes: the
# region is 0 < level < 1 and the two boundary components are the level sets
# 0 and 1. Exterior nodes keep their level value, which extends the boundary
# data past the boundary for the five-point stencil.
# ============================================================================

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

import config
from models import LabInputError
from surface_atlas.isometry import distance_between_geodesics, translation_length
from surface_atlas.octagon import FundamentalOctagon
from surface_atlas.classes import chord_walk, line_key, neighbor_tiles, point_on_axis, closest_point_to_origin
from surface_atlas.words import GroupWord, word_to_isometry
from conformal_field.grid import SurfaceGrid, cached_surface_grid

logger = logging.getLogger(__name__)

COLLAR_MARGIN = 0.95            # fraction of the maximal collar width used by default
CYLINDER_CELLS = 64
BOUNDARY_SAMPLES = 256


@dataclass(frozen=True, eq=False)
class AnnulusRegion:
    level: np.ndarray
    kind: str                               # "surface" | "chart" | "cylinder"
    spacing: float
    periodic: bool = False
    grid: Optional[SurfaceGrid] = None
    core: Optional[GroupWord] = None
    inner: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    outer: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    params: Dict[str, Any] = field(default_factory=dict)
    label: str = "annulus"

    @property
    def region(self) -> np.ndarray:
        inside = (self.level > 0.0) & (self.level < 1.0)
        if self.grid is not None:
            inside &= self.grid.mask
        return inside

    def validate(self):
        """Connected region with two boundary components; raises LabInputError otherwise"""
        region = self.region
        if not region.any():
            raise LabInputError(f"{self.label}: empty region")
        if self.kind == "surface":
            values = self.level[self.grid.mask]
            if values.min() >= 0.0 or values.max() <= 1.0:
                raise LabInputError(f"{self.label}: band does not reach both boundary levels")
            return
        if self.kind == "cylinder":
            if not ((self.level[:, 0] <= 0).all() and (self.level[:, -1] >= 1).all()):
                raise LabInputError(f"{self.label}: cylinder ends are not on the boundary levels")
            return
        _, parts = ndimage.label(region)
        if parts != 1:
            raise LabInputError(f"{self.label}: region has {parts} components")
        complement, holes = ndimage.label(np.pad(~region, 1, constant_values=True))
        if holes != 2:
            raise LabInputError(f"{self.label}: complement has {holes} components, not 2")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "spacing": self.spacing,
            "periodic": self.periodic,
            "core": list(self.core.letters) if self.core is not None else None,
            "params": self.params,
            "inner": [[z.real, z.imag] for z in self.inner],
            "outer": [[z.real, z.imag] for z in self.outer],
        }


def annulus_from_dict(data: dict, atlas: Optional[FundamentalOctagon] = None) -> AnnulusRegion:
    """Rebuild from the construction parameters stored in to_dict()"""
    params = data["params"]
    if data["kind"] == "cylinder":
        return flat_cylinder(params["circumference"], params["height"], params["cells"])
    if data["kind"] == "chart":
        return round_annulus(params["r1"], params["r2"], params["cells"])
    if atlas is None:
        raise LabInputError("A surface annulus needs the atlas")
    return collar_annulus(GroupWord.of(data["core"]), atlas, width=params["width"], cells=params["cells"])


# ---- flat builders --------------------------------------------------------------

def flat_cylinder(circumference: float, height: float, cells: int = CYLINDER_CELLS) -> AnnulusRegion:
    """[0, c) x [0, H], periodic in x; nodes sit on both boundary lines"""
    if not (circumference > 0 and height > 0):
        raise LabInputError("Cylinder needs positive circumference and height")
    spacing = circumference / cells
    rows = int(round(height / spacing))
    if rows < 2:
        raise LabInputError("Cylinder is thinner than two grid cells")
    if abs(rows * spacing - height) > 1e-9 * height:
        logger.warning(f"⚠️ Height {height} is not a multiple of the spacing; using {rows * spacing:.6g}")
    y = (np.arange(rows + 1)) * spacing
    level = np.broadcast_to(y / (rows * spacing), (cells, rows + 1)).copy()
    x = np.arange(cells) * spacing
    return AnnulusRegion(level=level, kind="cylinder", spacing=spacing, periodic=True,
                         inner=x + 0j, outer=x + 1j * rows * spacing,
                         params={"circumference": circumference, "height": height, "cells": cells},
                         label=f"cylinder {circumference:g}x{height:g}")


def round_annulus(r1: float, r2: float, cells: int = 200) -> AnnulusRegion:
    """r1 < |z| < r2 on a square node grid of side 2.2 r2"""
    if not 0 < r1 < r2:
        raise LabInputError("Round annulus needs 0 < r1 < r2")
    half = 1.1 * r2
    coords = np.linspace(-half, half, cells + 1)
    xx, yy = np.meshgrid(coords, coords, indexing="ij")
    r = np.maximum(np.hypot(xx, yy), 1e-300)
    level = np.log(r / r1) / math.log(r2 / r1)
    theta = 2.0 * math.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
    region = AnnulusRegion(level=level, kind="chart", spacing=float(coords[1] - coords[0]),
                           inner=r1 * np.exp(1j * theta), outer=r2 * np.exp(1j * theta),
                           params={"r1": r1, "r2": r2, "cells": cells}, label=f"round {r1:g}..{r2:g}")
    region.validate()
    return region


# ---- surface collars ------------------------------------------------------------

def _oriented_frames(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Unit r with zeta = r (z - e1)/(z - e2) mapping the disk onto the upper half-plane"""
    s = e1 + e2
    b = np.where(np.abs(s) > 1e-9, -s / np.where(np.abs(s) > 1e-9, np.abs(s), 1.0), 1j * e1)
    mb = (b - e1) / (b - e2)
    r = np.conj(mb) / np.abs(mb)
    if np.any(np.abs(((r * e1 / e2).imag)) < 1e-12):
        raise LabInputError("Degenerate axis frame")
    return np.where((r * e1 / e2).imag < 0, -r, r)


def class_lifts(h, atlas: FundamentalOctagon) -> Tuple[np.ndarray, np.ndarray]:
    """Oriented lifts (e1, e2) of h's closed geodesic passing near the octagon"""
    walk = chord_walk(h, atlas)
    seen, e1s, e2s = set(), [], []
    for tile in neighbor_tiles(atlas):
        for chord in walk.chords:
            a, b = complex(tile.apply(chord.line[0])), complex(tile.apply(chord.line[1]))
            a, b = a / abs(a), b / abs(b)
            key = line_key(a, b)
            if key in seen:
                continue
            seen.add(key)
            e1s.append(a)
            e2s.append(b)
    return np.array(e1s), np.array(e2s)


def maximal_collar_width(h, atlas: FundamentalOctagon) -> float:
    """Half the distance from the closed geodesic of h to itself (0 if it crosses itself)"""
    e1, e2 = class_lifts(h, atlas)
    first = chord_walk(h, atlas).chords
    best = math.inf
    for chord in first:
        p1, p2 = chord.line
        own = line_key(p1 / abs(p1), p2 / abs(p2))
        for q1, q2 in zip(e1, e2):
            if line_key(q1, q2) == own:
                continue
            best = min(best, distance_between_geodesics(p1, p2, q1, q2))
    return 0.5 * best


def standard_collar_width(length: float) -> float:
    """Width w with sinh(w) sinh(l/2) = 1"""
    return math.asinh(1.0 / math.sinh(0.5 * length))


def collar_modulus(width: float, length: float) -> float:
    """Modulus of the equidistant band of half-width w around a closed geodesic: 2 gd(w) / l"""
    return 2.0 * math.atan(math.sinh(width)) / length


def collar_annulus(word: GroupWord, atlas: FundamentalOctagon, width: Optional[float] = None,
                   cells: Optional[int] = None) -> AnnulusRegion:
    """sigma-equidistant band of half-width `width` around the closed geodesic of `word`"""
    h = word_to_isometry(word, atlas)
    ell = translation_length(h)
    if ell <= 1e-9:
        raise LabInputError(f"Word {word.label()} has no closed geodesic")
    limit = maximal_collar_width(h, atlas)
    if limit <= 0:
        raise LabInputError(f"Geodesic of {word.label()} is not simple; it has no collar")
    width = COLLAR_MARGIN * limit if width is None else width
    if not 0 < width < limit:
        raise LabInputError(f"Collar width {width} is not in (0, {limit:.6f})")
    cells = cells or config.GRID_CELLS
    grid = cached_surface_grid(atlas, cells)

    e1, e2 = class_lifts(h, atlas)
    frames = _oriented_frames(e1, e2)
    z = grid.z.reshape(-1)
    zeta = frames[None, :] * (z[:, None] - e1[None, :]) / (z[:, None] - e2[None, :])
    slope = zeta.real / zeta.imag                      # sinh of the signed distance
    nearest = np.argmin(np.abs(slope), axis=1)
    s = slope[np.arange(z.size), nearest]
    gd_w = math.atan(math.sinh(width))
    level = (0.5 - np.arctan(s) / (2.0 * gd_w)).reshape(grid.shape)

    # boundary curves: offsets of one period of the first lift
    a1, a2 = complex(e1[0]), complex(e2[0])
    base = closest_point_to_origin(a1, a2)
    axis = point_on_axis(a1, a2, base, ell * (np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES - 0.5))
    r = frames[0]
    height = np.abs(r * (axis - a1) / (axis - a2))

    def offset(angle):
        mu = height * np.exp(1j * angle) / r
        return (a1 - mu * a2) / (1.0 - mu)

    region = AnnulusRegion(level=level, kind="surface", spacing=grid.h, grid=grid, core=word,
                           inner=offset(0.5 * math.pi + gd_w), outer=offset(0.5 * math.pi - gd_w),
                           params={"width": width, "cells": cells, "length": ell},
                           label=f"collar {word.label()} w={width:.4f}")
    region.validate()
    logger.info(f"✅ Collar around {word.label()}: half-width {width:.5f} (maximal {limit:.5f})")
    return region
