# ============================================================================
# conformal_field/storage.py - Binary .grid files with a JSON sidecar
# ============================================================================
# Layout: b"BOLZGRID" | uint16 version | uint32 header length | header JSON |
#         mask (uint8, C order) | u (float64 little endian, C order)
# The sidecar repeats the header and adds the SHA-256 of the .grid file.

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from models import Background, LabInputError
from surface_atlas.octagon import FundamentalOctagon
from conformal_field.field import ConePrescription, MetricField
from conformal_field.grid import cached_chart_grid, cached_surface_grid
from conformal_field.smoothing import SmoothingPatch

logger = logging.getLogger(__name__)

MAGIC = b"BOLZGRID"
VERSION = 1


def _header(m: MetricField) -> dict:
    return {
        "background": m.background.value,
        "cells": m.grid.cells,
        "extent": m.grid.extent,
        "h": m.grid.h,
        "shape": list(m.u.shape),
        "cone": m.cone.to_dict() if m.cone is not None else None,
        "cone_weight": m.cone_weight,
        "cutoff_radii": list(m.cutoff_radii) if m.cutoff_radii is not None else None,
        "patch": m.patch.to_dict() if m.patch is not None else None,
        "label": m.label,
        "history": list(m.history),
    }


def file_digest(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def save_field(m: MetricField, path: Union[str, Path]) -> Path:
    """Write <path>.grid and <path>.json; returns the .grid path"""
    path = Path(path).with_suffix(".grid")
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _header(m)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(np.ascontiguousarray(m.grid.mask, dtype=np.uint8).tobytes())
        fh.write(np.ascontiguousarray(m.u, dtype="<f8").tobytes())
    sidecar = dict(header, sha256=file_digest(path), format_version=VERSION)
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    logger.info(f"✅ Saved {m.label} to {path}")
    return path


def load_field(path: Union[str, Path], atlas: Optional[FundamentalOctagon] = None) -> MetricField:
    path = Path(path).with_suffix(".grid")
    if not path.exists():
        raise LabInputError(f"Metric file {path} does not exist")
    data = path.read_bytes()
    if data[:len(MAGIC)] != MAGIC:
        raise LabInputError(f"{path} is not a metric grid file")
    offset = len(MAGIC)
    version, header_len = struct.unpack_from("<HI", data, offset)
    if version != VERSION:
        raise LabInputError(f"Unsupported grid file version {version}")
    offset += struct.calcsize("<HI")
    header = json.loads(data[offset:offset + header_len].decode("utf-8"))
    offset += header_len
    shape = tuple(header["shape"])
    count = shape[0] * shape[1]
    mask = np.frombuffer(data, dtype=np.uint8, count=count, offset=offset).reshape(shape).astype(bool)
    offset += count
    u = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).astype(float)

    background = Background(header["background"])
    if background == Background.HYPERBOLIC:
        if atlas is None:
            raise LabInputError("Loading a surface field needs the atlas")
        grid = cached_surface_grid(atlas, header["cells"])
    else:
        grid = cached_chart_grid(header["cells"], header["extent"])
    if grid.shape != shape or not np.array_equal(grid.mask, mask):
        raise LabInputError(f"{path} does not match the rebuilt grid")
    cone = ConePrescription.from_dict(header["cone"]) if header["cone"] else None
    patch = SmoothingPatch.from_dict(header["patch"]) if header["patch"] else None
    cutoff = tuple(header["cutoff_radii"]) if header["cutoff_radii"] is not None else None
    return MetricField(grid=grid, u=u, cone=cone, cone_weight=header["cone_weight"], cutoff_radii=cutoff,
                       patch=patch, label=header["label"], history=tuple(header["history"]))
