# ============================================================================
# geodesic_engine/probes.py - Thick-thin and collar length comparisons
# ============================================================================

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import config
from models import LabInputError, TableRow
from surface_atlas.isometry import translation_length
from surface_atlas.words import GroupWord, word_to_isometry
from conformal_field.field import MetricField
from geodesic_engine.intersections import sigma_intersection
from geodesic_engine.loops import shorten_loop
from geodesic_engine.workers import parallel_map

logger = logging.getLogger(__name__)

AREA_TOLERANCE = 1e-3


@dataclass
class ProbeTable:
    rows: List[TableRow] = field(default_factory=list)
    summary: Dict[str, float] = field(default_factory=dict)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = sorted({k for row in self.rows for k in row.values})
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key"] + columns)
            for row in self.rows:
                writer.writerow([row.key] + [row.values.get(c, "") for c in columns])
        return path


def _check_areas(family: Sequence[MetricField]):
    if not family:
        return
    areas = [m.area() for m in family]
    if max(areas) - min(areas) > AREA_TOLERANCE * max(areas):
        raise LabInputError(f"Family is not normalised to one area: {min(areas):.6f} .. {max(areas):.6f}")


def _g_lengths(words: Sequence[GroupWord], m: MetricField) -> List[float]:
    return parallel_map(lambda w: shorten_loop(w, m).length, words)


def thick_thin_probe(classes: Sequence[GroupWord], family: Sequence[MetricField],
                     pair_products: bool = True) -> ProbeTable:
    """
    l_g / l_sigma for every class and metric; per-metric min/max give the
    empirical comparability constants. With pair_products, the smallest
    l_g(a) l_g(b) / i(a, b) over intersecting pairs is reported as D.
    """
    _check_areas(family)
    table = ProbeTable()
    if not family or not classes:
        return table
    atlas = family[0].grid.atlas
    isometries = [word_to_isometry(w, atlas) for w in classes]
    sigma = [translation_length(h) for h in isometries]
    crossings = {}
    if pair_products:
        for i in range(len(classes)):
            for j in range(i + 1, len(classes)):
                crossings[i, j] = sigma_intersection(isometries[i], isometries[j], atlas)

    overall_min, overall_max, D = math.inf, 0.0, math.inf
    for m in family:
        lengths = _g_lengths(classes, m)
        ratios = [lg / ls for lg, ls in zip(lengths, sigma)]
        for w, lg, ls, r in zip(classes, lengths, sigma, ratios):
            table.rows.append(TableRow(key=f"{m.label}|{w.label()}",
                                       values={"metric": m.label, "word": w.label(), "sigma_length": ls,
                                               "g_length": lg, "ratio": r}))
        table.summary[f"C1[{m.label}]"] = min(ratios)
        table.summary[f"C2[{m.label}]"] = max(ratios)
        overall_min, overall_max = min(overall_min, min(ratios)), max(overall_max, max(ratios))
        for (i, j), count in crossings.items():
            if count >= 1:
                D = min(D, lengths[i] * lengths[j] / count)
    table.summary["C1"] = overall_min
    table.summary["C2"] = overall_max
    if pair_products:
        table.summary["D"] = D
    logger.info(f"✅ Thick-thin probe: ratios in [{overall_min:.5f}, {overall_max:.5f}] over {len(family)} metrics")
    return table


def collar_probe(a: GroupWord, b: GroupWord, family: Sequence[MetricField],
                 collar_length: Optional[float] = None) -> ProbeTable:
    """l_g(b) / l_g(a) per metric for intersecting a, b; the max is the empirical D_L"""
    _check_areas(family)
    table = ProbeTable()
    if not family:
        return table
    atlas = family[0].grid.atlas
    limit = collar_length if collar_length is not None else config.COLLAR_L
    ha, hb = word_to_isometry(a, atlas), word_to_isometry(b, atlas)
    crossings = sigma_intersection(ha, hb, atlas)
    if crossings < 1:
        raise LabInputError(f"Classes {a.label()} and {b.label()} do not intersect")
    if translation_length(hb) > limit:
        raise LabInputError(f"sigma-length of {b.label()} exceeds the collar limit {limit}")
    worst = 0.0
    for m in family:
        la, lb = shorten_loop(a, m).length, shorten_loop(b, m).length
        ratio = lb / la
        worst = max(worst, ratio)
        table.rows.append(TableRow(key=m.label, values={"metric": m.label, "alpha": la, "beta": lb, "ratio": ratio}))
    table.summary["D_L"] = worst
    table.summary["intersection"] = float(crossings)
    return table
