# ============================================================================
# geodesic_engine/systole.py - Shortest closed g-geodesic with a certificate
# ============================================================================
# Candidates are the surface classes of all cyclically reduced words up to
# max_word_len. The minimum is certified when every class missing from the
# candidate list is sigma-longer than min / ratio_min, ratio_min being the
# smallest l_g / l_sigma measured on the candidates. Missing classes are
# searched among deck transformations of translation length below that
# threshold: each such class has a lift whose axis meets the octagon, so
# the element moves 0 by at most its length plus twice the circumradius.
# ============================================================================

import logging
import math
from typing import List, Set, Tuple

import numpy as np

from models import LabInputError, SystoleResult
from surface_atlas.octagon import FundamentalOctagon
from surface_atlas.classes import GeodesicClass, chord_crossings, classes_up_to_length, distinct_geodesic_classes
from surface_atlas.words import enumerate_classes
from conformal_field.field import MetricField
from geodesic_engine.loops import ClosedGeodesic, shorten_loop
from geodesic_engine.workers import parallel_map

logger = logging.getLogger(__name__)

SEARCH_CAP = 9.0                 # longest sigma-length searched for missing classes
SIMPLE_WORD_LIMIT = 8
TIE_TOLERANCE = 1e-9


def candidate_classes(atlas: FundamentalOctagon, max_word_len: int) -> List[GeodesicClass]:
    if max_word_len < 1:
        raise LabInputError("max_word_len must be at least 1")
    return distinct_geodesic_classes(enumerate_classes(atlas, max_word_len), atlas)


def shortest_missing_class(atlas: FundamentalOctagon, known: Set[Tuple], search_length: float) -> float:
    """sigma-length of the shortest class not in `known`, or inf if none is at most search_length"""
    for cls in classes_up_to_length(atlas, search_length):
        if cls.decomposition.fingerprint not in known:
            return cls.length
    return math.inf


def systole_search(m: MetricField, max_word_len: int) -> Tuple[SystoleResult, List[ClosedGeodesic]]:
    if not m.grid.is_surface:
        raise LabInputError("Systole is defined for surface fields")
    atlas = m.grid.atlas
    classes = candidate_classes(atlas, max_word_len)
    geodesics = parallel_map(lambda c: shorten_loop(c.word, m), classes)
    ratios = [g.length / c.length for g, c in zip(geodesics, classes)]
    best = int(np.argmin([g.length for g in geodesics]))
    length = geodesics[best].length
    ratio_min = float(min(ratios))

    needed = length / ratio_min
    if needed > SEARCH_CAP:
        certified = False
        logger.warning(f"⚠️ Certificate needs classes up to sigma-length {needed:.3f}, beyond the search cap")
    else:
        known = {c.decomposition.fingerprint for c in classes}
        missing = shortest_missing_class(atlas, known, needed)
        certified = missing >= needed * (1.0 - TIE_TOLERANCE)
        if not certified:
            logger.warning(f"⚠️ Systole of {m.label} uncertified: a class of sigma-length {missing:.5f} "
                           f"lies beyond word length {max_word_len}")

    simple = [(g.length, c) for g, c in zip(geodesics, classes)
              if len(c.word) <= SIMPLE_WORD_LIMIT and chord_crossings(c.decomposition) == 0]
    simple_length, simple_word = (None, None)
    if simple:
        simple_length, cls = min(simple, key=lambda item: item[0])
        simple_word = list(cls.word.letters)

    result = SystoleResult(length=length, word=list(classes[best].word.letters), certified=certified,
                           simple_length=simple_length, simple_word=simple_word, ratio_min=ratio_min,
                           candidates=len(classes))
    logger.info(f"✅ Systole of {m.label}: {length:.6f} ({classes[best].word.label()}), "
                f"{'certified' if certified else 'uncertified'}, {len(classes)} classes")
    return result, geodesics


def systole(m: MetricField, max_word_len: int) -> SystoleResult:
    result, _ = systole_search(m, max_word_len)
    return result
