# ============================================================================
# lab_cli/corpus.py - Metric families named by an ExperimentConfig
# ============================================================================

import logging
from dataclasses import dataclass
from typing import List, Optional

from surface_atlas.octagon import FundamentalOctagon, build_bolza_atlas
from conformal_field.field import MetricField, normalize_area
from conformal_field.families import (
    eps_curved_field,
    flat_cone_field,
    hyperbolic_field,
    random_bump_field,
    smoothing_corpus,
)
from conformal_field.storage import load_field, save_field
from lab_cli.artifacts import ArtifactTree, read_json, slug, write_json
from lab_cli.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


@dataclass
class FamilyMember:
    name: str
    metric: MetricField
    k: Optional[int] = None


def load_atlas(tree: ArtifactTree) -> FundamentalOctagon:
    if tree.atlas.exists():
        return FundamentalOctagon.from_json(tree.atlas.read_text())
    return build_bolza_atlas()


def build_family(cfg: ExperimentConfig, atlas: FundamentalOctagon) -> List[FamilyMember]:
    family, cells, A = cfg.family, cfg.cells, cfg.area
    if family == "hyperbolic":
        members = [FamilyMember("hyperbolic", normalize_area(hyperbolic_field(atlas, cells), A))]
    elif family == "flat-cone":
        members = [FamilyMember("flat-cone", flat_cone_field(atlas, cells, A))]
    elif family == "eps-curved":
        members = [FamilyMember(f"eps-curved-{cfg.eps:g}", eps_curved_field(atlas, cfg.eps, cells, A))]
    elif family == "smoothing":
        ks = sorted(cfg.ks)
        members = [FamilyMember(f"smoothing-k{k}", m, k) for k, m in zip(ks, smoothing_corpus(atlas, ks, cells, A))]
    else:
        members = [FamilyMember(f"bumps-{cfg.seed + i}",
                                normalize_area(random_bump_field(atlas, cfg.seed + i, cells), A))
                   for i in range(cfg.bumps)]
    logger.info(f"✅ Built family {family}: {len(members)} metrics")
    return members


def _index_key(cfg: ExperimentConfig) -> dict:
    return {"family": cfg.family, "cells": cfg.cells, "area": cfg.area, "ks": sorted(cfg.ks),
            "eps": cfg.eps, "bumps": cfg.bumps, "seed": cfg.seed}


def save_family(members: List[FamilyMember], cfg: ExperimentConfig, tree: ArtifactTree) -> str:
    entries = []
    for member in members:
        path = save_field(member.metric, tree.metrics / slug(member.name))
        entries.append({"name": member.name, "k": member.k, "file": path.name})
    return write_json(tree.metrics_index, {"config": _index_key(cfg), "members": entries})


def family_for(cfg: ExperimentConfig, tree: ArtifactTree, atlas: FundamentalOctagon) -> List[FamilyMember]:
    """Saved metrics when metrics/index.json matches the config, freshly built ones otherwise"""
    if tree.metrics_index.exists():
        index = read_json(tree.metrics_index)
        if index.get("config") == _index_key(cfg):
            return [FamilyMember(e["name"], load_field(tree.metrics / e["file"], atlas), e["k"])
                    for e in index["members"]]
        logger.info("metrics/index.json was built for another family; rebuilding")
    return build_family(cfg, atlas)
