# ============================================================================
# lab_cli/commands.py - One handler per subcommand
# ============================================================================
# Handlers take (args, cfg, tree), write their artifacts under the output
# tree, print a JSON summary and return an exit code. Failed checks raise
# VerificationFailure; the dispatcher maps it to exit code 2.

import json
import logging
import math
from typing import List

import config
from models import BoundInputs, BoundTheorem, LabInputError, VerificationFailure
from surface_atlas.octagon import build_bolza_atlas
from surface_atlas.isometry import translation_length
from surface_atlas.words import GroupWord, word_to_isometry
from conformal_field.families import flat_cone_field, smoothing_profile
from conformal_field.field import gauss_bonnet_defect, gaussian_curvature
from conformal_field.storage import file_digest
from geodesic_engine.loops import save_geodesic
from geodesic_engine.systole import systole_search
from conformal_modulus.annulus import collar_annulus, collar_modulus, flat_cylinder, round_annulus
from conformal_modulus.solver import modulus_dirichlet, modulus_flat
from conformal_modulus.bounds import estimate_E
from entropy_lab.riccati import ENTROPY_DT, metric_entropy_estimate
from entropy_lab.counting import topological_entropy_counting
from entropy_lab.report import order_from_estimates
from bounds_engine.constants import bound_for, entropy_bound_report
from bounds_engine.verification import require_all_pass, verify_systole_bound
from lab_cli.artifacts import ArtifactTree, slug, write_csv, write_json
from lab_cli.bundle import report_bundle
from lab_cli.corpus import build_family, family_for, load_atlas, save_family
from lab_cli.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

GB_TOLERANCE = 1e-2 * 4.0 * math.pi


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _parse_word(text: str) -> GroupWord:
    try:
        return GroupWord.of(int(k) for k in text.replace("-", ",").split(",") if k.strip())
    except ValueError:
        raise LabInputError(f"Cannot parse word {text!r}; expected generator indices like 0,3,6")


# ============================================================================
# ATLAS / METRICS
# ============================================================================

def cmd_atlas(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = build_bolza_atlas()
    tree.root.mkdir(parents=True, exist_ok=True)
    tree.atlas.write_text(atlas.to_json())
    _emit({"atlas": str(tree.atlas), "sha256": file_digest(tree.atlas), "chi": atlas.chi,
           "area": atlas.area, "systole": atlas.systole})
    return 0


def cmd_metric_build(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    members = build_family(cfg, atlas)
    digest = save_family(members, cfg, tree)
    _emit({"family": cfg.family, "metrics": [m.name for m in members], "index_sha256": digest})
    return 0


def cmd_curvature(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    rows = []
    for member in family_for(cfg, tree, atlas):
        K = gaussian_curvature(member.metric)
        positive, negative = member.metric.curvature_masses()
        rows.append([member.name, member.k, K.minimum, K.maximum, K.total_mass, positive, negative,
                     member.metric.cone_atom])
    header = ["metric", "k", "K_min", "K_max", "mass", "positive_mass", "negative_mass", "cone_atom"]
    digest = write_csv(tree.report("curvature.csv"), header, rows)
    _emit({"rows": [dict(zip(header, r)) for r in rows], "sha256": digest})
    if cfg.family == "smoothing":
        profile = smoothing_profile(flat_cone_field(atlas, cfg.cells, cfg.area), cfg.ks)
        columns = list(profile[0].values)
        write_csv(tree.report("smoothing_profile.csv"), columns, [[row.values[c] for c in columns] for row in profile])
    return 0


def cmd_gauss_bonnet(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    rows = []
    for member in family_for(cfg, tree, atlas):
        defect = gauss_bonnet_defect(member.metric)
        rows.append({"metric": member.name, "k": member.k, "defect": defect,
                     "passed": abs(defect) < GB_TOLERANCE})
    write_json(tree.report("gauss_bonnet.json"), {"tolerance": GB_TOLERANCE, "rows": rows})
    _emit(rows)
    failed = [r["metric"] for r in rows if not r["passed"]]
    if failed:
        raise VerificationFailure(f"Gauss-Bonnet defect above {GB_TOLERANCE:.4f} for {', '.join(failed)}")
    return 0


# ============================================================================
# GEODESICS / MODULI
# ============================================================================

def cmd_systole(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    rows = []
    for member in family_for(cfg, tree, atlas):
        result, geodesics = systole_search(member.metric, cfg.max_word_len)
        shortest = min(geodesics, key=lambda g: g.length)
        save_geodesic(shortest, tree.geodesics / f"{slug(member.name)}-{shortest.word.label()}")
        ratios = []
        for g in geodesics:
            sigma = translation_length(word_to_isometry(g.word, atlas))
            ratios.append({"word": g.word.label(), "sigma": sigma, "g": g.length, "ratio": g.length / sigma})
        rows.append(dict(result.dict(), metric=member.name, k=member.k, ratios=ratios))
    digest = write_json(tree.report("systole.json"), {"max_word_len": cfg.max_word_len, "rows": rows})
    _emit({"rows": [{k: r[k] for k in ("metric", "length", "word", "certified")} for r in rows],
           "sha256": digest})
    return 0


def cmd_modulus(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    if args.annulus == "flat-cylinder":
        region = flat_cylinder(args.c, args.H, args.cells or 64)
        reference = modulus_flat(args.H, args.c).value
    elif args.annulus == "round":
        region = round_annulus(args.r1, args.r2, args.cells or 200)
        reference = math.log(args.r2 / args.r1) / (2.0 * math.pi)
    else:
        region = collar_annulus(_parse_word(args.word), atlas, width=args.width, cells=args.cells or cfg.cells)
        reference = collar_modulus(region.params["width"], region.params["length"])
    estimate = modulus_dirichlet(region, atlas)
    payload = {"annulus": region.to_dict(), "estimate": estimate.dict(), "closed_form": reference,
               "relative_error": abs(estimate.value - reference) / reference}
    if args.estimate_E:
        interval = estimate_E(atlas, cells=cfg.cells)
        payload["E_interval"] = {"lower": interval.lower, "upper": interval.upper}
    payload["annulus"].pop("inner")
    payload["annulus"].pop("outer")
    write_json(tree.report("modulus.json"), payload)
    _emit(payload)
    return 0


# ============================================================================
# ENTROPY
# ============================================================================

def cmd_entropy(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    dt = ENTROPY_DT if args.dt is None else args.dt
    if dt <= 0:
        raise LabInputError("--dt must be positive")
    rows, ladder_rows = [], []
    for member in family_for(cfg, tree, atlas):
        m = member.metric
        metr = metric_entropy_estimate(m, cfg.entropy_n, cfg.entropy_T, seed=cfg.seed, dt=dt)
        row = {"metric": member.name, "k": member.k, "h_metr": metr.dict(), "h_top": None, "order": None}
        if not args.skip_counting:
            L = cfg.counting_L * math.sqrt(m.area() / (4.0 * math.pi)) if args.L is None else args.L
            top = topological_entropy_counting(m, L)
            row["h_top"] = top.dict()
            row["order"] = order_from_estimates(m, metr, top).dict()
            for rung in top.details["ladder"]:
                ladder_rows.append([member.name, rung["L"], rung["N"],
                                    math.log(rung["N"]) if rung["N"] else None, rung["li"]])
        rows.append(row)
    write_json(tree.report("entropy.json"), {"n": cfg.entropy_n, "T": cfg.entropy_T, "dt": dt, "seed": cfg.seed,
                                             "rows": rows})
    write_csv(tree.report("entropy_ladder.csv"), ["metric", "L", "N", "ln_N", "h_li"], ladder_rows)
    _emit([{"metric": r["metric"], "h_metr": r["h_metr"]["value"],
            "h_top": r["h_top"]["value"] if r["h_top"] else None} for r in rows])
    return 0


# ============================================================================
# BOUNDS / VERIFICATION
# ============================================================================

def _bound_inputs(args) -> BoundInputs:
    try:
        return BoundInputs(chi=args.chi, A=args.A, E=args.E, eps=args.eps, Cpos=args.Cpos, C2=args.C2, s=args.s)
    except ValueError as e:
        raise LabInputError(f"Invalid bound inputs: {e}")


def cmd_bounds(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    b = _bound_inputs(args)
    theorem = BoundTheorem(args.theorem)
    report = bound_for(b, theorem, E_provenance=args.E_provenance)
    entropy = entropy_bound_report(b, config.SABOURAU_C, theorem)
    payload = {"bound": report.dict(), "entropy": entropy.dict(), "inputs": b.dict()}
    write_json(tree.report("bounds.json"), payload)
    _emit(payload)
    return 0


def cmd_verify(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    atlas = load_atlas(tree)
    members = family_for(cfg, tree, atlas)
    theorem = BoundTheorem(args.theorem)
    # upper endpoint of the E(sigma) interval, pi / sys(sigma)
    E = args.E if args.E is not None else math.pi / atlas.systole
    b = BoundInputs(chi=atlas.chi, A=cfg.area, E=E, eps=args.eps)
    rows = verify_systole_bound([m.metric for m in members], b, theorem, cfg.max_word_len)
    header = ["metric", "systole", "C", "margin", "passed", "certified", "excluded", "reason"]
    write_csv(tree.report("verify.csv"), header, [[getattr(r, h) for h in header] for r in rows])
    _emit([r.dict() for r in rows])
    require_all_pass(rows)
    return 0


def cmd_report(args, cfg: ExperimentConfig, tree: ArtifactTree) -> int:
    summary = report_bundle(cfg)
    _emit({"summary": str(tree.report("summary.json")), "files": summary["files"]})
    return 0


COMMANDS = {
    "atlas": cmd_atlas,
    "metric build": cmd_metric_build,
    "curvature": cmd_curvature,
    "gauss-bonnet": cmd_gauss_bonnet,
    "systole": cmd_systole,
    "modulus": cmd_modulus,
    "entropy": cmd_entropy,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "report": cmd_report,
}


def command_names() -> List[str]:
    return list(COMMANDS)
