# ============================================================================
# lab_cli/bundle.py - Summary report from the stage artifacts
# ============================================================================
# Reads reports/systole.json and reports/entropy.json (required) plus
# bounds.json and gauss_bonnet.json when present, and writes
#   reports/summary.json
#   reports/series_h_metr.csv           k vs h_metr
#   reports/series_counting.csv         L vs ln N(L)
#   reports/series_length_ratios.csv    class vs l_g / l_sigma
# Nothing time-dependent is written, so equal inputs give equal bytes.
# ============================================================================

import logging
import math
from typing import Dict, List

from lab_cli.artifacts import ArtifactTree, read_json, write_csv, write_json
from lab_cli.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

REQUIRED = {"systole.json": "systole", "entropy.json": "entropy"}
OPTIONAL = ("bounds.json", "gauss_bonnet.json")


def _strictly_decreasing(values: List[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def report_bundle(cfg: ExperimentConfig) -> Dict:
    tree = ArtifactTree.at(cfg.output_dir)
    inputs = [tree.require(tree.report(name), stage) for name, stage in REQUIRED.items()]
    inputs += [tree.report(name) for name in OPTIONAL if tree.report(name).exists()]
    systole_rows = read_json(tree.report("systole.json"))["rows"]
    entropy_rows = read_json(tree.report("entropy.json"))["rows"]

    # ---- plot-ready series -------------------------------------------------
    metr_series = sorted(
        ([r["k"], r["metric"], r["h_metr"]["value"], r["h_metr"]["stderr"]] for r in entropy_rows),
        key=lambda row: (row[0] is None, row[0] or 0, row[1]),
    )
    counting_series = []
    for r in entropy_rows:
        if r.get("h_top"):
            for rung in r["h_top"]["details"]["ladder"]:
                counting_series.append([r["metric"], rung["L"], math.log(rung["N"]) if rung["N"] else None])
    ratio_series = [[r["metric"], q["word"], q["sigma"], q["g"], q["ratio"]]
                    for r in systole_rows for q in r["ratios"]]

    outputs = [
        (tree.report("series_h_metr.csv"), ["k", "metric", "h_metr", "stderr"], metr_series),
        (tree.report("series_counting.csv"), ["metric", "L", "ln_N"], counting_series),
        (tree.report("series_length_ratios.csv"), ["metric", "word", "sigma", "g", "ratio"], ratio_series),
    ]
    written = []
    for path, header, rows in outputs:
        digest = write_csv(path, header, rows)
        written.append({"file": str(path.relative_to(tree.root)), "sha256": digest})

    # ---- checks ------------------------------------------------------------
    by_k = [row[2] for row in metr_series if row[0] is not None]
    checks = {
        "h_metr_decreasing_in_k": _strictly_decreasing(by_k) if len(by_k) >= 2 else None,
        "h_metr_halved": by_k[-1] < 0.5 * by_k[0] if len(by_k) >= 2 else None,
        "entropy_order_passed": [r["order"]["passed"] for r in entropy_rows if r.get("order")],
        "systole_certified": [r["certified"] for r in systole_rows],
    }
    summary = {
        "config": cfg.dict(),
        "inputs": tree.digests(inputs),
        "files": written,
        "systole": [{"metric": r["metric"], "k": r["k"], "length": r["length"], "word": r["word"],
                     "certified": r["certified"]} for r in systole_rows],
        "entropy": [{"metric": r["metric"], "k": r["k"], "h_metr": r["h_metr"]["value"],
                     "stderr": r["h_metr"]["stderr"],
                     "h_top": r["h_top"]["value"] if r.get("h_top") else None} for r in entropy_rows],
        "checks": checks,
    }
    if tree.report("bounds.json").exists():
        bound = read_json(tree.report("bounds.json"))["bound"]
        summary["bound"] = {"theorem": bound["theorem"], "ln_C": bound["ln_C"], "C": bound["C"]}
    write_json(tree.report("summary.json"), summary)
    logger.info(f"✅ Report bundle written: {len(systole_rows)} systole rows, {len(entropy_rows)} entropy rows")
    return summary
