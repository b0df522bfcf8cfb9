# ============================================================================
# lab_cli/app.py - Argument parsing and dispatch
# ============================================================================
# Exit codes: 0 success, 1 lab error, 2 verification failure, 64 usage.

import argparse
import logging
import sys
from typing import List, Optional

from models import LabError, VerificationFailure
from lab_cli.artifacts import ArtifactTree
from lab_cli.commands import COMMANDS
from lab_cli.experiment import FAMILIES, ExperimentConfig, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFICATION = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config (key = value)")
    parser.add_argument("--output", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed for every stochastic stage")
    parser.add_argument("--cells", type=int, help="grid cells across the octagon")


def _family_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", "--metric", dest="family", choices=FAMILIES)
    parser.add_argument("--kmax", type=int, help="smoothing indices 2, 4, ... up to kmax")
    parser.add_argument("--max-word-len", dest="max_word_len", type=int)


def build_parser() -> LabArgumentParser:
    parser = LabArgumentParser(prog="bolza-lab", description="Conformal-geometry lab on the Bolza surface")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("atlas", help="write atlas.json")
    _common(p)

    metric = sub.add_parser("metric", help="metric fields")
    metric_sub = metric.add_subparsers(dest="action", required=True)
    p = metric_sub.add_parser("build", help="build and save the configured family")
    _common(p)
    _family_flags(p)

    for name, text in (("curvature", "curvature table"), ("gauss-bonnet", "Gauss-Bonnet defects"),
                       ("systole", "systoles with certificates")):
        p = sub.add_parser(name, help=text)
        _common(p)
        _family_flags(p)

    p = sub.add_parser("modulus", help="Dirichlet modulus of an annulus")
    _common(p)
    p.add_argument("--annulus", choices=("flat-cylinder", "round", "collar"), default="flat-cylinder")
    p.add_argument("--c", type=float, default=1.0, help="cylinder circumference")
    p.add_argument("--H", type=float, default=1.0, help="cylinder height")
    p.add_argument("--r1", type=float, default=0.3)
    p.add_argument("--r2", type=float, default=0.9)
    p.add_argument("--word", default="0", help="collar core word, e.g. 0 or 0,3")
    p.add_argument("--width", type=float, help="collar half-width")
    p.add_argument("--estimate-E", dest="estimate_E", action="store_true")

    p = sub.add_parser("entropy", help="metric and topological entropy")
    _common(p)
    _family_flags(p)
    p.add_argument("--n", type=int, help="Liouville samples")
    p.add_argument("--T", type=float, help="integration horizon")
    p.add_argument("--L", type=float, help="counting length")
    p.add_argument("--dt", type=float, help="geodesic integration step")
    p.add_argument("--skip-counting", dest="skip_counting", action="store_true")

    p = sub.add_parser("bounds", help="explicit systole constant")
    _common(p)
    p.add_argument("--chi", type=int, default=-2)
    p.add_argument("--A", type=float, default=None)
    p.add_argument("--E", type=float, default=1.0277)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--Cpos", type=float, default=0.0)
    p.add_argument("--C2", type=float, default=0.0)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--theorem", choices=("nonpositive", "nofocal"), default="nonpositive")
    p.add_argument("--E-provenance", dest="E_provenance", default="supplied")

    p = sub.add_parser("verify", help="systole bound against measured systoles")
    _common(p)
    _family_flags(p)
    p.add_argument("--E", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--theorem", choices=("nonpositive", "nofocal"), default="nonpositive")

    p = sub.add_parser("report", help="summary bundle from stage artifacts")
    _common(p)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    updates = {}
    if getattr(args, "output", None):
        updates["output_dir"] = args.output
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "family", None):
        updates["family"] = args.family
    if getattr(args, "kmax", None):
        updates["ks"] = [2 ** i for i in range(1, args.kmax.bit_length()) if 2 ** i <= args.kmax]
    if getattr(args, "max_word_len", None) is not None:
        updates["max_word_len"] = args.max_word_len
    if getattr(args, "n", None):
        updates["entropy_n"] = args.n
    if getattr(args, "T", None):
        updates["entropy_T"] = args.T
    if getattr(args, "command", None) != "modulus" and getattr(args, "cells", None):
        updates["cells"] = args.cells
    # revalidate overrides through the model
    return ExperimentConfig(**dict(cfg.dict(), **updates))


def cli_run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        print(parser.format_usage(), end="", file=sys.stderr)
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    name = "metric build" if args.command == "metric" else args.command
    try:
        cfg = resolve_config(args)
        if name == "bounds" and args.A is None:
            args.A = cfg.area
        tree = ArtifactTree.at(cfg.output_dir)
        logger.info(f"Running '{name}' into {tree.root}")
        return COMMANDS[name](args, cfg, tree)
    except VerificationFailure as e:
        logger.error(f"❌ Verification failed: {e}")
        return EXIT_VERIFICATION
    except LabError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_ERROR
    except ValueError as e:
        # pydantic validation of overrides
        logger.error(f"❌ Invalid configuration: {e}")
        return EXIT_ERROR
