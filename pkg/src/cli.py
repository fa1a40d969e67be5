"""
Command-line entry point: python -m src.cli <subcommand> ...

Subcommands: check, map, generate, link, simulate, metrics, evolve.
Exit status: 0 success, 1 errors reported, 2 usage error, 3 internal error.
"""

from enum import IntEnum
from typing import List, Optional
import argparse
import logging
import os
import sys

from src.codegen import (
    diff_frameworks,
    generate_architecture_framework,
    manifest_to_json,
    render_evolution_report,
)
from src.config import Config, validate_config
from src.errors import ParseError, ToolchainError
from src.linker import read_packages, write_packages
from src.mapper import load_mapping, map_services, mapping_to_json
from src.metrics import render_metrics
from src.parsers import parse_architecture, parse_vocabulary
from src.pipeline import (
    SystemSpec,
    bundle_metrics,
    build,
    check,
    generate,
    load_system,
    read_text,
    write_text,
)
from src.printer import print_deployment
from src.runtime import load, run_scenario
from src.scenario import load_scenario
from src.validator import has_errors, render_diagnostics

logger = logging.getLogger(__name__)

USAGE_CODES = {"E-UNKNOWN-BUNDLE", "E-MISSING-FILE"}


class ExitStatus(IntEnum):
    OK = 0
    ERRORS = 1
    USAGE = 2
    INTERNAL = 3


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return value


def _checked_system(args) -> Optional[SystemSpec]:
    """Parses and validates the three files; prints diagnostics, None on errors."""
    system = load_system(args.vocabulary, args.architecture, args.deployment)
    diagnostics = check(system)
    for d in diagnostics:
        if not d.is_error:
            logger.warning(d.render())
    if has_errors(diagnostics):
        sys.stdout.write(render_diagnostics(diagnostics))
        return None
    return system


# ─── subcommands ──────────────────────────────────────────────────────

def cmd_check(args) -> ExitStatus:
    system = load_system(args.vocabulary, args.architecture, args.deployment)
    diagnostics = check(system)
    sys.stdout.write(render_diagnostics(diagnostics))
    return ExitStatus.ERRORS if has_errors(diagnostics) else ExitStatus.OK


def cmd_map(args) -> ExitStatus:
    system = _checked_system(args)
    if system is None:
        return ExitStatus.ERRORS
    mapping = map_services(system.architecture, system.deployment, args.seed)
    write_text(args.out, mapping_to_json(mapping))
    return ExitStatus.OK


def cmd_generate(args) -> ExitStatus:
    system = _checked_system(args)
    if system is None:
        return ExitStatus.ERRORS
    framework, drivers, scaffolds = generate(system, args.templates)
    write_text(os.path.join(args.out, "architecture-framework.json"), manifest_to_json(framework))
    write_text(os.path.join(args.out, "vocabulary-framework.json"), manifest_to_json(drivers))
    for path, text in scaffolds:
        write_text(os.path.join(args.out, "scaffolds", path), text)
    logger.info(f"Wrote frameworks and {len(scaffolds)} scaffolds to {args.out}")
    return ExitStatus.OK


def cmd_link(args) -> ExitStatus:
    system = _checked_system(args)
    if system is None:
        return ExitStatus.ERRORS
    mapping = load_mapping(read_text(args.mapping), system.architecture)
    artifacts = build(system, mapping.seed, mapping=mapping)
    write_packages(artifacts.packages, args.out)
    return ExitStatus.OK


def cmd_simulate(args) -> ExitStatus:
    from src.bundles import get_bundle

    bundle = get_bundle(args.app)
    packages = read_packages(args.packages)
    scenario = load_scenario(args.scenario)
    sim = load(packages, bundle.registry())
    trace = run_scenario(sim, scenario, args.seed)
    write_text(args.trace, trace.render())
    return ExitStatus.OK


def cmd_metrics(args) -> ExitStatus:
    from src.bundles import get_bundle

    bundle = get_bundle(args.bundle)
    row = bundle_metrics(bundle, args.devices, args.seed)
    sys.stdout.write(render_metrics(row, args.devices or 0))
    return ExitStatus.OK


def cmd_evolve(args) -> ExitStatus:
    vocab = parse_vocabulary(read_text(args.vocabulary), args.vocabulary)
    old = generate_architecture_framework(parse_architecture(read_text(args.old), args.old), vocab)
    new = generate_architecture_framework(parse_architecture(read_text(args.new), args.new), vocab)
    registered = set()
    if args.app:
        from src.bundles import get_bundle
        registered = set(get_bundle(args.app).logic().handlers)
    sys.stdout.write(render_evolution_report(diff_frameworks(old, new, registered)))
    return ExitStatus.OK


def cmd_scale(args) -> ExitStatus:
    from src.bundles import generate_scaled_deployment, get_bundle

    bundle = get_bundle(args.bundle)
    system = load_system(*bundle.spec_paths)
    scaled = generate_scaled_deployment(system.deployment, args.devices, args.seed)
    write_text(args.out, print_deployment(scaled))
    return ExitStatus.OK


# ─── argument parsing ─────────────────────────────────────────────────

def _spec_files(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("vocabulary", help="vocabulary specification (.svl)")
    parser.add_argument("architecture", help="architecture specification (.sal)")
    parser.add_argument("deployment", help="deployment specification (.sdl)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.cli", description="IoT macroprogramming toolchain")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a vocabulary/architecture/deployment triple")
    _spec_files(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("map", help="map service instances onto devices")
    _spec_files(p)
    p.add_argument("--seed", type=_u64, default=Config.DEFAULT_SEED)
    p.add_argument("--out", required=True, help="mapping JSON to write")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("generate", help="generate framework manifests and scaffolds")
    _spec_files(p)
    p.add_argument("--templates", default="neutral", help="template set under TEMPLATE_DIR")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("link", help="link per-device packages")
    _spec_files(p)
    p.add_argument("--mapping", required=True, help="mapping JSON written by 'map'")
    p.add_argument("--out", required=True, help="package directory")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("simulate", help="run a scenario over linked packages")
    p.add_argument("--packages", required=True, help="package directory written by 'link'")
    p.add_argument("--app", required=True, help="bundle providing handlers and drivers")
    p.add_argument("--scenario", required=True, help="scenario file (.scn)")
    p.add_argument("--trace", required=True, help="trace file to write")
    p.add_argument("--seed", type=_u64, default=Config.DEFAULT_SEED)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="generated versus handwritten line counts")
    p.add_argument("--bundle", required=True)
    p.add_argument("--devices", type=int, default=None, help="scale the deployment to this many devices")
    p.add_argument("--seed", type=_u64, default=Config.DEFAULT_SEED)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("evolve", help="report handler changes between two architectures")
    p.add_argument("old", help="previous architecture (.sal)")
    p.add_argument("new", help="new architecture (.sal)")
    p.add_argument("--vocabulary", required=True, help="vocabulary both architectures use")
    p.add_argument("--app", default=None, help="bundle whose registered handlers count as existing logic")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("scale", help="write a generated N-device deployment for a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--devices", type=int, required=True)
    p.add_argument("--seed", type=_u64, default=Config.DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scale)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ExitStatus.OK if e.code == 0 else ExitStatus.USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else Config.LOG_LEVEL,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        validate_config()
        return args.func(args)
    except ParseError as e:
        sys.stdout.write(f"{e}\n")
        return ExitStatus.ERRORS
    except ToolchainError as e:
        sys.stderr.write(f"{e}\n")
        return ExitStatus.USAGE if e.code in USAGE_CODES else ExitStatus.ERRORS
    except ValueError as e:
        sys.stderr.write(f"{e}\n")
        return ExitStatus.USAGE
    except Exception as e:
        logger.error(f"Internal error: {e}", exc_info=True)
        return ExitStatus.INTERNAL


if __name__ == "__main__":
    sys.exit(main())
