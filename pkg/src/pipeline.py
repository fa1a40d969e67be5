"""
End-to-end pipeline glue shared by the CLI and the HTTP front end.

parse -> check -> map -> generate frameworks -> render scaffolds -> link,
plus the metrics run over a bundle (optionally on a scaled deployment).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging
import os
import tempfile

from src.codegen import (
    DriverManifest,
    FrameworkManifest,
    generate_architecture_framework,
    generate_vocabulary_framework,
    manifest_to_json,
)
from src.errors import ToolchainError
from src.linker import link, package_filename, package_to_json
from src.mapper import map_services, mapping_to_json
from src.metrics import MetricsRow, count_generated_vs_handwritten
from src.model import Architecture, Deployment, DevicePackage, MappingOutput, Vocabulary
from src.parsers import parse_architecture, parse_deployment, parse_vocabulary
from src.printer import print_deployment
from src.templates import render_scaffolds
from src.validator import Diagnostic, check_system

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemSpec:
    vocabulary: Vocabulary
    architecture: Architecture
    deployment: Deployment


@dataclass
class BuildArtifacts:
    mapping: MappingOutput
    framework: FrameworkManifest
    drivers: DriverManifest
    scaffolds: List[Tuple[str, str]] = field(default_factory=list)
    packages: List[DevicePackage] = field(default_factory=list)


def read_text(path: str) -> str:
    if not os.path.isfile(path):
        raise ToolchainError("E-MISSING-FILE", f"no such file: {path}")
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def write_text(path: str, text: str) -> None:
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as e:
        raise ToolchainError("E-IO", f"cannot write {path}: {e}") from e


def parse_system(vocabulary_text: str, architecture_text: str, deployment_text: str,
                 files: Tuple[str, str, str] = ("<vocabulary>", "<architecture>", "<deployment>")) -> SystemSpec:
    return SystemSpec(
        parse_vocabulary(vocabulary_text, files[0]),
        parse_architecture(architecture_text, files[1]),
        parse_deployment(deployment_text, files[2]),
    )


def load_system(vocabulary_path: str, architecture_path: str, deployment_path: str) -> SystemSpec:
    paths = (vocabulary_path, architecture_path, deployment_path)
    system = parse_system(*(read_text(p) for p in paths), files=paths)
    logger.info(f"Parsed {system.vocabulary.name}, {system.architecture.name}, {system.deployment.name}")
    return system


def check(system: SystemSpec) -> List[Diagnostic]:
    return check_system(system.vocabulary, system.architecture, system.deployment)


def platforms(dep: Deployment) -> Tuple[str, ...]:
    return tuple(sorted({d.platform_type for d in dep.devices}))


def generate(system: SystemSpec, template_set: str = "neutral"):
    framework = generate_architecture_framework(system.architecture, system.vocabulary)
    drivers = generate_vocabulary_framework(system.vocabulary, platforms(system.deployment))
    scaffolds = render_scaffolds(framework, drivers, template_set)
    return framework, drivers, scaffolds


def build(system: SystemSpec, seed: int = 0, template_set: str = "neutral",
          mapping: Optional[MappingOutput] = None) -> BuildArtifacts:
    mapping = mapping or map_services(system.architecture, system.deployment, seed)
    framework, drivers, scaffolds = generate(system, template_set)
    packages = link(system.architecture, system.deployment, system.vocabulary, mapping, (framework, drivers))
    return BuildArtifacts(mapping, framework, drivers, scaffolds, packages)


def generated_files(artifacts: BuildArtifacts) -> Dict[str, List[Tuple[str, str]]]:
    """Every generated artifact by category, as (relative path, text)."""
    return {
        "scaffolds": list(artifacts.scaffolds),
        "manifests": [
            ("architecture-framework.json", manifest_to_json(artifacts.framework)),
            ("vocabulary-framework.json", manifest_to_json(artifacts.drivers)),
        ],
        "packages": [(package_filename(p), package_to_json(p)) for p in artifacts.packages],
        "mapping": [("mapping.json", mapping_to_json(artifacts.mapping))],
    }


def bundle_metrics(bundle, devices: Optional[int] = None, seed: int = 0) -> MetricsRow:
    """Line counts for a bundle, on its own deployment or a scaled one of `devices` devices."""
    from src.bundles import generate_scaled_deployment

    system = load_system(*bundle.spec_paths)
    with tempfile.TemporaryDirectory() as scratch:
        deployment_path = bundle.deployment_path
        if devices is not None:
            scaled = generate_scaled_deployment(system.deployment, devices, seed)
            system = SystemSpec(system.vocabulary, system.architecture, scaled)
            deployment_path = os.path.join(scratch, f"{scaled.name}.sdl")
            write_text(deployment_path, print_deployment(scaled))
        artifacts = build(system, seed)
        return count_generated_vs_handwritten(
            generated_files(artifacts),
            [bundle.vocabulary_path, bundle.architecture_path, deployment_path],
            bundle.handler_sources,
        )
