"""
Shipped example applications, registered by name.

Each bundle directory holds vocabulary.svl, architecture.sal,
deployment.sdl, logic.py (handlers), drivers.py (simulated drivers) and
scenarios/*.scn.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple
import logging
import os

from src.errors import ToolchainError
from src.mapper import XorShift64Star
from src.model import Deployment, DeviceDecl, RegionPath
from src.runtime import HandlerRegistry

logger = logging.getLogger(__name__)

BUNDLE_ROOT = os.path.dirname(__file__)
GRID = (2, 3, 4)


@dataclass(frozen=True)
class ExampleBundle:
    name: str
    directory: str
    logic: Callable[[], HandlerRegistry]
    drivers: Callable[[], HandlerRegistry]

    def path(self, filename: str) -> str:
        return os.path.join(self.directory, filename)

    @property
    def vocabulary_path(self) -> str:
        return self.path("vocabulary.svl")

    @property
    def architecture_path(self) -> str:
        return self.path("architecture.sal")

    @property
    def deployment_path(self) -> str:
        return self.path("deployment.sdl")

    @property
    def spec_paths(self) -> Tuple[str, str, str]:
        return (self.vocabulary_path, self.architecture_path, self.deployment_path)

    @property
    def handler_sources(self) -> List[str]:
        return [self.path("logic.py")]

    def scenario_path(self, name: str) -> str:
        return os.path.join(self.directory, "scenarios", f"{name}.scn")

    def scenarios(self) -> List[str]:
        folder = os.path.join(self.directory, "scenarios")
        return sorted(f[:-4] for f in os.listdir(folder) if f.endswith(".scn"))

    def registry(self) -> HandlerRegistry:
        return self.logic().merge(self.drivers())


def _smart_building() -> ExampleBundle:
    from src.bundles.smart_building.drivers import smart_building_drivers
    from src.bundles.smart_building.logic import smart_building_logic
    return ExampleBundle("smart-building", os.path.join(BUNDLE_ROOT, "smart_building"),
                         smart_building_logic, smart_building_drivers)


def _fire_detection() -> ExampleBundle:
    from src.bundles.fire_detection.drivers import fire_detection_drivers
    from src.bundles.fire_detection.logic import fire_detection_logic
    return ExampleBundle("fire-detection", os.path.join(BUNDLE_ROOT, "fire_detection"),
                         fire_detection_logic, fire_detection_drivers)


_BUNDLES: Dict[str, Callable[[], ExampleBundle]] = {
    "smart-building": _smart_building,
    "fire-detection": _fire_detection,
}


def bundle_names() -> List[str]:
    return sorted(_BUNDLES)


def get_bundle(name: str) -> ExampleBundle:
    factory = _BUNDLES.get(name)
    if factory is None:
        raise ToolchainError("E-UNKNOWN-BUNDLE", f"unknown bundle '{name}' (known: {', '.join(bundle_names())})")
    return factory()


def generate_scaled_deployment(template: Deployment, n: int, seed: int = 0) -> Deployment:
    """`n` devices round-robin over a 2 x 3 x 4 grid, resources cycled from `template`.

    The seed picks where the resource cycle starts; cell i % 24 is the i-th
    device's region.
    """
    if n < 1:
        raise ValueError("device count must be at least 1")
    labels = template.devices[0].region_path.labels[:len(GRID)]
    cells = []
    for building in range(1, GRID[0] + 1):
        for floor in range(1, GRID[1] + 1):
            for room in range(1, GRID[2] + 1):
                cells.append(RegionPath(tuple(zip(labels, (building, floor, room)))))
    offset = XorShift64Star(seed).below(len(template.devices))
    devices = []
    for i in range(n):
        source = template.devices[(offset + i) % len(template.devices)]
        devices.append(DeviceDecl(
            name=f"Device-{i + 1}",
            region_path=cells[i % len(cells)],
            resources=source.resources,
            platform_type=source.platform_type,
            mobile=source.mobile,
        ))
    logger.info(f"Generated {n}-device deployment from {template.name} (seed={seed})")
    return Deployment(f"{template.name}{n}", template.vocabulary_name, tuple(devices))
