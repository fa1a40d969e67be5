"""
Service-to-device mapping.

Two phases: index every device under each prefix of its region path, then
walk the derived service instances and pick one device per instance from the
devices sharing its partition path, using a seeded, documented PRNG so any
reimplementation reproduces the choice (docs/mapping.md).
"""

from dataclasses import dataclass, field
from typing import Dict, List, Set
import json
import logging

from src.errors import ToolchainError
from src.model import (
    Architecture,
    Assignment,
    Deployment,
    MappingOutput,
    RegionPath,
    ServiceInstance,
    derive_instances,
)

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


class XorShift64Star:
    """xorshift64* seeded through SplitMix64 (so seed 0 is usable)."""

    MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        self.state = self._splitmix64(seed & MASK64) or 1

    @staticmethod
    def _splitmix64(seed: int) -> int:
        z = (seed + 0x9E3779B97F4A7C15) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * self.MULTIPLIER) & MASK64

    def below(self, n: int) -> int:
        """Index in [0, n) from the high 32 bits of the next output."""
        return ((self.next_u64() >> 32) * n) >> 32


@dataclass
class RegionIndex:
    region_map: Dict[str, Set[RegionPath]] = field(default_factory=dict)
    device_list_by_path: Dict[RegionPath, List[str]] = field(default_factory=dict)


def build_region_index(dep: Deployment) -> RegionIndex:
    index = RegionIndex()
    for device in dep.devices:
        path = device.region_path
        for depth, (label, _) in enumerate(path.entries):
            prefix = path.truncate(depth + 1)
            index.region_map.setdefault(label, set()).add(prefix)
            index.device_list_by_path.setdefault(prefix, []).append(device.name)
    for names in index.device_list_by_path.values():
        names.sort()
    return index


def map_services(arch: Architecture, dep: Deployment, seed: int) -> MappingOutput:
    index = build_region_index(dep)
    rng = XorShift64Star(seed)
    assignments = []
    for instance in derive_instances(arch, dep):
        candidates = index.device_list_by_path.get(instance.partition, [])
        if not candidates:
            raise ToolchainError("E-EMPTY-PARTITION", f"no device in partition {instance.partition} for {instance.service.name}")
        device = candidates[rng.below(len(candidates))]
        logger.debug(f"{instance.instance_id} -> {device} (of {len(candidates)})")
        assignments.append(Assignment(instance, device, len(candidates)))
    logger.info(f"Mapped {len(assignments)} service instances onto {len(dep.devices)} devices (seed={seed})")
    return MappingOutput(tuple(assignments), seed)


def explain_mapping(out: MappingOutput) -> str:
    rows = [("instance", "partition", "device", "candidates")]
    rows += [
        (a.instance.service.name, str(a.instance.partition), a.device, str(a.candidates))
        for a in out.assignments
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def _assignment_key(a: Assignment):
    return (a.instance.service.name, a.instance.partition, a.device)


def mapping_to_json(out: MappingOutput) -> str:
    document = {
        "seed": out.seed,
        "assignments": [
            {
                "service": a.instance.service.name,
                "partition": a.instance.partition.to_json(),
                "device": a.device,
                "candidates": a.candidates,
            }
            for a in sorted(out.assignments, key=_assignment_key)
        ],
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def load_mapping(text: str, arch: Architecture) -> MappingOutput:
    """Reads mapping JSON back, resolving service names against `arch`."""
    try:
        document = json.loads(text)
        assignments = []
        for entry in document["assignments"]:
            service = arch.service(entry["service"])
            if service is None:
                raise ToolchainError("E-MAPPING-FORMAT", f"mapping names unknown service {entry['service']}")
            instance = ServiceInstance(service, RegionPath.from_json(entry["partition"]))
            assignments.append(Assignment(instance, entry["device"], int(entry.get("candidates", 1))))
        return MappingOutput(tuple(assignments), int(document["seed"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ToolchainError("E-MAPPING-FORMAT", f"unreadable mapping: {e}") from e
