"""
In-memory model of the three concern-separated specifications.

Vocabulary (regions, data structures, resources), Architecture (computational
services and their interaction relations) and Deployment (devices placed in
the region hierarchy), plus the artifacts derived from them: service
instances, the mapping and per-device packages. All types are frozen; source
spans ride along for diagnostics but never take part in equality.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple
import logging

from src.errors import ToolchainError

logger = logging.getLogger(__name__)

PRIMITIVE_TYPES = ("string", "integer", "long", "double", "boolean")

SENSOR = "sensor"
ACTUATOR = "actuator"
STORAGE = "storage"
USER_INTERFACE = "userinterface"
RESOURCE_KINDS = (SENSOR, ACTUATOR, STORAGE, USER_INTERFACE)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.start_line, self.start_col)


def _span() -> object:
    return field(default=None, compare=False, repr=False)


# ─── regions ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class RegionLabel:
    name: str
    depth: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True, order=True)
class RegionPath:
    """A device position: (label, value) pairs from the outermost label in."""

    entries: Tuple[Tuple[str, int], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return "/".join(f"{label}:{value}" for label, value in self.entries)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    def depth_of(self, label: str) -> Optional[int]:
        for depth, (name, _) in enumerate(self.entries):
            if name == label:
                return depth
        return None

    def value_of(self, label: str) -> Optional[int]:
        depth = self.depth_of(label)
        return None if depth is None else self.entries[depth][1]

    def truncate(self, depth: int) -> "RegionPath":
        """Prefix holding the first `depth` entries."""
        return RegionPath(self.entries[:depth])

    def truncate_at(self, label: str) -> "RegionPath":
        """Prefix ending at (and including) `label`."""
        depth = self.depth_of(label)
        if depth is None:
            raise ToolchainError("E-PATH-SHALLOW", f"path too shallow: {self} has no {label} level")
        return self.truncate(depth + 1)

    def is_prefix_of(self, other: "RegionPath") -> bool:
        return other.entries[:len(self.entries)] == self.entries

    def common_prefix_length(self, other: "RegionPath") -> int:
        length = 0
        for mine, theirs in zip(self.entries, other.entries):
            if mine != theirs:
                break
            length += 1
        return length

    def to_json(self) -> List[Dict]:
        return [{"label": label, "value": value} for label, value in self.entries]

    @classmethod
    def from_json(cls, data: List[Dict]) -> "RegionPath":
        return cls(tuple((item["label"], int(item["value"])) for item in data))

    @classmethod
    def of(cls, *pairs: Tuple[str, int]) -> "RegionPath":
        return cls(tuple(pairs))


# ─── vocabulary ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class Field:
    name: str
    type: str


@dataclass(frozen=True)
class DataStructure:
    name: str
    fields: Tuple[Field, ...] = ()
    span: Optional[SourceSpan] = _span()

    def field_types(self) -> Dict[str, str]:
        return {f.name: f.type for f in self.fields}


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class Signature:
    """An actuator action, a user-interface command or a user-interface action."""
    name: str
    params: Tuple[Param, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class EventDecl:
    name: str
    struct: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Retrieval:
    """A storage retrieval or a user-interface request, keyed by one access parameter."""
    name: str
    struct: str
    access_key: Param
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SensorDecl:
    name: str
    generates: Tuple[EventDecl, ...] = ()
    span: Optional[SourceSpan] = _span()
    kind = SENSOR


@dataclass(frozen=True)
class ActuatorDecl:
    name: str
    actions: Tuple[Signature, ...] = ()
    span: Optional[SourceSpan] = _span()
    kind = ACTUATOR


@dataclass(frozen=True)
class StorageDecl:
    name: str
    retrievals: Tuple[Retrieval, ...] = ()
    span: Optional[SourceSpan] = _span()
    kind = STORAGE


@dataclass(frozen=True)
class UserInterfaceDecl:
    name: str
    commands: Tuple[Signature, ...] = ()
    actions: Tuple[Signature, ...] = ()
    requests: Tuple[Retrieval, ...] = ()
    span: Optional[SourceSpan] = _span()
    kind = USER_INTERFACE


@dataclass(frozen=True)
class Vocabulary:
    name: str
    regions: Tuple[RegionLabel, ...]
    structs: Tuple[DataStructure, ...] = ()
    sensors: Tuple[SensorDecl, ...] = ()
    actuators: Tuple[ActuatorDecl, ...] = ()
    storages: Tuple[StorageDecl, ...] = ()
    userinterfaces: Tuple[UserInterfaceDecl, ...] = ()
    span: Optional[SourceSpan] = _span()

    @property
    def region_names(self) -> Tuple[str, ...]:
        return tuple(r.name for r in self.regions)

    def region(self, name: str) -> Optional[RegionLabel]:
        return next((r for r in self.regions if r.name == name), None)

    def struct(self, name: str) -> Optional[DataStructure]:
        return next((s for s in self.structs if s.name == name), None)

    def resources(self) -> Iterator:
        yield from self.sensors
        yield from self.actuators
        yield from self.storages
        yield from self.userinterfaces

    def resource(self, name: str):
        return next((r for r in self.resources() if r.name == name), None)

    def sensor_event(self, event: str) -> Optional[Tuple[SensorDecl, EventDecl]]:
        for sensor in self.sensors:
            for decl in sensor.generates:
                if decl.name == event:
                    return sensor, decl
        return None

    def action_targets(self, action: str) -> List[Tuple[str, str, Signature]]:
        """(resource, kind, signature) for every actuator or UI action named `action`."""
        targets = []
        for actuator in self.actuators:
            targets.extend((actuator.name, ACTUATOR, a) for a in actuator.actions if a.name == action)
        for ui in self.userinterfaces:
            targets.extend((ui.name, USER_INTERFACE, a) for a in ui.actions if a.name == action)
        return targets

    def responders(self, retrieval: str) -> List[Tuple[str, str, Retrieval]]:
        """(resource, kind, retrieval) for every storage retrieval or UI request named `retrieval`."""
        found = []
        for storage in self.storages:
            found.extend((storage.name, STORAGE, r) for r in storage.retrievals if r.name == retrieval)
        for ui in self.userinterfaces:
            found.extend((ui.name, USER_INTERFACE, r) for r in ui.requests if r.name == retrieval)
        return found


# ─── architecture ─────────────────────────────────────────────────────

@dataclass(frozen=True)
class ScopeSpec:
    radius: int
    label: str
    span: Optional[SourceSpan] = _span()

    def __str__(self) -> str:
        return f"hops:{self.radius}:{self.label}"

    @classmethod
    def parse(cls, text: str) -> "ScopeSpec":
        keyword, radius, label = text.split(":")
        if keyword != "hops":
            raise ValueError(f"not a hops clause: {text}")
        return cls(int(radius), label)


@dataclass(frozen=True)
class ConsumeSpec:
    event: str
    scope: ScopeSpec
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class GenerateSpec:
    event: str
    struct: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class RequestSpec:
    retrieval: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class CommandSpec:
    action: str
    arg_names: Tuple[str, ...]
    scope: ScopeSpec
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ComputationalService:
    name: str
    consumes: Tuple[ConsumeSpec, ...] = ()
    generates: Tuple[GenerateSpec, ...] = ()
    requests: Tuple[RequestSpec, ...] = ()
    commands: Tuple[CommandSpec, ...] = ()
    in_region: str = ""
    span: Optional[SourceSpan] = _span()
    in_region_span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Architecture:
    name: str
    vocabulary_name: str
    services: Tuple[ComputationalService, ...] = ()
    span: Optional[SourceSpan] = _span()

    def service(self, name: str) -> Optional[ComputationalService]:
        return next((s for s in self.services if s.name == name), None)


# ─── deployment ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class DeviceDecl:
    name: str
    region_path: RegionPath
    resources: Tuple[str, ...] = ()
    platform_type: str = ""
    mobile: bool = False
    span: Optional[SourceSpan] = _span()
    region_span: Optional[SourceSpan] = _span()
    resource_spans: Tuple[SourceSpan, ...] = _span()


@dataclass(frozen=True)
class Deployment:
    name: str
    vocabulary_name: str
    devices: Tuple[DeviceDecl, ...]
    span: Optional[SourceSpan] = _span()

    def device(self, name: str) -> Optional[DeviceDecl]:
        return next((d for d in self.devices if d.name == name), None)


# ─── derived artifacts ────────────────────────────────────────────────

@dataclass(frozen=True)
class ServiceInstance:
    service: ComputationalService
    partition: RegionPath

    @property
    def instance_id(self) -> str:
        return f"{self.service.name}@{self.partition}"

    @property
    def sort_key(self) -> Tuple:
        return (self.service.name, self.partition)


@dataclass(frozen=True)
class Assignment:
    instance: ServiceInstance
    device: str
    candidates: int = 1


@dataclass(frozen=True)
class MappingOutput:
    assignments: Tuple[Assignment, ...]
    seed: int


@dataclass(frozen=True)
class DriverBinding:
    resource: str
    kind: str
    interface: str
    factory_key: Tuple[str, str]
    declaration: object


@dataclass(frozen=True)
class Subscription:
    event: str
    scope: ScopeSpec
    partition: RegionPath


@dataclass(frozen=True)
class Publication:
    event: str
    struct: str


@dataclass(frozen=True)
class CommandEntry:
    action: str
    arg_names: Tuple[str, ...]
    scope: ScopeSpec
    targets: Tuple[str, ...]


@dataclass(frozen=True)
class Responder:
    retrieval: str
    resource: str


@dataclass(frozen=True)
class PackagedInstance:
    instance_id: str
    service: str
    partition: RegionPath
    subscriptions: Tuple[Subscription, ...] = ()
    publications: Tuple[Publication, ...] = ()
    commands: Tuple[CommandEntry, ...] = ()
    requests: Tuple[str, ...] = ()
    handler_keys: Tuple[str, ...] = ()


@dataclass(frozen=True)
class DevicePackage:
    device: str
    platform_type: str
    region_path: RegionPath
    driver_bindings: Tuple[DriverBinding, ...] = ()
    service_instances: Tuple[PackagedInstance, ...] = ()
    responders: Tuple[Responder, ...] = ()
    structs: Tuple[DataStructure, ...] = ()


# ─── operations ───────────────────────────────────────────────────────

def region_distance(a: RegionPath, b: RegionPath, scope: ScopeSpec) -> bool:
    """True when `a` and `b` are within `scope` of each other.

    Both paths must agree on every label outer to scope.label, and their
    values at scope.label may differ by at most scope.radius.
    """
    depth_a = a.depth_of(scope.label)
    depth_b = b.depth_of(scope.label)
    if depth_a is None or depth_b is None:
        raise ToolchainError("E-PATH-SHALLOW", f"path too shallow for {scope}: {a} vs {b}")
    if depth_a != depth_b or a.entries[:depth_a] != b.entries[:depth_b]:
        return False
    return abs(a.entries[depth_a][1] - b.entries[depth_b][1]) <= scope.radius


def derive_instances(arch: Architecture, dep: Deployment) -> List[ServiceInstance]:
    """One instance per service per distinct device path truncated at the service's in-region."""
    instances = []
    for service in arch.services:
        partitions = {
            device.region_path.truncate_at(service.in_region)
            for device in dep.devices
            if device.region_path.depth_of(service.in_region) is not None
        }
        instances.extend(ServiceInstance(service, p) for p in partitions)
    instances.sort(key=lambda i: i.sort_key)
    logger.debug(f"Derived {len(instances)} service instances from {len(arch.services)} services")
    return instances
