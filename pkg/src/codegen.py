"""
Framework generation.

Builds the two generated frameworks as manifests: the architecture framework
(per-service abstract hooks plus the concrete subscribe/publish/send/request
operations) and the vocabulary framework (one driver interface per resource,
bound to platform drivers through factory keys). Also diffs two architecture
frameworks to report which handlers an evolution adds, keeps or strands.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Set, Tuple
import json
import logging

from src.model import (
    ACTUATOR,
    SENSOR,
    STORAGE,
    USER_INTERFACE,
    Architecture,
    ComputationalService,
    Vocabulary,
)

logger = logging.getLogger(__name__)

HandlerKey = Tuple[str, str]


def hook_name(event: str) -> str:
    return f"onNew{event}"


def interface_name(resource: str) -> str:
    return f"I{resource}"


@dataclass(frozen=True)
class ServiceFramework:
    service: str
    partition_attribute: str
    abstract_hooks: Tuple[Dict, ...]
    concrete_ops: Tuple[Dict, ...]

    @property
    def hook_names(self) -> List[str]:
        return [hook["name"] for hook in self.abstract_hooks]


@dataclass(frozen=True)
class FrameworkManifest:
    architecture: str
    per_service: Tuple[ServiceFramework, ...] = ()

    def hooks(self) -> Set[HandlerKey]:
        return {(s.service, name) for s in self.per_service for name in s.hook_names}

    def service(self, name: str) -> ServiceFramework:
        return next(s for s in self.per_service if s.service == name)

    def to_dict(self) -> Dict:
        return {
            "architecture": self.architecture,
            "services": [
                {
                    "service": s.service,
                    "partitionAttribute": s.partition_attribute,
                    "abstractHooks": list(s.abstract_hooks),
                    "concreteOps": list(s.concrete_ops),
                }
                for s in self.per_service
            ],
        }


@dataclass(frozen=True)
class DriverInterface:
    resource: str
    kind: str
    interface: str
    methods: Tuple[Dict, ...]
    factory_keys: Tuple[Tuple[str, str], ...]


@dataclass(frozen=True)
class DriverManifest:
    vocabulary: str
    per_resource: Tuple[DriverInterface, ...] = ()

    def resource(self, name: str) -> DriverInterface:
        return next(r for r in self.per_resource if r.resource == name)

    def to_dict(self) -> Dict:
        return {
            "vocabulary": self.vocabulary,
            "resources": [
                {
                    "resource": r.resource,
                    "kind": r.kind,
                    "interface": r.interface,
                    "methods": list(r.methods),
                    "factoryKeys": [list(key) for key in r.factory_keys],
                }
                for r in self.per_resource
            ],
        }


@dataclass
class EvolutionReport:
    added_hooks: List[HandlerKey] = field(default_factory=list)
    removed_hooks: List[HandlerKey] = field(default_factory=list)
    unchanged_hooks: List[HandlerKey] = field(default_factory=list)
    added_services: List[str] = field(default_factory=list)
    removed_services: List[str] = field(default_factory=list)


def manifest_to_json(manifest) -> str:
    return json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n"


# ─── architecture framework ───────────────────────────────────────────

def _service_framework(service: ComputationalService, vocab: Vocabulary) -> ServiceFramework:
    hooks = tuple({"name": hook_name(c.event), "event": c.event} for c in service.consumes)
    ops: List[Dict] = []
    for consume in service.consumes:
        ops.append({
            "op": f"subscribe{consume.event}",
            "kind": "subscribe",
            "event": consume.event,
            "scope": str(consume.scope),
            "dispatchesTo": hook_name(consume.event),
        })
    for gen in service.generates:
        ops.append({"op": f"publish{gen.event}", "kind": "publish", "event": gen.event, "struct": gen.struct})
    for command in service.commands:
        targets = sorted({kind for _, kind, _ in vocab.action_targets(command.action)})
        ops.append({
            "op": f"send{command.action}",
            "kind": "command",
            "action": command.action,
            "args": list(command.arg_names),
            "scope": str(command.scope),
            "targets": targets,
        })
    for request in service.requests:
        responders = vocab.responders(request.retrieval)
        key = responders[0][2].access_key if responders else None
        ops.append({
            "op": f"request{request.retrieval}",
            "kind": "request",
            "retrieval": request.retrieval,
            "accessKey": key.name if key else "",
            "struct": responders[0][2].struct if responders else "",
        })
    return ServiceFramework(service.name, service.in_region, hooks, tuple(ops))


def generate_architecture_framework(arch: Architecture, vocab: Vocabulary) -> FrameworkManifest:
    services = sorted(arch.services, key=lambda s: s.name)
    manifest = FrameworkManifest(arch.name, tuple(_service_framework(s, vocab) for s in services))
    logger.info(f"Generated architecture framework for {len(services)} services")
    return manifest


# ─── vocabulary framework ─────────────────────────────────────────────

def _params(params) -> List[Dict]:
    return [{"name": p.name, "type": p.type} for p in params]


def _methods(resource, kind: str) -> List[Dict]:
    methods: List[Dict] = []
    if kind == SENSOR:
        for event in resource.generates:
            methods.append({"name": f"get{event.name}", "mode": "sync", "params": [], "returns": event.struct})
            methods.append({"name": f"get{event.name}", "mode": "async",
                            "params": [{"name": "handler", "type": "callback"}], "returns": event.struct})
    elif kind == ACTUATOR:
        for action in resource.actions:
            methods.append({"name": f"do{action.name}", "mode": "sync", "params": _params(action.params)})
    elif kind == STORAGE:
        for r in resource.retrievals:
            methods.append({"name": f"query{r.name}", "mode": "sync",
                            "params": _params([r.access_key]), "returns": r.struct})
    else:
        for action in resource.actions:
            methods.append({"name": f"notify{action.name}", "mode": "sync", "params": _params(action.params)})
        for command in resource.commands:
            methods.append({"name": f"issue{command.name}", "mode": "sync", "params": _params(command.params)})
        for r in resource.requests:
            methods.append({"name": f"fetch{r.name}", "mode": "sync",
                            "params": _params([r.access_key]), "returns": r.struct})
    return methods


def generate_vocabulary_framework(vocab: Vocabulary, platforms: Tuple[str, ...] = ()) -> DriverManifest:
    """One driver interface per resource; factory keys for each platform given."""
    entries = []
    for resource in vocab.resources():
        kind = resource.kind
        entries.append(DriverInterface(
            resource=resource.name,
            kind=kind,
            interface=interface_name(resource.name),
            methods=tuple(_methods(resource, kind)),
            factory_keys=tuple((resource.name, p) for p in sorted(set(platforms))),
        ))
    logger.info(f"Generated vocabulary framework for {len(entries)} resources")
    return DriverManifest(vocab.name, tuple(entries))


# ─── evolution ────────────────────────────────────────────────────────

def diff_frameworks(old: FrameworkManifest, new: FrameworkManifest,
                    registered_handlers: Set[HandlerKey] = frozenset()) -> EvolutionReport:
    old_hooks = old.hooks()
    new_hooks = new.hooks()
    old_services = {s.service for s in old.per_service}
    new_services = {s.service for s in new.per_service}
    return EvolutionReport(
        added_hooks=sorted(new_hooks - old_hooks),
        removed_hooks=sorted((old_hooks | set(registered_handlers)) - new_hooks),
        unchanged_hooks=sorted(old_hooks & new_hooks),
        added_services=sorted(new_services - old_services),
        removed_services=sorted(old_services - new_services),
    )


def render_evolution_report(report: EvolutionReport) -> str:
    lines = []
    for service in report.added_services:
        lines.append(f"service added: {service} (implement its handlers)")
    for service in report.removed_services:
        lines.append(f"service removed: {service} (delete its application logic)")
    for service, hook in report.added_hooks:
        if service not in report.added_services:
            lines.append(f"input added: {service}.{hook} (implement the new handler)")
    for service, hook in report.removed_hooks:
        if service not in report.removed_services:
            lines.append(f"input removed: {service}.{hook} is now dead application logic")
    lines.append(f"unchanged handlers: {len(report.unchanged_hooks)}")
    return "\n".join(lines) + "\n"
