"""
Linker.

Combines the architecture framework, the driver manifest, the mapping and
the deployment into one self-contained package per device. Packages are data:
the simulator interprets them together with a handler registry.
"""

from typing import Dict, List, Tuple
import json
import logging
import os

from src.codegen import DriverManifest, FrameworkManifest
from src.errors import ToolchainError
from src.model import (
    ACTUATOR,
    SENSOR,
    STORAGE,
    Architecture,
    CommandEntry,
    DataStructure,
    Deployment,
    DevicePackage,
    DriverBinding,
    Field,
    MappingOutput,
    PackagedInstance,
    Publication,
    RegionPath,
    Responder,
    ScopeSpec,
    ServiceInstance,
    Subscription,
    Vocabulary,
    derive_instances,
)

logger = logging.getLogger(__name__)

PACKAGE_SUFFIX = ".pkg.json"


def _params(params) -> List[Dict]:
    return [{"name": p.name, "type": p.type} for p in params]


def _retrievals(retrievals) -> List[Dict]:
    return [
        {"name": r.name, "struct": r.struct, "accessKey": {"name": r.access_key.name, "type": r.access_key.type}}
        for r in retrievals
    ]


def resource_declaration(resource) -> Dict:
    """JSON-ready description of a vocabulary resource, carried inside driver bindings."""
    if resource.kind == SENSOR:
        return {"generates": [{"name": e.name, "struct": e.struct} for e in resource.generates]}
    if resource.kind == ACTUATOR:
        return {"actions": [{"name": a.name, "params": _params(a.params)} for a in resource.actions]}
    if resource.kind == STORAGE:
        return {"retrievals": _retrievals(resource.retrievals)}
    return {
        "commands": [{"name": c.name, "params": _params(c.params)} for c in resource.commands],
        "actions": [{"name": a.name, "params": _params(a.params)} for a in resource.actions],
        "requests": _retrievals(resource.requests),
    }


def _event_structs(arch: Architecture, vocab: Vocabulary) -> Dict[str, str]:
    structs = {e.name: e.struct for s in vocab.sensors for e in s.generates}
    for service in arch.services:
        structs.update({g.event: g.struct for g in service.generates})
    return structs


class LinkError(ToolchainError):
    """A mapping that cannot be linked against the deployment it claims to place."""


def _placements(instances: List[ServiceInstance], mapping: MappingOutput, dep: Deployment) -> Dict[str, str]:
    """Instance id -> device, once every instance is placed exactly once on a device inside its partition."""
    known = {instance.instance_id: instance for instance in instances}
    placed: Dict[str, str] = {}
    for assignment in mapping.assignments:
        instance_id = assignment.instance.instance_id
        if instance_id in placed:
            raise LinkError("E-DUPLICATE-ASSIGNMENT",
                            f"mapping places {instance_id} twice ({placed[instance_id]}, {assignment.device})")
        instance = known.get(instance_id)
        if instance is None:
            raise LinkError("E-UNKNOWN-INSTANCE",
                            f"mapping places {instance_id}, which the architecture and deployment do not derive")
        device = dep.device(assignment.device)
        if device is None:
            raise LinkError("E-UNKNOWN-DEVICE", f"mapping places {instance_id} on unknown device {assignment.device}")
        if not instance.partition.is_prefix_of(device.region_path):
            raise LinkError("E-PARTITION-VIOLATION",
                            f"mapping places {instance_id} on {device.name}, outside its partition ({device.region_path})")
        placed[instance_id] = device.name
    for instance_id in known:
        if instance_id not in placed:
            raise LinkError("E-UNMAPPED-INSTANCE", f"mapping has no device for {instance_id}")
    return placed


def link(arch: Architecture, dep: Deployment, vocab: Vocabulary, mapping: MappingOutput,
         frameworks: Tuple[FrameworkManifest, DriverManifest]) -> List[DevicePackage]:
    framework, drivers = frameworks
    instances = derive_instances(arch, dep)
    placed = _placements(instances, mapping, dep)
    by_device: Dict[str, list] = {}
    for instance in instances:
        by_device.setdefault(placed[instance.instance_id], []).append(instance)

    event_structs = _event_structs(arch, vocab)
    packages = []
    for device in sorted(dep.devices, key=lambda d: d.name):
        hosted = by_device.get(device.name, [])
        if not device.resources and not hosted:
            logger.debug(f"Device {device.name} has no role, no package emitted")
            continue

        bindings, responders, struct_names = [], [], set()
        for name in device.resources:
            resource = vocab.resource(name)
            declaration = resource_declaration(resource)
            bindings.append(DriverBinding(name, resource.kind, drivers.resource(name).interface,
                                          (name, device.platform_type), declaration))
            for entry in declaration.get("generates", []):
                struct_names.add(entry["struct"])
            for entry in declaration.get("retrievals", []) + declaration.get("requests", []):
                struct_names.add(entry["struct"])
                responders.append(Responder(entry["name"], name))

        packaged = []
        for instance in hosted:
            service = instance.service
            hooks = framework.service(service.name).hook_names
            commands = tuple(
                CommandEntry(c.action, c.arg_names, c.scope,
                             tuple(sorted({r for r, _, _ in vocab.action_targets(c.action)})))
                for c in service.commands
            )
            for consume in service.consumes:
                struct_names.add(event_structs.get(consume.event, ""))
            for gen in service.generates:
                struct_names.add(gen.struct)
            for request in service.requests:
                struct_names.update(r.struct for _, _, r in vocab.responders(request.retrieval))
            packaged.append(PackagedInstance(
                instance_id=instance.instance_id,
                service=service.name,
                partition=instance.partition,
                subscriptions=tuple(Subscription(c.event, c.scope, instance.partition) for c in service.consumes),
                publications=tuple(Publication(g.event, g.struct) for g in service.generates),
                commands=commands,
                requests=tuple(r.retrieval for r in service.requests),
                handler_keys=tuple(hooks),
            ))

        structs = tuple(s for s in vocab.structs if s.name in struct_names)
        packages.append(DevicePackage(
            device=device.name,
            platform_type=device.platform_type,
            region_path=device.region_path,
            driver_bindings=tuple(bindings),
            service_instances=tuple(packaged),
            responders=tuple(responders),
            structs=structs,
        ))
    logger.info(f"Linked {len(packages)} device packages")
    return packages


# ─── package files ────────────────────────────────────────────────────

def package_to_dict(p: DevicePackage) -> Dict:
    return {
        "device": p.device,
        "platformType": p.platform_type,
        "regionPath": p.region_path.to_json(),
        "driverBindings": [
            {"resource": b.resource, "kind": b.kind, "interface": b.interface,
             "factoryKey": list(b.factory_key), "declaration": b.declaration}
            for b in p.driver_bindings
        ],
        "serviceInstances": [
            {
                "instanceId": i.instance_id,
                "service": i.service,
                "partition": i.partition.to_json(),
                "subscriptions": [
                    {"event": s.event, "scope": str(s.scope), "partition": s.partition.to_json()}
                    for s in i.subscriptions
                ],
                "publications": [{"event": pub.event, "struct": pub.struct} for pub in i.publications],
                "commands": [
                    {"action": c.action, "args": list(c.arg_names), "scope": str(c.scope), "targets": list(c.targets)}
                    for c in i.commands
                ],
                "requests": list(i.requests),
                "handlerKeys": list(i.handler_keys),
            }
            for i in p.service_instances
        ],
        "responders": [{"retrieval": r.retrieval, "resource": r.resource} for r in p.responders],
        "structs": [
            {"name": s.name, "fields": [{"name": f.name, "type": f.type} for f in s.fields]}
            for s in p.structs
        ],
    }


def package_from_dict(data: Dict) -> DevicePackage:
    return DevicePackage(
        device=data["device"],
        platform_type=data["platformType"],
        region_path=RegionPath.from_json(data["regionPath"]),
        driver_bindings=tuple(
            DriverBinding(b["resource"], b["kind"], b["interface"], tuple(b["factoryKey"]), b["declaration"])
            for b in data["driverBindings"]
        ),
        service_instances=tuple(
            PackagedInstance(
                instance_id=i["instanceId"],
                service=i["service"],
                partition=RegionPath.from_json(i["partition"]),
                subscriptions=tuple(
                    Subscription(s["event"], ScopeSpec.parse(s["scope"]), RegionPath.from_json(s["partition"]))
                    for s in i["subscriptions"]
                ),
                publications=tuple(Publication(pub["event"], pub["struct"]) for pub in i["publications"]),
                commands=tuple(
                    CommandEntry(c["action"], tuple(c["args"]), ScopeSpec.parse(c["scope"]), tuple(c["targets"]))
                    for c in i["commands"]
                ),
                requests=tuple(i["requests"]),
                handler_keys=tuple(i["handlerKeys"]),
            )
            for i in data["serviceInstances"]
        ),
        responders=tuple(Responder(r["retrieval"], r["resource"]) for r in data["responders"]),
        structs=tuple(
            DataStructure(s["name"], tuple(Field(f["name"], f["type"]) for f in s["fields"]))
            for s in data["structs"]
        ),
    )


def package_to_json(p: DevicePackage) -> str:
    return json.dumps(package_to_dict(p), indent=2, sort_keys=True) + "\n"


def package_filename(p: DevicePackage) -> str:
    return f"{p.device}{PACKAGE_SUFFIX}"


def write_packages(packages: List[DevicePackage], out_dir: str) -> List[str]:
    paths = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for p in packages:
            path = os.path.join(out_dir, package_filename(p))
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(package_to_json(p))
            paths.append(path)
    except OSError as e:
        raise ToolchainError("E-IO", f"cannot write packages to {out_dir}: {e}") from e
    logger.info(f"Wrote {len(paths)} packages to {out_dir}")
    return paths


def read_package(path: str) -> DevicePackage:
    try:
        with open(path, encoding="utf-8") as handle:
            return package_from_dict(json.load(handle))
    except OSError as e:
        raise ToolchainError("E-IO", f"cannot read package {path}: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ToolchainError("E-IO", f"malformed package {path}: {e}") from e


def read_packages(directory: str) -> List[DevicePackage]:
    if not os.path.isdir(directory):
        raise ToolchainError("E-IO", f"no package directory {directory}")
    names = sorted(n for n in os.listdir(directory) if n.endswith(PACKAGE_SUFFIX))
    return [read_package(os.path.join(directory, n)) for n in names]
