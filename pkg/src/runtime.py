"""
Deterministic discrete-event simulator.

Loads device packages, binds handler logic and simulated drivers from a
HandlerRegistry, and runs scenarios on a virtual clock (milliseconds). All
work goes through one min-heap ordered by (time, phase, target, sequence):
phase 0 is scenario injection, phase 1 is delivery, so everything is
reproducible from (packages, registry, scenario, seed).

Middleware contract offered to handlers through ServiceContext:
publish (region-scoped fan-out), command (actuators and user interfaces in
scope), request (synchronous, answered at request time + 2 * latency).
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import heapq
import logging
import zlib

from src.codegen import hook_name
from src.config import Config
from src.errors import ToolchainError
from src.mapper import MASK64, XorShift64Star
from src.model import (
    ACTUATOR,
    SENSOR,
    STORAGE,
    USER_INTERFACE,
    CommandEntry,
    DevicePackage,
    DriverBinding,
    PackagedInstance,
    RegionPath,
    ScopeSpec,
    region_distance,
)
from src.scenario import EMIT, Scenario

logger = logging.getLogger(__name__)

PUBLISH = "PUBLISH"
DELIVER = "DELIVER"
COMMAND = "COMMAND"
ACTUATE = "ACTUATE"
REQUEST = "REQUEST"
RESPOND = "RESPOND"
NOTIFY = "NOTIFY"
TRACE_KINDS = (PUBLISH, DELIVER, COMMAND, ACTUATE, REQUEST, RESPOND, NOTIFY)

_INJECT = 0
_DELIVER = 1


# ─── messages ─────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Event:
    topic: str
    payload: Dict
    source: Tuple[str, RegionPath]
    virtual_time: int
    publisher: str = ""


@dataclass(frozen=True)
class CommandMsg:
    action: str
    args: Tuple
    scope: ScopeSpec
    issuer: str
    virtual_time: int


@dataclass(frozen=True)
class RequestMsg:
    retrieval: str
    access_key: object
    requester: str
    correlation_id: str


@dataclass(frozen=True)
class ResponseMsg:
    retrieval: str
    correlation_id: str
    payload: Dict


# ─── trace ────────────────────────────────────────────────────────────

def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class TraceRecord:
    virtual_time: int
    kind: str
    details: Tuple[str, ...] = ()

    def render(self) -> str:
        return "\t".join((str(self.virtual_time), self.kind) + self.details)

    def detail(self, key: str) -> Optional[str]:
        prefix = f"{key}="
        return next((d[len(prefix):] for d in self.details if d.startswith(prefix)), None)


@dataclass
class Trace:
    records: List[TraceRecord] = field(default_factory=list)

    def of_kind(self, kind: str) -> List[TraceRecord]:
        return [r for r in self.records if r.kind == kind]

    def render(self) -> str:
        return "".join(r.render() + "\n" for r in self.records)


def render_trace(trace: Trace) -> str:
    return trace.render()


def parse_trace(text: str) -> Trace:
    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) < 2 or not parts[0].isdigit() or parts[1] not in TRACE_KINDS:
            raise ToolchainError("E-IO", f"trace line {number} is malformed: {line!r}")
        records.append(TraceRecord(int(parts[0]), parts[1], tuple(parts[2:])))
    return Trace(records)


# ─── payload typing ───────────────────────────────────────────────────

def coerce_value(text: str, type_name: str):
    """Scenario text to a typed scalar."""
    try:
        if type_name == "boolean":
            if text not in ("true", "false"):
                raise ValueError(text)
            return text == "true"
        if type_name in ("integer", "long"):
            return int(text)
        if type_name == "double":
            return float(text)
        return text
    except ValueError as e:
        raise ToolchainError("E-PAYLOAD-TYPE", f"'{text}' is not a valid {type_name}") from e


def check_value(value, type_name: str, where: str):
    ok = {
        "boolean": isinstance(value, bool),
        "integer": isinstance(value, int) and not isinstance(value, bool),
        "long": isinstance(value, int) and not isinstance(value, bool),
        "double": isinstance(value, (int, float)) and not isinstance(value, bool),
        "string": isinstance(value, str),
    }.get(type_name, False)
    if not ok:
        raise ToolchainError("E-PAYLOAD-TYPE", f"{where}: {value!r} is not a {type_name}")
    return float(value) if type_name == "double" else value


def check_payload(fields: List[Tuple[str, str]], payload: Dict, where: str) -> Dict:
    """Payload keys must match the struct exactly; values are normalized in field order."""
    names = [name for name, _ in fields]
    if set(payload) != set(names):
        missing = sorted(set(names) - set(payload))
        extra = sorted(set(payload) - set(names))
        raise ToolchainError("E-PAYLOAD-TYPE", f"{where}: missing fields {missing}, unexpected fields {extra}")
    return {name: check_value(payload[name], type_name, f"{where}.{name}") for name, type_name in fields}


# ─── registry and drivers ─────────────────────────────────────────────

Handler = Callable[["ServiceContext", Event], None]
DriverFactory = Callable[[DriverBinding, "DeviceNode"], "SimulatedDriver"]


class HandlerRegistry:
    """Handler callbacks keyed by (service, hook) and driver factories keyed by (resource, platform)."""

    def __init__(self):
        self.handlers: Dict[Tuple[str, str], Handler] = {}
        self.drivers: Dict[Tuple[str, str], DriverFactory] = {}

    def handler(self, service: str, hook: str):
        def decorator(fn: Handler) -> Handler:
            self.handlers[(service, hook)] = fn
            return fn
        return decorator

    def register_driver(self, resource: str, platforms, factory: DriverFactory) -> None:
        for platform in platforms:
            self.drivers[(resource, platform)] = factory

    def merge(self, other: "HandlerRegistry") -> "HandlerRegistry":
        merged = HandlerRegistry()
        merged.handlers = {**self.handlers, **other.handlers}
        merged.drivers = {**self.drivers, **other.drivers}
        return merged


class SimulatedDriver:
    """Base for simulated drivers; `get<event>`, `do<action>` and friends resolve by prefix."""

    PREFIXES: Dict[str, str] = {}

    def __init__(self, binding: DriverBinding, node: "DeviceNode"):
        self.binding = binding
        self.node = node

    @property
    def resource(self) -> str:
        return self.binding.resource

    def _declared(self, section: str) -> Dict[str, Dict]:
        return {entry["name"]: entry for entry in self.binding.declaration.get(section, [])}

    def __getattr__(self, name: str):
        if name.startswith("_") or "binding" not in self.__dict__:
            raise AttributeError(name)
        for prefix, method in self.PREFIXES.items():
            if name.startswith(prefix) and len(name) > len(prefix):
                target = name[len(prefix):]
                return lambda *args, **kwargs: getattr(self, method)(target, *args, **kwargs)
        raise AttributeError(f"{type(self).__name__} has no method {name}")


class SensorDriver(SimulatedDriver):
    """get<event>() returns the last reading; get<event>(handler) subscribes; inject() feeds readings."""

    PREFIXES = {"get": "read"}

    def __init__(self, binding, node):
        super().__init__(binding, node)
        self.listeners: Dict[str, List[Callable[[Dict], None]]] = {}
        self.last: Dict[str, Dict] = {}

    def read(self, event: str, handler: Optional[Callable[[Dict], None]] = None):
        if event not in self._declared("generates"):
            raise AttributeError(f"{self.resource} does not generate {event}")
        if handler is None:
            return self.last.get(event)
        self.listeners.setdefault(event, []).append(handler)
        return None

    def inject(self, event: str, payload: Dict) -> None:
        self.last[event] = payload
        for listener in self.listeners.get(event, []):
            listener(payload)


class ActuatorDriver(SimulatedDriver):
    PREFIXES = {"do": "actuate"}

    def __init__(self, binding, node):
        super().__init__(binding, node)
        self.applied: List[Tuple[str, Tuple]] = []

    def actuate(self, action: str, *args) -> None:
        self.applied.append((action, args))
        self.node.sim.record(ACTUATE, action, f"device={self.node.name}", f"resource={self.resource}",
                             *self.node.sim.named_args(self._declared("actions")[action], args))


class StorageDriver(SimulatedDriver):
    """query<retrieval>(key) answered from an in-memory table {retrieval: {key: payload}}."""

    PREFIXES = {"query": "lookup"}

    def __init__(self, binding, node, table: Optional[Dict[str, Dict]] = None):
        super().__init__(binding, node)
        self.table = table or {}

    def lookup(self, retrieval: str, key) -> Optional[Dict]:
        return self.table.get(retrieval, {}).get(key)


class UserInterfaceDriver(SimulatedDriver):
    PREFIXES = {"notify": "show", "issue": "issue_command", "fetch": "lookup"}

    def __init__(self, binding, node, table: Optional[Dict[str, Dict]] = None):
        super().__init__(binding, node)
        self.table = table or {}
        self.shown: List[Tuple[str, Tuple]] = []

    def show(self, action: str, *args) -> None:
        self.shown.append((action, args))
        self.node.sim.record(NOTIFY, action, f"device={self.node.name}", f"resource={self.resource}",
                             *self.node.sim.named_args(self._declared("actions")[action], args))

    def issue_command(self, command: str, *args) -> None:
        self.node.sim.issue_ui_command(self.node, self, command, args)

    def lookup(self, retrieval: str, key) -> Optional[Dict]:
        return self.table.get(retrieval, {}).get(key)


DEFAULT_DRIVERS = {
    SENSOR: SensorDriver,
    ACTUATOR: ActuatorDriver,
    STORAGE: StorageDriver,
    USER_INTERFACE: UserInterfaceDriver,
}


# ─── nodes and instances ──────────────────────────────────────────────

def instance_seed(seed: int, instance_id: str) -> int:
    """Seed of an instance's random stream, fixed for the whole run."""
    return (seed ^ zlib.crc32(instance_id.encode("utf-8"))) & MASK64


@dataclass
class RuntimeInstance:
    packaged: PackagedInstance
    node: "DeviceNode"
    rng: XorShift64Star
    state: Dict = field(default_factory=dict)
    busy_until: int = 0

    @property
    def instance_id(self) -> str:
        return self.packaged.instance_id


@dataclass
class DeviceNode:
    sim: "Simulator"
    package: DevicePackage
    drivers: Dict[str, SimulatedDriver] = field(default_factory=dict)
    instances: List[RuntimeInstance] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.package.device

    @property
    def region_path(self) -> RegionPath:
        return self.package.region_path


class ServiceContext:
    """What a handler sees: its instance state plus the middleware primitives."""

    def __init__(self, sim: "Simulator", instance: RuntimeInstance, now: int):
        self._sim = sim
        self._instance = instance
        self._now = now
        self.rng = instance.rng

    @property
    def now(self) -> int:
        return self._now

    @property
    def state(self) -> Dict:
        return self._instance.state

    @property
    def instance_id(self) -> str:
        return self._instance.instance_id

    @property
    def partition(self) -> RegionPath:
        return self._instance.packaged.partition

    def publish(self, event: str, payload: Dict) -> None:
        publication = next((p for p in self._instance.packaged.publications if p.event == event), None)
        if publication is None:
            raise ToolchainError("E-UNDECLARED-OUTPUT", f"{self.instance_id} does not generate {event}")
        self._sim.publish(event, payload, self._instance.node, self.instance_id, self._now, publication.struct)

    def command(self, action: str, *args) -> None:
        entry = next((c for c in self._instance.packaged.commands if c.action == action), None)
        if entry is None:
            raise ToolchainError("E-UNDECLARED-OUTPUT", f"{self.instance_id} does not command {action}")
        self._sim.command(entry, args, self._instance, self._now)

    def request(self, retrieval: str, key) -> Dict:
        if retrieval not in self._instance.packaged.requests:
            raise ToolchainError("E-UNDECLARED-OUTPUT", f"{self.instance_id} does not request {retrieval}")
        response = self._sim.request(retrieval, key, self._instance, self._now)
        self._now += 2 * self._sim.latency
        return response.payload


# ─── simulator ────────────────────────────────────────────────────────

class Simulator:
    def __init__(self, packages: List[DevicePackage], registry: HandlerRegistry,
                 latency: Optional[int] = None):
        self.packages = sorted(packages, key=lambda p: p.device)
        self.registry = registry
        self.latency = latency if latency is not None else Config.DELIVERY_LATENCY_MS
        self.structs: Dict[str, List[Tuple[str, str]]] = {}
        for package in self.packages:
            for struct in package.structs:
                self.structs[struct.name] = [(f.name, f.type) for f in struct.fields]
        self.seed = 0
        self._reset()

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def _reset(self) -> None:
        self.now = 0
        self.trace = Trace()
        self._queue: List = []
        self._seq = 0
        self._correlation = 0
        self.nodes: Dict[str, DeviceNode] = {}
        self.subscribers: Dict[str, List[Tuple[RuntimeInstance, object]]] = {}
        for package in self.packages:
            node = DeviceNode(self, package)
            for binding in package.driver_bindings:
                factory = self.registry.drivers[tuple(binding.factory_key)]
                node.drivers[binding.resource] = factory(binding, node)
            for packaged in package.service_instances:
                rng = XorShift64Star(instance_seed(self.seed, packaged.instance_id))
                instance = RuntimeInstance(packaged, node, rng)
                node.instances.append(instance)
                for subscription in packaged.subscriptions:
                    self.subscribers.setdefault(subscription.event, []).append((instance, subscription))
            self.nodes[node.name] = node
        for node in self.nodes.values():
            for binding in node.package.driver_bindings:
                if binding.kind != SENSOR:
                    continue
                driver = node.drivers[binding.resource]
                for event in binding.declaration.get("generates", []):
                    getattr(driver, f"get{event['name']}")(self._sensor_listener(node, event))
        for entries in self.subscribers.values():
            entries.sort(key=lambda pair: pair[0].instance_id)

    def _sensor_listener(self, node: DeviceNode, event: Dict) -> Callable[[Dict], None]:
        def listener(payload: Dict) -> None:
            self.publish(event["name"], payload, node, node.name, self.now, event["struct"])
        return listener

    # ── bookkeeping ──

    def _push(self, time: int, phase: int, target: str, action: Callable[[], None]) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (time, phase, target, self._seq, action))

    def record(self, kind: str, *details: str, at: Optional[int] = None) -> None:
        self.trace.records.append(TraceRecord(self.now if at is None else at, kind, tuple(details)))

    def named_args(self, signature: Dict, args: Tuple) -> List[str]:
        return [f"{p['name']}={format_value(v)}" for p, v in zip(signature["params"], args)]

    def _payload_details(self, payload: Dict) -> List[str]:
        return [f"{k}={format_value(v)}" for k, v in payload.items()]

    # ── publish ──

    def publish(self, event: str, payload: Dict, node: DeviceNode, publisher: str, at: int,
                struct: str) -> None:
        payload = check_payload(self.structs.get(struct, []), payload, f"{publisher} {event}")
        message = Event(event, payload, (node.name, node.region_path), at, publisher)
        self.record(PUBLISH, event, f"from={publisher}", f"source={node.name}", *self._payload_details(payload), at=at)
        delivered = 0
        for instance, subscription in self.subscribers.get(event, []):
            if region_distance(node.region_path, subscription.partition, subscription.scope):
                self._push(at + self.latency, _DELIVER, instance.instance_id,
                           lambda i=instance, m=message: self._deliver(i, m))
                delivered += 1
        logger.debug(f"{publisher} published {event} at {at} to {delivered} subscriber(s)")

    def matching_subscribers(self, event: str, source: RegionPath) -> List[str]:
        return [
            instance.instance_id
            for instance, subscription in self.subscribers.get(event, [])
            if region_distance(source, subscription.partition, subscription.scope)
        ]

    def _deliver(self, instance: RuntimeInstance, message: Event) -> None:
        if instance.busy_until > self.now:
            self._push(instance.busy_until, _DELIVER, instance.instance_id,
                       lambda: self._deliver(instance, message))
            return
        self.record(DELIVER, message.topic, f"to={instance.instance_id}", f"from={message.publisher}")
        hook = hook_name(message.topic)
        handler = self.registry.handlers[(instance.packaged.service, hook)]
        context = ServiceContext(self, instance, self.now)
        handler(context, message)
        instance.busy_until = context.now

    # ── command ──

    def command(self, entry: CommandEntry, args: Tuple, instance: RuntimeInstance, at: int) -> None:
        if len(args) != len(entry.arg_names):
            raise ToolchainError("E-ARG-ARITY",
                                 f"{instance.instance_id} passes {len(args)} argument(s) to {entry.action}, "
                                 f"expected {len(entry.arg_names)}")
        message = CommandMsg(entry.action, tuple(args), entry.scope, instance.instance_id, at)
        details = [f"{name}={format_value(v)}" for name, v in zip(entry.arg_names, args)]
        self.record(COMMAND, entry.action, f"issuer={instance.instance_id}", f"scope={entry.scope}",
                    *details, at=at)
        self._fan_out(message, instance.packaged.partition, set(entry.targets))

    def _fan_out(self, message: CommandMsg, origin: RegionPath, targets) -> None:
        reached = 0
        for node in self.nodes.values():
            if not region_distance(node.region_path, origin, message.scope):
                continue
            for binding in node.package.driver_bindings:
                if binding.resource not in targets:
                    continue
                prefix = "do" if binding.kind == ACTUATOR else "notify" if binding.kind == USER_INTERFACE else None
                if prefix is None:
                    continue
                names = {a["name"] for a in binding.declaration.get("actions", [])}
                if message.action not in names:
                    continue
                driver = node.drivers[binding.resource]
                self._push(message.virtual_time + self.latency, _DELIVER, f"{node.name}/{binding.resource}",
                           lambda d=driver, p=prefix: getattr(d, f"{p}{message.action}")(*message.args))
                reached += 1
        logger.debug(f"{message.issuer} {message.action} reaches {reached} driver(s)")

    def issue_ui_command(self, node: DeviceNode, driver: UserInterfaceDriver, command: str, args: Tuple) -> None:
        signature = driver._declared("commands").get(command)
        if signature is None:
            raise ToolchainError("E-SCENARIO-DEVICE", f"{driver.resource} on {node.name} has no command {command}")
        if len(args) != len(signature["params"]):
            raise ToolchainError("E-ARG-ARITY", f"{command} takes {len(signature['params'])} argument(s)")
        innermost = node.region_path.labels[-1]
        scope = ScopeSpec(0, innermost)
        issuer = f"{node.name}/{driver.resource}"
        message = CommandMsg(command, tuple(args), scope, issuer, self.now)
        self.record(COMMAND, command, f"issuer={issuer}", f"scope={scope}", *self.named_args(signature, args))
        targets = {
            b.resource
            for n in self.nodes.values()
            for b in n.package.driver_bindings
            if b.kind in (ACTUATOR, USER_INTERFACE)
            and command in {a["name"] for a in b.declaration.get("actions", [])}
        }
        self._fan_out(message, node.region_path, targets)

    # ── request ──

    def responders(self, retrieval: str) -> List[Tuple[DeviceNode, DriverBinding]]:
        found = []
        for node in self.nodes.values():
            for responder in node.package.responders:
                if responder.retrieval == retrieval:
                    binding = next(b for b in node.package.driver_bindings if b.resource == responder.resource)
                    found.append((node, binding))
        return found

    def request(self, retrieval: str, key, instance: RuntimeInstance, at: int) -> ResponseMsg:
        candidates = self.responders(retrieval)
        if not candidates:
            raise ToolchainError("E-NO-RESPONDER", f"no device answers {retrieval} for {instance.instance_id}")
        origin = instance.node.region_path
        node, binding = min(candidates, key=lambda c: (-origin.common_prefix_length(c[0].region_path), c[0].name))
        self._correlation += 1
        message = RequestMsg(retrieval, key, instance.instance_id, f"req-{self._correlation}")
        self.record(REQUEST, retrieval, f"id={message.correlation_id}", f"requester={instance.instance_id}",
                    f"responder={node.name}/{binding.resource}", f"key={format_value(key)}", at=at)
        prefix = "query" if binding.kind == STORAGE else "fetch"
        payload = getattr(node.drivers[binding.resource], f"{prefix}{retrieval}")(key)
        if payload is None:
            raise ToolchainError("E-NO-RESPONDER", f"{node.name}/{binding.resource} has no {retrieval} for {key!r}")
        entry = next(r for section in ("retrievals", "requests")
                     for r in binding.declaration.get(section, []) if r["name"] == retrieval)
        payload = check_payload(self.structs.get(entry["struct"], []), payload, f"{retrieval} response")
        self.record(RESPOND, retrieval, f"id={message.correlation_id}", *self._payload_details(payload),
                    at=at + 2 * self.latency)
        return ResponseMsg(retrieval, message.correlation_id, payload)

    # ── scenario ──

    def _inject(self, step) -> None:
        node = self.nodes.get(step.device)
        if node is None:
            raise ToolchainError("E-SCENARIO-DEVICE", f"line {step.line}: unknown device {step.device}")
        if step.kind == EMIT:
            for binding in node.package.driver_bindings:
                event = next((e for e in binding.declaration.get("generates", []) if e["name"] == step.name), None)
                if binding.kind == SENSOR and event is not None:
                    types = dict(self.structs.get(event["struct"], []))
                    payload = {k: coerce_value(v, types.get(k, "string")) for k, v in step.fields}
                    node.drivers[binding.resource].inject(step.name, payload)
                    return
            raise ToolchainError("E-SCENARIO-DEVICE", f"line {step.line}: {step.device} has no sensor for {step.name}")
        for binding in node.package.driver_bindings:
            if binding.kind != USER_INTERFACE:
                continue
            signature = next((c for c in binding.declaration.get("commands", []) if c["name"] == step.name), None)
            if signature is not None:
                if len(step.args) != len(signature["params"]):
                    raise ToolchainError("E-ARG-ARITY", f"line {step.line}: {step.name} takes "
                                         f"{len(signature['params'])} argument(s)")
                args = [coerce_value(a, p["type"]) for a, p in zip(step.args, signature["params"])]
                getattr(node.drivers[binding.resource], f"issue{step.name}")(*args)
                return
        raise ToolchainError("E-SCENARIO-DEVICE", f"line {step.line}: {step.device} has no user interface "
                             f"command {step.name}")

    def run(self, scenario: Scenario, seed: int = 0) -> Trace:
        self.seed = seed
        self._reset()
        for step in scenario.steps:
            self._push(step.time, _INJECT, f"{step.line:08d}", lambda s=step: self._inject(s))
        processed = 0
        while self._queue:
            time, _, _, _, action = self._queue[0]
            if scenario.end is not None and time > scenario.end:
                break
            heapq.heappop(self._queue)
            self.now = time
            action()
            processed += 1
        self.trace.records.sort(key=lambda r: r.virtual_time)
        logger.info(f"Simulation finished at t={self.now} with {len(self.trace.records)} records "
                    f"({processed} queue items)")
        return self.trace


def load(packages: List[DevicePackage], registry: HandlerRegistry, latency: Optional[int] = None) -> Simulator:
    missing_handlers = sorted({
        f"{instance.service}.{hook}"
        for package in packages
        for instance in package.service_instances
        for hook in instance.handler_keys
        if (instance.service, hook) not in registry.handlers
    })
    if missing_handlers:
        raise ToolchainError("E-MISSING-HANDLER", f"no handler registered for {', '.join(missing_handlers)}")
    missing_drivers = sorted({
        f"{binding.factory_key[0]}/{binding.factory_key[1]}"
        for package in packages
        for binding in package.driver_bindings
        if tuple(binding.factory_key) not in registry.drivers
    })
    if missing_drivers:
        raise ToolchainError("E-MISSING-DRIVER", f"no driver registered for {', '.join(missing_drivers)}")
    sim = Simulator(packages, registry, latency)
    logger.info(f"Loaded simulator with {sim.node_count} nodes")
    return sim


def run_scenario(sim: Simulator, scenario: Scenario, seed: int = 0) -> Trace:
    return sim.run(scenario, seed)
