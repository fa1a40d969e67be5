"""
Cross-specification validation.

Resolves every name an architecture or deployment borrows from its
vocabulary, then lints the assembled system (producers, actuators and
responders actually present in the deployment). Validation never raises;
diagnostics are the result, sorted for stable output.
"""

from dataclasses import dataclass
from typing import List, Optional
import logging

from src.model import (
    Architecture,
    Deployment,
    SourceSpan,
    Vocabulary,
    derive_instances,
    region_distance,
)

logger = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    span: Optional[SourceSpan]
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    @property
    def sort_key(self):
        if self.span is None:
            return ("", 0, 0, self.code, self.message)
        return (self.span.file, self.span.start_line, self.span.start_col, self.code, self.message)

    def render(self) -> str:
        location = str(self.span) if self.span else "<system>:0:0"
        return f"{location}: {self.severity}[{self.code}] {self.message}"


def _sorted(diagnostics: List[Diagnostic]) -> List[Diagnostic]:
    return sorted(diagnostics, key=lambda d: d.sort_key)


def has_errors(diagnostics: List[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


def render_diagnostics(diagnostics: List[Diagnostic]) -> str:
    return "".join(d.render() + "\n" for d in diagnostics)


# ─── architecture ─────────────────────────────────────────────────────

def validate_architecture(arch: Architecture, vocab: Vocabulary) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []

    def error(code: str, span, message: str) -> None:
        diagnostics.append(Diagnostic(ERROR, code, span, message))

    if arch.vocabulary_name != vocab.name:
        error("E-VOCABULARY-MISMATCH", arch.span,
              f"architecture {arch.name} uses {arch.vocabulary_name}, not {vocab.name}")

    sensor_events = {e.name for s in vocab.sensors for e in s.generates}
    service_events = {}
    for service in arch.services:
        for gen in service.generates:
            if gen.event in sensor_events or gen.event in service_events:
                owner = service_events.get(gen.event, "a sensor")
                error("E-GENERATE-DUPLICATE", gen.span,
                      f"{service.name} generates '{gen.event}', already generated by {owner}")
            else:
                service_events[gen.event] = service.name
    known_events = sensor_events | set(service_events)

    for service in arch.services:
        in_region = vocab.region(service.in_region)
        if in_region is None:
            error("E-INREGION-LABEL", service.in_region_span or service.span,
                  f"{service.name}: in-region label '{service.in_region}' is not a declared region")

        def check_scope(scope, owner: str) -> None:
            label = vocab.region(scope.label)
            if label is None:
                error("E-SCOPE-LABEL", scope.span,
                      f"{owner}: scope label '{scope.label}' is not a declared region")
            elif in_region is not None and label.depth > in_region.depth:
                error("E-SCOPE-DEPTH", scope.span,
                      f"{owner}: scope {scope} is finer than in-region {service.in_region}")

        for consume in service.consumes:
            if consume.event not in known_events:
                error("E-CONSUME-UNRESOLVED", consume.span,
                      f"{service.name} consumes '{consume.event}', generated by no sensor or service")
            check_scope(consume.scope, f"{service.name} consume {consume.event}")

        for gen in service.generates:
            if vocab.struct(gen.struct) is None:
                error("E-STRUCT-UNRESOLVED", gen.span,
                      f"{service.name} generates '{gen.event}' of undeclared struct '{gen.struct}'")

        for request in service.requests:
            if not vocab.responders(request.retrieval):
                error("E-REQUEST-UNRESOLVED", request.span,
                      f"{service.name} requests '{request.retrieval}', provided by no storage or user interface")

        for command in service.commands:
            targets = vocab.action_targets(command.action)
            if not targets:
                error("E-COMMAND-UNRESOLVED", command.span,
                      f"{service.name} commands '{command.action}', declared by no actuator or user interface")
            else:
                arities = {len(sig.params) for _, _, sig in targets}
                if len(command.arg_names) not in arities:
                    error("E-COMMAND-ARITY", command.span,
                          f"{service.name} passes {len(command.arg_names)} argument(s) to "
                          f"'{command.action}', which takes {sorted(arities)}")
            check_scope(command.scope, f"{service.name} command {command.action}")

    return _sorted(diagnostics)


# ─── deployment ───────────────────────────────────────────────────────

def validate_deployment(dep: Deployment, vocab: Vocabulary) -> List[Diagnostic]:
    diagnostics: List[Diagnostic] = []
    hierarchy = list(vocab.region_names)

    def error(code: str, span, message: str) -> None:
        diagnostics.append(Diagnostic(ERROR, code, span, message))

    if dep.vocabulary_name != vocab.name:
        error("E-VOCABULARY-MISMATCH", dep.span,
              f"deployment {dep.name} uses {dep.vocabulary_name}, not {vocab.name}")

    for device in dep.devices:
        spans = device.resource_spans or ()
        for index, resource in enumerate(device.resources):
            if vocab.resource(resource) is None:
                span = spans[index] if index < len(spans) else device.span
                error("E-RESOURCE-UNKNOWN", span,
                      f"device {device.name} hosts '{resource}', which the vocabulary does not declare")

        labels = list(device.region_path.labels)
        region_span = device.region_span or device.span
        unknown = [label for label in labels if label not in hierarchy]
        if unknown:
            error("E-REGION-LABEL", region_span,
                  f"device {device.name}: region label(s) {', '.join(unknown)} not declared")
        elif labels != hierarchy[:len(labels)]:
            if sorted(labels, key=hierarchy.index) == hierarchy[:len(labels)]:
                error("E-REGION-ORDER", region_span,
                      f"device {device.name}: region entries must follow {' > '.join(hierarchy)}")
            else:
                error("E-REGION-DEPTH", region_span,
                      f"device {device.name}: region path skips a level of {' > '.join(hierarchy)}")
        elif len(labels) != len(hierarchy):
            error("E-REGION-DEPTH", region_span,
                  f"device {device.name}: region path must declare all of {' > '.join(hierarchy)}")

    return _sorted(diagnostics)


# ─── whole system ─────────────────────────────────────────────────────

def validate_system(arch: Architecture, dep: Deployment, vocab: Vocabulary) -> List[Diagnostic]:
    """Lints an architecture and deployment that each validate cleanly."""
    diagnostics: List[Diagnostic] = []
    hosted = {}
    for device in dep.devices:
        for resource in device.resources:
            hosted.setdefault(resource, []).append(device)
    instances = derive_instances(arch, dep)

    for service in arch.services:
        for consume in service.consumes:
            producer = vocab.sensor_event(consume.event)
            if producer is not None and producer[0].name not in hosted:
                diagnostics.append(Diagnostic(
                    WARNING, "W-NO-PRODUCER", consume.span,
                    f"{service.name} consumes '{consume.event}' but no device hosts {producer[0].name}"))

        for request in service.requests:
            providers = [name for name, _, _ in vocab.responders(request.retrieval)]
            if not any(p in hosted for p in providers):
                diagnostics.append(Diagnostic(
                    ERROR, "E-NO-RESPONDER", request.span,
                    f"{service.name} requests '{request.retrieval}' but no device hosts "
                    f"{' or '.join(providers)}"))

        for command in service.commands:
            providers = {name for name, _, _ in vocab.action_targets(command.action)}
            devices = [d for p in sorted(providers) for d in hosted.get(p, [])]
            uncovered = [
                instance for instance in instances
                if instance.service.name == service.name
                and not any(region_distance(d.region_path, instance.partition, command.scope) for d in devices)
            ]
            if uncovered:
                partitions = ", ".join(str(i.partition) for i in uncovered)
                diagnostics.append(Diagnostic(
                    WARNING, "W-NO-ACTUATOR", command.span,
                    f"{service.name} commands '{command.action}' but nothing in scope hosts it for {partitions}"))

    return _sorted(diagnostics)


def check_system(vocab: Vocabulary, arch: Architecture, dep: Deployment) -> List[Diagnostic]:
    """Architecture and deployment checks, then the system lint when both are error-free."""
    diagnostics = validate_architecture(arch, vocab) + validate_deployment(dep, vocab)
    if not has_errors(diagnostics):
        diagnostics += validate_system(arch, dep, vocab)
    logger.info(f"Validation finished: {len(diagnostics)} diagnostic(s)")
    return _sorted(diagnostics)
