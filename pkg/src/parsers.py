"""
Parsers for the three specification languages.

SVL (vocabulary), SAL (architecture) and SDL (deployment) are Lark LALR
grammars sharing one set of terminals. Lark builds the parse tree with
positions attached; a Transformer per language turns it into the model and
applies the checks a context-free grammar cannot express (duplicate names,
unresolved struct references, known primitive types). Every failure raises
ParseError carrying the span of the offending token and, for syntax errors,
the tokens that would have been accepted. The grammar is documented in
docs/grammar.md.
"""

from typing import Dict, List, Optional, Set
import logging

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from src.errors import ParseError
from src.model import (
    PRIMITIVE_TYPES,
    ActuatorDecl,
    Architecture,
    CommandSpec,
    ComputationalService,
    ConsumeSpec,
    DataStructure,
    Deployment,
    DeviceDecl,
    EventDecl,
    Field,
    GenerateSpec,
    Param,
    RegionLabel,
    RegionPath,
    RequestSpec,
    Retrieval,
    ScopeSpec,
    SensorDecl,
    Signature,
    SourceSpan,
    StorageDecl,
    UserInterfaceDecl,
    Vocabulary,
)

logger = logging.getLogger(__name__)

RESOURCE_BLOCKS = ["sensors", "actuators", "storages", "userinterfaces"]
MALFORMED_HOPS = "malformed hops clause (expected hops:<uint>:<identifier>)"

# Words may carry hyphens after the first character (in-region,
# TemperatureMgmt-Device-1). `//` comments run to the end of the line.
_TERMINALS = r"""
NAME: /[A-Za-z_][A-Za-z0-9_\-]*/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_INT = r"""
INT: /-?[0-9]+/
"""

SVL_GRAMMAR = r"""
start: "vocabulary" NAME ";" regions structs? resources

regions: "regions" "{" region* "}"
region: NAME ":" NAME ";"

structs: "structs" "{" struct* "}"
struct: NAME "{" field* "}"
field: NAME ":" NAME ";"

resources: "resources" "{" block* "}"
block: "sensors" "{" sensor* "}"                -> sensors
     | "actuators" "{" actuator* "}"            -> actuators
     | "storages" "{" storage* "}"              -> storages
     | "userinterfaces" "{" user_interface* "}" -> userinterfaces

sensor: NAME "{" ("generate" event)* "}"
event: NAME ":" NAME ";"
actuator: NAME "{" ("action" signature)* "}"
storage: NAME "{" ("generate" retrieval)* "}"
user_interface: NAME "{" ui_entry* "}"
ui_entry: "command" signature -> ui_command
        | "action" signature  -> ui_action
        | "request" retrieval -> ui_request

signature: NAME "(" _params? ")" ";"
_params: param ("," param)*
param: NAME ":" NAME
retrieval: NAME ":" NAME "accessed-by" NAME ":" NAME ";"
""" + _TERMINALS

SAL_GRAMMAR = r"""
start: "architecture" NAME "uses" NAME ";" service*

service: "computationalService" NAME "{" _clause* "}"
_clause: consume | generate | request | command | in_region
consume: "consume" NAME "from" scope ";"
generate: "generate" NAME ":" NAME ";"
request: "request" NAME ";"
command: "command" NAME "(" _names? ")" "to" scope ";"
in_region: "in-region" ":" NAME ";"

scope: NAME ":" INT ":" NAME
_names: NAME ("," NAME)*
""" + _TERMINALS + _INT

SDL_GRAMMAR = r"""
start: "deployment" NAME "uses" NAME ";" device*

device: "device" NAME "{" _device_clause* "}"
_device_clause: region | resources | platform | mobile
region: "region" "{" region_entry* "}"
region_entry: NAME ":" INT ";"
resources: "resources" "{" _names? "}"
platform: "type" ":" NAME ";"
mobile: "mobile" ":" NAME ";"

_names: NAME ("," NAME)*
""" + _TERMINALS + _INT


def _lark(grammar: str) -> Lark:
    return Lark(grammar, parser="lalr", lexer="contextual", propagate_positions=True)


_SVL = _lark(SVL_GRAMMAR)
_SAL = _lark(SAL_GRAMMAR)
_SDL = _lark(SDL_GRAMMAR)

_TERMINAL_NAMES = {"NAME": "identifier", "INT": "integer", "$END": "end of input", "<END-OF-FILE>": "end of input"}


# ─── syntax errors ────────────────────────────────────────────────────

def _describe_expected(parser: Lark, names) -> List[str]:
    described = set()
    for name in names:
        if name in _TERMINAL_NAMES:
            described.add(_TERMINAL_NAMES[name])
            continue
        try:
            pattern = parser.get_terminal(name).pattern
        except KeyError:
            continue
        if pattern.type == "str":
            described.add(pattern.value)
    return sorted(described)


def _position(value) -> int:
    return value if isinstance(value, int) and value > 0 else 1


def _syntax_error(parser: Lark, exc: UnexpectedInput, file: str) -> ParseError:
    """Turns a Lark syntax error into a ParseError pointing at the offending input."""
    line, column = _position(getattr(exc, "line", 1)), _position(getattr(exc, "column", 1))
    span = SourceSpan(file, line, column, line, column)

    if isinstance(exc, UnexpectedCharacters):
        return ParseError(span, f"unexpected character {exc.char!r}", _describe_expected(parser, exc.allowed or ()))

    expected = _describe_expected(parser, getattr(exc, "expected", None) or ())
    token = getattr(exc, "token", None)
    if not isinstance(exc, UnexpectedToken) or token is None or token.type == "$END":
        return ParseError(span, "unexpected end of input", expected)

    if isinstance(token.end_column, int) and token.end_line == line:
        span = SourceSpan(file, line, column, line, max(token.end_column - 1, column))
    found = f"'{token.value}'"
    if len(expected) == 1:
        return ParseError(span, f"expected {expected[0]}, found {found}", expected)
    if token.value[:1].isalpha() and any(e[:1].isalpha() and e not in _TERMINAL_NAMES.values() for e in expected):
        return ParseError(span, f"unknown keyword {found}", expected)
    return ParseError(span, f"unexpected {found}", expected)


# ─── tree builders ────────────────────────────────────────────────────

class _Builder(Transformer):
    """Span and uniqueness helpers the three tree builders share."""

    def __init__(self, file: str):
        super().__init__()
        self.file = file

    def _span(self, at) -> SourceSpan:
        # Tokens and tree metas carry the same position attributes; Lark's end column is exclusive
        if isinstance(at, SourceSpan):
            return at
        return SourceSpan(self.file, at.line, at.column, at.end_line, at.end_column - 1)

    def _span_between(self, start, end) -> SourceSpan:
        first, last = self._span(start), self._span(end)
        return SourceSpan(self.file, first.start_line, first.start_col, last.end_line, last.end_col)

    def _fail(self, at, message: str, expected: Optional[List[str]] = None):
        raise ParseError(self._span(at), message, expected)

    def _check_unique(self, name: str, at, seen: Set[str], what: str) -> None:
        if name in seen:
            self._fail(at, f"duplicate {what} '{name}'")
        seen.add(name)

    def _primitive(self, token: Token) -> str:
        if token.value not in PRIMITIVE_TYPES:
            self._fail(token, f"unknown primitive type '{token.value}'", list(PRIMITIVE_TYPES))
        return token.value


# ─── SVL ──────────────────────────────────────────────────────────────

@v_args(meta=True)
class _VocabularyBuilder(_Builder):

    def __init__(self, file: str):
        super().__init__(file)
        self._struct_refs: List[Token] = []

    def start(self, meta, children) -> Vocabulary:
        name, regions, *rest = children
        structs = rest[0] if len(rest) == 2 else []
        known = {s.name for s in structs}
        for ref in self._struct_refs:
            if ref.value not in known:
                self._fail(ref, f"unresolved struct reference '{ref.value}'")
        vocab = Vocabulary(
            name=name.value,
            regions=tuple(regions),
            structs=tuple(structs),
            span=self._span(meta),
            **rest[-1],
        )
        self._check_ui_commands(vocab)
        return vocab

    def region(self, meta, children) -> Token:
        label, kind = children
        if kind.value != "integer":
            self._fail(kind, f"region type must be integer, found '{kind.value}'", ["integer"])
        return label

    def regions(self, meta, labels) -> List[RegionLabel]:
        if not labels:
            self._fail(meta, "regions block must declare at least one region")
        seen: Set[str] = set()
        for label in labels:
            self._check_unique(label.value, label, seen, "region")
        return [RegionLabel(label.value, depth, self._span(label)) for depth, label in enumerate(labels)]

    def field(self, meta, children):
        name, kind = children
        return name, Field(name.value, self._primitive(kind))

    def struct(self, meta, children) -> DataStructure:
        name, *fields = children
        seen: Set[str] = set()
        for token, _ in fields:
            self._check_unique(token.value, token, seen, f"field in struct {name.value}")
        return DataStructure(name.value, tuple(f for _, f in fields), self._span(meta))

    def structs(self, meta, structs) -> List[DataStructure]:
        seen: Set[str] = set()
        for struct in structs:
            self._check_unique(struct.name, struct.span, seen, "struct")
        return structs

    def param(self, meta, children):
        name, kind = children
        return name, Param(name.value, self._primitive(kind))

    def signature(self, meta, children) -> Signature:
        name, *params = children
        seen: Set[str] = set()
        for token, _ in params:
            self._check_unique(token.value, token, seen, "parameter")
        return Signature(name.value, tuple(p for _, p in params), self._span(meta))

    def retrieval(self, meta, children) -> Retrieval:
        name, struct, key, kind = children
        self._struct_refs.append(struct)
        return Retrieval(name.value, struct.value, Param(key.value, self._primitive(kind)), self._span(meta))

    def event(self, meta, children) -> EventDecl:
        name, struct = children
        self._struct_refs.append(struct)
        return EventDecl(name.value, struct.value, self._span(meta))

    def sensor(self, meta, children) -> SensorDecl:
        name, *events = children
        return SensorDecl(name.value, tuple(events), self._span(meta))

    def actuator(self, meta, children) -> ActuatorDecl:
        name, *actions = children
        seen: Set[str] = set()
        for action in actions:
            self._check_unique(action.name, action.span, seen, f"action in {name.value}")
        return ActuatorDecl(name.value, tuple(actions), self._span(meta))

    def storage(self, meta, children) -> StorageDecl:
        name, *retrievals = children
        seen: Set[str] = set()
        for retrieval in retrievals:
            self._check_unique(retrieval.name, retrieval.span, seen, f"retrieval in {name.value}")
        return StorageDecl(name.value, tuple(retrievals), self._span(meta))

    def ui_command(self, meta, children):
        return "command", children[0]

    def ui_action(self, meta, children):
        return "action", children[0]

    def ui_request(self, meta, children):
        return "request", children[0]

    def user_interface(self, meta, children) -> UserInterfaceDecl:
        name, *entries = children
        grouped: Dict[str, list] = {"command": [], "action": [], "request": []}
        seen: Set[str] = set()
        for clause, entry in entries:
            self._check_unique(entry.name, entry.span, seen, f"entry in {name.value}")
            grouped[clause].append(entry)
        return UserInterfaceDecl(
            name.value,
            commands=tuple(grouped["command"]),
            actions=tuple(grouped["action"]),
            requests=tuple(grouped["request"]),
            span=self._span(meta),
        )

    def sensors(self, meta, children):
        return "sensors", meta, children

    def actuators(self, meta, children):
        return "actuators", meta, children

    def storages(self, meta, children):
        return "storages", meta, children

    def userinterfaces(self, meta, children):
        return "userinterfaces", meta, children

    def resources(self, meta, blocks) -> Dict[str, tuple]:
        found: Dict[str, tuple] = {block: () for block in RESOURCE_BLOCKS}
        seen_blocks: Set[str] = set()
        names: Set[str] = set()
        for block, at, decls in blocks:
            self._check_unique(block, at, seen_blocks, "block")
            for decl in decls:
                self._check_unique(decl.name, decl.span, names, "resource")
            found[block] = tuple(decls)
        events: Set[str] = set()
        for sensor in found["sensors"]:
            for event in sensor.generates:
                self._check_unique(event.name, event.span, events, "sensor event")
        return found

    def _check_ui_commands(self, vocab: Vocabulary) -> None:
        actuator_actions = {a.name for actuator in vocab.actuators for a in actuator.actions}
        for ui in vocab.userinterfaces:
            for command in ui.commands:
                if command.name not in actuator_actions:
                    raise ParseError(
                        command.span,
                        f"user-interface command '{command.name}' names no actuator action",
                        sorted(actuator_actions),
                    )


# ─── SAL ──────────────────────────────────────────────────────────────

@v_args(meta=True)
class _ArchitectureBuilder(_Builder):

    def start(self, meta, children) -> Architecture:
        name, vocabulary, *services = children
        seen: Set[str] = set()
        for service in services:
            self._check_unique(service.name, service.span, seen, "service")
        return Architecture(name.value, vocabulary.value, tuple(services), self._span(meta))

    def scope(self, meta, children) -> ScopeSpec:
        keyword, radius, label = children
        if keyword.value != "hops":
            self._fail(keyword, MALFORMED_HOPS, ["hops"])
        if int(radius.value) < 0:
            self._fail(radius, "radius must be non-negative")
        return ScopeSpec(int(radius.value), label.value, self._span(meta))

    def consume(self, meta, children) -> ConsumeSpec:
        event, scope = children
        return ConsumeSpec(event.value, scope, self._span(meta))

    def generate(self, meta, children) -> GenerateSpec:
        event, struct = children
        return GenerateSpec(event.value, struct.value, self._span(meta))

    def request(self, meta, children) -> RequestSpec:
        return RequestSpec(children[0].value, self._span(meta))

    def command(self, meta, children) -> CommandSpec:
        action, *args, scope = children
        return CommandSpec(action.value, tuple(a.value for a in args), scope, self._span(meta))

    def in_region(self, meta, children) -> Token:
        return children[0]

    def service(self, meta, children) -> ComputationalService:
        name, *clauses = children
        consumes: List[ConsumeSpec] = []
        generates: List[GenerateSpec] = []
        requests: List[RequestSpec] = []
        commands: List[CommandSpec] = []
        consumed: Set[str] = set()
        in_region: Optional[Token] = None

        for clause in clauses:
            if isinstance(clause, ConsumeSpec):
                self._check_unique(clause.event, clause.span, consumed, f"consume in {name.value}")
                consumes.append(clause)
            elif isinstance(clause, GenerateSpec):
                generates.append(clause)
            elif isinstance(clause, RequestSpec):
                requests.append(clause)
            elif isinstance(clause, CommandSpec):
                commands.append(clause)
            elif in_region is not None:
                self._fail(clause, f"duplicate in-region in service '{name.value}'")
            else:
                in_region = clause

        if in_region is None:
            self._fail(meta, f"service '{name.value}' is missing in-region", ["in-region"])
        return ComputationalService(
            name=name.value,
            consumes=tuple(consumes),
            generates=tuple(generates),
            requests=tuple(requests),
            commands=tuple(commands),
            in_region=in_region.value,
            span=self._span_between(name, meta),
            in_region_span=self._span(in_region),
        )


# ─── SDL ──────────────────────────────────────────────────────────────

@v_args(meta=True)
class _DeploymentBuilder(_Builder):

    def start(self, meta, children) -> Deployment:
        name, vocabulary, *devices = children
        if not devices:
            self._fail(meta, "deployment declares no devices", ["device"])
        seen: Set[str] = set()
        for device in devices:
            self._check_unique(device.name, device.span, seen, "device")
        return Deployment(name.value, vocabulary.value, tuple(devices), self._span(meta))

    def region_entry(self, meta, children):
        label, value = children
        return label, int(value.value)

    def region(self, meta, entries):
        labels: Set[str] = set()
        for label, _ in entries:
            if label.value in labels:
                self._fail(label, f"malformed region entry: label '{label.value}' repeated")
            labels.add(label.value)
        return "region", meta, RegionPath(tuple((label.value, value) for label, value in entries))

    def resources(self, meta, names):
        seen: Set[str] = set()
        for resource in names:
            self._check_unique(resource.value, resource, seen, "resource")
        return "resources", meta, names

    def platform(self, meta, children):
        return "type", meta, children[0].value

    def mobile(self, meta, children):
        flag = children[0]
        if flag.value not in ("true", "false"):
            self._fail(flag, f"mobile must be true or false, found '{flag.value}'", ["true", "false"])
        return "mobile", meta, flag.value == "true"

    def device(self, meta, children) -> DeviceDecl:
        name, *clauses = children
        values: Dict[str, object] = {}
        spans: Dict[str, SourceSpan] = {}
        seen: Set[str] = set()
        for clause, at, value in clauses:
            self._check_unique(clause, at, seen, f"clause in device {name.value}")
            values[clause] = value
            spans[clause] = self._span(at)

        for required in ("region", "type"):
            if required not in values:
                self._fail(meta, f"device '{name.value}' is missing {required}", [required])
        resources: List[Token] = values.get("resources", [])
        return DeviceDecl(
            name=name.value,
            region_path=values["region"],
            resources=tuple(t.value for t in resources),
            platform_type=values["type"],
            mobile=values.get("mobile", False),
            span=self._span_between(name, meta),
            region_span=spans["region"],
            resource_spans=tuple(self._span(t) for t in resources),
        )


# ─── entry points ─────────────────────────────────────────────────────

def _parse(parser: Lark, builder: _Builder, text: str):
    try:
        tree = parser.parse(text)
    except UnexpectedInput as exc:
        raise _syntax_error(parser, exc, builder.file) from None
    try:
        return builder.transform(tree)
    except VisitError as exc:
        raise exc.orig_exc from None


def parse_vocabulary(text: str, file: str = "<string>") -> Vocabulary:
    vocab = _parse(_SVL, _VocabularyBuilder(file), text)
    logger.debug(f"Parsed vocabulary {vocab.name} from {file}")
    return vocab


def parse_architecture(text: str, file: str = "<string>") -> Architecture:
    arch = _parse(_SAL, _ArchitectureBuilder(file), text)
    logger.debug(f"Parsed architecture {arch.name} ({len(arch.services)} services) from {file}")
    return arch


def parse_deployment(text: str, file: str = "<string>") -> Deployment:
    dep = _parse(_SDL, _DeploymentBuilder(file), text)
    logger.debug(f"Parsed deployment {dep.name} ({len(dep.devices)} devices) from {file}")
    return dep
