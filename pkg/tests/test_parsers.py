"""
Tests for the three parsers and the canonical printers
(src/parsers.py, src/printer.py).

Covers: shared terminals, syntax error reporting, parse_vocabulary,
parse_architecture, parse_deployment, print_vocabulary, print_architecture,
print_deployment, round-trip fixpoints.
"""

import pytest

from src.errors import ParseError
from src.model import RegionPath, ScopeSpec
from src.parsers import parse_architecture, parse_deployment, parse_vocabulary
from src.printer import print_architecture, print_deployment, print_vocabulary

VOCAB = """
vocabulary Tiny;
regions { Building: integer; Room: integer; }
structs { T { v: double; } }
resources {
  sensors { S { generate reading: T; } }
  actuators { A { action Go(level: double); } }
}
"""

DEVICE = "device X { region { Building:1; } resources { } type: T; }\n"


def _within_bounds(text: str, error: ParseError) -> bool:
    lines = text.split("\n")
    span = error.span
    if not 1 <= span.start_line <= len(lines):
        return False
    return 1 <= span.start_col <= len(lines[span.start_line - 1]) + 1


# ─── terminals ───────────────────────────────────────────────────────

class TestTerminals:

    def test_hyphenated_words(self):
        dep = parse_deployment("deployment D uses V;\n" + DEVICE.replace("device X", "device TemperatureMgmt-Device-1"))
        assert dep.devices[0].name == "TemperatureMgmt-Device-1"

    def test_hyphenated_keyword(self):
        arch = parse_architecture("architecture A uses V;\ncomputationalService S {\n  in-region: Room;\n}\n")
        assert arch.services[0].in_region == "Room"

    def test_comments_skipped(self):
        dep = parse_deployment("// heading\ndeployment D uses V; // trailing\n" + DEVICE, "f.sdl")
        assert dep.name == "D"
        assert dep.devices[0].span.start_line == 3

    def test_span_columns(self):
        dep = parse_deployment("deployment D uses V;\n  " + DEVICE, "f.sdl")
        device = dep.devices[0]
        assert str(device.span) == "f.sdl:2:10"
        assert device.resource_spans == ()
        assert str(device.region_span) == "f.sdl:2:14"

    def test_unexpected_character(self):
        with pytest.raises(ParseError) as exc:
            parse_vocabulary("vocabulary V;\nregions { @ }", "v.svl")
        assert "unexpected character '@'" in str(exc.value)
        assert exc.value.span.start_line == 2
        assert exc.value.span.start_col == 11


# ─── syntax errors ───────────────────────────────────────────────────

class TestSyntaxErrors:

    @pytest.mark.parametrize("parse,text", [
        (parse_vocabulary, ""),
        (parse_architecture, ""),
        (parse_deployment, ""),
        (parse_deployment, "\n\n   \n"),
        (parse_deployment, "// only a comment"),
        (parse_vocabulary, "vocabulary"),
        (parse_vocabulary, "vocabulary V;\nregions {"),
        (parse_architecture, "architecture A uses V;\ncomputationalService S {\n  consume e from hops:0"),
        (parse_architecture, "architecture A uses V;\ncomputationalService S { consume e from hops:x:Room; }"),
        (parse_deployment, "deployment D uses V;\ndevice X { region { Building:1; }"),
        (parse_deployment, "deployment D uses V;\ndevice X { region { Building:1 } }\n"),
        (parse_deployment, "deployment D uses V;\ndevice X { region { Building:1; } } }"),
        (parse_deployment, "deployment D uses V;\n\tdevice X $"),
    ])
    def test_error_span_within_input(self, parse, text):
        with pytest.raises(ParseError) as exc:
            parse(text, "bad.txt")
        assert exc.value.span.file == "bad.txt"
        assert _within_bounds(text, exc.value)

    def test_empty_input_points_at_start(self):
        with pytest.raises(ParseError) as exc:
            parse_vocabulary("")
        assert (exc.value.span.start_line, exc.value.span.start_col) == (1, 1)
        assert "end of input" in exc.value.message
        assert exc.value.expected == ["vocabulary"]

    def test_eof_reports_what_was_expected(self):
        with pytest.raises(ParseError) as exc:
            parse_vocabulary("vocabulary V;\nregions {")
        assert exc.value.message == "unexpected end of input"
        assert "identifier" in exc.value.expected
        assert "}" in exc.value.expected

    def test_single_expected_token(self):
        with pytest.raises(ParseError) as exc:
            parse_deployment("deployment D uses V;\ndevice X { region { Building:1 } }\n")
        assert exc.value.message == "expected ;, found '}'"
        assert (exc.value.span.start_line, exc.value.span.start_col) == (2, 32)


# ─── vocabulary ──────────────────────────────────────────────────────

class TestParseVocabulary:

    def test_smart_building(self, sb_system):
        vocab = sb_system.vocabulary
        assert vocab.name == "BuildingAutomation"
        assert vocab.region_names == ("Building", "Floor", "Room")
        assert [s.name for s in vocab.sensors] == ["TemperatureSensor", "BadgeReader"]
        assert vocab.sensor_event("badgeDisappeared")[0].name == "BadgeReader"
        assert vocab.storages[0].retrievals[0].access_key.name == "badgeID"
        gui = vocab.userinterfaces[0]
        assert [c.name for c in gui.commands] == ["Off"]
        assert [a.name for a in gui.actions] == ["Display"]
        assert [r.name for r in gui.requests] == ["preference"]

    def test_minimal(self):
        vocab = parse_vocabulary(VOCAB)
        assert vocab.actuators[0].actions[0].params[0].type == "double"
        assert vocab.storages == ()

    def test_unresolved_struct(self):
        text = VOCAB.replace("generate reading: T;", "generate reading: Missing;")
        with pytest.raises(ParseError, match="unresolved struct reference 'Missing'"):
            parse_vocabulary(text)

    def test_region_type_must_be_integer(self):
        with pytest.raises(ParseError, match="region type must be integer"):
            parse_vocabulary(VOCAB.replace("Room: integer", "Room: string"))

    def test_unknown_primitive(self):
        with pytest.raises(ParseError, match="unknown primitive type 'float'"):
            parse_vocabulary(VOCAB.replace("v: double", "v: float"))

    def test_duplicate_resource(self):
        text = VOCAB.replace("actuators { A {", "actuators { S {")
        with pytest.raises(ParseError, match="duplicate resource 'S'"):
            parse_vocabulary(text)

    def test_ui_command_must_name_actuator_action(self):
        text = VOCAB.replace("\n}\n", "\n  userinterfaces { U { command Stop(); } }\n}\n")
        with pytest.raises(ParseError, match="names no actuator action"):
            parse_vocabulary(text)

    def test_unknown_block_reports_expected(self):
        with pytest.raises(ParseError) as exc:
            parse_vocabulary(VOCAB.replace("sensors {", "gadgets {"))
        assert "sensors" in exc.value.expected


# ─── architecture ────────────────────────────────────────────────────

class TestParseArchitecture:

    def test_smart_building(self, sb_system):
        arch = sb_system.architecture
        proximity = arch.service("Proximity")
        assert [c.event for c in proximity.consumes] == ["badgeDetected", "badgeDisappeared"]
        assert proximity.consumes[0].scope == ScopeSpec(0, "Room")
        assert [r.retrieval for r in proximity.requests] == ["profile"]
        controller = arch.service("RoomController")
        assert controller.commands[0].action == "SetTemp"
        assert controller.commands[0].arg_names == ("setTemp",)
        assert controller.commands[1].arg_names == ()
        assert controller.in_region == "Room"

    def test_missing_in_region(self):
        text = "architecture A uses V;\ncomputationalService S {\n  generate e: T;\n}\n"
        with pytest.raises(ParseError, match="missing in-region"):
            parse_architecture(text)

    def test_malformed_hops(self):
        text = "architecture A uses V;\ncomputationalService S {\n  consume e from hop:0:Room;\n  in-region: Room;\n}\n"
        with pytest.raises(ParseError, match="malformed hops clause"):
            parse_architecture(text)

    def test_negative_radius(self):
        text = "architecture A uses V;\ncomputationalService S {\n  consume e from hops:-1:Room;\n  in-region: Room;\n}\n"
        with pytest.raises(ParseError, match="radius must be non-negative"):
            parse_architecture(text)

    def test_error_location(self):
        text = "architecture A uses V;\ncomputationalService S {\n  produce e;\n}\n"
        with pytest.raises(ParseError) as exc:
            parse_architecture(text, "a.sal")
        assert str(exc.value).startswith("a.sal:3:3: unknown keyword 'produce'")


# ─── deployment ──────────────────────────────────────────────────────

class TestParseDeployment:

    def test_smart_building(self, sb_system):
        dep = sb_system.deployment
        assert len(dep.devices) == 10
        first = dep.device("TemperatureMgmt-Device-1")
        assert first.region_path == RegionPath.of(("Building", 15), ("Floor", 11), ("Room", 1))
        assert first.resources == ("TemperatureSensor", "Heater")
        assert first.platform_type == "JavaSE"
        assert first.mobile is False

    def test_empty_deployment(self):
        with pytest.raises(ParseError, match="declares no devices"):
            parse_deployment("deployment D uses V;\n")

    def test_duplicate_device(self):
        device = "device X { region { Building:1; } resources { } type: T; }\n"
        with pytest.raises(ParseError, match="duplicate device 'X'"):
            parse_deployment("deployment D uses V;\n" + device + device)

    def test_malformed_region_entry(self):
        text = "deployment D uses V;\ndevice X { region { Building:one; } type: T; }\n"
        with pytest.raises(ParseError) as exc:
            parse_deployment(text)
        assert exc.value.message == "expected integer, found 'one'"
        assert exc.value.expected == ["integer"]

    def test_repeated_region_label(self):
        text = "deployment D uses V;\ndevice X { region { Building:1; Building:2; } type: T; }\n"
        with pytest.raises(ParseError, match="label 'Building' repeated"):
            parse_deployment(text)

    def test_missing_type(self):
        text = "deployment D uses V;\ndevice X { region { Building:1; } }\n"
        with pytest.raises(ParseError, match="missing type"):
            parse_deployment(text)

    def test_mobile_defaults_false_and_parses_true(self):
        text = "deployment D uses V;\ndevice X { region { Building:1; } type: T; mobile: true; }\n" \
               "device Y { region { Building:1; } type: T; }\n"
        dep = parse_deployment(text)
        assert dep.device("X").mobile is True
        assert dep.device("Y").mobile is False


# ─── printers and round trips ────────────────────────────────────────

class TestRoundTrip:

    @pytest.mark.parametrize("bundle", ["sb_system", "fd_system"])
    def test_structural_fixpoint(self, bundle, request):
        system = request.getfixturevalue(bundle)
        assert parse_vocabulary(print_vocabulary(system.vocabulary)) == system.vocabulary
        assert parse_architecture(print_architecture(system.architecture)) == system.architecture
        assert parse_deployment(print_deployment(system.deployment)) == system.deployment

    @pytest.mark.parametrize("bundle", ["sb_system", "fd_system"])
    def test_print_is_idempotent(self, bundle, request):
        system = request.getfixturevalue(bundle)
        for printer, parser, model in [
            (print_vocabulary, parse_vocabulary, system.vocabulary),
            (print_architecture, parse_architecture, system.architecture),
            (print_deployment, parse_deployment, system.deployment),
        ]:
            text = printer(model)
            assert printer(parser(text)) == text

    def test_shipped_deployment_is_canonical(self, smart_building, sb_system):
        with open(smart_building.deployment_path, encoding="utf-8") as handle:
            assert print_deployment(sb_system.deployment) == handle.read()

    def test_deployment_line_count(self, sb_system):
        assert len(print_deployment(sb_system.deployment).splitlines()) == 81

    def test_empty_resources_printed(self):
        dep = parse_deployment("deployment D uses V;\ndevice X { region { Building:1; } resources { } type: T; }\n")
        assert "  resources { }" in print_deployment(dep).splitlines()
