"""
Tests for the linker (src/linker.py).

Covers: link (package contents, responders, driver bindings, instance
conservation, error codes), placement checks against the deployment,
package_to_json, write_packages, read_packages.
"""

from dataclasses import replace
import json

import pytest

from src.errors import ToolchainError
from src.linker import LinkError, link, package_to_json, read_package, read_packages, write_packages
from src.mapper import load_mapping, mapping_to_json
from src.model import Assignment, RegionPath, Responder, ServiceInstance, derive_instances
from src.parsers import parse_deployment
from src.printer import print_deployment

SPARE_DEVICE = """device Spare-Device {
  region {
    Building:15; Floor:11; Room:1;
  }
  resources { }
  type: JavaSE;
  mobile: false;
}
"""


def _link(system, build, dep=None, mapping=None):
    return link(system.architecture, dep or system.deployment, system.vocabulary,
                mapping or build.mapping, (build.framework, build.drivers))


def _package(packages, device):
    return next(p for p in packages if p.device == device)


class TestLink:

    def test_one_package_per_device(self, sb_build):
        assert [p.device for p in sb_build.packages] == sorted(p.device for p in sb_build.packages)
        assert len(sb_build.packages) == 10

    def test_storage_responder(self, sb_build):
        profile_db = _package(sb_build.packages, "ProfileDB-Device")
        assert profile_db.responders == (Responder("profile", "ProfileDB"),)
        gui = _package(sb_build.packages, "GUI-Device")
        assert gui.responders == (Responder("preference", "EndUserGUI"),)

    def test_heater_binding(self, sb_build):
        device = _package(sb_build.packages, "TemperatureMgmt-Device-1")
        heater = next(b for b in device.driver_bindings if b.resource == "Heater")
        assert heater.kind == "actuator"
        assert heater.interface == "IHeater"
        assert heater.factory_key == ("Heater", "JavaSE")
        assert [a["name"] for a in heater.declaration["actions"]] == ["Off", "SetTemp"]

    def test_platform_in_factory_key(self, sb_build):
        gui = _package(sb_build.packages, "GUI-Device")
        assert gui.driver_bindings[0].factory_key == ("EndUserGUI", "Android")

    def test_instances_conserved(self, sb_system, sb_build):
        packaged = [i.instance_id for p in sb_build.packages for i in p.service_instances]
        expected = [i.instance_id for i in derive_instances(sb_system.architecture, sb_system.deployment)]
        assert sorted(packaged) == sorted(expected)
        placed = {a.instance.instance_id: a.device for a in sb_build.mapping.assignments}
        for package in sb_build.packages:
            for instance in package.service_instances:
                assert placed[instance.instance_id] == package.device

    def test_instance_contents(self, sb_build):
        instance = next(i for p in sb_build.packages for i in p.service_instances
                        if i.instance_id == "RoomController@Building:15/Floor:11/Room:1")
        assert instance.handler_keys == ("onNewroomAvgTempMeasurement", "onNewtempPref", "onNewlowestSetting")
        assert [c.action for c in instance.commands] == ["SetTemp", "Off"]
        assert instance.commands[0].targets == ("Heater",)
        assert all(s.partition == instance.partition for s in instance.subscriptions)

    def test_structs_are_referenced_only(self, sb_system, sb_build):
        known = {s.name for s in sb_system.vocabulary.structs}
        for package in sb_build.packages:
            assert {s.name for s in package.structs} <= known
        profile_db = _package(sb_build.packages, "ProfileDB-Device")
        assert "TempStruct" in {s.name for s in profile_db.structs}

    def test_deterministic(self, sb_system, sb_build):
        first = [package_to_json(p) for p in _link(sb_system, sb_build)]
        second = [package_to_json(p) for p in _link(sb_system, sb_build)]
        assert first == second

    def test_roleless_device_gets_no_package(self, sb_system, sb_build):
        dep = parse_deployment(print_deployment(sb_system.deployment) + SPARE_DEVICE)
        packages = _link(sb_system, sb_build, dep=dep)
        assert "Spare-Device" not in {p.device for p in packages}
        assert len(packages) == 10

    def test_unmapped_instance(self, sb_system, sb_build):
        mapping = replace(sb_build.mapping, assignments=sb_build.mapping.assignments[1:])
        with pytest.raises(ToolchainError) as exc:
            _link(sb_system, sb_build, mapping=mapping)
        assert exc.value.code == "E-UNMAPPED-INSTANCE"

    def test_unknown_device(self, sb_system, sb_build):
        first = sb_build.mapping.assignments[0]
        assignments = (Assignment(first.instance, "Ghost-Device", 1),) + sb_build.mapping.assignments[1:]
        with pytest.raises(ToolchainError) as exc:
            _link(sb_system, sb_build, mapping=replace(sb_build.mapping, assignments=assignments))
        assert exc.value.code == "E-UNKNOWN-DEVICE"


# ─── placement checks ────────────────────────────────────────────────

class TestPlacementChecks:

    def _with(self, build, assignments):
        return replace(build.mapping, assignments=tuple(assignments))

    def test_duplicate_assignment(self, sb_system, sb_build):
        assignments = sb_build.mapping.assignments + (sb_build.mapping.assignments[0],)
        with pytest.raises(LinkError) as exc:
            _link(sb_system, sb_build, mapping=self._with(sb_build, assignments))
        assert exc.value.code == "E-DUPLICATE-ASSIGNMENT"

    def test_duplicate_on_another_device(self, sb_system, sb_build):
        first = sb_build.mapping.assignments[0]
        other = next(d.name for d in sb_system.deployment.devices
                     if first.instance.partition.is_prefix_of(d.region_path) and d.name != first.device)
        assignments = sb_build.mapping.assignments + (Assignment(first.instance, other, first.candidates),)
        with pytest.raises(LinkError) as exc:
            _link(sb_system, sb_build, mapping=self._with(sb_build, assignments))
        assert exc.value.code == "E-DUPLICATE-ASSIGNMENT"
        assert first.instance.instance_id in exc.value.message

    def test_unknown_instance(self, sb_system, sb_build):
        service = sb_system.architecture.service("RoomController")
        ghost = ServiceInstance(service, RegionPath.of(("Building", 15), ("Floor", 11), ("Room", 9)))
        assignments = sb_build.mapping.assignments + (Assignment(ghost, "TemperatureMgmt-Device-1", 1),)
        with pytest.raises(LinkError) as exc:
            _link(sb_system, sb_build, mapping=self._with(sb_build, assignments))
        assert exc.value.code == "E-UNKNOWN-INSTANCE"

    def test_device_outside_partition(self, sb_system, sb_build):
        index, moved = next((n, a) for n, a in enumerate(sb_build.mapping.assignments)
                            if a.instance.instance_id == "RoomController@Building:15/Floor:11/Room:1")
        assignments = list(sb_build.mapping.assignments)
        assignments[index] = Assignment(moved.instance, "TemperatureMgmt-Device-7", moved.candidates)
        with pytest.raises(LinkError) as exc:
            _link(sb_system, sb_build, mapping=self._with(sb_build, assignments))
        assert exc.value.code == "E-PARTITION-VIOLATION"
        assert "TemperatureMgmt-Device-7" in exc.value.message

    def test_hand_edited_mapping_file(self, sb_system, sb_build):
        document = json.loads(mapping_to_json(sb_build.mapping))
        room = RegionPath.of(("Building", 15), ("Floor", 11), ("Room", 1))
        entry = next(e for e in document["assignments"]
                     if e["service"] == "RoomController" and RegionPath.from_json(e["partition"]) == room)
        entry["device"] = "GUI-Device"
        mapping = load_mapping(json.dumps(document), sb_system.architecture)
        with pytest.raises(ToolchainError) as exc:
            _link(sb_system, sb_build, mapping=mapping)
        assert exc.value.code == "E-PARTITION-VIOLATION"

    def test_unedited_mapping_file_links(self, sb_system, sb_build):
        mapping = load_mapping(mapping_to_json(sb_build.mapping), sb_system.architecture)
        packages = _link(sb_system, sb_build, mapping=mapping)
        assert [package_to_json(p) for p in packages] == [package_to_json(p) for p in sb_build.packages]


class TestPackageFiles:

    def test_write_then_read(self, sb_build, tmp_path):
        paths = write_packages(sb_build.packages, str(tmp_path / "packages"))
        assert len(paths) == 10
        assert paths[0].endswith(".pkg.json")
        loaded = read_packages(str(tmp_path / "packages"))
        assert [package_to_json(p) for p in loaded] == [package_to_json(p) for p in sb_build.packages]

    def test_camel_case_keys(self, sb_build):
        text = package_to_json(sb_build.packages[0])
        for key in ("platformType", "regionPath", "driverBindings", "serviceInstances"):
            assert f'"{key}"' in text

    def test_malformed_package(self, tmp_path):
        path = tmp_path / "Broken.pkg.json"
        path.write_text('{"device": "Broken"}')
        with pytest.raises(ToolchainError) as exc:
            read_package(str(path))
        assert exc.value.code == "E-IO"

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ToolchainError) as exc:
            read_packages(str(tmp_path / "nowhere"))
        assert exc.value.code == "E-IO"
