"""
Simulated drivers for the smart-building bundle.
"""

from typing import Dict
import csv
import os

from src.runtime import (
    ActuatorDriver,
    HandlerRegistry,
    SensorDriver,
    StorageDriver,
    UserInterfaceDriver,
)

PLATFORMS = ("JavaSE", "Android")
PROFILES_FILE = os.path.join(os.path.dirname(__file__), "profiles.tsv")


def load_profiles(path: str = PROFILES_FILE) -> Dict[int, Dict]:
    """badgeID -> TempStruct payload, from a tab-separated fixture."""
    profiles = {}
    with open(path, encoding="utf-8", newline="") as handle:
        for row in csv.reader(handle, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            profiles[int(row[0])] = {"tempValue": float(row[1]), "unitOfMeasurement": "C"}
    return profiles


def smart_building_drivers(profiles_path: str = PROFILES_FILE) -> HandlerRegistry:
    profiles = load_profiles(profiles_path)
    registry = HandlerRegistry()
    registry.register_driver("TemperatureSensor", PLATFORMS, SensorDriver)
    registry.register_driver("BadgeReader", PLATFORMS, SensorDriver)
    registry.register_driver("Heater", PLATFORMS, ActuatorDriver)
    registry.register_driver("ProfileDB", PLATFORMS,
                             lambda binding, node: StorageDriver(binding, node, {"profile": profiles}))
    registry.register_driver("EndUserGUI", PLATFORMS,
                             lambda binding, node: UserInterfaceDriver(binding, node, {"preference": profiles}))
    return registry
