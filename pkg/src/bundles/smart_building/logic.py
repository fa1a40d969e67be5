"""
Application logic for the smart-building bundle.

Averages flow up Room -> Floor -> Building; badge events turn a worker's
stored preference into a SetTemp for the room heater, and the lowest setting
(heater off) once the badge leaves.
"""

from typing import Dict

from src.config import Config
from src.runtime import Event, HandlerRegistry, ServiceContext

registry = HandlerRegistry()


def _mean(ctx: ServiceContext, event: Event) -> Dict:
    """Latest reading per source, averaged."""
    readings = ctx.state.setdefault("readings", {})
    readings[event.publisher] = event.payload["tempValue"]
    return {
        "tempValue": sum(readings.values()) / len(readings),
        "unitOfMeasurement": event.payload["unitOfMeasurement"],
    }


@registry.handler("RoomAvgTemp", "onNewtempMeasurement")
def room_average(ctx: ServiceContext, event: Event) -> None:
    ctx.publish("roomAvgTempMeasurement", _mean(ctx, event))


@registry.handler("FloorAvgTemp", "onNewroomAvgTempMeasurement")
def floor_average(ctx: ServiceContext, event: Event) -> None:
    ctx.publish("floorAvgTempMeasurement", _mean(ctx, event))


@registry.handler("BuildingAvgTemp", "onNewfloorAvgTempMeasurement")
def building_average(ctx: ServiceContext, event: Event) -> None:
    ctx.publish("buildingAvgTempMeasurement", _mean(ctx, event))


@registry.handler("Proximity", "onNewbadgeDetected")
def badge_detected(ctx: ServiceContext, event: Event) -> None:
    profile = ctx.request("profile", event.payload["badgeID"])
    ctx.state["present"] = event.payload["badgeID"]
    ctx.publish("tempPref", profile)


@registry.handler("Proximity", "onNewbadgeDisappeared")
def badge_disappeared(ctx: ServiceContext, event: Event) -> None:
    ctx.state.pop("present", None)
    ctx.publish("lowestSetting", {"tempValue": Config.LOWEST_SETTING_TEMP, "unitOfMeasurement": "C"})


@registry.handler("RoomController", "onNewroomAvgTempMeasurement")
def room_temperature(ctx: ServiceContext, event: Event) -> None:
    ctx.state["roomAvg"] = event.payload["tempValue"]


@registry.handler("RoomController", "onNewtempPref")
def apply_preference(ctx: ServiceContext, event: Event) -> None:
    ctx.state["setPoint"] = event.payload["tempValue"]
    ctx.command("SetTemp", event.payload["tempValue"])


@registry.handler("RoomController", "onNewlowestSetting")
def apply_lowest_setting(ctx: ServiceContext, event: Event) -> None:
    ctx.state["setPoint"] = None
    ctx.command("Off")


@registry.handler("Monitor", "onNewbuildingAvgTempMeasurement")
def show_building_average(ctx: ServiceContext, event: Event) -> None:
    ctx.command("Display", event.payload["tempValue"])


def smart_building_logic() -> HandlerRegistry:
    return registry
