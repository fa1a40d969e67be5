"""
Application logic for the fire-detection bundle.

A room is on fire when its average temperature exceeds the configured
threshold while smoke is present. States are published only when they
change, so quiet rooms produce no traffic.
"""

from src.config import Config
from src.runtime import Event, HandlerRegistry, ServiceContext

registry = HandlerRegistry()


def _publish_on_change(ctx: ServiceContext, event_name: str, fire: bool) -> None:
    if ctx.state.get("fire", False) != fire:
        ctx.state["fire"] = fire
        ctx.publish(event_name, {"fire": fire})


@registry.handler("RoomAvgTemp", "onNewtempMeasurement")
def room_average(ctx: ServiceContext, event: Event) -> None:
    readings = ctx.state.setdefault("readings", {})
    readings[event.publisher] = event.payload["tempValue"]
    ctx.publish("roomAvgTemp", {
        "tempValue": sum(readings.values()) / len(readings),
        "unitOfMeasurement": event.payload["unitOfMeasurement"],
    })


def _room_state(ctx: ServiceContext) -> None:
    hot = ctx.state.get("temp", 0.0) > Config.FIRE_TEMP_THRESHOLD
    _publish_on_change(ctx, "roomFireState", hot and ctx.state.get("smoke", False))


@registry.handler("RoomFireState", "onNewroomAvgTemp")
def room_temperature(ctx: ServiceContext, event: Event) -> None:
    ctx.state["temp"] = event.payload["tempValue"]
    _room_state(ctx)


@registry.handler("RoomFireState", "onNewsmokeMeasurement")
def room_smoke(ctx: ServiceContext, event: Event) -> None:
    ctx.state["smoke"] = event.payload["smokePresent"]
    _room_state(ctx)


@registry.handler("FloorFireState", "onNewroomFireState")
def floor_state(ctx: ServiceContext, event: Event) -> None:
    rooms = ctx.state.setdefault("rooms", {})
    rooms[event.publisher] = event.payload["fire"]
    _publish_on_change(ctx, "floorFireState", any(rooms.values()))


@registry.handler("BuildingFireController", "onNewfloorFireState")
def building_controller(ctx: ServiceContext, event: Event) -> None:
    floors = ctx.state.setdefault("floors", {})
    floors[event.publisher] = event.payload["fire"]
    fire = any(floors.values())
    active = ctx.state.get("active", False)
    if fire and not active:
        ctx.state["active"] = True
        ctx.command("Activate")
        ctx.command("Display", "fire detected")
    elif active and not fire:
        ctx.state["active"] = False
        ctx.command("Deactivate")
        ctx.command("Display", "fire cleared")


def fire_detection_logic() -> HandlerRegistry:
    return registry
