"""
Simulated drivers for the fire-detection bundle.
"""

from src.runtime import ActuatorDriver, HandlerRegistry, SensorDriver, UserInterfaceDriver

PLATFORMS = ("JavaSE", "Android")


def fire_detection_drivers() -> HandlerRegistry:
    registry = HandlerRegistry()
    registry.register_driver("TemperatureSensor", PLATFORMS, SensorDriver)
    registry.register_driver("SmokeDetector", PLATFORMS, SensorDriver)
    registry.register_driver("Alarm", PLATFORMS, ActuatorDriver)
    registry.register_driver("EndUserGUI", PLATFORMS, UserInterfaceDriver)
    return registry
