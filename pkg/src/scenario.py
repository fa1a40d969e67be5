"""
Scenario files (.scn).

Line-oriented, UTF-8:

  # comment
  end 6000
  at 100 device TemperatureMgmt-Device-2 emit badgeDetected badgeID=12 timeStamp=100
  at 300 device GUI-Device ui Off()

Values stay text here; the simulator coerces them with the field types it
finds in the device packages.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging
import re
import shlex

from src.errors import ToolchainError

logger = logging.getLogger(__name__)

EMIT = "emit"
UI = "ui"

_CALL = re.compile(r"^([A-Za-z_][A-Za-z0-9_\-]*)\((.*)\)$")


@dataclass(frozen=True)
class ScenarioStep:
    line: int
    time: int
    device: str
    kind: str
    name: str
    fields: Tuple[Tuple[str, str], ...] = ()
    args: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Scenario:
    steps: Tuple[ScenarioStep, ...] = ()
    end: Optional[int] = None
    file: str = "<scenario>"


def _fail(file: str, line: int, message: str) -> ToolchainError:
    return ToolchainError("E-SCENARIO-PARSE", f"{file}:{line}: {message}")


def _time(text: str, file: str, line: int) -> int:
    if not text.isdigit():
        raise _fail(file, line, f"expected a non-negative time in ms, got '{text}'")
    return int(text)


def _parse_step(words: List[str], file: str, line: int) -> ScenarioStep:
    if len(words) < 5 or words[2] != "device":
        raise _fail(file, line, "expected 'at <ms> device <name> emit|ui ...'")
    time = _time(words[1], file, line)
    device, verb = words[3], words[4]
    if verb == EMIT:
        if len(words) < 6:
            raise _fail(file, line, "emit needs an event name")
        fields = []
        for pair in words[6:]:
            key, sep, value = pair.partition("=")
            if not sep or not key:
                raise _fail(file, line, f"expected field=value, got '{pair}'")
            fields.append((key, value))
        return ScenarioStep(line, time, device, EMIT, words[5], fields=tuple(fields))
    if verb == UI:
        match = _CALL.match("".join(words[5:]))
        if not match:
            raise _fail(file, line, "ui needs a command call such as Off() or SetTemp(22.0)")
        args = tuple(a.strip() for a in match.group(2).split(",") if a.strip())
        return ScenarioStep(line, time, device, UI, match.group(1), args=args)
    raise _fail(file, line, f"unknown step '{verb}' (expected emit or ui)")


def parse_scenario(text: str, file: str = "<scenario>") -> Scenario:
    steps: List[ScenarioStep] = []
    end = None
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            words = shlex.split(stripped)
        except ValueError as e:
            raise _fail(file, number, str(e)) from e
        if words[0] == "end":
            if len(words) != 2:
                raise _fail(file, number, "expected 'end <ms>'")
            end = _time(words[1], file, number)
        elif words[0] == "at":
            steps.append(_parse_step(words, file, number))
        else:
            raise _fail(file, number, f"unknown directive '{words[0]}'")
    steps.sort(key=lambda s: (s.time, s.line))
    logger.debug(f"Parsed scenario {file}: {len(steps)} steps, end={end}")
    return Scenario(tuple(steps), end, file)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as handle:
            return parse_scenario(handle.read(), path)
    except OSError as e:
        raise ToolchainError("E-MISSING-FILE", f"cannot read scenario {path}: {e}") from e
