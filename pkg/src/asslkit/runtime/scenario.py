"""Scenarios: scripted stimulus sequences driving a deterministic run.

Scenario files are line oriented::

    tick <n> inject <EVENT>
    tick <n> set <METRIC> <value>
    tick <n> send <MESSAGE> <CHANNEL>
    tick <n> halt

Blank lines and lines starting with ``#`` are ignored. Names may be bare when
unique across the specification, or qualified as ``element.name``. Ticks must
be non-decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..checker import CheckedSpec
from ..names import Key, NameResolutionError, qual, resolve_channel, resolve_decl, resolve_message
from ..nodes import MetricDecl, ValueType, render_value


@dataclass(frozen=True)
class InjectEvent:
    event: Key

    def render(self) -> str:
        return f"inject {qual(self.event)}"


@dataclass(frozen=True)
class SetMetric:
    metric: Key
    value: object
    value_type: ValueType

    def render(self) -> str:
        return f"set {qual(self.metric)} {render_value(self.value, self.value_type)}"


@dataclass(frozen=True)
class SendMessage:
    message: Key
    channel: Key

    def render(self) -> str:
        return f"send {qual(self.message)} {qual(self.channel)}"


@dataclass(frozen=True)
class Halt:
    def render(self) -> str:
        return "halt"


Stimulus = InjectEvent | SetMetric | SendMessage | Halt


class ScenarioError(ValueError):
    """Malformed scenario text or unresolvable names."""


@dataclass(frozen=True)
class Scenario:
    name: str
    steps: tuple[tuple[int, Stimulus], ...]
    seed: int = 0

    def __post_init__(self) -> None:
        last = -1
        for tick, _ in self.steps:
            if tick < last:
                raise ScenarioError(f"scenario '{self.name}': ticks must be non-decreasing")
            last = tick

    def render(self) -> str:
        lines = [f"tick {tick} {stim.render()}" for tick, stim in self.steps]
        return "\n".join(lines) + "\n" if lines else ""


def parse_scenario(text: str, spec: CheckedSpec, name: str = "<scenario>") -> Scenario:
    steps: list[tuple[int, Stimulus]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            steps.append(_parse_step(parts, spec))
        except (NameResolutionError, ScenarioError, ValueError) as err:
            raise ScenarioError(f"{name}:{lineno}: {err}") from None
    return Scenario(name, tuple(steps))


def _parse_step(parts: list[str], spec: CheckedSpec) -> tuple[int, Stimulus]:
    if len(parts) < 3 or parts[0] != "tick":
        raise ScenarioError(f"expected 'tick <n> <stimulus>', got: {' '.join(parts)}")
    tick = int(parts[1])
    if tick < 0:
        raise ScenarioError("tick numbers are non-negative")
    verb = parts[2]
    args = parts[3:]
    if verb == "halt":
        if args:
            raise ScenarioError("halt takes no arguments")
        return tick, Halt()
    if verb == "inject":
        if len(args) != 1:
            raise ScenarioError("inject takes one event name")
        return tick, InjectEvent(resolve_decl(spec, "events", args[0]))
    if verb == "set":
        if len(args) != 2:
            raise ScenarioError("set takes a metric name and a value")
        metric = resolve_decl(spec, "metrics", args[0])
        decl = spec.symbols.lookup(metric[0], "metrics", metric[1])
        assert isinstance(decl, MetricDecl)
        value = parse_value(args[1], decl.value_type)
        return tick, SetMetric(metric, value, decl.value_type)
    if verb == "send":
        if len(args) != 2:
            raise ScenarioError("send takes a message name and a channel name")
        return tick, SendMessage(resolve_message(spec, args[0]), resolve_channel(spec, args[1]))
    raise ScenarioError(f"unknown stimulus '{verb}'")


def parse_value(text: str, value_type: ValueType) -> object:
    """Parse a scenario value literal of the given metric type."""
    if value_type is ValueType.BOOLEAN:
        if text == "true":
            return True
        if text == "false":
            return False
        raise ScenarioError(f"expected true or false, got {text!r}")
    if value_type is ValueType.INTEGER:
        return int(text)
    if value_type is ValueType.REAL:
        return float(text)
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    return text
