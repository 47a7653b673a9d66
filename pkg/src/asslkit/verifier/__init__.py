"""Bounded model checking of temporal properties over specification runtimes."""

from .lts import Bounds, EnvStimulus, Layout, Lts, StateVector, Tick, build_lts, default_env, lts_to_text
from .mc import (
    HOLDS,
    INCONCLUSIVE,
    VIOLATED,
    Counterexample,
    Verdict,
    check,
    explain,
    parse_env_stimulus,
    replay_counterexample,
)
from .props import (
    EventAtom,
    FluentAtom,
    MetricAtom,
    PropertyError,
    TemporalProperty,
    UnresolvedAtom,
    eval_prop,
    parse_property,
    parse_property_file,
)

__all__ = [
    "Bounds",
    "Counterexample",
    "EnvStimulus",
    "EventAtom",
    "FluentAtom",
    "HOLDS",
    "INCONCLUSIVE",
    "Layout",
    "Lts",
    "MetricAtom",
    "PropertyError",
    "StateVector",
    "TemporalProperty",
    "Tick",
    "UnresolvedAtom",
    "VIOLATED",
    "Verdict",
    "build_lts",
    "check",
    "default_env",
    "eval_prop",
    "explain",
    "lts_to_text",
    "parse_env_stimulus",
    "parse_property",
    "parse_property_file",
    "replay_counterexample",
]
