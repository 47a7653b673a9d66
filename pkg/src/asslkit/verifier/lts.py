"""Bounded explicit-state transition system built from runtime semantics.

States are projections of quiescent and mid-drain runtime configurations:
fluent activations, metric valuations, channel queue contents, the pending
occurrence queue, relative timer residues, and the most recently raised
event (which carries the event-just-occurred atoms). Because the language
has no arithmetic, every value a metric can take is a literal written
somewhere in the specification or supplied by an environment stimulus, so
metric valuations range over a finite set and the graph is finite whenever
queues stay bounded.

Transitions come in two flavors:

* from a quiescent state (empty pending queue), one edge per enabled
  environment stimulus: event injections, metric settings, message sends,
  and the clock tick that delivers messages and fires ELAPSED activations;
* from a non-quiescent state, the single deterministic processing step that
  dequeues and raises the head occurrence.

Environment stimuli being enabled only at quiescent states makes every path
through the graph realizable by a scenario, which keeps counterexamples
replayable. Exploration is breadth first with canonical ordering, so state
numbering, edge order, and every downstream verdict are independent of
worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..checker import CheckedSpec
from ..names import Key, qual
from ..nodes import MetricDecl, render_value, type_of_value
from ..runtime.engine import RunConfig, Runtime
from ..runtime.scenario import InjectEvent, SendMessage, SetMetric
from ..runtime.state import RuntimeState


@dataclass(frozen=True)
class Tick:
    """Clock-advance stimulus: message delivery plus due ELAPSED firings."""

    def render(self) -> str:
        return "tick"


EnvStimulus = InjectEvent | SetMetric | SendMessage | Tick


@dataclass(frozen=True)
class Bounds:
    max_states: int = 100_000
    max_depth: int = 10_000
    max_pending: int = 8


@dataclass(frozen=True)
class StateVector:
    """Canonical, hashable projection of a runtime configuration."""

    fluents: tuple[bool, ...]
    metrics: tuple[object, ...]
    channels: tuple[tuple[Key, ...], ...]
    pending: tuple[Key, ...]
    timers: tuple[int, ...]
    last_event: Key | None


class Layout:
    """Key orderings that map runtime state onto vector slots."""

    def __init__(self, runtime: Runtime) -> None:
        self.fluent_keys: tuple[Key, ...] = tuple(runtime.fluent_keys)
        self.metric_keys: tuple[Key, ...] = tuple(runtime.metric_decls)
        self.channel_keys: tuple[Key, ...] = tuple(runtime.channel_keys)
        self.fluent_index = {key: i for i, key in enumerate(self.fluent_keys)}
        self.metric_index = {key: i for i, key in enumerate(self.metric_keys)}
        self.metric_types = {
            key: decl.value_type
            for key, decl in runtime.metric_decls.items()
            if isinstance(decl, MetricDecl)
        }

    def vector(self, state: RuntimeState) -> StateVector:
        return StateVector(
            fluents=tuple(state.fluents[k] for k in self.fluent_keys),
            metrics=tuple(state.metrics[k] for k in self.metric_keys),
            channels=tuple(
                tuple(message for message, _sender in state.channels[k])
                for k in self.channel_keys
            ),
            pending=tuple(occ.event for occ in state.pending),
            timers=tuple(t - state.tick for t in state.timers),
            last_event=state.last_event,
        )


@dataclass
class Lts:
    """Explicit labeled transition system; state 0 is initial."""

    layout: Layout
    states: list[StateVector]
    edges: list[tuple[int, str, int]]
    expanded: frozenset[int]
    truncated: bool
    env: tuple[EnvStimulus, ...]
    bounds: Bounds
    initial: int = 0
    _succ: dict[int, list[tuple[str, int]]] = field(default_factory=dict, repr=False)

    def successors(self, state_id: int) -> list[tuple[str, int]]:
        if not self._succ:
            for src, label, dst in self.edges:
                self._succ.setdefault(src, []).append((label, dst))
            for adjacency in self._succ.values():
                adjacency.sort()
        return self._succ.get(state_id, [])

    def labeling(self, state_id: int) -> frozenset[str]:
        """Atomic propositions holding at a state."""
        vec = self.states[state_id]
        props = {
            f"fluent:{qual(key)}"
            for key, active in zip(self.layout.fluent_keys, vec.fluents)
            if active
        }
        for key, value in zip(self.layout.metric_keys, vec.metrics):
            props.add(f"metric:{qual(key)}={render_value(value, type_of_value(value))}")
        if vec.last_event is not None:
            props.add(f"event:{qual(vec.last_event)}")
        return frozenset(props)

    @property
    def state_count(self) -> int:
        return len(self.states)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def default_env(spec: CheckedSpec) -> tuple[EnvStimulus, ...]:
    """Declared injectable events, plus the clock when it can matter."""
    runtime = Runtime(spec, record=False)
    stimuli: list[EnvStimulus] = [InjectEvent(key) for key in runtime.injectable]
    if runtime.timer_slots or runtime.message_decls:
        stimuli.append(Tick())
    return tuple(stimuli)


def build_lts(
    spec: CheckedSpec,
    env: tuple[EnvStimulus, ...] | None = None,
    bounds: Bounds | None = None,
    jobs: int = 1,
) -> Lts:
    """Breadth-first exploration with duplicate-state merging.

    Hitting any bound flags the result as truncated rather than failing;
    states whose expansion was cut are excluded from ``expanded`` so the
    checker never mistakes them for dead ends.
    """
    if not spec.ok:
        raise ValueError("specification has errors; run check_all first")
    bounds = bounds or Bounds()
    runtime = Runtime(spec, seed=0, config=RunConfig(interleave="declared"), record=False)
    layout = Layout(runtime)
    if env is None:
        env = default_env(spec)
    env = tuple(sorted(env, key=lambda stim: stim.render()))

    initial = runtime.init()
    states: list[StateVector] = [layout.vector(initial)]
    snapshots: list[RuntimeState] = [initial]
    index: dict[StateVector, int] = {states[0]: 0}
    edges: list[tuple[int, str, int]] = []
    expanded: set[int] = set()
    truncated = False

    def expand(state_id: int) -> list[tuple[str, RuntimeState]]:
        state = snapshots[state_id]
        if state.pending:
            nxt = state.copy()
            event = runtime.step(nxt)
            assert event is not None
            return [(f"proc {qual(event)}", nxt)]
        out: list[tuple[str, RuntimeState]] = []
        for stimulus in env:
            nxt = state.copy()
            if isinstance(stimulus, Tick):
                runtime.advance_tick(nxt)
            else:
                runtime.apply_stimulus(nxt, stimulus)
            out.append((stimulus.render(), nxt))
        return out

    frontier = [0]
    depth = 0
    capped = False
    while frontier and not capped:
        if depth > bounds.max_depth:
            truncated = True
            break
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(expand, frontier))
        else:
            results = [expand(state_id) for state_id in frontier]
        next_frontier: list[int] = []
        for state_id, successors in zip(frontier, results):
            complete = True
            for label, nxt in successors:
                if len(nxt.pending) > bounds.max_pending:
                    truncated = True
                    complete = False
                    continue
                vec = layout.vector(nxt)
                dst = index.get(vec)
                if dst is None:
                    if len(states) >= bounds.max_states:
                        truncated = True
                        complete = False
                        capped = True
                        continue
                    dst = len(states)
                    index[vec] = dst
                    states.append(vec)
                    snapshots.append(nxt)
                    next_frontier.append(dst)
                edges.append((state_id, label, dst))
            if complete:
                expanded.add(state_id)
        frontier = next_frontier
        depth += 1
    if frontier and not truncated:
        # loop exited via the cap with work left
        truncated = True

    edges.sort()
    return Lts(
        layout=layout,
        states=states,
        edges=edges,
        expanded=frozenset(expanded),
        truncated=truncated,
        env=env,
        bounds=bounds,
    )


def lts_to_text(lts: Lts) -> str:
    """Graph description: nodes with proposition labels, labeled edges."""
    lines = [
        f"lts states={lts.state_count} edges={lts.edge_count}"
        f" truncated={'true' if lts.truncated else 'false'}"
    ]
    for state_id in range(lts.state_count):
        props = " ".join(sorted(lts.labeling(state_id)))
        marker = " initial" if state_id == lts.initial else ""
        lines.append(f"state {state_id}{marker} {props}".rstrip())
    for src, label, dst in lts.edges:
        lines.append(f'edge {src} -> {dst} "{label}"')
    return "\n".join(lines) + "\n"
