"""Deterministic interpreter for checked specifications.

One :class:`Runtime` instance is single threaded; distinct instances may run
in parallel. A run is a pure function of (specification, scenario, seed,
config): there is no wall clock and no hidden randomness.

Execution semantics, pinned here because the surface language leaves them
open:

* CHANGED activations are write triggered: every assignment enqueues them,
  even when the value is unchanged. Guards of CHANGED-activated events read
  the post-assignment snapshot by default; ``RunConfig.guard_snapshot="pre"``
  switches them to the pre-assignment value of the changed metric.
* Simultaneous enqueues are ordered by declaration order of the subscribed
  events (the AS tier first, then AE tiers in declaration order).
* Re-initiating an active fluent is a no-op, which preserves the strict
  initiate/terminate alternation of every fluent's trace records.
* A mapping fires only on the rising edge of its condition set: some
  condition fluent was initiated by the occurrence being processed and all
  conditions are now active.
* An ENSURES violation routes to the error path (ONERR_DOES, then
  ONERR_TRIGGERS), like a Fail statement or a failing callee.
* Time is an integer tick. Scenario stimuli apply at quiescent states, one
  at a time, with the pending queue drained in between. Advancing the clock
  delivers queued channel messages to their receiving elements and fires due
  ELAPSED activations, which re-arm for their declared period. Element order
  within those phases follows a per-tick shuffle seeded from (seed, tick);
  ``RunConfig.interleave="declared"`` uses declaration order instead, which
  the verifier and counterexample replay rely on.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from ..checker import CheckedSpec
from ..names import Key, qual
from ..nodes import (
    ActivationKind,
    AssignStmt,
    BinaryExpr,
    BindingRefExpr,
    CallStmt,
    CompareExpr,
    EventDecl,
    Expr,
    FailStmt,
    FluentRefExpr,
    Lit,
    MetricRefExpr,
    NotExpr,
    SendStmt,
    render_value,
    type_of_value,
)
from ..printer import format_expr
from .scenario import Halt, InjectEvent, Scenario, SendMessage, SetMetric, Stimulus
from .state import (
    ACTION_FAILED,
    ACTION_STARTED,
    ACTION_SUCCEEDED,
    ENSURES_VIOLATED,
    EVENT_RAISED,
    EVENT_SUPPRESSED,
    FLUENT_INITIATED,
    FLUENT_TERMINATED,
    MAPPING_FIRED,
    MESSAGE_RECEIVED,
    MESSAGE_SENT,
    METRIC_ASSIGNED,
    Activation,
    EventOccurrence,
    Injected,
    RuntimeState,
    Trace,
    Triggered,
)

SUCCESS = "Success"
GUARD_REJECTED = "GuardRejected"
ERROR = "Error"


class DepthLimitError(Exception):
    """Action call depth exceeded; unreachable for specs that pass checking."""


@dataclass(frozen=True)
class RunConfig:
    guard_snapshot: str = "post"  # "post" | "pre"
    interleave: str = "seeded"  # "seeded" | "declared"
    max_call_depth: int = 32


@dataclass(frozen=True)
class _Mapping:
    policy: str
    index: int
    subject: str
    conditions: tuple[Key, ...]
    actions: tuple[Key, ...]


class Runtime:
    """Interpreter for one checked specification."""

    def __init__(
        self,
        spec: CheckedSpec,
        seed: int = 0,
        config: RunConfig | None = None,
        record: bool = True,
    ) -> None:
        if not spec.ok:
            raise ValueError("specification has errors; run check_all first")
        self.spec = spec
        self.seed = seed
        self.config = config or RunConfig()
        self.trace: Trace | None = Trace() if record else None
        self._build_tables()

    # -- static tables -------------------------------------------------------

    def _build_tables(self) -> None:
        tree = self.spec.tree
        self.elements: tuple[str, ...] = tuple(t.name for t in tree.tiers())
        self.fluent_keys: list[Key] = []
        self.metric_decls: dict[Key, object] = {}
        self.event_decls: dict[Key, EventDecl] = {}
        self.action_decls: dict[Key, object] = {}
        self.initiators: dict[Key, list[Key]] = {}
        self.terminators: dict[Key, list[Key]] = {}
        self.changed_subs: dict[Key, list[Key]] = {}
        self.sent_subs: dict[Key, list[Key]] = {}
        self.received_subs: dict[Key, list[Key]] = {}
        self.timer_slots: list[tuple[Key, int]] = []
        self.mappings: dict[str, list[_Mapping]] = {}
        self.injectable: list[Key] = []

        for tier in tree.tiers():
            elem = tier.name
            self.mappings[elem] = []
            for policy in tier.policies:
                for fluent in policy.fluents:
                    fkey = (elem, fluent.name)
                    self.fluent_keys.append(fkey)
                    for ref in fluent.initiated_by:
                        self.initiators.setdefault((elem, ref.name), []).append(fkey)
                    for ref in fluent.terminated_by:
                        self.terminators.setdefault((elem, ref.name), []).append(fkey)
                for index, mapping in enumerate(policy.mappings):
                    self.mappings[elem].append(
                        _Mapping(
                            policy=policy.name,
                            index=index,
                            subject=f"{elem}.{policy.name}.mapping[{index}]",
                            conditions=tuple((elem, c.name) for c in mapping.conditions),
                            actions=tuple((elem, a.name) for a in mapping.do_actions),
                        )
                    )
            for metric in tier.metrics:
                self.metric_decls[(elem, metric.name)] = metric
            for action in tier.actions:
                self.action_decls[(elem, action.name)] = action
            for event in tier.events:
                ekey = (elem, event.name)
                self.event_decls[ekey] = event
                if event.injectable:
                    self.injectable.append(ekey)
                for clause in event.activation:
                    if clause.kind is ActivationKind.CHANGED:
                        assert clause.target is not None
                        self.changed_subs.setdefault((elem, clause.target.name), []).append(ekey)
                    elif clause.kind is ActivationKind.SENT:
                        assert clause.target is not None
                        resolved = self.spec.symbols.resolve_message(elem, clause.target.name)
                        assert resolved is not None
                        self.sent_subs.setdefault((resolved[0], clause.target.name), []).append(ekey)
                    elif clause.kind is ActivationKind.RECEIVED:
                        assert clause.target is not None
                        resolved = self.spec.symbols.resolve_message(elem, clause.target.name)
                        assert resolved is not None
                        self.received_subs.setdefault(
                            (resolved[0], clause.target.name), []
                        ).append(ekey)
                    else:
                        assert clause.ticks is not None
                        self.timer_slots.append((ekey, clause.ticks))

        self.message_decls = dict(self.spec.symbols.messages)
        self.channel_keys: list[Key] = list(self.spec.symbols.channels)
        self.channel_capacity: dict[Key, int] = {
            key: decl.capacity for key, decl in self.spec.symbols.channels.items()
        }
        self.timers_by_element: dict[str, list[int]] = {elem: [] for elem in self.elements}
        for slot, (ekey, _period) in enumerate(self.timer_slots):
            self.timers_by_element[ekey[0]].append(slot)

    # -- lifecycle -------------------------------------------------------------

    def init(self) -> RuntimeState:
        """Fresh state: fluents inactive, metrics at initial values, tick 0."""
        if self.trace is not None:
            self.trace = Trace()
        return RuntimeState(
            tick=0,
            fluents={key: False for key in self.fluent_keys},
            metrics={
                key: decl.initial.value for key, decl in self.metric_decls.items()  # type: ignore[union-attr]
            },
            channels={key: [] for key in self.channel_keys},
            pending=deque(),
            timers=[period for (_ekey, period) in self.timer_slots],
            seed=self.seed,
        )

    def _record(self, state: RuntimeState, kind: str, subject: str, detail: str = "") -> None:
        if self.trace is not None:
            self.trace.append(state.tick, kind, subject, detail)

    # -- expression evaluation ---------------------------------------------------

    def eval_expr(
        self,
        expr: Expr,
        state: RuntimeState,
        element: str,
        bindings: dict[str, bool] | None = None,
        override: tuple[Key, object] | None = None,
    ) -> object:
        """Total evaluation; checking guarantees no type faults remain."""
        if isinstance(expr, Lit):
            return expr.value
        if isinstance(expr, MetricRefExpr):
            key = (element, expr.name)
            if override is not None and override[0] == key:
                return override[1]
            return state.metrics[key]
        if isinstance(expr, FluentRefExpr):
            return state.fluents[(element, expr.name)]
        if isinstance(expr, BindingRefExpr):
            return bool(bindings.get(expr.name, False)) if bindings else False
        if isinstance(expr, NotExpr):
            return not self.eval_expr(expr.operand, state, element, bindings, override)
        if isinstance(expr, BinaryExpr):
            left = self.eval_expr(expr.left, state, element, bindings, override)
            if expr.op == "AND":
                return bool(left) and bool(
                    self.eval_expr(expr.right, state, element, bindings, override)
                )
            return bool(left) or bool(
                self.eval_expr(expr.right, state, element, bindings, override)
            )
        assert isinstance(expr, CompareExpr)
        left = self.eval_expr(expr.left, state, element, bindings, override)
        right = self.eval_expr(expr.right, state, element, bindings, override)
        op = expr.op
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right  # type: ignore[operator]
        if op == "<=":
            return left <= right  # type: ignore[operator]
        if op == ">":
            return left > right  # type: ignore[operator]
        return left >= right  # type: ignore[operator]

    # -- core operations -----------------------------------------------------------

    def raise_event(self, state: RuntimeState, occ: EventOccurrence) -> bool:
        """Process one occurrence: guard, fluent flips, then mapping firing.

        Returns True when the event was raised, False when suppressed.
        """
        event = occ.event
        element = event[0]
        decl = self.event_decls[event]
        if decl.guard is not None:
            override = None
            if (
                self.config.guard_snapshot == "pre"
                and occ.changed_metric is not None
            ):
                override = (occ.changed_metric, occ.old_value)
            if not self.eval_expr(decl.guard, state, element, override=override):
                self._record(state, EVENT_SUPPRESSED, qual(event), "guard false")
                state.last_event = None
                return False
        self._record(state, EVENT_RAISED, qual(event), occ.cause.render())
        state.last_event = event

        initiated: list[Key] = []
        for fkey in self.initiators.get(event, ()):
            if not state.fluents[fkey]:
                state.fluents[fkey] = True
                initiated.append(fkey)
                self._record(state, FLUENT_INITIATED, qual(fkey), f"by {qual(event)}")
        for fkey in self.terminators.get(event, ()):
            if state.fluents[fkey]:
                state.fluents[fkey] = False
                self._record(state, FLUENT_TERMINATED, qual(fkey), f"by {qual(event)}")

        if initiated:
            just_initiated = set(initiated)
            for mapping in self.mappings[element]:
                if not just_initiated.intersection(mapping.conditions):
                    continue
                if not all(state.fluents[c] for c in mapping.conditions):
                    continue
                detail = "conditions: " + ", ".join(qual(c) for c in mapping.conditions)
                self._record(state, MAPPING_FIRED, mapping.subject, detail)
                for action_key in mapping.actions:
                    self.execute_action(state, action_key, f"mapping {mapping.subject}")
        return True

    def execute_action(
        self, state: RuntimeState, action_key: Key, cause: str, depth: int = 0
    ) -> tuple[str, str | None]:
        """Run one action. Returns (outcome, failure reason).

        Outcome is SUCCESS, GUARD_REJECTED, or ERROR. Guard rejection runs no
        statements and leaves no trace records.
        """
        if depth > self.config.max_call_depth:
            raise DepthLimitError(f"call depth exceeded at {qual(action_key)}")
        decl = self.action_decls[action_key]
        element = action_key[0]
        bindings: dict[str, bool] = {}
        if decl.guard is not None and not self.eval_expr(decl.guard, state, element):
            return GUARD_REJECTED, None
        self._record(state, ACTION_STARTED, qual(action_key), cause)

        failure: str | None = None
        for stmt in decl.does:
            failure = self._exec_stmt(state, stmt, action_key, bindings, depth)
            if failure is not None:
                break

        if failure is None and decl.ensures is not None:
            if not self.eval_expr(decl.ensures, state, element, bindings):
                self._record(
                    state, ENSURES_VIOLATED, qual(action_key), format_expr(decl.ensures)
                )
                failure = "ENSURES violated"

        if failure is None:
            self._record(state, ACTION_SUCCEEDED, qual(action_key))
            for ref in decl.triggers:
                self._enqueue(
                    state,
                    EventOccurrence((element, ref.name), Triggered(action_key), state.tick),
                )
            return SUCCESS, None

        self._record(state, ACTION_FAILED, qual(action_key), failure)
        for stmt in decl.onerr_does:
            if self._exec_stmt(state, stmt, action_key, bindings, depth) is not None:
                break  # a failure inside the error path aborts it
        for ref in decl.onerr_triggers:
            self._enqueue(
                state,
                EventOccurrence(
                    (element, ref.name), Triggered(action_key, on_error=True), state.tick
                ),
            )
        return ERROR, failure

    def _exec_stmt(
        self,
        state: RuntimeState,
        stmt,
        action_key: Key,
        bindings: dict[str, bool],
        depth: int,
    ) -> str | None:
        element = action_key[0]
        if isinstance(stmt, CallStmt):
            callee = (element, stmt.action.name)
            outcome, reason = self.execute_action(
                state, callee, f"called by {qual(action_key)}", depth + 1
            )
            if outcome == ERROR:
                return f"call {qual(callee)} failed: {reason}"
            if stmt.binding:
                bindings[stmt.binding] = outcome == SUCCESS
            return None
        if isinstance(stmt, AssignStmt):
            value = self.eval_expr(stmt.value, state, element, bindings)
            self.assign_metric(state, (element, stmt.metric.name), value)
            return None
        if isinstance(stmt, SendStmt):
            message = self.spec.symbols.resolve_message(element, stmt.message.name)
            channel = self.spec.symbols.resolve_channel(element, stmt.channel.name)
            assert message is not None and channel is not None
            self.send_message(
                state, (message[0], stmt.message.name), (channel[0], stmt.channel.name), element
            )
            return None
        assert isinstance(stmt, FailStmt)
        return stmt.reason

    def assign_metric(self, state: RuntimeState, metric: Key, value: object) -> None:
        """Write a metric and enqueue CHANGED occurrences (write triggered)."""
        old = state.metrics[metric]
        state.metrics[metric] = value
        value_type = type_of_value(value)
        detail = f"{render_value(old, type_of_value(old))} -> {render_value(value, value_type)}"
        self._record(state, METRIC_ASSIGNED, qual(metric), detail)
        for event in self.changed_subs.get(metric, ()):
            self._enqueue(
                state,
                EventOccurrence(
                    event,
                    Activation("CHANGED", qual(metric)),
                    state.tick,
                    changed_metric=metric,
                    old_value=old,
                ),
            )

    def send_message(
        self, state: RuntimeState, message: Key, channel: Key, sender: str
    ) -> bool:
        """Enqueue a message; returns False when the channel was full."""
        queue = state.channels[channel]
        if len(queue) >= self.channel_capacity[channel]:
            self._record(
                state, MESSAGE_SENT, qual(message),
                f"over {qual(channel)} dropped (channel full)",
            )
            return False
        queue.append((message, sender))
        self._record(state, MESSAGE_SENT, qual(message), f"over {qual(channel)} by {sender}")
        for event in self.sent_subs.get(message, ()):
            self._enqueue(
                state,
                EventOccurrence(event, Activation("SENT", qual(message)), state.tick),
            )
        return True

    def step(self, state: RuntimeState) -> Key | None:
        """Dequeue and process exactly one occurrence; identity when idle."""
        if not state.pending:
            return None
        occ = state.pending.popleft()
        self.raise_event(state, occ)
        return occ.event

    def drain(self, state: RuntimeState) -> None:
        while state.pending:
            self.step(state)

    def _enqueue(self, state: RuntimeState, occ: EventOccurrence) -> None:
        state.pending.append(occ)

    # -- time ----------------------------------------------------------------------

    def element_order(self, tick: int) -> list[str]:
        """Element processing order for a tick's delivery and timer phases."""
        order = list(self.elements)
        if self.config.interleave == "seeded" and len(order) > 1:
            random.Random(self.seed * 1_000_003 + tick).shuffle(order)
        return order

    def advance_tick(self, state: RuntimeState) -> None:
        """Advance the clock: deliver queued messages, then fire due timers."""
        state.tick += 1
        state.last_event = None
        order = self.element_order(state.tick)
        for elem in order:
            for channel in self.channel_keys:
                queue = state.channels[channel]
                if not queue:
                    continue
                remaining: list[tuple[Key, str]] = []
                for message, sender in queue:
                    decl = self.message_decls[message]
                    if decl.receiver == elem:
                        self._record(
                            state, MESSAGE_RECEIVED, qual(message),
                            f"by {elem} over {qual(channel)}",
                        )
                        for event in self.received_subs.get(message, ()):
                            self._enqueue(
                                state,
                                EventOccurrence(
                                    event, Activation("RECEIVED", qual(message)), state.tick
                                ),
                            )
                    else:
                        remaining.append((message, sender))
                state.channels[channel] = remaining
        for elem in order:
            for slot in self.timers_by_element[elem]:
                if state.timers[slot] <= state.tick:
                    event, period = self.timer_slots[slot]
                    self._enqueue(
                        state,
                        EventOccurrence(event, Activation("ELAPSED", str(period)), state.tick),
                    )
                    state.timers[slot] = state.tick + period

    # -- stimuli and runs -------------------------------------------------------------

    def apply_stimulus(self, state: RuntimeState, stimulus: Stimulus) -> None:
        state.last_event = None
        if isinstance(stimulus, InjectEvent):
            self._enqueue(
                state, EventOccurrence(stimulus.event, Injected(), state.tick)
            )
        elif isinstance(stimulus, SetMetric):
            self.assign_metric(state, stimulus.metric, stimulus.value)
        elif isinstance(stimulus, SendMessage):
            sender = self.message_decls[stimulus.message].sender
            self.send_message(state, stimulus.message, stimulus.channel, sender)
        else:
            raise ValueError(f"cannot apply {stimulus!r} directly")

    def run(self, scenario: Scenario, max_ticks: int = 1000) -> Trace:
        """Execute a scenario to halt, quiescent exhaustion, or max_ticks."""
        if max_ticks < 1:
            raise ValueError("max_ticks must be at least 1")
        state = self.init()
        trace = self.trace if self.trace is not None else Trace()
        steps = list(scenario.steps)
        index = 0
        try:
            halted = False
            while True:
                while index < len(steps) and steps[index][0] <= state.tick:
                    stimulus = steps[index][1]
                    index += 1
                    if isinstance(stimulus, Halt):
                        halted = True
                        break
                    self.apply_stimulus(state, stimulus)
                    self.drain(state)
                if halted or index >= len(steps) or state.tick >= max_ticks:
                    break
                self.advance_tick(state)
                self.drain(state)
        except DepthLimitError as err:
            trace.aborted = str(err)
        return trace


def run(
    spec: CheckedSpec,
    scenario: Scenario,
    max_ticks: int = 1000,
    seed: int | None = None,
    config: RunConfig | None = None,
) -> Trace:
    """Run a scenario against a checked spec and return the trace."""
    runtime = Runtime(spec, seed=scenario.seed if seed is None else seed, config=config)
    return runtime.run(scenario, max_ticks=max_ticks)
