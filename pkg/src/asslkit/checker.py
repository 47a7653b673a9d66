"""Consistency checking: reference resolution, types, and well-formedness.

The checks run in three passes. ``resolve`` builds the symbol table and
reports undefined or duplicate names. ``check_types`` types every expression.
``check_semantics`` enforces the structural rules that make execution total:

* R1  a fluent's initiating and terminating event sets are disjoint
      (E-FLUENT-OVERLAP);
* R2  the action call graph is acyclic (E-CYCLE);
* R3  every fluent is referenced by at least one mapping (W-UNREACHABLE);
* R4  every TRIGGERS / ONERR_TRIGGERS target is declared (an E-UNDEF from
      resolution);
* R5  every event is raisable: it has an activation, is triggered somewhere,
      or is declared INJECTABLE (W-UNREACHABLE);
* R6  channel capacities and ELAPSED periods are at least 1 (E-CAPACITY).

Error-severity diagnostics block the runtime, verifier and test generator;
warnings do not. Identical trees always yield identical diagnostic lists:
output is ordered by span, then code, then message.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .nodes import (
    ActivationKind,
    AeTier,
    AsipTier,
    AssignStmt,
    BinaryExpr,
    BindingRefExpr,
    CallStmt,
    ChannelDecl,
    CompareExpr,
    Expr,
    FluentRefExpr,
    Lit,
    MessageDecl,
    MetricDecl,
    MetricRefExpr,
    NotExpr,
    Ref,
    SendStmt,
    SpecificationTree,
    Tier,
    ValueType,
)
from .tokens import SourceSpan

ERROR = "error"
WARNING = "warning"

#: Scope key used for declarations of the shared interaction protocol.
ASIP_SCOPE = "ASIP"

#: Ordering comparisons apply to numeric operands only.
_ORDERING_OPS = frozenset({"<", "<=", ">", ">="})


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    span: SourceSpan

    def render(self) -> str:
        return f"{self.span.render()}: {self.severity} {self.code}: {self.message}"


def sort_key(diag: Diagnostic) -> tuple:
    return (diag.span.file, diag.span.line, diag.span.column, diag.code, diag.message)


class SymbolTable:
    """Per-tier declaration maps with deterministic lookup.

    Tier-local names never shadow one another across tiers; messages and
    channels resolve against the declaring tier's AEIP first and fall back to
    the shared ASIP.
    """

    def __init__(self) -> None:
        self.tiers: dict[str, Tier] = {}
        self.decls: dict[tuple[str, str, str], object] = {}
        self.fluent_policy: dict[tuple[str, str], str] = {}
        self.messages: dict[tuple[str, str], MessageDecl] = {}
        self.channels: dict[tuple[str, str], ChannelDecl] = {}

    def lookup(self, tier: str, namespace: str, name: str):
        return self.decls.get((tier, namespace, name))

    def resolve_message(self, tier: str, name: str) -> tuple[str, MessageDecl] | None:
        decl = self.messages.get((tier, name))
        if decl is not None:
            return tier, decl
        decl = self.messages.get((ASIP_SCOPE, name))
        if decl is not None:
            return ASIP_SCOPE, decl
        return None

    def resolve_channel(self, tier: str, name: str) -> tuple[str, ChannelDecl] | None:
        decl = self.channels.get((tier, name))
        if decl is not None:
            return tier, decl
        decl = self.channels.get((ASIP_SCOPE, name))
        if decl is not None:
            return ASIP_SCOPE, decl
        return None


@dataclass(frozen=True)
class CheckedSpec:
    """A specification tree together with its symbols and diagnostics."""

    tree: SpecificationTree
    symbols: SymbolTable = field(compare=False)
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return all(d.severity != ERROR for d in self.diagnostics)

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == ERROR)


def check_all(tree: SpecificationTree) -> CheckedSpec:
    """Run resolution, type checking, and semantic rules in order.

    Later passes are skipped when an earlier pass found errors, so a missing
    name is reported exactly once rather than echoed by the type checker.
    """
    symbols, diags = resolve(tree)
    if not any(d.severity == ERROR for d in diags):
        diags = diags + check_types(tree, symbols)
    if not any(d.severity == ERROR for d in diags):
        diags = diags + check_semantics(tree, symbols)
    return CheckedSpec(tree, symbols, tuple(sorted(diags, key=sort_key)))


# --------------------------------------------------------------------------
# Pass 1: resolution


def resolve(tree: SpecificationTree) -> tuple[SymbolTable, list[Diagnostic]]:
    symbols = SymbolTable()
    diags: list[Diagnostic] = []
    _register(tree, symbols, diags)
    for tier in tree.tiers():
        _resolve_tier(tier, symbols, diags)
    return symbols, diags


def _register(tree: SpecificationTree, symbols: SymbolTable, diags: list[Diagnostic]) -> None:
    def dup(code_subject: str, span: SourceSpan) -> None:
        diags.append(Diagnostic(ERROR, "E-DUP", f"duplicate declaration of {code_subject}", span))

    for tier in tree.tiers():
        if tier.name in symbols.tiers:
            dup(f"tier '{tier.name}'", tier.span)
            continue
        symbols.tiers[tier.name] = tier
        for namespace, decls in (
            ("slos", tier.slos),
            ("policies", tier.policies),
            ("actions", tier.actions),
            ("events", tier.events),
            ("metrics", tier.metrics),
        ):
            for decl in decls:
                key = (tier.name, namespace, decl.name)
                if key in symbols.decls:
                    dup(f"'{decl.name}' in {tier.name} {namespace}", decl.span)
                else:
                    symbols.decls[key] = decl
        for policy in tier.policies:
            for fluent in policy.fluents:
                key = (tier.name, "fluents", fluent.name)
                if key in symbols.decls:
                    dup(f"fluent '{fluent.name}' in tier {tier.name}", fluent.span)
                else:
                    symbols.decls[key] = fluent
                    symbols.fluent_policy[(tier.name, fluent.name)] = policy.name

        aeip = tier.aeip if isinstance(tier, AeTier) else None
        if aeip is not None:
            _register_protocol(aeip, tier.name, symbols, diags)

    if tree.asip_tier is not None:
        _register_protocol(tree.asip_tier, ASIP_SCOPE, symbols, diags)


def _register_protocol(
    asip: AsipTier, scope: str, symbols: SymbolTable, diags: list[Diagnostic]
) -> None:
    for message in asip.messages:
        key = (scope, message.name)
        if key in symbols.messages:
            diags.append(
                Diagnostic(ERROR, "E-DUP", f"duplicate message '{message.name}'", message.span)
            )
        else:
            symbols.messages[key] = message
    for channel in asip.channels:
        key = (scope, channel.name)
        if key in symbols.channels:
            diags.append(
                Diagnostic(ERROR, "E-DUP", f"duplicate channel '{channel.name}'", channel.span)
            )
        else:
            symbols.channels[key] = channel


def _resolve_tier(tier: Tier, symbols: SymbolTable, diags: list[Diagnostic]) -> None:
    t = tier.name

    def undef(kind: str, ref: Ref) -> None:
        diags.append(
            Diagnostic(ERROR, "E-UNDEF", f"undefined {kind} '{ref.render()}'", ref.span)
        )

    def check_event_refs(refs: tuple[Ref, ...]) -> None:
        for ref in refs:
            if symbols.lookup(t, "events", ref.name) is None:
                undef("event", ref)

    for policy in tier.policies:
        for fluent in policy.fluents:
            check_event_refs(fluent.initiated_by)
            check_event_refs(fluent.terminated_by)
        for mapping in policy.mappings:
            for cond in mapping.conditions:
                decl = symbols.lookup(t, "fluents", cond.name)
                if decl is None:
                    undef("fluent", cond)
                elif symbols.fluent_policy.get((t, cond.name)) != policy.name:
                    diags.append(
                        Diagnostic(
                            ERROR,
                            "E-SCOPE",
                            f"fluent '{cond.name}' belongs to another policy;"
                            " conditions may only name fluents of the same policy",
                            cond.span,
                        )
                    )
            for ref in mapping.do_actions:
                if symbols.lookup(t, "actions", ref.name) is None:
                    undef("action", ref)

    for event in tier.events:
        if event.guard is not None:
            _resolve_expr(event.guard, t, frozenset(), symbols, diags)
        for clause in event.activation:
            if clause.kind is ActivationKind.CHANGED:
                assert clause.target is not None
                if symbols.lookup(t, "metrics", clause.target.name) is None:
                    undef("metric", clause.target)
            elif clause.kind in (ActivationKind.SENT, ActivationKind.RECEIVED):
                assert clause.target is not None
                if symbols.resolve_message(t, clause.target.name) is None:
                    undef("message", clause.target)

    for action in tier.actions:
        bindings = frozenset(
            stmt.binding
            for stmt in action.does + action.onerr_does
            if isinstance(stmt, CallStmt) and stmt.binding
        )
        if action.guard is not None:
            _resolve_expr(action.guard, t, frozenset(), symbols, diags)
        if action.ensures is not None:
            _resolve_expr(action.ensures, t, bindings, symbols, diags)
        for stmt in action.does + action.onerr_does:
            if isinstance(stmt, CallStmt):
                if symbols.lookup(t, "actions", stmt.action.name) is None:
                    undef("action", stmt.action)
            elif isinstance(stmt, AssignStmt):
                if symbols.lookup(t, "metrics", stmt.metric.name) is None:
                    undef("metric", stmt.metric)
                _resolve_expr(stmt.value, t, bindings, symbols, diags)
            elif isinstance(stmt, SendStmt):
                if symbols.resolve_message(t, stmt.message.name) is None:
                    undef("message", stmt.message)
                if symbols.resolve_channel(t, stmt.channel.name) is None:
                    undef("channel", stmt.channel)
        check_event_refs(action.triggers)
        check_event_refs(action.onerr_triggers)

    if isinstance(tier, AeTier):
        for friend in tier.friends:
            if friend not in symbols.tiers:
                diags.append(
                    Diagnostic(ERROR, "E-UNDEF", f"undefined tier '{friend}' in FRIENDS", tier.span)
                )
        protocols = [tier.aeip] if tier.aeip is not None else []
    else:
        protocols = []

    for asip in protocols:
        _resolve_protocol_endpoints(asip, symbols, diags)


def _resolve_protocol_endpoints(
    asip: AsipTier, symbols: SymbolTable, diags: list[Diagnostic]
) -> None:
    for message in asip.messages:
        for endpoint in (message.sender, message.receiver):
            if endpoint not in symbols.tiers:
                diags.append(
                    Diagnostic(
                        ERROR, "E-UNDEF", f"undefined tier '{endpoint}' in message endpoints",
                        message.span,
                    )
                )


def _resolve_expr(
    expr: Expr,
    tier: str,
    bindings: frozenset[str],
    symbols: SymbolTable,
    diags: list[Diagnostic],
) -> None:
    if isinstance(expr, MetricRefExpr):
        if symbols.lookup(tier, "metrics", expr.name) is None:
            diags.append(
                Diagnostic(ERROR, "E-UNDEF", f"undefined metric 'METRICS.{expr.name}'", expr.span)
            )
    elif isinstance(expr, FluentRefExpr):
        if symbols.lookup(tier, "fluents", expr.name) is None:
            diags.append(
                Diagnostic(ERROR, "E-UNDEF", f"undefined fluent 'FLUENTS.{expr.name}'", expr.span)
            )
    elif isinstance(expr, BindingRefExpr):
        if expr.name not in bindings:
            diags.append(
                Diagnostic(
                    ERROR, "E-UNDEF",
                    f"'{expr.name}' is not a binding available here", expr.span,
                )
            )
    elif isinstance(expr, NotExpr):
        _resolve_expr(expr.operand, tier, bindings, symbols, diags)
    elif isinstance(expr, (BinaryExpr, CompareExpr)):
        _resolve_expr(expr.left, tier, bindings, symbols, diags)
        _resolve_expr(expr.right, tier, bindings, symbols, diags)


# --------------------------------------------------------------------------
# Pass 2: types


def check_types(tree: SpecificationTree, symbols: SymbolTable) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for tier in tree.tiers():
        t = tier.name
        for metric in tier.metrics:
            if metric.initial.type is not metric.value_type:
                diags.append(
                    Diagnostic(
                        ERROR, "E-TYPE",
                        f"initial value of metric '{metric.name}' is"
                        f" {metric.initial.type.value}, not {metric.value_type.value}",
                        metric.initial.span,
                    )
                )
        for event in tier.events:
            if event.guard is not None:
                _require_boolean(event.guard, t, symbols, diags, "event guard")
        for action in tier.actions:
            if action.guard is not None:
                _require_boolean(action.guard, t, symbols, diags, "action guard")
            if action.ensures is not None:
                _require_boolean(action.ensures, t, symbols, diags, "ENSURES clause")
            for stmt in action.does + action.onerr_does:
                if isinstance(stmt, AssignStmt):
                    metric = symbols.lookup(t, "metrics", stmt.metric.name)
                    value_type = _type_of(stmt.value, t, symbols, diags)
                    if (
                        isinstance(metric, MetricDecl)
                        and value_type is not None
                        and value_type is not metric.value_type
                    ):
                        diags.append(
                            Diagnostic(
                                ERROR, "E-TYPE",
                                f"cannot assign {value_type.value} to"
                                f" {metric.value_type.value} metric '{metric.name}'",
                                stmt.span,
                            )
                        )
    return diags


def _require_boolean(
    expr: Expr, tier: str, symbols: SymbolTable, diags: list[Diagnostic], what: str
) -> None:
    actual = _type_of(expr, tier, symbols, diags)
    if actual is not None and actual is not ValueType.BOOLEAN:
        diags.append(
            Diagnostic(ERROR, "E-TYPE", f"{what} must be boolean, not {actual.value}", _span_of(expr))
        )


def _span_of(expr: Expr) -> SourceSpan:
    return expr.span


def _type_of(
    expr: Expr, tier: str, symbols: SymbolTable, diags: list[Diagnostic]
) -> ValueType | None:
    """Type of an expression, or None when a subexpression already failed."""
    if isinstance(expr, Lit):
        return expr.type
    if isinstance(expr, MetricRefExpr):
        metric = symbols.lookup(tier, "metrics", expr.name)
        return metric.value_type if isinstance(metric, MetricDecl) else None
    if isinstance(expr, FluentRefExpr):
        return ValueType.BOOLEAN
    if isinstance(expr, BindingRefExpr):
        return ValueType.BOOLEAN  # bindings hold call outcomes
    if isinstance(expr, NotExpr):
        operand = _type_of(expr.operand, tier, symbols, diags)
        if operand is not None and operand is not ValueType.BOOLEAN:
            diags.append(
                Diagnostic(ERROR, "E-TYPE", f"NOT needs a boolean, not {operand.value}", expr.span)
            )
            return None
        return ValueType.BOOLEAN if operand else None
    if isinstance(expr, BinaryExpr):
        left = _type_of(expr.left, tier, symbols, diags)
        right = _type_of(expr.right, tier, symbols, diags)
        ok = True
        for side in (left, right):
            if side is not None and side is not ValueType.BOOLEAN:
                diags.append(
                    Diagnostic(
                        ERROR, "E-TYPE", f"{expr.op} needs boolean operands, not {side.value}",
                        expr.span,
                    )
                )
                ok = False
        return ValueType.BOOLEAN if ok and left and right else None
    assert isinstance(expr, CompareExpr)
    left = _type_of(expr.left, tier, symbols, diags)
    right = _type_of(expr.right, tier, symbols, diags)
    if left is None or right is None:
        return None
    if left is not right:
        diags.append(
            Diagnostic(
                ERROR, "E-TYPE",
                f"comparison between {left.value} and {right.value}", expr.span,
            )
        )
        return None
    if expr.op in _ORDERING_OPS and left not in (ValueType.INTEGER, ValueType.REAL):
        diags.append(
            Diagnostic(
                ERROR, "E-TYPE", f"ordering comparison on {left.value} values", expr.span
            )
        )
        return None
    return ValueType.BOOLEAN


# --------------------------------------------------------------------------
# Pass 3: semantic rules


def check_semantics(tree: SpecificationTree, symbols: SymbolTable) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for tier in tree.tiers():
        _check_tier_semantics(tier, symbols, diags)
    protocols: list[AsipTier] = [t.aeip for t in tree.ae_tiers if t.aeip is not None]
    if tree.asip_tier is not None:
        protocols.append(tree.asip_tier)
    for asip in protocols:
        for channel in asip.channels:
            if channel.capacity < 1:
                diags.append(
                    Diagnostic(
                        ERROR, "E-CAPACITY",
                        f"channel '{channel.name}' must have capacity at least 1", channel.span,
                    )
                )
    return diags


def _check_tier_semantics(tier: Tier, symbols: SymbolTable, diags: list[Diagnostic]) -> None:
    triggered: set[str] = set()
    for action in tier.actions:
        for ref in action.triggers + action.onerr_triggers:
            triggered.add(ref.name)

    for policy in tier.policies:
        if not policy.fluents:
            diags.append(
                Diagnostic(
                    ERROR, "E-EMPTY", f"policy '{policy.name}' declares no fluents", policy.span
                )
            )
        mapped = {cond.name for mapping in policy.mappings for cond in mapping.conditions}
        for fluent in policy.fluents:
            overlap = {r.name for r in fluent.initiated_by} & {
                r.name for r in fluent.terminated_by
            }
            if overlap:
                names = ", ".join(sorted(overlap))
                diags.append(
                    Diagnostic(
                        ERROR, "E-FLUENT-OVERLAP",
                        f"fluent '{fluent.name}' is both initiated and terminated by: {names}",
                        fluent.span,
                    )
                )
            if fluent.name not in mapped:
                diags.append(
                    Diagnostic(
                        WARNING, "W-UNREACHABLE",
                        f"fluent '{fluent.name}' is not referenced by any mapping", fluent.span,
                    )
                )

    for event in tier.events:
        if not event.activation and not event.injectable and event.name not in triggered:
            diags.append(
                Diagnostic(
                    WARNING, "W-UNREACHABLE",
                    f"event '{event.name}' has no activation, is never triggered,"
                    " and is not INJECTABLE",
                    event.span,
                )
            )
        for clause in event.activation:
            if clause.kind is ActivationKind.ELAPSED and (clause.ticks or 0) < 1:
                diags.append(
                    Diagnostic(
                        ERROR, "E-CAPACITY", "ELAPSED period must be at least 1 tick", clause.span
                    )
                )

    _check_call_cycles(tier, diags)


def _check_call_cycles(tier: Tier, diags: list[Diagnostic]) -> None:
    actions = {action.name: action for action in tier.actions}
    callees: dict[str, list[str]] = {
        name: [
            stmt.action.name
            for stmt in action.does + action.onerr_does
            if isinstance(stmt, CallStmt) and stmt.action.name in actions
        ]
        for name, action in actions.items()
    }
    DONE, ACTIVE = 2, 1
    state: dict[str, int] = {}
    reported: set[str] = set()

    def visit(name: str, stack: list[str]) -> None:
        state[name] = ACTIVE
        stack.append(name)
        for callee in callees[name]:
            if state.get(callee) == ACTIVE:
                cycle = stack[stack.index(callee) :] + [callee]
                key = "->".join(cycle)
                if key not in reported:
                    reported.add(key)
                    diags.append(
                        Diagnostic(
                            ERROR, "E-CYCLE",
                            f"action call cycle: {' -> '.join(cycle)}", actions[callee].span,
                        )
                    )
            elif state.get(callee) != DONE:
                visit(callee, stack)
        stack.pop()
        state[name] = DONE

    for name in actions:
        if state.get(name) != DONE:
            visit(name, [])
