"""Canonical source rendering for specification trees.

``parse_text(pretty_print(tree))`` yields a tree structurally equal to
``tree`` (spans aside). Optional clauses that parsed empty are omitted, which
is safe because an absent clause and an empty one build the same node.
"""

from __future__ import annotations

from .nodes import (
    ActionDecl,
    ActivationClause,
    ActivationKind,
    AeTier,
    AsipTier,
    AssignStmt,
    AsTier,
    BinaryExpr,
    BindingRefExpr,
    CallStmt,
    ChannelDecl,
    CompareExpr,
    EventDecl,
    Expr,
    FailStmt,
    FluentDecl,
    FluentRefExpr,
    Lit,
    MappingDecl,
    MessageDecl,
    MetricDecl,
    MetricRefExpr,
    NotExpr,
    OpaqueBlock,
    PolicyDecl,
    Ref,
    SendStmt,
    SpecificationTree,
    Stmt,
    render_value,
)

_INDENT = "  "

# Precedence levels for minimal parenthesization.
_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_ATOM = range(5)


def pretty_print(tree: SpecificationTree) -> str:
    """Render a whole specification as canonical source text."""
    out: list[str] = []
    _emit_as(out, tree.as_tier)
    if tree.asip_tier is not None:
        out.append("ASIP {")
        _emit_asip_body(out, tree.asip_tier, 1)
        out.append("}")
    for ae in tree.ae_tiers:
        _emit_ae(out, ae)
    return "\n".join(out) + "\n"


def format_policy(policy: PolicyDecl) -> str:
    """Render one policy declaration, used for declaration-level comparison."""
    out: list[str] = []
    _emit_policy(out, policy, 0)
    return "\n".join(out) + "\n"


def format_event(event: EventDecl) -> str:
    out: list[str] = []
    _emit_event(out, event, 0)
    return "\n".join(out) + "\n"


def format_action(action: ActionDecl) -> str:
    out: list[str] = []
    _emit_action(out, action, 0)
    return "\n".join(out) + "\n"


def format_expr(expr: Expr) -> str:
    return _expr(expr, _PREC_OR)


# --------------------------------------------------------------------------


def _line(out: list[str], depth: int, text: str) -> None:
    out.append(_INDENT * depth + text)


def _emit_as(out: list[str], tier: AsTier) -> None:
    if _as_is_empty(tier):
        out.append(f"AS {tier.name} {{ }}")
        return
    out.append(f"AS {tier.name} {{")
    _emit_tier_sections(out, tier, 1)
    if tier.architecture is not None:
        _line(out, 1, f"ARCHITECTURE {_opaque(tier.architecture)}")
    out.append("}")


def _as_is_empty(tier: AsTier) -> bool:
    return not (
        tier.slos or tier.policies or tier.actions or tier.events or tier.metrics
        or tier.architecture is not None
    )


def _emit_ae(out: list[str], tier: AeTier) -> None:
    out.append(f"AE {tier.name} {{")
    if tier.friends:
        _line(out, 1, "FRIENDS { " + ", ".join(tier.friends) + " }")
    _emit_tier_sections(out, tier, 1)
    if tier.aeip is not None:
        _line(out, 1, "AEIP {")
        _emit_asip_body(out, tier.aeip, 2)
        _line(out, 1, "}")
    if tier.recovery_protocol is not None:
        _line(out, 1, f"RECOVERY_PROTOCOL {_opaque(tier.recovery_protocol)}")
    if tier.behavior_models is not None:
        _line(out, 1, f"BEHAVIOR_MODELS {_opaque(tier.behavior_models)}")
    if tier.outcomes is not None:
        _line(out, 1, f"OUTCOMES {_opaque(tier.outcomes)}")
    out.append("}")


def _emit_tier_sections(out: list[str], tier: AsTier | AeTier, depth: int) -> None:
    if tier.slos:
        _line(out, depth, "SLO {")
        for slo in tier.slos:
            _line(out, depth + 1, f"{slo.name} {_opaque(slo.body)}")
        _line(out, depth, "}")
    if tier.policies:
        _line(out, depth, "POLICIES {")
        for policy in tier.policies:
            _emit_policy(out, policy, depth + 1)
        _line(out, depth, "}")
    if tier.actions:
        _line(out, depth, "ACTIONS {")
        for action in tier.actions:
            _emit_action(out, action, depth + 1)
        _line(out, depth, "}")
    if tier.events:
        _line(out, depth, "EVENTS {")
        for event in tier.events:
            _emit_event(out, event, depth + 1)
        _line(out, depth, "}")
    if tier.metrics:
        _line(out, depth, "METRICS {")
        for metric in tier.metrics:
            _emit_metric(out, metric, depth + 1)
        _line(out, depth, "}")


def _emit_policy(out: list[str], policy: PolicyDecl, depth: int) -> None:
    _line(out, depth, f"{policy.name} {{")
    for fluent in policy.fluents:
        _emit_fluent(out, fluent, depth + 1)
    for mapping in policy.mappings:
        _emit_mapping(out, mapping, depth + 1)
    _line(out, depth, "}")


def _emit_fluent(out: list[str], fluent: FluentDecl, depth: int) -> None:
    _line(out, depth, f"FLUENT {fluent.name} {{")
    _line(out, depth + 1, "INITIATED_BY { " + _refs(fluent.initiated_by) + " }")
    _line(out, depth + 1, "TERMINATED_BY { " + _refs(fluent.terminated_by) + " }")
    _line(out, depth, "}")


def _emit_mapping(out: list[str], mapping: MappingDecl, depth: int) -> None:
    _line(out, depth, "MAPPING {")
    _line(out, depth + 1, "CONDITIONS { " + _refs(mapping.conditions) + " }")
    _line(out, depth + 1, "DO_ACTIONS { " + _refs(mapping.do_actions) + " }")
    _line(out, depth, "}")


def _emit_event(out: list[str], event: EventDecl, depth: int) -> None:
    if event.guard is None and not event.activation and not event.injectable:
        _line(out, depth, f"EVENT {event.name} {{ }}")
        return
    _line(out, depth, f"EVENT {event.name} {{")
    if event.injectable:
        _line(out, depth + 1, "INJECTABLE")
    if event.guard is not None:
        _line(out, depth + 1, "GUARDS { " + format_expr(event.guard) + " }")
    for clause in event.activation:
        _line(out, depth + 1, "ACTIVATION { " + _activation(clause) + " }")
    _line(out, depth, "}")


def _activation(clause: ActivationClause) -> str:
    if clause.kind is ActivationKind.ELAPSED:
        return f"ELAPSED {{ {clause.ticks} }}"
    assert clause.target is not None
    return f"{clause.kind.value} {{ {clause.target.render()} }}"


def _emit_action(out: list[str], action: ActionDecl, depth: int) -> None:
    _line(out, depth, f"ACTION {action.name} {{")
    if action.guard is not None:
        _line(out, depth + 1, "GUARDS { " + format_expr(action.guard) + " }")
    if action.ensures is not None:
        _line(out, depth + 1, "ENSURES { " + format_expr(action.ensures) + " }")
    _emit_statements(out, "DOES", action.does, depth + 1)
    if action.onerr_does:
        _emit_statements(out, "ONERR_DOES", action.onerr_does, depth + 1)
    if action.triggers:
        _line(out, depth + 1, "TRIGGERS { " + _refs(action.triggers) + " }")
    if action.onerr_triggers:
        _line(out, depth + 1, "ONERR_TRIGGERS { " + _refs(action.onerr_triggers) + " }")
    _line(out, depth, "}")


def _emit_statements(out: list[str], keyword: str, stmts: tuple[Stmt, ...], depth: int) -> None:
    _line(out, depth, keyword + " {")
    for stmt in stmts:
        _line(out, depth + 1, _statement(stmt))
    _line(out, depth, "}")


def _statement(stmt: Stmt) -> str:
    if isinstance(stmt, CallStmt):
        call = f"call {stmt.action.render()};"
        return f"{stmt.binding} = {call}" if stmt.binding else call
    if isinstance(stmt, AssignStmt):
        return f"{stmt.metric.render()} = {format_expr(stmt.value)};"
    if isinstance(stmt, SendStmt):
        return f"send {stmt.message.render()} over {stmt.channel.render()};"
    assert isinstance(stmt, FailStmt)
    return f'fail "{stmt.reason}";'


def _emit_metric(out: list[str], metric: MetricDecl, depth: int) -> None:
    initial = render_value(metric.initial.value, metric.initial.type)
    _line(
        out, depth,
        f"METRIC {metric.name} {{ TYPE {{ {metric.value_type.value} }}"
        f" INITIAL {{ {initial} }} }}",
    )


def _emit_asip_body(out: list[str], asip: AsipTier, depth: int) -> None:
    if asip.messages:
        _line(out, depth, "MESSAGES {")
        for message in asip.messages:
            _emit_message(out, message, depth + 1)
        _line(out, depth, "}")
    if asip.channels:
        _line(out, depth, "CHANNELS {")
        for channel in asip.channels:
            _emit_channel(out, channel, depth + 1)
        _line(out, depth, "}")
    if asip.functions:
        _line(out, depth, "FUNCTIONS {")
        for function in asip.functions:
            _line(out, depth + 1, f"FUNCTION {function.name} {_opaque(function.body)}")
        _line(out, depth, "}")
    if asip.managed_elements is not None:
        _line(out, depth, f"MANAGED_ELEMENTS {_opaque(asip.managed_elements)}")


def _emit_message(out: list[str], message: MessageDecl, depth: int) -> None:
    _line(
        out, depth,
        f"MESSAGE {message.name} {{ SENDER {{ {message.sender} }}"
        f" RECEIVER {{ {message.receiver} }} }}",
    )


def _emit_channel(out: list[str], channel: ChannelDecl, depth: int) -> None:
    _line(out, depth, f"CHANNEL {channel.name} {{ CAPACITY {{ {channel.capacity} }} }}")


def _opaque(block: OpaqueBlock) -> str:
    if not block.tokens:
        return "{ }"
    return "{ " + " ".join(block.tokens) + " }"


def _refs(refs: tuple[Ref, ...]) -> str:
    return ", ".join(ref.render() for ref in refs)


def _expr(expr: Expr, parent: int) -> str:
    if isinstance(expr, Lit):
        return render_value(expr.value, expr.type)
    if isinstance(expr, MetricRefExpr):
        return f"METRICS.{expr.name}"
    if isinstance(expr, FluentRefExpr):
        return f"FLUENTS.{expr.name}"
    if isinstance(expr, BindingRefExpr):
        return expr.name
    if isinstance(expr, NotExpr):
        text = "NOT " + _expr(expr.operand, _PREC_NOT)
        level = _PREC_NOT
    elif isinstance(expr, BinaryExpr):
        level = _PREC_AND if expr.op == "AND" else _PREC_OR
        text = f"{_expr(expr.left, level)} {expr.op} {_expr(expr.right, level + 1)}"
    else:
        assert isinstance(expr, CompareExpr)
        level = _PREC_CMP
        text = f"{_expr(expr.left, _PREC_ATOM)} {expr.op} {_expr(expr.right, _PREC_ATOM)}"
    if level < parent:
        return f"({text})"
    return text
