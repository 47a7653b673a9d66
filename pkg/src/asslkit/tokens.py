"""Token and source-location definitions for the specification language."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto


@dataclass(frozen=True)
class SourceSpan:
    """Location of a construct in a source file. Lines and columns are 1-based."""

    file: str
    line: int
    column: int
    length: int = 0

    def render(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


#: Span attached to nodes built in memory rather than parsed from a file.
SYNTHETIC = SourceSpan("<synthetic>", 1, 1, 0)


class TokenKind(Enum):
    # Tier and section keywords
    KW_AS = auto()
    KW_ASIP = auto()
    KW_AE = auto()
    KW_AEIP = auto()
    KW_SLO = auto()
    KW_POLICIES = auto()
    KW_ACTIONS = auto()
    KW_EVENTS = auto()
    KW_METRICS = auto()
    KW_FRIENDS = auto()
    KW_ARCHITECTURE = auto()
    KW_MANAGED_ELEMENTS = auto()
    KW_RECOVERY_PROTOCOL = auto()
    KW_BEHAVIOR_MODELS = auto()
    KW_OUTCOMES = auto()
    KW_MESSAGES = auto()
    KW_CHANNELS = auto()
    KW_FUNCTIONS = auto()
    KW_MESSAGE = auto()
    KW_CHANNEL = auto()
    KW_FUNCTION = auto()
    KW_SENDER = auto()
    KW_RECEIVER = auto()
    KW_CAPACITY = auto()
    # Policy structure
    KW_FLUENT = auto()
    KW_INITIATED_BY = auto()
    KW_TERMINATED_BY = auto()
    KW_MAPPING = auto()
    KW_CONDITIONS = auto()
    KW_DO_ACTIONS = auto()
    # Events
    KW_EVENT = auto()
    KW_GUARDS = auto()
    KW_ACTIVATION = auto()
    KW_SENT = auto()
    KW_RECEIVED = auto()
    KW_CHANGED = auto()
    KW_ELAPSED = auto()
    KW_INJECTABLE = auto()
    # Actions
    KW_ACTION = auto()
    KW_ENSURES = auto()
    KW_DOES = auto()
    KW_ONERR_DOES = auto()
    KW_TRIGGERS = auto()
    KW_ONERR_TRIGGERS = auto()
    # Metrics
    KW_METRIC = auto()
    KW_TYPE = auto()
    KW_INITIAL = auto()
    # Expressions
    KW_NOT = auto()
    KW_AND = auto()
    KW_OR = auto()
    # Well-known policy names
    KW_SELF_PROTECTING = auto()
    KW_SELF_HEALING = auto()
    KW_SELF_CONFIGURING = auto()
    KW_SELF_SCHEDULING = auto()
    # Statement keywords (lower case, as they appear inside DOES clauses)
    KW_CALL = auto()
    KW_SEND = auto()
    KW_OVER = auto()
    KW_FAIL = auto()
    # Literals, names, references
    IDENT = auto()
    REF = auto()
    INT = auto()
    REAL = auto()
    TEXT = auto()
    BOOL = auto()
    # Punctuation and operators
    LBRACE = auto()
    RBRACE = auto()
    LPAREN = auto()
    RPAREN = auto()
    COMMA = auto()
    SEMI = auto()
    EQUALS = auto()
    NE = auto()
    LT = auto()
    LE = auto()
    GT = auto()
    GE = auto()
    EOF = auto()


KEYWORDS: dict[str, TokenKind] = {
    "AS": TokenKind.KW_AS,
    "ASIP": TokenKind.KW_ASIP,
    "AE": TokenKind.KW_AE,
    "AEIP": TokenKind.KW_AEIP,
    "SLO": TokenKind.KW_SLO,
    "POLICIES": TokenKind.KW_POLICIES,
    "ACTIONS": TokenKind.KW_ACTIONS,
    "EVENTS": TokenKind.KW_EVENTS,
    "METRICS": TokenKind.KW_METRICS,
    "FRIENDS": TokenKind.KW_FRIENDS,
    "ARCHITECTURE": TokenKind.KW_ARCHITECTURE,
    "MANAGED_ELEMENTS": TokenKind.KW_MANAGED_ELEMENTS,
    "RECOVERY_PROTOCOL": TokenKind.KW_RECOVERY_PROTOCOL,
    "BEHAVIOR_MODELS": TokenKind.KW_BEHAVIOR_MODELS,
    "OUTCOMES": TokenKind.KW_OUTCOMES,
    "MESSAGES": TokenKind.KW_MESSAGES,
    "CHANNELS": TokenKind.KW_CHANNELS,
    "FUNCTIONS": TokenKind.KW_FUNCTIONS,
    "MESSAGE": TokenKind.KW_MESSAGE,
    "CHANNEL": TokenKind.KW_CHANNEL,
    "FUNCTION": TokenKind.KW_FUNCTION,
    "SENDER": TokenKind.KW_SENDER,
    "RECEIVER": TokenKind.KW_RECEIVER,
    "CAPACITY": TokenKind.KW_CAPACITY,
    "FLUENT": TokenKind.KW_FLUENT,
    "INITIATED_BY": TokenKind.KW_INITIATED_BY,
    "TERMINATED_BY": TokenKind.KW_TERMINATED_BY,
    "MAPPING": TokenKind.KW_MAPPING,
    "CONDITIONS": TokenKind.KW_CONDITIONS,
    "DO_ACTIONS": TokenKind.KW_DO_ACTIONS,
    "EVENT": TokenKind.KW_EVENT,
    "GUARDS": TokenKind.KW_GUARDS,
    "ACTIVATION": TokenKind.KW_ACTIVATION,
    "SENT": TokenKind.KW_SENT,
    "RECEIVED": TokenKind.KW_RECEIVED,
    "CHANGED": TokenKind.KW_CHANGED,
    "ELAPSED": TokenKind.KW_ELAPSED,
    "INJECTABLE": TokenKind.KW_INJECTABLE,
    "ACTION": TokenKind.KW_ACTION,
    "ENSURES": TokenKind.KW_ENSURES,
    "DOES": TokenKind.KW_DOES,
    "ONERR_DOES": TokenKind.KW_ONERR_DOES,
    "TRIGGERS": TokenKind.KW_TRIGGERS,
    "ONERR_TRIGGERS": TokenKind.KW_ONERR_TRIGGERS,
    "METRIC": TokenKind.KW_METRIC,
    "TYPE": TokenKind.KW_TYPE,
    "INITIAL": TokenKind.KW_INITIAL,
    "NOT": TokenKind.KW_NOT,
    "AND": TokenKind.KW_AND,
    "OR": TokenKind.KW_OR,
    "SELF_PROTECTING": TokenKind.KW_SELF_PROTECTING,
    "SELF_HEALING": TokenKind.KW_SELF_HEALING,
    "SELF_CONFIGURING": TokenKind.KW_SELF_CONFIGURING,
    "SELF_SCHEDULING": TokenKind.KW_SELF_SCHEDULING,
    "call": TokenKind.KW_CALL,
    "send": TokenKind.KW_SEND,
    "over": TokenKind.KW_OVER,
    "fail": TokenKind.KW_FAIL,
}

#: Words that open a qualified reference when immediately followed by a dot.
#: AEIP references take the longer form AEIP.MESSAGES.<name>.
NAMESPACE_WORDS = frozenset({"EVENTS", "ACTIONS", "METRICS", "FLUENTS", "CHANNELS"})

#: Token kinds that may stand where a policy name is expected.
POLICY_NAME_KINDS = frozenset(
    {
        TokenKind.IDENT,
        TokenKind.KW_SELF_PROTECTING,
        TokenKind.KW_SELF_HEALING,
        TokenKind.KW_SELF_CONFIGURING,
        TokenKind.KW_SELF_SCHEDULING,
    }
)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan
    value: object = None

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Token({self.kind.name}, {self.text!r})"


class LexError(Exception):
    """Character-level error; carries the span of the offending input."""

    def __init__(self, message: str, span: SourceSpan) -> None:
        super().__init__(f"{span.render()}: {message}")
        self.message = message
        self.span = span
