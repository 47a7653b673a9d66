"""Resolution, typing, and semantic-rule diagnostics."""

from __future__ import annotations

from asslkit import check_all, parse_text
from asslkit.checker import check_semantics, check_types, resolve


def diags_of(source: str) -> list[str]:
    spec = check_all(parse_text(source))
    return [f"{d.severity} {d.code}" for d in spec.diagnostics]


def codes_of(source: str) -> list[str]:
    spec = check_all(parse_text(source))
    return [d.code for d in spec.diagnostics]


BASE = """
AS sys {{ }}
AE unit {{
  POLICIES {{
    SELF_HEALING {{
      FLUENT busy {{
        INITIATED_BY {{ EVENTS.go }}
        TERMINATED_BY {{ EVENTS.fin }}
      }}
      MAPPING {{ CONDITIONS {{ {condition} }} DO_ACTIONS {{ ACTIONS.work }} }}
    }}
  }}
  ACTIONS {{
    ACTION work {{
      DOES {{ METRICS.done = true; }}
      TRIGGERS {{ EVENTS.fin }}
    }}
  }}
  EVENTS {{
    EVENT go {{ INJECTABLE }}
    EVENT fin {{ }}
  }}
  METRICS {{
    METRIC done {{ TYPE {{ boolean }} INITIAL {{ false }} }}
  }}
}}
"""


def test_figures_spec_is_clean(figures_spec):
    assert figures_spec.diagnostics == ()
    assert figures_spec.ok


def test_base_spec_is_clean():
    assert diags_of(BASE.format(condition="busy")) == []


def test_undefined_fluent_in_mapping():
    assert codes_of(BASE.format(condition="nonexistent")) == ["E-UNDEF"]


def test_duplicate_event():
    source = BASE.format(condition="busy").replace(
        "EVENT fin { }", "EVENT fin { } EVENT fin { }"
    )
    assert codes_of(source) == ["E-DUP"]


def test_undefined_reference_reported_once_each():
    source = """
    AS sys { }
    AE unit {
      ACTIONS {
        ACTION a {
          DOES { METRICS.missing = true; }
          TRIGGERS { EVENTS.alsoMissing }
        }
      }
    }
    """
    spec = check_all(parse_text(source))
    undef = [d for d in spec.diagnostics if d.code == "E-UNDEF"]
    assert len(undef) == 2


def test_assign_type_mismatch():
    source = BASE.format(condition="busy").replace(
        "METRICS.done = true;", 'METRICS.count = "text";'
    ).replace(
        "METRIC done { TYPE { boolean } INITIAL { false } }",
        "METRIC count { TYPE { integer } INITIAL { 0 } }",
    )
    assert "E-TYPE" in codes_of(source)


def test_comparison_type_mismatch():
    source = BASE.format(condition="busy").replace(
        "EVENT go { INJECTABLE }",
        "EVENT go { INJECTABLE GUARDS { METRICS.count > true } }",
    ).replace(
        "METRIC done { TYPE { boolean } INITIAL { false } }",
        "METRIC count { TYPE { integer } INITIAL { 0 } }"
        " METRIC done { TYPE { boolean } INITIAL { false } }",
    )
    assert "E-TYPE" in codes_of(source)


def test_boolean_guard_accepted(figures_spec):
    # NOT over a boolean metric types as boolean: no diagnostics on figures.
    diags = check_types(figures_spec.tree, figures_spec.symbols)
    assert diags == []


def test_ordering_comparison_on_text_rejected():
    source = BASE.format(condition="busy").replace(
        "EVENT go { INJECTABLE }",
        'EVENT go { INJECTABLE GUARDS { METRICS.tag >= "a" } }',
    ).replace(
        "METRIC done { TYPE { boolean } INITIAL { false } }",
        'METRIC tag { TYPE { text } INITIAL { "a" } }'
        " METRIC done { TYPE { boolean } INITIAL { false } }",
    )
    assert "E-TYPE" in codes_of(source)


def test_metric_initial_must_match_type():
    source = BASE.format(condition="busy").replace(
        "METRIC done { TYPE { boolean } INITIAL { false } }",
        "METRIC done { TYPE { boolean } INITIAL { 3 } }",
    )
    assert "E-TYPE" in codes_of(source)


def test_fluent_overlap():
    source = BASE.format(condition="busy").replace(
        "TERMINATED_BY { EVENTS.fin }", "TERMINATED_BY { EVENTS.go }"
    )
    assert "E-FLUENT-OVERLAP" in codes_of(source)


def test_call_cycle():
    source = """
    AS sys { }
    AE unit {
      ACTIONS {
        ACTION a { DOES { call ACTIONS.b; } }
        ACTION b { DOES { call ACTIONS.a; } }
      }
    }
    """
    assert codes_of(source) == ["E-CYCLE"]


def test_self_call_cycle():
    source = """
    AS sys { ACTIONS { ACTION a { DOES { call ACTIONS.a; } } } }
    """
    assert codes_of(source) == ["E-CYCLE"]


def test_unmapped_fluent_warns():
    source = BASE.format(condition="busy").replace(
        "MAPPING { CONDITIONS { busy } DO_ACTIONS { ACTIONS.work } }",
        """MAPPING { CONDITIONS { busy } DO_ACTIONS { ACTIONS.work } }
      FLUENT lonely {
        INITIATED_BY { EVENTS.go }
        TERMINATED_BY { EVENTS.fin }
      }""",
    )
    diags = diags_of(source)
    assert diags == ["warning W-UNREACHABLE"]


def test_unraisable_event_warns():
    source = BASE.format(condition="busy").replace(
        "EVENT fin { }", "EVENT fin { } EVENT orphan { }"
    )
    assert diags_of(source) == ["warning W-UNREACHABLE"]


def test_injectable_event_is_raisable():
    # go has no activation but carries the INJECTABLE flag: no warning.
    assert diags_of(BASE.format(condition="busy")) == []


def test_cross_policy_condition_rejected():
    source = BASE.format(condition="busy").replace(
        "MAPPING { CONDITIONS { busy } DO_ACTIONS { ACTIONS.work } }",
        """MAPPING { CONDITIONS { busy } DO_ACTIONS { ACTIONS.work } }
    }
    OTHER {
      FLUENT other {
        INITIATED_BY { EVENTS.go }
        TERMINATED_BY { EVENTS.fin }
      }
      MAPPING { CONDITIONS { busy, other } DO_ACTIONS { ACTIONS.work } }""",
    )
    assert "E-SCOPE" in codes_of(source)


def test_empty_policy_rejected():
    codes = codes_of("AS sys { POLICIES { P { } } }")
    assert "E-EMPTY" in codes


def test_channel_capacity_bound():
    source = """
    AS sys { }
    ASIP { CHANNELS { CHANNEL c { CAPACITY { 0 } } } }
    """
    assert "E-CAPACITY" in codes_of(source)


def test_elapsed_period_bound():
    source = BASE.format(condition="busy").replace(
        "EVENT go { INJECTABLE }", "EVENT go { ACTIVATION { ELAPSED { 0 } } }"
    )
    assert "E-CAPACITY" in codes_of(source)


def test_binding_not_visible_in_guards():
    source = """
    AS sys {
      ACTIONS {
        ACTION a {
          GUARDS { someBinding }
          DOES { someBinding = call ACTIONS.b; }
        }
        ACTION b { DOES { METRICS.m = true; } }
      }
      METRICS { METRIC m { TYPE { boolean } INITIAL { false } } }
    }
    """
    assert "E-UNDEF" in codes_of(source)


def test_binding_visible_in_ensures():
    source = """
    AS sys {
      ACTIONS {
        ACTION a {
          ENSURES { ok }
          DOES { ok = call ACTIONS.b; }
        }
        ACTION b { DOES { METRICS.m = true; } }
      }
      METRICS { METRIC m { TYPE { boolean } INITIAL { false } } }
    }
    """
    assert codes_of(source) == []


def test_duplicate_tier_names():
    assert "E-DUP" in codes_of("AS sys { } AE sys { }")


def test_message_reference_falls_back_to_shared_protocol():
    # AEIP.MESSAGES.x with no local AEIP resolves against the ASIP
    source = """
    AS sys { }
    ASIP {
      MESSAGES { MESSAGE ping { SENDER { unit } RECEIVER { unit } } }
      CHANNELS { CHANNEL link { CAPACITY { 1 } } }
    }
    AE unit {
      EVENTS {
        EVENT got { ACTIVATION { RECEIVED { AEIP.MESSAGES.ping } } }
      }
      ACTIONS {
        ACTION poke { DOES { send AEIP.MESSAGES.ping over CHANNELS.link; } }
      }
    }
    """
    spec = check_all(parse_text(source))
    errors = [d for d in spec.diagnostics if d.severity == "error"]
    assert errors == []
    assert spec.symbols.resolve_message("unit", "ping") == (
        "ASIP",
        spec.symbols.messages[("ASIP", "ping")],
    )
    # a local AEIP declaration shadows the shared one deterministically
    local = source.replace(
        "EVENTS {",
        """AEIP { MESSAGES { MESSAGE ping { SENDER { unit } RECEIVER { sys } } } }
      EVENTS {""",
    )
    spec = check_all(parse_text(local))
    scope, decl = spec.symbols.resolve_message("unit", "ping")
    assert scope == "unit" and decl.receiver == "sys"


def test_diagnostics_are_deterministic_and_ordered():
    source = BASE.format(condition="nope").replace(
        "EVENT fin { }", "EVENT fin { } EVENT fin { }"
    )
    first = check_all(parse_text(source)).diagnostics
    second = check_all(parse_text(source)).diagnostics
    assert first == second
    keys = [(d.span.file, d.span.line, d.span.column, d.code) for d in first]
    assert keys == sorted(keys)


def test_diagnostic_render_format():
    spec = check_all(parse_text(BASE.format(condition="nope"), "unit.assl"))
    (diag,) = spec.diagnostics
    rendered = diag.render()
    assert rendered.startswith("unit.assl:")
    parts = rendered.split(": ", 2)
    file_line_col = parts[0].split(":")
    assert len(file_line_col) == 3
    assert parts[1] == "error E-UNDEF"


def test_resolve_then_types_then_semantics_composition(figures_spec):
    symbols, diags = resolve(figures_spec.tree)
    assert diags == []
    assert check_types(figures_spec.tree, symbols) == []
    assert check_semantics(figures_spec.tree, symbols) == []


def test_diagnostic_spans_lie_inside_source():
    source = BASE.format(condition="nope")
    spec = check_all(parse_text(source, "unit.assl"))
    lines = source.split("\n")
    for diag in spec.diagnostics:
        assert diag.span.file == "unit.assl"
        assert 1 <= diag.span.line <= len(lines)
        line = lines[diag.span.line - 1]
        assert 1 <= diag.span.column <= len(line) + 1
        start = diag.span.column - 1
        assert diag.span.length <= len(line) - start
