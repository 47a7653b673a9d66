"""State-graph construction, property checking, counterexamples."""

from __future__ import annotations

import random

import pytest

from asslkit import check_all, parse_text
from asslkit.verifier import (
    Bounds,
    HOLDS,
    INCONCLUSIVE,
    VIOLATED,
    PropertyError,
    UnresolvedAtom,
    build_lts,
    check,
    explain,
    lts_to_text,
    parse_env_stimulus,
    parse_property,
    parse_property_file,
    replay_counterexample,
    eval_prop,
)
from oracles import brute_force_lts, exhaustive_check, lts_as_sets
from specgen import env_for, random_checked_spec, random_properties

TOGGLE_SPEC = """
AS sys { }
AE unit {
  POLICIES {
    TOGGLE {
      FLUENT busy {
        INITIATED_BY { EVENTS.go }
        TERMINATED_BY { EVENTS.stop }
      }
      MAPPING { CONDITIONS { busy } DO_ACTIONS { ACTIONS.hold } }
    }
  }
  ACTIONS {
    ACTION hold { DOES { METRICS.held = true; } }
  }
  EVENTS {
    EVENT go { INJECTABLE }
    EVENT stop { INJECTABLE }
  }
  METRICS { METRIC held { TYPE { boolean } INITIAL { true } } }
}
"""


@pytest.fixture(scope="module")
def toggle_spec():
    spec = check_all(parse_text(TOGGLE_SPEC))
    assert spec.ok
    return spec


class TestBuildLts:
    def test_single_fluent_automaton_matches_hand_enumeration(self):
        # Simplest possible system: one fluent flipped by two injectable
        # events; the mapped action's write preserves the initial value, so
        # the automaton is purely the fluent plus occurrence bookkeeping.
        spec = check_all(
            parse_text(
                """
                AS sys { }
                AE unit {
                  POLICIES {
                    TOGGLE {
                      FLUENT busy {
                        INITIATED_BY { EVENTS.go }
                        TERMINATED_BY { EVENTS.stop }
                      }
                      MAPPING { CONDITIONS { busy } DO_ACTIONS { ACTIONS.noteIt } }
                    }
                  }
                  ACTIONS { ACTION noteIt { DOES { METRICS.seen = true; } } }
                  EVENTS {
                    EVENT go { INJECTABLE }
                    EVENT stop { INJECTABLE }
                  }
                  METRICS { METRIC seen { TYPE { boolean } INITIAL { true } } }
                }
                """
            )
        )
        lts = build_lts(spec)
        # Hand enumeration (stimulus edges clear the last-event marker):
        #   q0 (idle, none)   --go-->  p1 (idle, pending go)   --proc--> q1
        #   q0                --stop-> p2 (idle, pending stop) --proc--> q2
        #   q1 (busy, go)     --go-->  p3 --proc--> q1 (re-initiation no-op)
        #   q1                --stop-> p4 --proc--> q2
        #   q2 (idle, stop)   --go-->  p1'            = (idle, none, go) = p1
        #   q2                --stop-> p2'            = p2
        # giving 3 quiescent + 4 pending = 7 states and 10 edges.
        assert lts.state_count == 7
        assert lts.edge_count == 10
        assert not lts.truncated
        states, edges, labelings, initial = lts_as_sets(lts)
        o_states, o_edges, o_labelings, o_initial = brute_force_lts(spec, lts.env)
        assert states == o_states
        assert edges == o_edges
        assert labelings == o_labelings
        assert initial == o_initial

    def test_empty_spec(self):
        spec = check_all(parse_text("AS empty { }"))
        lts = build_lts(spec)
        assert lts.state_count == 1
        assert lts.edge_count == 0
        assert not lts.truncated
        assert lts.expanded == frozenset({0})

    def test_figures_env_graph_is_finite(self, protecting_spec):
        env = (
            parse_env_stimulus(protecting_spec, "send privateMessage secureLink"),
            parse_env_stimulus(protecting_spec, "set messageVerdictSecure true"),
            parse_env_stimulus(protecting_spec, "set messageVerdictSecure false"),
            parse_env_stimulus(protecting_spec, "tick"),
        )
        lts = build_lts(protecting_spec, env=env, bounds=Bounds(max_states=10_000))
        assert not lts.truncated
        # golden value, frozen from the first complete exploration
        assert lts.state_count == 60
        assert lts.edge_count == 138

    def test_brute_force_equivalence_on_random_specs(self):
        for seed in range(8):
            spec = random_checked_spec(seed)
            env = env_for(spec)
            lts = build_lts(spec, env=env)
            assert not lts.truncated
            assert lts.state_count <= 512
            assert lts_as_sets(lts)[:3] == brute_force_lts(spec, env)[:3]

    def test_jobs_do_not_change_the_graph(self, protecting_spec):
        env = env_for(protecting_spec)
        one = build_lts(protecting_spec, env=env, jobs=1)
        four = build_lts(protecting_spec, env=env, jobs=4)
        assert one.states == four.states
        assert one.edges == four.edges
        assert one.truncated == four.truncated

    def test_truncation_by_state_bound(self, toggle_spec):
        lts = build_lts(toggle_spec, bounds=Bounds(max_states=3))
        assert lts.truncated
        assert lts.state_count <= 3

    def test_truncation_by_depth_bound(self, toggle_spec):
        lts = build_lts(toggle_spec, bounds=Bounds(max_depth=1))
        assert lts.truncated
        full = build_lts(toggle_spec)
        assert lts.state_count < full.state_count

    def test_truncation_by_pending_bound(self):
        # one mapping firing enqueues nine triggers at once
        triggers = ", ".join(f"EVENTS.e{i}" for i in range(9))
        events = "\n".join(f"EVENT e{i} {{ }}" for i in range(9))
        spec = check_all(
            parse_text(
                f"""
                AS sys {{
                  POLICIES {{
                    BURST {{
                      FLUENT busy {{
                        INITIATED_BY {{ EVENTS.go }}
                        TERMINATED_BY {{ EVENTS.e0 }}
                      }}
                      MAPPING {{ CONDITIONS {{ busy }} DO_ACTIONS {{ ACTIONS.burst }} }}
                    }}
                  }}
                  ACTIONS {{
                    ACTION burst {{
                      DOES {{ METRICS.m = true; }}
                      TRIGGERS {{ {triggers} }}
                    }}
                  }}
                  EVENTS {{
                    EVENT go {{ INJECTABLE }}
                    {events}
                  }}
                  METRICS {{ METRIC m {{ TYPE {{ boolean }} INITIAL {{ false }} }} }}
                }}
                """
            )
        )
        assert spec.ok
        lts = build_lts(spec, bounds=Bounds(max_pending=8))
        assert lts.truncated
        # the state whose expansion was cut is not treated as a dead end
        assert 0 not in {
            s for s in range(lts.state_count)
            if s in lts.expanded and not lts.successors(s)
        }
        roomy = build_lts(spec, bounds=Bounds(max_pending=16))
        assert not roomy.truncated

    def test_graph_export_format(self, toggle_spec):
        lts = build_lts(toggle_spec)
        text = lts_to_text(lts)
        header = text.splitlines()[0]
        assert header == (
            f"lts states={lts.state_count} edges={lts.edge_count} truncated=false"
        )
        assert "state 0 initial" in text
        assert 'edge 0 -> ' in text


class TestCheck:
    def test_liveness_holds_on_figures(self, protecting_spec):
        env = (
            parse_env_stimulus(protecting_spec, "send privateMessage secureLink"),
            parse_env_stimulus(protecting_spec, "set messageVerdictSecure true"),
            parse_env_stimulus(protecting_spec, "set messageVerdictSecure false"),
            parse_env_stimulus(protecting_spec, "tick"),
        )
        lts = build_lts(protecting_spec, env=env)
        prop = parse_property(
            "G (implies (fluent inSecurityCheck)"
            " (F (event privateMessageSecure | event privateMessageInsecure)))",
            protecting_spec,
        )
        verdict = check(lts, prop)
        assert verdict.result == HOLDS
        assert exhaustive_check(lts, prop) == "Holds"

    def test_g_false_violated_with_empty_stem(self, toggle_spec):
        lts = build_lts(toggle_spec)
        verdict = check(lts, parse_property("G false", toggle_spec))
        assert verdict.result == VIOLATED
        assert verdict.counterexample.stem == ()
        assert verdict.counterexample.violating_state == 0

    def test_stuck_terminator_violates_with_lasso(self, protecting_pkg):
        # guards that can never pass leave inSecurityCheck active forever
        source = protecting_pkg.source()
        source = source.replace(
            "GUARDS { NOT METRICS.thereIsInsecureMsg }", "GUARDS { false }"
        ).replace("GUARDS { METRICS.thereIsInsecureMsg }", "GUARDS { false }")
        stuck = check_all(parse_text(source, "stuck.assl"))
        assert stuck.ok
        env = (
            parse_env_stimulus(stuck, "send privateMessage secureLink"),
            parse_env_stimulus(stuck, "tick"),
        )
        lts = build_lts(stuck, env=env)
        prop = parse_property(
            "G (implies (fluent inSecurityCheck)"
            " (F (event privateMessageSecure | event privateMessageInsecure)))",
            stuck,
        )
        verdict = check(lts, prop)
        assert verdict.result == VIOLATED
        assert verdict.counterexample.kind == "lasso"
        vec = lts.states[verdict.counterexample.violating_state]
        fluent_index = lts.layout.fluent_index[("worker", "inSecurityCheck")]
        assert vec.fluents[fluent_index] is True
        assert exhaustive_check(lts, prop) == "Violated"

    def test_next_shape(self, toggle_spec):
        lts = build_lts(toggle_spec)
        # after go is raised, busy is active in the very next state... only
        # when the next edge is not another stimulus; expect Violated
        verdict = check(
            lts, parse_property("G (implies (event go) (X (fluent busy)))", toggle_spec)
        )
        assert verdict.result in (HOLDS, VIOLATED)
        assert (verdict.result == VIOLATED) == (
            exhaustive_check(lts, parse_property(
                "G (implies (event go) (X (fluent busy)))", toggle_spec
            )) == "Violated"
        )

    def test_until_shape(self, toggle_spec):
        lts = build_lts(toggle_spec)
        prop = parse_property("(! (fluent busy)) U (event go)", toggle_spec)
        verdict = check(lts, prop)
        assert verdict.result == exhaustive_check(lts, prop)

    def test_next_violated_at_dead_end(self):
        # no injectables, no messages, no timers: the initial state is a
        # genuine dead end, so X q fails wherever p holds
        spec = check_all(parse_text(TOGGLE_SPEC.replace("INJECTABLE", "")))
        lts = build_lts(spec)
        assert lts.state_count == 1 and not lts.truncated
        prop = parse_property("G (implies true (X true))", spec)
        verdict = check(lts, prop)
        assert verdict.result == VIOLATED
        assert verdict.counterexample.kind == "deadend"
        assert exhaustive_check(lts, prop) == "Violated"

    def test_truncated_holds_downgrades_to_inconclusive(self, toggle_spec):
        small = build_lts(toggle_spec, bounds=Bounds(max_states=2))
        assert small.truncated
        prop = parse_property("G (! (fluent busy) | (metric held))", toggle_spec)
        verdict = check(small, prop)
        assert verdict.result == INCONCLUSIVE
        full = build_lts(toggle_spec)
        assert check(full, prop).result == HOLDS

    def test_monotone_truncation_on_random_specs(self):
        rng = random.Random(77)
        rank = {VIOLATED: 0, HOLDS: 1, INCONCLUSIVE: 2}
        for seed in range(6):
            spec = random_checked_spec(seed + 100)
            env = env_for(spec)
            full = build_lts(spec, env=env)
            props = [
                parse_property(line, spec)
                for line in random_properties(spec, rng, count=4)
            ]
            for bound in (2, 8, 32):
                small = build_lts(spec, env=env, bounds=Bounds(max_states=bound))
                for prop in props:
                    low = check(small, prop).result
                    high = check(full, prop).result
                    # raising bounds may only resolve Inconclusive
                    if low != INCONCLUSIVE:
                        assert low == high, (seed, bound, prop.text)

    def test_unresolved_atom(self, toggle_spec):
        with pytest.raises(UnresolvedAtom):
            parse_property("G (fluent nonexistent)", toggle_spec)


class TestExplainAndReplay:
    def test_safety_counterexample_replays(self, toggle_spec):
        lts = build_lts(toggle_spec)
        prop = parse_property("G (! (fluent busy))", toggle_spec)
        verdict = check(lts, prop)
        assert verdict.result == VIOLATED
        cex = verdict.counterexample
        vector = replay_counterexample(toggle_spec, lts, cex)
        assert vector == lts.states[cex.violating_state]
        assert eval_prop(prop.p, vector, lts.layout) is False

    def test_explain_emits_text_and_scenario(self, toggle_spec):
        lts = build_lts(toggle_spec)
        verdict = check(lts, parse_property("G (! (fluent busy))", toggle_spec))
        text, scenario = explain(toggle_spec, lts, verdict)
        assert "inject unit.go" in text
        lines = scenario.render().splitlines()
        assert lines[0] == "tick 0 inject unit.go"
        assert lines[-1].endswith("halt")

    def test_lasso_scenario_halts_at_loop_entry(self, protecting_pkg):
        source = protecting_pkg.source().replace(
            "GUARDS { NOT METRICS.thereIsInsecureMsg }", "GUARDS { false }"
        ).replace("GUARDS { METRICS.thereIsInsecureMsg }", "GUARDS { false }")
        stuck = check_all(parse_text(source))
        env = (
            parse_env_stimulus(stuck, "send privateMessage secureLink"),
            parse_env_stimulus(stuck, "tick"),
        )
        lts = build_lts(stuck, env=env)
        prop = parse_property(
            "G (implies (fluent inSecurityCheck) (F (event privateMessageSecure)))",
            stuck,
        )
        verdict = check(lts, prop)
        assert verdict.result == VIOLATED
        assert verdict.counterexample.loop
        vector = replay_counterexample(stuck, lts, verdict.counterexample)
        assert vector == lts.states[verdict.counterexample.violating_state]
        text, scenario = explain(stuck, lts, verdict)
        assert "loop" in text
        assert scenario.steps[-1][1].render() == "halt"

    def test_explain_requires_violation(self, toggle_spec):
        lts = build_lts(toggle_spec)
        verdict = check(lts, parse_property("G true", toggle_spec))
        assert verdict.result == HOLDS
        with pytest.raises(ValueError):
            explain(toggle_spec, lts, verdict)


class TestPropertyParsing:
    def test_file_parsing_skips_comments(self, toggle_spec):
        props = parse_property_file(
            "# a comment\n\nG (fluent busy)\nF (event go)\n", toggle_spec
        )
        assert [p.shape for p in props] == ["G", "F"]

    def test_five_shapes(self, toggle_spec):
        lines = [
            "G (fluent busy)",
            "F (event go)",
            "G (implies (fluent busy) (F (event stop)))",
            "G (implies (event go) (X (fluent busy)))",
            "(metric held) U (event go)",
        ]
        shapes = [parse_property(line, toggle_spec).shape for line in lines]
        assert shapes == ["G", "F", "G->F", "G->X", "U"]

    def test_unsupported_shapes_rejected(self, toggle_spec):
        for line in [
            "(fluent busy)",
            "G (F (fluent busy))",
            "F (G (fluent busy))",
            "G (implies (F (fluent busy)) (fluent busy))",
            "! (G (fluent busy))",
        ]:
            with pytest.raises(PropertyError):
                parse_property(line, toggle_spec)

    def test_metric_comparison_atom(self, toggle_spec):
        prop = parse_property("G (metric held = true)", toggle_spec)
        assert prop.shape == "G"

    def test_metric_literal_type_checked(self, toggle_spec):
        with pytest.raises(PropertyError):
            parse_property("G (metric held = 3)", toggle_spec)

    def test_infix_and_prefix_mix(self, toggle_spec):
        prop = parse_property(
            "G ((fluent busy) -> ((metric held) & (! (event stop))))", toggle_spec
        )
        assert prop.shape == "G"
