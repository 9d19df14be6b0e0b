import pytest
from hypothesis import given, settings, strategies as st

from qrmsg.reward_machine import (And, Atom, DeterminismError, Edge, Not, Or, RMError,
                                  RMSyntaxError, RewardMachine, TrueGuard, all_labels,
                                  check_deterministic, parse_guard, parse_rm, rm_run, rm_step)

E, A, M = "EgoAtHome", "AdvAtHome", "EgoMeetAdv"


def test_fig1b_shape(fig1b):
    ego, _ = fig1b
    assert set(ego.states) == {"v0", "v1", "v2", "vend"}
    assert ego.initial == "v0"


def test_fig1b_steps(fig1b):
    ego, _ = fig1b
    assert rm_step(ego, "v0", {E}) == ("v1", 0.0)
    assert rm_step(ego, "v1", {M}) == ("vend", 1.0)
    assert rm_step(ego, "v2", {M}) == ("vend", -1.0)


def test_unmatched_label_self_loops(fig1b):
    ego, _ = fig1b
    for v in ego.states:
        assert rm_step(ego, v, set()) == (v, 0.0)


def test_fig1b_runs(fig1b):
    ego, _ = fig1b
    assert rm_run(ego, [{E}, set(), {M}]) == [0.0, 0.0, 1.0]
    assert rm_run(ego, [{A}, {M}]) == [0.0, -1.0]
    assert rm_run(ego, []) == []


def test_overlapping_edges_rejected():
    text = """states: v0 v1 v2
initial: v0
props: EgoAtHome
edge: v0 -> v1 on EgoAtHome reward 0
edge: v0 -> v2 on true reward 0
"""
    with pytest.raises(DeterminismError) as exc:
        parse_rm(text)
    assert exc.value.state == "v0"
    assert exc.value.label == frozenset({E})


def test_check_deterministic_witness():
    edges = (Edge("v0", Atom(E), "v1", 0.0), Edge("v0", TrueGuard(), "v0", 0.0))
    rm = RewardMachine(("v0", "v1"), "v0", frozenset({E}), edges, check=False)
    v, label, hits = check_deterministic(rm)
    assert (v, label) == ("v0", frozenset({E}))
    assert len(hits) == 2


def test_check_deterministic_ok(fig1b):
    assert check_deterministic(fig1b[0]) is None
    rm = RewardMachine(("v",), "v", frozenset(), (Edge("v", TrueGuard(), "v", 0.0),))
    assert check_deterministic(rm) is None


def test_single_state_no_edges():
    rm = parse_rm("states: s\ninitial: s\nprops: p q\n")
    for label in all_labels({"p", "q"}):
        assert rm.step("s", label) == ("s", 0.0)


@pytest.mark.parametrize("text, line, col", [
    ("states: a\ninitial: a\nprops: p\nedge: a -> a on p & reward 1\n", 4, 20),
    ("states: a\ninitial: a\nprops: p\nedge: a -> a on (p reward 1\n", 4, 19),
    ("states: a\ninitial: a\nprops: p\nedge: a -> a on p $ p reward 1\n", 4, 19),
    ("states: a\nbogus: 1\n", 2, 1),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(RMSyntaxError) as exc:
        parse_rm(text)
    assert exc.value.line == line
    assert exc.value.column == col


def test_unknown_proposition():
    with pytest.raises(RMError, match="Foo"):
        parse_rm("states: a b\ninitial: a\nprops: p\nedge: a -> b on Foo reward 1\n")


def test_unknown_state_and_initial():
    with pytest.raises(RMError, match="unknown state"):
        parse_rm("states: a\ninitial: a\nprops: p\nedge: a -> z on p reward 1\n")
    with pytest.raises(RMError, match="initial"):
        parse_rm("states: a\ninitial: b\n")


def test_guard_precedence():
    g = parse_guard("!a & b | c")
    assert g == Or(And(Not(Atom("a")), Atom("b")), Atom("c"))
    assert parse_guard("!(a | b)") == Not(Or(Atom("a"), Atom("b")))
    assert parse_guard("a & (b | c)").holds({"a", "c"})
    assert not parse_guard("a & b | c").holds({"a"})


def test_label_outside_props_is_ignored(fig1b):
    ego, _ = fig1b
    assert ego.step("v0", frozenset({E, "Unrelated"})) == ("v1", 0.0)


def test_shipped_machines_are_deterministic():
    from conftest import RMS
    from qrmsg.reward_machine import load_rm
    for path in sorted(RMS.glob("*.rm")):
        rm = load_rm(path)
        assert check_deterministic(rm) is None, path.name
        assert sum(rm.is_sink(v) for v in rm.states) >= 1


# ---------------------------------------------------------------------------
# properties

PROPS = ["p0", "p1", "p2", "p3", "p4", "p5"]


def guards(props):
    atoms = st.sampled_from(props).map(Atom) | st.just(TrueGuard())
    return st.recursive(atoms, lambda sub: st.one_of(
        sub.map(Not), st.tuples(sub, sub).map(lambda t: And(*t)),
        st.tuples(sub, sub).map(lambda t: Or(*t))), max_leaves=6)


@st.composite
def machines(draw):
    n_props = draw(st.integers(0, 6))
    props = PROPS[:n_props]
    states = [f"s{i}" for i in range(draw(st.integers(1, 4)))]
    edges = []
    for src in states:
        # disjoint guards: each edge is "g_k and not any previous guard"
        taken = None
        for _ in range(draw(st.integers(0, 3))):
            g = draw(guards(props)) if props else TrueGuard()
            guard = g if taken is None else And(g, Not(taken))
            taken = g if taken is None else Or(taken, g)
            reward = draw(st.integers(-3, 3)) / 2
            edges.append(Edge(src, guard, draw(st.sampled_from(states)), float(reward)))
    return RewardMachine(tuple(states), states[0], frozenset(props), tuple(edges))


@settings(max_examples=60, deadline=None)
@given(machines())
def test_print_parse_round_trip(rm):
    again = parse_rm(rm.to_text())
    for v in rm.states:
        for label in all_labels(rm.props):
            assert again.step(v, label) == rm.step(v, label)


@settings(max_examples=60, deadline=None)
@given(machines(), st.data())
def test_step_total_and_run_length(rm, data):
    labels = data.draw(st.lists(st.sets(st.sampled_from(PROPS)), max_size=12))
    out = rm_run(rm, labels)
    assert len(out) == len(labels)
    for v in rm.states:
        for label in all_labels(rm.props):
            nxt, r = rm.step(v, label)
            assert nxt in rm.states and isinstance(r, float)


@settings(max_examples=100, deadline=None)
@given(guards(PROPS[:4]), st.sets(st.sampled_from(PROPS[:4])))
def test_guard_evaluation_pure_and_printable(g, label):
    label = frozenset(label)
    assert g.holds(label) == g.holds(label)
    assert parse_guard(str(g)).holds(label) == g.holds(label)
