"""Core word model: validation, realizability, well-timedness."""

import json

import pytest
from hypothesis import given, settings, strategies as st

from splitwidth.errors import (
    BackwardConstraint,
    ClockMatchViolation,
    LabelMismatch,
    NotLinear,
    StackCrossing,
    TooManyRounds,
    Unrealizable,
)
from splitwidth.tcw import (
    Constraint,
    Interval,
    Owner,
    RawGraph,
    Stcw,
    UNTAGGED,
    ZETA,
    brute_force_realizable,
    check_realization,
    check_well_timed,
    is_simple,
    realize,
    satisfies,
    stcw_from_json,
    stcw_to_dot,
    stcw_to_json,
    validate_split_tcw,
    validate_tcw,
)

from conftest import con, word


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

class TestValidate:
    def test_valid_chain(self):
        raw = RawGraph(
            positions=[("a", "a"), ("b", "b"), ("c", "c")],
            succ=[("a", "b"), ("b", "c")],
            constraints=[("a", "c", Interval(1, 2), UNTAGGED)],
        )
        w = validate_tcw(raw)
        assert w.labels == ("a", "b", "c")
        assert w.constraints == (con(0, 2, 1, 2),)

    def test_branching_succ(self):
        raw = RawGraph(
            positions=[("a", "a"), ("b", "b"), ("c", "c")],
            succ=[("a", "b"), ("a", "c")],
        )
        with pytest.raises(NotLinear):
            validate_tcw(raw)

    def test_backward_constraint(self):
        raw = RawGraph(
            positions=[("a", "a"), ("b", "b")],
            succ=[("a", "b")],
            constraints=[("b", "a", Interval(0, 0), UNTAGGED)],
        )
        with pytest.raises(BackwardConstraint):
            validate_tcw(raw)

    def test_cycle(self):
        raw = RawGraph(
            positions=[("a", "a"), ("b", "b")],
            succ=[("a", "b"), ("b", "a")],
        )
        with pytest.raises(NotLinear):
            validate_tcw(raw)

    def test_disconnected(self):
        raw = RawGraph(
            positions=[("a", "a"), ("b", "b"), ("c", "c")],
            succ=[("a", "b")],
        )
        with pytest.raises(NotLinear):
            validate_tcw(raw)

    def test_holes_make_split_words(self):
        raw = RawGraph(
            positions=[(0, "a"), (1, "b"), (2, "c")],
            succ=[(0, 1)],
            holes=[(1, 2)],
        )
        w = validate_split_tcw(raw)
        assert w.holes == frozenset({1})
        assert w.width == 2
        with pytest.raises(NotLinear):
            validate_tcw(raw)


# ---------------------------------------------------------------------------
# simplicity
# ---------------------------------------------------------------------------

class TestSimple:
    def test_five_position_example(self):
        # the worked five-position word: labels a b a b b with a single
        # constraint out of position 1 and into position 4, one more
        # between 2 and 5; degree facts: out(1)=1, in(4)=1, in(3)=0
        w = word("ababb", con(0, 3, 3, 3), con(1, 4, 2, 3))
        assert w.constraint_degree(0) == 1
        assert w.constraint_degree(3) == 1
        assert w.constraint_degree(2) == 0
        assert is_simple(w)

    def test_single_position(self):
        assert is_simple(word("a"))

    def test_degree_two_not_simple(self):
        w = word("abc", con(0, 1, 0, 1), con(0, 2, 0, 2))
        assert not is_simple(w)


# ---------------------------------------------------------------------------
# realizability: solver vs brute-force oracle
# ---------------------------------------------------------------------------

class TestRealize:
    def test_gap_within_interval(self):
        w = word("ab", con(0, 1, 1, 2))
        assert realize(w) == (0, 1)

    def test_contradiction(self, contradiction_word):
        # brute force over gap vectors finds no solution
        assert not brute_force_realizable(contradiction_word, 4)
        with pytest.raises(Unrealizable) as err:
            realize(contradiction_word)
        assert err.value.cycle

    def test_fig3_word_realizable(self, fig3_word):
        assert brute_force_realizable(fig3_word, 4)
        ts = realize(fig3_word)
        assert satisfies(fig3_word, ts)
        # gap vector (1,1,1) is a concrete witness
        assert satisfies(fig3_word, (0, 1, 2, 3))

    def test_canonical_solution_starts_at_zero(self, fig3_word):
        ts = realize(fig3_word)
        assert ts[0] == 0
        assert all(a <= b for a, b in zip(ts, ts[1:]))

    def test_holes_only_order(self):
        w = word("ab", con(0, 1, 2, 2), holes={0})
        assert realize(w) == (0, 2)

    def test_realize_empty_and_singleton(self):
        assert realize(word("")) == ()
        assert realize(word("a")) == (0,)

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_agrees_with_brute_force(self, data):
        from splitwidth.gen import random_simple_word

        seed = data.draw(st.integers(0, 10**9))
        w = random_simple_word(seed, max_len=6, m=4)
        expected = brute_force_realizable(w, 4)
        try:
            ts = realize(w)
            got = True
            assert satisfies(w, ts)
        except Unrealizable:
            got = False
        assert got == expected

    def test_realization_roundtrip(self, fig3_word):
        ts = realize(fig3_word)
        timed = [
            (fig3_word.labels[i], float(ts[i]))
            for i in range(fig3_word.n)
            if fig3_word.labels[i]
        ]
        assert check_realization(fig3_word, timed)


class TestCheckRealization:
    def test_inside_interval(self):
        w = word("ab", con(0, 1, 1, 2))
        assert check_realization(w, [("a", 0.9), ("b", 2.1)])

    def test_outside_interval(self):
        w = word("ab", con(0, 1, 1, 2))
        assert not check_realization(w, [("a", 0.0), ("b", 3.0)])

    def test_silent_position_solved(self):
        w = Stcw(("a", "", "b"), (con(1, 2, 0, 0),))
        assert check_realization(w, [("a", 0.0), ("b", 5.0)])

    def test_silent_position_infeasible(self):
        # silent point must sit at both ends at once
        w = Stcw(("a", "", "b"), (con(0, 1, 0, 0), con(1, 2, 0, 0)))
        assert not check_realization(w, [("a", 0.0), ("b", 5.0)])

    def test_label_mismatch(self):
        w = word("ab")
        with pytest.raises(LabelMismatch):
            check_realization(w, [("b", 0.0), ("a", 1.0)])

    def test_five_position_words(self):
        w = word("ababb", con(0, 3, 3, 3), con(1, 4, 2, 3))
        good = [("a", 0.9), ("b", 2.1), ("a", 2.1), ("b", 3.9), ("b", 5.0)]
        bad = [("a", 1.2), ("b", 2.1), ("a", 2.1), ("b", 3.9), ("b", 5.0)]
        assert check_realization(w, good)
        assert not check_realization(w, bad)


# ---------------------------------------------------------------------------
# blocks and endpoints
# ---------------------------------------------------------------------------

class TestBlocks:
    def test_no_holes(self):
        w = word("abc")
        assert w.blocks() == [(0, 2)]
        assert w.width == 1

    def test_one_hole_two_blocks(self):
        w = word("abcd", holes={1})
        assert w.blocks() == [(0, 1), (2, 3)]
        assert w.width == 2
        assert w.endpoints() == {0, 1, 2, 3}

    def test_atomic_pair(self):
        w = word("ab", con(0, 1, 0, 0), holes={0})
        assert w.width == 2
        assert w.endpoints() == {0, 1}


# ---------------------------------------------------------------------------
# well-timedness
# ---------------------------------------------------------------------------

def xedge(src, tgt, clock, lo=0, up=None):
    return Constraint(src, tgt, Interval(lo, up), Owner.for_clock(clock))


def sedge(src, tgt, stack=1, lo=0, up=None):
    return Constraint(src, tgt, Interval(lo, up), Owner.for_stack(stack))


class TestWellTimed:
    def test_nested_and_matched(self):
        # stack edges nested; x edges from one reset block, nested;
        # later y edge matched to the closest reset block on its left
        w = word(
            "abcdefgh",
            sedge(0, 7),
            sedge(2, 5),
            xedge(1, 6, "x"),
            xedge(3, 4, "y"),
        )
        partition = check_well_timed(w, clocks={"x", "y"}, stacks=1)
        assert partition.rounds == 1

    def test_stack_crossing(self):
        w = word("abcdef", sedge(1, 4), sedge(2, 5))
        with pytest.raises(StackCrossing):
            check_well_timed(w, stacks=1)

    def test_clock_same_block_must_nest(self):
        # sources 1,2 are one reset block; parallel targets violate nesting
        w = word("abcdef", xedge(1, 3, "x"), xedge(2, 4, "x"))
        with pytest.raises(ClockMatchViolation):
            check_well_timed(w, clocks={"x"})

    def test_clock_nested_ok(self):
        w = word("abcdef", xedge(1, 4, "x"), xedge(2, 3, "x"))
        check_well_timed(w, clocks={"x"})

    def test_clock_far_block_rejected(self):
        # two distinct reset blocks; the earlier one reaches past the later
        w = word("abcdef", xedge(0, 5, "x"), xedge(2, 4, "x"))
        with pytest.raises(ClockMatchViolation):
            check_well_timed(w, clocks={"x"})

    def test_rounds_partition(self):
        w = word(
            "abcdefgh",
            sedge(0, 2, stack=1),
            sedge(4, 6, stack=2),
        )
        partition = check_well_timed(w, stacks=2, rounds=1)
        assert partition.rounds == 1
        stacks = [c.stack for c in partition.contexts]
        assert stacks == [1, 2]

    def test_too_many_rounds(self):
        w = word(
            "abcdefgh",
            sedge(0, 1, stack=2),
            sedge(2, 3, stack=1),
            sedge(4, 5, stack=2),
            sedge(6, 7, stack=1),
        )
        with pytest.raises(TooManyRounds):
            check_well_timed(w, stacks=2, rounds=2)
        partition = check_well_timed(w, stacks=2, rounds=3)
        assert partition.rounds == 3


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

class TestJsonDot:
    def test_json_roundtrip(self, fig3_word):
        data = stcw_to_json(fig3_word)
        again = stcw_from_json(json.dumps(data))
        assert again == fig3_word

    def test_json_roundtrip_with_holes_and_owners(self):
        w = word(
            "ab..e",
            Constraint(0, 3, Interval(1, None), Owner.for_clock("x")),
            Constraint(1, 4, Interval(0, 0), ZETA),
            holes={2},
        )
        w = Stcw(("a", "b", "", "", "e"), w.constraints, w.holes)
        assert stcw_from_json(stcw_to_json(w)) == w

    def test_dot_stable(self, fig3_word):
        assert stcw_to_dot(fig3_word) == stcw_to_dot(fig3_word)
        assert "dashed" in stcw_to_dot(word("ab", holes={0}))
