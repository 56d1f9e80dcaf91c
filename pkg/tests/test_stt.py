"""Term algebra: evaluation, monotonicity, the bounded grammar, text."""

import pytest
from hypothesis import given, settings, strategies as st

from splitwidth.errors import ColorClash, ModelError, TermSyntaxError
from splitwidth.stt import (
    Atom,
    AddConstraint,
    AddSucc,
    Combine,
    Forget,
    Rename,
    eval_term,
    is_km_stt,
    is_monotonic,
    leaf_count,
    parse_term,
    serialize_term,
    term_from_json,
    term_to_json,
)
from splitwidth.tcw import Interval, Owner, UNTAGGED, ZETA

from conftest import con, word


def pair(i, a, j, b, lo, up):
    return AddConstraint(
        i, j, Interval(lo, up), UNTAGGED, Combine(Atom(i, a), Atom(j, b))
    )


def paper_term():
    """The worked four-color example: crossing constraint pairs glued
    into the word a b c d, leaving only the outer endpoints colored."""
    p1 = pair(1, "a", 2, "c", 2, None)
    p2 = pair(3, "b", 4, "d", 1, 3)
    t = Combine(p1, p2)
    t = AddSucc(3, 2, t)      # b -> c
    t = AddSucc(2, 4, t)      # c -> d
    t = Forget(2, t)
    t = AddSucc(1, 3, t)      # a -> b
    t = Forget(3, t)
    return t


def paper_term_sugared():
    """Same term with the second pair built on colors 1,2 and renamed."""
    p1 = pair(1, "a", 2, "c", 2, None)
    p2 = Rename(1, 3, Rename(2, 4, pair(1, "b", 2, "d", 1, 3)))
    t = Combine(p1, p2)
    t = AddSucc(3, 2, t)
    t = AddSucc(2, 4, t)
    t = Forget(2, t)
    t = AddSucc(1, 3, t)
    t = Forget(3, t)
    return t


def monotone_fig3_term():
    """A recolored variant whose color order matches the word order."""
    p1 = AddConstraint(
        1, 3, Interval(2, None), UNTAGGED, Combine(Atom(1, "a"), Atom(3, "c"))
    )
    p2 = AddConstraint(
        2, 4, Interval(1, 3), UNTAGGED, Combine(Atom(2, "b"), Atom(4, "d"))
    )
    t = Combine(p1, p2)
    t = AddSucc(1, 2, t)
    t = AddSucc(2, 3, t)
    t = AddSucc(3, 4, t)
    t = Forget(3, Forget(2, t))
    return t


class TestEval:
    def test_paper_term(self, fig3_word):
        for term in (paper_term(), paper_term_sugared()):
            graph = eval_term(term)
            assert graph.as_stcw() == fig3_word
            w, order = graph.linearize()
            chi = graph.chi_map()
            assert set(chi) == {1, 4}
            assert graph.labels[chi[1]] == "a"
            assert graph.labels[chi[4]] == "d"

    def test_monotone_variant_same_word(self, fig3_word):
        assert eval_term(monotone_fig3_term()).as_stcw() == fig3_word

    def test_atom(self):
        graph = eval_term(Atom(1, "a"))
        assert graph.labels == ("a",)
        assert graph.chi_map() == {1: 0}

    def test_color_clash(self):
        with pytest.raises(ColorClash):
            eval_term(Combine(Atom(1, "a"), Atom(1, "b")))

    def test_dead_color_edge_is_noop(self):
        t = AddSucc(1, 7, Atom(1, "a"))
        assert eval_term(t).succ == frozenset()


class TestMonotonic:
    def test_paper_term_is_not_monotonic(self):
        # in the combined state the color order is a,c,b,d while the
        # successor additions build a,b,c,d: 2 is not next of 3
        assert not is_monotonic(paper_term())

    def test_monotone_variant(self):
        assert is_monotonic(monotone_fig3_term())

    def test_succ_to_smaller_color(self):
        t = AddSucc(2, 1, Combine(Atom(1, "a"), Atom(2, "b")))
        assert not is_monotonic(t)

    def test_rename_between_neighbors(self):
        base = Combine(Atom(1, "a"), Atom(3, "b"))
        assert is_monotonic(Rename(1, 2, base))
        assert not is_monotonic(Rename(1, 5, base))  # 5 > next(1) = 3

    def test_constraint_forward_only(self):
        t = AddConstraint(
            2, 1, Interval(0, 1), UNTAGGED, Combine(Atom(1, "a"), Atom(2, "b"))
        )
        assert not is_monotonic(t)


class TestKmGrammar:
    def test_paper_term_budget(self):
        assert is_km_stt(paper_term(), 2, 4)
        assert not is_km_stt(paper_term(), 1, 4)

    def test_constraint_above_non_atomic(self):
        inner = AddSucc(1, 2, Combine(Atom(1, "a"), Atom(2, "b")))
        t = AddConstraint(1, 2, Interval(0, 1), UNTAGGED, inner)
        assert not is_km_stt(t, 2, 4)

    def test_interval_bound(self):
        assert not is_km_stt(pair(1, "a", 2, "b", 0, 9), 2, 4)
        assert is_km_stt(pair(1, "a", 2, "b", 0, None), 2, 4)

    def test_dead_color_rejected(self):
        assert not is_km_stt(AddSucc(1, 7, Atom(1, "a")), 4, 4)
        assert not is_km_stt(Forget(2, Atom(1, "a")), 4, 4)


class TestText:
    def test_atom_format(self):
        assert serialize_term(Atom(1, "a")) == "(1,a)"
        assert serialize_term(Atom(2, "")) == "(2,eps)"

    def test_paper_term_roundtrip(self):
        text = serialize_term(paper_term())
        assert text.startswith("forget_3(add_succ_1_3(forget_2(")
        assert parse_term(text) == paper_term()

    def test_owner_formats(self):
        for owner in (ZETA, UNTAGGED, Owner.for_clock("x"), Owner.for_stack(2)):
            t = AddConstraint(
                1, 2, Interval(0, None), owner,
                Combine(Atom(1, "a"), Atom(2, "b")),
            )
            assert parse_term(serialize_term(t)) == t

    def test_syntax_error_position(self):
        with pytest.raises(TermSyntaxError) as err:
            parse_term("(1,")
        assert err.value.pos == 0
        with pytest.raises(TermSyntaxError):
            parse_term("plus((1,a),(1,b)")

    def test_json_roundtrip(self):
        for t in (paper_term(), monotone_fig3_term(), Atom(1, "")):
            assert term_from_json(term_to_json(t)) == t


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_random_term_roundtrips(data):
    from splitwidth.gen import random_monotone_term

    seed = data.draw(st.integers(0, 10**9))
    t = random_monotone_term(seed, k=3, m=4)
    if t is None:
        return
    assert parse_term(serialize_term(t)) == t
    assert term_from_json(term_to_json(t)) == t
    assert is_monotonic(t)
    assert is_km_stt(t, 3, 4)
    assert leaf_count(t) >= 1
