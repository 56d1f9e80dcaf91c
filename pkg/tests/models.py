"""Hand-built systems shared by the test suite."""

from splitwidth.systems import (
    Nop,
    Pop,
    Push,
    TimedSystem,
    Transition,
)
from splitwidth.tcw import Interval


def ta(states, initial, finals, clocks, transitions, alphabet=("a", "b", "c")):
    return TimedSystem(
        kind="ta",
        states=tuple(states),
        initial=initial,
        finals=frozenset(finals),
        clocks=tuple(clocks),
        stacks=0,
        rounds=None,
        alphabet=tuple(alphabet),
        stack_alphabet=(),
        transitions=tuple(transitions),
    )


def tpda(states, initial, finals, clocks, transitions,
         alphabet=("a", "b", "c"), stack_alphabet=("A", "B")):
    return TimedSystem(
        kind="tpda",
        states=tuple(states),
        initial=initial,
        finals=frozenset(finals),
        clocks=tuple(clocks),
        stacks=1,
        rounds=None,
        alphabet=tuple(alphabet),
        stack_alphabet=tuple(stack_alphabet),
        transitions=tuple(transitions),
    )


def dtmpda(states, initial, finals, clocks, transitions, stacks, rounds,
           alphabet=("a", "b", "c"), stack_alphabet=("A", "B")):
    return TimedSystem(
        kind="dtmpda",
        states=tuple(states),
        initial=initial,
        finals=frozenset(finals),
        clocks=tuple(clocks),
        stacks=stacks,
        rounds=rounds,
        alphabet=tuple(alphabet),
        stack_alphabet=tuple(stack_alphabet),
        transitions=tuple(transitions),
    )


def simple_ta():
    """Reset x on a, then check it on b."""
    return ta(
        ["s0", "s1", "s2"], "s0", ["s2"], ["x"],
        [
            Transition("s0", "s1", "a", (), ("x",)),
            Transition("s1", "s2", "b", (("x", Interval(1, 2)),), ()),
        ],
    )


def contradictory_ta():
    """The only path to the final state checks x in [1,1] and [2,2]."""
    return ta(
        ["s0", "s1"], "s0", ["s1"], ["x"],
        [
            Transition(
                "s0", "s1", "a",
                (("x", Interval(1, 1)), ("x", Interval(2, 2))), ()
            ),
        ],
    )


def fig1_ta():
    """A two-clock automaton in the style of the running example: the
    run resets x, checks x and y together, then checks x once more, so
    the word interleaves both clocks' constraint edges across
    transitions and its decomposition peaks at exactly 6 blocks."""
    return ta(
        ["s0", "s1", "s2", "s3"], "s0", ["s3"], ["x", "y"],
        [
            Transition("s0", "s1", "a", (), ("x",)),
            Transition("s1", "s2", "b", (("x", Interval(1, 1)),
                                         ("y", Interval(0, 1))), ()),
            Transition("s2", "s3", "c", (("x", Interval(1, 1)),), ()),
        ],
    )


def tpda_pop_age():
    """Push, wait one time unit, pop with matching age."""
    return tpda(
        ["s0", "s1", "s2"], "s0", ["s2"], [],
        [
            Transition("s0", "s1", "a", (), (), Push(1, "A")),
            Transition("s1", "s2", "b", (), (), Pop(1, "A", Interval(1, 1))),
        ],
    )


def tpda_pop_age_unsat():
    """Nested pushes whose pop ages contradict the word order: the inner
    symbol must age two units while the outer may age at most one."""
    return tpda(
        ["s0", "s1", "s2", "s3", "s4"], "s0", ["s4"], [],
        [
            Transition("s0", "s1", "a", (), (), Push(1, "A")),
            Transition("s1", "s2", "a", (), (), Push(1, "B")),
            Transition("s2", "s3", "b", (), (), Pop(1, "B", Interval(2, 2))),
            Transition("s3", "s4", "b", (), (), Pop(1, "A", Interval(0, 1))),
        ],
    )


def mpda_cross():
    """Two stacks whose edges cross: push 1, push 2, pop 1, pop 2.
    Popping stack 1 after touching stack 2 starts a second round."""
    return dtmpda(
        ["s0", "s1", "s2", "s3", "s4"], "s0", ["s4"], [],
        [
            Transition("s0", "s1", "a", (), (), Push(1, "A")),
            Transition("s1", "s2", "a", (), (), Push(2, "B")),
            Transition("s2", "s3", "b", (), (), Pop(1, "A", Interval(0, 1))),
            Transition("s3", "s4", "b", (), (), Pop(2, "B", Interval(0, 1))),
        ],
        stacks=2, rounds=2,
    )


def mpda_one_round():
    """Both stacks used within a single round (nested, no crossing)."""
    return dtmpda(
        ["s0", "s1", "s2", "s3", "s4"], "s0", ["s4"], [],
        [
            Transition("s0", "s1", "a", (), (), Push(1, "A")),
            Transition("s1", "s2", "b", (), (), Pop(1, "A", Interval(0, 1))),
            Transition("s2", "s3", "a", (), (), Push(2, "B")),
            Transition("s3", "s4", "b", (), (), Pop(2, "B", Interval(1, 1))),
        ],
        stacks=2, rounds=1,
    )


def mpda_needs_two_rounds():
    """Crossing stacks as in mpda_cross but with the round budget 1, so
    the language is empty."""
    base = mpda_cross()
    return dtmpda(
        base.states, base.initial, base.finals, base.clocks,
        base.transitions, stacks=2, rounds=1,
    )
