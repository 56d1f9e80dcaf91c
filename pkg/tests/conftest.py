import pytest

from splitwidth.tcw import Constraint, Interval, Owner, Stcw, UNTAGGED, ZETA


def iv(lo, up="x"):
    return Interval(lo, None if up == "inf" else (lo if up == "x" else up))


def con(src, tgt, lo, up=None, owner=UNTAGGED):
    return Constraint(src, tgt, Interval(lo, up), owner)


def word(labels, *constraints, holes=()):
    return Stcw(tuple(labels), tuple(constraints), frozenset(holes))


@pytest.fixture
def fig3_word():
    # a -> b -> c -> d with (a,c) in [2,inf) and (b,d) in [1,3]
    return word("abcd", con(0, 2, 2, None), con(1, 3, 1, 3))


@pytest.fixture
def contradiction_word():
    # a -> b -> c with (a,c)=[2,2], (b,c)=[0,0], (a,b)=[0,1]
    return word("abc", con(0, 2, 2, 2), con(1, 2, 0, 0), con(0, 1, 0, 1))
