"""Split-game decomposition: widths, invariants, term compilation."""

import pytest
from hypothesis import given, settings, strategies as st

from splitwidth import decompose
from splitwidth.decompose import (
    SplitTree,
    decompose_mpda,
    decompose_ta,
    decompose_tpda,
    required_width,
    split_tree_to_dot,
    split_tree_to_json,
    split_tree_to_stt,
)
from splitwidth.errors import WidthExceeded
from splitwidth.stt import eval_term
from splitwidth.systems import sem_stcw
from splitwidth.tcw import Constraint, Interval, Owner, Stcw, ZETA

import models
from conftest import word


def _clocks(w):
    return {
        c.owner.clock
        for c in w.constraints
        if c.owner.kind == "clock"
    }


class TestRequiredWidth:
    def test_ta(self):
        assert required_width("ta", 2) == 6

    def test_tpda(self):
        assert required_width("tpda", 1) == 10

    def test_mpda_formula(self):
        # one clock, two stacks, two rounds: max(4 + 2*3*2, 4*5) = 20
        assert required_width("dtmpda", 1, stacks=2, rounds=2) == 20
        # no clocks beyond the zero-delay one: max(2+2, 3*3) = 9
        assert required_width("dtmpda", 0, stacks=2, rounds=1) == 9

    def test_mpda_single_stack_delegates(self):
        assert required_width("dtmpda", 1, stacks=1, rounds=1) == 10


class TestStructure:
    def test_single_point(self):
        tree = decompose_ta(word("a"))
        assert tree.width == 1
        assert tree.root.kind == "leaf"

    def test_unary_child_width(self):
        tree = decompose_ta(sem_stcw(models.simple_ta(), [0, 1]), {"x"})
        for node in tree.nodes():
            if node.kind == "unary":
                child = node.children[0]
                assert child.width == node.width + 1
            if node.kind == "binary":
                assert node.width == sum(c.width for c in node.children)
            if node.kind == "leaf":
                label = tree.node_label(node)
                assert label.n == 1 or (
                    label.n == 2 and label.holes and label.constraints
                )

    def test_root_is_input(self):
        w = sem_stcw(models.simple_ta(), [0, 1])
        tree = decompose_ta(w, {"x"})
        assert tree.node_label(tree.root) == w


class TestWidths:
    def test_fig1_width_exactly_six(self):
        system = models.fig1_ta()
        w = sem_stcw(system, [0, 1, 2])
        tree = decompose_ta(w, {"x", "y"})
        assert tree.width == 6
        assert required_width("ta", 2) == 6

    def test_tpda_no_stack_behaves_like_ta(self):
        w = sem_stcw(models.simple_ta(), [0, 1])
        ta_tree = decompose_ta(w, {"x"})
        tpda_tree = decompose_tpda(w, {"x"})
        assert ta_tree.width == tpda_tree.width

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**9))
    def test_ta_bound(self, seed):
        from splitwidth.gen import random_accepting_run, random_system

        system = random_system(seed, kind="ta", n_clocks=2)
        run = random_accepting_run(system, seed + 1, max_len=10)
        if run is None:
            return
        w = sem_stcw(system, run)
        tree = decompose_ta(w, set(system.clocks))
        assert tree.width <= required_width("ta", len(system.clocks))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**9))
    def test_tpda_bound(self, seed):
        from splitwidth.gen import random_accepting_run, random_system

        system = random_system(seed, kind="tpda", n_clocks=1, stacks=1)
        run = random_accepting_run(system, seed + 1, max_len=10)
        if run is None:
            return
        w = sem_stcw(system, run)
        tree = decompose_tpda(w, set(system.clocks))
        assert tree.width <= required_width("tpda", len(system.clocks))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**9))
    def test_mpda_bound(self, seed):
        from splitwidth.gen import random_accepting_run, random_system

        system = random_system(
            seed, kind="dtmpda", n_clocks=1, stacks=2, rounds=2
        )
        run = random_accepting_run(system, seed + 1, max_len=10)
        if run is None:
            return
        w = sem_stcw(system, run)
        tree = decompose_mpda(w, 2, 2, set(system.clocks))
        assert tree.width <= required_width("dtmpda", 1, stacks=2, rounds=2)


class TestInvariants:
    def test_tpda_components_reset_shape(self):
        """During the single-stack game every non-root component keeps at
        most one reset hole per clock and at most one leading all-reset
        block per clock."""
        system = models.tpda_pop_age_unsat()
        w = sem_stcw(system, [0, 1, 2, 3], require_accepting=True)
        tree = decompose_tpda(w, set())
        clock_srcs = {}
        for c in w.constraints:
            key = c.owner.clock_key()
            if key:
                clock_srcs.setdefault(key, set()).add(c.src)
        for node in tree.nodes():
            posset = set(node.positions)
            for key, srcs in clock_srcs.items():
                holes = 0
                for a, b in zip(node.positions, node.positions[1:]):
                    if (a, b) in node.edges:
                        continue
                    gap = set(range(a + 1, b)) | {a, b}
                    if a in srcs and (a + 1 in srcs or a + 1 not in posset):
                        holes += 1
                assert holes <= 2  # one persistent hole plus one in flight


class TestCompile:
    def roundtrip(self, w, kind="ta", stacks=0, rounds=1):
        clocks = _clocks(w)
        if kind == "ta":
            tree = decompose_ta(w, clocks)
        elif kind == "tpda":
            tree = decompose_tpda(w, clocks)
        else:
            tree = decompose_mpda(w, stacks, rounds, clocks)
        k = max(tree.width, 1)
        term = split_tree_to_stt(tree, k)
        graph = eval_term(term)
        again = graph.as_stcw()
        assert again == w
        # exactly the endpoints of the root are colored
        chi = set(graph.chi_map().values())
        _, order = graph.linearize()
        expected = {order[0], order[-1]} if w.n else set()
        assert chi == expected
        return term

    def test_atomic_pair_leaf(self):
        w = word("ab", Constraint(0, 1, Interval(1, 2), ZETA), holes={0})
        # a bare constraint pair compiles to a constraint over two atoms
        tree = SplitTree(w, decompose.SplitNode((0, 1), frozenset(), "leaf"))
        term = split_tree_to_stt(tree, 2)
        assert eval_term(term).constraints
        assert "add_con" in __import__(
            "splitwidth.stt", fromlist=["serialize_term"]
        ).serialize_term(term)

    def test_simple_ta_roundtrip(self):
        self.roundtrip(sem_stcw(models.simple_ta(), [0, 1]))

    def test_fig1_roundtrip(self):
        self.roundtrip(sem_stcw(models.fig1_ta(), [0, 1, 2]))

    def test_tpda_roundtrip(self):
        self.roundtrip(sem_stcw(models.tpda_pop_age(), [0, 1]), kind="tpda")

    def test_mpda_roundtrip(self):
        self.roundtrip(
            sem_stcw(models.mpda_cross(), [0, 1, 2, 3]),
            kind="dtmpda", stacks=2, rounds=2,
        )

    def test_width_budget_enforced(self):
        w = sem_stcw(models.fig1_ta(), [0, 1, 2])
        tree = decompose_ta(w, {"x", "y"})
        with pytest.raises(WidthExceeded):
            split_tree_to_stt(tree, tree.width - 1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**9))
    def test_random_roundtrips(self, seed):
        from splitwidth.gen import random_system_word

        w = random_system_word(seed, kind="ta", n_clocks=2)
        if w is None:
            return
        self.roundtrip(w)


class TestExports:
    def test_json_and_dot(self):
        w = sem_stcw(models.simple_ta(), [0, 1])
        tree = decompose_ta(w, {"x"})
        data = split_tree_to_json(tree)
        assert data["tree"]["kind"] in ("unary", "binary")
        dot = split_tree_to_dot(tree)
        assert dot == split_tree_to_dot(tree)
        assert dot.startswith("digraph")
