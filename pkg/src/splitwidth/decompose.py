"""Split-game decomposition of well-timed words into bounded-width trees.

The decomposer plays the two-player split game deterministically: it
always processes the rightmost point of the current connected component,
detaching an internal point, a clock constraint (with its reset hole),
or a push-pop edge (cutting just before the push and detaching the
crossing reset prefixes).  Multistack words are first cut at round
context boundaries.  The resulting tree is compiled into a special tree
term whose evaluation reproduces the word, coloring exactly the block
endpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .errors import ModelError, WidthExceeded
from .stt import (
    Atom,
    AddConstraint,
    AddSucc,
    Combine,
    Forget,
    Rename,
    SttTerm,
)
from .tcw import Constraint, Stcw, check_well_timed, is_simple, stcw_to_json


# ---------------------------------------------------------------------------
# Split trees
# ---------------------------------------------------------------------------

@dataclass
class SplitNode:
    """One game position: a subset of the word with surviving edges."""

    positions: tuple
    edges: frozenset
    kind: str = "leaf"  # leaf | unary | binary
    cut: Optional[tuple] = None  # removed edge, for unary nodes
    children: list = field(default_factory=list)

    def blocks(self) -> list:
        out = []
        start = None
        prev = None
        for p in self.positions:
            if start is None:
                start = prev = p
                continue
            if (prev, p) in self.edges:
                prev = p
            else:
                out.append((start, prev))
                start = prev = p
        if start is not None:
            out.append((start, prev))
        return out

    @property
    def width(self) -> int:
        return len(self.blocks())

    def endpoints(self) -> list:
        out = []
        for left, right in self.blocks():
            out.append(left)
            if right != left:
                out.append(right)
        return out


@dataclass
class SplitTree:
    word: Stcw
    root: SplitNode

    def nodes(self) -> Iterator[SplitNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @property
    def width(self) -> int:
        return max(node.width for node in self.nodes())

    def node_label(self, node: SplitNode) -> Stcw:
        """The node's split word with positions renumbered densely."""
        index = {p: i for i, p in enumerate(node.positions)}
        holes = frozenset(
            index[a]
            for a, b in zip(node.positions, node.positions[1:])
            if (a, b) not in self.word_edges(node)
        )
        cons = tuple(
            Constraint(index[c.src], index[c.tgt], c.interval, c.owner)
            for c in self.word.constraints
            if c.src in index and c.tgt in index
        )
        return Stcw(
            tuple(self.word.labels[p] for p in node.positions), cons, holes
        )

    def word_edges(self, node: SplitNode) -> frozenset:
        return node.edges


# ---------------------------------------------------------------------------
# Game machinery
# ---------------------------------------------------------------------------

def _constraints_within(word: Stcw, posset: set) -> list:
    return [c for c in word.constraints if c.src in posset and c.tgt in posset]


def _components(word: Stcw, positions: tuple, edges: frozenset) -> list:
    posset = set(positions)
    neigh: dict = {p: [] for p in positions}
    for a, b in edges:
        neigh[a].append(b)
        neigh[b].append(a)
    for c in _constraints_within(word, posset):
        neigh[c.src].append(c.tgt)
        neigh[c.tgt].append(c.src)
    seen: set = set()
    comps = []
    for p in positions:
        if p in seen:
            continue
        comp = {p}
        stack = [p]
        seen.add(p)
        while stack:
            cur = stack.pop()
            for q in neigh[cur]:
                if q not in seen:
                    seen.add(q)
                    comp.add(q)
                    stack.append(q)
        comps.append(tuple(sorted(comp)))
    comps.sort(key=lambda c: c[0])
    return comps


def _is_atomic(word: Stcw, positions: tuple, edges: frozenset) -> bool:
    if len(positions) == 1:
        return True
    if len(positions) == 2 and not edges:
        u, v = positions
        return any(
            c.src == u and c.tgt == v for c in word.constraints
        )
    return False


def _constraint_into(word: Stcw, posset: set, target: int) -> Optional[Constraint]:
    for c in word.constraints:
        if c.tgt == target and c.src in posset:
            return c
    return None


def _present(edges: frozenset, a: int, b: int) -> bool:
    return (a, b) in edges


def _reset_block_of(word: Stcw, positions: tuple, clock_key: str, src: int) -> list:
    """Maximal consecutive-in-component run of sources of this clock
    containing ``src``."""
    posset = set(positions)
    sources = sorted(
        c.src
        for c in word.constraints
        if c.owner.clock_key() == clock_key and c.src in posset
    )
    index = {p: i for i, p in enumerate(positions)}
    runs: list = []
    cur: list = []
    for p in sources:
        if cur and index[p] == index[cur[-1]] + 1:
            cur.append(p)
        else:
            if cur:
                runs.append(cur)
            cur = [p]
    if cur:
        runs.append(cur)
    for run in runs:
        if src in run:
            return run
    raise AssertionError("source not in any reset block")


def _ta_tpda_cuts(word: Stcw, positions: tuple, edges: frozenset) -> list:
    """Eve's move for a connected, non-atomic single-stack component."""
    j = positions[-1]
    con = _constraint_into(word, set(positions), j)
    if con is None:
        return [(j - 1, j)]
    i = con.src
    if con.owner.kind == "stack":
        if i == positions[0] or not _present(edges, i - 1, i):
            cuts = [(i, i + 1), (j - 1, j)]
            return [c for c in cuts if c in edges]
        cuts = [(i - 1, i)]
        posset = set(positions)
        crossing_clocks: dict = {}
        for c in _constraints_within(word, posset):
            key = c.owner.clock_key()
            if key is not None and c.src < i <= c.tgt:
                crossing_clocks.setdefault(key, []).append(c.src)
        for key in sorted(crossing_clocks):
            block = _reset_block_of(word, positions, key, min(crossing_clocks[key]))
            last = max(s for s in block if s in crossing_clocks[key] or s <= max(crossing_clocks[key]))
            first = block[0]
            last = max(crossing_clocks[key])
            cuts.append((first - 1, first))
            cuts.append((last, last + 1))
        cuts = [c for c in dict.fromkeys(cuts) if c in edges]
        return sorted(cuts)
    cuts = [(i - 1, i), (i, i + 1), (j - 1, j)]
    return [c for c in cuts if c in edges]


def _round_boundary_cuts(word: Stcw, positions: tuple, edges: frozenset) -> list:
    """Phase-one cuts for a multistack component: separate round
    contexts, then detach reset prefixes crossing context boundaries."""
    posset = set(positions)
    stack_at: dict = {}
    for c in _constraints_within(word, posset):
        if c.owner.kind == "stack":
            stack_at[c.src] = c.owner.stack
            stack_at[c.tgt] = c.owner.stack
    # contexts along the component
    contexts = []  # (start_pos, end_pos, stack)
    cur_stack = None
    start = None
    prev = None
    for p in positions:
        s = stack_at.get(p)
        if start is None:
            start, prev, cur_stack = p, p, s
            continue
        if s is not None and cur_stack is not None and s != cur_stack:
            contexts.append((start, prev, cur_stack))
            start, cur_stack = p, s
        elif s is not None and cur_stack is None:
            cur_stack = s
        prev = p
    contexts.append((start, prev, cur_stack))
    cuts = []
    for (_, end, _), (nxt_start, _, _) in zip(contexts, contexts[1:]):
        cuts.append((nxt_start - 1, nxt_start))
    # crossing reset prefixes per later context and clock
    for ctx_start, ctx_end, _ in contexts[1:]:
        incoming: dict = {}
        for c in _constraints_within(word, posset):
            key = c.owner.clock_key()
            if key is None:
                continue
            if ctx_start <= c.tgt <= ctx_end and c.src < ctx_start:
                incoming.setdefault(key, []).append(c.src)
        for key in sorted(incoming):
            first, last = min(incoming[key]), max(incoming[key])
            cuts.append((first - 1, first))
            cuts.append((last, last + 1))
    cuts = [c for c in dict.fromkeys(cuts) if c in edges]
    return sorted(cuts)


def _strategy(word: Stcw, positions: tuple, edges: frozenset) -> list:
    posset = set(positions)
    stacks_used = {
        c.owner.stack
        for c in _constraints_within(word, posset)
        if c.owner.kind == "stack"
    }
    if len(stacks_used) > 1:
        cuts = _round_boundary_cuts(word, positions, edges)
        if cuts:
            return cuts
    return _ta_tpda_cuts(word, positions, edges)


def _build(word: Stcw, positions: tuple, edges: frozenset) -> SplitNode:
    if _is_atomic(word, positions, edges):
        return SplitNode(positions, edges, "leaf")
    cuts = _strategy(word, positions, edges)
    if not cuts:
        raise ModelError(
            f"strategy stuck on component {positions}"
        )
    top = None
    attach = None
    cur_edges = edges
    for cut in cuts:
        if cut not in cur_edges:
            continue
        nxt_edges = cur_edges - {cut}
        node = SplitNode(positions, cur_edges, "unary", cut=cut)
        if top is None:
            top = node
        else:
            attach.children.append(node)
        attach = node
        cur_edges = nxt_edges
        comps = _components(word, positions, cur_edges)
        if len(comps) > 1:
            child = _binary_chain(word, comps, cur_edges)
            attach.children.append(child)
            return top
    # still connected after all cuts: continue the game on the same set
    attach.children.append(_build(word, positions, cur_edges))
    return top


def _binary_chain(word: Stcw, comps: list, edges: frozenset) -> SplitNode:
    def edges_of(comp):
        cs = set(comp)
        return frozenset(e for e in edges if e[0] in cs and e[1] in cs)

    if len(comps) == 1:
        return _build(word, comps[0], edges_of(comps[0]))
    head, rest = comps[0], comps[1:]
    all_pos = tuple(sorted(p for c in comps for p in c))
    node = SplitNode(
        all_pos,
        frozenset(e for e in edges if e[0] in set(all_pos) and e[1] in set(all_pos)),
        "binary",
    )
    node.children.append(_build(word, head, edges_of(head)))
    node.children.append(_binary_chain(word, rest, edges))
    return node


def _all_edges(word: Stcw) -> frozenset:
    return frozenset((i, i + 1) for i in range(word.n - 1))


def _decompose(word: Stcw) -> SplitTree:
    if not is_simple(word):
        raise ModelError("decomposition needs a simple word")
    positions = tuple(range(word.n))
    root = _build(word, positions, _all_edges(word))
    return SplitTree(word, root)


def decompose_ta(word: Stcw, clocks=()) -> SplitTree:
    """Decompose a word without stack edges; clock and zero-delay edges
    only.  Raises the well-timedness violation if there is one."""
    check_well_timed(word, clocks=clocks, stacks=0)
    return _decompose(word)


def decompose_tpda(word: Stcw, clocks=()) -> SplitTree:
    check_well_timed(word, clocks=clocks, stacks=1)
    return _decompose(word)


def decompose_mpda(word: Stcw, stacks: int, rounds: int, clocks=()) -> SplitTree:
    check_well_timed(word, clocks=clocks, stacks=stacks, rounds=rounds)
    return _decompose(word)


def required_width(kind: str, clock_count: int, stacks: int = 0,
                   rounds: int = 1) -> int:
    """Sufficient split-width bound per model class."""
    if kind == "ta":
        return clock_count + 4
    if kind == "tpda":
        return 4 * clock_count + 6
    if kind == "dtmpda":
        if stacks <= 1:
            return 4 * clock_count + 6
        y = clock_count + 1
        k, n = rounds, stacks
        return max(k * n + 2 * (k * n - 1) * y, (k + 2) * (2 * y + 1))
    raise ModelError(f"unknown system kind {kind!r}")


# ---------------------------------------------------------------------------
# Compiling split-trees to terms
# ---------------------------------------------------------------------------

def split_tree_to_stt(tree: SplitTree, k: int) -> SttTerm:
    """Compile a split-tree of width at most k into a term over 2k colors.

    Colors are kept packed: at every subterm the live colors are exactly
    1..r, listed in position order, so the result is monotonic and its
    evaluation colors exactly the endpoints of the root label.
    """
    if tree.width > k:
        raise WidthExceeded(f"width {tree.width} exceeds budget {k}")
    word = tree.word
    term, eps = _compile(word, tree.root, 2 * k)
    return term


def _repack(term: SttTerm, live: list) -> SttTerm:
    """Rename the live colors (ascending) down to 1..r."""
    for target, cur in enumerate(sorted(live), start=1):
        if cur != target:
            term = Rename(cur, target, term)
    return term


def _retarget(term: SttTerm, targets: list) -> SttTerm:
    """Move packed colors 1..r onto the ascending target slots."""
    for idx in range(len(targets) - 1, -1, -1):
        cur, tgt = idx + 1, targets[idx]
        if cur != tgt:
            term = Rename(cur, tgt, term)
    return term


def _compile(word: Stcw, node: SplitNode, budget: int):
    eps = node.endpoints()
    if len(eps) > budget:
        raise WidthExceeded(
            f"{len(eps)} endpoints exceed the color budget {budget}"
        )
    if node.kind == "leaf":
        if len(node.positions) == 1:
            p = node.positions[0]
            return Atom(1, word.labels[p]), [p]
        u, v = node.positions
        con = next(
            c for c in word.constraints if c.src == u and c.tgt == v
        )
        pair = Combine(Atom(1, word.labels[u]), Atom(2, word.labels[v]))
        return AddConstraint(1, 2, con.interval, con.owner, pair), [u, v]

    if node.kind == "unary":
        child = node.children[0]
        term, child_eps = _compile(word, child, budget)
        a, b = node.cut
        ia = child_eps.index(a) + 1
        ib = child_eps.index(b) + 1
        assert ib == ia + 1, "cut endpoints must be adjacent colors"
        term = AddSucc(ia, ib, term)
        keep = set(eps)
        live = list(range(1, len(child_eps) + 1))
        for color, pos in ((ia, a), (ib, b)):
            if pos not in keep:
                term = Forget(color, term)
                live.remove(color)
        term = _repack(term, live)
        new_eps = [p for p in child_eps if p in keep]
        assert new_eps == eps, (new_eps, eps)
        return term, eps

    # binary: children are disjoint; interleave their endpoint colors
    left_node, right_node = node.children
    t1, eps1 = _compile(word, left_node, budget)
    t2, eps2 = _compile(word, right_node, budget)
    merged = sorted(eps1 + eps2)
    targets1 = [merged.index(p) + 1 for p in eps1]
    targets2 = [merged.index(p) + 1 for p in eps2]
    return Combine(_retarget(t1, targets1), _retarget(t2, targets2)), merged


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def split_tree_to_json(tree: SplitTree) -> dict:
    def walk(node: SplitNode) -> dict:
        return {
            "kind": node.kind,
            "cut": list(node.cut) if node.cut else None,
            "label": stcw_to_json(tree.node_label(node)),
            "children": [walk(c) for c in node.children],
        }

    return {"word": stcw_to_json(tree.word), "tree": walk(tree.root)}


def split_tree_to_dot(tree: SplitTree) -> str:
    lines = ["digraph splittree {", "  node [shape=box fontsize=9];"]
    counter = [0]

    def describe(node: SplitNode) -> str:
        label = tree.node_label(node)
        parts = []
        for left, right in node.blocks():
            parts.append("".join(
                (tree.word.labels[p] or ".") for p in range(left, right + 1)
            ))
        text = " | ".join(parts)
        return f"{node.kind[:1]}:{text}"

    def walk(node: SplitNode) -> int:
        my = counter[0]
        counter[0] += 1
        lines.append(f'  n{my} [label="{describe(node)}"];')
        for child in node.children:
            cid = walk(child)
            lines.append(f"  n{my} -> n{cid};")
        return my

    walk(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"
