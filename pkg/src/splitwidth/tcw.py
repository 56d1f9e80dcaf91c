"""Words with timing constraints.

A word with timing constraints is a finite sequence of labeled positions
connected by successor edges, with additional forward "matching" edges
that constrain the time elapsed between two positions to a closed
interval.  A *split* word additionally marks some successor edges as
absent (holes), which partitions the positions into blocks.

This module holds the data model, structural validation, the
difference-constraint realizability solver with negative-cycle
explanations, an independent brute-force realizability oracle used by
the test suite, and the well-timedness checks that characterize words
generated by timed systems.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    BackwardConstraint,
    ClockMatchViolation,
    LabelMismatch,
    ModelError,
    NotLinear,
    StackCrossing,
    TooManyRounds,
    Unrealizable,
)

EPSILON = ""


# ---------------------------------------------------------------------------
# Intervals and constraint owners
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Interval:
    """A closed interval [lo, up]; ``up is None`` means unbounded."""

    lo: int
    up: Optional[int] = None

    def __post_init__(self):
        if self.lo < 0:
            raise ModelError(f"interval lower bound {self.lo} is negative")
        if self.up is not None and self.up < self.lo:
            raise ModelError(f"empty interval [{self.lo},{self.up}]")

    @classmethod
    def zero(cls) -> "Interval":
        return cls(0, 0)

    @property
    def unbounded(self) -> bool:
        return self.up is None

    def contains(self, value) -> bool:
        if value < self.lo:
            return False
        return self.up is None or value <= self.up

    def fits_bound(self, m: int) -> bool:
        """True iff the interval belongs to the guard alphabet for modulus m."""
        return self.lo < m and (self.up is None or self.up < m)

    def __str__(self) -> str:
        return f"[{self.lo},{'inf' if self.up is None else self.up}]"


@dataclass(frozen=True, order=True)
class Owner:
    """Who a constraint edge belongs to: a clock, the auxiliary clock
    enforcing zero-delay inside one transition, a stack, or untagged."""

    kind: str  # "clock" | "zeta" | "stack" | "untagged"
    clock: Optional[str] = None
    stack: Optional[int] = None

    @classmethod
    def for_clock(cls, name: str) -> "Owner":
        return cls("clock", clock=name)

    @classmethod
    def for_stack(cls, index: int) -> "Owner":
        return cls("stack", stack=index)

    def clock_key(self) -> Optional[str]:
        """Grouping key treating the zero-delay owner as a clock."""
        if self.kind == "clock":
            return self.clock
        if self.kind == "zeta":
            return ZETA_NAME
        return None

    def __str__(self) -> str:
        if self.kind == "clock":
            return f"clock:{self.clock}"
        if self.kind == "stack":
            return f"stack:{self.stack}"
        return self.kind


ZETA = Owner("zeta")
UNTAGGED = Owner("untagged")
ZETA_NAME = "__zeta__"


@dataclass(frozen=True, order=True)
class Constraint:
    src: int
    tgt: int
    interval: Interval
    owner: Owner = UNTAGGED


# ---------------------------------------------------------------------------
# The word structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stcw:
    """A (split) word with timing constraints.

    Positions are dense integers ``0..n-1`` in document order.  ``holes``
    contains indices ``i`` such that the successor edge between ``i`` and
    ``i+1`` is absent.  A word with no holes has width 1.
    """

    labels: tuple
    constraints: tuple = ()
    holes: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(
            self, "constraints", tuple(sorted(self.constraints))
        )
        object.__setattr__(self, "holes", frozenset(self.holes))
        n = len(self.labels)
        for h in self.holes:
            if not 0 <= h < n - 1:
                raise ModelError(f"hole index {h} out of range")
        for c in self.constraints:
            if not (0 <= c.src < n and 0 <= c.tgt < n):
                raise ModelError(f"constraint {c} out of range")
            if c.tgt <= c.src:
                raise BackwardConstraint(f"constraint {c.src}->{c.tgt}")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def is_split(self) -> bool:
        return bool(self.holes)

    @property
    def width(self) -> int:
        return 1 + len(self.holes)

    def blocks(self) -> list:
        """Maximal successor-connected runs, as inclusive (left, right) pairs."""
        out = []
        start = 0
        for i in range(self.n - 1):
            if i in self.holes:
                out.append((start, i))
                start = i + 1
        if self.n:
            out.append((start, self.n - 1))
        return out

    def endpoints(self) -> set:
        eps = set()
        for left, right in self.blocks():
            eps.add(left)
            eps.add(right)
        return eps

    def constraint_degree(self, pos: int) -> int:
        return sum(1 for c in self.constraints if pos in (c.src, c.tgt))

    def without_holes(self) -> "Stcw":
        return Stcw(self.labels, self.constraints)

    def max_constant(self) -> int:
        best = 0
        for c in self.constraints:
            best = max(best, c.interval.lo, c.interval.up or 0)
        return best


def blocks(w: Stcw) -> list:
    return w.blocks()


def endpoints(w: Stcw) -> set:
    return w.endpoints()


def width(w: Stcw) -> int:
    return w.width


def is_simple(w: Stcw) -> bool:
    """True iff every position touches at most one constraint edge."""
    degree = [0] * w.n
    for c in w.constraints:
        degree[c.src] += 1
        degree[c.tgt] += 1
    return all(d <= 1 for d in degree)


# ---------------------------------------------------------------------------
# Validation of raw graphs
# ---------------------------------------------------------------------------

@dataclass
class RawGraph:
    """Unvalidated position graph, mirroring the JSON schema."""

    positions: list = field(default_factory=list)  # (id, label) pairs
    succ: list = field(default_factory=list)       # (id, id) pairs
    holes: list = field(default_factory=list)      # (id, id) pairs
    constraints: list = field(default_factory=list)  # (id, id, Interval, Owner)


def _linear_order(ids: Sequence, edges: Iterable) -> list:
    """Order ids so that edges form the full successor chain, or raise."""
    ids = list(ids)
    idset = set(ids)
    if not ids:
        raise NotLinear("empty position set")
    nxt, prev = {}, {}
    for a, b in edges:
        if a not in idset or b not in idset:
            raise NotLinear(f"edge {a}->{b} mentions an unknown position")
        if a in nxt or b in prev:
            raise NotLinear(f"branching successor at {a}->{b}")
        nxt[a] = b
        prev[b] = a
    starts = [i for i in ids if i not in prev]
    if len(starts) != 1:
        raise NotLinear(f"{len(starts)} chain starts, expected 1")
    order = [starts[0]]
    seen = {starts[0]}
    while order[-1] in nxt:
        cur = nxt[order[-1]]
        if cur in seen:
            raise NotLinear(f"successor cycle through {cur}")
        order.append(cur)
        seen.add(cur)
    if len(order) != len(ids):
        raise NotLinear("successor chain does not cover all positions")
    return order


def validate_split_tcw(graph: RawGraph) -> Stcw:
    """Validate a raw graph whose succ plus holes must chain linearly."""
    ids = [p for p, _ in graph.positions]
    if len(set(ids)) != len(ids):
        raise ModelError("duplicate position ids")
    labels = {p: lab for p, lab in graph.positions}
    succ_set = {(a, b) for a, b in graph.succ}
    hole_set = {(a, b) for a, b in graph.holes}
    if succ_set & hole_set:
        raise ModelError("edge is both present and a hole")
    order = _linear_order(ids, sorted(succ_set | hole_set, key=str))
    index = {p: i for i, p in enumerate(order)}
    holes = frozenset(index[a] for a, b in hole_set)
    constraints = []
    for src, tgt, interval, owner in graph.constraints:
        si, ti = index[src], index[tgt]
        if ti <= si:
            raise BackwardConstraint(f"constraint {src}->{tgt} not forward")
        constraints.append(Constraint(si, ti, interval, owner))
    return Stcw(tuple(labels[p] for p in order), tuple(constraints), holes)


def validate_tcw(graph: RawGraph) -> Stcw:
    """Validate a raw graph into a hole-free word, or raise."""
    if graph.holes:
        raise NotLinear("word has holes; use validate_split_tcw")
    return validate_split_tcw(graph)


# ---------------------------------------------------------------------------
# Realizability: canonical solver and brute-force oracle
# ---------------------------------------------------------------------------

def _longest_paths(n: int, edges: list) -> tuple:
    """Longest paths from node 0; edges are (u, v, weight, tag).

    Returns (dist, None) or (None, cycle) when a positive cycle makes the
    system infeasible.  Bellman-Ford; everything here is integer.
    """
    NEG = None  # stands for -infinity
    dist = [NEG] * n
    dist[0] = 0
    pred = [None] * n
    for _ in range(n):
        changed = False
        for u, v, wgt, tag in edges:
            if dist[u] is not None and (dist[v] is None or dist[u] + wgt > dist[v]):
                dist[v] = dist[u] + wgt
                pred[v] = (u, tag)
                changed = True
        if not changed:
            return dist, None
    # One more pass to find a node on or reachable from a positive cycle.
    for u, v, wgt, tag in edges:
        if dist[u] is not None and dist[u] + wgt > dist[v]:
            pred[v] = (u, tag)
            # Walk predecessors n times to land inside the cycle.
            node = v
            for _ in range(n):
                node = pred[node][0]
            cycle = []
            cur = node
            while True:
                p, t = pred[cur]
                cycle.append((p, cur, t))
                cur = p
                if cur == node:
                    break
            cycle.reverse()
            return None, cycle
    return dist, None


def realize(w: Stcw):
    """Return the canonical integer timestamp map, or raise Unrealizable.

    The map is the pointwise-least non-negative solution with first
    timestamp 0, computed as longest paths in the difference-constraint
    graph.  Holes contribute ordering constraints only.
    """
    n = w.n
    if n == 0:
        return ()
    edges = []
    for i in range(n - 1):
        edges.append((i, i + 1, 0, "order"))
    for c in w.constraints:
        edges.append((c.src, c.tgt, c.interval.lo, f"lo{c.interval}"))
        if c.interval.up is not None:
            edges.append((c.tgt, c.src, -c.interval.up, f"up{c.interval}"))
    dist, cycle = _longest_paths(n, edges)
    if cycle is not None:
        raise Unrealizable(cycle)
    return tuple(dist)


def satisfies(w: Stcw, ts: Sequence) -> bool:
    """Check a timestamp map against order and all constraint edges."""
    for i in range(w.n - 1):
        if ts[i] > ts[i + 1]:
            return False
    return all(c.interval.contains(ts[c.tgt] - ts[c.src]) for c in w.constraints)


@lru_cache(maxsize=32)
def _gap_matrix(slots: int, m: int) -> np.ndarray:
    grids = np.meshgrid(*([np.arange(m + 1)] * slots), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def brute_force_realizable(w: Stcw, m: int) -> bool:
    """Realizability by exhaustive enumeration of consecutive gaps.

    Enumerates every gap vector in {0..m}^(n-1) and tests all constraints
    directly.  Capping gaps at m is lossless when every finite interval
    bound is below m, so this is an independent oracle for realize() on
    words over the guard alphabet of m.
    """
    n = w.n
    if n <= 1:
        return True
    gaps = _gap_matrix(n - 1, m)
    ts = np.concatenate(
        [np.zeros((gaps.shape[0], 1), dtype=gaps.dtype), np.cumsum(gaps, axis=1)],
        axis=1,
    )
    ok = np.ones(gaps.shape[0], dtype=bool)
    for c in w.constraints:
        span = ts[:, c.tgt] - ts[:, c.src]
        ok &= span >= c.interval.lo
        if c.interval.up is not None:
            ok &= span <= c.interval.up
        if not ok.any():
            return False
    return bool(ok.any())


def check_realization(w: Stcw, word: Sequence) -> bool:
    """Does the timed word realize w?

    The word's letters must equal w's non-silent labels in order
    (LabelMismatch otherwise).  Its times pin the non-silent positions;
    silent positions are interpolated by solving the residual difference
    constraints over the reals.
    """
    visible = [i for i in range(w.n) if w.labels[i] != EPSILON]
    if [w.labels[i] for i in visible] != [a for a, _ in word]:
        raise LabelMismatch(
            f"expected letters {[w.labels[i] for i in visible]}, "
            f"got {[a for a, _ in word]}"
        )
    fixed = {i: float(t) for i, (_, t) in zip(visible, word)}
    # Nodes 0..n-1 plus reference node n with time 0; feasibility via
    # shortest paths: an edge u->v with weight c encodes t_v - t_u <= c.
    n = w.n
    edges = []
    for i in range(n - 1):
        edges.append((i + 1, i, 0.0))
    for c in w.constraints:
        edges.append((c.tgt, c.src, -float(c.interval.lo)))
        if c.interval.up is not None:
            edges.append((c.src, c.tgt, float(c.interval.up)))
    for i in range(n):
        edges.append((i, n, 0.0))  # every time is non-negative
    for i, t in fixed.items():
        edges.append((n, i, t))
        edges.append((i, n, -t))
        if t < 0:
            return False
    dist = [0.0] * (n + 1)
    for _ in range(n + 1):
        changed = False
        for u, v, wgt in edges:
            if dist[u] + wgt < dist[v] - 1e-9:
                dist[v] = dist[u] + wgt
                changed = True
        if not changed:
            return True
    return False


# ---------------------------------------------------------------------------
# Well-timedness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundContext:
    round_no: int
    stack: int
    positions: tuple


@dataclass(frozen=True)
class RoundPartition:
    """Witness that a word splits into at most k rounds of stack contexts."""

    contexts: tuple

    @property
    def rounds(self) -> int:
        return max((c.round_no for c in self.contexts), default=1)


def _reset_blocks(w: Stcw, sources: set) -> dict:
    """Map each source position to the id of its maximal consecutive run."""
    block_of = {}
    bid = -1
    prev = None
    for pos in sorted(sources):
        if prev is None or pos != prev + 1:
            bid += 1
        block_of[pos] = bid
        prev = pos
    return block_of


def _check_clock_edges(clock: str, edges: list, w: Stcw):
    """Nesting inside a reset block, closest-block matching across blocks."""
    block_of = _reset_blocks(w, {c.src for c in edges})
    for a in edges:
        for b in edges:
            if a.src < b.src:
                if block_of[a.src] == block_of[b.src]:
                    if a.src < b.src < a.tgt and not (b.src < b.tgt < a.tgt):
                        raise ClockMatchViolation(clock, (a, b))
                else:
                    if not a.tgt < b.src:
                        raise ClockMatchViolation(clock, (a, b))


def _check_stack_edges(stack: int, edges: list):
    for a in edges:
        for b in edges:
            if a.src < b.src < a.tgt and not (b.src < b.tgt < a.tgt):
                raise StackCrossing(stack, (a, b))


def _round_partition(w: Stcw, stacks: int, rounds: int) -> RoundPartition:
    """Greedy left-to-right context assignment; raises TooManyRounds."""
    stack_at = {}
    for c in w.constraints:
        if c.owner.kind == "stack":
            stack_at[c.src] = c.owner.stack
            stack_at[c.tgt] = c.owner.stack
    round_no, ctx = 1, 1
    contexts = []
    current = []

    def close():
        if current:
            contexts.append(RoundContext(round_no, ctx, tuple(current)))

    for pos in range(w.n):
        s = stack_at.get(pos)
        if s is not None and s != ctx:
            close()
            current = []
            if s > ctx:
                ctx = s
            else:
                round_no += 1
                ctx = s
        current.append(pos)
    close()
    if round_no > rounds:
        raise TooManyRounds(round_no, rounds)
    return RoundPartition(tuple(contexts))


def check_well_timed(w: Stcw, clocks: Iterable = (), stacks: int = 0,
                     rounds: int = 1) -> RoundPartition:
    """Verify the per-owner well-timedness conditions of w.

    Stack edges must be well-nested per stack; clock edges (including the
    zero-delay owner) must nest inside reset blocks and match the closest
    reset block; for more than one stack the word must split into at most
    ``rounds`` rounds.  Returns the witness partition, or raises the first
    violated condition.
    """
    clocks = set(clocks)
    by_clock: dict = {}
    by_stack: dict = {}
    for c in w.constraints:
        key = c.owner.clock_key()
        if key is not None:
            if c.owner.kind == "clock" and clocks and c.owner.clock not in clocks:
                raise ClockMatchViolation(c.owner.clock, (c,))
            by_clock.setdefault(key, []).append(c)
        elif c.owner.kind == "stack":
            if not 1 <= c.owner.stack <= max(stacks, 0):
                raise StackCrossing(c.owner.stack, (c,))
            by_stack.setdefault(c.owner.stack, []).append(c)
        else:
            raise ModelError(f"constraint {c} has no owner tag")
    for stack, edges in sorted(by_stack.items()):
        _check_stack_edges(stack, edges)
    for clock, edges in sorted(by_clock.items()):
        _check_clock_edges(clock, edges, w)
    if stacks > 1:
        return _round_partition(w, stacks, rounds)
    return RoundPartition(
        (RoundContext(1, 1, tuple(range(w.n))),) if w.n else ()
    )


# ---------------------------------------------------------------------------
# JSON and DOT
# ---------------------------------------------------------------------------

def owner_to_json(owner: Owner):
    if owner.kind == "clock":
        return {"clock": owner.clock}
    if owner.kind == "stack":
        return {"stack": owner.stack}
    return owner.kind


def owner_from_json(data) -> Owner:
    if isinstance(data, str):
        if data == "zeta":
            return ZETA
        if data == "untagged":
            return UNTAGGED
        raise ModelError(f"unknown owner {data!r}")
    if "clock" in data:
        return Owner.for_clock(data["clock"])
    if "stack" in data:
        return Owner.for_stack(int(data["stack"]))
    raise ModelError(f"unknown owner {data!r}")


def interval_to_json(interval: Interval) -> dict:
    return {"lo": interval.lo,
            "up": "inf" if interval.up is None else interval.up}


def interval_from_json(data: Mapping) -> Interval:
    up = data["up"]
    return Interval(int(data["lo"]), None if up == "inf" else int(up))


def stcw_to_json(w: Stcw) -> dict:
    return {
        "positions": [{"id": i, "label": lab} for i, lab in enumerate(w.labels)],
        "succ": [[i, i + 1] for i in range(w.n - 1) if i not in w.holes],
        "holes": sorted([i, i + 1] for i in w.holes),
        "constraints": [
            {"src": c.src, "tgt": c.tgt, **interval_to_json(c.interval),
             "owner": owner_to_json(c.owner)}
            for c in w.constraints
        ],
    }


def stcw_from_json(data) -> Stcw:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        graph = RawGraph(
            positions=[(p["id"], p.get("label", "")) for p in data["positions"]],
            succ=[tuple(e) for e in data.get("succ", [])],
            holes=[tuple(e) for e in data.get("holes", [])],
            constraints=[
                (c["src"], c["tgt"], interval_from_json(c),
                 owner_from_json(c.get("owner", "untagged")))
                for c in data.get("constraints", [])
            ],
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bad STCW JSON: {exc}") from exc
    return validate_split_tcw(graph)


def stcw_to_dot(w: Stcw, name: str = "stcw") -> str:
    """Render: straight edges for successors, dashed for holes, curved
    labeled edges for constraints.  Output is stable across runs."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for i, lab in enumerate(w.labels):
        text = lab if lab != EPSILON else "&epsilon;"
        lines.append(f'  p{i} [label="{i}:{text}" shape=circle];')
    for i in range(w.n - 1):
        style = "dashed" if i in w.holes else "solid"
        lines.append(f"  p{i} -> p{i + 1} [style={style}];")
    for c in w.constraints:
        lines.append(
            f'  p{c.src} -> p{c.tgt} [constraint=false style=bold '
            f'label="{c.interval} {c.owner}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
