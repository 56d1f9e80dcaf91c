"""Bottom-up tree automaton deciding realizability of term-denoted words.

States abstract the colored points of the graph built so far: for every
active color we keep its timestamp modulo M, whether a successor edge
already leaves it, and whether the distance to the next active color is
known accurately.  The transition rules maintain this abstraction so
that a term is accepted exactly when it is monotonic, denotes a simple
word of bounded width with only endpoints colored, and admits an integer
timestamp map.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

from . import stt
from .errors import ModelError
from .stt import Atom, AddConstraint, AddSucc, Combine, Forget, Rename, SttTerm
from .tcw import Interval


@dataclass(frozen=True, eq=False)
class ValidityState:
    """Tuple (P, sd, tsm, ac) with parallel entries per active color."""

    colors: tuple  # strictly increasing colors
    sd: tuple      # solid edge to the next color?
    tsm: tuple     # timestamp modulo M
    ac: tuple      # distance to next color accurate?

    def __post_init__(self):
        if not (len(self.colors) == len(self.sd) == len(self.tsm) == len(self.ac)):
            raise ModelError("ragged validity state")
        if any(a >= b for a, b in zip(self.colors, self.colors[1:])):
            raise ModelError("colors not strictly increasing")
        object.__setattr__(
            self, "_key", (self.colors, self.sd, self.tsm, self.ac)
        )

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, ValidityState) and self._key == other._key

    # -- helpers ------------------------------------------------------------

    def index(self, color: int) -> int:
        return self.colors.index(color)

    def has(self, color: int) -> bool:
        return color in self.colors

    def next_color(self, color: int) -> Optional[int]:
        i = self.index(color)
        return self.colors[i + 1] if i + 1 < len(self.colors) else None

    def prev_color(self, color: int) -> int:
        i = self.index(color)
        return self.colors[i - 1] if i > 0 else 0

    def block_count(self) -> int:
        return sum(1 for s in self.sd if not s)

    def blocks(self) -> list:
        """Blocks as (left_index, right_index) pairs over color positions."""
        out = []
        start = 0
        for i, solid in enumerate(self.sd):
            if not solid:
                out.append((start, i))
                start = i + 1
        return out

    def d(self, i: int, j: int, m: int) -> int:
        """Modulo-m timestamp difference between colors i <= j."""
        return (self.tsm[self.index(j)] - self.tsm[self.index(i)]) % m

    def big_d(self, i: int, j: int, m: int) -> int:
        """Sum of consecutive modulo-m differences from i up to j."""
        a, b = self.index(i), self.index(j)
        return sum(
            (self.tsm[k + 1] - self.tsm[k]) % m for k in range(a, b)
        )

    def acc(self, i: int, j: int) -> bool:
        """Conjunction of accuracy bits over the consecutive range i..j."""
        a, b = self.index(i), self.index(j)
        return all(self.ac[k] for k in range(a, b))


def is_accepting(q: ValidityState) -> bool:
    """Single colored point, or one solid block with a trailing color
    whose gap is closed (no hole, nothing accurate pending)."""
    if len(q.colors) == 1:
        return True
    return (
        len(q.colors) == 2
        and q.sd[0]
        and not q.sd[1]
        and not q.ac[1]
    )


# ---------------------------------------------------------------------------
# Transition rules
# ---------------------------------------------------------------------------

def delta_atom(color: int, m: int, k: int) -> list:
    """All states readable at a single atom: the modulo-m stamp is free."""
    if not 1 <= color <= 2 * k:
        return []
    return [
        ValidityState((color,), (False,), (t,), (False,)) for t in range(m)
    ]


def delta_rename(q: ValidityState, i: int, j: int, k: int) -> Optional[ValidityState]:
    if not q.has(i) or q.has(j) or not 1 <= j <= 2 * k:
        return None
    nxt = q.next_color(i)
    if not (q.prev_color(i) < j and (nxt is None or j < nxt)):
        return None
    idx = q.index(i)
    colors = list(q.colors)
    colors[idx] = j
    return ValidityState(tuple(colors), q.sd, q.tsm, q.ac)


def delta_forget(q: ValidityState, i: int, m: int) -> Optional[ValidityState]:
    if not q.has(i):
        return None
    idx = q.index(i)
    if idx == 0 or idx == len(q.colors) - 1:
        return None
    prev_c, next_c = q.colors[idx - 1], q.colors[idx + 1]
    if not (q.sd[idx - 1] and q.sd[idx]):
        return None
    new_ac = list(q.ac)
    new_ac[idx - 1] = q.acc(prev_c, next_c) and q.big_d(prev_c, next_c, m) < m
    drop = lambda t: t[:idx] + t[idx + 1:]
    return ValidityState(
        drop(q.colors), drop(q.sd), drop(q.tsm), drop(tuple(new_ac))
    )


def delta_add_succ(q: ValidityState, i: int, j: int) -> Optional[ValidityState]:
    if not q.has(i) or q.next_color(i) != j:
        return None
    idx = q.index(i)
    if q.sd[idx]:
        return None
    sd = list(q.sd)
    sd[idx] = True
    return ValidityState(q.colors, tuple(sd), q.tsm, q.ac)


def delta_add_constraint(
    q: ValidityState, i: int, j: int, interval: Interval, m: int
) -> Optional[ValidityState]:
    if not q.has(i) or not q.has(j) or not i < j:
        return None
    if q.acc(i, j):
        return q if interval.contains(q.big_d(i, j, m)) else None
    return q if interval.unbounded else None


def delta_combine(
    q1: ValidityState, q2: ValidityState, m: int, k: int
) -> list:
    """All merged states for a disjoint union.

    The color sets fix the interleaving; solid edges must not be split by
    foreign colors; accuracy bits are guessed wherever a foreign gap was
    opened, filtered by the consistency conditions relating each child's
    accuracy to the merged state.
    """
    set1, set2 = set(q1.colors), set(q2.colors)
    if set1 & set2:
        return []
    merged = tuple(sorted(set1 | set2))
    if len(merged) > 2 * k:
        return []
    side = [1 if c in set1 else 2 for c in merged]
    of1 = {c: q1.index(c) for c in q1.colors}
    of2 = {c: q2.index(c) for c in q2.colors}

    def child_sd(c):
        return q1.sd[of1[c]] if c in set1 else q2.sd[of2[c]]

    def child_tsm(c):
        return q1.tsm[of1[c]] if c in set1 else q2.tsm[of2[c]]

    def child_ac(c):
        return q1.ac[of1[c]] if c in set1 else q2.ac[of2[c]]

    def child_next(c):
        q = q1 if c in set1 else q2
        return q.next_color(c)

    sd = tuple(child_sd(c) for c in merged)
    tsm = tuple(child_tsm(c) for c in merged)
    if sum(1 for s in sd if not s) > k:
        return []

    # Solid edges must stay adjacent in the merged order.
    n = len(merged)
    for idx, c in enumerate(merged):
        if child_sd(c):
            nxt = merged[idx + 1] if idx + 1 < n else None
            if nxt != child_next(c):
                return []

    d_next = [
        (tsm[idx + 1] - tsm[idx]) % m if idx + 1 < n else 0
        for idx in range(n)
    ]

    # ac entries: the last one is False; entries whose merged successor is
    # the child successor inherit; the rest are free, then filtered by the
    # consistency requirements of both children.
    forced = {n - 1: False}
    checks = []  # (start_idx, end_idx, required_bool) over merged ranges
    for idx, c in enumerate(merged):
        q = q1 if c in set1 else q2
        j = q.next_color(c)
        if j is None:
            continue
        j_idx = merged.index(j)
        if j_idx == idx + 1:
            if idx in forced and forced[idx] != child_ac(c):
                return []
            forced[idx] = child_ac(c)
        else:
            checks.append((idx, j_idx, child_ac(c)))

    free = [idx for idx in range(n) if idx not in forced]
    out = []
    for bits in product((False, True), repeat=len(free)):
        ac = [None] * n
        for idx, val in forced.items():
            ac[idx] = val
        for idx, val in zip(free, bits):
            ac[idx] = val
        ok = True
        for start, end, required in checks:
            conj = all(ac[t] for t in range(start, end))
            dist = sum(d_next[t] for t in range(start, end))
            if (conj and dist < m) != required:
                ok = False
                break
        if ok:
            out.append(ValidityState(merged, sd, tsm, tuple(ac)))
    return out


# ---------------------------------------------------------------------------
# Membership by reachable-state propagation
# ---------------------------------------------------------------------------

def reachable_states(t: SttTerm, k: int, m: int) -> frozenset:
    """States reachable at the root, applying the bounded-width
    restrictions structurally (constraints only on atomic pairs, at most
    k blocks, colors up to 2k)."""
    memo: dict = {}
    return _reach(t, k, m, memo)


def _reach(t: SttTerm, k: int, m: int, memo: dict) -> frozenset:
    if id(t) in memo:
        return memo[id(t)]
    if isinstance(t, Atom):
        result = frozenset(delta_atom(t.color, m, k))
    elif isinstance(t, AddConstraint):
        if stt.atomic_pair(t) is None:
            result = frozenset()
        else:
            result = frozenset(
                q2
                for q in _reach(t.child, k, m, memo)
                for q2 in [delta_add_constraint(q, t.i, t.j, t.interval, m)]
                if q2 is not None
            )
    elif isinstance(t, AddSucc):
        result = frozenset(
            q2
            for q in _reach(t.child, k, m, memo)
            for q2 in [delta_add_succ(q, t.i, t.j)]
            if q2 is not None
        )
    elif isinstance(t, Forget):
        result = frozenset(
            q2
            for q in _reach(t.child, k, m, memo)
            for q2 in [delta_forget(q, t.i, m)]
            if q2 is not None
        )
    elif isinstance(t, Rename):
        result = frozenset(
            q2
            for q in _reach(t.child, k, m, memo)
            for q2 in [delta_rename(q, t.i, t.j, k)]
            if q2 is not None
        )
    elif isinstance(t, Combine):
        left = _reach(t.left, k, m, memo)
        right = _reach(t.right, k, m, memo)
        result = frozenset(
            q
            for qa in left
            for qb in right
            for q in delta_combine(qa, qb, m, k)
        )
    else:
        raise ModelError(f"unknown term node {t!r}")
    memo[id(t)] = result
    return result


def accepts(t: SttTerm, k: int, m: int) -> bool:
    return any(is_accepting(q) for q in reachable_states(t, k, m))


def reachable_states_dump(t: SttTerm, k: int, m: int) -> dict:
    """Reachable state sets per subterm, keyed by the subterm path."""
    out: dict = {}

    def walk(node: SttTerm, path: str):
        memo: dict = {}
        states = _reach(node, k, m, memo)
        out[path or "root"] = sorted(
            {
                "colors": q.colors,
                "sd": q.sd,
                "tsm": q.tsm,
                "ac": q.ac,
            }.__repr__()
            for q in states
        )
        for idx, child in enumerate(stt.children(node)):
            walk(child, f"{path}.{idx}" if path else str(idx))

    walk(t, "")
    return out


def enumerate_state_space(k: int, m: int) -> int:
    """Count every well-formed state for the fixed budgets (test aid)."""
    count = 0
    colors = list(range(1, 2 * k + 1))
    for size in range(1, 2 * k + 1):
        from itertools import combinations

        for combo in combinations(colors, size):
            blocks_possible = 0
            for sd in product((False, True), repeat=size):
                if not sd[-1] and sum(1 for s in sd if not s) <= k:
                    blocks_possible += 1
            count += blocks_possible * (m ** size) * (2 ** size)
    return count
