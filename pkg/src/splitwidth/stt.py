"""Special tree terms and their colored-graph semantics.

Terms build labeled graphs bottom-up from colored single-vertex atoms,
using edge additions between colored vertices, color forgetting and
renaming, and disjoint union.  A restricted grammar (bounded colors,
bounded interval constants, constraints only between freshly combined
atoms) is what the tree automata downstream consume.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import ColorClash, ModelError, TermSyntaxError
from .tcw import EPSILON, UNTAGGED, ZETA, Constraint, Interval, Owner, Stcw

# --- term nodes ------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    color: int
    label: str


@dataclass(frozen=True)
class AddSucc:
    i: int
    j: int
    child: "SttTerm"


@dataclass(frozen=True)
class AddConstraint:
    i: int
    j: int
    interval: Interval
    owner: Owner
    child: "SttTerm"


@dataclass(frozen=True)
class Forget:
    i: int
    child: "SttTerm"


@dataclass(frozen=True)
class Rename:
    i: int
    j: int
    child: "SttTerm"


@dataclass(frozen=True)
class Combine:
    left: "SttTerm"
    right: "SttTerm"


SttTerm = Union[Atom, AddSucc, AddConstraint, Forget, Rename, Combine]


def children(t: SttTerm) -> tuple:
    if isinstance(t, Combine):
        return (t.left, t.right)
    if isinstance(t, Atom):
        return ()
    return (t.child,)


def atomic_pair(t: SttTerm) -> Optional[tuple]:
    """If t is a constraint directly over two combined atoms, return
    (i, j, interval, owner, left_atom, right_atom)."""
    if (
        isinstance(t, AddConstraint)
        and isinstance(t.child, Combine)
        and isinstance(t.child.left, Atom)
        and isinstance(t.child.right, Atom)
        and {t.i, t.j} == {t.child.left.color, t.child.right.color}
        and t.i < t.j
    ):
        left, right = t.child.left, t.child.right
        if left.color == t.j:
            left, right = right, left
        return (t.i, t.j, t.interval, t.owner, left, right)
    return None


# --- semantics -------------------------------------------------------------


@dataclass(frozen=True)
class ColoredGraph:
    """Evaluation result: vertex labels, successor edges, constraint
    edges, and a partial injective map from colors to vertices."""

    labels: tuple
    succ: frozenset
    constraints: tuple
    chi: tuple  # sorted (color, vertex) pairs

    @property
    def n(self) -> int:
        return len(self.labels)

    def chi_map(self) -> dict:
        return dict(self.chi)

    def live_colors(self) -> frozenset:
        return frozenset(c for c, _ in self.chi)

    def linearize(self) -> tuple:
        """Order vertices along the successor chain.

        Returns (word, order) where order[p] is the vertex at position p;
        raises ModelError when the successor edges do not form one chain
        over all vertices."""
        n = self.n
        succ: dict = {}
        indeg = {v: 0 for v in range(n)}
        for a, b in self.succ:
            if a in succ or indeg[b]:
                raise ModelError("graph is not a linear word")
            succ[a] = b
            indeg[b] += 1
        starts = [v for v in range(n) if indeg[v] == 0]
        if n == 0:
            return Stcw(()), []
        if len(starts) != 1:
            raise ModelError("graph is not a linear word")
        order = [starts[0]]
        while order[-1] in succ:
            order.append(succ[order[-1]])
        if len(order) != n:
            raise ModelError("graph is not a linear word")
        rank = {v: i for i, v in enumerate(order)}
        word = Stcw(
            tuple(self.labels[v] for v in order),
            tuple(
                Constraint(rank[c.src], rank[c.tgt], c.interval, c.owner)
                for c in self.constraints
            ),
        )
        return word, order

    def as_stcw(self) -> Stcw:
        return self.linearize()[0]


def eval_term(t: SttTerm) -> ColoredGraph:
    """Evaluate a term to its colored graph.

    Edge additions between missing colors are silent no-ops; disjoint
    union with overlapping color domains raises ColorClash.  Vertices are
    numbered by leaf order, left to right.
    """
    labels, succ, constraints, chi = _eval(t, 0)
    return ColoredGraph(
        tuple(labels),
        frozenset(succ),
        tuple(sorted(constraints)),
        tuple(sorted(chi.items())),
    )


def _eval(t: SttTerm, base: int):
    if isinstance(t, Atom):
        return [t.label], set(), [], {t.color: base}
    if isinstance(t, Combine):
        labels, succ, cons, chi = _eval(t.left, base)
        labels2, succ2, cons2, chi2 = _eval(t.right, base + len(labels))
        overlap = chi.keys() & chi2.keys()
        if overlap:
            raise ColorClash(f"colors {sorted(overlap)} active on both sides")
        labels.extend(labels2)
        succ |= succ2
        cons.extend(cons2)
        chi.update(chi2)
        return labels, succ, cons, chi
    labels, succ, cons, chi = _eval(t.child, base)
    if isinstance(t, AddSucc):
        if t.i in chi and t.j in chi:
            succ.add((chi[t.i], chi[t.j]))
    elif isinstance(t, AddConstraint):
        if t.i in chi and t.j in chi:
            cons.append(Constraint(chi[t.i], chi[t.j], t.interval, t.owner))
    elif isinstance(t, Forget):
        chi.pop(t.i, None)
    elif isinstance(t, Rename):
        vi, vj = chi.pop(t.i, None), chi.pop(t.j, None)
        if vj is not None:
            chi[t.i] = vj
        if vi is not None:
            chi[t.j] = vi
    else:
        raise ModelError(f"unknown term node {t!r}")
    return labels, succ, cons, chi


# --- monotonicity and the bounded grammar ----------------------------------


def _live_colors(t: SttTerm) -> frozenset:
    if isinstance(t, Atom):
        return frozenset((t.color,))
    if isinstance(t, Combine):
        left, right = _live_colors(t.left), _live_colors(t.right)
        if left & right:
            raise ColorClash(f"colors {sorted(left & right)} on both sides")
        return left | right
    live = _live_colors(t.child)
    if isinstance(t, Forget):
        return live - {t.i}
    if isinstance(t, Rename):
        out = set(live)
        if t.i in live:
            out.discard(t.i)
            out.add(t.j)
        if t.j in live:
            out.discard(t.j)
            out.add(t.i)
        return frozenset(out)
    return live


def _next_in(live: frozenset, i: int):
    bigger = [c for c in live if c > i]
    return min(bigger) if bigger else None


def _prev_in(live: frozenset, i: int):
    smaller = [c for c in live if c < i]
    return max(smaller) if smaller else 0


def is_monotonic(t: SttTerm) -> bool:
    """True iff color order can match position order throughout.

    Checks, bottom-up over live color sets: successor additions go to the
    next live color, constraints go strictly forward, and renames keep a
    color strictly between its live neighbors.
    """
    try:
        ok, _ = _is_monotonic(t)
    except ColorClash:
        return False
    return ok


def _is_monotonic(t: SttTerm):
    if isinstance(t, Atom):
        return True, frozenset((t.color,))
    if isinstance(t, Combine):
        ok1, l1 = _is_monotonic(t.left)
        ok2, l2 = _is_monotonic(t.right)
        if l1 & l2:
            raise ColorClash("overlapping colors")
        return ok1 and ok2, l1 | l2
    ok, live = _is_monotonic(t.child)
    if isinstance(t, AddSucc):
        ok = ok and t.i in live and _next_in(live, t.i) == t.j
        return ok, live
    if isinstance(t, AddConstraint):
        ok = ok and t.i in live and t.j in live and t.i < t.j
        return ok, live
    if isinstance(t, Forget):
        return ok and t.i in live, live - {t.i}
    if isinstance(t, Rename):
        if t.i not in live or t.j in live:
            return False, _live_colors(t)
        ok = ok and _prev_in(live, t.i) < t.j and (
            _next_in(live, t.i) is None or t.j < _next_in(live, t.i)
        )
        return ok, (live - {t.i}) | {t.j}
    raise ModelError(f"unknown term node {t!r}")


def is_km_stt(t: SttTerm, k: int, m: int) -> bool:
    """Conformance to the restricted grammar for color budget 2k and
    constant bound m: constraints appear only directly above a pair of
    combined atoms, every color lies in 1..2k, every touched color is
    live, and interval constants stay below m (or are unbounded)."""
    try:
        return _is_km(t, 2 * k, m) is not None
    except ColorClash:
        return False


def _is_km(t: SttTerm, colors: int, m: int):
    """Return live colors if t conforms, else None."""
    if isinstance(t, Atom):
        return frozenset((t.color,)) if 1 <= t.color <= colors else None
    if isinstance(t, AddConstraint):
        pair = atomic_pair(t)
        if pair is None or not t.interval.fits_bound(m):
            return None
        live = _is_km(t.child, colors, m)
        return live
    if isinstance(t, Combine):
        l1 = _is_km(t.left, colors, m)
        l2 = _is_km(t.right, colors, m)
        if l1 is None or l2 is None or (l1 & l2):
            return None
        return l1 | l2
    live = _is_km(t.child, colors, m)
    if live is None:
        return None
    if isinstance(t, AddSucc):
        return live if (t.i in live and t.j in live and t.i != t.j) else None
    if isinstance(t, Forget):
        return live - {t.i} if t.i in live else None
    if isinstance(t, Rename):
        if t.i not in live or t.j in live or not 1 <= t.j <= colors:
            return None
        return (live - {t.i}) | {t.j}
    return None


def term_size(t: SttTerm) -> int:
    return 1 + sum(term_size(c) for c in children(t))


def term_depth(t: SttTerm) -> int:
    kids = children(t)
    return 1 + (max(map(term_depth, kids)) if kids else 0)


def leaf_count(t: SttTerm) -> int:
    if isinstance(t, Atom):
        return 1
    return sum(leaf_count(c) for c in children(t))


# --- text format -----------------------------------------------------------

_LABEL_OUT = {EPSILON: "eps"}
_LABEL_IN = {"eps": EPSILON}


def _label_out(lab: str) -> str:
    return _LABEL_OUT.get(lab, lab)


def _owner_text(owner: Owner) -> str:
    if owner.kind == "clock":
        return f"clock:{owner.clock}"
    if owner.kind == "stack":
        return f"stack:{owner.stack}"
    if owner.kind == "zeta":
        return "zeta"
    return "any"


def _owner_parse(text: str, pos: int) -> Owner:
    if text == "zeta":
        return ZETA
    if text == "any":
        return UNTAGGED
    if text.startswith("clock:"):
        return Owner.for_clock(text[6:])
    if text.startswith("stack:"):
        try:
            return Owner.for_stack(int(text[6:]))
        except ValueError:
            raise TermSyntaxError(f"bad stack owner {text!r}", pos) from None
    raise TermSyntaxError(f"bad owner {text!r}", pos)


def serialize_term(t: SttTerm) -> str:
    """Deterministic text form; parse_term inverts it."""
    if isinstance(t, Atom):
        return f"({t.color},{_label_out(t.label)})"
    if isinstance(t, AddSucc):
        return f"add_succ_{t.i}_{t.j}({serialize_term(t.child)})"
    if isinstance(t, AddConstraint):
        up = "inf" if t.interval.up is None else str(t.interval.up)
        return (
            f"add_con_{t.i}_{t.j}_[{t.interval.lo},{up}]"
            f"@{_owner_text(t.owner)}({serialize_term(t.child)})"
        )
    if isinstance(t, Forget):
        return f"forget_{t.i}({serialize_term(t.child)})"
    if isinstance(t, Rename):
        return f"rename_{t.i}_{t.j}({serialize_term(t.child)})"
    if isinstance(t, Combine):
        return f"plus({serialize_term(t.left)},{serialize_term(t.right)})"
    raise ModelError(f"unknown term node {t!r}")


_ATOM_RE = re.compile(r"\((\d+),([A-Za-z0-9_']*)\)")
_SUCC_RE = re.compile(r"add_succ_(\d+)_(\d+)\(")
_CON_RE = re.compile(r"add_con_(\d+)_(\d+)_\[(\d+),(\d+|inf)\]@([A-Za-z0-9_:]+)\(")
_FORGET_RE = re.compile(r"forget_(\d+)\(")
_RENAME_RE = re.compile(r"rename_(\d+)_(\d+)\(")
_PLUS_RE = re.compile(r"plus\(")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise TermSyntaxError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def term(self) -> SttTerm:
        self.skip_ws()
        rest = self.text[self.pos:]
        m = _ATOM_RE.match(rest)
        if m:
            self.pos += m.end()
            return Atom(int(m.group(1)), _LABEL_IN.get(m.group(2), m.group(2)))
        m = _SUCC_RE.match(rest)
        if m:
            self.pos += m.end()
            child = self.term()
            self.expect(")")
            return AddSucc(int(m.group(1)), int(m.group(2)), child)
        m = _CON_RE.match(rest)
        if m:
            owner = _owner_parse(m.group(5), self.pos)
            self.pos += m.end()
            child = self.term()
            self.expect(")")
            up = None if m.group(4) == "inf" else int(m.group(4))
            return AddConstraint(
                int(m.group(1)), int(m.group(2)),
                Interval(int(m.group(3)), up), owner, child,
            )
        m = _FORGET_RE.match(rest)
        if m:
            self.pos += m.end()
            child = self.term()
            self.expect(")")
            return Forget(int(m.group(1)), child)
        m = _RENAME_RE.match(rest)
        if m:
            self.pos += m.end()
            child = self.term()
            self.expect(")")
            return Rename(int(m.group(1)), int(m.group(2)), child)
        m = _PLUS_RE.match(rest)
        if m:
            self.pos += m.end()
            left = self.term()
            self.expect(",")
            right = self.term()
            self.expect(")")
            return Combine(left, right)
        raise TermSyntaxError("expected a term", self.pos)


def parse_term(text: str) -> SttTerm:
    parser = _Parser(text)
    t = parser.term()
    parser.skip_ws()
    if parser.pos != len(text):
        raise TermSyntaxError("trailing input", parser.pos)
    return t


# --- JSON mirror -----------------------------------------------------------

def term_to_json(t: SttTerm) -> dict:
    if isinstance(t, Atom):
        return {"kind": "atom", "color": t.color, "label": t.label}
    if isinstance(t, AddSucc):
        return {"kind": "succ", "i": t.i, "j": t.j,
                "child": term_to_json(t.child)}
    if isinstance(t, AddConstraint):
        return {
            "kind": "con", "i": t.i, "j": t.j,
            "lo": t.interval.lo,
            "up": "inf" if t.interval.up is None else t.interval.up,
            "owner": _owner_text(t.owner),
            "child": term_to_json(t.child),
        }
    if isinstance(t, Forget):
        return {"kind": "forget", "i": t.i, "child": term_to_json(t.child)}
    if isinstance(t, Rename):
        return {"kind": "rename", "i": t.i, "j": t.j,
                "child": term_to_json(t.child)}
    if isinstance(t, Combine):
        return {"kind": "plus", "left": term_to_json(t.left),
                "right": term_to_json(t.right)}
    raise ModelError(f"unknown term node {t!r}")


def term_from_json(data: dict) -> SttTerm:
    kind = data.get("kind")
    if kind == "atom":
        return Atom(int(data["color"]), data["label"])
    if kind == "succ":
        return AddSucc(int(data["i"]), int(data["j"]),
                       term_from_json(data["child"]))
    if kind == "con":
        up = data["up"]
        return AddConstraint(
            int(data["i"]), int(data["j"]),
            Interval(int(data["lo"]), None if up == "inf" else int(up)),
            _owner_parse(data["owner"], 0),
            term_from_json(data["child"]),
        )
    if kind == "forget":
        return Forget(int(data["i"]), term_from_json(data["child"]))
    if kind == "rename":
        return Rename(int(data["i"]), int(data["j"]),
                      term_from_json(data["child"]))
    if kind == "plus":
        return Combine(term_from_json(data["left"]),
                       term_from_json(data["right"]))
    raise ModelError(f"unknown term kind {kind!r}")
