"""Timed systems and the tree automaton layered on the validity check.

A system is a finite automaton with clocks and zero or more timed
stacks.  Its word semantics blows every transition up into a sequence of
micro-transitions: an auxiliary zero-delay constraint brackets the
sequence, guard conjuncts become constraint targets, resets become
constraint sources (one point per later check), and the action point
carries the letter and the stack operation.

The system tree automaton refines validity states with, per color, the
micro-transition endpoints guessed at the leaf, plus bookkeeping that
ties clock checks to the closest reset (``clr``/``rgc``) and keeps
push-pop edges well-nested per stack (``pp``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Optional, Sequence, Union

from . import validity
from .errors import IllFormedRun, ModelError
from .stt import (
    Atom,
    AddConstraint,
    AddSucc,
    Combine,
    Forget,
    Rename,
    SttTerm,
    atomic_pair,
)
from .tcw import (
    EPSILON,
    UNTAGGED,
    ZETA,
    Constraint,
    Interval,
    Owner,
    Stcw,
    interval_from_json,
    interval_to_json,
)
from .validity import ValidityState

DUMMY_TID = -1
DUMMY_SOURCE = "__start__"


# ---------------------------------------------------------------------------
# System description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Nop:
    def __str__(self):
        return "nop"


@dataclass(frozen=True)
class Push:
    stack: int
    sym: str

    def __str__(self):
        return f"push{self.stack}({self.sym})"


@dataclass(frozen=True)
class Pop:
    stack: int
    sym: str
    interval: Interval

    def __str__(self):
        return f"pop{self.stack}({self.sym}@{self.interval})"


StackOp = Union[Nop, Push, Pop]


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    letter: str
    guard: tuple  # ((clock, Interval), ...)
    resets: tuple
    op: StackOp = Nop()

    def __str__(self):
        parts = [self.source, "->", self.target]
        if self.letter:
            parts.append(self.letter)
        if self.guard:
            parts.append("&".join(f"{x}in{i}" for x, i in self.guard))
        if self.resets:
            parts.append("reset{%s}" % ",".join(self.resets))
        if not isinstance(self.op, Nop):
            parts.append(str(self.op))
        return " ".join(parts)


@dataclass(frozen=True)
class TimedSystem:
    kind: str  # "ta" | "tpda" | "dtmpda"
    states: tuple
    initial: str
    finals: frozenset
    clocks: tuple
    stacks: int
    rounds: Optional[int]
    alphabet: tuple
    stack_alphabet: tuple
    transitions: tuple

    def __post_init__(self):
        states = set(self.states)
        if self.initial not in states:
            raise ModelError(f"initial state {self.initial!r} unknown")
        if not self.finals <= states:
            raise ModelError("final states must be states")
        expected = {"ta": self.stacks == 0, "tpda": self.stacks == 1,
                    "dtmpda": self.stacks >= 1}
        if self.kind not in expected:
            raise ModelError(f"unknown system kind {self.kind!r}")
        if not expected[self.kind]:
            raise ModelError(f"{self.kind} has wrong stack count {self.stacks}")
        for tr in self.transitions:
            if tr.source not in states or tr.target not in states:
                raise ModelError(f"transition {tr} mentions unknown state")
            for clock, _ in tr.guard:
                if clock not in self.clocks:
                    raise ModelError(f"guard clock {clock!r} undeclared")
            for clock in tr.resets:
                if clock not in self.clocks:
                    raise ModelError(f"reset clock {clock!r} undeclared")
            if isinstance(tr.op, (Push, Pop)):
                if not 1 <= tr.op.stack <= self.stacks:
                    raise ModelError(f"stack {tr.op.stack} out of range")
                if tr.op.sym not in self.stack_alphabet:
                    raise ModelError(f"stack symbol {tr.op.sym!r} undeclared")

    def max_constant(self) -> int:
        best = 0
        for tr in self.transitions:
            for _, iv in tr.guard:
                best = max(best, iv.lo, iv.up or 0)
            if isinstance(tr.op, Pop):
                best = max(best, tr.op.interval.lo, tr.op.interval.up or 0)
        return best

    def modulus(self) -> int:
        return self.max_constant() + 1

    def dummy(self) -> Transition:
        """Internal initial transition resetting every clock."""
        return Transition(DUMMY_SOURCE, self.initial, EPSILON, (),
                          tuple(self.clocks), Nop())


# ---------------------------------------------------------------------------
# JSON format
# ---------------------------------------------------------------------------

def _op_from_json(data) -> StackOp:
    if data == "nop" or data is None:
        return Nop()
    if "push" in data:
        p = data["push"]
        return Push(int(p["stack"]), p["sym"])
    if "pop" in data:
        p = data["pop"]
        return Pop(int(p["stack"]), p["sym"], interval_from_json(p))
    raise ModelError(f"unknown stack op {data!r}")


def _op_to_json(op: StackOp):
    if isinstance(op, Nop):
        return "nop"
    if isinstance(op, Push):
        return {"push": {"stack": op.stack, "sym": op.sym}}
    return {"pop": {"stack": op.stack, "sym": op.sym,
                    **interval_to_json(op.interval)}}


def system_from_json(data) -> TimedSystem:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        transitions = tuple(
            Transition(
                source=t["from"],
                target=t["to"],
                letter=t.get("letter", ""),
                guard=tuple(
                    (g["clock"], interval_from_json(g)) for g in t.get("guard", [])
                ),
                resets=tuple(t.get("resets", [])),
                op=_op_from_json(t.get("op", "nop")),
            )
            for t in data["transitions"]
        )
        return TimedSystem(
            kind=data["kind"],
            states=tuple(data["states"]),
            initial=data["initial"],
            finals=frozenset(data["final"]),
            clocks=tuple(data.get("clocks", [])),
            stacks=int(data.get("stacks", 0)),
            rounds=data.get("rounds"),
            alphabet=tuple(data.get("alphabet", [])),
            stack_alphabet=tuple(data.get("stack_alphabet", [])),
            transitions=transitions,
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bad system JSON: {exc}") from exc


def system_to_json(system: TimedSystem) -> dict:
    return {
        "kind": system.kind,
        "states": list(system.states),
        "initial": system.initial,
        "final": sorted(system.finals),
        "clocks": list(system.clocks),
        "stacks": system.stacks,
        "rounds": system.rounds,
        "alphabet": list(system.alphabet),
        "stack_alphabet": list(system.stack_alphabet),
        "transitions": [
            {
                "from": t.source,
                "to": t.target,
                "letter": t.letter,
                "guard": [
                    {"clock": x, **interval_to_json(iv)} for x, iv in t.guard
                ],
                "resets": list(t.resets),
                "op": _op_to_json(t.op),
            }
            for t in system.transitions
        ],
    }


# ---------------------------------------------------------------------------
# Micro-transitions
# ---------------------------------------------------------------------------
#
# Micro-states of one transition (h guard conjuncts, resets x1..xm):
#
#   (st,s) --zeta_reset--> (g,0) --guard1--> ... --guardh--> (g,h)
#     --action--> (l,1) ~~> ... ~~> (l,m) ~~> (e) --zeta_check--> (st,s')
#
# where every (l,u) carries a self-loop firing one reset point per later
# check of that clock, and ~~> are silent links that never become word
# positions.  With no resets the action goes straight to (e).

@dataclass(frozen=True)
class MicroPoint:
    """One fired micro-transition; a position of the word semantics."""

    kind: str  # zeta_reset | guard | action | reset | zeta_check
    src: tuple
    tgt: tuple
    label: str = EPSILON
    clock: Optional[str] = None
    guard_index: int = 0


def micro_decompose(tid: int, tr: Transition, counts=None) -> list:
    """The point sequence simulating one firing of ``tr``.

    ``counts`` maps reset clocks to how many later checks they feed (the
    reset loop fires once per check); missing clocks fire zero times.
    """
    counts = counts or {}
    h = len(tr.guard)
    first_post = ("l", tid, 1) if tr.resets else ("e", tid)
    points = [MicroPoint("zeta_reset", ("st", tr.source), ("g", tid, 0))]
    for t, (clock, _) in enumerate(tr.guard, start=1):
        points.append(
            MicroPoint("guard", ("g", tid, t - 1), ("g", tid, t),
                       clock=clock, guard_index=t)
        )
    points.append(
        MicroPoint("action", ("g", tid, h), first_post, label=tr.letter)
    )
    for u, clock in enumerate(tr.resets, start=1):
        stage = ("l", tid, u)
        points.extend(
            MicroPoint("reset", stage, stage, clock=clock)
            for _ in range(counts.get(clock, 0))
        )
    points.append(MicroPoint("zeta_check", ("e", tid), ("st", tr.target)))
    return points


class MicroGraph:
    """Micro-state space of a system plus its internal initial transition,
    with reachability closures used for chaining checks and pruning."""

    def __init__(self, system: TimedSystem):
        self.system = system
        self.trans = {DUMMY_TID: system.dummy()}
        for tid, tr in enumerate(system.transitions):
            self.trans[tid] = tr
        self._silent: dict = {}
        self._edges: dict = {}
        for tid, tr in self.trans.items():
            h, m = len(tr.guard), len(tr.resets)
            chain = [("st", tr.source), ("g", tid, 0)]
            chain += [("g", tid, t) for t in range(1, h + 1)]
            post = [("l", tid, u) for u in range(1, m + 1)] + [("e", tid)]
            # point edges
            self._add(("st", tr.source), ("g", tid, 0))
            for t in range(1, h + 1):
                self._add(("g", tid, t - 1), ("g", tid, t))
            self._add(("g", tid, h), post[0])
            for u in range(1, m + 1):
                self._add(("l", tid, u), ("l", tid, u))
            self._add(("e", tid), ("st", tr.target))
            # silent links along the reset chain
            for a, b in zip(post, post[1:]):
                self._add(a, b)
                self._silent.setdefault(a, set()).add(b)
        self._closure = self._close()
        # flat lookups for hot paths
        self.reach_map = self._closure
        silent_pairs = set()
        for node in self._edges:
            for other in self._edges:
                if self.silent_reach(node, other):
                    silent_pairs.add((node, other))
        self.silent_pairs = frozenset(silent_pairs)

    def _add(self, a, b):
        self._edges.setdefault(a, set()).add(b)
        self._edges.setdefault(b, set())

    def _close(self) -> dict:
        closure = {}
        for node in self._edges:
            seen = {node}
            stack = [node]
            while stack:
                cur = stack.pop()
                for nxt in self._edges.get(cur, ()):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            closure[node] = frozenset(seen)
        return closure

    def silent_reach(self, a, b) -> bool:
        """Can a reach b using only silent links (or a == b)?"""
        if a == b:
            return True
        if a[0] not in ("l", "e") or b[0] not in ("l", "e"):
            return False
        if a[1] != b[1]:
            return False
        pos_a = a[2] if a[0] == "l" else float("inf")
        pos_b = b[2] if b[0] == "l" else float("inf")
        return pos_a <= pos_b

    def reach(self, a, b) -> bool:
        return b in self._closure.get(a, frozenset())

    def transition(self, tid: int) -> Transition:
        return self.trans[tid]

    # -- point descriptors used by leaves ------------------------------------

    def middle(self, tid: int) -> tuple:
        tr = self.trans[tid]
        first_post = ("l", tid, 1) if tr.resets else ("e", tid)
        return (("g", tid, len(tr.guard)), first_post)

    def zeta_left(self, tid: int) -> tuple:
        tr = self.trans[tid]
        return (("st", tr.source), ("g", tid, 0))

    def zeta_right(self, tid: int) -> tuple:
        tr = self.trans[tid]
        return (("e", tid), ("st", tr.target))

    def reset_stage(self, tid: int, clock: str) -> tuple:
        tr = self.trans[tid]
        u = tr.resets.index(clock) + 1
        return ("l", tid, u)

    def guard_stage(self, tid: int, index: int) -> tuple:
        return (("g", tid, index - 1), ("g", tid, index))


# ---------------------------------------------------------------------------
# Word semantics of runs
# ---------------------------------------------------------------------------

def sem_stcw(system: TimedSystem, run: Sequence, require_accepting: bool = True) -> Stcw:
    """Build the word generated by a transition sequence.

    ``run`` holds indices into ``system.transitions``; the internal
    initial transition is prepended automatically.  Reset counts and the
    reset-to-check wiring are derived: each check pairs with the closest
    earlier resetting transition, nested within one reset group.
    """
    trans = [system.dummy()] + [system.transitions[i] for i in run]
    for a, b in zip(trans, trans[1:]):
        if a.target != b.source:
            raise IllFormedRun(f"broken chaining {a.target!r} -> {b.source!r}")
    if require_accepting and trans[-1].target not in system.finals:
        raise IllFormedRun(f"run ends in {trans[-1].target!r}, not final")

    # stack discipline and push-pop matching
    stacks: dict = {}
    pairs = []
    for inst, tr in enumerate(trans):
        if isinstance(tr.op, Push):
            stacks.setdefault(tr.op.stack, []).append((tr.op.sym, inst))
        elif isinstance(tr.op, Pop):
            frame = stacks.get(tr.op.stack) or None
            if not frame:
                raise IllFormedRun(f"pop on empty stack {tr.op.stack}")
            sym, where = frame.pop()
            if sym != tr.op.sym:
                raise IllFormedRun(
                    f"pop expects {tr.op.sym!r}, top is {sym!r}"
                )
            pairs.append((where, inst, tr.op.interval, tr.op.stack))
    if any(stacks.values()):
        raise IllFormedRun("unmatched pushes remain")

    if system.stacks > 1 and system.rounds is not None:
        ops = [
            (tr.op.stack)
            for tr in trans
            if isinstance(tr.op, (Push, Pop))
        ]
        rounds_used, ctx = 1, 1
        for s in ops:
            if s > ctx:
                ctx = s
            elif s < ctx:
                rounds_used += 1
                ctx = s
        if rounds_used > system.rounds:
            raise IllFormedRun(
                f"run needs {rounds_used} rounds, bound is {system.rounds}"
            )

    # wire guard checks to the closest earlier reset
    checks: dict = {}  # (reset_inst, clock) -> [(inst, conjunct_index)]
    for inst, tr in enumerate(trans):
        for t, (clock, _) in enumerate(tr.guard, start=1):
            origin = None
            for back in range(inst - 1, -1, -1):
                if clock in trans[back].resets:
                    origin = back
                    break
            if origin is None:
                raise IllFormedRun(f"guard on {clock!r} with no reset")
            checks.setdefault((origin, clock), []).append((inst, t))

    counts = [
        {clock: len(checks.get((inst, clock), ())) for clock in tr.resets}
        for inst, tr in enumerate(trans)
    ]

    # lay out points
    labels = []
    zeta_pos: dict = {}
    act_pos: dict = {}
    guard_pos: dict = {}
    reset_pos: dict = {}
    for inst, tr in enumerate(trans):
        points = micro_decompose(inst - 1, tr, counts[inst])
        start = len(labels)
        for off, pt in enumerate(points):
            pos = start + off
            labels.append(pt.label)
            if pt.kind == "zeta_reset":
                zeta_pos[inst] = [pos, None]
            elif pt.kind == "zeta_check":
                zeta_pos[inst][1] = pos
            elif pt.kind == "action":
                act_pos[inst] = pos
            elif pt.kind == "guard":
                guard_pos[(inst, pt.guard_index)] = pos
            elif pt.kind == "reset":
                reset_pos.setdefault((inst, pt.clock), []).append(pos)

    constraints = [
        Constraint(lo, hi, Interval.zero(), ZETA)
        for lo, hi in (zeta_pos[inst] for inst in range(len(trans)))
    ]
    for (origin, clock), targets in checks.items():
        spots = reset_pos[(origin, clock)]
        ordered = sorted(targets)
        for idx, (inst, t) in enumerate(ordered):
            src = spots[len(ordered) - 1 - idx]
            iv = trans[inst].guard[t - 1][1]
            constraints.append(
                Constraint(src, guard_pos[(inst, t)], iv, Owner.for_clock(clock))
            )
    for where, inst, iv, stack in pairs:
        constraints.append(
            Constraint(act_pos[where], act_pos[inst], iv, Owner.for_stack(stack))
        )
    return Stcw(tuple(labels), tuple(constraints))


def enumerate_accepting_runs(system: TimedSystem, max_len: int) -> Iterator[list]:
    """All chained runs of bounded length that end final with empty
    stacks, respecting the round bound when one is declared.  Timing is
    not checked here; callers pair this with the realizability oracle."""
    by_source: dict = {}
    for idx, tr in enumerate(system.transitions):
        by_source.setdefault(tr.source, []).append(idx)

    def walk(state, stacks, run, round_ctx):
        if state in system.finals and not any(stacks.values()):
            yield list(run)
        if len(run) >= max_len:
            return
        for idx in by_source.get(state, ()):
            tr = system.transitions[idx]
            new_stacks = stacks
            rc = round_ctx
            if isinstance(tr.op, (Push, Pop)):
                s = tr.op.stack
                rounds_used, ctx = round_ctx
                if s > ctx:
                    ctx = s
                elif s < ctx:
                    rounds_used += 1
                    ctx = s
                if system.rounds is not None and rounds_used > system.rounds:
                    continue
                rc = (rounds_used, ctx)
                if isinstance(tr.op, Push):
                    new_stacks = dict(stacks)
                    new_stacks[s] = stacks.get(s, ()) + (tr.op.sym,)
                else:
                    top = stacks.get(s, ())
                    if not top or top[-1] != tr.op.sym:
                        continue
                    new_stacks = dict(stacks)
                    new_stacks[s] = top[:-1]
            run.append(idx)
            yield from walk(tr.target, new_stacks, run, rc)
            run.pop()

    yield from walk(system.initial, {}, [], (1, 1))


def round_normalize(system: TimedSystem, k: Optional[int] = None) -> TimedSystem:
    """Push the round bound into the finite control.

    States become (state, round, context) triples; operating on a lower
    stack than the current context starts a new round.  The result
    accepts exactly the runs of the original system that use at most k
    rounds, so the tree automaton needs no extra round bookkeeping.
    """
    k = k if k is not None else (system.rounds or 1)
    n = system.stacks
    if n < 1:
        raise ModelError("round normalization needs at least one stack")

    def name(s, i, j):
        return f"{s}@r{i}c{j}"

    states = tuple(
        name(s, i, j)
        for s in system.states
        for i in range(1, k + 1)
        for j in range(1, n + 1)
    )
    transitions = []
    for tr in system.transitions:
        for i in range(1, k + 1):
            for j in range(1, n + 1):
                if isinstance(tr.op, Nop) or tr.op.stack == j:
                    transitions.append(
                        replace(tr, source=name(tr.source, i, j),
                                target=name(tr.target, i, j))
                    )
                elif tr.op.stack > j:
                    transitions.append(
                        replace(tr, source=name(tr.source, i, j),
                                target=name(tr.target, i, tr.op.stack))
                    )
                elif i + 1 <= k:
                    transitions.append(
                        replace(tr, source=name(tr.source, i, j),
                                target=name(tr.target, i + 1, tr.op.stack))
                    )
    finals = frozenset(
        name(s, i, j)
        for s in system.finals
        for i in range(1, k + 1)
        for j in range(1, n + 1)
    )
    return TimedSystem(
        kind=system.kind,
        states=states,
        initial=name(system.initial, 1, 1),
        finals=finals,
        clocks=system.clocks,
        stacks=system.stacks,
        rounds=None,
        alphabet=system.alphabet,
        stack_alphabet=system.stack_alphabet,
        transitions=tuple(transitions),
    )


def parse_round_state(name: str):
    """Invert round_normalize naming; returns (state, round, context)."""
    if "@r" not in name:
        return name, None, None
    base, _, tail = name.rpartition("@r")
    i, _, j = tail.partition("c")
    return base, int(i), int(j)


# ---------------------------------------------------------------------------
# The system tree automaton
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SystemState:
    """Validity state plus per-color micro endpoints and run bookkeeping.

    ``clr`` holds, for left-endpoint colors, the clocks reset by
    transitions whose action point lies in that block (None elsewhere);
    ``rgc`` holds (i, j, clock) triples for pending reset-to-check pairs
    between blocks; ``pp`` holds (stack, i, j) triples for push-pop edges
    between blocks.
    """

    q: ValidityState
    src: tuple
    tgt: tuple
    clr: tuple
    rgc: frozenset
    pp: frozenset

    def __post_init__(self):
        object.__setattr__(
            self,
            "_key",
            (self.q, self.src, self.tgt, self.clr, self.rgc, self.pp),
        )

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, SystemState) and self._key == other._key

    def left_endpoints(self) -> list:
        out = []
        for idx, color in enumerate(self.q.colors):
            if idx == 0 or not self.q.sd[idx - 1]:
                out.append(color)
        return out

    def block_left(self, color: int) -> int:
        """Left endpoint color of the block containing ``color``."""
        idx = self.q.index(color)
        while idx > 0 and self.q.sd[idx - 1]:
            idx -= 1
        return self.q.colors[idx]


class SystemAutomaton:
    """Transition rules of the system tree automaton for one system."""

    def __init__(self, system: TimedSystem, k: int, m: Optional[int] = None):
        self.system = system
        self.k = k
        self.m = m if m is not None else system.modulus()
        if self.m < system.modulus():
            raise ModelError(
                f"modulus {self.m} below 1 + max constant {system.max_constant()}"
            )
        self.micro = MicroGraph(system)
        self._nop_by_letter: dict = {}
        for tid, tr in self.micro.trans.items():
            if isinstance(tr.op, Nop):
                self._nop_by_letter.setdefault(tr.letter, []).append(tid)
        self._final_states = frozenset(("st", f) for f in system.finals)

    # -- leaves ---------------------------------------------------------------

    def delta_sys_atom(self, color: int, letter: str) -> list:
        """States readable at a single-point leaf: one nop transition is
        guessed and the point is its action."""
        out = []
        for tid in self._nop_by_letter.get(letter, ()):
            src, tgt = self.micro.middle(tid)
            resets = frozenset(self.micro.transition(tid).resets)
            for q in validity.delta_atom(color, self.m, self.k):
                out.append(
                    SystemState(q, (src,), (tgt,), (resets,),
                                frozenset(), frozenset())
                )
        return out

    def _pair_states(self, i: int, j: int, interval: Interval) -> list:
        """Validity states for a constraint over two fresh atoms."""
        out = []
        for t1 in range(self.m):
            for t2 in range(self.m):
                d = (t2 - t1) % self.m
                if interval.contains(d):
                    out.append(ValidityState(
                        (i, j), (False, False), (t1, t2), (True, False)))
                if interval.unbounded:
                    out.append(ValidityState(
                        (i, j), (False, False), (t1, t2), (False, False)))
        return out

    def delta_sys_constraint(
        self, i: int, j: int, interval: Interval, owner: Owner, letters: tuple
    ) -> list:
        """States readable at a constraint-pair leaf, for every
        interpretation the owner tag allows."""
        if not (i < j and 1 <= i <= 2 * self.k and j <= 2 * self.k):
            return []
        out = []
        kinds = {owner.kind} if owner.kind != "untagged" else {
            "zeta", "clock", "stack"}

        if "zeta" in kinds and interval == Interval.zero() and letters == (EPSILON, EPSILON):
            for tid in self.micro.trans:
                src_i, tgt_i = self.micro.zeta_left(tid)
                src_j, tgt_j = self.micro.zeta_right(tid)
                for q in self._pair_states(i, j, interval):
                    out.append(SystemState(
                        q, (src_i, src_j), (tgt_i, tgt_j),
                        (frozenset(), frozenset()), frozenset(), frozenset()))

        if "clock" in kinds and letters == (EPSILON, EPSILON):
            for tid1, tr1 in self.micro.trans.items():
                for clock in tr1.resets:
                    if owner.kind == "clock" and clock != owner.clock:
                        continue
                    stage = self.micro.reset_stage(tid1, clock)
                    for tid2, tr2 in self.micro.trans.items():
                        for t, (x, iv) in enumerate(tr2.guard, start=1):
                            if x != clock or iv != interval:
                                continue
                            src_j, tgt_j = self.micro.guard_stage(tid2, t)
                            for q in self._pair_states(i, j, interval):
                                out.append(SystemState(
                                    q, (stage, src_j), (stage, tgt_j),
                                    (frozenset(), frozenset()),
                                    frozenset({(i, j, clock)}), frozenset()))

        if "stack" in kinds:
            for tid1, tr1 in self.micro.trans.items():
                if not isinstance(tr1.op, Push) or tr1.letter != letters[0]:
                    continue
                for tid2, tr2 in self.micro.trans.items():
                    if not isinstance(tr2.op, Pop) or tr2.letter != letters[1]:
                        continue
                    if tr1.op.stack != tr2.op.stack:
                        continue
                    if owner.kind == "stack" and tr1.op.stack != owner.stack:
                        continue
                    if tr1.op.sym != tr2.op.sym or tr2.op.interval != interval:
                        continue
                    src_i, tgt_i = self.micro.middle(tid1)
                    src_j, tgt_j = self.micro.middle(tid2)
                    for q in self._pair_states(i, j, interval):
                        out.append(SystemState(
                            q, (src_i, src_j), (tgt_i, tgt_j),
                            (frozenset(tr1.resets), frozenset(tr2.resets)),
                            frozenset(),
                            frozenset({(tr1.op.stack, i, j)})))
        return out

    # -- unary rules ----------------------------------------------------------

    def delta_sys_rename(self, st: SystemState, i: int, j: int) -> Optional[SystemState]:
        q2 = validity.delta_rename(st.q, i, j, self.k)
        if q2 is None:
            return None
        swap = lambda c: j if c == i else c
        return SystemState(
            q2, st.src, st.tgt, st.clr,
            frozenset((swap(a), swap(b), x) for a, b, x in st.rgc),
            frozenset((s, swap(a), swap(b)) for s, a, b in st.pp),
        )

    def delta_sys_forget(self, st: SystemState, i: int) -> Optional[SystemState]:
        q2 = validity.delta_forget(st.q, i, self.m)
        if q2 is None:
            return None
        idx = st.q.index(i)
        drop = lambda t: t[:idx] + t[idx + 1:]
        return SystemState(q2, drop(st.src), drop(st.tgt), drop(st.clr),
                           st.rgc, st.pp)

    def delta_sys_add_succ(self, st: SystemState, i: int, j: int) -> Optional[SystemState]:
        q2 = validity.delta_add_succ(st.q, i, j)
        if q2 is None:
            return None
        idx_i, idx_j = st.q.index(i), st.q.index(j)
        if not self.micro.silent_reach(st.tgt[idx_i], st.src[idx_j]):
            return None
        anchor = st.block_left(i)
        a_idx = st.q.index(anchor)
        clr = list(st.clr)
        clr[a_idx] = (clr[a_idx] or frozenset()) | (clr[idx_j] or frozenset())
        clr[idx_j] = None
        swap = lambda c: anchor if c == j else c
        rgc = frozenset(
            (swap(a), swap(b), x)
            for a, b, x in st.rgc
            if {swap(a), swap(b)} != {anchor}
        )
        pp = frozenset(
            (s, swap(a), swap(b))
            for s, a, b in st.pp
            if {swap(a), swap(b)} != {anchor}
        )
        return SystemState(q2, st.src, st.tgt, tuple(clr), rgc, pp)

    # -- combine ----------------------------------------------------------------

    def delta_sys_combine(self, st1: SystemState, st2: SystemState) -> list:
        qs = validity.delta_combine(st1.q, st2.q, self.m, self.k)
        if not qs:
            return []
        merged = qs[0].colors
        of1 = {c: st1.q.index(c) for c in st1.q.colors}
        of2 = {c: st2.q.index(c) for c in st2.q.colors}

        def pick(field1, field2, c):
            return field1[of1[c]] if c in of1 else field2[of2[c]]

        src = tuple(pick(st1.src, st2.src, c) for c in merged)
        tgt = tuple(pick(st1.tgt, st2.tgt, c) for c in merged)
        clr = tuple(pick(st1.clr, st2.clr, c) for c in merged)
        rgc = st1.rgc | st2.rgc
        pp = st1.pp | st2.pp

        index = {c: t for t, c in enumerate(merged)}
        for (a, b, x) in rgc:
            for c in merged:
                if a < c < b and clr[index[c]] and x in clr[index[c]]:
                    # only left endpoints carry clr, so c is one
                    return []
        for (s, a, b) in pp:
            for (s2, c, d) in pp:
                if s == s2 and a < c < b and not d <= b:
                    return []
        return [SystemState(q, src, tgt, clr, rgc, pp) for q in qs]

    # -- acceptance -------------------------------------------------------------

    def is_sys_accepting(self, st: SystemState) -> bool:
        if not validity.is_accepting(st.q):
            return False
        return (
            st.src[0] == ("st", DUMMY_SOURCE)
            and st.tgt[-1] in self._final_states
        )

    # -- membership (reference implementation over explicit terms) --------------

    def reachable_states(self, t: SttTerm) -> frozenset:
        memo: dict = {}
        return self._reach(t, memo)

    def accepts_term(self, t: SttTerm) -> bool:
        return any(self.is_sys_accepting(s) for s in self.reachable_states(t))

    def _reach(self, t: SttTerm, memo: dict) -> frozenset:
        if id(t) in memo:
            return memo[id(t)]
        if isinstance(t, Atom):
            result = frozenset(self.delta_sys_atom(t.color, t.label))
        elif isinstance(t, AddConstraint):
            pair = atomic_pair(t)
            if pair is None:
                result = frozenset()
            else:
                i, j, interval, owner, left, right = pair
                result = frozenset(
                    self.delta_sys_constraint(
                        i, j, interval, owner, (left.label, right.label))
                )
        elif isinstance(t, AddSucc):
            result = frozenset(
                s2 for s in self._reach(t.child, memo)
                for s2 in [self.delta_sys_add_succ(s, t.i, t.j)] if s2
            )
        elif isinstance(t, Forget):
            result = frozenset(
                s2 for s in self._reach(t.child, memo)
                for s2 in [self.delta_sys_forget(s, t.i)] if s2
            )
        elif isinstance(t, Rename):
            result = frozenset(
                s2 for s in self._reach(t.child, memo)
                for s2 in [self.delta_sys_rename(s, t.i, t.j)] if s2
            )
        elif isinstance(t, Combine):
            left = self._reach(t.left, memo)
            right = self._reach(t.right, memo)
            result = frozenset(
                s for sa in left for sb in right
                for s in self.delta_sys_combine(sa, sb)
            )
        else:
            raise ModelError(f"unknown term node {t!r}")
        memo[id(t)] = result
        return result
