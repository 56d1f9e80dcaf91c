"""Seeded random generators for systems, runs, words, and terms.

Everything here is test scaffolding: the core pipeline has no
randomness.  All generators take an explicit seed or Random instance so
corpora are reproducible.
"""

from __future__ import annotations

import random
from typing import Optional

from . import decompose, systems
from .stt import SttTerm
from .systems import Nop, Pop, Push, TimedSystem, Transition
from .tcw import Constraint, Interval, Owner, Stcw, UNTAGGED


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_interval(rng: random.Random, m: int, unbounded_ok: bool = True) -> Interval:
    lo = rng.randrange(0, m)
    if unbounded_ok and rng.random() < 0.3:
        return Interval(lo, None)
    return Interval(lo, rng.randrange(lo, m))


def random_system(
    seed,
    kind: str = "ta",
    n_states: int = 3,
    n_clocks: int = 1,
    stacks: int = 0,
    rounds: Optional[int] = None,
    n_transitions: int = 5,
    max_const: int = 2,
    alphabet: tuple = ("a", "b"),
) -> TimedSystem:
    """A random system of the given shape; accepting runs not guaranteed."""
    rng = _rng(seed)
    m = max_const + 1
    states = tuple(f"s{i}" for i in range(n_states))
    clocks = tuple(f"x{i}" for i in range(n_clocks))
    stack_alphabet = ("A", "B")
    transitions = []
    for _ in range(n_transitions):
        source = rng.choice(states)
        target = rng.choice(states)
        letter = rng.choice(alphabet + ("",))
        guard = tuple(
            (clock, random_interval(rng, m))
            for clock in clocks
            if rng.random() < 0.4
        )
        resets = tuple(c for c in clocks if rng.random() < 0.4)
        op: object = Nop()
        if stacks and rng.random() < 0.5:
            stack = rng.randrange(1, stacks + 1)
            sym = rng.choice(stack_alphabet)
            if rng.random() < 0.5:
                op = Push(stack, sym)
            else:
                op = Pop(stack, sym, random_interval(rng, m))
        transitions.append(
            Transition(source, target, letter, guard, resets, op)
        )
    return TimedSystem(
        kind=kind,
        states=states,
        initial=states[0],
        finals=frozenset({states[-1]}),
        clocks=clocks,
        stacks=stacks,
        rounds=rounds,
        alphabet=alphabet,
        stack_alphabet=stack_alphabet,
        transitions=tuple(transitions),
    )


def random_accepting_run(system: TimedSystem, seed, max_len: int = 12,
                         tries: int = 200) -> Optional[list]:
    """A random structurally accepting run (chained, nested, final)."""
    rng = _rng(seed)
    by_source: dict = {}
    for idx, tr in enumerate(system.transitions):
        by_source.setdefault(tr.source, []).append(idx)
    for _ in range(tries):
        state = system.initial
        stacks: dict = {}
        run: list = []
        round_ctx = (1, 1)
        for _ in range(max_len):
            if (
                state in system.finals
                and not any(stacks.values())
                and run
                and rng.random() < 0.4
            ):
                return run
            options = by_source.get(state, [])
            rng.shuffle(options := list(options))
            moved = False
            for idx in options:
                tr = system.transitions[idx]
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
                    if isinstance(tr.op, Pop):
                        top = stacks.get(s, ())
                        if not top or top[-1] != tr.op.sym:
                            continue
                        stacks[s] = top[:-1]
                    else:
                        stacks[s] = stacks.get(s, ()) + (tr.op.sym,)
                run.append(idx)
                state = tr.target
                round_ctx = rc
                moved = True
                break
            if not moved:
                break
        if state in system.finals and not any(stacks.values()) and run:
            return run
    return None


def random_system_word(seed, kind: str = "ta", n_clocks: int = 1,
                       stacks: int = 0, rounds: Optional[int] = None,
                       max_len: int = 10) -> Optional[Stcw]:
    """The word of a random accepting run of a random system."""
    rng = _rng(seed)
    for attempt in range(40):
        system = random_system(
            rng, kind=kind, n_clocks=n_clocks, stacks=stacks, rounds=rounds,
            n_states=rng.randrange(2, 5),
            n_transitions=rng.randrange(3, 8),
        )
        run = random_accepting_run(system, rng, max_len=max_len)
        if run is None:
            continue
        try:
            return systems.sem_stcw(system, run)
        except Exception:
            continue
    return None


def random_simple_word(seed, max_len: int = 8, m: int = 4) -> Stcw:
    """A random simple word with untagged constraint pairs (for the
    realizability oracle tests)."""
    rng = _rng(seed)
    n = rng.randrange(1, max_len + 1)
    labels = tuple(rng.choice("ab") for _ in range(n))
    free = list(range(n))
    rng.shuffle(free)
    constraints = []
    while len(free) >= 2 and rng.random() < 0.75:
        u, v = free.pop(), free.pop()
        if u > v:
            u, v = v, u
        constraints.append(
            Constraint(u, v, random_interval(rng, m), UNTAGGED)
        )
    return Stcw(labels, tuple(constraints))


def random_split_tree(word: Stcw, seed) -> Optional[decompose.SplitTree]:
    """A random valid play of the split game on a simple word (any edge
    cuts, not the deterministic strategy); None if a dead end is hit."""
    from .decompose import SplitNode, SplitTree, _components, _is_atomic

    rng = _rng(seed)

    def build(positions, edges):
        if _is_atomic(word, positions, edges):
            return SplitNode(positions, edges, "leaf")
        if not edges:
            return None
        cut = rng.choice(sorted(edges))
        node = SplitNode(positions, edges, "unary", cut=cut)
        rest = edges - {cut}
        comps = _components(word, positions, rest)
        if len(comps) == 1:
            child = build(positions, rest)
            if child is None:
                return None
            node.children.append(child)
            return node
        subnodes = []
        for comp in comps:
            cs = set(comp)
            sub = build(
                comp, frozenset(e for e in rest if e[0] in cs and e[1] in cs)
            )
            if sub is None:
                return None
            subnodes.append(sub)
        chain = subnodes[-1]
        for sub in reversed(subnodes[:-1]):
            parent = SplitNode(
                tuple(sorted(sub.positions + chain.positions)),
                sub.edges | chain.edges,
                "binary",
            )
            parent.children = [sub, chain]
            chain = parent
        node.children.append(chain)
        return node

    positions = tuple(range(word.n))
    edges = frozenset((i, i + 1) for i in range(word.n - 1))
    root = build(positions, edges)
    return SplitTree(word, root) if root is not None else None


def random_monotone_term(seed, k: int, m: int, max_len: int = 6) -> Optional[SttTerm]:
    """A random monotone bounded term: compile a random play over a
    random simple word, retrying until the width fits."""
    rng = _rng(seed)
    for _ in range(60):
        word = random_simple_word(rng, max_len=max_len, m=m)
        tree = random_split_tree(word, rng)
        if tree is None or tree.width > k:
            continue
        return decompose.split_tree_to_stt(tree, k)
    return None
