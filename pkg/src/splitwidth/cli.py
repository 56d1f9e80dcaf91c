"""Command-line front end.

Exit codes: 0 for positive verdicts, 1 for negative verdicts (empty,
unrealizable, not well-timed), 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import decompose, emptiness, stt, systems, tcw
from .errors import SplitwidthError, Unrealizable, WellTimedViolation


def _read_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _write(path: Optional[str], text: str):
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _cmd_check(args) -> int:
    system = systems.system_from_json(_read_json(args.model))
    result = emptiness.check_emptiness(system, k=args.k, m=args.m)
    print(f"{result.verdict} (K={result.k}, M={result.m}, "
          f"states={result.states_explored})")
    if args.witness and result.witness:
        _write(args.witness, json.dumps(result.to_json(), indent=2) + "\n")
    if args.dot and result.witness:
        _write(args.dot, tcw.stcw_to_dot(result.witness.stcw, "witness"))
    if result.witness:
        print(emptiness.witness_to_run(result.witness))
    return 0 if result.verdict == "nonempty" else 1


def _cmd_realize(args) -> int:
    word = tcw.stcw_from_json(_read_json(args.stcw))
    try:
        ts = tcw.realize(word)
    except Unrealizable as exc:
        print("unrealizable")
        for src, tgt, tag in exc.cycle:
            print(f"  {src} -> {tgt} via {tag}")
        return 1
    print("realizable")
    print(json.dumps({"timestamps": list(ts)}))
    return 0


def _cmd_decompose(args) -> int:
    word = tcw.stcw_from_json(_read_json(args.stcw))
    clocks = _clock_names(word)
    if args.kind == "ta":
        tree = decompose.decompose_ta(word, clocks)
    elif args.kind == "tpda":
        tree = decompose.decompose_tpda(word, clocks)
    else:
        tree = decompose.decompose_mpda(word, args.stacks, args.rounds, clocks)
    bound = decompose.required_width(
        args.kind, len(clocks - {tcw.ZETA_NAME}), args.stacks, args.rounds
    )
    print(f"width {tree.width} (bound {bound})")
    if args.dot:
        _write(args.dot, decompose.split_tree_to_dot(tree))
    if args.json:
        _write(args.json,
               json.dumps(decompose.split_tree_to_json(tree), indent=2) + "\n")
    return 0


def _clock_names(word: tcw.Stcw) -> set:
    return {
        c.owner.clock_key()
        for c in word.constraints
        if c.owner.clock_key() is not None
    }


def _cmd_eval(args) -> int:
    with open(args.term, "r", encoding="utf-8") as handle:
        term = stt.parse_term(handle.read().strip())
    graph = stt.eval_term(term)
    try:
        word = graph.as_stcw()
        print(json.dumps(tcw.stcw_to_json(word), indent=2))
        if args.dot:
            _write(args.dot, tcw.stcw_to_dot(word, "evaluated"))
    except SplitwidthError:
        print(json.dumps({
            "labels": list(graph.labels),
            "succ": sorted(list(e) for e in graph.succ),
            "chi": [list(pair) for pair in graph.chi],
        }, indent=2))
    return 0


def _cmd_validate(args) -> int:
    word = tcw.stcw_from_json(_read_json(args.stcw))
    clocks = set(args.clocks or [])
    try:
        partition = tcw.check_well_timed(
            word, clocks, stacks=args.stacks, rounds=args.rounds
        )
    except WellTimedViolation as exc:
        print(f"not well-timed: {exc}")
        return 1
    print(f"well-timed; {partition.rounds} round(s)")
    for ctx in partition.contexts:
        print(f"  round {ctx.round_no} stack {ctx.stack}: "
              f"positions {ctx.positions[0]}..{ctx.positions[-1]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitwidth",
        description="Timed-system emptiness via split-width and tree automata",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide emptiness of a system model")
    p.add_argument("model")
    p.add_argument("--witness", help="write the witness JSON here")
    p.add_argument("--dot", help="write the witness word as DOT")
    p.add_argument("--k", type=int, help="width bound override (>= derived)")
    p.add_argument("--m", type=int, help="modulus override (>= derived)")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("realize", help="solve the timing constraints of a word")
    p.add_argument("stcw")
    p.set_defaults(func=_cmd_realize)

    p = sub.add_parser("decompose", help="split-decompose a word")
    p.add_argument("stcw")
    p.add_argument("--kind", choices=["ta", "tpda", "dtmpda"], required=True)
    p.add_argument("--stacks", type=int, default=0)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--dot", help="write the split-tree as DOT")
    p.add_argument("--json", help="write the split-tree as JSON")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("eval", help="evaluate a term file")
    p.add_argument("term")
    p.add_argument("--dot", help="write the evaluated word as DOT")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("validate", help="check well-timedness of a word")
    p.add_argument("stcw")
    p.add_argument("--clocks", nargs="*", default=[])
    p.add_argument("--stacks", type=int, default=0)
    p.add_argument("--rounds", type=int, default=1)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SplitwidthError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
