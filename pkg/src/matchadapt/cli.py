"""Command-line interface.

Subcommands: ``check`` (stability report), ``rotations`` (rotation digraph
summary and DOT export), ``adapt`` (adaptation queries), and ``gen``
(instance generators).  Exit codes: 0 success/feasible, 1
infeasible/unstable, 2 input error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .adapt_sm import adapt_sm
from .adapt_sr import adapt
from .core import (
    AdaptQuery,
    Infeasible,
    Matching,
    StabilityNotion,
    blocking_pairs,
    complete_with_dummies,
    is_stable,
    pair_of,
)
from .errors import (
    InstanceTooLarge,
    MatchAdaptError,
    NoStableMatching,
    NotStable,
    ResourceExhausted,
    ValidationError,
)
from .fileio import (
    emit_instance,
    emit_matching,
    emit_query,
    parse_graph,
    parse_instance,
    parse_matching,
    parse_query,
    poset_to_dot,
)
from .gen import (
    independent_set_gadget,
    local_search_forbidden_gadget,
    local_search_forced_gadget,
    random_instance,
)
from .oracle import oracle_adapt
from .rotations import build_rotation_poset, first_stable_matching

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_instance(path: str):
    return parse_instance(_read(path))


def cmd_check(args) -> int:
    instance = _load_instance(args.instance)
    matching = parse_matching(_read(args.matching), instance)
    blocking = blocking_pairs(instance, matching, StabilityNotion(args.notion))
    if not blocking:
        print("STABLE")
        return EXIT_OK
    for a, b in sorted(blocking):
        print(f"BLOCKING {instance.names[a]} {instance.names[b]}")
    return EXIT_NEGATIVE


def cmd_rotations(args) -> int:
    instance = _load_instance(args.instance)
    # The poset machinery requires every stable matching to be complete;
    # completing against some stable matching makes that hold without
    # changing the rotations.
    m0 = first_stable_matching(instance)
    aug, _ = complete_with_dummies(instance, m0)
    poset = build_rotation_poset(aug)
    names = aug.names
    n_prec = sum(len(s) for s in poset.preds)
    print(f"rotations = {len(poset.rotations)}")
    print(f"singular = {len(poset.singular_ids)}")
    print(f"dual_pairs = {len(poset.dual_pairs)}")
    print(f"precedence_edges = {n_prec}")
    for rot in poset.rotations:
        cyc = " ".join(f"({names[i]},{names[j]})" for i, j in rot.cycle)
        print(f"r{rot.rid}: {cyc}")
    for rid, dual_rid in poset.dual_pairs:
        print(f"dual r{rid} r{dual_rid}")
    for rid in range(len(poset.rotations)):
        for succ in sorted(poset.succs[rid]):
            print(f"prec r{rid} -> r{succ}")
    if args.dot:
        Path(args.dot).write_text(poset_to_dot(poset), encoding="utf-8")
        print(f"wrote {args.dot}")
    return EXIT_OK


def _parse_pair_flag(instance, value: str):
    parts = value.split(",")
    if len(parts) != 2:
        raise ValidationError([f"expected '<name>,<name>', got {value!r}"])
    return pair_of(instance.index_of(parts[0].strip()), instance.index_of(parts[1].strip()))


def cmd_adapt(args) -> int:
    instance = _load_instance(args.instance)
    if args.query:
        if args.m1 or args.forced or args.forbidden or args.k is not None:
            raise ValidationError(["--query replaces the m1 file and --forced/--forbidden/--k"])
        query = parse_query(_read(args.query), instance)
    else:
        if not args.m1:
            raise ValidationError(["an m1 matching file (or --query) is required"])
        m1 = parse_matching(_read(args.m1), instance)
        try:
            forced = [_parse_pair_flag(instance, v) for v in args.forced]
            forbidden = [_parse_pair_flag(instance, v) for v in args.forbidden]
        except KeyError as exc:
            raise ValidationError([exc.args[0]]) from None
        query = AdaptQuery.make(m1, forced, forbidden, args.k if args.k is not None else 0)

    notion = StabilityNotion(args.notion)
    if not is_stable(instance, query.m1, notion):
        raise ValidationError(["m1 is not stable under the requested notion"])

    if notion is not StabilityNotion.STRICT or not instance.is_strict or args.oracle:
        result = oracle_adapt(instance, query, notion)
    elif instance.kind == "sm":
        result = adapt_sm(instance, query)
        if args.verify:
            other = adapt(instance, query)
            d1 = None if isinstance(result, Infeasible) else len(result.pairs ^ query.m1.pairs)
            d2 = None if isinstance(other, Infeasible) else len(other.pairs ^ query.m1.pairs)
            if d1 != d2:
                raise MatchAdaptError(
                    f"verification mismatch: weight-based delta {d1}, rotation-based delta {d2}"
                )
            print("verified")
    else:
        result = adapt(instance, query)

    if isinstance(result, Infeasible):
        print(f"INFEASIBLE: {result.reason}")
        return EXIT_NEGATIVE
    for a, b in result.sorted_pairs():
        print(f"{instance.names[a]} {instance.names[b]}")
    print(f"delta = {len(result.pairs ^ query.m1.pairs)}")
    rk = instance.rank_matrix
    for a, b in sorted(query.forbidden & query.m1.pairs):
        pa = result.partner(a)
        improver = a if pa is not None and rk[a][pa] < rk[a][b] else b
        print(
            f"guess {{{instance.names[a]},{instance.names[b]}}}: "
            f"{instance.names[improver]} improves"
        )
    return EXIT_OK


def _write_outputs(args, instance, query, header: str) -> int:
    text = emit_instance(instance, header=header)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    if query is not None:
        qtext = emit_query(instance, query, header=header)
        if args.query_out:
            Path(args.query_out).write_text(qtext, encoding="utf-8")
            print(f"wrote {args.query_out}")
        else:
            sys.stdout.write(qtext)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.generator == "random":
        instance = random_instance(
            args.n, args.kind, args.ties, args.density, args.seed
        )
        header = (
            f"matchadapt gen random --n {args.n} --kind {args.kind} "
            f"--ties {args.ties} --density {args.density} --seed {args.seed}"
        )
        return _write_outputs(args, instance, None, header)
    if args.generator == "is-gadget":
        graph = parse_graph(_read(args.graph))
        instance, query = independent_set_gadget(graph, args.ell)
        header = f"matchadapt gen is-gadget --graph {args.graph} --ell {args.ell}"
        return _write_outputs(args, instance, query, header)
    base = _load_instance(args.base)
    n_matching = parse_matching(_read(args.n_matching), base)
    gadget = (
        local_search_forced_gadget
        if args.generator == "ls-forced-gadget"
        else local_search_forbidden_gadget
    )
    instance, query = gadget(base, n_matching, args.ell)
    header = (
        f"matchadapt gen {args.generator} --base {args.base} "
        f"--n-matching {args.n_matching} --ell {args.ell}"
    )
    return _write_outputs(args, instance, query, header)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchadapt",
        description="Stable matchings, rotation posets, and adaptation to forced/forbidden pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a matching for stability")
    p.add_argument("instance")
    p.add_argument("matching")
    p.add_argument("--notion", choices=["strict", "weak", "strong"], default="strict")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rotations", help="summarize the rotation digraph")
    p.add_argument("instance")
    p.add_argument("--dot", help="write the digraph in DOT format to this path")
    p.set_defaults(func=cmd_rotations)

    p = sub.add_parser("adapt", help="adapt a stable matching to forced/forbidden pairs")
    p.add_argument("instance")
    p.add_argument("m1", nargs="?", help="matching file for m1")
    p.add_argument("--query", help="query file providing m1, forced, forbidden, and k")
    p.add_argument("--forced", action="append", default=[], metavar="A,B")
    p.add_argument("--forbidden", action="append", default=[], metavar="A,B")
    p.add_argument("--k", type=int)
    p.add_argument("--notion", choices=["strict", "weak", "strong"], default="strict")
    p.add_argument("--oracle", action="store_true", help="force the exhaustive solver")
    p.add_argument(
        "--verify",
        action="store_true",
        help="cross-check the marriage solver against the roommates solver",
    )
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("gen", help="generate instances")
    gsub = p.add_subparsers(dest="generator", required=True)

    g = gsub.add_parser("random")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--kind", choices=["sr", "sm"], default="sr")
    g.add_argument("--ties", type=float, default=0.0)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.add_argument("--query-out", dest="query_out")
    g.set_defaults(func=cmd_gen)

    g = gsub.add_parser("is-gadget")
    g.add_argument("--graph", required=True, help="edge-list graph file")
    g.add_argument("--ell", type=int, required=True)
    g.add_argument("--out")
    g.add_argument("--query-out", dest="query_out")
    g.set_defaults(func=cmd_gen)

    for name in ("ls-forced-gadget", "ls-forbidden-gadget"):
        g = gsub.add_parser(name)
        g.add_argument("--base", required=True, help="marriage instance file")
        g.add_argument("--n-matching", dest="n_matching", required=True)
        g.add_argument("--ell", type=int, required=True)
        g.add_argument("--out")
        g.add_argument("--query-out", dest="query_out")
        g.set_defaults(func=cmd_gen)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError, OSError, NotStable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InstanceTooLarge, ResourceExhausted) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NoStableMatching as exc:
        print(f"no stable matching: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except MatchAdaptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
