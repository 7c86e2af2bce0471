"""Command line: check, census, trees, tables.

Exit status: 0 success, 1 a table mismatch or a refused run, 2 bad input,
3 a (d) search that stopped at its level ceiling without an answer.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import __version__
from .words import CycleParseError, DomainError, parse_cycles

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# acceptance tier of a census run per shape, used to refuse surprise long runs
_TIER_OF_SHAPE = {(2, 2): 0, (2, 3): 0, (3, 2): 1, (2, 4): 2, (4, 2): 3, (3, 3): 4}
# rough single-core cost per tier
_ESTIMATE = {0: "under a second", 1: "under a minute", 2: "a few minutes", 3: "a few minutes",
             4: "about ten minutes for (b), hours for fiber (d) counts",
             5: "unknown, possibly days", 6: "CPU-years"}


def _csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _emit(args, payload: dict, text: str, rows: list[dict] | None = None):
    if args.format == "json":
        out = json.dumps(payload, sort_keys=True, indent=1)
    elif args.format == "csv":
        out = _csv(rows if rows is not None else
                   [{"key": k, "value": json.dumps(v)} for k, v in sorted(payload.items())])
    else:
        out = text
    if args.out:
        with open(args.out, "w") as f:
            f.write(out + "\n")
    else:
        print(out)


def _subject(args):
    """The permutation named by --perm or --construction."""
    from .constructions import REGISTRY, PsiData, psi

    if bool(args.perm) == bool(args.construction):
        raise DomainError("give exactly one of --perm and --construction")
    if args.perm:
        if args.n is None or args.k is None:
            raise DomainError("--perm needs --n and --k")
        return parse_cycles(args.perm, args.n, args.k)
    if args.construction == "psi":
        if not args.data:
            raise DomainError("--construction psi needs --data FILE")
        with open(args.data) as f:
            return psi(PsiData.from_json(f.read()))
    if args.construction not in REGISTRY:
        raise DomainError(f"unknown construction {args.construction!r}; "
                          f"known: psi, {', '.join(REGISTRY)}")
    return REGISTRY[args.construction]()


def cmd_check(args) -> int:
    from .endo import Automorphism, check_d, decide_d
    from .shapes import ShapeCatalog
    from .transducer import decide_b, find_witness
    from .trees import tuple_of
    from .words import format_cycles

    sigma = _subject(args)
    args.n, args.k = sigma.n, sigma.k
    b = decide_b(sigma)
    payload = {"n": args.n, "k": args.k, "perm": format_cycles(sigma), "b": b}
    lines = [f"permutation {format_cycles(sigma)} in P_{args.n}^{args.k}", f"(b) {str(b).lower()}"]
    status = EXIT_OK
    if b:
        if args.max_level is None:
            cert = decide_d(sigma)
            res = check_d(sigma)
            payload["level_bound"] = cert.level_bound
        else:
            res = check_d(sigma, args.max_level)
        payload["d"] = res.to_dict()
        if isinstance(res, Automorphism):
            lines.append(f"(d) true at level {res.m}, inverse {format_cycles(res.inverse)}")
        elif getattr(res, "certified", False):
            lines.append("(d) false")
        else:
            lines.append(f"(d) not found up to level {res.M}")
            status = EXIT_INCONCLUSIVE
    else:
        payload["d"] = {"status": "not-found", "certified": True}
        w = find_witness(sigma)
        payload["witness"] = w.to_text()
        lines.append("(d) false")
        lines.append("collision witness:")
        lines.extend("  " + ln for ln in w.to_text().splitlines())
    if args.k >= 2:
        tup = tuple_of(sigma)
        trees = [[x + 1 for x in t] for t in tup.trees]
        payload["trees"] = trees
        if b and tup.vertices <= 16:
            numbering = None
            if (tup.vertices, args.n) == (9, 3):
                from .tables import figure_numbering
                numbering = figure_numbering()
            cat = ShapeCatalog(tup.vertices, args.n, numbering)
            names = [cat.info(t).name for t in tup.trees]
            payload["shapes"] = names
            payload["type"] = "".join(sorted(x[0] for x in names))
            lines.append(f"trees {' '.join(names)} (type {payload['type']})")
        for i, t in enumerate(trees, 1):
            lines.append(f"  t_{i}: {' '.join(map(str, t))}")
    _emit(args, payload, "\n".join(lines))
    return status


def _check_budget(args, tier_needed: int):
    if tier_needed > args.tier and not args.checkpoint:
        raise _Refused(f"this run needs --tier {tier_needed} (or --checkpoint); "
                       f"current tier is {args.tier}; estimated cost "
                       f"{_ESTIMATE.get(tier_needed, 'unknown')}")


class _Refused(Exception):
    pass


def cmd_census(args) -> int:
    from .census import census_b, census_d, outer_classes

    checks = set(args.check.split(","))
    if not checks <= {"b", "d"}:
        raise DomainError("--check takes b, d or b,d")
    n, k = args.n, args.k
    exhaustive_ok = n ** k <= 9
    mode = args.mode or ("exhaustive" if exhaustive_ok else "tuples")
    tier = _TIER_OF_SHAPE.get((n, k), 5)
    if "d" in checks and (n, k) == (3, 3) and args.scope != "tuple-list":
        tier = 6
    _check_budget(args, tier)
    report = None
    if "d" in checks:
        scope = args.scope or ("all" if mode == "exhaustive" else "orbit-reps")
        tuples = None
        if scope == "tuple-list":
            from .trees import LabeledTuple
            with open(args.tuples) as f:
                tuples = [LabeledTuple.from_json(line) for line in f if line.strip()]
        report = census_d(n, k, scope, tuples=tuples, max_level=args.max_level, jobs=args.jobs,
                          checkpoint=args.checkpoint, seed=args.seed)
        if "b" in checks and report.b_count is None:
            report.b_count = census_b(n, k, "tuples").b_count
        if report.freeness and report.freeness["checked"]:
            try:
                outer_classes(report)
            except RuntimeError as e:
                logging.warning("%s", e)
    else:
        report = census_b(n, k, mode, jobs=args.jobs, checkpoint=args.checkpoint)
    report.config["run"] = {"check": sorted(checks), "mode": mode, "jobs_independent": True}
    text = [f"P_{n}^{k}"]
    for label, val in (("(b)", report.b_count), ("(d)", report.d_count), ("outer", report.outer)):
        if val is not None:
            text.append(f"{label} {val}")
    if report.max_inverse_level:
        text.append(f"max inverse level {report.max_inverse_level}")
    if report.stragglers:
        text.append(f"stragglers {len(report.stragglers)}")
    payload = json.loads(report.to_json())
    rows = [{"rep": json.dumps(o["rep"]), "shapes": " ".join(o.get("shapes", [])),
             **{c: o.get(c) for c in ("size", "fiber", "b", "d_count", "d_per_element")}}
            for o in report.orbits] or [{"b": report.b_count, "d": report.d_count,
                                          "outer": report.outer}]
    _emit(args, payload, "\n".join(text), rows)
    return EXIT_INCONCLUSIVE if report.stragglers else EXIT_OK


def cmd_trees(args) -> int:
    from .shapes import ShapeCatalog, alignment_census, enumerate_shapes

    v, d = args.vertices, args.max_indegree
    total = len(enumerate_shapes(v))
    cat = ShapeCatalog(v, d)
    per_type: dict = {}
    for s in cat.infos:
        per_type.setdefault(s.letter, {"vector": list(s.type_vector), "trees": 0})
        per_type[s.letter]["trees"] += 1
    payload = {"vertices": v, "max_indegree": d, "rooted_trees": total,
               "admissible": len(cat), "types": per_type}
    lines = [f"{total} rooted trees on {v} vertices, {len(cat)} with in-degree <= {d}, "
             f"{len(per_type)} in-degree types"]
    if args.classify:
        for L, info in per_type.items():
            lines.append(f"  {L} {' '.join(map(str, info['vector']))}  {info['trees']}")
    if args.alignments:
        al = alignment_census(v, d, args.alignments)
        payload["alignments"] = {"".join(key): c for key, c in al.items()}
        lines.append(f"{len(al)} type multisets of size {args.alignments} admit an alignment, "
                     f"{sum(al.values())} alignments")
    rows = [{"type": L, "vector": " ".join(map(str, info["vector"])), "trees": info["trees"]}
            for L, info in per_type.items()]
    _emit(args, payload, "\n".join(lines), rows)
    return EXIT_OK


def cmd_tables(args) -> int:
    from .tables import TABLE_IDS, reproduce_table

    ids = list(TABLE_IDS) if args.reproduce == "all" else [args.reproduce]
    diffs = [reproduce_table(t, args.tier, args.jobs) for t in ids]
    payload = {"tables": [d.to_dict() for d in diffs]}
    lines = []
    for d in diffs:
        state = "skipped" if d.skipped and not d.cells and TABLE_IDS[d.table] > args.tier else (
            "ok" if d.ok else f"{len(d.cells)} cells differ")
        lines.append(f"{d.table}: {state}")
        for r, c, e, g in d.cells[:args.show]:
            lines.append(f"  row {r} {c}: expected {e}, got {g}")
    rows = [{"table": d.table, "row": r, "column": c, "expected": e, "got": g}
            for d in diffs for r, c, e, g in d.cells]
    _emit(args, payload, "\n".join(lines), rows)
    return EXIT_OK if all(d.ok for d in diffs) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuntzperm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--tier", type=int, default=3,
                        help="largest acceptance tier this run may enter (0-4)")
        sp.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("check", help="decide (b) and (d) for one permutation")
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--perm", help='cycle notation on ranks, e.g. "(4, 7)"')
    c.add_argument("--construction", help="named construction: psi, mt, mt-psi, mt-psi-bar, "
                                           "z2z3-phi, z2z3-psi, flip-flop")
    c.add_argument("--data", help="JSON file of psi data for --construction psi")
    c.add_argument("--max-level", type=int, help="cap the inverse search (default: certified bound)")
    common(c)
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("census", help="count (b) and (d) permutations")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--check", default="b", help="b, d or b,d")
    s.add_argument("--mode", choices=("exhaustive", "tuples"))
    s.add_argument("--scope", choices=("all", "orbit-reps", "tuple-list"))
    s.add_argument("--tuples", help="JSON-lines file of tuples for --scope tuple-list")
    s.add_argument("--max-level", type=int)
    s.add_argument("--checkpoint", help="JSON-lines checkpoint to create or resume")
    common(s)
    s.set_defaults(func=cmd_census)

    t = sub.add_parser("trees", help="rooted trees, in-degree types and alignments")
    t.add_argument("--vertices", type=int, required=True)
    t.add_argument("--max-indegree", type=int, required=True)
    t.add_argument("--classify", action="store_true")
    t.add_argument("--alignments", type=int, metavar="ROWS",
                   help="also count alignments of type multisets of this size")
    common(t)
    t.set_defaults(func=cmd_trees)

    r = sub.add_parser("tables", help="recompute shipped tables and diff them")
    r.add_argument("--reproduce", required=True, help="table id or 'all'")
    r.add_argument("--show", type=int, default=20, help="differing cells to print per table")
    common(r)
    r.set_defaults(func=cmd_tables)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    if not hasattr(args, "checkpoint"):
        args.checkpoint = None
    try:
        return args.func(args)
    except CycleParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as e:  # DomainError is a ValueError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except _Refused as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
