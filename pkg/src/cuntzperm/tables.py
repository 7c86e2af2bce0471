"""Reference tables shipped under ``data/`` and decoders for their tree notation.

Two notations appear in the tables:

* four-vertex trees such as ``Lcdba``: a shape letter (W star, L, Y, I chain)
  followed by vertex labels a..d in drawing order, the root first;
* nine-vertex trees such as ``AABCCCBBA ghiabcdef``: a drawing name followed
  by the labels a..i placed in drawing order.

Label a is vertex 0, b is vertex 1 and so on, which agrees with the rank
order of the vertex words.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from importlib import resources

from .trees import LabeledTuple
from .words import DomainError

# drawing slot -> parent slot (1-based); None marks the root
FOUR_VERTEX_DRAWINGS = {
    "W": {1: None, 2: 1, 3: 1, 4: 1},
    "L": {1: None, 2: 1, 3: 2, 4: 1},
    "Y": {1: None, 2: 1, 3: 2, 4: 2},
    "I": {1: None, 2: 1, 3: 2, 4: 3},
}

NINE_VERTEX_DRAWINGS = {
    "AAABBBCCC": {1: None, 2: 1, 3: 1, 4: 2, 5: 2, 6: 2, 7: 3, 8: 3, 9: 3},
    "AABCCCBBA": {1: None, 2: 1, 9: 1, 3: 2, 7: 2, 8: 2, 4: 3, 5: 3, 6: 3},
    "ECCBDDEFF": {3: None, 2: 3, 4: 2, 5: 4, 6: 4, 1: 5, 7: 5, 8: 6, 9: 6},
    "AABCDEFFF": {1: None, 2: 1, 3: 2, 4: 3, 5: 4, 6: 5, 7: 6, 8: 6, 9: 6},
    "AABCDEFEE": {1: None, 2: 1, 3: 2, 4: 3, 5: 4, 8: 5, 6: 5, 9: 5, 7: 6},
}


def _place(drawing: dict, labels: str) -> tuple[int, ...]:
    if len(labels) != len(drawing):
        raise DomainError(f"expected {len(drawing)} labels, got {labels!r}")
    lab = [ord(c) - ord("a") for c in labels]
    if sorted(lab) != list(range(len(lab))):
        raise DomainError(f"labels {labels!r} are not a permutation")
    t = [0] * len(lab)
    for slot, parent in drawing.items():
        v = lab[slot - 1]
        t[v] = v if parent is None else lab[parent - 1]
    return tuple(t)


def decode_four(text: str) -> tuple[int, ...]:
    """``Lcdba`` -> parent map on 4 vertices."""
    if text[:1] not in FOUR_VERTEX_DRAWINGS:
        raise DomainError(f"unknown drawing {text[:1]!r}")
    return _place(FOUR_VERTEX_DRAWINGS[text[0]], text[1:])


def decode_nine(text: str) -> tuple[int, ...]:
    """``AABCCCBBA ghiabcdef`` -> parent map on 9 vertices."""
    name, labels = text.split()
    if name not in NINE_VERTEX_DRAWINGS:
        raise DomainError(f"unknown drawing {name!r}")
    return _place(NINE_VERTEX_DRAWINGS[name], labels)


def _read(name: str) -> str:
    return resources.files("cuntzperm").joinpath("data", name).read_text()


def read_csv(name: str) -> list[dict]:
    """Rows of a shipped table; leading ``#`` lines are provenance comments."""
    body = "".join(ln for ln in io.StringIO(_read(name)) if not ln.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


@lru_cache(maxsize=None)
def trees171() -> list[dict]:
    return json.loads(_read("p33_trees171.json"))["trees"]


def figure_numbering() -> dict[str, list]:
    """Order of shape codes within each type letter, as drawn in the shipped figure."""
    from .shapes import code_of

    out: dict[str, list] = {}
    for t in trees171():
        out.setdefault(t["type"], []).append(code_of(t["parents"]))
    return out


def p42_rows() -> list[dict]:
    rows = []
    for r in read_csv("p42_labeled.csv"):
        rows.append(dict(
            tuple=LabeledTuple.of(4, 2, [decode_four(x) for x in r["trees"].split()]),
            trees=r["trees"],
            orbit=int(r["orbit"]),
            label_orbits=int(r["label_orbits"]),
            d=int(r["d_per_element"]),
            example=r["example"] or None,
        ))
    return rows


def p42_type_rows() -> list[dict]:
    return [dict(type=r["type"], labeled=int(r["labeled"]),
                 unlabeled=int(r["unlabeled_tuples"]), labelings=int(r["labelings"]),
                 orbits=int(r["orbits"]), d=int(r["d"]))
            for r in read_csv("p42_types.csv")]


def p33_example_rows() -> list[dict]:
    rows = []
    for r in read_csv("p33_examples.csv"):
        trees = [r["tree1"], r["tree2"], r["tree3"]]
        rows.append(dict(
            tuple=LabeledTuple.of(3, 3, [decode_nine(x) for x in trees]),
            trees=trees, s=int(r["s"]), d=int(r["d"]), example=r["example"] or None))
    return rows


def p33_type_rows() -> list[dict]:
    return [dict(type=r["type"], vector=tuple(int(r[f"deg{j}"]) for j in range(4)),
                 trees=int(r["trees"]))
            for r in read_csv("p33_indegree_types.csv")]


def p33_multiset_rows() -> list[dict]:
    return [dict(types=r["types"], tree_triples=int(r["tree_triples"]),
                 representatives=int(r["representatives"]), covered=int(r["covered"]))
            for r in read_csv("p33_multisets.csv")]


def p33_appendix_rows() -> list[dict]:
    return [dict(types=r["types"], names=tuple(f"{L}{r[c]}" for L, c in
                                               zip(r["types"], ("first", "second", "third"))),
                 s=int(r["s"]), count=int(r["count"]))
            for r in read_csv("p33_appendix.csv")]


# reproduction

TABLE_IDS = {
    "p33-types": 2,
    "p33-examples": 2,
    "p42-labeled": 3,
    "p42-types": 3,
    "p33-multisets": 4,
    "p33-appendix": 4,
    "p33-examples-d": 4,
}


@dataclass
class TableDiff:
    table: str
    cells: list = field(default_factory=list)  # (row, column, expected, got)
    skipped: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.cells

    def add(self, row, column, expected, got):
        if expected != got:
            self.cells.append((row, column, expected, got))

    def to_dict(self):
        return {"table": self.table, "ok": self.ok,
                "cells": [dict(row=r, column=c, expected=e, got=g) for r, c, e, g in self.cells],
                "skipped": self.skipped}


def _p33_types(diff: TableDiff):
    from .shapes import classify_types, type_letters
    counts = classify_types(9, 3)
    letters = type_letters(counts)
    got = {letters[v]: (v, c) for v, c in counts.items()}
    for r in p33_type_rows():
        v, c = got.get(r["type"], (None, None))
        diff.add(r["type"], "vector", r["vector"], v)
        diff.add(r["type"], "trees", r["trees"], c)


def _p33_examples(diff: TableDiff, with_d: bool, jobs: int = 1):
    from .endo import Automorphism, check_d
    from .shapes import ShapeCatalog
    from .trees import criterion_b_tuple, tuple_of
    from .tuplesearch import canonical_form
    from .words import parse_cycles

    cat = ShapeCatalog(9, 3)
    rows = p33_example_rows()
    for i, r in enumerate(rows):
        tup = r["tuple"]
        diff.add(i, "b", True, criterion_b_tuple(tup))
        _, stab = canonical_form(tup, cat)
        diff.add(i, "s", r["s"], factorial(3) // stab)
        if r["example"]:
            p = parse_cycles(r["example"], 3, 3)
            diff.add(i, "example tuple", tup.trees, tuple_of(p).trees)
            diff.add(i, "example (d)", True, isinstance(check_d(p), Automorphism))
    if with_d:
        from .census import fiber_d_counts
        stats = fiber_d_counts([r["tuple"] for r in rows], jobs=jobs)
        for i, (r, st) in enumerate(zip(rows, stats)):
            diff.add(i, "d", r["d"], st["d"])
    else:
        diff.skipped.append("d column (tier 4)")


def _p42_orbits(jobs: int = 1):
    from .census import census_d
    return census_d(4, 2, "orbit-reps", jobs=jobs)


def _p42_labeled(diff: TableDiff, report):
    from .endo import Automorphism, check_d
    from .shapes import ShapeCatalog
    from .trees import tuple_of
    from .tuplesearch import canonical_form
    from .words import parse_cycles

    cat = ShapeCatalog(4, 4)
    by_rep = {tuple(tuple(x - 1 for x in t) for t in o["rep"]): o for o in report.orbits}
    seen = set()
    for i, r in enumerate(p42_rows()):
        best, _ = canonical_form(r["tuple"], cat)
        o = by_rep.get(best)
        if o is None:
            diff.add(i, "orbit", r["trees"], None)
            continue
        seen.add(best)
        diff.add(i, "orbit", r["orbit"], o["size"])
        diff.add(i, "label_orbits", r["label_orbits"], o["size"] // 24)
        diff.add(i, "d", r["d"], o["d_per_element"])
        if r["example"]:
            p = parse_cycles(r["example"], 4, 2)
            diff.add(i, "example tuple", r["tuple"].trees, tuple_of(p).trees)
            diff.add(i, "example (d)", True, isinstance(check_d(p), Automorphism))
    diff.add("all", "orbits covered", len(by_rep), len(seen))


def _p42_types(diff: TableDiff, report):
    from collections import defaultdict
    from math import factorial as f

    tally = defaultdict(lambda: [0, 0, None])
    for o in report.orbits:
        key = "".join(sorted(s[0] for s in o["shapes"]))
        tally[key][0] += o["size"]
        tally[key][1] += o["d_count"]
        mult = [key.count(c) for c in set(key)]
        arrangements = f(4)
        for m in mult:
            arrangements //= f(m)
        tally[key][2] = arrangements
    for r in p42_type_rows():
        labeled, d, x = tally.get(r["type"], (0, 0, None))
        diff.add(r["type"], "labeled", r["labeled"], labeled)
        diff.add(r["type"], "unlabeled tuples", r["unlabeled"], x)
        if x:
            diff.add(r["type"], "orbits", r["orbits"], labeled // (x * r["labelings"]))
        diff.add(r["type"], "d", r["d"], d)
    diff.add("all", "types", len(p42_type_rows()), len(tally))


def p33_census_tables(reps) -> tuple[dict, dict]:
    """Per type-multiset and per shape-triple tallies of P_3^3 orbit representatives."""
    from collections import Counter, defaultdict
    from .shapes import ShapeCatalog

    cat = ShapeCatalog(9, 3, numbering=figure_numbering())
    multisets: dict = defaultdict(lambda: {"triples": set(), "reps": 0, "covered": 0})
    appendix: Counter = Counter()
    for r in reps:
        names = tuple(sorted((cat.info(t).name for t in r.tuple.trees),
                             key=lambda s: (s[0], int(s[1:]))))
        key = "".join(s[0] for s in names)
        multisets[key]["triples"].add(names)
        multisets[key]["reps"] += 1
        multisets[key]["covered"] += r.s
        appendix[(names, r.s)] += 1
    return dict(multisets), dict(appendix)


def _p33_counts(diff: TableDiff, which: str, reps):
    ms, app = p33_census_tables(reps)
    if which == "p33-multisets":
        for r in p33_multiset_rows():
            got = ms.get(r["types"], {"triples": (), "reps": 0, "covered": 0})
            diff.add(r["types"], "tree_triples", r["tree_triples"], len(got["triples"]))
            diff.add(r["types"], "representatives", r["representatives"], got["reps"])
            diff.add(r["types"], "covered", r["covered"], got["covered"])
        diff.add("all", "types", sorted(r["types"] for r in p33_multiset_rows()), sorted(ms))
        return
    want = {}
    for r in p33_appendix_rows():
        names = tuple(sorted(r["names"], key=lambda s: (s[0], int(s[1:]))))
        want[(names, r["s"])] = want.get((names, r["s"]), 0) + r["count"]
    for key in sorted(set(want) | set(app)):
        diff.add(" ".join(key[0]) + f" s={key[1]}", "count", want.get(key, 0), app.get(key, 0))


def reproduce_table(table_id: str, tier: int = 2, jobs: int = 1, reps=None) -> TableDiff:
    """Recompute one shipped table and compare it cell by cell.

    Tables needing more than ``tier`` are skipped, not failed.  ``reps`` may
    supply precomputed P_3^3 orbit representatives.
    """
    if table_id not in TABLE_IDS:
        raise DomainError(f"unknown table {table_id!r}; known: {', '.join(TABLE_IDS)}")
    diff = TableDiff(table_id)
    need = TABLE_IDS[table_id]
    if need > tier:
        diff.skipped.append(f"needs tier {need}")
        return diff
    if table_id == "p33-types":
        _p33_types(diff)
    elif table_id in ("p33-examples", "p33-examples-d"):
        _p33_examples(diff, table_id.endswith("-d"), jobs)
    elif table_id in ("p42-labeled", "p42-types"):
        report = _p42_orbits(jobs)
        if table_id == "p42-labeled":
            _p42_labeled(diff, report)
        else:
            _p42_types(diff, report)
    else:
        if reps is None:
            from .tuplesearch import enumerate_tuples
            reps = list(enumerate_tuples(3, 3))
        _p33_counts(diff, table_id, reps)
    return diff
