from collections import Counter

import pytest

from cuntzperm.shapes import ShapeCatalog, code_of
from cuntzperm.tables import (TABLE_IDS, decode_four, decode_nine, figure_numbering, p33_appendix_rows,
                              p33_example_rows, p33_multiset_rows, p42_rows, p42_type_rows,
                              reproduce_table, trees171)
from cuntzperm.trees import is_tree_with_loop
from cuntzperm.words import DomainError, parse_cycles, format_cycles


def test_four_vertex_decoder():
    assert decode_four("Wabcd") == (0, 0, 0, 0)
    # root c; d and a hang from c; b hangs from d
    assert decode_four("Lcdba") == (2, 3, 2, 2)
    assert decode_four("Iabcd") == (0, 0, 1, 2)
    with pytest.raises(DomainError):
        decode_four("Sabcd")


def test_nine_vertex_decoder():
    t = decode_nine("AABCCCBBA ghiabcdef")
    assert is_tree_with_loop(t)
    with pytest.raises(DomainError):
        decode_nine("AABCCCBBA ghi")


def test_every_example_string_round_trips():
    rows = [(r["example"], 16) for r in p42_rows() if r["example"]]
    rows += [(r["example"], 27) for r in p33_example_rows() if r["example"]]
    assert len(rows) >= 10
    for text, size in rows:
        n, k = (4, 2) if size == 16 else (3, 3)
        p = parse_cycles(text, n, k)
        assert parse_cycles(format_cycles(p), n, k) == p


def test_figure_numbering_covers_the_catalog():
    num = figure_numbering()
    assert sum(len(v) for v in num.values()) == len(trees171()) == 171
    cat = ShapeCatalog(9, 3, numbering=num)
    assert len(cat) == 171
    marked = [t for t in trees171() if t["marked"]]
    assert all(code_of(t["parents"]) in cat.by_code for t in marked)


def test_fixture_internal_consistency():
    ms = {r["types"]: r for r in p33_multiset_rows()}
    agg = Counter()
    cov = Counter()
    for r in p33_appendix_rows():
        agg[r["types"]] += r["count"]
        cov[r["types"]] += r["count"] * r["s"]
    for t, r in ms.items():
        assert agg[t] == r["representatives"] and cov[t] == r["covered"]
    assert sum(r["representatives"] for r in ms.values()) == 7390
    assert sum(r["covered"] for r in ms.values()) == 44172
    assert sum(r["tree_triples"] for r in ms.values()) == 474
    assert sum(r["labeled"] for r in p42_type_rows()) == 5400
    assert sum(r["orbit"] * r["d"] for r in p42_rows()) == 5_771_520
    assert sum(r["d"] for r in p42_type_rows()) == 5_771_520


def test_reproduce_cheap_tables():
    for tid in ("p33-types", "p33-examples"):
        d = reproduce_table(tid, tier=2)
        assert d.ok, d.cells


def test_tier_skip_and_unknown():
    d = reproduce_table("p42-labeled", tier=2)
    assert d.ok and d.skipped and not d.cells
    with pytest.raises(DomainError):
        reproduce_table("nope")
    assert set(TABLE_IDS) >= {"p33-types", "p42-labeled", "p33-multisets"}
