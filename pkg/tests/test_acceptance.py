"""Acceptance criteria, one registered check per criterion.

Under pytest each check is a test and the terminal summary prints one
PASS/FAIL line per criterion.  Run directly (``python tests/test_acceptance.py
[--slow]``) to get the same lines without pytest.
"""

import functools
import itertools
import os
import sys
import tempfile
from math import factorial

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from _shared import (SLOW, all_perms, exhaustive, p33_b_report, p42_orbit_report,  # noqa: E402
                     p42_reps)
from cuntzperm.batch import decide_b_rows, decide_d_rows, definite_rows, tuples_of_rows  # noqa: E402
from cuntzperm.census import (Interrupted, SymmetryElement, act, census_d, fiber_d_counts,  # noqa: E402
                              outer_classes)
from cuntzperm.constructions import (MT_DATA, Z2Z3_DATA, Z2Z3_PHI, matsumoto_tomiyama, mt_data,  # noqa: E402
                                     psi, psi_bar, z2z3_generators)
from cuntzperm.endo import Automorphism, _block_form, check_d, endo_compose, inverse_levels  # noqa: E402
from cuntzperm.shapes import ShapeCatalog, alignment_census, classify_types, enumerate_shapes, type_letters  # noqa: E402
from cuntzperm.tables import (p33_example_rows, p42_rows, p42_type_rows, reproduce_table)  # noqa: E402
from cuntzperm.transducer import decide_b  # noqa: E402
from cuntzperm.trees import choice_of_index, fiber, fiber_size, tuple_of  # noqa: E402
from cuntzperm.tuplesearch import enumerate_tuples, labeled_total  # noqa: E402
from cuntzperm.words import WordPerm, format_cycles, parse_cycles, rank, unrank  # noqa: E402

RESULTS: dict = {}
CRITERIA: list = []


def criterion(cid, title, slow=False):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                fn()
            except BaseException:
                RESULTS[cid] = ("FAIL", title)
                raise
            RESULTS[cid] = ("PASS", title)
        CRITERIA.append((cid, title, slow, fn))
        return pytest.mark.slow(run) if slow else run
    return wrap


# T0

@criterion("T0.rank", "rank anchors")
def test_t0_rank_anchors():
    anchors = [((1, 1), 3, 1), ((2, 1), 3, 2), ((3, 1), 3, 3), ((1, 2), 3, 4),
               ((1, 1, 1), 3, 1), ((3, 3, 3), 3, 27), ((4, 1), 4, 4), ((3, 2), 4, 7)]
    for w, n, r in anchors:
        assert rank(w, n) == r and unrank(r, n, len(w)) == w


@criterion("T0.cycles", "cycle strings from every table round-trip")
def test_t0_cycle_round_trips():
    strings = [(r["example"], 4, 2) for r in p42_rows() if r["example"]]
    strings += [(r["example"], 3, 3) for r in p33_example_rows() if r["example"]]
    strings += [(p, MT_DATA["n"], 1) for p in MT_DATA["perms"]]
    strings += [(p, Z2Z3_DATA["n"], 1) for p in Z2Z3_DATA["perms"]] + [(Z2Z3_PHI, 3, 1)]
    assert len(strings) >= 15
    for text, n, k in strings:
        p = parse_cycles(text, n, k)
        assert parse_cycles(format_cycles(p), n, k) == p
        assert format_cycles(parse_cycles(format_cycles(p), n, k)) == format_cycles(p)


@criterion("T0.p22", "P_2^2: 8 (b), 4 (d), 4 (b) without (d)")
def test_t0_p22():
    r = exhaustive(2, 2)
    assert (r.b_count, r.d_count, r.b_count - r.d_count) == (8, 4, 4)


# T1

@criterion("T1.p32-census", "P_3^2 exhaustive: 5184 / 576 / 96")
def test_t1_p32_census():
    r = exhaustive(3, 2)
    assert (r.b_count, r.d_count, outer_classes(r)) == (5184, 576, 96)


@criterion("T1.p32-tuples", "P_3^2: 4 tuple types x 3! labelings")
def test_t1_p32_tuples():
    reps = list(enumerate_tuples(3, 2))
    assert sum(r.s for r in reps) == 4
    assert labeled_total(reps) == 4 * factorial(3)


@criterion("T1.p32-fibers", "P_3^2: every fiber has 216 members, 24 with (d)")
def test_t1_p32_fibers():
    tuples = [t for r in enumerate_tuples(3, 2)
              for t in {act(SymmetryElement(p, q), r.tuple)
                        for p in itertools.permutations(range(3))
                        for q in itertools.permutations(range(3))}]
    assert len(tuples) == 24
    stats = fiber_d_counts(tuples)
    assert all(fiber_size(t) == 216 for t in tuples)
    assert [s["d"] for s in stats] == [24] * 24


@criterion("T1.transposition", "tree tuple of the transposition (2,3)")
def test_t1_transposition_tuple():
    t = tuple_of(parse_cycles("(2, 3)", 3, 2))
    assert t.trees == ((0, 0, 0), (2, 1, 1), (1, 2, 2))


@criterion("T1.b-equivalence", "transducer and tree (b) criteria agree on all of P_3^2")
def test_t1_b_equivalence():
    sigs = all_perms(9)
    assert len(sigs) == 362_880
    b = decide_b_rows(sigs, 3, 2)
    tree = definite_rows(tuples_of_rows(sigs, 3, 2), 3)
    assert int((b != tree).sum()) == 0


# T2

@criterion("T2.shapes", "286 rooted trees, 171 admissible, in-degree type counts")
def test_t2_shapes():
    assert len(enumerate_shapes(9)) == 286
    counts = classify_types(9, 3)
    letters = type_letters(counts)
    by_letter = {letters[v]: c for v, c in counts.items()}
    assert sum(counts.values()) == 171
    assert [by_letter[L] for L in sorted(by_letter)] == [2, 18, 8, 14, 46, 9, 33, 24, 4, 12, 1]


@criterion("T2.alignments", "100 type multisets align, 133 alignments")
def test_t2_alignments():
    al = alignment_census(9, 3, 3)
    assert (len(al), sum(al.values())) == (100, 133)


@criterion("T2.mt", "Matsumoto-Tomiyama permutation: (b), (d), type AAAA")
def test_t2_mt():
    w = matsumoto_tomiyama()
    assert decide_b(w) and isinstance(check_d(w), Automorphism)
    cat = ShapeCatalog(4, 4)
    assert "".join(cat.info(t).letter for t in tuple_of(w).trees) == "AAAA"


@criterion("T2.psi-bar", "psi-bar equals the inverse found for the MT psi")
def test_t2_psi_bar():
    r = check_d(psi(mt_data()))
    assert isinstance(r, Automorphism) and r.m == 3 and r.inverse == psi_bar(mt_data())


@criterion("T2.z2z3", "z2z3 generators have orders 3 and 2")
def test_t2_z2z3():
    phi, p = z2z3_generators()

    def order(s):
        acc, j = s, 1
        while not acc.is_identity():
            acc, j = endo_compose(acc, s), j + 1
            assert j < 10
        return j
    assert (order(phi), order(p)) == (3, 2)


# T3

P42_D = [2160, 576, 2160, 2160, 0, 576, 2160, 2160, 576, 0, 2160, 576, 0, 0, 2160, 0, 0, 1536, 2160]
P42_ORBITS = [24, 288, 288, 144, 144, 576, 192, 576, 576, 576, 576, 288, 288, 144, 288, 144, 144, 72, 72]


@criterion("T3.p42-orbits", "P_4^2: 5400 labeled tuples in 19 orbits with the printed sizes")
def test_t3_p42_orbits():
    reps = p42_reps()
    assert labeled_total(reps) == 5400 and len(reps) == 19
    assert sorted(r.orbit_size for r in reps) == sorted(P42_ORBITS)
    assert [r["orbit"] for r in p42_rows()] == P42_ORBITS


@criterion("T3.p42-d", "P_4^2: per-orbit (d) counts as printed")
def test_t3_p42_per_orbit_d():
    assert [r["d"] for r in p42_rows()] == P42_D
    diff = reproduce_table("p42-labeled", tier=3)
    assert diff.ok, diff.cells[:10]


@criterion("T3.p42-totals", "P_4^2 totals: 1791590400 / 5771520 / 240480")
def test_t3_p42_totals():
    r = p42_orbit_report()
    b = labeled_total(p42_reps()) * factorial(4) ** 4
    assert (b, r.d_count, outer_classes(r)) == (1_791_590_400, 5_771_520, 240_480)


@criterion("T3.p42-examples", "every printed P_4^2 example passes check_d")
def test_t3_p42_examples():
    rows = [r for r in p42_rows() if r["example"]]
    assert rows
    for r in rows:
        p = parse_cycles(r["example"], 4, 2)
        assert tuple_of(p) == r["tuple"]
        assert isinstance(check_d(p), Automorphism)


@criterion("T3.conservation", "P_4^2 conservation: orbit and type cross-sums agree")
def test_t3_conservation():
    r = p42_orbit_report()
    per_orbit = sum(o["size"] * o["d_per_element"] for o in r.orbits)
    types = reproduce_table("p42-types", tier=3)
    assert types.ok, types.cells[:10]
    assert per_orbit == r.d_count == sum(x["d"] for x in p42_type_rows()) == 5_771_520
    assert sum(o * d for o, d in zip(P42_ORBITS, P42_D)) == 5_771_520


# T4

P33_TYPES = {"AAA": (4, 2168), "ABB": (176, 2782), "ACD": (75, 950),
             "AEE": (180, 1072), "AFG": (31, 392), "AHH": (8, 26)}


@criterion("T4.p33-per-type", "P_3^3 per-type representatives 2168/2782/950/1072/392/26", slow=True)
def test_t4_p33_per_type():
    got = {t: v["representatives"] for t, v in p33_b_report().per_type.items()}
    assert got == {t: v[1] for t, v in P33_TYPES.items()}


@criterion("T4.p33-triples", "P_3^3: 474 unlabeled tree triples", slow=True)
def test_t4_p33_triples():
    assert sum(v["shape_triples"] for v in p33_b_report().per_type.values()) == 474


@criterion("T4.p33-reps", "P_3^3: 7390 orbit representatives", slow=True)
def test_t4_p33_reps():
    assert len(p33_b_report().orbits) == 7390


@criterion("T4.p33-total", "P_3^3: 44172 x 9! labeled (b)-tuples", slow=True)
def test_t4_p33_total():
    r = p33_b_report()
    labeled = sum(o["size"] for o in r.orbits)
    assert labeled == 44_172 * factorial(9)
    assert r.b_count == 44_172 * factorial(9) * 6 ** 9


@criterion("T4.p33-fiber-d", "P_3^3 example tuples: fiber (d) counts 312/240/216/0", slow=True)
def test_t4_p33_fiber_d():
    rows = p33_example_rows()
    stats = fiber_d_counts([r["tuple"] for r in rows])
    assert [s["d"] for s in stats] == [r["d"] for r in rows]
    assert {rows[0]["d"], rows[2]["d"], rows[3]["d"]} == {312, 240, 216}


@criterion("T4.p33-examples", "P_3^3 example permutations pass check_d")
def test_t4_p33_examples():
    rows = [r for r in p33_example_rows() if r["example"]]
    assert len(rows) == 3
    for r in rows:
        p = parse_cycles(r["example"], 3, 3)
        assert tuple_of(p) == r["tuple"]
        assert isinstance(check_d(p), Automorphism)


@criterion("T4.checkpoint", "checkpointed (d) run survives interrupt and resume")
def test_t4_checkpoint_resume():
    tup = [p33_example_rows()[0]["tuple"]]
    kw = dict(block=1000, span=6000)
    whole = census_d(3, 3, "tuple-list", tuples=tup, **kw).to_json()
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "cp.jsonl")
        with pytest.raises(Interrupted):
            census_d(3, 3, "tuple-list", tuples=tup, checkpoint=path, stop_after=2, **kw)
        resumed = census_d(3, 3, "tuple-list", tuples=tup, checkpoint=path, **kw).to_json()
        replayed = census_d(3, 3, "tuple-list", tuples=tup, checkpoint=path, **kw).to_json()
    assert resumed == whole == replayed


# property suite

@criterion("P.action", "group-action laws")
def test_p_action_laws():
    rng = np.random.default_rng(0)
    import random
    r = random.Random(0)
    for n, k in [(3, 2), (4, 2), (3, 3)]:
        m = n ** (k - 1)
        for _ in range(20):
            t = tuple_of(WordPerm(n, k, rng.permutation(n ** k)))
            g, h = SymmetryElement.random(n, m, r), SymmetryElement.random(n, m, r)
            assert act(g * h, t) == act(g, act(h, t))
            assert act(g.inverse(), act(g, t)) == t


@criterion("P.fiber", "tuple/fiber round-trips")
def test_p_fiber_round_trip():
    import random
    r = random.Random(1)
    for n, k in [(2, 2), (3, 2), (4, 2), (3, 3)]:
        for _ in range(25):
            t = tuple_of(WordPerm(n, k, r.sample(range(n ** k), n ** k)))
            s = fiber(t, choice_of_index(t, r.randrange(fiber_size(t))))
            assert tuple_of(s) == t


@criterion("P.d-implies-b", "check_d implies decide_b")
def test_p_d_implies_b():
    sigs = all_perms(9)
    assert not ((decide_d_rows(sigs, 3, 2) > 0) & ~decide_b_rows(sigs, 3, 2)).any()
    rng = np.random.default_rng(3)
    for _ in range(200):
        s = WordPerm(3, 3, rng.permutation(27))
        if isinstance(check_d(s, 4), Automorphism):
            assert decide_b(s)


@criterion("P.inverse-closure", "inverse closure under endo_compose")
def test_p_inverse_closure():
    sigs = all_perms(9)
    for row in sigs[decide_d_rows(sigs, 3, 2) > 0][::41]:
        s = WordPerm(3, 2, row)
        pi = check_d(s).inverse
        back = check_d(pi)
        assert isinstance(back, Automorphism)
        assert endo_compose(s, pi).is_identity() and endo_compose(pi, back.inverse).is_identity()


@criterion("P.block-monotone", "block form is monotone in the level")
def test_p_block_monotone():
    from cuntzperm.words import embed
    for text in ["(4, 7)", "(3, 7, 14, 10, 6, 4)(5, 13, 9)(8, 16, 12)(11, 15)"]:
        s = parse_cycles(text, 4, 2)
        prev = None
        for m, A in inverse_levels(s, 5):
            p = _block_form(A, 4, m, 2)
            if prev is not None:
                assert p is not None and p.tolist() == embed(WordPerm(4, m - 1, prev), m).images.tolist()
            prev = p
        assert prev is not None


@criterion("P.determinism", "reports independent of worker count")
def test_p_determinism():
    from cuntzperm.census import census_exhaustive
    assert census_exhaustive(2, 3, block=2048, jobs=1).to_json() == \
        census_exhaustive(2, 3, block=2048, jobs=2).to_json()
    tup = [p33_example_rows()[2]["tuple"]]
    assert fiber_d_counts(tup, block=500, span=2000, jobs=1) == \
        fiber_d_counts(tup, block=500, span=2000, jobs=2)


def summary_lines():
    order = {cid: i for i, (cid, *_rest) in enumerate(CRITERIA)}
    lines = []
    for cid, title, slow, _ in sorted(CRITERIA, key=lambda c: order[c[0]]):
        status = RESULTS.get(cid, ("SKIP", title))[0]
        note = " (slow; set CUNTZPERM_SLOW=1)" if status == "SKIP" and slow else ""
        lines.append(f"{status:4} {cid:18} {title}{note}")
    return lines


def main(argv):
    slow = SLOW or "--slow" in argv
    failed = 0
    for cid, title, is_slow, fn in CRITERIA:
        if is_slow and not slow:
            continue
        try:
            fn()
            RESULTS[cid] = ("PASS", title)
        except Exception as e:  # report and move on
            RESULTS[cid] = ("FAIL", title)
            failed += 1
            print(f"  {cid}: {type(e).__name__}: {e}"[:400], file=sys.stderr)
        print(summary_lines()[[c[0] for c in CRITERIA].index(cid)], flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
