import random

import numpy as np
import pytest

from _shared import all_perms
from cuntzperm.batch import decide_b_rows, definite_rows, tuples_of_rows
from cuntzperm.transducer import (CollisionWitness, PairGraph, Transducer, decide_b,
                                  find_witness, run_prefix)
from cuntzperm.words import DomainError, WordPerm, parse_cycles


def test_run_prefix_identity():
    for n, k in [(2, 2), (3, 3)]:
        x = tuple(random.Random(n).choices(range(1, n + 1), k=8))
        assert run_prefix(WordPerm.identity(n, k), x) == x[:8 - k + 1]


def test_run_prefix_hand_examples():
    assert run_prefix(parse_cycles("(2,3)", 3, 2), (2, 1, 1, 1)) == (3, 1, 1)
    s = parse_cycles("(1,2)", 2, 2)
    assert run_prefix(s, (1, 1, 1)) == (2, 2)
    assert run_prefix(s, (2, 2, 2)) == (2, 2)
    with pytest.raises(DomainError):
        run_prefix(s, (1,))


def test_decide_b_examples():
    assert decide_b(WordPerm.identity(3, 2))
    assert decide_b(parse_cycles("(2,3)", 3, 2))
    assert not decide_b(parse_cycles("(1,2)", 2, 2))


def test_witness_examples():
    assert find_witness(WordPerm.identity(2, 2)) is None
    s = parse_cycles("(1,2)", 2, 2)
    w = find_witness(s)
    assert w.verify(s)
    x, y = w.inputs(6)
    assert {x, y} == {(1,) * 6, (2,) * 6}
    assert run_prefix(s, x) == run_prefix(s, y) == (2,) * 5
    assert w.agree >= 2 * len(PairGraph(Transducer(s)).succ) + 2
    assert CollisionWitness.from_text(w.to_text(), 2) == w


def test_step_is_bijective():
    s = parse_cycles("(1, 6, 26, 7, 22, 17)(2, 12, 24, 20, 18, 13, 14)", 3, 3)
    m = Transducer(s)
    pairs = {m.step(c, a) for c in range(9) for a in range(3)}
    assert len(pairs) == 27


@pytest.mark.parametrize("n,k", [(2, 2), (2, 3), (3, 2)])
def test_transducer_matches_tree_side_exhaustively(n, k):
    sigs = all_perms(n ** k)
    b = decide_b_rows(sigs, n, k)
    tree_side = definite_rows(tuples_of_rows(sigs, n, k), n ** (k - 1))
    assert int((b != tree_side).sum()) == 0


def test_transducer_matches_tree_side_random_p42():
    rng = np.random.default_rng(7)
    sigs = np.array([rng.permutation(16) for _ in range(100_000)])
    b = decide_b_rows(sigs, 4, 2)
    assert int((b != definite_rows(tuples_of_rows(sigs, 4, 2), 4)).sum()) == 0


def test_scalar_and_batch_agree():
    sigs = all_perms(9)[::97]
    b = decide_b_rows(sigs, 3, 2)
    assert [decide_b(WordPerm(3, 2, s, check=False)) for s in sigs] == b.tolist()


def test_witness_for_every_failure_sample():
    rng = random.Random(3)
    sigs = all_perms(9)
    for _ in range(200):
        s = WordPerm(3, 2, sigs[rng.randrange(len(sigs))])
        w = find_witness(s)
        assert (w is None) == decide_b(s)
        if w:
            assert w.verify(s)


def test_no_collision_on_random_inputs_when_b_holds():
    s = parse_cycles("(3, 7, 14, 10, 6, 4)(5, 13, 9)(8, 16, 12)(11, 15)", 4, 2)
    assert decide_b(s)
    rng = random.Random(11)
    seen = {}
    for _ in range(10_000):
        pre = tuple(rng.choices(range(1, 5), k=rng.randrange(1, 4)))
        per = tuple(rng.choices(range(1, 5), k=rng.randrange(1, 4)))
        x = (pre + per * 40)[:40]
        # injective with bounded delay: equal outputs force equal input prefixes
        y = run_prefix(s, x)
        assert seen.setdefault(y, x)[:30] == x[:30]
