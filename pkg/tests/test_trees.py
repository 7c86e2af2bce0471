import itertools
import random

import numpy as np
import pytest

from cuntzperm.trees import (LabeledTuple, choice_of_index, criterion_b_tuple, fiber,
                             fiber_inverse_block, fiber_iter, fiber_size, in_degrees,
                             invert_rows, is_tree_with_loop, trees_aligned, tuple_of)
from cuntzperm.transducer import decide_b
from cuntzperm.words import DomainError, WordPerm, parse_cycles


def test_is_tree_with_loop_examples():
    assert is_tree_with_loop((0, 0, 0))
    assert not is_tree_with_loop((0, 1))
    assert is_tree_with_loop((2, 1, 1))  # 1->3->2, 2 is the root
    assert not is_tree_with_loop((1, 0, 2))  # 2-cycle
    assert in_degrees((2, 1, 1)) == [0, 2, 1]


def test_tuple_of_identity_is_stars():
    t = tuple_of(WordPerm.identity(3, 2))
    assert t.trees == ((0, 0, 0), (1, 1, 1), (2, 2, 2))


def test_tuple_of_transposition():
    t = tuple_of(parse_cycles("(2,3)", 3, 2))
    assert t.trees[0] == (0, 0, 0)
    assert t.trees[1] == (2, 1, 1)  # 1->3, 3->2, 2->2
    assert t.trees[2] == (1, 2, 2)  # 1->2, 2->3, 3->3


def test_tuple_of_is_always_aligned():
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = WordPerm(3, 3, rng.permutation(27))
        M = tuple_of(s).alignment_matrix()
        assert (M.sum(axis=0) == 3).all() and (M.sum(axis=1) == 9).all()


def test_criterion_examples():
    assert criterion_b_tuple(LabeledTuple.of(3, 2, [[0] * 3, [1] * 3, [2] * 3]))
    assert not criterion_b_tuple(LabeledTuple.of(3, 2, [[0, 1, 2], [1] * 3, [2] * 3]))


def test_criterion_n2_all_function_pairs():
    maps = list(itertools.product(range(2), repeat=2))
    good = {(s, t) for s in maps for t in maps
            if criterion_b_tuple(LabeledTuple.of(2, 2, [s, t]))}
    assert good == {((0, 0), (1, 1)), ((1, 1), (0, 0))}


def test_per_tree_test_is_weaker_than_the_criterion():
    # every map a rooted tree plus alignment admits tuples that fail (b)
    trees = [t for t in itertools.product(range(3), repeat=3) if is_tree_with_loop(t)]
    per_tree = definite = 0
    for triple in itertools.product(trees, repeat=3):
        tup = LabeledTuple.of(3, 2, triple)
        per_tree += trees_aligned(tup)
        definite += criterion_b_tuple(tup)
        assert criterion_b_tuple(tup) <= trees_aligned(tup)
    assert (definite, per_tree) == (24, 36)


def test_fiber_sizes():
    assert fiber_size(tuple_of(WordPerm.identity(3, 2))) == 216
    assert fiber_size(tuple_of(WordPerm.identity(4, 2))) == 331_776


def test_fiber_requires_alignment():
    bad = LabeledTuple.of(3, 2, [[0] * 3] * 3)
    with pytest.raises(DomainError):
        fiber(bad, [(0, 1, 2)] * 3)


def test_fiber_n2_exhaustive():
    good = [LabeledTuple.of(2, 2, [[0, 0], [1, 1]]), LabeledTuple.of(2, 2, [[1, 1], [0, 0]])]
    seen = set()
    for tup in good:
        members = list(fiber_iter(tup))
        assert len(members) == 4 == len(set(members))
        for s in members:
            assert tuple_of(s) == tup and decide_b(s)
        seen.update(members)
    assert len(seen) == 8


@pytest.mark.parametrize("n,k", [(3, 2), (2, 3), (4, 2), (3, 3)])
def test_fiber_round_trip_random(n, k):
    rng = random.Random(n * 10 + k)
    for _ in range(25):
        tup = tuple_of(WordPerm(n, k, rng.sample(range(n ** k), n ** k)))
        for _ in range(4):
            idx = rng.randrange(fiber_size(tup))
            s = fiber(tup, choice_of_index(tup, idx))
            assert tuple_of(s) == tup
            block = invert_rows(fiber_inverse_block(tup, idx, idx + 1))
            assert block[0].tolist() == s.images.tolist()


def test_fiber_iter_is_a_bijection_onto_the_preimage():
    tup = tuple_of(parse_cycles("(2,3)", 3, 2))
    members = list(fiber_iter(tup))
    assert len(set(members)) == 216
    assert all(tuple_of(s) == tup for s in members)


def test_json_round_trip():
    tup = tuple_of(parse_cycles("(2,3)", 3, 2))
    assert LabeledTuple.from_json(tup.to_json()) == tup
    assert '"trees": [[1, 1, 1], [3, 2, 2], [2, 3, 3]]' in tup.to_json()
