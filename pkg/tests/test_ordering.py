from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from viewgraph.errors import TooManyViews
from viewgraph.materialize import EdgeBooleanMatrix, consecutive_blocks, diff_count
from viewgraph.ordering import (HammingClique, brute_force_order, brute_force_tour_weight, choose_order,
                                christofides_order, christofides_tour, euler_tour, hamming_clique,
                                min_weight_perfect_matching, minimum_spanning_tree, optimize_order)

FOUR_VIEW_ROWS = [(1, 0, 0, 0)] * 10 + [(1, 0, 1, 0)] * 40 + [(1, 1, 1, 0)] * 10 + [(1, 1, 1, 1)] * 40 + [(0, 1, 0, 1)] * 100
FOUR_VIEW = EdgeBooleanMatrix.from_rows(FOUR_VIEW_ROWS)
FOUR_VIEW_CLIQUE = [[0, 100, 150, 90, 140],
        [100, 0, 150, 10, 160],
        [150, 150, 0, 140, 10],
        [90, 10, 140, 0, 150],
        [140, 160, 10, 150, 0]]


def direct_clique(ebm: EdgeBooleanMatrix) -> np.ndarray:
    cols = np.hstack([np.zeros((ebm.num_rows, 1), bool), ebm.bits])
    n = cols.shape[1]
    return np.array([[int((cols[:, i] != cols[:, j]).sum()) for j in range(n)] for i in range(n)])


def test_four_view_clique_weights():
    assert hamming_clique(FOUR_VIEW).weight.tolist() == FOUR_VIEW_CLIQUE
    assert hamming_clique(FOUR_VIEW, partitions=6).weight.tolist() == FOUR_VIEW_CLIQUE


def test_four_view_tour_and_orders():
    cand = christofides_order(hamming_clique(FOUR_VIEW), FOUR_VIEW)
    assert cand.tour == (0, 3, 1, 2, 4)
    assert {cand.forward, cand.backward} == {(2, 0, 1, 3), (3, 1, 0, 2)}
    assert cand.backward == cand.forward[::-1]
    assert optimize_order(FOUR_VIEW) == (2, 0, 1, 3)
    assert diff_count(FOUR_VIEW, (2, 0, 1, 3)) == 260 and diff_count(FOUR_VIEW, (0, 1, 2, 3)) == 540


def test_brute_force_four_view():
    order = brute_force_order(FOUR_VIEW)
    assert diff_count(FOUR_VIEW, order) == 260
    assert order == (0, 2, 1, 3)


def test_brute_force_identical_columns():
    ebm = EdgeBooleanMatrix.from_rows([[1, 1, 1], [0, 0, 0], [1, 1, 1]])
    assert brute_force_order(ebm) == (0, 1, 2)
    assert diff_count(ebm, (2, 1, 0)) == 2


def test_brute_force_limit():
    with pytest.raises(TooManyViews):
        brute_force_order(EdgeBooleanMatrix(np.zeros((2, 9), bool), tuple("abcdefghi")))


def test_two_views():
    ebm = EdgeBooleanMatrix.from_rows([[1, 0], [1, 1]])
    cand = christofides_order(hamming_clique(ebm), ebm)
    assert {cand.forward, cand.backward} == {(0, 1), (1, 0)}


def test_k1_identity():
    assert optimize_order(EdgeBooleanMatrix.from_rows([[1], [0]])) == (0,)


def test_zero_weight_pair_is_adjacent():
    rows = [[1, 0, 1, 0], [1, 0, 1, 1], [0, 1, 0, 0], [0, 1, 0, 1], [1, 1, 1, 0]]
    ebm = EdgeBooleanMatrix.from_rows(rows)  # columns 0 and 2 are identical
    order = optimize_order(ebm)
    assert abs(order.index(0) - order.index(2)) == 1


def test_euler_tour_uses_every_edge():
    edges = [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]
    tour = euler_tour(5, edges)
    assert tour[0] == tour[-1] == 0 and len(tour) == len(edges) + 1
    used = sorted(tuple(sorted(p)) for p in zip(tour, tour[1:]))
    assert used == sorted(tuple(sorted(p)) for p in edges)


def test_matching_is_exact_on_small_sets():
    q = HammingClique(np.array(FOUR_VIEW_CLIQUE))
    pairs = min_weight_perfect_matching(q, [0, 1, 2, 3])
    best = min(q.w(a, b) + q.w(c, d) for (a, b), (c, d) in [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))])
    assert sum(q.w(a, b) for a, b in pairs) == best


def test_choose_order_random_is_seeded():
    a = choose_order(FOUR_VIEW, "random:7")
    b = choose_order(FOUR_VIEW, "random:7")
    assert a.order == b.order and a.ds_default == 540
    with pytest.raises(ValueError):
        choose_order(FOUR_VIEW, "clever")


# properties over random matrices

def ebms(max_k: int = 8):
    return st.integers(1, max_k).flatmap(lambda k: arrays(bool, st.tuples(st.integers(0, 64), st.just(k))))


def named(bits):
    return EdgeBooleanMatrix(bits, tuple(f"V{j}" for j in range(bits.shape[1])))


@settings(max_examples=500, deadline=None)
@given(ebms(), st.data())
def test_row_diffs_between_2cb_minus_1_and_2cb(bits, data):
    order = list(data.draw(st.permutations(range(bits.shape[1]))))
    for row in bits[:, order].astype(int):
        d = int(np.count_nonzero(np.diff(np.concatenate([[0], row]))))
        cb = int(np.count_nonzero(np.diff(np.concatenate([[0], row])) == 1))
        assert d in (2 * cb - 1, 2 * cb)


@settings(max_examples=500, deadline=None)
@given(ebms(), st.data())
def test_stacked_complement_counts(bits, data):
    # each row and its complement together change 2*(changes inside the row) + 1 times
    order = list(data.draw(st.permutations(range(bits.shape[1]))))
    stacked = named(np.vstack([bits, ~bits]))
    inside = int(np.count_nonzero(np.diff(bits[:, order].astype(int), axis=1)))
    assert diff_count(stacked, order) == 2 * inside + bits.shape[0]


def test_stacked_complement_block_formula_counterexample():
    # the block-count form of the identity breaks on rows that start with 0
    bits = np.array([[False, True, False]])
    stacked = named(np.vstack([bits, ~bits]))
    cb = consecutive_blocks(named(bits), (0, 1, 2))
    assert diff_count(stacked, (0, 1, 2)) == 5
    assert 4 * cb - 1 == 3


@settings(max_examples=500, deadline=None)
@given(ebms())
def test_clique_matches_direct_and_is_metric(bits):
    ebm = named(bits)
    w = hamming_clique(ebm, partitions=3).weight
    assert np.array_equal(w, direct_clique(ebm))
    assert np.array_equal(w, w.T) and not w.diagonal().any()
    n = w.shape[0]
    for i, j, k in itertools.product(range(n), repeat=3):
        assert w[i, k] <= w[i, j] + w[j, k]
    assert [w[0, j + 1] for j in range(ebm.k)] == bits.sum(axis=0).tolist()


@settings(max_examples=500, deadline=None)
@given(ebms())
def test_three_approximation(bits):
    ebm = named(bits)
    order = optimize_order(ebm)
    assert sorted(order) == list(range(ebm.k))
    assert diff_count(ebm, order) <= 3 * diff_count(ebm, brute_force_order(ebm))
    assert optimize_order(ebm) == order


@settings(max_examples=500, deadline=None)
@given(ebms(max_k=7))
def test_tour_within_one_and_a_half_of_optimal(bits):
    q = hamming_clique(named(bits))
    tour = christofides_tour(q)
    assert sorted(tour) == list(range(q.n))
    assert 2 * q.tour_weight(list(tour)) <= 3 * brute_force_tour_weight(q)


@settings(max_examples=200, deadline=None)
@given(ebms())
def test_chain_weight_equals_diff_count(bits):
    ebm = named(bits)
    q = hamming_clique(ebm)
    cand = christofides_order(q, ebm)
    path = (0,) + tuple(j + 1 for j in cand.forward)
    assert sum(q.w(a, b) for a, b in zip(path, path[1:])) == cand.forward_ds


def test_mst_is_spanning():
    q = HammingClique(np.array(FOUR_VIEW_CLIQUE))
    tree = minimum_spanning_tree(q)
    assert len(tree) == 4
    assert sum(q.w(a, b) for a, b in tree) == 10 + 10 + 90 + 140
