import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dhtbits.decoder_algebra import (
    DECFOUR,
    DecisionMatrix,
    threshold_decoder,
    threshold_decoder_bar,
)
from dhtbits.fixtures import staircase_labeling, staircase_sets
from dhtbits.separability import (
    GridSet,
    Labeling,
    SearchBudgetExhausted,
    SimplexGrid,
    divergence_ball_set,
    dump_gridsets,
    generic_separability_search,
    load_gridsets,
    mask_from_rle,
    mask_to_rle,
    sub,
    sub_chain,
    threshold_labeling,
    threshold_separable,
    verify_labeling,
)

SMALL = SimplexGrid(2, 2)  # three points, used as an index set


@pytest.mark.parametrize("dim, res", [(2, 1), (2, 10), (3, 4), (4, 3)])
def test_grid_points(dim, res):
    g = SimplexGrid(dim, res)
    pts = g.points
    assert len(g) == comb(res + dim - 1, dim - 1) == len(pts)
    assert np.allclose(pts.sum(1), 1) and np.all(pts >= 0)
    assert np.allclose(pts * res, np.rint(pts * res))
    assert len({tuple(p) for p in np.rint(pts * res).astype(int)}) == len(g)


def test_nearest_and_counts():
    g = SimplexGrid(3, 10)
    i = g.nearest(np.array([0.31, 0.29, 0.40]))
    assert np.allclose(g.points[i], [0.3, 0.3, 0.4])
    assert g.index_of_counts(np.array([3, 3, 4])) == i
    qs = np.random.default_rng(0).dirichlet(np.ones(3), 50)
    assert np.array_equal(g.nearest_many(qs), [g.nearest(q) for q in qs])
    # an exact tie between 0 and 1/4 goes to the smaller index
    four = SimplexGrid(2, 4)
    assert four.nearest(np.array([0.125, 0.875])) == min(four.nearest(np.array([0.0, 1.0])),
                                                         four.nearest(np.array([0.25, 0.75])))
    with pytest.raises(ValueError):
        g.nearest(np.array([0.5, 0.5]))


@st.composite
def disjoint_pair(draw, n=3):
    cells = draw(st.lists(st.integers(0, 2), min_size=n * n, max_size=n * n))
    m = np.array(cells).reshape(n, n)
    return GridSet(SMALL, SMALL, m == 1), GridSet(SMALL, SMALL, m == 2)


def brute_separable(a, b, d: DecisionMatrix) -> bool:
    nx, ny = a.mask.shape
    for tx in itertools.product(range(d.mx), repeat=nx):
        for ty in itertools.product(range(d.my), repeat=ny):
            if verify_labeling(a, b, d, Labeling(np.array(tx), np.array(ty))):
                return True
    return False


@given(disjoint_pair())
def test_restriction_chain_matches_label_enumeration(pair):
    a, b = pair
    for mx, my in ((1, 1), (2, 2), (3, 3), (3, 2), (2, 3)):
        for bar, d in ((False, threshold_decoder(mx, my)), (True, threshold_decoder_bar(mx, my))):
            got = threshold_separable(a, b, mx, my, bar=bar)
            assert got == brute_separable(a, b, d), (mx, my, bar)
            if got and mx >= my:
                lab = threshold_labeling(a, b, mx, my, bar=bar)
                assert verify_labeling(a, b, d, lab)


@given(disjoint_pair())
def test_generic_search_matches_enumeration(pair):
    a, b = pair
    for d in (DecisionMatrix.from_literal("01/10"), DecisionMatrix.from_literal("011/101/110")):
        lab = generic_separability_search(a, b, d)
        assert (lab is not None) == brute_separable(a, b, d)
        if lab is not None:
            assert verify_labeling(a, b, d, lab)


@given(disjoint_pair())
def test_sub_chain_nesting(pair):
    a, b = pair
    chain = sub_chain(a, b, 10)
    assert len(chain) == 11 and chain[0] == a and chain[1] == b
    for k in range(2, 11):
        assert not np.any(chain[k].mask & ~chain[k - 2].mask)
        assert chain[k] == sub(chain[k - 2], chain[k - 1])
        for proj in ("proj_x", "proj_y"):
            assert not np.any(getattr(chain[k], proj)() & ~getattr(chain[k - 1], proj)())


@given(disjoint_pair())
def test_complement_symmetry(pair):
    a, b = pair
    for m in (1, 2, 3, 4):
        assert threshold_separable(a, b, m, m) == threshold_separable(b, a, m, m, bar=True)
        assert threshold_separable(a, b, m, m) == sub_chain(a, b, m)[m].is_empty()


def test_overlapping_sets_rejected():
    a = GridSet.full(SMALL, SMALL)
    with pytest.raises(ValueError):
        threshold_separable(a, a, 2, 2)


def test_gridset_ops_and_validation():
    a = GridSet(SMALL, SMALL, np.eye(3, dtype=bool))
    b = GridSet(SMALL, SMALL, np.eye(3, dtype=bool)[::-1])
    assert len(a & b) == 1 and len(a | b) == 5
    assert GridSet.empty(SMALL, SMALL).is_empty() and len(GridSet.full(SMALL, SMALL)) == 9
    with pytest.raises(ValueError):
        GridSet(SMALL, SMALL, np.ones((2, 3), bool))
    with pytest.raises(ValueError):
        a & GridSet.full(SimplexGrid(2, 3), SMALL)


def test_verify_labeling_checks_shape_and_range():
    a, b = GridSet.empty(SMALL, SMALL), GridSet.empty(SMALL, SMALL)
    with pytest.raises(ValueError):
        verify_labeling(a, b, DECFOUR, Labeling(np.zeros(2, int), np.zeros(3, int)))
    assert not verify_labeling(a, b, DECFOUR, Labeling(np.array([0, 4, 0]), np.zeros(3, int)))


def test_search_budget():
    a, b = staircase_sets()
    with pytest.raises(SearchBudgetExhausted):
        generic_separability_search(a, b, DECFOUR, budget=0)


def test_staircase_structure():
    a, b = staircase_sets()
    assert not np.any(a.mask & b.mask)
    sizes = [len(c) for c in sub_chain(a, b, 6)]
    assert sizes == [12, 12, 9, 7, 5, 3, 1]
    assert not threshold_separable(a, b, 4, 4)
    assert not threshold_separable(a, b, 4, 4, bar=True)
    assert verify_labeling(a, b, DECFOUR, staircase_labeling())
    lab = generic_separability_search(a, b, DECFOUR)
    assert lab is not None and verify_labeling(a, b, DECFOUR, lab)
    assert not verify_labeling(a, b, threshold_decoder(4, 4), threshold_labeling(a, b, 4))


def test_divergence_ball_sets(h1):
    grids = (SimplexGrid(2, 20), SimplexGrid(2, 20))
    assert len(divergence_ball_set(h1, 0, np.inf, grids)) == 21 * 21
    small = divergence_ball_set(h1, 0, 0.05, grids)
    large = divergence_ball_set(h1, 0, 0.2, grids)
    assert not np.any(small.mask & ~large.mask)
    with pytest.raises(ValueError):
        divergence_ball_set(h1, 0, -1.0, grids)


@given(st.lists(st.booleans(), min_size=0, max_size=40), st.integers(1, 4))
def test_rle_round_trip(bits, cols):
    n = len(bits) - len(bits) % cols
    m = np.array(bits[:n], bool).reshape(-1, cols)
    assert np.array_equal(mask_from_rle(mask_to_rle(m)), m)


def test_gridset_file_round_trip(tmp_path):
    a, b = staircase_sets()
    dump_gridsets(tmp_path / "s.json", a=a, b=b)
    back = load_gridsets(tmp_path / "s.json")
    assert back["a"] == a and back["b"] == b
