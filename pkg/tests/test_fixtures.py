import numpy as np
import pytest

from dhtbits.decoder_algebra import DECFOUR
from dhtbits.fixtures import (
    alpha_eps_pair,
    degenerate,
    family_candidate,
    load_json_fixture,
    staircase_grids,
    staircase_labeling,
    staircase_sets,
)
from dhtbits.separability import SimplexGrid, divergence_ball_set, verify_labeling


def test_example_pairs(h1, h2):
    assert np.allclose(h1.p0.probs * 6, [[1, 1], [1, 3]])
    assert np.allclose(h1.p1.probs, h1.p0.probs[::-1, ::-1])
    assert not h1.is_product() and h2.is_product()
    assert np.allclose(h2.marginals(1)[0].probs * 8, [3, 3, 2])
    d = degenerate((2, 3))
    assert d.p0 == d.p1 and d.shape == (2, 3)


@pytest.mark.parametrize("alpha, eps", [(0.1, 0.01), (0.3, 0.5), (0.49, 0.99)])
def test_alpha_eps_pairs_are_transposes(alpha, eps):
    h = alpha_eps_pair(alpha, eps)
    assert np.allclose(h.p1.probs, h.p0.probs.T)
    assert h.p0.probs[0, 1] == pytest.approx(alpha * eps)


@pytest.mark.parametrize("alpha, eps", [(0.0, 0.1), (0.5, 0.1), (0.2, 1.0)])
def test_alpha_eps_rejects(alpha, eps):
    with pytest.raises(ValueError):
        alpha_eps_pair(alpha, eps)


def test_staircase_is_mirror_symmetric():
    a, b = staircase_sets()
    xg, yg = staircase_grids()
    assert (len(xg), len(yg)) == (8, 7)
    assert len(a) == len(b) == 12
    lab = staircase_labeling()
    assert lab.within(4, 4)


@pytest.mark.parametrize("alpha, eps, e", [(0.2, 0.05, 1.0), (0.3, 0.1, 0.5), (0.1, 0.01, 2.0)])
def test_family_candidate_flags_are_consistent(alpha, eps, e):
    c = family_candidate(alpha, eps, e, resolution=20, budget=20_000)
    if c.decfour_labeling is not None:
        h = alpha_eps_pair(alpha, eps)
        grids = (SimplexGrid(2, 20), SimplexGrid(2, 20))
        a, b = divergence_ball_set(h, 0, e, grids), divergence_ball_set(h, 1, e, grids)
        assert verify_labeling(a, b, DECFOUR, c.decfour_labeling)
    assert c.realizes == (not c.psi_separable and not c.psibar_separable and c.decfour_labeling is not None)


def test_packaged_fixture_loader():
    fx = load_json_fixture("fixtures/fig6_staircase.json")
    assert fx["check"] == "fig6_staircase" and fx["decoder"] == DECFOUR.to_literal()
