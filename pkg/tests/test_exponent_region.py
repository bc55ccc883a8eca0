import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dhtbits.exponent_region import (
    NonProductHypotheses,
    RegionBoundary,
    compute_region,
    condindep_member,
    convexprog_boundary_point,
    default_e0_samples,
    gamma_boxes,
    gamma_recursion,
    lambda_local,
    product_radii_chain,
    region_condindep,
    region_grid,
    region_threshold_convexprog,
    stein_endpoints,
    trace_boundary,
)
from dhtbits.fixtures import degenerate
from dhtbits.prob_core import Distribution, HypothesisPair, kl_rows, product_joint
from dhtbits.separability import SimplexGrid


def binary_product(a, b, p, q):
    return HypothesisPair(product_joint(Distribution([a, 1 - a]), Distribution([b, 1 - b])),
                          product_joint(Distribution([p, 1 - p]), Distribution([q, 1 - q])))


PROD = binary_product(0.3, 0.65, 0.7, 0.25)


def lambda_grid_oracle(p_i, p_ib, t, res):
    pts = SimplexGrid(len(p_i), res).points
    ok = kl_rows(pts, p_ib) < t
    return float(kl_rows(pts[ok], p_i).min()) if ok.any() else math.inf


@pytest.mark.parametrize("p0, p1, i, t", [
    ([0.5, 0.5], [0.25, 0.75], 1, 0.05),
    ([0.5, 0.5], [0.25, 0.75], 0, 0.02),
    ([1 / 3, 2 / 3], [2 / 3, 1 / 3], 1, 0.1),
    ([1 / 8, 1 / 8, 6 / 8], [3 / 8, 3 / 8, 2 / 8], 0, 0.25),
    ([1 / 8, 1 / 8, 6 / 8], [3 / 8, 3 / 8, 2 / 8], 1, 0.1),
    ([0.2, 0.3, 0.5], [0.5, 0.3, 0.2], 1, 0.05),
])
def test_lambda_against_grid_minimization(p0, p1, i, t):
    p_i, p_ib = (np.array(p0), np.array(p1)) if i == 0 else (np.array(p1), np.array(p0))
    got = lambda_local(p0, p1, i, t)
    oracle = lambda_grid_oracle(p_i, p_ib, t, 600)
    # the grid value is an upper bound that converges from above
    assert got <= oracle + 1e-9
    assert oracle - got <= 2e-3


def test_lambda_grid_gap_shrinks_on_steep_pair():
    # steep divergence near the constraint boundary: one grid step costs about 2e-3 at 600
    p0, p1 = np.array([0.2, 0.8]), np.array([0.9, 0.1])
    got = lambda_local(p0, p1, 1, 0.5)
    gaps = [lambda_grid_oracle(p1, p0, 0.5, r) - got for r in (600, 2400, 9600, 38400)]
    assert all(g >= -1e-9 for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-4


def test_lambda_edges():
    p0, p1 = [0.5, 0.5], [0.25, 0.75]
    d10 = float(kl_rows(np.array(p1), np.array(p0)))
    assert lambda_local(p0, p1, 1, d10) == 0.0
    assert lambda_local(p0, p1, 1, d10 + 1) == 0.0
    with pytest.raises(ValueError):
        lambda_local(p0, p1, 1, 0.0)
    with pytest.raises(ValueError):
        lambda_local(p0, [1 / 3] * 3, 1, 0.1)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_lambda_nonincreasing(a, b, t1, t2):
    lo, hi = sorted((t1, t2))
    assert lambda_local([a, 1 - a], [b, 1 - b], 1, hi) <= lambda_local([a, 1 - a], [b, 1 - b], 1, lo) + 1e-9


def test_stein_endpoints_ex1(h1):
    assert stein_endpoints(h1) == pytest.approx((math.log(3) / 3, math.log(3) / 3), abs=1e-14)


def test_gamma_hand_unrolled(h2):
    e0, e1 = 0.3, 0.25
    (x0, y0), (x1, y1) = h2.marginals(0), h2.marginals(1)
    g = gamma_recursion(h2, e0, e1, 2)
    assert g.gamma_x[0] == math.inf and g.gamma_x[1] == e1 and g.gamma_y[1] == e1
    gx2 = e0 - lambda_local(y0, y1, 0, e1)
    gy2 = e0 - lambda_local(x0, x1, 0, e1)
    assert g.gamma_x[2] == pytest.approx(gx2, abs=1e-12)
    assert g.gamma_y[2] == pytest.approx(gy2, abs=1e-12)
    assert g.member == (gx2 + gy2 - e0 <= 0)
    assert not g.member


def test_gamma_single_message_is_zero_rate_decision(h2):
    # one message: the receiver always decides H0, so only E1 = 0 is feasible
    assert not gamma_recursion(h2, 0.3, 0.01, 1).member
    assert gamma_recursion(h2, 0.3, 0.0, 1).member


def test_gamma_member_at_seven_messages(h2):
    assert gamma_recursion(h2, 0.3, 0.25, 7).member


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("e0, e1", [(0.05, 0.04), (0.1, 0.02), (0.02, 0.12)])
def test_radii_chain_agrees_with_gamma(m, e0, e1):
    g = gamma_recursion(PROD, e0, e1, m)
    rc = product_radii_chain(PROD, e0, e1, m, m)
    assert rc.member == g.member
    for k in range(m):
        assert np.allclose(rc.x[k], gamma_boxes(g.gamma_x, k), rtol=0, atol=1e-12)
        assert np.allclose(rc.y[k], gamma_boxes(g.gamma_y, k), rtol=0, atol=1e-12)


@given(st.floats(0.005, 0.2), st.floats(0.0, 0.2), st.floats(0.0, 1.0), st.floats(0.0, 1.0),
       st.integers(2, 5))
def test_membership_down_closed(e0, e1, s0, s1, m):
    if gamma_recursion(PROD, e0, e1, m).member:
        assert gamma_recursion(PROD, e0 * s0, e1 * s1, m).member


@given(st.floats(0.005, 0.2), st.floats(0.0, 0.2), st.integers(2, 4))
def test_more_messages_never_hurt(e0, e1, m):
    if condindep_member(PROD, e0, e1, m, m):
        assert condindep_member(PROD, e0, e1, m + 1, m + 1)


def test_complement_is_swapped_roles():
    for e0, e1 in ((0.05, 0.04), (0.02, 0.1), (0.1, 0.02)):
        assert condindep_member(PROD, e0, e1, 3, 3, "psibar") == \
            gamma_recursion(PROD.swapped(), e1, e0, 3).member


def test_non_product_rejected(h1):
    with pytest.raises(NonProductHypotheses):
        gamma_recursion(h1, 0.1, 0.1, 2)
    with pytest.raises(NonProductHypotheses):
        compute_region(h1, "condindep:2")


def test_degenerate_region_is_origin():
    out = region_condindep(degenerate(), 2)
    assert out.points == [(0.0, 0.0)]


def test_trace_boundary_on_known_curve():
    pts = trace_boundary(lambda e0, e1: e1 <= 0.3 - e0, [0.0, 0.1, 0.2], 1.0, tol=1e-6)
    assert np.allclose([p[1] for p in pts], [0.3, 0.2, 0.1], atol=1e-6)
    assert trace_boundary(lambda e0, e1: True, [0.1], 0.5)[0] == (0.1, 0.5)


def test_condindep_matches_grid_within_band():
    e0s = default_e0_samples(PROD, 10)
    a = region_condindep(PROD, 2, ("psi", "psibar"), e0s)
    b = region_grid(PROD, 2, 2, ("psi", "psibar"), e0s, resolution=200)
    assert np.all(np.abs(a.e1 - b.e1) <= np.array(b.uncertainty) + 2e-4)


def test_convex_matches_condindep_point():
    e0 = 0.05
    e1, resid = convexprog_boundary_point(PROD, e0, 2, "psi")
    exact = region_condindep(PROD, 2, ("psi",), [e0], tol=1e-7).e1[0]
    assert resid < 1e-6
    assert e1 == pytest.approx(exact, abs=1e-4)
    with pytest.raises(ValueError):
        region_threshold_convexprog(PROD, 4)


def test_convex_matches_grid_on_non_product(h1):
    e0s = default_e0_samples(h1, 8)
    conv = region_threshold_convexprog(h1, 2, "psi", e0s)
    grid = region_grid(h1, 2, 2, ("psi",), e0s, resolution=200)
    assert np.all(np.abs(conv.e1 - grid.e1) <= np.array(grid.uncertainty))


def test_unequal_sizes_match_across_methods():
    e0s = default_e0_samples(PROD, 6)
    cond = compute_region(PROD, "psi:3,2@condindep", e0s)
    conv = compute_region(PROD, "psi:3,2@convex", e0s)
    assert np.allclose(cond.e1, conv.e1, atol=1e-3)


def test_region_csv_layout():
    rb = RegionBoundary([(0.1, 0.2)], "1bit", "grid", [0.01])
    lines = rb.to_csv({"seed": 1}, scale=2.0).splitlines()
    assert lines[0] == "# seed: 1"
    assert lines[1] == "e0_nats,e1_nats,constraint,method,uncertainty"
    assert lines[2].split(",")[:2] == ["0.2", "0.4"]


@pytest.mark.parametrize("descriptor", ["bogus", "1bit@nope", "psi:3,2@box"])
def test_unknown_descriptors(descriptor, h1):
    with pytest.raises(ValueError):
        compute_region(h1, descriptor, [0.1])


def test_ex1_local_and_full_end_at_stein(h1):
    local = compute_region(h1, "local_X", [1e-3, math.log(2) / 3])
    full = compute_region(h1, "full", [math.log(3) / 3])
    assert local.e1[-1] == 0.0 and full.e1[0] == 0.0
    assert local.e1[0] > 0
