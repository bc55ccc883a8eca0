"""Shipped hypothesis pairs and the staircase set pair used to compare 4x4 decoders."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .decoder_algebra import DECFOUR, DecisionMatrix
from .prob_core import HypothesisPair, JointDistribution, product_joint, Distribution
from .separability import (
    GridSet,
    Labeling,
    SimplexGrid,
    SearchBudgetExhausted,
    divergence_ball_set,
    generic_separability_search,
    threshold_separable,
)


def ex1() -> HypothesisPair:
    """Binary pair with mirrored marginals (1/3, 2/3) and (2/3, 1/3)."""
    p0 = np.array([[1, 1], [1, 3]]) / 6
    p1 = np.array([[3, 1], [1, 1]]) / 6
    return HypothesisPair(JointDistribution(p0), JointDistribution(p1))


def ex2() -> HypothesisPair:
    """Ternary product pair with identical X and Y marginals."""
    m0 = Distribution(np.array([1, 1, 6]) / 8)
    m1 = Distribution(np.array([3, 3, 2]) / 8)
    return HypothesisPair(product_joint(m0, m0), product_joint(m1, m1))


def degenerate(shape=(2, 2)) -> HypothesisPair:
    p = JointDistribution(np.full(shape, 1.0 / (shape[0] * shape[1])))
    return HypothesisPair(p, p)


def alpha_eps_pair(alpha: float, eps: float) -> HypothesisPair:
    """Binary pair whose P1 is the transpose of P0, with off-diagonal mass eps split alpha : 1-alpha."""
    if not (0 < alpha < 0.5 and 0 < eps < 1):
        raise ValueError("need alpha in (0, 1/2) and eps in (0, 1)")
    p0 = np.array([[(1 - eps) / 2, alpha * eps], [(1 - alpha) * eps, (1 - eps) / 2]])
    return HypothesisPair(JointDistribution(p0), JointDistribution(p0.T.copy()))


def load_json_fixture(name: str) -> dict:
    with resources.files("dhtbits").joinpath("data", name).open() as fh:
        return json.load(fh)


# ---------------------------------------------------------------- staircase sets

STAIR_NX, STAIR_NY = 8, 7
_HALF_AXES = (4.0, 0.345)
_CENTERS = ((-0.5, 0.5), (0.5, -0.5))
_ORIGIN = (-4.35, -3.85)


def _ellipse_hits_cell(center, cx: float, cy: float, sub: int = 40) -> bool:
    # sample the unit cell and test the 45-degree rotated ellipse
    u = (np.arange(sub) + 0.5) / sub - 0.5
    px, py = np.meshgrid(cx + u, cy + u, indexing="ij")
    dx, dy = px - center[0], py - center[1]
    c = s = np.sqrt(0.5)
    a = dx * c + dy * s
    b = -dx * s + dy * c
    return bool(np.any((a / _HALF_AXES[0]) ** 2 + (b / _HALF_AXES[1]) ** 2 <= 1.0))


def staircase_grids() -> tuple[SimplexGrid, SimplexGrid]:
    """Binary grids with 8 and 7 points, used only as index carriers for the cells."""
    return SimplexGrid(2, STAIR_NX - 1), SimplexGrid(2, STAIR_NY - 1)


def staircase_sets() -> tuple[GridSet, GridSet]:
    """Two thin diagonal strips, mirror images of each other, on an 8 x 7 cell board.

    A cell belongs to a set when the set's tilted ellipse meets it.
    """
    xg, yg = staircase_grids()
    masks = []
    for center in _CENTERS:
        m = np.zeros((STAIR_NX, STAIR_NY), bool)
        for i, j in itertools.product(range(STAIR_NX), range(STAIR_NY)):
            m[i, j] = _ellipse_hits_cell(center, _ORIGIN[0] + i + 1, _ORIGIN[1] + j + 1)
        masks.append(GridSet(xg, yg, m))
    return masks[0], masks[1]


def staircase_labeling() -> Labeling:
    """Period-4 symbols along each axis."""
    tx = np.arange(STAIR_NX) % 4
    ty = 3 - (np.arange(1, STAIR_NY + 1) % 4)
    return Labeling(tx, ty)


# ---------------------------------------------------------------- family search

@dataclass(frozen=True)
class FamilyCandidate:
    alpha: float
    eps: float
    e: float
    psi_separable: bool
    psibar_separable: bool
    decfour_labeling: Labeling | None
    search_exhausted: bool

    @property
    def realizes(self) -> bool:
        return (not self.psi_separable and not self.psibar_separable
                and self.decfour_labeling is not None)


def family_candidate(alpha: float, eps: float, e: float, resolution: int = 40,
                     budget: int = 200_000, decoder: DecisionMatrix = DECFOUR) -> FamilyCandidate:
    """Check one (alpha, eps, E): is (D_0(E), D_1(E)) split by ``decoder`` but by neither 4x4 threshold decoder?"""
    h = alpha_eps_pair(alpha, eps)
    grids = (SimplexGrid(2, resolution), SimplexGrid(2, resolution))
    a = divergence_ball_set(h, 0, e, grids)
    b = divergence_ball_set(h, 1, e, grids)
    if np.any(a.mask & b.mask):
        return FamilyCandidate(alpha, eps, e, False, False, None, False)
    sep = threshold_separable(a, b, 4, 4)
    sep_bar = threshold_separable(a, b, 4, 4, bar=True)
    lab, exhausted = None, False
    if not (sep or sep_bar):
        try:
            lab = generic_separability_search(a, b, decoder, budget)
        except SearchBudgetExhausted:
            exhausted = True
    return FamilyCandidate(alpha, eps, e, sep, sep_bar, lab, exhausted)


def search_family(alphas, epss, es, resolution: int = 40, budget: int = 200_000):
    """Scan a parameter box; yields every evaluated candidate."""
    for alpha, eps, e in itertools.product(alphas, epss, es):
        yield family_candidate(alpha, eps, e, resolution, budget)

