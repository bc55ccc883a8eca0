"""Error-exponent region boundaries.

All exponents are in nats. A boundary is traced at fixed E0 samples by
bisection on E1: achievable regions are closed and down-closed, so membership
in E1 is a monotone predicate for each E0.

Methods:

* ``region_condindep``: product hypotheses, closed-form recursion on local
  exponents (no grids).
* ``region_grid``: threshold separability of the gridded sets {D*_i < E_i}.
* ``region_threshold_convexprog``: the boundary as the optimum of a coupled
  convex program over joint distributions (M = 2, 3).
* ``region_box_onebit``: the one-bit region from the divergence-box form.
* ``region_baselines``: local decision, zero-rate and non-distributed tests.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .prob_core import HypothesisPair, kl_divergence_joint, kl_rows
from .separability import (
    SimplexGrid,
    STRICT_BUFFER,
    default_grid,
    divergence_ball_set,
    dstar_grid,
    threshold_separable,
)

Decoder = Literal["psi", "psibar"]
BISECT_TOL = 1e-4
N_E0_SAMPLES = 50


class NonProductHypotheses(ValueError):
    pass


@dataclass
class RegionBoundary:
    points: list[tuple[float, float]]
    constraint: str
    method: str
    uncertainty: list[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.uncertainty:
            self.uncertainty = [0.0] * len(self.points)

    @property
    def e0(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def e1(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def to_csv(self, header: dict | None = None, scale: float = 1.0) -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["e0_nats", "e1_nats", "constraint", "method", "uncertainty"])
        for (e0, e1), u in zip(self.points, self.uncertainty):
            w.writerow([f"{e0 * scale:.10g}", f"{e1 * scale:.10g}", self.constraint, self.method,
                        f"{u * scale:.3g}"])
        return buf.getvalue()


# ---------------------------------------------------------------- local exponents

def _geometric(p_a: np.ndarray, p_b: np.ndarray, s: float) -> np.ndarray:
    w = (1 - s) * np.log(p_a) + s * np.log(p_b)
    w = np.exp(w - w.max())
    return w / w.sum()


def _lambda(p_i: np.ndarray, p_ib: np.ndarray, t: float) -> float:
    """inf{D(Q||p_i): D(Q||p_ib) < t}; +inf when the constraint set is empty."""
    if t == math.inf:
        return 0.0
    if t <= 0:
        return math.inf
    if float(kl_rows(p_i, p_ib)) <= t:
        # at equality the infimum over the open ball is approached, not attained
        return 0.0
    # on the path s -> Q_s, D(Q_s||p_ib) falls from D(p_i||p_ib) to 0
    f = lambda s: float(kl_rows(_geometric(p_i, p_ib, s), p_ib)) - t
    s = brentq(f, 0.0, 1.0, xtol=1e-14, rtol=1e-14)
    return float(kl_rows(_geometric(p_i, p_ib, s), p_i))


def lambda_local(p0, p1, i: int, t: float) -> float:
    """Optimal exponent of one hypothesis given a constraint on the other.

    Returns inf{D(Q||P^(i)) : D(Q||P^(1-i)) < t}. The minimizer lies on the
    geometric mixture path between P^(i) and P^(1-i); the crossing point is
    found by root bracketing on the mixing weight.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    a = np.asarray(getattr(p0, "probs", p0), float).ravel()
    b = np.asarray(getattr(p1, "probs", p1), float).ravel()
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    p_i, p_ib = (a, b) if i == 0 else (b, a)
    return _lambda(p_i, p_ib, t)


def _two_ball_inf(p_c: np.ndarray, p_cb: np.ndarray, r_c: float, r_cb: float) -> float:
    """inf of D(.||p_c) over {D(.||p_c) < r_c, D(.||p_cb) < r_cb}; +inf if empty."""
    lam = _lambda(p_c, p_cb, r_cb)
    return lam if lam < r_c else math.inf


# ---------------------------------------------------------------- product hypotheses

def _product_marginals(h: HypothesisPair):
    if not h.is_product(1e-10):
        raise NonProductHypotheses("both hypotheses must be product distributions")
    (x0, y0), (x1, y1) = h.marginals(0), h.marginals(1)
    return (x0.probs, x1.probs), (y0.probs, y1.probs)


@dataclass(frozen=True)
class GammaResult:
    gamma_x: tuple[float, ...]
    gamma_y: tuple[float, ...]
    member: bool


def gamma_recursion(h: HypothesisPair, e0: float, e1: float, m: int) -> GammaResult:
    """Closed-form membership test for the threshold decoder psi_{M,M}.

    gamma^(0) is +inf on both sides and
    gamma_X^(k) = E_c - lambda_Y^(c)(gamma_Y^(k-1)),
    gamma_Y^(k) = E_c - lambda_X^(c)(gamma_X^(k-1)), with c = k mod 2.
    (E0, E1) is achievable iff gamma_X^(M) + gamma_Y^(M) <= E_c for c = M mod 2.
    """
    if m < 1:
        raise ValueError("M must be >= 1")
    (x0, x1), (y0, y1) = _product_marginals(h)
    px, py = (x0, x1), (y0, y1)
    e = (e0, e1)
    gx, gy = [math.inf], [math.inf]
    for k in range(1, m + 1):
        c = k % 2
        gx.append(e[c] - _lambda(py[c], py[1 - c], gy[-1]))
        gy.append(e[c] - _lambda(px[c], px[1 - c], gx[-2]))
    c = m % 2
    return GammaResult(tuple(gx), tuple(gy), bool(gx[m] + gy[m] - e[c] <= 0))


def gamma_boxes(gamma: Sequence[float], k: int) -> tuple[float, float]:
    """Radii (r0, r1) of the k-th region {D(.||P^0) < r0, D(.||P^1) < r1} from gamma values."""
    if k == 0:
        return math.inf, math.inf
    c = k % 2
    r = [0.0, 0.0]
    r[c] = gamma[k]
    r[1 - c] = gamma[k - 1]
    return r[0], r[1]


@dataclass(frozen=True)
class RadiiChain:
    """Regions Q^(k) = {D(.||P^0) < r0, D(.||P^1) < r1} on each axis, k = 0..M-1."""

    x: tuple[tuple[float, float], ...]
    y: tuple[tuple[float, float], ...]
    member: bool


def _parity(k: int, decoder: str) -> int:
    return (k + (decoder == "psibar")) % 2


def product_radii_chain(h: HypothesisPair, e0: float, e1: float, mx: int, my: int,
                        decoder: Decoder = "psi") -> RadiiChain:
    """Threshold regions for product hypotheses, for any (mx, my) and either polarity.

    Each region on an axis is an intersection of two divergence balls around
    the axis marginals, and the infimum of D(.||P^c) over such an intersection
    is a local exponent, so the whole recursion reduces to scalar radii.
    """
    (x0, x1), (y0, y1) = _product_marginals(h)
    px, py = (x0, x1), (y0, y1)
    e = (e0, e1)
    m = min(mx, my)
    if mx != my and decoder == "psibar":
        # the complement is equivalent to psi when sizes differ
        decoder = "psi"
    rx, ry = [math.inf, math.inf], [math.inf, math.inf]
    if mx > my:
        rx[0] = e0
    elif my > mx:
        ry[0] = e0
    chain_x, chain_y = [tuple(rx)], [tuple(ry)]

    def inf_over(p, r, c):
        return _two_ball_inf(p[c], p[1 - c], r[c], r[1 - c])

    for k in range(1, m):
        c = _parity(k, decoder)
        new_x = min(rx[c], e[c] - inf_over(py, ry, c))
        new_y = min(ry[c], e[c] - inf_over(px, rx, c))
        rx[c], ry[c] = new_x, new_y
        chain_x.append(tuple(rx))
        chain_y.append(tuple(ry))
    c = _parity(m, decoder)
    member = inf_over(px, rx, c) + inf_over(py, ry, c) >= e[c]
    return RadiiChain(tuple(chain_x), tuple(chain_y), bool(member))


def condindep_member(h: HypothesisPair, e0: float, e1: float, mx: int, my: int,
                     decoder: Decoder = "psi") -> bool:
    if mx == my and decoder == "psi":
        return gamma_recursion(h, e0, e1, mx).member
    if mx == my and decoder == "psibar":
        # the complement separates (A, A') iff psi separates (A', A)
        return gamma_recursion(h.swapped(), e1, e0, mx).member
    return product_radii_chain(h, e0, e1, mx, my, decoder).member


# ---------------------------------------------------------------- boundary tracing

def stein_endpoints(h: HypothesisPair) -> tuple[float, float]:
    """(D(P1||P0), D(P0||P1)) for the joints: the widest possible E0 and E1 ranges."""
    return kl_divergence_joint(h.p1, h.p0), kl_divergence_joint(h.p0, h.p1)


def default_e0_samples(h: HypothesisPair, n: int = N_E0_SAMPLES) -> np.ndarray:
    """n equispaced E0 values in (0, D(P1||P0)]; E0 = 0 itself is unbounded in E1."""
    top = stein_endpoints(h)[0]
    return np.linspace(top / n, top, n)


def trace_boundary(member: Callable[[float, float], bool], e0_samples: Iterable[float],
                   e1_hi: float, tol: float = BISECT_TOL) -> list[tuple[float, float]]:
    pts = []
    for e0 in e0_samples:
        lo, hi = 0.0, e1_hi
        if member(e0, hi):
            pts.append((float(e0), hi))
            continue
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if member(e0, mid):
                lo = mid
            else:
                hi = mid
        pts.append((float(e0), lo))
    return pts


def _e1_ceiling(h: HypothesisPair) -> float:
    return stein_endpoints(h)[1] * (1 + 1e-9) + 1e-9


def region_condindep(h: HypothesisPair, m: int, decoders: Sequence[str] = ("psi", "psibar"),
                     e0_samples=None, tol: float = BISECT_TOL, my: int | None = None) -> RegionBoundary:
    """Boundary of the threshold-decoder union for product hypotheses.

    ``m`` is the size on the X side; pass ``my`` for unequal sizes.
    """
    my = m if my is None else my
    _product_marginals(h)
    if e0_samples is None:
        e0_samples = default_e0_samples(h)
    if stein_endpoints(h)[0] <= 0:
        return RegionBoundary([(0.0, 0.0)], f"0_{m}x0_{my}", "condindep")

    def member(e0, e1):
        return any(condindep_member(h, e0, e1, m, my, d) for d in decoders)

    pts = trace_boundary(member, e0_samples, _e1_ceiling(h), tol)
    return RegionBoundary(pts, f"0_{m}x0_{my}:{'+'.join(decoders)}", "condindep",
                          [tol] * len(pts), {"tol": tol})


# ---------------------------------------------------------------- grid oracle

def grid_pair(h: HypothesisPair, resolution: int | None = None) -> tuple[SimplexGrid, SimplexGrid]:
    nx, ny = h.shape
    return default_grid(nx, resolution), default_grid(ny, resolution)


def _level_jump(table: np.ndarray, level: float, xg: SimplexGrid, yg: SimplexGrid) -> float:
    """Largest change of a gridded function across one cell where it crosses ``level``."""
    jumps = [0.0]
    for axis, g in ((0, xg), (1, yg)):
        pts = g.points
        adjacent = np.max(np.abs(np.diff(pts, axis=0)), axis=1) <= 1.0 / g.resolution + 1e-12
        a = np.take(table, np.arange(len(g) - 1), axis=axis)
        b = np.take(table, np.arange(1, len(g)), axis=axis)
        shape = [1, 1]
        shape[axis] = -1
        ok = adjacent.reshape(shape)
        straddle = ok & (np.minimum(a, b) <= level) & (np.maximum(a, b) >= level)
        if straddle.any():
            jumps.append(float(np.max(np.abs(a - b)[straddle])))
    return max(jumps)


def grid_uncertainty(h: HypothesisPair, grids, e0: float, e1: float) -> float:
    xg, yg = grids
    return (_level_jump(dstar_grid(h, 0, xg, yg), e0, xg, yg)
            + _level_jump(dstar_grid(h, 1, xg, yg), e1, xg, yg))


def grid_member(h: HypothesisPair, grids, e0: float, e1: float, mx: int, my: int,
                decoder: Decoder = "psi") -> bool:
    a = divergence_ball_set(h, 0, e0, grids)
    b = divergence_ball_set(h, 1, e1, grids)
    if np.any(a.mask & b.mask):
        # no decoder separates overlapping sets
        return False
    return threshold_separable(a, b, mx, my, bar=(decoder == "psibar"))


def region_grid(h: HypothesisPair, mx: int, my: int, decoders: Sequence[str] = ("psi",),
                e0_samples=None, tol: float = BISECT_TOL, resolution: int | None = None) -> RegionBoundary:
    """Threshold-decoder boundary from separability of the gridded divergence sets."""
    grids = grid_pair(h, resolution)
    if e0_samples is None:
        e0_samples = default_e0_samples(h)

    def member(e0, e1):
        return any(grid_member(h, grids, e0, e1, mx, my, d) for d in decoders)

    pts = trace_boundary(member, e0_samples, _e1_ceiling(h), tol)
    unc = [grid_uncertainty(h, grids, e0, e1) + tol for e0, e1 in pts]
    return RegionBoundary(pts, f"0_{mx}x0_{my}:{'+'.join(decoders)}", "grid", unc,
                          {"resolution": grids[0].resolution, "tol": tol})


def region_box_onebit(h: HypothesisPair, decoders: Sequence[str] = ("psi", "psibar"),
                      e0_samples=None, resolution: int | None = None) -> RegionBoundary:
    """One-bit boundary from the divergence-box form.

    psi_{2,2} works iff no point of {D*_0 < E0} has both marginals within E1
    of the H1 marginals; the complement iff no point of {D*_1 < E1} has both
    marginals within E0 of the H0 marginals. Both are direct minimizations
    over the grid, with no bisection.
    """
    xg, yg = grid_pair(h, resolution)
    if e0_samples is None:
        e0_samples = default_e0_samples(h)
    (x0, y0), (x1, y1) = h.marginals(0), h.marginals(1)
    t0, t1 = dstar_grid(h, 0, xg, yg), dstar_grid(h, 1, xg, yg)
    bx1 = kl_rows(xg.points, x1.probs)[:, None]
    by1 = kl_rows(yg.points, y1.probs)[None, :]
    box1 = np.maximum(bx1, by1)
    box0 = np.maximum(kl_rows(xg.points, x0.probs)[:, None], kl_rows(yg.points, y0.probs)[None, :])
    ceiling = _e1_ceiling(h)
    pts, unc = [], []
    for e0 in e0_samples:
        best = 0.0
        if "psi" in decoders:
            inside = t0 < e0 - STRICT_BUFFER
            best = max(best, float(box1[inside].min()) if inside.any() else ceiling)
        if "psibar" in decoders:
            inside = box0 < e0 - STRICT_BUFFER
            best = max(best, float(t1[inside].min()) if inside.any() else ceiling)
        best = min(best, ceiling)
        pts.append((float(e0), best))
        unc.append(grid_uncertainty(h, (xg, yg), e0, best))
    return RegionBoundary(pts, f"0_2x0_2:{'+'.join(decoders)}", "box", unc,
                          {"resolution": xg.resolution})


# ---------------------------------------------------------------- convex programs

def _threshold_program(h: HypothesisPair, e0: float, m: int, decoder: str, extra: str | None):
    """Coupled program whose optimum is the boundary E1 at this E0.

    The restriction chain is unrolled into a tree of joint distributions: a
    point of ⊓_k is a joint in A_{k mod 2} whose marginals lie in the
    projections of ⊓_{k-1}. Projections of the two base sets are divergence
    balls on the marginals, so leaves need no joint variable unless the base
    set carries the extra one-axis ball of the unequal-size case.
    """
    import cvxpy as cp

    nx, ny = h.shape
    t = cp.Variable(nonneg=True)
    marg = [h.marginals(0), h.marginals(1)]
    cons = []
    joints = []
    # base set j: (hypothesis, threshold) and its extra ball (hypothesis 0 at E0)
    if decoder == "psibar":
        base = {0: (1, t), 1: (0, e0)}
    else:
        base = {0: (0, e0), 1: (1, t)}

    def div(q, p):
        return cp.sum(cp.rel_entr(q, p))

    def in_base(j, q):
        hyp, thr = base[j]
        c = [div(q, h[hyp].probs) <= thr]
        if j == 1 and extra == "X":
            c.append(div(cp.sum(q, axis=1), marg[0][0].probs) <= e0)
        if j == 1 and extra == "Y":
            c.append(div(cp.sum(q, axis=0), marg[0][1].probs) <= e0)
        return c

    def new_joint():
        q = cp.Variable((nx, ny), nonneg=True)
        joints.append(q)
        cons.append(cp.sum(q) == 1)
        return q

    def in_proj(k: int, axis: int, v):
        if k <= 1:
            hyp, thr = base[k]
            closed = extra is None or k == 0 or (extra == "X" and axis == 0) or (extra == "Y" and axis == 1)
            if closed:
                c = [div(v, marg[hyp][axis].probs) <= thr]
                if k == 1 and extra == ("X" if axis == 0 else "Y"):
                    c.append(div(v, marg[0][axis].probs) <= e0)
                return c
            q = new_joint()
            return in_base(k, q) + [cp.sum(q, axis=1 - axis) == v]
        q = new_joint()
        c = in_base(k % 2, q) + [cp.sum(q, axis=1 - axis) == v]
        c += in_proj(k - 1, 0, cp.sum(q, axis=1)) + in_proj(k - 1, 1, cp.sum(q, axis=0))
        return c

    root = new_joint()
    cons += in_base(m % 2, root)
    if m >= 2:
        cons += in_proj(m - 1, 0, cp.sum(root, axis=1)) + in_proj(m - 1, 1, cp.sum(root, axis=0))
    return cp.Problem(cp.Minimize(t), cons), t, joints


def convexprog_boundary_point(h: HypothesisPair, e0: float, m: int, decoder: str = "psi",
                              extra: str | None = None) -> tuple[float, float]:
    """(E1, residual) at one E0; residual is +inf if the solver did not certify optimality."""
    import cvxpy as cp

    prob, t, joints = _threshold_program(h, e0, m, decoder, extra)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError:
        return math.nan, math.inf
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or t.value is None:
        return math.nan, math.inf
    resid = max(float(c.violation().max()) if np.size(c.violation()) else 0.0 for c in prob.constraints)
    if prob.status == cp.OPTIMAL_INACCURATE:
        resid = max(resid, 1e-4)
    return max(float(t.value), 0.0), resid


def region_threshold_convexprog(h: HypothesisPair, m: int, decoder: str = "psi",
                                e0_samples=None, tol: float = 1e-8, mx: int | None = None) -> RegionBoundary:
    """Threshold-decoder boundary for arbitrary positive hypotheses, M in {2, 3}.

    ``decoder`` is "psi" or "psibar" for equal sizes; pass ``mx > m`` for the
    unequal decoder psi_{mx, m}, which uses the X-restricted second set.
    """
    if m not in (2, 3):
        raise ValueError("convex programs are provided for M = 2 and 3")
    if decoder not in ("psi", "psibar"):
        raise ValueError(f"unknown decoder {decoder!r}")
    extra = None
    if mx is not None and mx != m:
        if mx < m:
            raise ValueError("use mx >= m")
        extra, decoder = "X", "psi"
    if e0_samples is None:
        e0_samples = default_e0_samples(h)
    pts, unc = [], []
    ceiling = _e1_ceiling(h)
    for e0 in e0_samples:
        e1, resid = convexprog_boundary_point(h, float(e0), m, decoder, extra)
        if not math.isfinite(e1):
            pts.append((float(e0), 0.0))
            unc.append(math.inf)
            continue
        pts.append((float(e0), min(e1, ceiling)))
        # a violation r of a divergence constraint moves the optimum by O(r)
        unc.append(max(resid, tol))
    tag = f"0_{mx or m}x0_{m}:{decoder}"
    return RegionBoundary(pts, tag, "convex", unc, {"tol": tol})


# ---------------------------------------------------------------- baselines

def region_baselines(h: HypothesisPair, which: str, e0_samples=None,
                     resolution: int | None = None) -> RegionBoundary:
    if e0_samples is None:
        e0_samples = default_e0_samples(h)
    (x0, y0), (x1, y1) = h.marginals(0), h.marginals(1)
    if which in ("local_X", "local_Y"):
        p0, p1 = (x0, x1) if which == "local_X" else (y0, y1)
        pts = [(float(e0), lambda_local(p0, p1, 1, e0)) for e0 in e0_samples]
        return RegionBoundary(pts, which, "local", [1e-12] * len(pts))
    if which == "non_distributed":
        pts = [(float(e0), lambda_local(h.p0.probs, h.p1.probs, 1, e0)) for e0 in e0_samples]
        return RegionBoundary(pts, which, "mixture_path", [1e-12] * len(pts))
    if which == "zero_rate":
        xg, yg = grid_pair(h, resolution)
        t0, t1 = dstar_grid(h, 0, xg, yg), dstar_grid(h, 1, xg, yg)
        ceiling = _e1_ceiling(h)
        pts, unc = [], []
        for e0 in e0_samples:
            inside = t0 < e0 - STRICT_BUFFER
            e1 = min(float(t1[inside].min()), ceiling) if inside.any() else ceiling
            pts.append((float(e0), e1))
            unc.append(grid_uncertainty(h, (xg, yg), e0, e1))
        return RegionBoundary(pts, which, "grid", unc, {"resolution": xg.resolution})
    raise ValueError(f"unknown baseline {which!r}")


# ---------------------------------------------------------------- descriptors

ALIASES = {
    "local": "local_X",
    "full": "non_distributed",
    "nondistributed": "non_distributed",
    "zero": "zero_rate",
    "1bit": "onebit",
    "1trit": "onetrit",
}


def compute_region(h: HypothesisPair, descriptor: str, e0_samples=None,
                   resolution: int | None = None, tol: float = BISECT_TOL) -> RegionBoundary:
    """Evaluate a constraint descriptor.

    Descriptors: ``local_X``, ``local_Y``, ``zero_rate``, ``non_distributed``
    (alias ``full``), ``1bit``, ``1trit``, ``psi:MX,MY`` or ``psibar:MX,MY``,
    ``condindep:M``, each optionally suffixed ``@grid``, ``@convex``,
    ``@condindep`` or ``@box`` to pick the method.
    """
    name, _, method = descriptor.partition("@")
    name = ALIASES.get(name, name)
    if e0_samples is None:
        e0_samples = default_e0_samples(h)
    if name in ("local_X", "local_Y", "zero_rate", "non_distributed"):
        out = region_baselines(h, name, e0_samples, resolution)
    elif name in ("onebit", "onetrit"):
        m = 2 if name == "onebit" else 3
        method = method or "grid"
        if method == "box" and m == 2:
            out = region_box_onebit(h, e0_samples=e0_samples, resolution=resolution)
        elif method == "grid":
            out = region_grid(h, m, m, ("psi", "psibar"), e0_samples, tol, resolution)
        elif method == "convex":
            a = region_threshold_convexprog(h, m, "psi", e0_samples)
            b = region_threshold_convexprog(h, m, "psibar", e0_samples)
            out = _pointwise_max(a, b)
        elif method == "condindep":
            out = region_condindep(h, m, ("psi", "psibar"), e0_samples, tol)
        else:
            raise ValueError(f"unsupported method {method!r} for {name}")
    elif name.startswith(("psi:", "psibar:")):
        dec, _, sizes = name.partition(":")
        mx, my = (int(v) for v in sizes.split(","))
        method = method or "grid"
        if method == "grid":
            out = region_grid(h, mx, my, (dec,), e0_samples, tol, resolution)
        elif method == "condindep":
            out = region_condindep(h, mx, (dec,), e0_samples, tol, my=my)
        elif method == "convex":
            if mx < my:
                raise ValueError("convex programs take mx >= my")
            out = region_threshold_convexprog(h, my, dec, e0_samples, mx=mx)
        else:
            raise ValueError(f"unsupported method {method!r} for {name}")
    elif name.startswith("condindep:"):
        m = int(name.split(":")[1])
        out = region_condindep(h, m, ("psi", "psibar"), e0_samples, tol)
    else:
        raise ValueError(f"unsupported constraint descriptor {descriptor!r}")
    out.constraint = descriptor
    return out


def _pointwise_max(a: RegionBoundary, b: RegionBoundary) -> RegionBoundary:
    pts, unc = [], []
    for (e0, ea), (_, eb), ua, ub in zip(a.points, b.points, a.uncertainty, b.uncertainty):
        pts.append((e0, max(ea, eb)))
        unc.append(ua if ea >= eb else ub)
    return RegionBoundary(pts, a.constraint, a.method, unc, dict(a.meta))


@dataclass
class IdentityReport:
    lhs: str
    rhs: str
    verdicts: list[tuple[float, float, float, float, bool]]

    @property
    def holds(self) -> bool:
        return all(v[-1] for v in self.verdicts)


def region_identity_check(h: HypothesisPair, lhs: str, rhs: str, e0_samples=None,
                          tol: float = BISECT_TOL, resolution: int | None = None) -> IdentityReport:
    """Compare two boundaries pointwise; a point agrees within both uncertainty bands plus ``tol``."""
    a = compute_region(h, lhs, e0_samples, resolution, tol)
    b = compute_region(h, rhs, a.e0, resolution, tol)
    verdicts = []
    for (e0, ea), (_, eb), ua, ub in zip(a.points, b.points, a.uncertainty, b.uncertainty):
        verdicts.append((e0, ea, eb, ua + ub, abs(ea - eb) <= ua + ub + tol))
    return IdentityReport(lhs, rhs, verdicts)
