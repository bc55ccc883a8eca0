"""Minimum-KL couplings with prescribed marginals.

``d_star`` solves min D(Q||ref) over joints Q with marginals (qx, qy) by
iterative proportional fitting: starting from ``ref``, rows and columns are
rescaled in turn, each step being the exact I-projection onto one marginal
constraint. The scaling form Q = diag(u) ref diag(v) is kept throughout, so a
batch of problems sharing one reference runs as a handful of matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .prob_core import Distribution, JointDistribution, kl_rows, ZERO_TOL

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
_BATCH = 65_536


class CouplingNotConverged(RuntimeError):
    """Raised when IPF hits its sweep cap; ``best`` holds the last iterate."""

    def __init__(self, message: str, best: "CouplingResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class CouplingResult:
    value: float
    argmin: JointDistribution
    iterations: int
    residual: float


def _ipf(ref: np.ndarray, qx: np.ndarray, qy: np.ndarray, tol: float, max_iter: int):
    """Batched IPF. qx is (B, nx), qy is (B, ny). Returns (u, v, iters, residual)."""
    b = qx.shape[0]
    u = np.ones((b, ref.shape[0]))
    v = np.ones((b, ref.shape[1]))
    resid = np.full(b, np.inf)
    iters = np.zeros(b, dtype=np.int64)
    active = np.arange(b)
    for sweep in range(1, max_iter + 1):
        if active.size == 0:
            break
        va = v[active]
        u_a = qx[active] / (va @ ref.T)
        v_a = qy[active] / (u_a @ ref)
        rows = u_a * (v_a @ ref.T)
        r = np.max(np.abs(rows - qx[active]), axis=1)
        u[active], v[active] = u_a, v_a
        resid[active] = r
        iters[active] = sweep
        active = active[r > tol]
    return u, v, iters, resid


def _joint_values(ref: np.ndarray, u: np.ndarray, v: np.ndarray):
    q = u[:, :, None] * ref[None, :, :] * v[:, None, :]
    flat = q.reshape(q.shape[0], -1)
    return q, kl_rows(flat, ref.ravel())


def d_star(ref: JointDistribution, qx: Distribution, qy: Distribution,
           tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> CouplingResult:
    """min D(Q||ref) subject to [Q]_X = qx and [Q]_Y = qy."""
    r = ref.probs
    if r.shape != (qx.dim, qy.dim):
        raise ValueError(f"marginal sizes {(qx.dim, qy.dim)} do not match reference {r.shape}")
    if np.min(r) <= 0:
        raise ValueError("reference joint must be strictly positive")
    u, v, it, res = _ipf(r, qx.probs[None], qy.probs[None], tol, max_iter)
    q, val = _joint_values(r, u, v)
    qn = q[0] / q[0].sum()
    result = CouplingResult(float(val[0]), JointDistribution(qn), int(it[0]), float(res[0]))
    if res[0] > tol:
        raise CouplingNotConverged(f"IPF residual {res[0]:.3e} after {it[0]} sweeps", result)
    return result


def d_star_binary_oracle(ref: JointDistribution, qx: Distribution, qy: Distribution,
                         step: float = 1e-6) -> float:
    """Brute-force D* for 2x2 alphabets.

    With both marginals fixed, a 2x2 joint is determined by t = Q(0,0), which
    ranges over [max(0, qx0 + qy0 - 1), min(qx0, qy0)]. The objective is convex
    in t, so a coarse scan followed by a scan at ``step`` around the coarse
    minimizer is exact to ``step``.
    """
    if ref.shape != (2, 2) or qx.dim != 2 or qy.dim != 2:
        raise ValueError("binary oracle needs 2x2 inputs")
    a, b = qx.probs[0], qy.probs[0]
    lo, hi = max(0.0, a + b - 1.0), min(a, b)
    if hi < lo - 1e-15:
        raise ValueError("empty coupling interval")
    p = ref.probs.ravel()

    def objective(t: np.ndarray) -> np.ndarray:
        q = np.stack([t, a - t, b - t, 1.0 - a - b + t], axis=-1)
        return kl_rows(np.clip(q, 0.0, None), p)

    if hi - lo <= step:
        return float(objective(np.array([lo, hi])).min())
    coarse = max(step, (hi - lo) / 2000)
    ts = np.append(np.arange(lo, hi, coarse), hi)
    k = int(np.argmin(objective(ts)))
    a_lo, a_hi = ts[max(k - 1, 0)], ts[min(k + 1, ts.size - 1)]
    fine = np.append(np.arange(a_lo, a_hi, step), a_hi)
    return float(objective(fine).min())


def d_star_to_set(ref: JointDistribution, qx: Distribution, qy_set: Sequence[Distribution],
                  threshold: float | None = None, tol: float = DEFAULT_TOL) -> float:
    """min over qy in qy_set of D*(qx, qy); +inf for an empty set.

    With ``threshold`` set, returns as soon as some member is at or below it
    (threshold short-circuit): the value is then an upper bound that already
    settles the comparison, not necessarily the minimum.
    """
    best = math.inf
    for qy in qy_set:
        val = d_star(ref, qx, qy, tol).value
        best = min(best, val)
        if threshold is not None and best <= threshold:
            return best
    return best


def d_star_table(ref: JointDistribution, xs: np.ndarray, ys: np.ndarray,
                 tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                 product_fast_path: bool = True) -> np.ndarray:
    """D*(xs[a], ys[b]) for every pair, as an (len(xs), len(ys)) array.

    A product reference gives D* = D(qx||px) + D(qy||py) exactly, which is used
    directly unless ``product_fast_path`` is off.
    """
    r = ref.probs
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    if product_fast_path and ref.is_product():
        px, py = r.sum(axis=1), r.sum(axis=0)
        return kl_rows(xs, px)[:, None] + kl_rows(ys, py)[None, :]
    nx, ny = len(xs), len(ys)
    out = np.empty(nx * ny)
    ia, ib = np.divmod(np.arange(nx * ny), ny)
    for start in range(0, nx * ny, _BATCH):
        sl = slice(start, start + _BATCH)
        qx, qy = xs[ia[sl]], ys[ib[sl]]
        u, v, _, res = _ipf(r, qx, qy, tol, max_iter)
        if np.any(res > tol):
            raise RuntimeError(f"IPF did not converge on {int(np.sum(res > tol))} grid pairs")
        _, val = _joint_values(r, u, v)
        out[sl] = val
    return out.reshape(nx, ny)


def d_star_many(ref: JointDistribution, pairs: Iterable[tuple[np.ndarray, np.ndarray]],
                tol: float = DEFAULT_TOL) -> np.ndarray:
    """D* for an explicit list of (qx, qy) arrays."""
    pairs = list(pairs)
    if not pairs:
        return np.empty(0)
    qx = np.array([p[0] for p in pairs], float)
    qy = np.array([p[1] for p in pairs], float)
    u, v, _, res = _ipf(ref.probs, qx, qy, tol, DEFAULT_MAX_ITER)
    if np.any(res > tol):
        raise RuntimeError("IPF did not converge")
    return _joint_values(ref.probs, u, v)[1]


def i_projection(ref: JointDistribution, qx: np.ndarray, qy: np.ndarray,
                 tol: float = DEFAULT_TOL) -> np.ndarray:
    """The minimizing joint for one marginal pair, as a raw array."""
    u, v, _, _ = _ipf(ref.probs, np.asarray(qx, float)[None], np.asarray(qy, float)[None],
                      tol, DEFAULT_MAX_ITER)
    q = u[0][:, None] * ref.probs * v[0][None, :]
    q[q < ZERO_TOL] = 0.0
    return q / q.sum()
