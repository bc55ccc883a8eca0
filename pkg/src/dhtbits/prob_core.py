"""Finite-alphabet distributions, KL divergence, types and i.i.d. sampling."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUM_TOL = 1e-12
ZERO_TOL = 1e-15
POSITIVITY_FLOOR = 1e-12


class DivergenceInfinite(ValueError):
    """q puts mass where p has none."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Distribution:
    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("distribution must be a non-empty vector")
        if np.any(p < -ZERO_TOL) or abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"not a probability vector: {p}")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    @property
    def dim(self) -> int:
        return self.probs.size

    def support(self) -> np.ndarray:
        return self.probs > ZERO_TOL

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __repr__(self) -> str:
        return f"Distribution({np.round(self.probs, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Joint pmf with rows indexed by x and columns by y."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 2:
            raise ValueError("joint distribution must be a matrix")
        if np.any(p < -ZERO_TOL) or abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"not a joint probability matrix: {p}")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    def is_product(self, tol: float = 1e-10) -> bool:
        px, py = marginals(self)
        return bool(np.max(np.abs(np.outer(px.probs, py.probs) - self.probs)) <= tol)

    def __eq__(self, other) -> bool:
        return isinstance(other, JointDistribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class HypothesisPair:
    p0: JointDistribution
    p1: JointDistribution

    def __post_init__(self):
        if self.p0.shape != self.p1.shape:
            raise ValueError(f"shape mismatch {self.p0.shape} vs {self.p1.shape}")
        for name, p in (("P0", self.p0), ("P1", self.p1)):
            if np.min(p.probs) < POSITIVITY_FLOOR:
                raise ValueError(f"{name} has an entry below {POSITIVITY_FLOOR}; strictly positive joints required")

    def __getitem__(self, i: int) -> JointDistribution:
        return (self.p0, self.p1)[i]

    @property
    def shape(self) -> tuple[int, int]:
        return self.p0.shape

    def marginals(self, i: int) -> tuple[Distribution, Distribution]:
        return marginals(self[i])

    def is_product(self, tol: float = 1e-10) -> bool:
        return self.p0.is_product(tol) and self.p1.is_product(tol)

    def swapped(self) -> HypothesisPair:
        return HypothesisPair(self.p1, self.p0)

    def to_json(self) -> dict:
        return {"P0": self.p0.probs.tolist(), "P1": self.p1.probs.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> HypothesisPair:
        try:
            p0, p1 = obj["P0"], obj["P1"]
        except (KeyError, TypeError) as exc:
            raise ValueError("hypothesis JSON needs keys 'P0' and 'P1'") from exc
        return cls(JointDistribution(np.asarray(p0, float)), JointDistribution(np.asarray(p1, float)))


def load_hypotheses(path: str | Path) -> HypothesisPair:
    with open(path) as fh:
        return HypothesisPair.from_json(json.load(fh))


@dataclass(frozen=True, eq=False)
class EmpiricalType:
    counts: np.ndarray
    n: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        c.setflags(write=False)
        if np.any(c < 0) or int(c.sum()) != self.n:
            raise ValueError("counts must be non-negative and sum to n")
        object.__setattr__(self, "counts", c)

    def to_distribution(self) -> Distribution:
        return Distribution(self.counts / self.n)


def kl_divergence(q: Distribution, p: Distribution) -> float:
    """D(q||p) in nats."""
    if q.dim != p.dim:
        raise ValueError(f"dimension mismatch {q.dim} vs {p.dim}")
    return _kl(q.probs, p.probs)


def kl_divergence_joint(q: JointDistribution, p: JointDistribution) -> float:
    if q.shape != p.shape:
        raise ValueError(f"shape mismatch {q.shape} vs {p.shape}")
    return _kl(q.probs.ravel(), p.probs.ravel())


def _kl(q: np.ndarray, p: np.ndarray) -> float:
    s = q > ZERO_TOL
    if np.any(p[s] <= 0):
        raise DivergenceInfinite("q(z) > 0 where p(z) = 0")
    return max(float(np.sum(q[s] * np.log(q[s] / p[s]))), 0.0)


def kl_rows(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Vectorized D(q_k||p) over the leading axes of q; p strictly positive."""
    q = np.asarray(q, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > ZERO_TOL, q * np.log(q / p), 0.0)
    return np.maximum(terms.sum(axis=-1), 0.0)


def marginals(q: JointDistribution) -> tuple[Distribution, Distribution]:
    px = q.probs.sum(axis=1)
    py = q.probs.sum(axis=0)
    return Distribution(px / px.sum()), Distribution(py / py.sum())


def product_joint(px: Distribution, py: Distribution) -> JointDistribution:
    return JointDistribution(np.outer(px.probs, py.probs))


def sample_iid(p: JointDistribution, n: int, seed: int) -> tuple[EmpiricalType, EmpiricalType]:
    """Marginal types of n i.i.d. draws from p.

    Draw k uses the Philox stream keyed by ``seed`` at counter position k, so the
    result does not depend on how draws are batched.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    nx, ny = p.shape
    cdf = np.cumsum(p.probs.ravel())
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    idx = np.minimum(idx, nx * ny - 1)
    xs, ys = np.divmod(idx, ny)
    return (EmpiricalType(np.bincount(xs, minlength=nx), n),
            EmpiricalType(np.bincount(ys, minlength=ny), n))
