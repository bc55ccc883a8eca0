"""Monte Carlo estimates of the two error probabilities of a type-based scheme.

Each trial draws n pairs, forms the two marginal types, encodes them and
applies the decision matrix. Only the joint type matters, so a trial samples
joint-type counts from a multinomial directly.

Errors decay like exp(-nE), which is out of reach of plain sampling for the
sample sizes of interest, so ``run_trials`` can importance-sample from a
mixture of tilted joints that put the dominating error types at the centre.
Weights are kept in the log domain.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binomtest

from .coupling import i_projection
from .decoder_algebra import DecisionMatrix, threshold_decoder, threshold_decoder_bar
from .encoding import EncoderPair, TypeEncoder
from .prob_core import HypothesisPair
from .separability import dstar_grid

CHUNK = 20_000
MIN_ERRORS = 50
DEFENSIVE_WEIGHT = 0.1


class ExponentTooLarge(RuntimeError):
    """No errors observed at the largest n; ``lower_bound`` is a one-sided bound on the exponent."""

    def __init__(self, message: str, lower_bound: float):
        super().__init__(message)
        self.lower_bound = lower_bound


@dataclass(frozen=True)
class CodingScheme:
    encoder_x: TypeEncoder
    encoder_y: TypeEncoder
    decoder: DecisionMatrix

    def __post_init__(self):
        if self.encoder_x.n_symbols > self.decoder.mx or self.encoder_y.n_symbols > self.decoder.my:
            raise ValueError("encoder symbol ranges exceed the decision matrix")

    def decide_counts(self, cx: np.ndarray, cy: np.ndarray, n: int) -> np.ndarray:
        """Decisions for rows of marginal counts."""
        return self.decoder(_encode_counts(self.encoder_x, cx, n),
                            _encode_counts(self.encoder_y, cy, n)).astype(np.int8)

    @classmethod
    def from_pair(cls, pair: EncoderPair) -> CodingScheme:
        if pair.variant == "psibar":
            d = threshold_decoder_bar(pair.mx, pair.my)
        else:
            d = threshold_decoder(pair.mx, pair.my)
        return cls(pair.x, pair.y, d)


def _encode_counts(enc: TypeEncoder, counts: np.ndarray, n: int) -> np.ndarray:
    # few distinct types per batch: snap each once
    uniq, inv = np.unique(counts, axis=0, return_inverse=True)
    return enc.encode_many(uniq / n)[inv.ravel()]


@dataclass
class ErrorEstimate:
    n: int
    trials: int
    hypothesis: int
    errors: int
    rate: float
    log_rate: float
    interval: tuple[float, float]
    seed: int
    method: str = "mc"
    log_stderr: float = math.nan

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate outside [0, 1]")

    @property
    def pi0_hat(self) -> float | None:
        return self.rate if self.hypothesis == 0 else None

    @property
    def pi1_hat(self) -> float | None:
        return self.rate if self.hypothesis == 1 else None

    def to_json(self) -> dict:
        d = asdict(self)
        d["interval"] = list(self.interval)
        return d


@dataclass(frozen=True)
class Proposal:
    """Mixture of joints used for importance sampling, with the true joint as a defensive component."""

    joints: tuple[np.ndarray, ...]
    weights: tuple[float, ...]


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, chunk]))


def _run_chunk(args):
    h_probs, scheme, n, size, hyp, seed, chunk, proposal = args
    rng = _chunk_rng(seed, chunk)
    p = h_probs[hyp].ravel()
    nx, ny = h_probs[hyp].shape
    if proposal is None:
        counts = rng.multinomial(n, p, size=size)
        logw = None
    else:
        comps = [np.asarray(q, float).ravel() for q in proposal.joints]
        which = rng.choice(len(comps), size=size, p=np.asarray(proposal.weights))
        counts = np.empty((size, nx * ny), np.int64)
        for j, q in enumerate(comps):
            sel = which == j
            if sel.any():
                counts[sel] = rng.multinomial(n, q, size=int(sel.sum()))
        # log P^n(z) - log sum_j w_j Q_j^n(z), per trial
        logp = counts @ np.log(p)
        logq = np.stack([counts @ np.log(q) + math.log(w) for q, w in zip(comps, proposal.weights)])
        logw = logp - logsumexp(logq, axis=0)
    joint = counts.reshape(size, nx, ny)
    dec = scheme.decide_counts(joint.sum(axis=2), joint.sum(axis=1), n)
    err = dec != hyp
    if logw is None:
        return int(err.sum()), None
    return int(err.sum()), logw[err]


def run_trials(h: HypothesisPair, scheme: CodingScheme, n: int, trials: int, hypothesis: int,
               seed: int, jobs: int = 1, proposal: Proposal | None = None) -> ErrorEstimate:
    """Estimate pi_hypothesis at sample length n.

    Trials are split into fixed chunks, each with its own counter-keyed stream,
    so the estimate depends only on (seed, inputs), never on ``jobs``.
    """
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    if hypothesis not in (0, 1):
        raise ValueError("hypothesis must be 0 or 1")
    probs = (h.p0.probs, h.p1.probs)
    tasks = []
    for c, start in enumerate(range(0, trials, CHUNK)):
        tasks.append((probs, scheme, n, min(CHUNK, trials - start), hypothesis, seed, c, proposal))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]
    errors = sum(r[0] for r in results)
    if proposal is None:
        rate = errors / trials
        ci = binomtest(errors, trials).proportion_ci(method="wilson")
        log_rate = math.log(rate) if errors else -math.inf
        se = math.sqrt((1 - rate) / errors) if errors else math.inf
        return ErrorEstimate(n, trials, hypothesis, errors, rate, log_rate,
                             (float(ci.low), float(ci.high)), seed, "mc", se)
    logw = np.concatenate([r[1] for r in results]) if errors else np.empty(0)
    if errors == 0:
        return ErrorEstimate(n, trials, hypothesis, 0, 0.0, -math.inf, (0.0, 1.0), seed, "is", math.inf)
    log_rate = float(logsumexp(logw) - math.log(trials))
    # relative standard error of the weighted mean, all in log scale
    log_m2 = float(logsumexp(2 * logw) - math.log(trials))
    rel_var = max(math.exp(log_m2 - 2 * log_rate) - 1.0, 0.0) / trials
    rel_se = math.sqrt(rel_var)
    rate = math.exp(log_rate)
    lo = rate * max(1.0 - 1.96 * rel_se, 0.0)
    hi = min(rate * (1.0 + 1.96 * rel_se), 1.0)
    return ErrorEstimate(n, trials, hypothesis, errors, min(rate, 1.0), log_rate, (lo, max(hi, rate)),
                         seed, "is", rel_se)


# ---------------------------------------------------------------- proposals

def decision_table(scheme: CodingScheme) -> np.ndarray:
    """Decision at every (x-grid, y-grid) cell."""
    return scheme.decoder(scheme.encoder_x.levels[:, None], scheme.encoder_y.levels[None, :]).astype(np.int8)


def scheme_exponents(h: HypothesisPair, scheme: CodingScheme) -> tuple[float, float]:
    """Grid values of min D*_i over the cells where the scheme decides 1 - i."""
    xg, yg = scheme.encoder_x.grid, scheme.encoder_y.grid
    dec = decision_table(scheme)
    out = []
    for i in (0, 1):
        t = dstar_grid(h, i, xg, yg)
        wrong = dec != i
        out.append(float(t[wrong].min()) if wrong.any() else math.inf)
    return out[0], out[1]


def tilted_proposal(h: HypothesisPair, scheme: CodingScheme, hypothesis: int,
                    defensive: float = DEFENSIVE_WEIGHT, slack: float = 0.02) -> Proposal | None:
    """I-projections of P^(i) at the cheapest error cell of each wrong symbol pair.

    Pairs whose cheapest cell is more than ``slack`` nats above the overall
    minimum are dropped. Returns None when the scheme never errs.
    """
    xg, yg = scheme.encoder_x.grid, scheme.encoder_y.grid
    t = dstar_grid(h, hypothesis, xg, yg)
    lx, ly = scheme.encoder_x.levels, scheme.encoder_y.levels
    dec = decision_table(scheme)
    wrong = dec != hypothesis
    if not wrong.any():
        return None
    best = float(t[wrong].min())
    cells = []
    for sx in np.unique(lx):
        for sy in np.unique(ly):
            m = wrong & (lx[:, None] == sx) & (ly[None, :] == sy)
            if not m.any():
                continue
            vals = np.where(m, t, np.inf)
            k = int(np.argmin(vals))
            if vals.flat[k] <= best + slack:
                cells.append(np.unravel_index(k, t.shape))
    joints = []
    ref = h[hypothesis]
    for i, j in cells:
        q = i_projection(ref, xg.points[i], yg.points[j])
        # keep the proposal strictly positive so every weight is finite
        q = np.maximum(q, 1e-12)
        joints.append(q / q.sum())
    w = [(1 - defensive) / len(joints)] * len(joints)
    return Proposal(tuple(joints) + (ref.probs,), tuple(w) + (defensive,))


# ---------------------------------------------------------------- exponents

@dataclass
class ExponentFit:
    slope: float
    stderr: float
    intercept: float
    log_n_coef: float | None
    estimates: list[ErrorEstimate] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "log_n_coef": self.log_n_coef,
            "table": [e.to_json() for e in self.estimates],
        }


def fit_exponent(ns: Sequence[int], log_rates: Sequence[float], log_n: bool = False):
    """Least squares of -log pi on n (plus intercept, plus log n if asked); returns (slope, stderr, coefs)."""
    ns = np.asarray(ns, float)
    y = -np.asarray(log_rates, float)
    cols = [ns, np.ones_like(ns)] + ([np.log(ns)] if log_n else [])
    a = np.column_stack(cols)
    if len(ns) <= a.shape[1]:
        raise ValueError("need more n values than regression coefficients")
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    dof = len(ns) - a.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(a.T @ a)
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), coef


def estimate_exponent(h: HypothesisPair, scheme: CodingScheme, hypothesis: int, n_grid: Sequence[int],
                      trials: int, seed: int, jobs: int = 1, importance: bool = False,
                      log_n: bool = False, max_trials: int = 10_000_000) -> ExponentFit:
    """Slope of -log pi_i against n.

    Plain sampling escalates the trial count geometrically (up to
    ``max_trials``) until at least 50 errors are seen at each n.
    """
    ns = list(n_grid)
    if len(ns) < 3 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_grid must be increasing with at least 3 points")
    proposal = tilted_proposal(h, scheme, hypothesis) if importance else None
    if importance and proposal is None:
        raise ExponentTooLarge("the scheme never errs under this hypothesis", math.inf)
    ests = []
    for k, n in enumerate(ns):
        t = trials
        while True:
            est = run_trials(h, scheme, n, t, hypothesis, seed + k, jobs, proposal)
            if est.errors >= MIN_ERRORS or t >= max_trials:
                break
            t = min(t * 4, max_trials)
        if est.errors == 0:
            # 95% one-sided bound: pi <= 1 - 0.05^(1/t)
            upper = -math.expm1(math.log(0.05) / t)
            raise ExponentTooLarge(f"no errors in {t} trials at n={n}", -math.log(upper) / n)
        ests.append(est)
    slope, se, coef = fit_exponent(ns, [e.log_rate for e in ests], log_n)
    return ExponentFit(slope, se, float(coef[1]), float(coef[2]) if log_n else None, ests)

