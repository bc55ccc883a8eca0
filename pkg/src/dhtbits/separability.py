"""Sets of marginal-type pairs on simplex grids, the restriction operators, and separability tests.

A ``GridSet`` is a Boolean mask over (x-index, y-index) of two simplex grids.
The restriction a ⊓ b keeps the points of ``a`` whose x lies in the
x-projection of ``b`` and whose y lies in its y-projection; ``sub_k`` iterates
it as ⊓_0 = a, ⊓_1 = b, ⊓_{k+2} = ⊓_k ⊓ ⊓_{k+1}.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .coupling import d_star_table
from .decoder_algebra import DecisionMatrix
from .prob_core import HypothesisPair, Distribution

STRICT_BUFFER = 1e-9
DEFAULT_RESOLUTION = {2: 200, 3: 60}


@dataclass(frozen=True)
class SimplexGrid:
    """All points k/resolution of the (dim-1)-simplex, in lexicographic order of k."""

    dim: int
    resolution: int

    def __post_init__(self):
        if self.dim < 1 or self.resolution < 1:
            raise ValueError("grid needs dim >= 1 and a positive resolution")

    @property
    def points(self) -> np.ndarray:
        return _grid_points(self.dim, self.resolution)

    def __len__(self) -> int:
        return comb(self.resolution + self.dim - 1, self.dim - 1)

    def distribution(self, index: int) -> Distribution:
        return Distribution(self.points[index])

    def nearest(self, q: np.ndarray) -> int:
        """Index of the nearest point in max-norm; ties go to the smallest index."""
        q = np.asarray(q, float)
        if q.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}")
        d = np.max(np.abs(self.points - q), axis=1)
        return int(np.argmin(d))

    def nearest_many(self, qs: np.ndarray, chunk: int = 4096) -> np.ndarray:
        """Vectorized ``nearest`` over the rows of qs."""
        qs = np.asarray(qs, float).reshape(-1, self.dim)
        out = np.empty(len(qs), dtype=np.int64)
        pts = self.points
        for s in range(0, len(qs), chunk):
            d = np.max(np.abs(qs[s:s + chunk, None, :] - pts[None]), axis=2)
            out[s:s + chunk] = np.argmin(d, axis=1)
        return out

    def index_of_counts(self, counts: np.ndarray) -> int:
        hit = np.nonzero(np.all(np.rint(self.points * self.resolution) == counts, axis=1))[0]
        if hit.size != 1:
            raise KeyError(counts)
        return int(hit[0])


@lru_cache(maxsize=32)
def _grid_points(dim: int, resolution: int) -> np.ndarray:
    # compositions of `resolution` into `dim` parts, lexicographic in the part sizes
    rows = []
    for head in itertools.product(range(resolution + 1), repeat=dim - 1):
        s = sum(head)
        if s <= resolution:
            rows.append(head + (resolution - s,))
    pts = np.array(rows, float) / resolution
    pts.setflags(write=False)
    return pts


def default_grid(dim: int, resolution: int | None = None) -> SimplexGrid:
    if resolution is None:
        resolution = DEFAULT_RESOLUTION.get(dim, 30)
    return SimplexGrid(dim, resolution)


@dataclass(frozen=True, eq=False)
class GridSet:
    x_grid: SimplexGrid
    y_grid: SimplexGrid
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if m.shape != (len(self.x_grid), len(self.y_grid)):
            raise ValueError(f"mask shape {m.shape} does not match grids")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    def proj_x(self) -> np.ndarray:
        return self.mask.any(axis=1)

    def proj_y(self) -> np.ndarray:
        return self.mask.any(axis=0)

    def is_empty(self) -> bool:
        return not self.mask.any()

    def _check(self, other: GridSet):
        if self.x_grid != other.x_grid or self.y_grid != other.y_grid:
            raise ValueError("grid mismatch")

    def with_mask(self, mask: np.ndarray) -> GridSet:
        return GridSet(self.x_grid, self.y_grid, mask)

    def __and__(self, other: GridSet) -> GridSet:
        self._check(other)
        return self.with_mask(self.mask & other.mask)

    def __or__(self, other: GridSet) -> GridSet:
        self._check(other)
        return self.with_mask(self.mask | other.mask)

    def __eq__(self, other) -> bool:
        return (isinstance(other, GridSet) and self.x_grid == other.x_grid
                and self.y_grid == other.y_grid and np.array_equal(self.mask, other.mask))

    def __len__(self) -> int:
        return int(self.mask.sum())

    @classmethod
    def empty(cls, x_grid: SimplexGrid, y_grid: SimplexGrid) -> GridSet:
        return cls(x_grid, y_grid, np.zeros((len(x_grid), len(y_grid)), bool))

    @classmethod
    def full(cls, x_grid: SimplexGrid, y_grid: SimplexGrid) -> GridSet:
        return cls(x_grid, y_grid, np.ones((len(x_grid), len(y_grid)), bool))


@dataclass(frozen=True)
class Labeling:
    theta_x: np.ndarray
    theta_y: np.ndarray

    def within(self, mx: int, my: int) -> bool:
        return bool(np.all((0 <= self.theta_x) & (self.theta_x < mx))
                    and np.all((0 <= self.theta_y) & (self.theta_y < my)))


# D* tables over grid pairs, computed once per (hypothesis, grids).
_TABLES: dict = {}


def dstar_grid(h: HypothesisPair, i: int, x_grid: SimplexGrid, y_grid: SimplexGrid) -> np.ndarray:
    if (x_grid.dim, y_grid.dim) != h.shape:
        raise ValueError("grid dimensions do not match the alphabets")
    key = (h[i].probs.tobytes(), h.shape, x_grid, y_grid)
    if key not in _TABLES:
        table = d_star_table(h[i], x_grid.points, y_grid.points)
        table.setflags(write=False)
        _TABLES[key] = table
    return _TABLES[key]


def divergence_ball_set(h: HypothesisPair, i: int, t: float,
                        grids: tuple[SimplexGrid, SimplexGrid]) -> GridSet:
    """Grid version of {D*_i < t}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    xg, yg = grids
    if math.isinf(t):
        return GridSet.full(xg, yg)
    return GridSet(xg, yg, dstar_grid(h, i, xg, yg) < t - STRICT_BUFFER)


def sub(a: GridSet, b: GridSet) -> GridSet:
    a._check(b)
    return a.with_mask(a.mask & b.proj_x()[:, None] & b.proj_y()[None, :])


def sub_x(a: GridSet, b: GridSet) -> GridSet:
    a._check(b)
    return a.with_mask(a.mask & b.proj_x()[:, None])


def sub_y(a: GridSet, b: GridSet) -> GridSet:
    a._check(b)
    return a.with_mask(a.mask & b.proj_y()[None, :])


def sub_chain(a: GridSet, b: GridSet, k: int) -> list[GridSet]:
    """[⊓_0, ..., ⊓_k]."""
    if k < 0:
        raise ValueError("k must be >= 0")
    chain = [a, b]
    while len(chain) <= k:
        chain.append(sub(chain[-2], chain[-1]))
    return chain[:k + 1]


def sub_k(a: GridSet, b: GridSet, k: int) -> GridSet:
    return sub_chain(a, b, k)[k]


def threshold_pair(a: GridSet, b: GridSet, mx: int, my: int) -> tuple[GridSet, GridSet, int]:
    """Rewrite (a, b, mx, my) as an equal-size problem (a, b', M)."""
    if mx == my:
        return a, b, mx
    if mx > my:
        return a, sub_x(b, a), my
    return a, sub_y(b, a), mx


def threshold_separable(a: GridSet, b: GridSet, mx: int, my: int, bar: bool = False) -> bool:
    """Whether the threshold decoder (or its complement) separates (a, b).

    For mx = my = M this is emptiness of a ⊓_M b. With mx > my the set b is
    first restricted to b ⊓_X a (and symmetrically for my > mx). The
    complement decoder separates (a, b) iff the decoder separates (b, a).
    """
    if mx < 1 or my < 1:
        raise ValueError("mx, my must be >= 1")
    a._check(b)
    if np.any(a.mask & b.mask):
        raise ValueError("sets must be disjoint")
    if bar:
        a, b = b, a
    a2, b2, m = threshold_pair(a, b, mx, my)
    return sub_k(a2, b2, m).is_empty()


def verify_labeling(a: GridSet, b: GridSet, d: DecisionMatrix, lab: Labeling) -> bool:
    """True iff d(theta_x, theta_y) is 0 on every cell of a and 1 on every cell of b."""
    tx = np.asarray(lab.theta_x)
    ty = np.asarray(lab.theta_y)
    if tx.shape != (len(a.x_grid),) or ty.shape != (len(a.y_grid),):
        raise ValueError("labeling shape does not match grids")
    if not lab.within(d.mx, d.my):
        return False
    out = d.bits[ty[None, :], tx[:, None]]
    return bool(not np.any(out[a.mask]) and np.all(out[b.mask]))


def threshold_labeling(a: GridSet, b: GridSet, mx: int, my: int | None = None,
                       bar: bool = False) -> Labeling:
    """Labels from the restriction chain: theta = r_M(max{k < M: point in proj(a ⊓_k b')}).

    Level 0 is the whole grid, except on the larger side of an unequal-size
    decoder, where it is the projection of ``a`` and everything else gets the
    extra symbol M.
    """
    from .encoding import levels_from_chain

    my = mx if my is None else my
    if bar:
        return threshold_labeling(b, a, mx, my)
    a2, b2, m = threshold_pair(a, b, mx, my)
    chain = sub_chain(a2, b2, m - 1)
    xs = [np.ones(len(a.x_grid), bool) if mx <= my else a.proj_x()]
    ys = [np.ones(len(a.y_grid), bool) if my <= mx else a.proj_y()]
    xs += [c.proj_x() for c in chain[1:]]
    ys += [c.proj_y() for c in chain[1:]]
    lx = levels_from_chain(xs, m, m if mx > my else None)
    ly = levels_from_chain(ys, m, m if my > mx else None)
    return Labeling(lx, ly)


class SearchBudgetExhausted(RuntimeError):
    """The labeling search stopped at its node budget without a verdict."""


def generic_separability_search(a: GridSet, b: GridSet, d: DecisionMatrix,
                                budget: int = 200_000) -> Labeling | None:
    """Backtracking search for labels separating (a, b) under decoder d.

    Variables are the symbols of x- and y-indices touched by a or b. After each
    assignment, arc consistency is restored over the cell constraints; the
    variable with the smallest remaining domain is branched on next. Returns a
    labeling, None when the exhausted search proves none exists, and raises
    ``SearchBudgetExhausted`` when ``budget`` nodes were used without a verdict.
    """
    a._check(b)
    nx, ny = a.mask.shape
    bits = d.bits
    # compat[v][sx] is the set of y-symbols allowed next to x-symbol sx for value v
    ones_for_x = [frozenset(np.nonzero(bits[:, sx])[0]) for sx in range(d.mx)]
    zeros_for_x = [frozenset(np.nonzero(~bits[:, sx])[0]) for sx in range(d.mx)]
    ones_for_y = [frozenset(np.nonzero(bits[sy, :])[0]) for sy in range(d.my)]
    zeros_for_y = [frozenset(np.nonzero(~bits[sy, :])[0]) for sy in range(d.my)]

    cons_x: dict[int, list[tuple[int, int]]] = {}
    cons_y: dict[int, list[tuple[int, int]]] = {}
    for val, m in ((0, a.mask), (1, b.mask)):
        for x, y in zip(*np.nonzero(m)):
            cons_x.setdefault(int(x), []).append((int(y), val))
            cons_y.setdefault(int(y), []).append((int(x), val))

    doms: dict[tuple[str, int], frozenset] = {}
    for x in cons_x:
        doms[("x", x)] = frozenset(range(d.mx))
    for y in cons_y:
        doms[("y", y)] = frozenset(range(d.my))

    def support_x(sx: int, val: int) -> frozenset:
        return ones_for_x[sx] if val else zeros_for_x[sx]

    def support_y(sy: int, val: int) -> frozenset:
        return ones_for_y[sy] if val else zeros_for_y[sy]

    def propagate(dm: dict, queue: list) -> bool:
        while queue:
            var = queue.pop()
            kind, idx = var
            if kind == "x":
                for y, val in cons_x[idx]:
                    allowed = frozenset().union(*(support_x(s, val) for s in dm[var]))
                    new = dm[("y", y)] & allowed
                    if new != dm[("y", y)]:
                        if not new:
                            return False
                        dm[("y", y)] = new
                        queue.append(("y", y))
            else:
                for x, val in cons_y[idx]:
                    allowed = frozenset().union(*(support_y(s, val) for s in dm[var]))
                    new = dm[("x", x)] & allowed
                    if new != dm[("x", x)]:
                        if not new:
                            return False
                        dm[("x", x)] = new
                        queue.append(("x", x))
        return True

    nodes = 0

    def solve(dm: dict) -> dict | None:
        nonlocal nodes
        open_vars = [v for v, dom in dm.items() if len(dom) > 1]
        if not open_vars:
            return dm
        var = min(open_vars, key=lambda v: (len(dm[v]), v))
        for s in sorted(dm[var]):
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExhausted(f"no verdict within {budget} nodes")
            trial = dict(dm)
            trial[var] = frozenset([s])
            if propagate(trial, [var]):
                found = solve(trial)
                if found is not None:
                    return found
        return None

    if not propagate(doms, list(doms)):
        return None
    sol = solve(doms)
    if sol is None:
        return None
    tx = np.zeros(nx, dtype=np.int64)
    ty = np.zeros(ny, dtype=np.int64)
    for (kind, idx), dom in sol.items():
        (tx if kind == "x" else ty)[idx] = next(iter(dom))
    return Labeling(tx, ty)


def mask_to_rle(mask: np.ndarray) -> dict:
    """Row-major run-length encoding of a Boolean mask."""
    flat = np.asarray(mask, bool).ravel()
    runs = []
    if flat.size:
        edges = np.flatnonzero(np.diff(flat.astype(np.int8))) + 1
        starts = np.concatenate([[0], edges])
        ends = np.concatenate([edges, [flat.size]])
        runs = [[int(flat[s]), int(e - s)] for s, e in zip(starts, ends)]
    return {"shape": list(np.shape(mask)), "runs": runs}


def mask_from_rle(obj: dict) -> np.ndarray:
    shape = tuple(obj["shape"])
    flat = np.concatenate([np.full(n, bool(v)) for v, n in obj["runs"]]) if obj["runs"] else np.zeros(0, bool)
    if flat.size != int(np.prod(shape)):
        raise ValueError("run lengths do not match the declared shape")
    return flat.reshape(shape)


def gridset_to_json(s: GridSet) -> dict:
    return {"x_grid": [s.x_grid.dim, s.x_grid.resolution],
            "y_grid": [s.y_grid.dim, s.y_grid.resolution],
            "mask": mask_to_rle(s.mask)}


def gridset_from_json(obj: dict) -> GridSet:
    return GridSet(SimplexGrid(*obj["x_grid"]), SimplexGrid(*obj["y_grid"]), mask_from_rle(obj["mask"]))


def dump_gridsets(path, **sets: GridSet) -> None:
    with open(path, "w") as fh:
        json.dump({k: gridset_to_json(v) for k, v in sets.items()}, fh)


def load_gridsets(path) -> dict[str, GridSet]:
    with open(path) as fh:
        return {k: gridset_from_json(v) for k, v in json.load(fh).items()}
