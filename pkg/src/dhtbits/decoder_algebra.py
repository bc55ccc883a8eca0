"""Decision matrices and the combinatorics of decoders.

A decoder psi: <mx> x <my> -> {0, 1} is stored as its decision matrix with
rows indexed by m_Y and columns by m_X, so ``bits[m_y, m_x] == psi(m_x, m_y)``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Axis = Literal["X", "Y"]

CLASSES = (
    "trivial",
    "completely_reducible",
    "reducible_to_indecomposable",
    "reducible_to_decomposable",
    "irreducible_indecomposable",
    "irreducible_decomposable",
)

ENUMERATION_LIMIT = 20


@dataclass(frozen=True, eq=False)
class DecisionMatrix:
    bits: np.ndarray

    def __post_init__(self):
        b = np.array(self.bits, dtype=bool)
        if b.ndim != 2 or min(b.shape) < 1:
            raise ValueError("decision matrix must be a non-empty 2-D array")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def mx(self) -> int:
        return self.bits.shape[1]

    @property
    def my(self) -> int:
        return self.bits.shape[0]

    def __call__(self, m_x, m_y):
        return self.bits[m_y, m_x]

    def is_trivial(self) -> bool:
        return bool(self.bits.all() or not self.bits.any())

    def rows(self) -> list[list[int]]:
        return self.bits.astype(int).tolist()

    def to_literal(self) -> str:
        return "/".join("".join(str(v) for v in r) for r in self.rows())

    @classmethod
    def from_literal(cls, text: str) -> DecisionMatrix:
        rows = [r.strip() for r in text.strip().split("/")]
        if not rows or any(not r or set(r) - {"0", "1"} for r in rows):
            raise ValueError(f"bad decoder literal {text!r}")
        if len({len(r) for r in rows}) != 1:
            raise ValueError(f"ragged decoder literal {text!r}")
        return cls(np.array([[c == "1" for c in r] for r in rows]))

    def __eq__(self, other) -> bool:
        return isinstance(other, DecisionMatrix) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash((self.bits.shape, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"DecisionMatrix({self.to_literal()!r})"


@dataclass(frozen=True)
class Decomposition:
    psi0: DecisionMatrix
    psi1: DecisionMatrix
    i: int


@dataclass(frozen=True)
class DecoderClass:
    reducible: bool
    completely_reducible: bool
    reduced_form: DecisionMatrix | None
    decomposable_reduced_form: bool
    monotone_equivalent: DecisionMatrix | None

    @property
    def label(self) -> str:
        if self.completely_reducible:
            return "completely_reducible"
        if self.reducible:
            return "reducible_to_decomposable" if self.decomposable_reduced_form else "reducible_to_indecomposable"
        return "irreducible_decomposable" if self.decomposable_reduced_form else "irreducible_indecomposable"


def threshold_decoder(mx: int, my: int) -> DecisionMatrix:
    if mx < 1 or my < 1:
        raise ValueError("mx, my must be >= 1")
    m_y, m_x = np.indices((my, mx))
    return DecisionMatrix(m_x + m_y >= min(mx, my))


def threshold_decoder_bar(mx: int, my: int) -> DecisionMatrix:
    return complement(threshold_decoder(mx, my))


def complement(d: DecisionMatrix) -> DecisionMatrix:
    return DecisionMatrix(~d.bits)


def _dedupe(b: np.ndarray) -> np.ndarray:
    b = np.unique(b, axis=0)
    return np.unique(b, axis=1)


def canonical_form(d: DecisionMatrix) -> tuple[tuple[int, ...], tuple[bytes, ...]]:
    """Invariant key for equivalence under deduplication and line permutations.

    After deduplication, every permutation of the shorter axis is tried and the
    other axis is sorted; the lexicographically smallest result is the key.
    """
    b = _dedupe(d.bits).astype(np.uint8)
    transposed = b.shape[0] > b.shape[1]
    if transposed:
        b = b.T
    if b.shape[0] > 8:
        raise ValueError("canonical form limited to 8 distinct lines on the shorter axis")
    best = None
    for perm in itertools.permutations(range(b.shape[0])):
        key = tuple(sorted(bytes(col) for col in b[list(perm)].T))
        if best is None or key < best:
            best = key
    return (int(transposed),) + b.shape, best


def equivalent(d1: DecisionMatrix, d2: DecisionMatrix) -> bool:
    return canonical_form(d1) == canonical_form(d2)


def _dominated(b: np.ndarray, axis: Axis, i: int) -> np.ndarray:
    # columns are m_X (axis X), rows are m_Y (axis Y)
    lines = b if axis == "Y" else b.T
    return np.all(lines == bool(i), axis=1)


def reduce_step(d: DecisionMatrix, which: tuple[Axis, int]) -> DecisionMatrix | None:
    """Delete all i-dominated columns (X) or rows (Y); None if there are none."""
    if d.is_trivial():
        raise ValueError("reduction is defined for non-trivial decoders")
    axis, i = which
    dom = _dominated(d.bits, axis, i)
    if not dom.any():
        return None
    keep = ~dom
    return DecisionMatrix(d.bits[keep] if axis == "Y" else d.bits[:, keep])


OPS: tuple[tuple[Axis, int], ...] = (("X", 0), ("X", 1), ("Y", 0), ("Y", 1))


def is_reducible(d: DecisionMatrix) -> bool:
    return any(_dominated(d.bits, a, i).any() for a, i in OPS)


def reduced_form(d: DecisionMatrix) -> DecisionMatrix | None:
    """The irreducible residue of repeated reductions, or None if it is trivial."""
    while not d.is_trivial():
        for op in OPS:
            nxt = reduce_step(d, op)
            if nxt is not None:
                d = nxt
                break
        else:
            return d
    return None


def all_reduction_outcomes(d: DecisionMatrix) -> set[DecisionMatrix | None]:
    """Terminal results over every maximal sequence of reduction steps."""
    seen: dict[DecisionMatrix, frozenset] = {}

    def walk(m: DecisionMatrix) -> frozenset:
        if m.is_trivial():
            return frozenset([None])
        if m in seen:
            return seen[m]
        out: set = set()
        for op in OPS:
            nxt = reduce_step(m, op)
            if nxt is not None:
                out |= walk(nxt)
        res = frozenset(out) if out else frozenset([m])
        seen[m] = res
        return res

    return set(walk(d))



def is_completely_reducible(d: DecisionMatrix) -> bool:
    """True iff no 2x2 submatrix is a cross pattern."""
    b = d.bits
    for r0, r1 in itertools.combinations(range(d.my), 2):
        # a cross needs one column with (0,1) and another with (1,0)
        if np.any(~b[r0] & b[r1]) and np.any(b[r0] & ~b[r1]):
            return False
    return True


def is_monotone(d: DecisionMatrix) -> bool:
    b = d.bits.astype(np.int8)
    return bool(np.all(np.diff(b, axis=0) >= 0) and np.all(np.diff(b, axis=1) >= 0))


def monotone_equivalent_form(d: DecisionMatrix) -> DecisionMatrix | None:
    """Rows and columns sorted by their number of ones, when that is monotone."""
    if not is_completely_reducible(d):
        return None
    b = d.bits
    rows = np.argsort(b.sum(axis=1), kind="stable")
    cols = np.argsort(b.sum(axis=0), kind="stable")
    m = DecisionMatrix(b[rows][:, cols])
    if not is_monotone(m):
        raise AssertionError("line-sum sorting failed to produce a monotone matrix")
    return m


def _cell_components(cells: np.ndarray) -> tuple[int, np.ndarray]:
    """Connected components of the bipartite graph whose edges are the True cells.

    Returns the component count among non-isolated vertices and, per cell, its
    component label (-1 where the cell is False).
    """
    my, mx = cells.shape
    r, c = np.nonzero(cells)
    if r.size == 0:
        return 0, np.full(cells.shape, -1)
    n = my + mx
    g = coo_matrix((np.ones(r.size), (r, my + c)), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    used = np.unique(labels[r])
    lab = np.full(cells.shape, -1)
    lab[r, c] = labels[r]
    return used.size, lab


def is_decomposable(d: DecisionMatrix) -> tuple[bool, Decomposition | None]:
    """Decide decomposability; return a witness decomposition when one exists.

    With i = 1 the factors' 1-cells must use disjoint rows and columns, so the
    decomposition exists iff the graph on 1-cells has two or more components.
    The case i = 0 is the same statement for 0-cells.
    """
    b = d.bits
    for i, cells in ((1, b), (0, ~b)):
        k, lab = _cell_components(cells)
        if k >= 2:
            first = lab[cells].min()
            part = lab == first
            rest = cells & ~part
            if i == 1:
                psi0, psi1 = part, rest
            else:
                psi0, psi1 = ~part, ~rest
            return True, Decomposition(DecisionMatrix(psi0), DecisionMatrix(psi1), i)
    return False, None


def check_decomposition(d: DecisionMatrix, w: Decomposition) -> bool:
    """Check a witness against the defining conditions directly."""
    p0, p1 = w.psi0.bits, w.psi1.bits
    if w.psi0.is_trivial() or w.psi1.is_trivial():
        return False
    if not np.array_equal(p0 ^ p1 ^ bool(1 - w.i), d.bits):
        return False
    v = bool(w.i)
    ix0, ix1 = np.any(p0 == v, axis=0), np.any(p1 == v, axis=0)
    iy0, iy1 = np.any(p0 == v, axis=1), np.any(p1 == v, axis=1)
    return not (np.any(ix0 & ix1) or np.any(iy0 & iy1))


def classify(d: DecisionMatrix) -> DecoderClass:
    red = reduced_form(d)
    return DecoderClass(
        reducible=is_reducible(d),
        completely_reducible=red is None,
        reduced_form=red,
        decomposable_reduced_form=bool(red is not None and is_decomposable(red)[0]),
        monotone_equivalent=monotone_equivalent_form(d),
    )


def all_matrices(mx: int, my: int) -> Iterator[DecisionMatrix]:
    n = mx * my
    shifts = np.arange(n)
    for code in range(1 << n):
        yield DecisionMatrix(((code >> shifts) & 1).astype(bool).reshape(my, mx))


# Fast path for exhaustive enumeration: rows as integers, column j is bit j.

def _reduce_rows(rows: tuple[int, ...], mx: int) -> tuple[tuple[int, ...], int] | None:
    full = (1 << mx) - 1
    while True:
        if all(r == 0 for r in rows) or all(r == full for r in rows):
            return None
        kept = tuple(r for r in rows if r != 0 and r != full)
        if len(kept) != len(rows):
            rows = kept
            continue
        union, inter = 0, full
        for r in rows:
            union |= r
            inter &= r
        # a column is 0-dominated if no row has it, 1-dominated if all rows have it
        drop = (~union | inter) & full
        if not drop:
            return rows, mx
        keep = [j for j in range(mx) if not (drop >> j) & 1]
        rows = tuple(sum(((r >> j) & 1) << k for k, j in enumerate(keep)) for r in rows)
        mx = len(keep)
        full = (1 << mx) - 1


def _decomposable_rows(rows: tuple[int, ...], mx: int) -> bool:
    b = np.array([[(r >> j) & 1 for j in range(mx)] for r in rows], bool)
    return is_decomposable(DecisionMatrix(b))[0]


def enumerate_classify(mx: int, my: int, limit: int = ENUMERATION_LIMIT,
                       exemplars: bool = False):
    """Tally all 2^(mx*my) decoders by class.

    Returns a Counter over ``CLASSES``; with ``exemplars`` also a dict mapping
    each class to the first matrix seen in it.
    """
    if mx < 1 or my < 1:
        raise ValueError("mx, my must be >= 1")
    if mx * my > limit:
        raise ValueError(f"enumeration budget exceeded: {mx}*{my} > {limit}")
    tally: Counter = Counter({c: 0 for c in CLASSES})
    examples: dict[str, DecisionMatrix] = {}
    memo: dict[tuple[tuple[int, ...], int], bool] = {}
    full = (1 << mx) - 1
    mask_row = (1 << mx) - 1
    for code in range(1 << (mx * my)):
        rows = tuple((code >> (mx * k)) & mask_row for k in range(my))
        if all(r == 0 for r in rows) or all(r == full for r in rows):
            label = "trivial"
        else:
            red = _reduce_rows(rows, mx)
            if red is None:
                label = "completely_reducible"
            else:
                if red not in memo:
                    memo[red] = _decomposable_rows(*red)
                dec = memo[red]
                irreducible = red == (rows, mx)
                if irreducible:
                    label = "irreducible_decomposable" if dec else "irreducible_indecomposable"
                else:
                    label = "reducible_to_decomposable" if dec else "reducible_to_indecomposable"
        tally[label] += 1
        if exemplars and label not in examples:
            examples[label] = DecisionMatrix(
                np.array([[(r >> j) & 1 for j in range(mx)] for r in rows], bool))
    return (tally, examples) if exemplars else tally


def matrix_to_code(d: DecisionMatrix) -> int:
    """Index of ``d`` in the enumeration order used by ``enumerate_classify``."""
    code = 0
    for k, row in enumerate(d.bits):
        for j, v in enumerate(row):
            if v:
                code |= 1 << (d.mx * k + j)
    return code


DECFOUR = DecisionMatrix.from_literal("1001/0011/0110/1100")
