"""Type encoders for threshold decoders.

The encoder on each axis is read off a nested chain of regions
Q^(0) ⊇ Q^(1) ⊇ ... ⊇ Q^(M-1): a type gets the depth of the deepest region
containing it, passed through the shuffle r_M so that the threshold decoder
returns the parity of the smaller depth.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import __version__
from .exponent_region import gamma_boxes, gamma_recursion, product_radii_chain
from .prob_core import Distribution, HypothesisPair, kl_rows
from .separability import STRICT_BUFFER, SimplexGrid, default_grid, dstar_grid

Variant = Literal["psi", "psibar", "psi_gt"]


ADVISORY_TOL = 1e-3


class OutsideRegion(ValueError):
    """The requested exponent pair is not achievable by the chosen decoder."""


class NearBoundaryWarning(UserWarning):
    """The exponent pair is achievable but within the advisory tolerance of the boundary."""


def chi(k: int) -> int:
    if k < 0:
        raise ValueError("k must be non-negative")
    return k % 2


def r_m(m: int, k: int) -> int:
    """Symbol shuffle: even depths count up from 0, odd depths count down from M-1."""
    if not 0 <= k < m:
        raise ValueError(f"k={k} outside 0..{m - 1}")
    return k // 2 if k % 2 == 0 else m - (k + 1) // 2


def levels_from_chain(chain: Sequence[np.ndarray], m: int, outside_symbol: int | None = None) -> np.ndarray:
    """theta = r_M(max{k: point in chain[k]}); points outside chain[0] get ``outside_symbol``."""
    if len(chain) == 0 or len(chain) > m:
        raise ValueError(f"need between 1 and {m} chain levels, got {len(chain)}")
    masks = [np.asarray(c, bool) for c in chain]
    for k in range(1, len(masks)):
        if np.any(masks[k] & ~masks[k - 1]):
            raise ValueError(f"chain is not nested at level {k}")
    depth = np.sum(masks, axis=0) - 1
    table = np.array([r_m(m, k) for k in range(m)])
    out = np.where(depth >= 0, table[np.maximum(depth, 0)], -1)
    if np.any(depth < 0):
        if outside_symbol is None:
            raise ValueError("points outside the base region need an outside symbol")
        out[depth < 0] = outside_symbol
    return out.astype(np.int64)


# ---------------------------------------------------------------- regions

def _hat_chi(k: int, variant: str) -> int:
    return (k + (variant == "psibar")) % 2


def _base_masks(h: HypothesisPair, e0: float, variant: str, xg: SimplexGrid, yg: SimplexGrid):
    qx = np.ones(len(xg), bool)
    qy = np.ones(len(yg), bool)
    if variant == "psi_gt":
        qx = kl_rows(xg.points, h.marginals(0)[0].probs) < e0 - STRICT_BUFFER
    return qx, qy


def regions_grid(h: HypothesisPair, e0: float, e1: float, m: int, variant: str,
                 grids: tuple[SimplexGrid, SimplexGrid]):
    """Chains from the D*-threshold recursion evaluated on the grid; also returns the membership flag."""
    xg, yg = grids
    e = (e0, e1)
    tables = (dstar_grid(h, 0, xg, yg), dstar_grid(h, 1, xg, yg))
    qx, qy = _base_masks(h, e0, variant, xg, yg)
    cx, cy = [qx], [qy]
    for k in range(1, m):
        c = _hat_chi(k, variant)
        t = tables[c]
        to_y = np.where(cy[-1][None, :], t, np.inf).min(axis=1)
        to_x = np.where(cx[-1][:, None], t, np.inf).min(axis=0)
        cx.append(cx[-1] & (to_y < e[c] - STRICT_BUFFER))
        cy.append(cy[-1] & (to_x < e[c] - STRICT_BUFFER))
    c = _hat_chi(m, variant)
    sub = tables[c][np.ix_(cx[-1], cy[-1])]
    member = bool(sub.size == 0 or sub.min() >= e[c] - STRICT_BUFFER)
    return cx, cy, member


def _box_mask(grid: SimplexGrid, p0: np.ndarray, p1: np.ndarray, radii: tuple[float, float]) -> np.ndarray:
    d0 = kl_rows(grid.points, p0)
    d1 = kl_rows(grid.points, p1)
    return (d0 < radii[0] - STRICT_BUFFER) & (d1 < radii[1] - STRICT_BUFFER)


def regions_box(h: HypothesisPair, e0: float, e1: float, m: int, variant: str,
                grids: tuple[SimplexGrid, SimplexGrid]):
    """Chains for product hypotheses from the divergence-box characterization."""
    xg, yg = grids
    (x0, y0), (x1, y1) = h.marginals(0), h.marginals(1)
    mx = m + 1 if variant == "psi_gt" else m
    rc = product_radii_chain(h, e0, e1, mx, m, "psibar" if variant == "psibar" else "psi")
    cx = [_box_mask(xg, x0.probs, x1.probs, r) for r in rc.x]
    cy = [_box_mask(yg, y0.probs, y1.probs, r) for r in rc.y]
    return cx, cy, rc.member


def regions_gamma(h: HypothesisPair, e0: float, e1: float, m: int,
                  grids: tuple[SimplexGrid, SimplexGrid]):
    """Chains for psi_{M,M} and product hypotheses straight from the gamma sequences."""
    xg, yg = grids
    (x0, y0), (x1, y1) = h.marginals(0), h.marginals(1)
    g = gamma_recursion(h, e0, e1, m)
    cx = [_box_mask(xg, x0.probs, x1.probs, gamma_boxes(g.gamma_x, k)) for k in range(m)]
    cy = [_box_mask(yg, y0.probs, y1.probs, gamma_boxes(g.gamma_y, k)) for k in range(m)]
    return cx, cy, g.member


def build_regions(h: HypothesisPair, e0: float, e1: float, m: int, variant: Variant = "psi",
                  grids: tuple[SimplexGrid, SimplexGrid] | None = None, method: str = "auto"):
    """(chain_x, chain_y, member) for the threshold decoder ``variant`` with M = ``m``.

    ``psi_gt`` is psi_{M', M} with M' > M: the X side gets an extra symbol for
    types outside {D(.||P_X^(0)) < E0}. ``method`` is "grid", "box" (product
    hypotheses only) or "auto", which picks "box" whenever it applies.
    """
    if variant not in ("psi", "psibar", "psi_gt"):
        raise ValueError(f"unknown decoder variant {variant!r}")
    if m < 1:
        raise ValueError("M must be >= 1")
    if e0 < 0 or e1 < 0:
        raise ValueError("exponents must be non-negative")
    if grids is None:
        grids = (default_grid(h.shape[0]), default_grid(h.shape[1]))
    if method == "auto":
        method = "box" if h.is_product() else "grid"
    if method == "box":
        return regions_box(h, e0, e1, m, variant, grids)
    if method == "grid":
        return regions_grid(h, e0, e1, m, variant, grids)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------- encoders

@dataclass(frozen=True, eq=False)
class TypeEncoder:
    grid: SimplexGrid
    levels: np.ndarray
    chain: tuple[np.ndarray, ...]
    decoder_tag: str
    m: int
    n_symbols: int

    def __post_init__(self):
        lv = np.array(self.levels, dtype=np.int64)
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)
        if lv.shape != (len(self.grid),):
            raise ValueError("one level per grid point required")
        if lv.size and (lv.min() < 0 or lv.max() >= self.n_symbols):
            raise ValueError("level outside the symbol range")

    def encode_many(self, qs: np.ndarray) -> np.ndarray:
        return self.levels[self.grid.nearest_many(qs)]

    def to_json(self) -> dict:
        return {
            "dim": self.grid.dim,
            "resolution": self.grid.resolution,
            "m": self.m,
            "n_symbols": self.n_symbols,
            "decoder_tag": self.decoder_tag,
            "levels": self.levels.tolist(),
            "chain": [np.flatnonzero(c).tolist() for c in self.chain],
        }

    @classmethod
    def from_json(cls, obj: dict) -> TypeEncoder:
        grid = SimplexGrid(obj["dim"], obj["resolution"])
        chain = []
        for idx in obj["chain"]:
            c = np.zeros(len(grid), bool)
            c[idx] = True
            chain.append(c)
        return cls(grid, np.array(obj["levels"]), tuple(chain), obj["decoder_tag"], obj["m"], obj["n_symbols"])


def build_encoder(chain: Sequence[np.ndarray], m: int, grid: SimplexGrid, decoder_tag: str = "psi",
                  extra_symbol: bool = False) -> TypeEncoder:
    """Encoder from a nested chain; with ``extra_symbol`` types outside chain[0] map to M."""
    levels = levels_from_chain(chain, m, m if extra_symbol else None)
    return TypeEncoder(grid, levels, tuple(np.asarray(c, bool) for c in chain), decoder_tag, m,
                       m + 1 if extra_symbol else m)


def encode_type(enc: TypeEncoder, q: Distribution | np.ndarray) -> int:
    v = np.asarray(getattr(q, "probs", q), float)
    if v.shape != (enc.grid.dim,):
        raise ValueError(f"type of length {v.size} does not match encoder alphabet {enc.grid.dim}")
    return int(enc.levels[enc.grid.nearest(v)])


@dataclass
class EncoderPair:
    x: TypeEncoder
    y: TypeEncoder
    variant: str
    mx: int
    my: int
    e0: float
    e1: float
    member: bool
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "version": __version__,
            "variant": self.variant,
            "mx": self.mx,
            "my": self.my,
            "e0": self.e0,
            "e1": self.e1,
            "member": self.member,
            "meta": self.meta,
            "encoder_x": self.x.to_json(),
            "encoder_y": self.y.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> EncoderPair:
        return cls(TypeEncoder.from_json(obj["encoder_x"]), TypeEncoder.from_json(obj["encoder_y"]),
                   obj["variant"], obj["mx"], obj["my"], obj["e0"], obj["e1"], obj["member"],
                   obj.get("meta", {}))

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> EncoderPair:
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def build_encoder_pair(h: HypothesisPair, e0: float, e1: float, mx: int, my: int | None = None,
                       decoder: str = "psi", grids=None, method: str = "auto",
                       require_member: bool = True, advisory_tol: float = ADVISORY_TOL) -> EncoderPair:
    """Both encoders for psi_{mx,my} (or its complement when mx == my).

    When (E0 + advisory_tol, E1 + advisory_tol) is no longer achievable, the
    pair is treated as near the boundary and a ``NearBoundaryWarning`` is issued.
    """
    my = mx if my is None else my
    if mx < my:
        raise ValueError("put the larger message set on X")
    if mx > my:
        variant = "psi_gt"
    else:
        variant = "psibar" if decoder == "psibar" else "psi"
    if grids is None:
        grids = (default_grid(h.shape[0]), default_grid(h.shape[1]))
    cx, cy, member = build_regions(h, e0, e1, my, variant, grids, method)
    if require_member and not member:
        raise OutsideRegion(
            f"(E0, E1) = ({e0}, {e1}) is outside the region of {variant} with M = {my}: "
            "the chain's final divergence test D*(Q_X^(M-1), Q_Y^(M-1)) >= E fails")
    if member and advisory_tol > 0:
        if not build_regions(h, e0 + advisory_tol, e1 + advisory_tol, my, variant, grids, method)[2]:
            warnings.warn(f"(E0, E1) = ({e0}, {e1}) is within {advisory_tol} nats of the {variant} "
                          f"boundary; separation on the grid may be fragile", NearBoundaryWarning, stacklevel=2)
    ex = build_encoder(cx, my, grids[0], variant, extra_symbol=(variant == "psi_gt"))
    ey = build_encoder(cy, my, grids[1], variant)
    return EncoderPair(ex, ey, variant, mx, my, e0, e1, member, {"method": method})


def encoder_csv(enc: TypeEncoder, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"q{j}" for j in range(enc.grid.dim)] + ["symbol"])
    for p, s in zip(enc.grid.points, enc.levels):
        w.writerow([f"{v:.10g}" for v in p] + [int(s)])
    return buf.getvalue()
