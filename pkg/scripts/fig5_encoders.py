"""Encoder levels for psi_{7,7} on the ternary product example at (E0, E1) = (0.3, 0.25)."""

import argparse
from pathlib import Path

import numpy as np

from dhtbits.encoding import build_encoder_pair, encoder_csv
from dhtbits.exponent_region import gamma_recursion
from dhtbits.fixtures import ex2
from dhtbits.separability import SimplexGrid


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="out/fig5")
    p.add_argument("--resolution", type=int, default=120)
    p.add_argument("--e0", type=float, default=0.3)
    p.add_argument("--e1", type=float, default=0.25)
    p.add_argument("--m", type=int, default=7)
    args = p.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = ex2()
    g = gamma_recursion(h, args.e0, args.e1, args.m)
    print("gamma_X:", np.round(g.gamma_x, 4).tolist(), "member:", g.member)
    grid = SimplexGrid(3, args.resolution)
    pair = build_encoder_pair(h, args.e0, args.e1, args.m, grids=(grid, grid))
    hdr = {"e0": args.e0, "e1": args.e1, "m": args.m, "resolution": args.resolution}
    (out / "encoder_x.csv").write_text(encoder_csv(pair.x, hdr))
    (out / "encoder_y.csv").write_text(encoder_csv(pair.y, hdr))
    print("chain sizes:", [int(c.sum()) for c in pair.x.chain])
    print("symbols used:", sorted(set(pair.x.levels.tolist())))


if __name__ == "__main__":
    main()
