"""Exponent-region curves for the binary example: local, one bit, one trit, zero rate, full."""

import argparse
from pathlib import Path

from dhtbits.exponent_region import compute_region, default_e0_samples
from dhtbits.fixtures import ex1

CURVES = ("local_X", "1bit", "1trit", "zero_rate", "non_distributed")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="out/fig4")
    p.add_argument("--n-e0", type=int, default=50)
    p.add_argument("--resolution", type=int, default=200)
    args = p.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = ex1()
    e0 = default_e0_samples(h, args.n_e0)
    for name in CURVES:
        rb = compute_region(h, name, e0, args.resolution)
        path = out / f"region_{name}.csv"
        path.write_text(rb.to_csv({"curve": name, "resolution": args.resolution}))
        print(path)


if __name__ == "__main__":
    main()
