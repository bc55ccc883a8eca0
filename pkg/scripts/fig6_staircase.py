"""Staircase set pair: neither 4x4 threshold decoder separates it, the decfour decoder does."""

import argparse
import sys

from dhtbits.cli import main as cli

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="out/fig6")
    p.add_argument("--search", action="store_true", help="also scan the (alpha, eps, E) family")
    args = p.parse_args()
    rc = cli(["fig6", "--out-dir", args.out_dir])
    if args.search and rc == 0:
        rc = cli(["fig6", "--out-dir", args.out_dir, "--search"])
    sys.exit(rc)
