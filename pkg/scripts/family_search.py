"""Scan the (alpha, eps, E) family for pairs split by decfour but by no 4x4 threshold decoder."""

import argparse
import itertools

import numpy as np

from dhtbits.fixtures import search_family


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--resolution", type=int, default=40)
    p.add_argument("--budget", type=int, default=200_000)
    args = p.parse_args()
    alphas = np.linspace(0.05, 0.45, 9)
    epss = [0.001, 0.01, 0.05, 0.1, 0.2]
    es = np.linspace(0.25, 3.0, 12)
    hits = 0
    for c in search_family(alphas, epss, es, args.resolution, args.budget):
        if c.realizes:
            hits += 1
            print(f"alpha={c.alpha:.3f} eps={c.eps:g} E={c.e:.3f}")
    total = len(list(itertools.product(alphas, epss, es)))
    print(f"{hits} of {total} candidates realize the separation gap")


if __name__ == "__main__":
    main()
