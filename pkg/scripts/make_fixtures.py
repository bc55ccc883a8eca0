"""Regenerate the JSON data shipped in src/dhtbits/data."""

import json
from pathlib import Path

import numpy as np

from dhtbits.decoder_algebra import DECFOUR
from dhtbits.fixtures import ex1, ex2, staircase_labeling, staircase_sets
from dhtbits.prob_core import Distribution, HypothesisPair, product_joint
from dhtbits.separability import gridset_to_json

DATA = Path(__file__).resolve().parents[1] / "src" / "dhtbits" / "data"


def dump(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1) + "\n")


def staircase_fixture(theta_x, theta_y) -> dict:
    a, b = staircase_sets()
    return {"check": "fig6_staircase", "A0": gridset_to_json(a), "A1": gridset_to_json(b),
            "decoder": DECFOUR.to_literal(), "theta_x": list(map(int, theta_x)),
            "theta_y": list(map(int, theta_y))}


def main() -> None:
    dump(DATA / "ex1.json", ex1().to_json())
    dump(DATA / "ex2.json", ex2().to_json())

    rng = np.random.default_rng(20240601)
    cases = []
    for _ in range(20):
        ref = rng.dirichlet(np.ones(4)).reshape(2, 2)
        ref = (ref + 0.01) / (ref + 0.01).sum()
        cases.append({"ref": ref.tolist(), "qx": rng.dirichlet([1, 1]).tolist(),
                      "qy": rng.dirichlet([1, 1]).tolist()})
    dump(DATA / "fixtures" / "ipf_binary.json", {"check": "ipf_binary_oracle", "tol": 1e-5, "cases": cases})

    a, b, c, d = 0.3, 0.65, 0.7, 0.25
    h = HypothesisPair(product_joint(Distribution([a, 1 - a]), Distribution([b, 1 - b])),
                       product_joint(Distribution([c, 1 - c]), Distribution([d, 1 - d])))
    dump(DATA / "fixtures" / "condindep_vs_convex.json",
         {"check": "condindep_vs_convex", "h": h.to_json(), "M": 3, "decoder": "psi",
          "e0_samples": [0.02, 0.05, 0.1, 0.15], "tol": 1e-3})

    lab = staircase_labeling()
    dump(DATA / "fixtures" / "fig6_staircase.json", staircase_fixture(lab.theta_x, lab.theta_y))
    dump(DATA / "fixtures" / "identity_psi42_psi32.json",
         {"check": "region_identity", "h": ex1().to_json(), "lhs": "psi:4,2", "rhs": "psi:3,2", "n_e0": 10})

    # negative control: one symbol of the periodic labeling changed
    tx = lab.theta_x.copy()
    tx[3] = (tx[3] + 1) % 4
    dump(DATA / "negative" / "fig6_staircase_perturbed.json", staircase_fixture(tx, lab.theta_y))


if __name__ == "__main__":
    main()
