"""Monte Carlo error exponents of the psi_{2,2} scheme on the binary example.

The design point sits on the diagonal at 0.9 times the symmetric boundary point.
Both error probabilities are estimated with importance sampling over n = 200..2000
and compared with the exponents predicted by the convex program.
"""

import argparse
import json

from scipy.optimize import brentq

from dhtbits.encoding import build_encoder_pair
from dhtbits.exponent_region import convexprog_boundary_point
from dhtbits.fixtures import ex1
from dhtbits.simulator import CodingScheme, estimate_exponent


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plain", action="store_true", help="plain sampling instead of importance sampling")
    p.add_argument("--log-n", action="store_true", help="add a log n regressor")
    args = p.parse_args()
    h = ex1()
    boundary = lambda e0: convexprog_boundary_point(h, e0, 2, "psi")[0]
    es = brentq(lambda e: boundary(e) - e, 1e-3, 0.3)
    e1 = 0.9 * es
    scheme = CodingScheme.from_pair(build_encoder_pair(h, e1, e1, 2))
    theory = (brentq(lambda e: boundary(e) - e1, 1e-3, 0.3), e1)
    ns = list(range(200, 2001, 200))
    report = {"symmetric_point": es, "design": e1, "theory": theory}
    for i in (0, 1):
        fit = estimate_exponent(h, scheme, i, ns, args.trials, args.seed + i, args.jobs,
                                importance=not args.plain, log_n=args.log_n)
        report[f"pi{i}"] = fit.to_json()
        print(f"pi_{i}: slope {fit.slope:.4f} +- {fit.stderr:.4f}, theory {theory[i]:.4f}")
    with open("mc_exponent.json", "w") as fh:
        json.dump(report, fh, indent=1)


if __name__ == "__main__":
    main()
