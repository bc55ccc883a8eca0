"""Command-line entry point: region, encoder, decoders, simulate, verify, fig6."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import d_star, d_star_binary_oracle
from .decoder_algebra import DECFOUR, DecisionMatrix, ENUMERATION_LIMIT, classify, enumerate_classify
from .encoding import OutsideRegion, build_encoder_pair, encoder_csv
from .exponent_region import (
    compute_region,
    default_e0_samples,
    gamma_recursion,
    region_condindep,
    region_identity_check,
    region_threshold_convexprog,
)
from .prob_core import Distribution, HypothesisPair, JointDistribution, load_hypotheses
from .separability import (
    Labeling,
    SimplexGrid,
    gridset_from_json,
    gridset_to_json,
    threshold_separable,
    verify_labeling,
)

NATS_PER_BIT = math.log(2)


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    resolution: int | None = None
    tol: float = 1e-4
    seed: int = 0
    jobs: int = 1
    units: str = "nats"
    extra: dict = field(default_factory=dict)

    def header(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        return {"tool": f"dhtbits {__version__}", **{k: v for k, v in d.items()}}


def _load_h(path: str) -> HypothesisPair:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"input file not found: {p}")
    try:
        return load_hypotheses(p)
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in {p}: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"invalid hypothesis file {p}: {exc}") from exc


def _out_dir(path: str | None) -> Path:
    d = Path(path or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_json(path: Path, obj: dict) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)


# ---------------------------------------------------------------- region

def cmd_region(args) -> int:
    h = _load_h(args.input)
    cfg = RunConfig("region", args.input, args.out_dir, args.resolution, args.tol, args.seed, args.jobs,
                    "bits" if args.display_bits else "nats",
                    {"constraints": args.constraints, "condindep_M": args.condindep_M,
                     "n_e0": args.n_e0})
    descriptors = [c for c in (args.constraints or "").split(",") if c]
    if args.condindep_M:
        descriptors.append(f"condindep:{args.condindep_M}")
    if not descriptors:
        raise CliError("no constraints requested")
    e0 = default_e0_samples(h, args.n_e0)
    out = _out_dir(args.out_dir)
    scale = 1 / NATS_PER_BIT if args.display_bits else 1.0
    for desc in descriptors:
        try:
            rb = compute_region(h, desc, e0, args.resolution, args.tol)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        name = desc.replace(":", "_").replace(",", "-").replace("@", "_")
        path = out / f"region_{name}.csv"
        path.write_text(rb.to_csv(cfg.header(), scale))
        print(path)
    return 0


# ---------------------------------------------------------------- encoder

def cmd_encoder(args) -> int:
    h = _load_h(args.input)
    my = args.my or args.m
    cfg = RunConfig("encoder", args.input, args.out, args.resolution, args.tol, args.seed, args.jobs,
                    "nats", {"e0": args.e0, "e1": args.e1, "m": args.m, "my": my, "decoder": args.decoder})
    grids = None
    if args.resolution:
        grids = (SimplexGrid(h.shape[0], args.resolution), SimplexGrid(h.shape[1], args.resolution))
    try:
        pair = build_encoder_pair(h, args.e0, args.e1, args.m, my, args.decoder, grids)
    except OutsideRegion as exc:
        msg = str(exc)
        if h.is_product() and args.m == my and args.decoder == "psi":
            g = gamma_recursion(h, args.e0, args.e1, args.m)
            c = args.m % 2
            msg += (f"; gamma test fails: gamma_X^(M) + gamma_Y^(M) - E_{c} = "
                    f"{g.gamma_x[-1] + g.gamma_y[-1] - (args.e0, args.e1)[c]:.6g} > 0")
        print(f"refused: {msg}", file=sys.stderr)
        return 2
    stem = Path(args.out or "encoder")
    stem.parent.mkdir(parents=True, exist_ok=True)
    hdr = cfg.header()
    Path(f"{stem}_x.csv").write_text(encoder_csv(pair.x, hdr))
    Path(f"{stem}_y.csv").write_text(encoder_csv(pair.y, hdr))
    bundle = pair.to_json()
    bundle["config"] = hdr
    _write_json(Path(f"{stem}.json"), bundle)
    used = sorted(set(pair.x.levels.tolist()))
    print(f"levels used on X: {used}; theta_X == theta_Y: {np.array_equal(pair.x.levels, pair.y.levels)}")
    return 0


# ---------------------------------------------------------------- decoders

def cmd_decoders(args) -> int:
    mx, my = args.mx, args.my
    if mx * my > ENUMERATION_LIMIT:
        raise CliError(f"mx*my = {mx * my} exceeds the enumeration budget {ENUMERATION_LIMIT}")
    tally, examples = enumerate_classify(mx, my, exemplars=True)
    cfg = RunConfig("decoders", None, args.out, extra={"mx": mx, "my": my})
    report = {"tool": f"dhtbits {__version__}", "config": cfg.header(), "mx": mx, "my": my,
              "tally": dict(sorted(tally.items())),
              "exemplars": {k: v.to_literal() for k, v in examples.items()}}
    if (mx, my) == (DECFOUR.mx, DECFOUR.my):
        report["decfour"] = {"matrix": DECFOUR.to_literal(), "class": classify(DECFOUR).label}
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0


# ---------------------------------------------------------------- simulate

def cmd_simulate(args) -> int:
    from .encoding import EncoderPair
    from .simulator import CodingScheme, ExponentTooLarge, estimate_exponent, run_trials

    h = _load_h(args.input)
    bp = Path(args.bundle)
    if not bp.is_file():
        raise CliError(f"encoder bundle not found: {bp}")
    pair = EncoderPair.load(bp)
    scheme = CodingScheme.from_pair(pair)
    if args.decoder:
        scheme = CodingScheme(pair.x, pair.y, DecisionMatrix.from_literal(args.decoder))
    hyps = [0, 1] if args.hypothesis == "both" else [int(args.hypothesis)]
    cfg = RunConfig("simulate", args.input, args.out, None, 0.0, args.seed, args.jobs, "nats",
                    {"bundle": args.bundle, "n": args.n, "n_grid": args.n_grid, "trials": args.trials,
                     "hypothesis": args.hypothesis, "importance": args.importance,
                     "decoder": scheme.decoder.to_literal()})
    results = {}
    if args.n_grid:
        ns = [int(v) for v in args.n_grid.split(",")]
        for i in hyps:
            try:
                fit = estimate_exponent(h, scheme, i, ns, args.trials, args.seed, args.jobs, args.importance)
                results[f"pi{i}"] = fit.to_json()
            except ExponentTooLarge as exc:
                results[f"pi{i}"] = {"error": str(exc), "exponent_lower_bound": exc.lower_bound}
    else:
        for i in hyps:
            est = run_trials(h, scheme, args.n, args.trials, i, args.seed, args.jobs)
            results[f"pi{i}"] = est.to_json()
    report = {"version": __version__, "config": cfg.header(), "results": results}
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0


# ---------------------------------------------------------------- verify

def _check_ipf(fx: dict) -> tuple[bool, str]:
    worst = 0.0
    for case in fx["cases"]:
        ref = JointDistribution(np.array(case["ref"]))
        qx, qy = Distribution(np.array(case["qx"])), Distribution(np.array(case["qy"]))
        worst = max(worst, abs(d_star(ref, qx, qy).value - d_star_binary_oracle(ref, qx, qy)))
    return worst <= fx.get("tol", 1e-5), f"max |ipf - oracle| = {worst:.3g}"


def _check_condindep(fx: dict) -> tuple[bool, str]:
    h = HypothesisPair.from_json(fx["h"])
    e0 = np.array(fx["e0_samples"])
    a = region_condindep(h, fx["M"], (fx["decoder"],), e0)
    b = region_threshold_convexprog(h, fx["M"], fx["decoder"], e0)
    gap = float(np.max(np.abs(a.e1 - b.e1)))
    return gap <= fx.get("tol", 1e-3), f"max boundary gap {gap:.3g} nats"


def _check_staircase(fx: dict) -> tuple[bool, str]:
    a, b = gridset_from_json(fx["A0"]), gridset_from_json(fx["A1"])
    d = DecisionMatrix.from_literal(fx["decoder"])
    lab = Labeling(np.array(fx["theta_x"]), np.array(fx["theta_y"]))
    sep = threshold_separable(a, b, 4, 4)
    ok = verify_labeling(a, b, d, lab)
    return (not sep) and ok, f"psi44 separable={sep}, labeling valid={ok}"


def _check_identity(fx: dict) -> tuple[bool, str]:
    h = HypothesisPair.from_json(fx["h"])
    e0 = default_e0_samples(h, fx.get("n_e0", 10))
    rep = region_identity_check(h, fx["lhs"], fx["rhs"], e0)
    bad = sum(not v[-1] for v in rep.verdicts)
    return rep.holds, f"{bad} of {len(rep.verdicts)} points disagree"


CHECKS = {
    "ipf_binary_oracle": _check_ipf,
    "condindep_vs_convex": _check_condindep,
    "fig6_staircase": _check_staircase,
    "region_identity": _check_identity,
}


def default_fixture_dir() -> Path:
    return Path(str(resources.files("dhtbits").joinpath("data", "fixtures")))


def run_verify(fixture_dir: Path) -> list[dict]:
    rows = []
    for path in sorted(fixture_dir.glob("*.json")):
        with open(path) as fh:
            fx = json.load(fh)
        name = fx.get("check")
        if name not in CHECKS:
            rows.append({"file": path.name, "check": name, "passed": False, "detail": "unknown check"})
            continue
        ok, detail = CHECKS[name](fx)
        rows.append({"file": path.name, "check": name, "passed": bool(ok), "detail": detail})
    return rows


def cmd_verify(args) -> int:
    d = Path(args.fixtures) if args.fixtures else default_fixture_dir()
    if not d.is_dir():
        raise CliError(f"fixture directory not found: {d}")
    rows = run_verify(d)
    if not rows:
        print(json.dumps({"status": "nothing to verify", "fixtures": str(d)}))
        return 0
    cfg = RunConfig("verify", str(d))
    report = {"tool": f"dhtbits {__version__}", "config": cfg.header(), "fixtures": str(d), "checks": rows,
              "all_passed": all(r["passed"] for r in rows)}
    print(json.dumps(report, indent=1))
    return 0 if report["all_passed"] else 1


# ---------------------------------------------------------------- fig6

def cmd_fig6(args) -> int:
    from .fixtures import search_family, staircase_labeling, staircase_sets
    from .separability import generic_separability_search

    out = _out_dir(args.out_dir)
    cfg = RunConfig("fig6", None, args.out_dir, args.resolution, args.tol, 0, args.jobs,
                    extra={"search": args.search, "alphas": args.alphas, "eps": args.eps,
                           "energies": args.energies})
    if args.search:
        alphas = [float(v) for v in args.alphas.split(",")]
        epss = [float(v) for v in args.eps.split(",")]
        es = [float(v) for v in args.energies.split(",")]
        rows = []
        for c in search_family(alphas, epss, es, args.resolution or 40):
            rows.append({"alpha": c.alpha, "eps": c.eps, "E": c.e, "psi44": c.psi_separable,
                         "psibar44": c.psibar_separable, "decfour": c.decfour_labeling is not None,
                         "search_exhausted": c.search_exhausted, "realizes": c.realizes})
        _write_json(out / "fig6_search.json", {"tool": f"dhtbits {__version__}", "config": cfg.header(),
                                                "candidates": rows})
        print(json.dumps(rows, indent=1))
        return 0
    a, b = staircase_sets()
    lab = staircase_labeling()
    found = generic_separability_search(a, b, DECFOUR)
    report = {
        "tool": f"dhtbits {__version__}",
        "config": cfg.header(),
        "A0": gridset_to_json(a),
        "A1": gridset_to_json(b),
        "psi44_separable": threshold_separable(a, b, 4, 4),
        "psibar44_separable": threshold_separable(a, b, 4, 4, bar=True),
        "decfour_periodic_labeling_valid": verify_labeling(a, b, DECFOUR, lab),
        "search_labeling": None if found is None else
        {"theta_x": found.theta_x.tolist(), "theta_y": found.theta_y.tolist()},
    }
    _write_json(out / "fig6.json", report)
    print(json.dumps({k: v for k, v in report.items() if k not in ("A0", "A1")}, indent=1))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dhtbits", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--resolution", type=int, default=None)
        sp.add_argument("--tol", type=float, default=1e-4)
        sp.add_argument("--jobs", type=int, default=1)
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("region", help="exponent-region boundaries as CSV")
    r.add_argument("--input", required=True)
    r.add_argument("--constraints", default="")
    r.add_argument("--condindep-M", type=int, default=None)
    r.add_argument("--n-e0", type=int, default=50)
    r.add_argument("--out-dir", default=".")
    r.add_argument("--display-bits", action="store_true")
    common(r)
    r.set_defaults(func=cmd_region)

    e = sub.add_parser("encoder", help="type encoders for a threshold decoder")
    e.add_argument("--input", required=True)
    e.add_argument("--e0", type=float, required=True)
    e.add_argument("--e1", type=float, required=True)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--my", type=int, default=None)
    e.add_argument("--decoder", choices=["psi", "psibar"], default="psi")
    e.add_argument("--out", default="encoder")
    common(e)
    e.set_defaults(func=cmd_encoder)

    d = sub.add_parser("decoders", help="classify all decision matrices of a size")
    d.add_argument("--mx", type=int, required=True)
    d.add_argument("--my", type=int, required=True)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_decoders)

    s = sub.add_parser("simulate", help="Monte Carlo error rates of an encoder bundle")
    s.add_argument("--input", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--n-grid", default=None)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--hypothesis", choices=["0", "1", "both"], default="both")
    s.add_argument("--importance", action="store_true")
    s.add_argument("--decoder", default=None, help="override the decision matrix, e.g. 00/00")
    s.add_argument("--out", default=None)
    common(s)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run oracle cross-checks on fixture files")
    v.add_argument("--fixtures", default=None)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fig6", help="staircase set pair and the 4x4 decoder comparison")
    f.add_argument("--out-dir", default=".")
    f.add_argument("--search", action="store_true")
    f.add_argument("--alphas", default="0.1,0.2,0.3,0.4")
    f.add_argument("--eps", default="0.01,0.05,0.1")
    f.add_argument("--energies", default="0.5,1.0,1.5,2.0")
    common(f, seed=False)
    f.set_defaults(func=cmd_fig6)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
