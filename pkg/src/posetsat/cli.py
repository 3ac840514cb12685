"""Command-line front end. Exit codes: 0 all checks pass, 1 a verified
property is violated, 2 usage or validation error, 3 resource limit hit."""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .chains import build_weight_table, verify_conditional_bound, verify_weight_identities, verify_weight_inequalities
from .containers import (
    StageConfig,
    build_family,
    certify_stages,
    count_upper_bound,
    enumerate_antichains,
    asymptotic_count_bound,
)
from .errors import InvalidSpecError, ResourceLimitError
from .experiments import RandomSubsetSpec, p_for_c, run_threshold_experiment, trial_csv
from .family import FamilySpec
from .matching import width
from .poset import DEFAULT_ELEMENT_LIMIT, build_poset, check_matching_lym
from .ranks import check_log_concavity, check_ratio_bounds, ground_size, level_profile_csv, level_sizes, wilf_exponent
from .reports import RunManifest, serialize
from .supersat import brute_min_comp, centered_construction, explore_conjecture, theorem_bound

THEOREM_FOR_FAMILY = {"boolean": "booleanThm", "subspace": "vecSpThm", "rpower": "multisetThm"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _family_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--family", choices=["boolean", "subspace", "rpower"], required=required)
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--q", type=int)
    p.add_argument("--r", type=int)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1, help="accepted; work runs sequentially")
    p.add_argument("--limit-elements", type=int, default=DEFAULT_ELEMENT_LIMIT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record-time", action="store_true", help="add wall time to the manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posetsat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("poset-info", help="level sizes, width and small-n structural checks")
    _family_args(p)
    _common(p)
    p.add_argument("--width", action="store_true")
    p.add_argument("--matching", action="store_true", help="exhaustive normalised matching check")
    p.add_argument("--appendix", type=int, metavar="NMAX", help="log-concavity and ratio sweeps up to NMAX")

    p = sub.add_parser("supersat-brute", help="exact minimum comparable pairs over m-subsets")
    _family_args(p)
    _common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("supersat-bound", help="theorem bound for given k and m")
    _family_args(p)
    _common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("chain-verify", help="weight table identities and inequalities")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    _common(p)

    p = sub.add_parser("containers-build", help="materialise a container family")
    _family_args(p)
    _common(p)
    p.add_argument("--stages", required=True, help="StageConfig JSON file")
    p.add_argument("--dump", help="write the family, one container per line")

    p = sub.add_parser("count-antichains", help="exact count and container upper bound")
    _family_args(p)
    _common(p)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--stages", help="StageConfig JSON file")
    p.add_argument("--assume", action="store_true", help="accept uncertified stage premises")
    p.add_argument("--asymptotic-params", action="store_true")

    p = sub.add_parser("random-antichain", help="largest antichain in p-random subsets")
    _family_args(p)
    _common(p)
    p.add_argument("--p", type=_fraction)
    p.add_argument("--c", type=_fraction)
    p.add_argument("--epsilon", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("conjecture-explore", help="centred levels against the brute minimum")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int)
    _common(p)
    return parser


def _spec(args) -> FamilySpec:
    return FamilySpec(args.family, args.n, args.q, args.r)


def _load_stages(path: str) -> StageConfig:
    try:
        return StageConfig.from_json(Path(path).read_text())
    except OSError as exc:
        raise InvalidSpecError(f"cannot read stages file: {exc}") from None
    except ValueError as exc:
        raise InvalidSpecError(f"bad stages file: {exc}") from None


def _violations(report: dict) -> bool:
    return bool(report.get("violations"))


def cmd_poset_info(args):
    spec = _spec(args)
    report = {"poset": spec, "level_sizes": level_sizes(spec), "ground_size": ground_size(spec), "violations": []}
    if args.width or args.matching:
        P = build_poset(spec, args.limit_elements)
        if args.width:
            w, wit = width(P)
            report["width"] = w
            report["width_witness"] = [P.elements[a].encode() for a in wit]
        if args.matching:
            res = check_matching_lym(P)
            report["normalised_matching"] = res
            report["violations"] += res["violations"]
    if args.appendix is not None:
        sweeps = []
        for n in range(1, args.appendix + 1):
            lc = check_log_concavity(n)
            sweeps += [{"n": n, **v} if isinstance(v, dict) else {"n": n, "log_concavity_i": v} for v in lc["violations"]]
            if n >= 5:
                sweeps += [{"n": n, **v} for v in check_ratio_bounds(n)["violations"]]
        report["appendix_max_n"] = args.appendix
        report["violations"] += sweeps
        if spec.family == "subspace":
            report["wilf_exponent_approx"] = {n: wilf_exponent(n, spec.q) for n in range(1, min(args.appendix, 30) + 1)}
    return report, level_profile_csv(spec)


def cmd_supersat_brute(args):
    spec = _spec(args)
    P = build_poset(spec, args.limit_elements)
    theorem = THEOREM_FOR_FAMILY[spec.family] if not (spec.family == "rpower" and spec.r != 2) else None
    bound = None
    if theorem and spec.n >= 1:
        try:
            bound = theorem_bound(theorem, spec.n, args.k, spec.q)
        except InvalidSpecError:
            bound = None
    ms = [args.m] if args.m is not None else range(len(P) + 1)
    rows = []
    for m in ms:
        best, wit = brute_min_comp(P, m)
        rows.append(
            {
                "m": m,
                "brute_min": best,
                "witness": wit,
                "centered": centered_construction(P, m).comp,
                "threshold": bound.threshold if bound else None,
                "rate": bound.rate if bound else None,
                "bound": bound.bound(m) if bound else None,
            }
        )
    lines = ["m,threshold,rate,bound,brute_min"]
    for r in rows:
        cells = [r["m"], r["threshold"], r["rate"], r["bound"], r["brute_min"]]
        lines.append(",".join("" if c is None else (f"{c.numerator}/{c.denominator}" if isinstance(c, Fraction) else str(c)) for c in cells))
    report = {
        "poset": spec,
        "theorem": bound,
        "rows": rows,
        "tie_break": "smallest bitmask in canonical element order",
        # theorem bounds only hold for n >= n_0(k); report, do not fail
        "bound_exceeds_brute": [r["m"] for r in rows if r["bound"] is not None and r["bound"] > r["brute_min"]],
        "violations": [r["m"] for r in rows if r["centered"] < r["brute_min"]],
    }
    return report, "\n".join(lines) + "\n"


def cmd_supersat_bound(args):
    spec = _spec(args)
    if spec.family == "rpower" and spec.r != 2:
        raise InvalidSpecError("theorem bounds cover {0,1,2}^n only")
    res = theorem_bound(THEOREM_FOR_FAMILY[spec.family], spec.n, args.k, spec.q)
    if args.m < 0:
        raise InvalidSpecError("m must be non-negative")
    report = {"poset": spec, "result": res, "m": args.m, "bound": res.bound(args.m), "violations": []}
    csv = f"m,threshold,rate,bound\n{args.m},{res.threshold},{res.rate.numerator}/{res.rate.denominator},{_frac(res.bound(args.m))}\n"
    return report, csv


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def cmd_chain_verify(args):
    if args.n < 1:
        raise InvalidSpecError("n must be >= 1")
    ident = verify_weight_identities(args.n)
    ineq = verify_weight_inequalities(args.n)
    report = {"n": args.n, "identities": ident, "inequalities": ineq}
    report["violations"] = ident["violations"] + ineq["violations"]
    if args.k is not None:
        cond = verify_conditional_bound(args.n, args.k)
        # small-n failures are expected below n_0(k); recorded, not fatal
        report["conditional_bound"] = cond
    return report, build_weight_table(args.n).to_csv()


def cmd_containers_build(args):
    spec = _spec(args)
    P = build_poset(spec, args.limit_elements)
    config = _load_stages(args.stages)
    config = certify_stages(P, config)
    fam = build_family(P, config)
    if args.dump:
        Path(args.dump).write_text(fam.dump())
    report = {
        "poset": spec,
        "config": config,
        "antichains_run": fam.runs,
        "distinct_containers": len(fam.containers),
        "largest_container": max((bin(A).count("1") for A in fam.containers), default=0),
        "violations": fam.violations,
    }
    return report, None


def cmd_count_antichains(args):
    spec = _spec(args)
    report = {"poset": spec, "violations": []}
    if args.exact or args.stages:
        P = build_poset(spec, args.limit_elements)
    if args.exact:
        count = enumerate_antichains(P)
        report["exact"] = count
        w = width(P)[0]
        report["width"] = w
        if count < 2**w:
            report["violations"].append({"property": "count >= 2^width"})
    if args.stages:
        config = _load_stages(args.stages)
        if not args.assume:
            config = certify_stages(P, config)
        bound = count_upper_bound(spec, config, assume=args.assume)
        report["bound"] = bound
        if args.exact and "upper" in bound and report["exact"] > bound["upper"]:
            report["violations"].append({"property": "count <= container bound"})
    if args.asymptotic_params:
        report["asymptotic_params"] = asymptotic_count_bound(spec)
    return report, None


def cmd_random_antichain(args):
    spec = _spec(args)
    if (args.p is None) == (args.c is None):
        raise InvalidSpecError("give exactly one of --p and --c")
    p = args.p if args.p is not None else p_for_c(spec, args.c)
    exp = RandomSubsetSpec(spec, Fraction(p), args.trials, args.seed, args.epsilon, args.c)
    report = run_threshold_experiment(exp)
    report["violations"] = [r["trial"] for r in report["per_trial"] if r["width"] > report["poset_width"]]
    return report, trial_csv(report)


def cmd_conjecture_explore(args):
    report = explore_conjecture(args.n, args.r, args.m)
    lines = ["m,brute_min,centered"] + [f"{r['m']},{r['brute_min']},{r['centered']}" for r in report["rows"]]
    return report, "\n".join(lines) + "\n"


COMMANDS = {
    "poset-info": cmd_poset_info,
    "supersat-brute": cmd_supersat_brute,
    "supersat-bound": cmd_supersat_bound,
    "chain-verify": cmd_chain_verify,
    "containers-build": cmd_containers_build,
    "count-antichains": cmd_count_antichains,
    "random-antichain": cmd_random_antichain,
    "conjecture-explore": cmd_conjecture_explore,
}


def dispatch(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        report, csv_text = COMMANDS[args.command](args)
        manifest = RunManifest(
            command=argv,
            master_seed=args.seed,
            limits={"elements": args.limit_elements, "workers": args.workers},
            wall_time=time.perf_counter() - start if args.record_time else None,
        )
        report["manifest"] = manifest
        data = serialize(report, args.format, csv_text)
    except InvalidSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    return 1 if _violations(report) else 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
