"""Command-line front end.

Exit status: 0 on success, 1 on usage or input errors, 2 when a numerical
contract is violated (for example a negative theorem margin).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .errors import DeltaLabError
from .functionals import delta_profile, scan_range
from .openproblem import conjecture_scan, default_identity_grid, exponential_identity_check
from .optimizer import Objective, SearchConfig, certify_candidate, load_config, objective_floor, optimize
from .sharpness import SHARPNESS_CSV_HEADER, sharpness_experiment
from .suite import parse_dist
from .theorem import verify_theorem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONTRACT = 2

IDENTITY_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _g17(v) -> str:
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def _manifest(args: argparse.Namespace, **resolved) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    params.update(resolved)
    return {"tool": "deltalab", "version": __version__, "subcommand": args.command, "params": params}


def _emit(args, manifest: dict, csv_text: Optional[str], payload) -> None:
    """Write results in the requested format plus the manifest echo."""
    fmt = args.format
    if fmt == "json":
        text = json.dumps({"manifest": manifest, "result": payload}, indent=2) + "\n"
    else:
        text = csv_text
    if args.out:
        Path(args.out).write_text(text)
        if fmt != "json":
            Path(str(args.out) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        if fmt != "json":
            sys.stderr.write("# manifest " + json.dumps(manifest) + "\n")


def _cmd_verify(args) -> int:
    reports = []
    for spec in args.dist or ["uniform"]:
        reports.append(verify_theorem(parse_dist(spec), grid_points=args.grid, dist_id=spec, range_which=args.range))
    if args.format == "table":
        head = f"{'distribution':<24}{'lhs':>14}{'rhs':>14}{'margin':>14}{'med*supnorm':>14}"
        lines = [head]
        for r in reports:
            lines.append(
                f"{r.dist_id:<24}{r.lhs:>14.6g}{r.rhs:>14.6g}{r.margin:>14.6g}{r.med_supnorm_product:>14.6g}"
            )
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        csv_lines = ["dist,lhs,rhs,margin,med_supnorm"]
        csv_lines += [
            ",".join([r.dist_id] + [_g17(v) for v in (r.lhs, r.rhs, r.margin, r.med_supnorm_product)])
            for r in reports
        ]
        _emit(args, _manifest(args), "\n".join(csv_lines) + "\n", [r.to_dict() for r in reports])
    bad = [r for r in reports if r.margin < 0]
    for r in bad:
        sys.stderr.write(f"contract violation: {r.dist_id} margin {r.margin:.6g} < 0 (evaluation error)\n")
    return EXIT_CONTRACT if bad else EXIT_OK


def _cmd_scan(args) -> int:
    d = parse_dist(args.dist)
    end = scan_range(d, args.range)
    prof = delta_profile(d, end, grid_points=args.grid, range_label=args.range)
    _emit(args, _manifest(args, range_end=end), prof.to_csv(), prof.to_dict())
    return EXIT_OK


def _parse_n_list(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError("--n-list is empty")
    return out


def _cmd_sharpness(args) -> int:
    rows = sharpness_experiment(_parse_n_list(args.n_list), grid_points=args.grid)
    lines = [SHARPNESS_CSV_HEADER] + [",".join(_g17(v) for v in r.as_csv_fields()) for r in rows]
    payload = [
        dict(zip(SHARPNESS_CSV_HEADER.split(","), r.as_csv_fields()), rhs=r.rhs, contract_ok=bool(r.contract_ok()))
        for r in rows
    ]
    _emit(args, _manifest(args), "\n".join(lines) + "\n", payload)
    bad = [r.n for r in rows if not r.contract_ok()]
    if bad:
        sys.stderr.write(f"contract violation: rhs <= sup_delta <= 2.5/n fails for n in {bad}\n")
        return EXIT_CONTRACT
    return EXIT_OK


def _cmd_exp_check(args) -> int:
    err = float(exponential_identity_check(args.rate, default_identity_grid()))
    ok = bool(err <= IDENTITY_TOL)
    text = f"rate={args.rate:g} max_abs_error={err:.3e} tolerance={IDENTITY_TOL:g} {'ok' if ok else 'FAIL'}\n"
    if args.format == "json":
        _emit(args, _manifest(args), None, {"rate": args.rate, "max_abs_error": err, "ok": ok})
    else:
        (Path(args.out).write_text(text) if args.out else sys.stdout.write(text))
    return EXIT_OK if ok else EXIT_CONTRACT


def _cmd_conjecture(args) -> int:
    d = parse_dist(args.dist)
    prof = conjecture_scan(d, grid_points=args.grid)
    _emit(args, _manifest(args), prof.to_csv(), prof.to_dict())
    for label, flagged, value in (
        ("median", prof.flags_med, prof.sup_weighted_med),
        ("mean", prof.flags_mean, prof.sup_weighted_mean),
    ):
        if flagged:
            note = " (compact support: outside the conjecture's hypothesis)" if prof.compact_support else ""
            sys.stderr.write(f"flag: {label}-normalized sup {value:.6g} < 1{note}\n")
    return EXIT_OK


def _cmd_optimize(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = SearchConfig(
            n_bins=args.bins,
            objective=args.objective,
            budget=args.budget,
            restarts=args.restarts,
            seed=args.seed,
            product_target=args.product,
            layout=args.layout,
        )
    initial = parse_dist(args.dist) if args.dist else None
    state = optimize(cfg, initial=initial)
    if state.best_density is None:
        sys.stderr.write("no feasible candidate found within budget\n")
        return EXIT_CONTRACT
    report = certify_candidate(state.best_density)
    manifest = _manifest(args, config=cfg.to_dict())
    doc = {
        "manifest": manifest,
        "best_objective": state.best_objective,
        "best_density": state.best_density.to_dict(),
        "certification": report.to_dict(),
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        hist = args.history or str(args.out) + ".history.csv"
    else:
        sys.stdout.write(text)
        hist = args.history
    if hist:
        Path(hist).write_text(state.history_csv())
    failed = report.margin < 0
    if cfg.objective is Objective.MIN_SUP_DELTA_AT_FIXED_PRODUCT and state.best_objective < objective_floor(cfg):
        failed = True
    if failed:
        sys.stderr.write("contract violation: optimizer result below the certified floor (evaluation error)\n")
        return EXIT_CONTRACT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deltalab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"deltalab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="csv", fmt_choices=("csv", "json")):
        p.add_argument("--grid", type=int, default=4096, help="grid points (default 4096)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=fmt_choices, default=fmt_default)

    p = sub.add_parser("verify", help="check the lower bound on one or more distributions")
    p.add_argument("--dist", action="append", help="distribution (repeatable; default uniform)")
    p.add_argument("--range", choices=("median", "q999"), default="median")
    common(p, "table", ("table", "csv", "json"))
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("scan", help="sample delta(z) and locate its supremum")
    p.add_argument("--dist", default="uniform")
    p.add_argument("--range", choices=("median", "q999"), default="median")
    common(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("sharpness", help="run the spike-family experiment")
    p.add_argument("--n-list", default="2-14", help="comma list or ranges, e.g. 6,8,10-14")
    common(p)
    p.set_defaults(func=_cmd_sharpness)

    p = sub.add_parser("exp-check", help="check ratio * E[X] / z = 2 for an exponential")
    p.add_argument("--rate", type=float, default=1.0)
    common(p, "text", ("text", "json"))
    p.set_defaults(func=_cmd_exp_check)

    p = sub.add_parser("conjecture", help="scan the normalized mixed/both-large ratio")
    p.add_argument("--dist", default="exp:1")
    common(p)
    p.set_defaults(func=_cmd_conjecture)

    p = sub.add_parser("optimize", help="search histogram densities")
    p.add_argument("--config", help="JSON file with SearchConfig fields (overrides flags)")
    p.add_argument("--dist", help="initial density (its edges become the layout)")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--bins", type=int, default=16)
    p.add_argument("--objective", choices=[o.value for o in Objective], default=Objective.MIN_SUP_DELTA_AT_FIXED_PRODUCT.value)
    p.add_argument("--product", type=float, default=math.log(2.0))
    p.add_argument("--layout", choices=("uniform", "dyadic"), default="uniform")
    p.add_argument("--history", help="history CSV path (default <out>.history.csv)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_optimize, format="json", grid=None)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DeltaLabError, UsageError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
