"""Command-line front end: ``socbid {solve,check-bid,fit-bid,verify}``.

Exit codes: 0 success, 1 infeasible or precondition unmet (or a valid non-EDCR
bid for ``check-bid``), 2 input error, 3 numerical failure or a failed check.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .dispatch import Verdict, check_exactness, lmp_csv, schedule_csv, solve_dispatch
from .edcr_fit import FitSpec, fit_edcr, fit_report
from .errors import (
    CaseFormatError,
    CaseValidationError,
    EnumerationLimitError,
    InfeasibleDispatchError,
    InvalidBidError,
    NumericalError,
    OracleInfeasibleError,
)
from .model import asset_from_dict, asset_to_dict, edcr_residuals_for, validate_bid
from .network import case_from_dict
from .oracle import GridSpec, brute_force_dispatch, run_lemma1_suite, run_theorem1_sweep

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class InputError(Exception):
    pass


def _read_json(path: str) -> Any:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 at byte offset {exc.start}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise InputError(
            f"{path}: malformed JSON at byte offset {offset} (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from None


def _emit(obj: Any) -> None:
    print(json.dumps(obj, indent=2))


def _error(msg: str) -> None:
    print(f"socbid: error: {msg}", file=sys.stderr)


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        case = case_from_dict(_read_json(args.case))
    except CaseValidationError as exc:
        _error("invalid case:\n  " + "\n  ".join(exc.violations))
        return EXIT_INPUT
    try:
        result = solve_dispatch(case, tol=args.tol)
    except InvalidBidError as exc:
        _error(f"{exc} (use `socbid fit-bid`)")
        return EXIT_INPUT
    except InfeasibleDispatchError as exc:
        _error(str(exc))
        if args.out:
            _write(Path(args.out), "result.json", json.dumps({"status": "infeasible"}, indent=2) + "\n")
        return EXIT_INFEASIBLE

    report = check_exactness(result)
    payload = {"status": "optimal", **result.to_dict(), "exactness": report.to_dict()}
    if args.check_oracle is not None:
        steps = args.check_oracle or args.grid_steps
        try:
            bf = brute_force_dispatch(case, GridSpec(steps))
            payload["oracle"] = {
                "grid_steps": steps,
                "objective": bf.objective,
                "gap": bf.objective - result.objective,
                "grid_bound": bf.grid_bound,
            }
        except EnumerationLimitError as exc:
            _error(f"oracle: {exc}")
            return EXIT_INPUT
        except OracleInfeasibleError as exc:
            payload["oracle"] = {"grid_steps": steps, "objective": None, "note": str(exc)}

    if args.out:
        out = Path(args.out)
        _write(out, "result.json", json.dumps(payload, indent=2) + "\n")
        _write(out, "schedule.csv", schedule_csv(result))
        _write(out, "lmp.csv", lmp_csv(result))
        _write(out, "exactness.json", json.dumps(report.to_dict(), indent=2) + "\n")
        summary = {"objective": result.objective, "verdict": report.verdict.value, "out": str(out)}
        if "oracle" in payload:
            summary["oracle"] = payload["oracle"]
        _emit(summary)
    else:
        _emit(payload)

    if report.verdict is Verdict.LEMMA_VIOLATION:
        _error("simultaneous charge and discharge with nonnegative prices")
        return EXIT_NUMERICAL
    if report.verdict is Verdict.PRECONDITION_UNMET:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _load_asset(path: str):
    return asset_from_dict(_read_json(path), "bid")


def cmd_check_bid(args: argparse.Namespace) -> int:
    asset = _load_asset(args.bid)
    report = validate_bid(asset)
    out: dict[str, Any] = {"valid": report.ok, "violations": report.messages()}
    if not report.ok:
        _emit(out)
        return EXIT_INPUT
    check = edcr_residuals_for(asset.bid, asset.eta_c, asset.eta_d, args.tol)
    out.update(edcr=check.is_edcr, residuals=list(check.residuals), max_abs_residual=check.max_abs_residual)
    _emit(out)
    return EXIT_OK if check.is_edcr else EXIT_INFEASIBLE


def cmd_fit_bid(args: argparse.Namespace) -> int:
    asset = _load_asset(args.bid)
    report = validate_bid(asset)
    if not report.ok:
        _error("invalid bid:\n  " + "\n  ".join(report.messages()))
        return EXIT_INPUT
    spec = FitSpec(margin=args.margin)
    fitted = fit_edcr(asset.bid, asset.eta_c, asset.eta_d, spec)
    fitted_asset = asset.with_bid(fitted)
    payload = {
        "bid": asset_to_dict(fitted_asset),
        "report": fit_report(asset.bid, fitted, asset.eta_c, asset.eta_d, spec).to_dict(),
    }
    if args.out:
        out = Path(args.out)
        _write(out, "fitted_bid.json", json.dumps(payload["bid"], indent=2) + "\n")
        _write(out, "fit_report.json", json.dumps(payload["report"], indent=2) + "\n")
    _emit(payload)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    lemma_cases = min(200, args.num_cases) if args.lemma_cases is None else args.lemma_cases
    sweep = run_theorem1_sweep(args.num_cases, args.seed, tol=args.tol)
    lemma = run_lemma1_suite(lemma_cases, args.seed)
    out: dict[str, Any] = {"equivalence": sweep.to_dict(), "exactness": lemma.to_dict()}
    if args.control:
        control = run_theorem1_sweep(args.num_cases, args.seed, edcr=False, tol=args.tol)
        out["control"] = {
            "num_cases": control.num_cases,
            "max_deviation": control.max_deviation,
            "cases_deviating": len(control.failing_cases),
        }
    _emit(out)
    return EXIT_OK if sweep.passed and lemma.passed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="socbid", description="Market clearing with SoC-dependent storage bids.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve the relaxed dispatch for a case file")
    s.add_argument("case", help="case JSON file")
    s.add_argument("--out", help="directory for result.json, schedule.csv, lmp.csv, exactness.json")
    s.add_argument("--tol", type=float, default=1e-8, help="LP feasibility/optimality tolerance")
    s.add_argument(
        "--check-oracle", type=int, nargs="?", const=0, default=None, metavar="N",
        help="also run the brute-force oracle with N grid steps (default: --grid-steps)",
    )
    s.add_argument("--grid-steps", type=int, default=5, help="oracle grid steps per storage power (default 5)")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check-bid", help="validate a storage bid and report EDCR residuals")
    c.add_argument("bid", help="bid JSON file")
    c.add_argument("--tol", type=float, default=1e-9, help="EDCR residual tolerance")
    c.set_defaults(func=cmd_check_bid)

    f = sub.add_parser("fit-bid", help="project a bid onto the EDCR-compliant set")
    f.add_argument("bid", help="bid JSON file")
    f.add_argument("--out", help="directory for fitted_bid.json and fit_report.json")
    f.add_argument("--margin", type=float, default=1e-6, help="strict spread margin")
    f.set_defaults(func=cmd_fit_bid)

    v = sub.add_parser("verify", help="run the randomized equivalence sweep and the exactness suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--num-cases", type=int, default=1000, help="equivalence sweep size")
    v.add_argument("--lemma-cases", type=int, default=None, help="exactness suite size (default min(200, num-cases))")
    v.add_argument("--tol", type=float, default=1e-9, help="relative deviation tolerance")
    v.add_argument("--control", action="store_true", help="also run the non-EDCR control sweep (informational)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        _error(str(exc))
        return EXIT_INPUT
    except (CaseFormatError, InvalidBidError, ValueError) as exc:
        _error(str(exc))
        return EXIT_INPUT
    except NumericalError as exc:
        _error(f"numerical failure: {exc}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
