"""Command-line interface: ``gt <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from functools import partial

from .bounds import general_bound, info_bound, optimize_params, optimize_rate, worst_case_total
from .codes import ConcatParams
from .errors import BudgetExceeded, GroupTestingError, ParameterError
from .session import Oracle, Transcript, check_unique_consistency, run_session, verify_exhaustive
from .strategy_general import GeneralStrategy, choose_group_params, run_general
from .strategy_two import TwoStageStrategy

PRESETS = {
    "table1": [9, 16, 27, 28, 36, 64, 81, 125, 256, 441, 784, 1000],
    "table2": [10**k for k in range(3, 19)],
    "table3": [28**2, 15**3, 21**3, 28**3, 15**4, 21**4, 21**5, 15**6, 21**6, 21**9, 21**11],
}


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def index_list(text: str) -> list[int]:
    try:
        items = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad defect list {text!r}") from None
    if any(i < 0 for i in items) or len(set(items)) != len(items):
        raise argparse.ArgumentTypeError("defects must be distinct non-negative indices")
    return sorted(items)


def dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def ratio(tests: int, t: int) -> float:
    return round(tests / math.log2(t), 3)


def params_from_args(args) -> ConcatParams | None:
    given = [args.q, args.layers, args.inner_len, args.inner_weight]
    if all(v is None for v in given):
        return None
    if any(v is None for v in given):
        raise ParameterError("--q, --layers, --inner-len and --inner-weight go together")
    return ConcatParams(*given)


def cmd_optimize(args) -> int:
    mode = "eq" if args.exact_power else "le"
    res = optimize_params(args.t, mode, args.max_inner_len)
    costs = res.breakdown.stage_costs(res.params)
    row = {
        "t": args.t,
        "total": res.total,
        "params": res.params.to_dict(),
        "info_bound": info_bound(args.t, 2),
        "stages": [res.params.n_tests, *costs],
        "worst_profile": list(res.breakdown.worst_profile),
    }
    if args.format == "text":
        p = res.params
        print(f"t={args.t} tests={res.total} info_bound={row['info_bound']} "
              f"q={p.q} layers={p.layers} N'={p.inner_len} W={p.inner_weight}")
    else:
        print(dump(row))
    return 0


def emit_table(t_values: list[int], mode: str, fmt: str, max_inner_len: int = 16) -> str:
    rows = []
    for t in t_values:
        res = optimize_params(t, mode, max_inner_len)
        rows.append({"t": t, "tests": res.total, "info_bound": info_bound(t, 2),
                     "ratio": ratio(res.total, t)})
    if fmt == "json":
        return dump(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "tests", "info_bound", "ratio"])
        for r in rows:
            writer.writerow([r["t"], r["tests"], r["info_bound"], f"{r['ratio']:.3f}"])
        return buf.getvalue().rstrip("\n")
    return "\n".join(f"{r['t']:>20} {r['tests']:>5} {r['info_bound']:>5} {r['ratio']:.3f}" for r in rows)


def cmd_table(args) -> int:
    t_values = args.t or PRESETS[args.preset]
    mode = "eq" if args.exact_power or (args.preset == "table2" and not args.t) else "le"
    print(emit_table(t_values, mode, args.format, args.max_inner_len))
    return 0


def cmd_verify(args) -> int:
    strategy = args.strategy or ("two" if args.s <= 2 else "general")
    extra = {}
    if strategy == "two":
        if args.s > 2:
            raise ParameterError("the four-stage strategy handles s <= 2")
        params = params_from_args(args) or optimize_params(args.t, "le", args.max_inner_len).params
        factory = partial(TwoStageStrategy, params)
        extra = {"params": params.to_dict(), "predicted_worst": worst_case_total(params, args.t).total}
    else:
        factory = partial(GeneralStrategy, args.q or 3)
        top = choose_group_params(args.t, args.q or 3) if args.t >= 2 else None
        if top is not None:
            extra = {"general_bound": general_bound(args.s, top)}
    report = verify_exhaustive(args.t, args.s, factory, budget=args.budget, jobs=args.jobs)
    out = {"strategy": strategy, **report.to_dict(), **extra}
    print(dump(out))
    return 0 if report.ok else 1


def _check_defects(defects: list[int], t: int) -> None:
    if any(d >= t for d in defects):
        raise ParameterError(f"defects must lie in [0, {t})")


def cmd_run(args) -> int:
    _check_defects(args.defects, args.t)
    params = params_from_args(args) or optimize_params(args.t, "le", args.max_inner_len).params
    transcript = run_session(TwoStageStrategy(params), Oracle(args.t, args.defects))
    print(transcript.to_json())
    return 0


def cmd_general(args) -> int:
    _check_defects(args.defects, args.t)
    if args.s is not None and len(args.defects) > args.s:
        raise ParameterError(f"{len(args.defects)} defects given but --s {args.s}")
    transcript = run_session(partial(run_general, q_hint=args.q),
                             Oracle(args.t, args.defects))
    print(transcript.to_json())
    return 0


def cmd_rate(args) -> int:
    point = optimize_rate(args.grid_step)
    print(dump({"w": round(point.w, 5), "w_prime": round(point.w_prime, 5),
                "value": round(point.value, 6)}))
    return 0


def cmd_info_bound(args) -> int:
    print(dump({"t": args.t, "s": args.s, "info_bound": info_bound(args.t, args.s)}))
    return 0


def cmd_check(args) -> int:
    transcript = Transcript.from_json(sys.stdin.read())
    ok = check_unique_consistency(transcript, transcript.t, args.s)
    print(dump({"unique": ok}))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gt", description="Multistage group testing toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, t_required=True):
        if t_required:
            p.add_argument("--t", type=positive_int, required=True, help="number of items")
        p.add_argument("--max-inner-len", type=positive_int, default=16,
                       help="largest inner code length searched (default 16)")
        p.add_argument("--format", choices=["json", "csv", "text"], default="json")
        p.add_argument("--json", dest="format", action="store_const", const="json",
                       help="shorthand for --format json")

    def code_flags(p):
        p.add_argument("--q", type=positive_int, help="outer alphabet size")
        p.add_argument("--layers", type=positive_int, help="number of layers (outer length)")
        p.add_argument("--inner-len", type=positive_int, help="inner code length N'")
        p.add_argument("--inner-weight", type=positive_int, help="inner code weight W")

    p = sub.add_parser("optimize", help="cheapest four-stage code for t items")
    common(p)
    p.add_argument("--exact-power", action="store_true", help="require q**layers == t")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("table", help="tests, information bound and ratio for many t")
    common(p, t_required=False)
    p.add_argument("--t", type=positive_int, nargs="+", help="item counts")
    p.add_argument("--preset", choices=sorted(PRESETS), default="table1")
    p.add_argument("--exact-power", action="store_true", help="require q**layers == t")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="exhaustively check a strategy on all small defect sets")
    common(p)
    code_flags(p)
    p.add_argument("--s", type=positive_int, default=2, help="maximum number of defectives")
    p.add_argument("--strategy", choices=["two", "general"])
    p.add_argument("--jobs", type=positive_int, default=1, help="worker processes")
    p.add_argument("--budget", type=positive_int, default=1_000_000, help="maximum cases")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="simulate the four-stage strategy on given defects")
    common(p)
    code_flags(p)
    p.add_argument("--defects", type=index_list, default=[], help="comma-separated indices")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("general", help="simulate recursive splitting on given defects")
    common(p)
    p.add_argument("--q", type=positive_int, default=3, help="outer alphabet size (default 3)")
    p.add_argument("--s", type=positive_int, help="declared maximum number of defectives")
    p.add_argument("--defects", type=index_list, default=[], help="comma-separated indices")
    p.set_defaults(func=cmd_general)

    p = sub.add_parser("rate", help="asymptotic tests/log2(t) optimum")
    p.add_argument("--grid-step", type=float, default=0.01)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("info-bound", help="counting lower bound on the number of tests")
    p.add_argument("--t", type=positive_int, required=True)
    p.add_argument("--s", type=positive_int, default=2)
    p.set_defaults(func=cmd_info_bound)

    p = sub.add_parser("check", help="read a transcript on stdin; test that its diagnosis is forced")
    p.add_argument("--s", type=positive_int, default=2)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "rate" and not 0 < args.grid_step < 0.1:
        parser.error("--grid-step must lie in (0, 0.1)")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"gt: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"gt: error: {exc}", file=sys.stderr)
        return 2
    except GroupTestingError as exc:
        print(f"gt: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
