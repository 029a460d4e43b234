"""Command-line entry point: ``wavelife <subcommand> ...``.

Exit codes: 0 success/pass, 1 verdict failure, 2 inconclusive, 64 usage
error. Data go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from . import exponents as ex
from . import proof_engine as pe
from . import sweep_fit as sf
from . import wave_sim as ws
from .profiles import BumpProfile

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64

log = logging.getLogger("wavelife")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _profile_arg(text: str) -> BumpProfile:
    try:
        g0, R, m = (float(v) for v in text.split(","))
        return BumpProfile(g0, R, m)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected g0,R,m with g0 > 0, R > 0, m >= 1: {text!r} ({exc})")


def _predicted_arg(text: str) -> tuple[int, float, bool]:
    try:
        n_s, p_s, mom = text.split(",")
        if mom.strip().lower() in ("zero", "nonzero"):
            is_zero = mom.strip().lower() == "zero"
        else:
            is_zero = float(mom) == 0.0
        return int(n_s), float(p_s), is_zero
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,p,moment (moment a number or zero/nonzero): {text!r}")


def _common(suppress: bool) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    common.add_argument("--format", choices=("text", "json"), **({"default": "text"} if not suppress else kw))
    common.add_argument("--seed", type=int, **({"default": None} if not suppress else kw))
    common.add_argument("--quiet", action="store_true", **({"default": False} if not suppress else kw))
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wavelife", description=__doc__.splitlines()[0], parents=[_common(False)])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_common(True)]

    p = sub.add_parser("exponents", parents=common, help="gamma, p_0(n) and the lifespan law")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--moment-zero", action="store_true", help="resolve the law for data with zero integral")

    p = sub.add_parser("bound", parents=common, help="eps_0 and the lifespan upper bound")
    p.add_argument("--n", type=int, required=True, choices=(2, 3))
    p.add_argument("--p", type=float, help="defaults to p_0(n)")
    p.add_argument("--delta", type=float, help="defaults to R/8 of the profile")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--profile", type=_profile_arg, default=BumpProfile())
    m = p.add_mutually_exclusive_group()
    m.add_argument("--M", type=float)
    m.add_argument("--estimate-M", action="store_true")

    p = sub.add_parser("verify-step", parents=common, help="replay one step of the slicing iteration")
    p.add_argument("--n", type=int, required=True, choices=(2, 3))
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--samples", type=int, help="number of seeded random points (default: documented fixed set)")
    p.add_argument("--delta", type=float, default=0.125)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)

    p = sub.add_parser("simulate", parents=common, help="one solver run, emitted as JSON")
    p.add_argument("--n", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dx", type=float, default=0.05)
    p.add_argument("--courant", type=float, default=0.5)
    p.add_argument("--cap", type=float, default=1e10)
    p.add_argument("--tmax", type=float, default=50.0)
    p.add_argument("--linear", action="store_true")
    p.add_argument("--profile", type=_profile_arg, default=BumpProfile())
    p.add_argument("--trace", type=Path, help="write the (t, max|u|) series as CSV")

    p = sub.add_parser("sweep", parents=common, help="run an eps sweep from a JSON config")
    p.add_argument("--config", type=Path, required=True)

    p = sub.add_parser("fit", parents=common, help="fit a lifespan law to sweep records")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--model", choices=("power", "critical"), default="power")
    p.add_argument("--predicted-from", type=_predicted_arg, metavar="N,P,MOMENT")
    p.add_argument("--p", type=float, help="power for the critical abscissa (default: from records)")
    p.add_argument("--tolerance", type=float, default=0.2)
    p.add_argument("--r2-threshold", type=float, default=0.9)
    p.add_argument("--export", type=Path, help="write (eps, T_h, uncertainty) CSV")
    return parser


def _emit(args, payload: dict, text_rows: list[tuple[str, object]]) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
        return
    width = max(len(k) for k, _ in text_rows) if text_rows else 0
    for key, value in text_rows:
        print(f"{key.ljust(width)}  {value!r}" if isinstance(value, float) else f"{key.ljust(width)}  {value}")


def cmd_exponents(args) -> int:
    n = args.n
    if n < 1:
        raise UsageError("--n must be >= 1")
    payload: dict = {"n": n}
    rows: list[tuple[str, object]] = [("n", n)]
    p = args.p
    if n >= 2:
        p0 = ex.strauss_exponent(n)
        payload["p0"] = p0
        rows.append(("p_0(n)", p0))
        rows.append(("gamma(n, p_0(n))", ex.gamma(n, p0)))
        payload["gamma_at_p0"] = ex.gamma(n, p0)
        if p is None:
            p = p0
    elif p is None:
        raise UsageError("n = 1 has no critical power; pass --p")
    payload["p"] = p
    payload["gamma"] = ex.gamma(n, p)
    rows += [("p", p), ("gamma(n, p)", payload["gamma"])]
    try:
        law = ex.predicted_lifespan_law(n, p, args.moment_zero)
        payload["law"] = law.to_dict()
        rows += [("case", law.case_tag.value), ("law", law.describe())]
    except ValueError as exc:
        payload["law"] = None
        payload["note"] = str(exc)
        rows.append(("law", f"none ({exc})"))
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_bound(args) -> int:
    n = args.n
    p = ex.strauss_exponent(n) if args.p is None else args.p
    delta = pe.default_delta(args.profile) if args.delta is None else args.delta
    if args.M is not None:
        M, m_source = args.M, "given"
    else:
        M = pe.estimate_M(n, p, args.profile, delta)
        m_source = "estimated numerically (quadrature on the default grid)"
    consts = pe.SlicingConstants(n, p, delta, M)
    eps0 = pe.epsilon_zero(consts)
    payload = {"constants": consts.to_dict(), "M_source": m_source, "eps": args.eps, "eps_0": eps0}
    rows = [(k, v) for k, v in consts.to_dict().items()] + [("M source", m_source), ("eps", args.eps), ("eps_0", eps0)]
    code = EXIT_OK
    if args.eps > eps0:
        payload["log_lifespan_bound"] = None
        payload["note"] = "eps exceeds eps_0; the bound does not apply"
        rows.append(("log T bound", "n/a (eps > eps_0)"))
        code = EXIT_FAIL
    else:
        bound = pe.lifespan_upper_bound(args.eps, consts)
        payload["log_lifespan_bound"] = bound.log_value
        payload["lifespan_bound"] = bound.value if math.isfinite(bound.value) else None
        rows += [("log T bound", bound.log_value), ("T bound", bound.value)]
    _emit(args, payload, rows)
    return code


def cmd_verify_step(args) -> int:
    p = ex.strauss_exponent(args.n)
    consts = pe.SlicingConstants(args.n, p, args.delta, args.M)
    if args.samples is None:
        samples = pe.default_samples(args.j, consts.k)
    else:
        samples = pe.random_samples(args.j, consts.k, args.samples, seed=args.seed)
    verdict = pe.verify_iteration_step(args.j, consts, args.eps, samples, tol=args.tol)
    payload = verdict.to_dict()
    rows = [("j", verdict.j), ("n", verdict.n), ("status", verdict.status),
            ("max quadrature error", verdict.quadrature_error_estimate)]
    for (r, t), c, cl in zip(verdict.sample_points, verdict.computed, verdict.claimed):
        rows.append((f"r={r!r} t={t!r}", f"computed={c!r} claimed={cl!r}"))
    _emit(args, payload, rows)
    return {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[verdict.status]


def cmd_simulate(args) -> int:
    spec = ws.ProblemSpec(n=args.n, p=args.p, eps=args.eps, g_profile=args.profile, dx=args.dx,
                          courant=args.courant, cap=args.cap, t_max=args.tmax, linear=args.linear)
    record = ws.simulate(spec)
    if args.trace is not None:
        with open(args.trace, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "max_abs_u"])
            for t, a in record.trace:
                writer.writerow([repr(t), repr(a)])
    print(json.dumps(record.to_dict(include_trace=False), sort_keys=True))
    return EXIT_FAIL if record.status == "unstable" else EXIT_OK


def cmd_sweep(args) -> int:
    if not args.config.exists():
        raise UsageError(f"config file not found: {args.config}")
    config = sf.SweepConfig.from_file(args.config)
    if config.output is None:
        raise UsageError("config must name an output file")

    def report(rec):
        if not args.quiet:
            print(f"eps={rec.eps!r} status={rec.status} T_h={rec.T_h!r}", file=sys.stderr)

    records = sf.run_sweep(config, on_record=report)
    payload = {"output": str(config.output), "records": [r.to_dict() | {"timestamp": None} for r in records]}
    rows = [("output", str(config.output))] + [
        (f"eps={r.eps!r}", f"T_h={r.T_h!r} +- {r.uncertainty!r} [{r.status}]") for r in records
    ]
    _emit(args, payload, rows)
    return EXIT_INCONCLUSIVE if any(not r.usable for r in records) else EXIT_OK


def cmd_fit(args) -> int:
    if not args.input.exists():
        raise UsageError(f"input file not found: {args.input}")
    records = sf.load_records(args.input)
    if args.export is not None:
        sf.export_csv(records, args.export)
    if args.model == "critical":
        p = args.p if args.p is not None else (records[0].p if records else None)
        if p is None:
            raise UsageError("no records and no --p")
        report = sf.fit_critical_law(records, p, r2_threshold=args.r2_threshold)
    else:
        predicted = None
        if args.predicted_from is not None:
            n, p, is_zero = args.predicted_from
            predicted = ex.predicted_lifespan_law(n, p, is_zero)
        report = sf.fit_power_law(records, predicted, tolerance=args.tolerance)
    _emit(args, report.to_dict(), list(report.to_dict().items()))
    return EXIT_FAIL if report.verdict == "fail" else EXIT_OK


COMMANDS = {
    "exponents": cmd_exponents,
    "bound": cmd_bound,
    "verify-step": cmd_verify_step,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    sub_usage = parser._subparsers._group_actions[0].choices[args.command].format_usage()
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"wavelife {args.command}: error: {exc}", file=sys.stderr)
        print(sub_usage, end="", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"wavelife {args.command}: error: {exc}", file=sys.stderr)
        print(sub_usage, end="", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
