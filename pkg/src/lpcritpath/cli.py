"""Command line entry point ``lpcrit``.

Exit status: 0 success, 1 a requested check failed, 2 usage or input
error, 3 numerical failure.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import io as pio
from .config import DEFAULT, parse_overrides
from .critical import classify_Q
from .errors import (
    ConfigError,
    DimensionMismatchError,
    FixtureMissingError,
    InstanceParseError,
    LpPathError,
    NonOrthogonalInstanceError,
    NotPositiveDefiniteError,
)
from .model import F_p, Support, f_lambda, load_instance, phi, psi_p
from .scalar import (
    brute_force_global_P,
    brute_force_global_Q,
    enumerate_orthogonal_critical_points,
    lambda_bar,
)
from .strategies import check_omp_coincidence, greedy_path, main_path, omp
from .tracer import BRANCH_POINT, STALLED
from .verification import run_checks

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
_INPUT_ERRORS = (
    ConfigError,
    DimensionMismatchError,
    FixtureMissingError,
    InstanceParseError,
    NonOrthogonalInstanceError,
    NotPositiveDefiniteError,
)


def _grid(text, default):
    """``"a,b,c"`` or ``"start:stop:count"`` to an array."""
    if text is None:
        return np.asarray(default, dtype=float)
    try:
        if ":" in text:
            a, b, m = text.split(":")
            return np.linspace(float(a), float(b), int(m))
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


def _emit(args, payload_json, rows, summary):
    """Write data to ``--output`` (summary to stdout) or to stdout (summary to stderr)."""
    if args.output:
        if args.format == "json":
            pio.write_json(payload_json, args.output)
        else:
            pio.write_csv(rows, args.output)
        print(summary)
        return
    print(summary, file=sys.stderr)
    if args.format == "json":
        json.dump(payload_json, sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        import csv

        csv.writer(sys.stdout).writerows(rows)


def _fmt(v):
    return np.array2string(np.asarray(v), precision=6, separator=", ")


def cmd_trace(args, settings):
    inst = load_instance(args.instance)
    if args.strategy == "main":
        path = main_path(inst, settings)
    else:
        path = greedy_path(inst, args.strategy == "greedy-modified", settings)
    lines = [
        f"path: {path.kind}",
        f"segments: {len(path.segments)}  points: {len(path.points)}",
        "breakpoints: " + ("none" if not path.breakpoints else "; ".join(_fmt(b.beta) for b in path.breakpoints)),
        f"terminal: {path.terminal.kind} at {_fmt(path.terminal.location.beta)}"
        + (f" ({path.terminal.note})" if path.terminal.note else ""),
        "order: " + " ".join(f"{'+' if op == 'add' else '-'}{i + 1}" for op, i in path.active_order),
    ]
    lines += [f"note: {n}" for n in path.notes]
    _emit(args, pio.path_to_dict(path), pio.path_rows(path), "\n".join(lines))
    t = path.terminal
    if t.kind == BRANCH_POINT or (t.kind == STALLED and t.note in ("step size underflow", "maximum number of steps")):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_omp(args, settings):
    inst = load_instance(args.instance)
    run = omp(inst, args.modified, settings)
    report = None
    if args.against:
        report = check_omp_coincidence(pio.read_path_json(args.against), run, settings)
    lines = [f"omp ({'modified' if run.modified else 'standard'}): {run.status}"]
    lines += [f"step {k}: {_fmt(s)}" for k, s in enumerate(run.steps, 1)]
    lines.append("order: " + " ".join(str(i + 1) for i in run.order))
    if report is not None:
        lines.append(f"coincide: {str(report.passed).lower()} (max deviation {report.max_deviation:.3e})")
        if report.detail:
            lines.append(f"detail: {report.detail}")
    _emit(args, pio.omp_to_dict(run, report), pio.omp_rows(run), "\n".join(lines))
    if report is not None and not report.passed:
        return EXIT_CHECK
    return EXIT_OK


def cmd_verify(args, settings):
    results = run_checks(args.only, args.fixtures, settings)
    for r in results:
        print(r.line())
        if args.verbose:
            for name, ok, info in r.details:
                print(f"    {'ok  ' if ok else 'FAIL'} {name}" + (f": {info}" if info else ""))
    report = {"format": pio.FORMAT, "type": "verify", "passed": all(r.passed for r in results),
              "checks": [r.to_dict() for r in results]}
    if args.output:
        pio.write_json(report, args.output)
    return EXIT_OK if report["passed"] else EXIT_CHECK


def _scan_landscape(inst, args):
    if inst.n != 1:
        raise DimensionMismatchError("landscape-1d needs a one-coordinate instance")
    lams = _grid(args.lambdas, [0.2, 0.3, 0.385, 0.5])
    b = abs(float(inst.beta_star[0]))
    lo, hi = (-0.5 * b, 1.5 * b) if args.range is None else _grid(args.range, [])
    xs = np.linspace(lo, hi, args.points)
    header = ["beta"] + [f"f_lambda={lam:g}" for lam in lams]
    rows = [[float(x)] + [f_lambda(inst, [x], lam) for lam in lams] for x in xs]
    return header, rows, f"landscape-1d: {len(lams)} curves over {args.points} points"


def _scan_global_q(inst, args, settings):
    lmax = 1.5 * max(lambda_bar(abs(b), inst.p) for b in inst.beta_star if b != 0) if np.any(inst.beta_star) else 1.0
    lams = _grid(args.lambdas, np.linspace(0.0, lmax, 61))
    header = ["lambda", "f_lambda", "c", "support"] + [f"beta_{i + 1}" for i in range(inst.n)]
    rows = []
    for lam in lams:
        r = brute_force_global_Q(inst, lam, settings)
        sup = Support.of(r.beta, settings.zero_tol)
        rows.append([float(lam), r.value, F_p(inst, r.beta), ";".join(str(i + 1) for i in sup)] + r.beta.tolist())
    return header, rows, f"global-q: {len(lams)} lambda values"


def _scan_global_p(inst, args, settings):
    cs = _grid(args.cs, np.linspace(0.0, 1.1 * F_p(inst, inst.beta_star), 61))
    header = ["c", "phi", "support"] + [f"beta_{i + 1}" for i in range(inst.n)]
    rows = []
    for c in cs:
        r = brute_force_global_P(inst, c, settings)
        sup = Support.of(r.beta, settings.zero_tol)
        rows.append([float(c), phi(inst, r.beta), ";".join(str(i + 1) for i in sup)] + r.beta.tolist())
    return header, rows, f"global-p: {len(cs)} c values"


def _scan_enumerate(inst, args, settings):
    lam = args.lam
    header = ["labels", "class_Q", "f_lambda"] + [f"beta_{i + 1}" for i in range(inst.n)]
    rows = []
    for pt in enumerate_orthogonal_critical_points(inst, lam):
        tag = classify_Q(inst, pt.beta, lam, settings).tag
        rows.append(["".join(pt.labels), tag, f_lambda(inst, pt.beta, lam)] + pt.beta.tolist())
    return header, rows, f"enumerate-orthogonal: {len(rows)} critical points at lambda={lam:g}"


def cmd_scan(args, settings):
    inst = load_instance(args.instance)
    if args.kind == "landscape-1d":
        header, rows, summary = _scan_landscape(inst, args)
    elif args.kind == "global-q":
        header, rows, summary = _scan_global_q(inst, args, settings)
    elif args.kind == "global-p":
        header, rows, summary = _scan_global_p(inst, args, settings)
    else:
        header, rows, summary = _scan_enumerate(inst, args, settings)
    payload = {"format": pio.FORMAT, "type": f"scan-{args.kind}", "columns": header, "rows": rows}
    text_rows = [header] + [[v if isinstance(v, str) else pio._num(v) for v in row] for row in rows]
    _emit(args, payload, text_rows, summary)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a tolerance or step-size setting (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true", help="more detail and debug logging")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--output", "-o", help="output file (default: data to stdout, summary to stderr)")
    out.add_argument("--format", choices=("csv", "json"), default="csv")

    inp = argparse.ArgumentParser(add_help=False)
    inp.add_argument("--instance", "-i", required=True, help="instance JSON file")

    parser = argparse.ArgumentParser(prog="lpcrit", description="Critical paths of l_p least squares, 0 < p < 1.")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trace", parents=[common, inp, out], help="trace the main or a greedy path")
    t.add_argument("strategy", choices=("main", "greedy", "greedy-modified"))
    t.set_defaults(func=cmd_trace)

    o = sub.add_parser("omp", parents=[common, inp, out], help="orthogonal matching pursuit steps")
    o.add_argument("--modified", action="store_true", help="restrict candidates by the OLS sign")
    o.add_argument("--against", help="traced greedy path (JSON) to compare the steps with")
    o.set_defaults(func=cmd_omp)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance checks on the fixtures")
    v.add_argument("--only", action="append", help="check key (1-6) or tag, e.g. breakpoints (repeatable)")
    v.add_argument("--fixtures", help="directory with the fixture JSON files")
    v.add_argument("--output", "-o", help="write the JSON report here")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", parents=[common, inp, out], help="landscapes, global oracles, enumeration")
    s.add_argument("kind", choices=("landscape-1d", "global-q", "global-p", "enumerate-orthogonal"))
    s.add_argument("--lambdas", help="lambda grid: comma list or start:stop:count")
    s.add_argument("--cs", help="c grid for global-p: comma list or start:stop:count")
    s.add_argument("--lambda", dest="lam", type=float, default=0.1, help="lambda for enumerate-orthogonal")
    s.add_argument("--range", help="beta range lo,hi for landscape-1d")
    s.add_argument("--points", type=int, default=401, help="samples for landscape-1d")
    s.set_defaults(func=cmd_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = DEFAULT.with_overrides(parse_overrides(args.set))
        return args.func(args, settings)
    except _INPUT_ERRORS as exc:
        print(f"lpcrit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LpPathError as exc:
        print(f"lpcrit: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"lpcrit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
