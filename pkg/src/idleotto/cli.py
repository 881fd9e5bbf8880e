"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 physically undefined
quantity. Numbers are printed with 17 significant digits so that they parse
back to the exact library values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__, tpm
from .cycle import EngineParams, asymptotic_limits, cycle_observables
from .errors import DomainError, ParameterError, ScanSpecError, UndefinedQuantityError
from .presets import DISTRIBUTION_PRESETS, PRESETS, PRESETS_VERSION
from .scan import (
    AXIS_PARAMETERS,
    DEFAULT_QUANTITIES,
    OBJECTIVES,
    Axis,
    ScanSpec,
    default_workers,
    find_extremum,
    format_value,
    run_grid,
    run_line,
    write_series_csv,
)
from .tur import verify_tur

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNDEFINED = 3

PARAM_FLAGS = (("J", "--J"), ("h_i", "--hi"), ("h_f", "--hf"), ("T_c", "--Tc"), ("T_h", "--Th"))
OBSERVABLE_FIELDS = ("mean_W1", "mean_W2", "mean_W", "var_W1", "var_W2", "var_W", "mean_Qh",
                     "mean_Qc", "eta_th", "eta_0", "eta_C", "Omega", "mean_Sigma", "rel_fluct_W",
                     "eta_engine", "anomalous", "regime")


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _add_param_flags(p, required=True, skip=()):
    for name, flag in PARAM_FLAGS:
        if name in skip:
            continue
        p.add_argument(flag, dest=name, type=float, required=required, metavar=name)


def _add_output(p):
    p.add_argument("--format", choices=("csv", "pretty"), default="csv")
    p.add_argument("-o", "--output", default="-", help="output path, '-' for stdout (default)")


def _params(args, skip=()):
    values = {name: getattr(args, name) for name, _ in PARAM_FLAGS if name not in skip}
    missing = [flag for name, flag in PARAM_FLAGS if name not in skip and values[name] is None]
    if missing:
        raise CliError("missing required flag(s): " + ", ".join(missing))
    try:
        return EngineParams(**values)
    except ParameterError as exc:
        raise CliError(_flag_message(exc)) from None


def _flag_message(exc: ParameterError):
    flags = dict(PARAM_FLAGS)
    named = ", ".join(flags.get(f, f) for f in exc.fields)
    return f"{exc} [flags: {named}]" if named else str(exc)


def _emit_pairs(pairs, args, out, title=None):
    if args.format == "csv":
        if title:
            for key, value in title.items():
                out.write(f"# {key}={format_value(value)}\n")
        out.write("quantity,value\n")
        for key, value in pairs:
            out.write(f"{key},{format_value(value)}\n")
    else:
        print("note: pretty output is for reading only; use --format csv for a stable interface",
              file=sys.stderr)
        if title:
            out.write("  ".join(f"{k}={format_value(v)}" for k, v in title.items()) + "\n")
        width = max(len(k) for k, _ in pairs)
        for key, value in pairs:
            out.write(f"{key:<{width}}  {format_value(value)}\n")


def _params_title(p: EngineParams):
    return {"J": p.J, "h_i": p.h_i, "h_f": p.h_f, "T_c": p.T_c, "T_h": p.T_h}


def cmd_observables(args, out):
    p = _params(args)
    obs = cycle_observables(p)
    pairs = [(name, getattr(obs, name)) for name in OBSERVABLE_FIELDS]
    _emit_pairs(pairs, args, out, _params_title(p))
    return EXIT_OK


def _distribution_params(args):
    if args.preset:
        if args.preset not in DISTRIBUTION_PRESETS:
            raise CliError(f"unknown distribution preset {args.preset!r}; available: "
                           + ", ".join(DISTRIBUTION_PRESETS))
        return DISTRIBUTION_PRESETS[args.preset]
    return _params(args)


def cmd_distribution(args, out):
    p = _distribution_params(args)
    obs = cycle_observables(p)
    td = tpm.enumerate_trajectories(p)
    header = dict(_params_title(p))
    header.update({"which": args.which, "eta_0": obs.eta_0, "eta_th": format_value(obs.eta_th),
                   "eta_C": obs.eta_C})
    if args.which == "joint":
        text = tpm.joint_to_csv(td, header)
    else:
        if args.which == "work":
            dist = tpm.work_distribution(td)
        elif args.which == "eta-scaled":
            if obs.eta_th is None:
                raise CliError("mean hot-bath heat is zero: the scaled efficiency is undefined",
                               EXIT_UNDEFINED)
            dist = tpm.scaled_efficiency_distribution(td)
        else:
            dist = tpm.stochastic_efficiency_distribution(td)
        text = dist.to_csv(header)
    out.write(text)
    return EXIT_OK


def _parse_axis(text, label):
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise CliError(f"{label}: expected PARAM:MIN:MAX:POINTS[:linear|log], got {text!r}")
    try:
        return Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]),
                    parts[4] if len(parts) == 5 else "linear")
    except ValueError:
        raise CliError(f"{label}: could not parse numbers in {text!r}") from None


def _progress(label):
    def report(done, total):
        print(f"\r{label}: {done}/{total} cells", end="" if done < total else "\n", file=sys.stderr)
    return report


def cmd_scan(args, out):
    if args.preset == "list":
        if args.show:
            out.write(json.dumps({"presets_version": PRESETS_VERSION,
                                  "presets": [p.as_dict() for p in PRESETS.values()],
                                  "distribution_presets": {k: _params_title(v) for k, v in
                                                           DISTRIBUTION_PRESETS.items()}},
                                 indent=2) + "\n")
        else:
            for p in PRESETS.values():
                flag = " (approximate ranges)" if p.approximate else ""
                out.write(f"{p.name}\t{p.description}{flag}\n")
        return EXIT_OK
    workers = args.workers if args.workers is not None else default_workers()
    if args.preset:
        if args.preset not in PRESETS:
            raise CliError(f"unknown preset {args.preset!r}; available: list, " + ", ".join(PRESETS))
        preset = PRESETS[args.preset]
        items = list(zip(preset.labels, preset.series))
        extra = {"preset": preset.name, "presets_version": PRESETS_VERSION,
                 "approximate": int(preset.approximate)}
    else:
        if not args.axis1:
            raise CliError("scan needs --preset or --axis1")
        fixed = {name: getattr(args, name) for name, _ in PARAM_FLAGS if getattr(args, name) is not None}
        quantities = tuple(q for q in args.quantities.split(",") if q) if args.quantities else DEFAULT_QUANTITIES
        axis2 = _parse_axis(args.axis2, "--axis2") if args.axis2 else None
        spec = ScanSpec(fixed=fixed, axis1=_parse_axis(args.axis1, "--axis1"), axis2=axis2,
                        quantities=quantities)
        items = [("custom", spec)]
        extra = {}
    results = []
    for k, (label, spec) in enumerate(items):
        try:
            spec.validate()
        except ScanSpecError as exc:
            raise CliError(str(exc)) from None
        runner = run_grid if spec.axis2 is not None else run_line
        tag = f"scan {args.preset or 'custom'} [{k + 1}/{len(items)}]"
        results.append((label, spec, runner(spec, workers=workers, progress=_progress(tag))))
    write_series_csv(results, out, extra)
    return EXIT_OK


def cmd_limits(args, out):
    try:
        lim = asymptotic_limits(args.J, args.h_i, args.h_f)
    except DomainError as exc:
        raise CliError(str(exc)) from None
    pairs = [("W_inf", lim.W_inf), ("var_W_inf", lim.var_W_inf), ("cov_inf", lim.cov_inf),
             ("eta_inf", lim.eta_inf), ("var_eta_inf", lim.var_eta_inf)]
    _emit_pairs(pairs, args, out, {"J": args.J, "h_i": args.h_i, "h_f": args.h_f})
    return EXIT_OK


def cmd_tur(args, out):
    p = _params(args)
    ev = verify_tur(p)
    pairs = [("sigma_mean", ev.sigma_mean), ("bound", ev.bound), ("observed", ev.observed),
             ("slack", ev.slack), ("satisfied", ev.satisfied)]
    _emit_pairs(pairs, args, out, _params_title(p))
    return EXIT_OK


def cmd_extremum(args, out):
    fixed = {name: getattr(args, name) for name, _ in PARAM_FLAGS
             if name != args.param and getattr(args, name) is not None}
    interval = Axis(args.param, args.min, args.max, args.points, args.spacing)
    try:
        res = find_extremum(args.objective, interval, fixed, tol=args.tol,
                            maximize=args.maximize, engine_only=args.engine_only)
    except ScanSpecError as exc:
        raise CliError(str(exc)) from None
    pairs = [("objective", res.objective), ("parameter", res.parameter), ("argopt", res.argopt),
             ("value", res.value), ("tolerance", res.tolerance),
             ("mode", "max" if res.maximize else "min")]
    _emit_pairs(pairs, args, out, dict(fixed))
    return EXIT_OK


def cmd_sample(args, out):
    p = _params(args)
    if args.count < 1:
        raise CliError("--count must be >= 1")
    workers = args.workers if args.workers is not None else default_workers()
    sample = tpm.sample_trajectories(p, args.count, args.seed, workers=workers)
    exact = tpm.enumerate_trajectories(p)
    w_exact = tpm.work_distribution(exact)
    mean_emp = sample.expectation(lambda a: a.W)
    sigma = math.sqrt(w_exact.variance())
    stderr = sigma / math.sqrt(args.count)
    fit = tpm.chi_squared_test(sample, exact)
    pairs = [("count", args.count), ("seed", args.seed), ("mean_W_sampled", mean_emp),
             ("mean_W_exact", w_exact.mean()), ("standard_error", stderr),
             ("z_score", (mean_emp - w_exact.mean()) / stderr if stderr > 0 else 0.0),
             ("chi2", fit.statistic), ("chi2_dof", fit.dof), ("chi2_p_value", fit.p_value)]
    _emit_pairs(pairs, args, out, _params_title(p))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="idleotto", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"idleotto {__version__} (presets {PRESETS_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("observables", help="closed-form cycle observables at one point")
    _add_param_flags(p)
    _add_output(p)
    p.set_defaults(func=cmd_observables)

    p = sub.add_parser("distribution", help="exact TPM distributions")
    _add_param_flags(p, required=False)
    p.add_argument("--preset", choices=sorted(DISTRIBUTION_PRESETS))
    p.add_argument("--which", choices=("work", "eta-scaled", "eta-stochastic", "joint"), default="work")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("scan", help="grid or line sweeps, including figure presets")
    p.add_argument("--preset", help="preset name, or 'list'")
    p.add_argument("--show", action="store_true", help="with --preset list: dump full definitions")
    p.add_argument("--axis1", help="PARAM:MIN:MAX:POINTS[:linear|log], PARAM in " + ",".join(AXIS_PARAMETERS))
    p.add_argument("--axis2")
    p.add_argument("--quantities", help="comma-separated observable names")
    p.add_argument("--workers", type=int, help="worker processes (default: $IDLEOTTO_WORKERS or 1)")
    _add_param_flags(p, required=False)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("limits", help="T_c -> 0, T_h -> inf limits")
    p.add_argument("--J", dest="J", type=float, required=True)
    p.add_argument("--hi", dest="h_i", type=float, required=True)
    p.add_argument("--hf", dest="h_f", type=float, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("tur", help="check the uncertainty relation at one point")
    _add_param_flags(p)
    _add_output(p)
    p.set_defaults(func=cmd_tur)

    p = sub.add_parser("extremum", help="1-D extremum of an observable")
    p.add_argument("--objective", choices=sorted(OBJECTIVES) + ["|mean_W|"], required=True)
    p.add_argument("--param", choices=AXIS_PARAMETERS, required=True)
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--maximize", action="store_true")
    p.add_argument("--engine-only", action="store_true")
    _add_param_flags(p, required=False)
    _add_output(p)
    p.set_defaults(func=cmd_extremum)

    p = sub.add_parser("sample", help="Monte Carlo cross-check against exact enumeration")
    _add_param_flags(p)
    p.add_argument("--count", type=int, default=10 ** 6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    _add_output(p)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None:
        args.format = "csv"
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"idleotto {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except UndefinedQuantityError as exc:
        print(f"idleotto {args.command}: undefined: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (DomainError, ScanSpecError) as exc:
        print(f"idleotto {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
