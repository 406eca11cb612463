"""Command line entry point: ``vcausal era|bound|schedule|init-config|simulate|analyze``."""
import argparse
import json
import math
import sys

from .bounds import BoundInputs, beta_t_max, sweep_curve
from .config import ExperimentConfig, read_config
from .errors import OutOfValidityError, ValidationError
from .geometry import SIDEREAL_DAY
from .timebase import (DAY, ERA_B1, J2000_JD, UtcInstant, build_schedule,
                       era_from_ut1_seconds, next_era_zero, read_dut1_file, utc_to_era)
from .workbench import (analyze_experiment, load_experiment, run_experiment,
                        write_analysis, write_experiment)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_PHYSICS = 4


def _emit(obj, fmt):
    if fmt == "json":
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for key in sorted(obj):
            print(f"{key}: {obj[key]}")


def cmd_era(args, parser):
    if args.jd is None and args.utc is None:
        parser.error("one of --jd or --utc is required")
    if args.jd is not None:
        if args.utc is not None:
            parser.error("--jd and --utc are exclusive")
        s = (args.jd - J2000_JD) * DAY
        era = era_from_ut1_seconds(s)
        out = {"jd_ut1": args.jd, "era_s": era.t, "theta_deg": era.theta_deg,
               "day_count": era.day_count}
        if args.next_zero:
            step = 0.0 if era.t == 0.0 else (DAY - era.t) / ERA_B1
            out["next_zero_jd_ut1"] = args.jd + step / DAY
            out["seconds_to_next_zero"] = step
    else:
        if not args.dut1_file:
            parser.error("--utc needs --dut1-file")
        table = read_dut1_file(args.dut1_file)
        t = UtcInstant.from_iso(args.utc)
        era = utc_to_era(t, table)
        out = {"utc": t.isoformat(), "era_s": era.t, "theta_deg": era.theta_deg,
               "day_count": era.day_count, "dut1_s": table.dut1_at(t.mjd)}
        if args.next_zero:
            zero = next_era_zero(t, table)
            out["next_zero_utc"] = zero.isoformat()
            out["next_zero_utc_s"] = zero.seconds
            out["seconds_to_next_zero"] = zero - t
    _emit(out, args.format)
    return EXIT_OK


def _parse_sweep(text, parser):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        parser.error(f"--sweep-beta expects lo:hi:n, got {text!r}")
    if n < 2:
        parser.error("--sweep-beta needs n >= 2")
    return lo, hi, n


def cmd_bound(args, parser):
    beta = args.beta if args.sweep_beta is None else 0.0
    inputs = BoundInputs(args.rho, args.dt, beta, math.radians(args.chi_deg),
                         math.radians(args.gamma_deg), args.sidereal_day)
    if args.sweep_beta is not None:
        lo, hi, n = _parse_sweep(args.sweep_beta, parser)
        curve = sweep_curve(inputs, (lo, hi, n - 1), label="sweep")
        print(curve.to_csv() if args.format == "csv" else curve.to_json(), end="")
        return EXIT_OK
    value = beta_t_max(inputs)
    if args.format == "csv":
        print(f"beta,beta_t_max\n{inputs.beta!r},{value!r}")
    else:
        print(json.dumps({"rho": inputs.rho, "delta_t_acq": inputs.delta_t_acq,
                          "delta_t": inputs.delta_t, "beta": inputs.beta,
                          "chi_deg": args.chi_deg, "gamma_deg": args.gamma_deg,
                          "sidereal_day": inputs.sidereal_day, "beta_t_max": value},
                         indent=2, sort_keys=True))
    return EXIT_OK


def cmd_schedule(args, parser):
    table = read_dut1_file(args.dut1_file) if args.dut1_file else None
    start = UtcInstant.from_iso(args.start_utc)
    if table is not None and args.align:
        start = next_era_zero(start, table)
    sched = build_schedule(start, args.n_bins, args.era_hours, table=table)
    text = sched.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_init_config(args, parser):
    sys.stdout.write(ExperimentConfig().to_text())
    return EXIT_OK


def cmd_simulate(args, parser):
    cfg = read_config(args.config)
    out = args.out or cfg.output.dir
    exp = run_experiment(cfg)
    write_experiment(exp, out)
    print(out)
    return EXIT_OK


def cmd_analyze(args, parser):
    cfg, runs, norms = load_experiment(args.run_dir)
    result = analyze_experiment(runs, norms, cfg.source.pulse_width_s,
                                cfg.analysis.smoothing_window)
    write_analysis(result, args.out or args.run_dir, cfg.digest())
    raw = result.report["raw"]
    print(json.dumps({k: raw[k] for k in ("s_lower", "sigma", "z", "p_single", "p_double",
                                          "smax_mean", "breakdown_detected")},
                     indent=2, sort_keys=True))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="vcausal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("era", help="Greenwich ERA time and next ERA zero")
    p.add_argument("--jd", type=float, help="Julian UT1 date")
    p.add_argument("--utc", help="ISO 8601 UTC instant (needs --dut1-file)")
    p.add_argument("--dut1-file", help="two-column '<mjd> <dut1_s>' table")
    p.add_argument("--next-zero", action="store_true")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_era)

    p = sub.add_parser("bound", help="maximum detectable superluminal speed")
    p.add_argument("--rho", type=float, default=1.83e-7)
    p.add_argument("--dt", type=float, default=0.247, help="acquisition interval [s]")
    p.add_argument("--gamma-deg", type=float, default=18.0)
    p.add_argument("--chi-deg", type=float, default=90.0)
    p.add_argument("--sidereal-day", type=float, default=SIDEREAL_DAY)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--beta", type=float, default=1e-3)
    group.add_argument("--sweep-beta", metavar="LO:HI:N")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("schedule", help="export an acquisition schedule as CSV")
    p.add_argument("--start-utc", required=True)
    p.add_argument("--n-bins", type=int, default=2**19)
    p.add_argument("--era-hours", type=float, default=36.0)
    p.add_argument("--dut1-file")
    p.add_argument("--align", action="store_true", help="start at the next ERA zero")
    p.add_argument("--out")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("init-config", help="print the default configuration")
    p.set_defaults(func=cmd_init_config)

    p = sub.add_parser("simulate", help="simulate a four-run experiment")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="analyze a simulated run directory")
    p.add_argument("run_dir")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except OutOfValidityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
