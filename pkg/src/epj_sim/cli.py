"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 simulation failure,
4 optimisation bracket without a sign change.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, replace
from typing import Optional

from .dynamics import jump_metrics, simulate, write_trajectory_csv
from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    InfeasibleLaunchError,
    SimulationError,
    SingularityError,
    SweepError,
)
from .flight import JumpMetrics
from .model import Scenario, load_scenario_file
from .reference import REPORTED_VALUES, default_reference_scenario
from .sweep import PARAMETERS, SweepSpec, find_zero_crossing, run_sweep, trend_report, write_sweep_csv

EXIT_OK, EXIT_CONFIG, EXIT_SIMULATION, EXIT_BRACKET = 0, 2, 3, 4

METRICS_COLUMNS = ("scenario_id", "epj", "k", "joint_x_mm", "joint_y_mm", "omega_end", "apex_m",
                   "distance_m", "distance_corrected_m", "flight_s", "relock_s")

# CLI bounds for joint coordinates are millimetres, like the config file
_CLI_SCALE = {"joint_x": 1e-3, "joint_y": 1e-3, "stiffness_k": 1.0}


@dataclass(frozen=True)
class ComparisonReport:
    with_epj: JumpMetrics
    without_epj: JumpMetrics
    omega_reduction_ratio: Optional[float]
    paper_reference_values: dict


def _g(value):
    return "" if value is None else format(float(value), ".9g")


def metrics_row(scenario_id: str, scenario: Scenario, metrics: JumpMetrics) -> list:
    j = scenario.joint_design
    return [scenario_id, "on" if scenario.epj_enabled else "off", _g(j.stiffness_k),
            _g(j.joint_x * 1000), _g(j.joint_y * 1000), _g(metrics.omega_end),
            _g(metrics.apex_height), _g(metrics.landing_distance), _g(metrics.distance_corrected),
            _g(metrics.flight_time), _g(metrics.relock_time)]


def summary_line(scenario: Scenario, m: JumpMetrics) -> str:
    relock = "n/a" if m.relock_time is None else f"{m.relock_time:.6g} s"
    return (f"epj={'on' if scenario.epj_enabled else 'off'} omega_end={m.omega_end:.6g} rad/s "
            f"apex={m.apex_height:.6g} m distance={m.landing_distance:.6g} m "
            f"flight={m.flight_time:.6g} s relock={relock}")


def compare_scenarios(scenario: Scenario) -> ComparisonReport:
    """Run the EPJ arm and the rigid arm.

    A config with ``epj = false`` means the latch is never triggered, so both
    arms are the rigid robot.
    """
    with_epj = jump_metrics(scenario)
    without = jump_metrics(replace(scenario, epj_enabled=False))
    ratio = None
    if without.omega_end != 0:
        ratio = 1.0 - abs(with_epj.omega_end) / abs(without.omega_end)
    return ComparisonReport(with_epj, without, ratio, dict(REPORTED_VALUES))


def _load(args) -> Scenario:
    if args.config is None:
        return default_reference_scenario()
    try:
        return load_scenario_file(args.config)
    except OSError as exc:
        raise ConfigError(str(args.config), exc.strerror or str(exc)) from None


def cmd_run(args) -> int:
    scenario = _load(args)
    if args.epj is not None:
        scenario = replace(scenario, epj_enabled=args.epj)
    trajectory = simulate(scenario)
    metrics = jump_metrics(scenario)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_trajectory_csv(trajectory, fh)
    print(summary_line(scenario, metrics))
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _load(args)
    report = compare_scenarios(scenario)
    p = report.paper_reference_values
    rows = [
        ("omega_end [rad/s]", report.with_epj.omega_end, report.without_epj.omega_end,
         p["omega_end_epj"], p["omega_end_rigid"]),
        ("apex [m]", report.with_epj.apex_height, report.without_epj.apex_height,
         p["apex_epj_m"], p["apex_rigid_m"]),
        ("distance [m]", report.with_epj.landing_distance, report.without_epj.landing_distance,
         p["distance_epj_m"], p["distance_rigid_m"]),
    ]
    print(f"{'':<20}{'with EPJ':>14}{'without EPJ':>14}   paper-reported, not expected to match")
    for name, a, b, pa, pb in rows:
        print(f"{name:<20}{a:>14.6g}{b:>14.6g}   ({pa:g} / {pb:g})")
    if report.omega_reduction_ratio is None:
        print("omega reduction ratio: undefined (rigid omega is zero)")
    else:
        print(f"omega reduction ratio: {report.omega_reduction_ratio:.6g}")
    if args.out:
        epj_arm = scenario if scenario.epj_enabled else replace(scenario, epj_enabled=False)
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(METRICS_COLUMNS)
            writer.writerow(metrics_row("with_epj", epj_arm, report.with_epj))
            writer.writerow(metrics_row("without_epj", replace(scenario, epj_enabled=False),
                                        report.without_epj))
    return EXIT_OK


def _spec(args, scenario, points):
    scale = _CLI_SCALE[args.parameter]
    return SweepSpec(args.parameter, args.lower * scale, args.upper * scale, points,
                     replace(scenario, epj_enabled=True))


def cmd_sweep(args) -> int:
    scenario = _load(args)
    result = run_sweep(_spec(args, scenario, args.points))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_sweep_csv(result, fh)
    if len(result.ok_indices()) >= 3:
        print("\n".join(trend_report(result).lines()))
    unit = "N/m" if args.parameter == "stiffness_k" else "mm"
    for zc in result.zero_crossings:
        print(f"root {args.parameter} = {zc.root / _CLI_SCALE[args.parameter]:.9g} {unit} "
              f"(|omega_end| = {zc.abs_omega:.3g} rad/s, {zc.iterations} iterations)")
    return EXIT_OK


def cmd_optimize(args) -> int:
    scenario = _load(args)
    spec = _spec(args, scenario, 2)
    zc = find_zero_crossing(spec, (spec.lower, spec.upper))
    status = "converged" if zc.converged else "not converged"
    unit = "N/m" if args.parameter == "stiffness_k" else "mm"
    print(f"non-flipping {args.parameter} = {zc.root / _CLI_SCALE[args.parameter]:.9g} {unit}; "
          f"|omega_end| = {zc.abs_omega:.3g} rad/s; {zc.iterations} iterations; {status}")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["param_name", "lower", "upper", "root", "abs_omega_end", "iterations",
                             "converged"])
            writer.writerow([args.parameter, _g(spec.lower), _g(spec.upper), _g(zc.root),
                             _g(zc.abs_omega), zc.iterations, str(zc.converged).lower()])
    return EXIT_OK


def _globals(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default,
                        help="scenario INI file (default: built-in reference scenario)")
    parser.add_argument("--out", default=default, help="CSV output path")
    parser.add_argument("--seedless-deterministic", action="store_true",
                        default=argparse.SUPPRESS if suppress else True,
                        help="no random numbers are used anywhere; accepted for compatibility")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epj-sim", description=__doc__.splitlines()[0])
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one jump and write its trajectory")
    _globals(run, suppress=True)
    group = run.add_mutually_exclusive_group()
    group.add_argument("--epj", dest="epj", action="store_true", default=None)
    group.add_argument("--no-epj", dest="epj", action="store_false")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="EPJ against the rigid baseline")
    _globals(compare, suppress=True)
    compare.set_defaults(func=cmd_compare)

    for name, func, helptext in (("sweep", cmd_sweep, "sweep one design parameter"),
                                 ("optimize", cmd_optimize, "bisect for omega_end = 0")):
        p = sub.add_parser(name, help=helptext,
                           description="joint_x/joint_y bounds in mm, stiffness_k in N/m")
        _globals(p, suppress=True)
        p.add_argument("parameter", choices=PARAMETERS)
        p.add_argument("lower", type=float)
        p.add_argument("upper", type=float)
        if name == "sweep":
            p.add_argument("points", type=int)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors exit 2, which already matches the config-error code
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BracketError as exc:
        print(f"optimize: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except (SimulationError, SweepError, InfeasibleLaunchError, DomainError, SingularityError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
