"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are printed even without ``-s``) or directly:
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import contextlib
import io
import math
import os
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from epj_sim import default_reference_scenario, jump_metrics, simulate_aerial
from epj_sim.cli import main as cli_main
from epj_sim.dynamics import AerialState, relock_impact
from epj_sim.flight import apex_height, ballistic_state, flight_time, landing_distance
from epj_sim.model import LatchMode, LaunchState, MassProperties
from epj_sim.sweep import SweepSpec, run_sweep, trend_report

K_SWEEP = ("stiffness_k", 200.0, 3000.0, 20)
X_SWEEP = ("joint_x", 0.024, 0.036, 13)
Y_SWEEP = ("joint_y", 0.0, 0.008, 9)


def _timed(fn):
    start = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - start


def criterion_1():
    """Relock impacts conserve J_A w_A + J_B w_B and never add kinetic energy."""
    rng = np.random.default_rng(20240601)

    def run():
        worst_momentum, worst_energy = 0.0, -math.inf
        for _ in range(1000):
            ja, jb = 10 ** rng.uniform(-7, -2, size=2)
            wa, wb = rng.uniform(-100, 100, size=2)
            ev = relock_impact(AerialState(0.0, 0.0, 0.0, wa, wb, 1.0, LatchMode.OPEN),
                               MassProperties(0.03, 0.12, ja, jb))
            before = ja * wa + jb * wb
            after = (ja + jb) * ev.omega_end
            worst_momentum = max(worst_momentum, abs(after - before) / (abs(ja * wa) + abs(jb * wb)))
            ke_before = 0.5 * ja * wa * wa + 0.5 * jb * wb * wb
            ke_after = 0.5 * (ja + jb) * ev.omega_end ** 2
            worst_energy = max(worst_energy, (ke_after - ke_before) / ke_before)
            if ev.energy_dissipated < 0:
                worst_energy = math.inf
        return worst_momentum, worst_energy

    (momentum, energy), seconds = _timed(run)
    # "never increases" is checked up to rounding in the two kinetic-energy sums
    ok = momentum <= 1e-12 and energy <= 4 * sys.float_info.epsilon and seconds < 1.0
    return ok, (f"max relative momentum error {momentum:.2e} (<= 1e-12), "
                f"max relative KE gain {energy:.2e}, {seconds:.2f} s (< 1 s)")


def criterion_2():
    """Open-phase energy drift on the reference scenario."""
    s = default_reference_scenario()
    traj, seconds = _timed(lambda: simulate_aerial(s))
    e = traj.energy[traj.latch == "Open"]
    drift = float(np.max(np.abs(e - e[0]))) / max(e[0], 1e-12)
    return drift <= 1e-6 and seconds < 5.0, f"relative drift {drift:.2e} (<= 1e-6), {seconds:.2f} s (< 5 s)"


def criterion_3():
    """Convergence order of omega_end under dt halving."""
    s = default_reference_scenario()
    w = [jump_metrics(replace(s, settings=replace(s.settings, dt=dt))).omega_end for dt in (4e-5, 2e-5, 1e-5)]
    order = math.log2(abs(w[0] - w[1]) / abs(w[1] - w[2]))
    return order >= 3.5, f"measured order {order:.3f} (>= 3.5); omega_end = {w[2]:.12f} rad/s"


def criterion_4():
    s = default_reference_scenario()
    ev = simulate_aerial(s).relock
    err = abs(ev.phi_end - s.joint_design.latch_angle_phi0)
    return err <= 1e-9, f"|phi(t_end) - phi0| = {err:.2e} rad (<= 1e-9)"


def criterion_5():
    s = default_reference_scenario()
    epj = jump_metrics(s).omega_end
    rigid = jump_metrics(replace(s, epj_enabled=False)).omega_end
    reduction = 1.0 - abs(epj) / abs(rigid)
    return reduction >= 0.8, f"omega_end {epj:.4f} vs {rigid:.2f} rad/s, reduction {reduction:.1%} (>= 80%)"


def criterion_6():
    s = default_reference_scenario()

    def run():
        result = run_sweep(SweepSpec(*K_SWEEP, s))
        report = trend_report(result)
        (lo, hi), = report.omega_sign_changes
        with contextlib.redirect_stdout(io.StringIO()) as out:
            code = cli_main(["optimize", "stiffness_k", repr(lo), repr(hi)])
        return report, code, out.getvalue()

    (report, code, text), seconds = _timed(run)
    abs_omega = float(text.split("|omega_end| = ")[1].split()[0]) if code == 0 else math.inf
    ok = (report.verdicts["omega_monotone"] and report.verdicts["omega_single_sign_change"]
          and code == 0 and abs_omega <= 1e-4 and seconds < 60)
    return ok, (f"omega_end {report.series['omega_end'].monotone}, "
                f"{len(report.omega_sign_changes)} sign change(s); optimize exit {code}, "
                f"|omega_end| = {abs_omega:.2e} (<= 1e-4); {seconds:.1f} s (< 60 s)")


def criterion_7():
    s = default_reference_scenario()
    details, ok = [], True
    for spec_args, direction in ((X_SWEEP, "forward_to_backward"), (Y_SWEEP, "backward_to_forward")):
        result = run_sweep(SweepSpec(*spec_args, s))
        report = trend_report(result)
        roots = [zc for zc in result.zero_crossings if zc.converged]
        good = (report.verdicts[direction] and report.verdicts["omega_single_sign_change"]
                and len(roots) == 1)
        ok &= good
        where = f"{roots[0].root * 1000:.3f} mm" if roots else "none"
        details.append(f"{spec_args[0]}: {direction.replace('_', ' ')} "
                       f"{'yes' if report.verdicts[direction] else 'no'}, "
                       f"{len(report.omega_sign_changes)} sign change(s), root {where}")
    return ok, "; ".join(details)


def criterion_8():
    s = default_reference_scenario()
    report = trend_report(run_sweep(SweepSpec(*K_SWEEP, s)))
    apex_ok = report.verdicts["apex_not_above_baseline"]
    dist_ok = report.verdicts["distance_non_decreasing"]
    d = report.series["distance_m"]
    return apex_ok and dist_ok, (
        f"apex <= baseline at every point: {'yes' if apex_ok else 'no'}; "
        f"landing distance over k is {d.monotone} [{d.low:.4f}, {d.high:.4f}] m "
        f"(required non-decreasing)")


def criterion_9():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        g = rng.uniform(1.0, 20.0)
        vx, vy = rng.uniform(-10, 10), rng.uniform(0.01, 10)
        x0, y0 = rng.uniform(-1, 1, size=2)
        launch = LaunchState(0.0, (x0, y0), (vx, vy), 0.0, 0.0, 0.0, 0.0, 1.0)
        top = ballistic_state(launch, g, vy / g)
        land = ballistic_state(launch, g, 2 * vy / g)
        worst = max(worst,
                    abs(apex_height(launch, g) - (y0 + vy * vy / (2 * g))),
                    abs(apex_height(launch, g) - top.y),
                    abs(landing_distance(launch, g) - 2 * vx * vy / g),
                    abs(landing_distance(launch, g) - (land.x - x0)),
                    abs(flight_time(launch, g) - 2 * vy / g))
    return worst <= 1e-12, f"max deviation from closed form {worst:.2e} m (<= 1e-12)"


def write_artifacts(directory: Path) -> list:
    """Every CSV the acceptance run produces, written through the CLI."""
    jobs = [
        ("trajectory_epj.csv", ["run", "--epj"]),
        ("trajectory_rigid.csv", ["run", "--no-epj"]),
        ("compare.csv", ["compare"]),
        ("sweep_k.csv", ["sweep", "stiffness_k", "200", "3000", "20"]),
        ("sweep_x.csv", ["sweep", "joint_x", "24", "36", "13"]),
        ("sweep_y.csv", ["sweep", "joint_y", "0", "8", "9"]),
        ("optimize_k.csv", ["optimize", "stiffness_k", "1526.31578947", "1673.68421053"]),
    ]
    for name, args in jobs:
        with contextlib.redirect_stdout(io.StringIO()):
            code = cli_main(["--out", str(directory / name)] + args)
        if code != 0:
            raise RuntimeError(f"{args} exited {code}")
    return [name for name, _ in jobs]


def criterion_10():
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        names = write_artifacts(Path(a))
        previous = os.environ.get("EPJ_SIM_THREADS")
        os.environ["EPJ_SIM_THREADS"] = "2"  # second run through the process pool
        try:
            write_artifacts(Path(b))
        finally:
            if previous is None:
                del os.environ["EPJ_SIM_THREADS"]
            else:
                os.environ["EPJ_SIM_THREADS"] = previous
        differing = [n for n in names if (Path(a) / n).read_bytes() != (Path(b) / n).read_bytes()]
    return not differing, f"{len(names) - len(differing)}/{len(names)} CSV artifacts byte-identical"


CRITERIA = {
    1: ("momentum exactness", criterion_1),
    2: ("energy conservation", criterion_2),
    3: ("integrator order", criterion_3),
    4: ("event accuracy", criterion_4),
    5: ("flip suppression", criterion_5),
    6: ("stiffness trend", criterion_6),
    7: ("joint-position trends", criterion_7),
    8: ("height/distance trade-off", criterion_8),
    9: ("closed-form ballistics", criterion_9),
    10: ("determinism", criterion_10),
}


def line(number, ok, detail):
    return f"criterion {number:>2} {CRITERIA[number][0]:<26} {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number][1]()
    with capsys.disabled():
        print("\n" + line(number, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n][1]()
        failures += not ok
        print(line(n, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
