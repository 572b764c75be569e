"""Parameter studies over joint position and spring stiffness."""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .dynamics import jump_metrics
from .errors import BracketError, ConfigError, EPJError, SweepError
from .flight import JumpMetrics
from .model import Scenario

PARAMETERS = ("joint_x", "joint_y", "stiffness_k")


def substitute(scenario: Scenario, parameter: str, value: float) -> Scenario:
    """Copy of ``scenario`` with one design parameter replaced.

    Moving the joint re-derives arm lengths, latch angle and inertias about
    the new joint from the body layout; the opening at take-off
    (phi_open - phi0) is kept.
    """
    joint = scenario.joint_design
    if parameter == "stiffness_k":
        return replace(scenario, joint_design=replace(joint, stiffness_k=value))
    if parameter not in ("joint_x", "joint_y"):
        raise ConfigError("parameter", f"unknown sweep parameter {parameter!r}; expected one of {PARAMETERS}")
    if scenario.layout is None:
        raise ConfigError("[layout]", "joint-position changes need the body layout section")
    x = value if parameter == "joint_x" else joint.joint_x
    y = value if parameter == "joint_y" else joint.joint_y
    m = scenario.mass_properties
    derived = scenario.layout.at_joint(x, y, m.mass_A, m.mass_B)
    opening = scenario.launch.phi0_open - joint.latch_angle_phi0
    return replace(
        scenario,
        mass_properties=replace(m, inertia_A=derived["inertia_A"], inertia_B=derived["inertia_B"]),
        joint_design=replace(joint, joint_x=x, joint_y=y, l_OC=derived["l_OC"], l_OD=derived["l_OD"],
                             latch_angle_phi0=derived["latch_angle_phi0"]),
        launch=replace(scenario.launch, phi0_open=derived["latch_angle_phi0"] + opening),
    )


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    lower: float
    upper: float
    num_points: int
    base_scenario: Scenario

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ConfigError("parameter", f"unknown sweep parameter {self.parameter!r}")
        if not self.lower < self.upper:
            raise ConfigError("lower", "must be below upper")
        if self.num_points < 2:
            raise ConfigError("num_points", "need at least 2 grid points")

    def grid(self) -> Tuple[float, ...]:
        return tuple(float(v) for v in np.linspace(self.lower, self.upper, self.num_points))


@dataclass(frozen=True)
class ZeroCrossing:
    bracket: Tuple[float, float]
    root: float
    abs_omega: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    grid: Tuple[float, ...]
    metrics: Tuple[Optional[JumpMetrics], ...]
    baseline_metrics: Tuple[Optional[JumpMetrics], ...]
    status: Tuple[str, ...]
    zero_crossings: Tuple[ZeroCrossing, ...] = ()

    def ok_indices(self) -> List[int]:
        return [i for i, s in enumerate(self.status) if s == "ok"]


def _evaluate(args):
    base, parameter, value = args
    try:
        scenario = substitute(base, parameter, value)
        metrics = jump_metrics(replace(scenario, epj_enabled=True))
        baseline = jump_metrics(replace(scenario, epj_enabled=False))
    except EPJError as exc:
        return None, None, f"failed: {type(exc).__name__}: {exc}"
    return metrics, baseline, "ok"


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker count; ``EPJ_SIM_THREADS`` caps it when not given (0 = all CPUs)."""
    if workers is None:
        raw = os.environ.get("EPJ_SIM_THREADS", "0")
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError("EPJ_SIM_THREADS", f"not an integer: {raw!r}") from None
    if workers < 0:
        raise ConfigError("EPJ_SIM_THREADS", "must be >= 0")
    return workers or (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, workers: Optional[int] = None, refine: bool = True) -> SweepResult:
    grid = spec.grid()
    jobs = [(spec.base_scenario, spec.parameter, value) for value in grid]
    n_workers = min(resolve_workers(workers), len(jobs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_evaluate, jobs))
    else:
        outcomes = [_evaluate(job) for job in jobs]
    metrics, baseline, status = zip(*outcomes)
    if all(s != "ok" for s in status):
        raise SweepError(f"every grid point failed; first: {status[0]}")
    result = SweepResult(spec.parameter, grid, metrics, baseline, status)
    if refine:
        crossings = tuple(find_zero_crossing(spec, cell) for cell in sign_change_cells(result))
        result = replace(result, zero_crossings=crossings)
    return result


def sign_change_cells(result: SweepResult) -> List[Tuple[float, float]]:
    """Adjacent successful grid points whose omega_end differ in sign."""
    ok = result.ok_indices()
    cells = []
    for i, j in zip(ok, ok[1:]):
        a, b = result.metrics[i].omega_end, result.metrics[j].omega_end
        if a * b < 0 or (b == 0.0 and a != 0.0):
            cells.append((result.grid[i], result.grid[j]))
    return cells


def bisect_root(f: Callable[[float], float], lo: float, hi: float, ftol: float,
                rel_xtol: float = 1e-6) -> Tuple[float, float, int, bool]:
    """Bisection for a sign change of ``f`` on [lo, hi].

    Stops when |f| <= ftol or the bracket is narrower than ``rel_xtol`` of
    its starting width.  Returns (root, f(root), iterations, converged).
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo, f_lo, 0, True
    if f_hi == 0.0:
        return hi, f_hi, 0, True
    if (f_lo < 0) == (f_hi < 0):
        raise BracketError(lo, hi, f_lo, f_hi)
    span = hi - lo
    iterations = 0
    while True:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        iterations += 1
        if abs(f_mid) <= ftol:
            return mid, f_mid, iterations, True
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < rel_xtol * span:
            return mid, f_mid, iterations, False


def find_zero_crossing(spec: SweepSpec, bracket: Tuple[float, float]) -> ZeroCrossing:
    base = spec.base_scenario

    def omega_end(value):
        return jump_metrics(replace(substitute(base, spec.parameter, value), epj_enabled=True)).omega_end

    lo, hi = bracket
    root, value, iterations, converged = bisect_root(omega_end, lo, hi, base.settings.omega_zero_tol)
    return ZeroCrossing((lo, hi), root, abs(value), iterations, converged)


# --------------------------------------------------------------------------
# trends

def monotonicity(values) -> str:
    d = np.diff(np.asarray(values, dtype=float))
    if d.size == 0 or np.all(d == 0):
        return "constant"
    if np.all(d > 0):
        return "increasing"
    if np.all(d >= 0):
        return "non-decreasing"
    if np.all(d < 0):
        return "decreasing"
    if np.all(d <= 0):
        return "non-increasing"
    return "non-monotone"


_RISING = {"increasing", "non-decreasing", "constant"}
_FALLING = {"decreasing", "non-increasing", "constant"}


@dataclass(frozen=True)
class SeriesTrend:
    monotone: str
    low: float
    high: float


@dataclass(frozen=True)
class TrendReport:
    parameter: str
    series: Dict[str, SeriesTrend]
    omega_sign_changes: List[Tuple[float, float]]
    failed_points: int
    verdicts: Dict[str, bool] = field(default_factory=dict)

    def lines(self) -> List[str]:
        out = [f"trend over {self.parameter} ({self.failed_points} failed points)"]
        for name, s in self.series.items():
            out.append(f"  {name:<22} {s.monotone:<15} [{s.low:.6g}, {s.high:.6g}]")
        for lo, hi in self.omega_sign_changes:
            out.append(f"  omega_end sign change in [{lo:.9g}, {hi:.9g}]")
        for name, ok in self.verdicts.items():
            out.append(f"  verdict {name}: {'PASS' if ok else 'FAIL'}")
        return out


def trend_report(result: SweepResult) -> TrendReport:
    ok = result.ok_indices()
    if len(ok) < 3:
        raise ValueError("trend report needs at least 3 successful grid points")
    m = [result.metrics[i] for i in ok]
    b = [result.baseline_metrics[i] for i in ok]
    columns = {
        "omega_end": [x.omega_end for x in m],
        "apex_m": [x.apex_height for x in m],
        "distance_m": [x.landing_distance for x in m],
        "distance_corrected_m": [x.distance_corrected for x in m],
        "baseline_omega_end": [x.omega_end for x in b],
        "baseline_apex_m": [x.apex_height for x in b],
        "baseline_distance_m": [x.landing_distance for x in b],
    }
    series = {k: SeriesTrend(monotonicity(v), min(v), max(v)) for k, v in columns.items()}
    changes = sign_change_cells(result)
    omega = columns["omega_end"]
    verdicts = {
        "omega_monotone": series["omega_end"].monotone != "non-monotone",
        "omega_single_sign_change": len(changes) == 1,
        "forward_to_backward": omega[0] < 0 < omega[-1],
        "backward_to_forward": omega[0] > 0 > omega[-1],
        "apex_not_above_baseline": all(x.apex_height <= y.apex_height for x, y in zip(m, b)),
        "distance_non_decreasing": series["distance_m"].monotone in _RISING,
        "baseline_omega_constant": series["baseline_omega_end"].monotone == "constant",
    }
    return TrendReport(result.parameter, series, changes, len(result.grid) - len(ok), verdicts)


# --------------------------------------------------------------------------
# CSV

SWEEP_COLUMNS = ("param_name", "param_value", "omega_end", "apex_m", "distance_m",
                 "distance_corrected_m", "status")


def _g(value):
    return "" if value is None else format(float(value), ".9g")


def write_sweep_csv(result: SweepResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for value, met, status in zip(result.grid, result.metrics, result.status):
        if met is None:
            writer.writerow([result.parameter, _g(value), "", "", "", "", status])
        else:
            writer.writerow([result.parameter, _g(value), _g(met.omega_end), _g(met.apex_height),
                             _g(met.landing_distance), _g(met.distance_corrected), status])
    ok = result.ok_indices()
    if ok:
        base = result.baseline_metrics[ok[0]]
        fh.write(f"#baseline,{_g(base.omega_end)},{_g(base.apex_height)},"
                 f"{_g(base.landing_distance)},{_g(base.distance_corrected)}\n")
    for zc in result.zero_crossings:
        fh.write(f"#root,{result.parameter},{_g(zc.bracket[0])},{_g(zc.bracket[1])},{_g(zc.root)},"
                 f"{_g(zc.abs_omega)},{zc.iterations},{'converged' if zc.converged else 'not-converged'}\n")
