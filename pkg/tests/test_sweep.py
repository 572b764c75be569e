import io
import math
from dataclasses import replace

import pytest

from epj_sim import default_reference_scenario, jump_metrics
from epj_sim.errors import BracketError, ConfigError, SweepError
from epj_sim.sweep import (
    SWEEP_COLUMNS,
    SweepResult,
    SweepSpec,
    bisect_root,
    find_zero_crossing,
    monotonicity,
    resolve_workers,
    run_sweep,
    substitute,
    trend_report,
    write_sweep_csv,
)

from oracles import toy_scenario

REF = default_reference_scenario()


@pytest.fixture(scope="module")
def k_sweep():
    return run_sweep(SweepSpec("stiffness_k", 200.0, 3000.0, 8, REF), workers=1)


class TestBisection:
    def test_linear_root(self):
        root, value, iterations, converged = bisect_root(lambda p: p - 5.0, 0.0, 10.0, ftol=1e-12)
        assert root == pytest.approx(5.0, abs=1e-5)
        assert converged and iterations <= 21

    def test_iteration_bound(self):
        # ftol = 0 forces the width criterion: ceil(log2(1 / 1e-6)) = 20 halvings
        for f in (lambda p: p ** 3 - 2.0, lambda p: math.tanh(p - 0.3), lambda p: p - math.pi):
            root, value, iterations, converged = bisect_root(f, -1.0, 4.0, ftol=0.0)
            assert iterations <= math.ceil(math.log2(1 / 1e-6))
            assert -1.0 < root < 4.0

    def test_no_sign_change(self):
        with pytest.raises(BracketError) as err:
            bisect_root(lambda p: p * p + 1.0, -1.0, 2.0, ftol=1e-6)
        assert err.value.f_lo == 2.0 and err.value.f_hi == 5.0
        assert "2" in str(err.value) and "5" in str(err.value)

    def test_root_at_endpoint(self):
        assert bisect_root(lambda p: p, 0.0, 1.0, 1e-9)[:3] == (0.0, 0.0, 0)


class TestSpec:
    def test_grid_inclusive(self):
        spec = SweepSpec("stiffness_k", 100.0, 200.0, 5, REF)
        assert spec.grid() == (100.0, 125.0, 150.0, 175.0, 200.0)

    @pytest.mark.parametrize("args", [("mass", 0, 1, 3), ("stiffness_k", 5, 5, 3), ("stiffness_k", 1, 2, 1)])
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            SweepSpec(*args, REF)

    def test_joint_move_needs_layout(self):
        with pytest.raises(ConfigError):
            substitute(toy_scenario(), "joint_x", 0.03)

    def test_joint_move_rederives_geometry(self):
        moved = substitute(REF, "joint_x", 0.031)
        derived = REF.layout.at_joint(0.031, REF.joint_design.joint_y, 0.03346, 0.1188)
        assert moved.joint_design.l_OC == derived["l_OC"]
        assert moved.mass_properties.inertia_A == derived["inertia_A"]
        opening = REF.launch.phi0_open - REF.joint_design.latch_angle_phi0
        assert moved.launch.phi0_open - moved.joint_design.latch_angle_phi0 == pytest.approx(opening, abs=1e-15)

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.setenv("EPJ_SIM_THREADS", "3")
        assert resolve_workers() == 3
        monkeypatch.setenv("EPJ_SIM_THREADS", "0")
        assert resolve_workers() >= 1
        monkeypatch.setenv("EPJ_SIM_THREADS", "many")
        with pytest.raises(ConfigError):
            resolve_workers()
        assert resolve_workers(2) == 2


class TestRunSweep:
    def test_stiffness_sweep_turns_backward(self, k_sweep):
        omega = [m.omega_end for m in k_sweep.metrics]
        assert omega[0] < 0 < omega[-1]
        assert all(a < b for a, b in zip(omega, omega[1:]))

    def test_baseline_invariance(self, k_sweep):
        assert len({b for b in k_sweep.baseline_metrics}) == 1

    def test_root_validity_and_containment(self, k_sweep):
        assert len(k_sweep.zero_crossings) == 1
        zc = k_sweep.zero_crossings[0]
        lo, hi = zc.bracket
        assert lo < zc.root < hi
        assert zc.converged and zc.abs_omega <= REF.settings.omega_zero_tol
        k_star = replace(REF, joint_design=replace(REF.joint_design, stiffness_k=zc.root))
        assert abs(jump_metrics(k_star).omega_end) == zc.abs_omega

    def test_reproducible_and_order_independent(self, k_sweep):
        again = run_sweep(SweepSpec("stiffness_k", 200.0, 3000.0, 8, REF), workers=1)
        assert again == k_sweep
        pooled = run_sweep(SweepSpec("stiffness_k", 200.0, 3000.0, 8, REF), workers=3)
        assert pooled == k_sweep

    def test_failed_points_are_recorded(self):
        result = run_sweep(SweepSpec("stiffness_k", 0.0, 1000.0, 3, REF), workers=1, refine=False)
        assert result.status[0].startswith("failed: LatchNeverClosedError")
        assert result.metrics[0] is None
        assert result.status[1:] == ("ok", "ok")

    def test_all_failed(self):
        base = replace(REF, joint_design=replace(REF.joint_design, stiffness_k=0.0))
        with pytest.raises(SweepError):
            run_sweep(SweepSpec("joint_y", 0.0, 0.001, 2, base), workers=1)

    def test_find_zero_crossing_bracket_error(self):
        with pytest.raises(BracketError):
            find_zero_crossing(SweepSpec("stiffness_k", 200.0, 1000.0, 2, REF), (200.0, 1000.0))


class TestTrends:
    def test_monotonicity_labels(self):
        assert monotonicity([1, 1, 1]) == "constant"
        assert monotonicity([1, 2, 3]) == "increasing"
        assert monotonicity([1, 2, 2]) == "non-decreasing"
        assert monotonicity([3, 2, 1]) == "decreasing"
        assert monotonicity([3, 3, 1]) == "non-increasing"
        assert monotonicity([1, 3, 2]) == "non-monotone"

    def test_report(self, k_sweep):
        report = trend_report(k_sweep)
        assert report.series["baseline_omega_end"].monotone == "constant"
        assert report.verdicts["omega_monotone"] and report.verdicts["omega_single_sign_change"]
        assert report.verdicts["apex_not_above_baseline"]
        assert report.failed_points == 0
        assert any("sign change" in line for line in report.lines())

    def test_needs_three_points(self):
        result = run_sweep(SweepSpec("stiffness_k", 1000.0, 2000.0, 2, REF), workers=1, refine=False)
        with pytest.raises(ValueError):
            trend_report(result)

    def test_failed_points_skipped(self):
        result = run_sweep(SweepSpec("stiffness_k", 0.0, 3000.0, 5, REF), workers=1, refine=False)
        report = trend_report(result)
        assert report.failed_points == 1


def test_sweep_csv(k_sweep):
    buf = io.StringIO()
    write_sweep_csv(k_sweep, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[0] == "param_name,param_value,omega_end,apex_m,distance_m,distance_corrected_m,status"
    rows = [l for l in lines[1:] if not l.startswith("#")]
    assert len(rows) == 8 and all(r.endswith(",ok") for r in rows)
    roots = [l for l in lines if l.startswith("#root,")]
    assert len(roots) == 1 and roots[0].endswith(",converged")
    assert lines[-1] == roots[0]


def test_failed_row_in_csv():
    result = SweepResult("stiffness_k", (0.0,), (None,), (None,), ("failed: X: y",))
    buf = io.StringIO()
    write_sweep_csv(result, buf)
    assert buf.getvalue().splitlines()[1] == "stiffness_k,0,,,,,failed: X: y"
