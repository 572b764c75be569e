"""Aerial-phase rotational dynamics of the hinged leg/body pair.

While the latch is open the two mechanisms turn about the joint O under the
shared spring torque.  Angles in :class:`AerialState` are *joint
coordinates*: each mechanism's positive sense is the one that closes the
joint, so that

    phi(t) = phi(t0) - (theta_A - theta_A0) - (theta_B - theta_B0).

The body's closing sense is world CCW, so body quantities read the same in
both frames; the leg's sign is mirrored relative to :class:`LaunchState`.
After relock both rate fields carry the single rigid-body rate ``omega_end``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import LatchNeverClosedError, LatchStateError, NumericalError
from .flight import (
    JumpMetrics,
    apex_height,
    flight_time,
    landing_distance,
    orientation_corrected_distance,
    takeoff_energy_partition,
)
from .model import LatchMode, MassProperties, Scenario
from .spring import SpringGeometry, _energy, _torque

# bisection cap for event localisation; 2**-200 of a step is far below any tolerance
_MAX_EVENT_ITER = 200


@dataclass(frozen=True)
class AerialState:
    t: float
    theta_A: float
    theta_B: float
    omega_A: float
    omega_B: float
    phi: float
    latch: LatchMode


@dataclass(frozen=True)
class RelockEvent:
    t_end: float
    omega_A_before: float
    omega_B_before: float
    omega_end: float
    energy_dissipated: float
    phi_end: float = math.nan  # integrated joint angle at the event


@dataclass(frozen=True)
class AerialTrajectory:
    t: np.ndarray
    theta_A: np.ndarray
    theta_B: np.ndarray
    omega_A: np.ndarray
    omega_B: np.ndarray
    phi: np.ndarray
    latch: np.ndarray  # LatchMode values as strings
    com_x: np.ndarray
    com_y: np.ndarray
    energy: np.ndarray
    relock: Optional[RelockEvent] = None

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> AerialState:
        return AerialState(
            float(self.t[i]), float(self.theta_A[i]), float(self.theta_B[i]),
            float(self.omega_A[i]), float(self.omega_B[i]), float(self.phi[i]),
            LatchMode(self.latch[i]),
        )


def initial_state(scenario: Scenario) -> AerialState:
    """Map the world-frame launch state into joint coordinates."""
    ln = scenario.launch
    latch = LatchMode.OPEN if scenario.epj_enabled else LatchMode.LOCKED
    return AerialState(ln.t0, -ln.theta_A0, ln.theta_B0, -ln.omega_A0, ln.omega_B0,
                       ln.phi0_open, latch)


def _params(scenario):
    m = scenario.mass_properties
    return SpringGeometry.from_joint(scenario.joint_design), m.inertia_A, m.inertia_B


def _rk4(ta, tb, wa, wb, phi, h, geom, ja, jb):
    # stages share phi bookkeeping: phi_stage = phi - (dtheta_A + dtheta_B)
    m1 = _torque(geom, phi)
    wa2, wb2 = wa + 0.5 * h * m1 / ja, wb + 0.5 * h * m1 / jb
    m2 = _torque(geom, phi - 0.5 * h * (wa + wb))
    wa3, wb3 = wa + 0.5 * h * m2 / ja, wb + 0.5 * h * m2 / jb
    m3 = _torque(geom, phi - 0.5 * h * (wa2 + wb2))
    wa4, wb4 = wa + h * m3 / ja, wb + h * m3 / jb
    m4 = _torque(geom, phi - h * (wa3 + wb3))
    dta = h / 6.0 * (wa + 2.0 * wa2 + 2.0 * wa3 + wa4)
    dtb = h / 6.0 * (wb + 2.0 * wb2 + 2.0 * wb3 + wb4)
    msum = m1 + 2.0 * m2 + 2.0 * m3 + m4
    return (ta + dta, tb + dtb, wa + h / 6.0 * msum / ja, wb + h / 6.0 * msum / jb,
            phi - dta - dtb)


def _require_open(state):
    if state.latch is not LatchMode.OPEN:
        raise LatchStateError(f"joint dynamics need an open latch, state is {state.latch.value}")


def rotational_derivatives(state: AerialState, scenario: Scenario) -> Tuple[float, float, float, float]:
    """Rates (dtheta_A, dtheta_B, domega_A, domega_B) of the open joint."""
    _require_open(state)
    geom, ja, jb = _params(scenario)
    torque = _torque(geom, state.phi)
    return state.omega_A, state.omega_B, torque / ja, torque / jb


def step_rk4(state: AerialState, scenario: Scenario, dt: float) -> AerialState:
    """One classical Runge-Kutta step of the open-joint dynamics."""
    _require_open(state)
    if not dt > 0:
        raise ValueError("dt must be > 0")
    _check_finite(state)
    try:
        out = _rk4(state.theta_A, state.theta_B, state.omega_A, state.omega_B, state.phi, dt,
                   *_params(scenario))
    except (ValueError, OverflowError):
        # a stage angle overflowed (math.sin(inf) raises rather than returning nan)
        raise NumericalError("phi", math.nan, state.t + dt) from None
    new = AerialState(state.t + dt, *out, LatchMode.OPEN)
    _check_finite(new)
    return new


def _check_finite(state):
    for name in ("theta_A", "theta_B", "omega_A", "omega_B", "phi"):
        value = getattr(state, name)
        if not math.isfinite(value):
            raise NumericalError(name, value, state.t)


def _locate(prev, h, scenario):
    """Bisect the sub-step size until phi sits on the latch angle."""
    target = scenario.joint_design.latch_angle_phi0
    tol = scenario.settings.event_tol
    lo, hi = 0.0, h
    best = None
    for _ in range(_MAX_EVENT_ITER):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        trial = step_rk4(prev, scenario, mid)
        best = trial
        if abs(trial.phi - target) <= tol:
            return trial
        if trial.phi > target:
            lo = mid
        else:
            hi = mid
    return best


def detect_relock(prev: AerialState, next: AerialState, scenario: Scenario) -> Optional[float]:
    """Time at which phi falls through the latch angle within the step, if it does."""
    if not prev.t < next.t:
        raise ValueError("prev must precede next")
    event = _crossing(prev, next, scenario)
    return None if event is None else event.t


def _crossing(prev, nxt, scenario):
    target = scenario.joint_design.latch_angle_phi0
    if not (prev.phi > target >= nxt.phi):
        return None
    if abs(nxt.phi - target) <= scenario.settings.event_tol:
        return nxt
    return _locate(prev, nxt.t - prev.t, scenario)


def relock_impact(state: AerialState, masses: MassProperties) -> RelockEvent:
    """Perfectly plastic latch impact conserving J_A w_A + J_B w_B."""
    _require_open(state)
    ja, jb = masses.inertia_A, masses.inertia_B
    wa, wb = state.omega_A, state.omega_B
    omega_end = (ja * wa + jb * wb) / (ja + jb)
    # 0.5 J_A wa^2 + 0.5 J_B wb^2 - 0.5 (J_A + J_B) omega_end^2, in a form that cannot go negative
    dissipated = 0.5 * ja * jb / (ja + jb) * (wa - wb) ** 2
    return RelockEvent(state.t, wa, wb, omega_end, dissipated, state.phi)


def open_phase_energy(state: AerialState, scenario: Scenario) -> float:
    geom, ja, jb = _params(scenario)
    return (0.5 * ja * state.omega_A ** 2 + 0.5 * jb * state.omega_B ** 2
            + _energy(geom, state.phi))


# --------------------------------------------------------------------------
# whole-flight drivers

@dataclass
class _OpenPhase:
    samples: List[tuple]
    event: AerialState
    relock: RelockEvent
    theta_B_at_landing: Optional[float]


def _integrate_open(scenario, record, landing_elapsed=None):
    if not scenario.epj_enabled:
        raise ValueError("scenario has the EPJ disabled; use simulate_rigid")
    s = scenario.settings
    geom, ja, jb = _params(scenario)
    target = scenario.joint_design.latch_angle_phi0
    st = initial_state(scenario)
    t0, dt = st.t, s.dt
    ta, tb, wa, wb, phi = st.theta_A, st.theta_B, st.omega_A, st.omega_B, st.phi
    samples = [(st.t, ta, tb, wa, wb, phi)] if record else []
    min_phi = phi
    theta_b_land = None
    n = 0
    while True:
        if n * dt > s.t_max:
            raise LatchNeverClosedError("watchdog t_max elapsed", t0 + n * dt, min_phi)
        t = t0 + n * dt
        nxt = _rk4(ta, tb, wa, wb, phi, dt, geom, ja, jb)
        t_next = t0 + (n + 1) * dt
        for name, value in zip(("theta_A", "theta_B", "omega_A", "omega_B", "phi"), nxt):
            if not math.isfinite(value):
                raise NumericalError(name, value, t_next)
        if phi > target >= nxt[4]:
            prev = AerialState(t, ta, tb, wa, wb, phi, LatchMode.OPEN)
            event = _crossing(prev, AerialState(t_next, *nxt, LatchMode.OPEN), scenario)
            if landing_elapsed is not None and theta_b_land is None and event.t - t0 > landing_elapsed:
                theta_b_land = _theta_b_at(prev, scenario, t0 + landing_elapsed)
            return _OpenPhase(samples, event, relock_impact(event, scenario.mass_properties),
                              theta_b_land)
        if nxt[4] > math.pi:
            raise LatchNeverClosedError("joint opened past pi", t_next, min_phi)
        if landing_elapsed is not None and theta_b_land is None and (n + 1) * dt >= landing_elapsed:
            prev = AerialState(t, ta, tb, wa, wb, phi, LatchMode.OPEN)
            theta_b_land = _theta_b_at(prev, scenario, t0 + landing_elapsed)
        ta, tb, wa, wb, phi = nxt
        min_phi = min(min_phi, phi)
        n += 1
        if record:
            samples.append((t_next, ta, tb, wa, wb, phi))


def _theta_b_at(prev, scenario, t):
    if t <= prev.t:
        return prev.theta_B
    return step_rk4(prev, scenario, t - prev.t).theta_B


def simulate_aerial(scenario: Scenario) -> AerialTrajectory:
    """Integrate the open joint to relock, then fly rigidly to landing."""
    s = scenario.settings
    launch = takeoff_energy_partition(scenario)
    t0 = launch.t0
    t_land = t0 + flight_time(launch, s.gravity_g)
    phase = _integrate_open(scenario, record=True)
    ev, rl = phase.event, phase.relock
    geom, ja, jb = _params(scenario)

    open_arr = np.array(phase.samples, dtype=float).reshape(-1, 6)
    e_open = (0.5 * ja * open_arr[:, 3] ** 2 + 0.5 * jb * open_arr[:, 4] ** 2
              + np.array([_energy(geom, p) for p in open_arr[:, 5]]))

    t_stop = min(t_land, t0 + s.t_max)
    n_first = len(phase.samples)
    n_last = int(math.floor((t_stop - t0) / s.dt))
    grid = t0 + np.arange(n_first, n_last + 1, dtype=float) * s.dt
    grid = grid[grid > ev.t]
    if t_stop > ev.t and (grid.size == 0 or grid[-1] < t_stop):
        grid = np.append(grid, t_stop)
    post_t = np.concatenate(([ev.t], grid))
    elapsed = post_t - ev.t
    w = rl.omega_end
    n_post = post_t.size
    locked_energy = 0.5 * (ja + jb) * w * w + _energy(geom, scenario.joint_design.latch_angle_phi0)

    t = np.concatenate((open_arr[:, 0], post_t))
    theta_a = np.concatenate((open_arr[:, 1], ev.theta_A + w * elapsed))
    theta_b = np.concatenate((open_arr[:, 2], ev.theta_B + w * elapsed))
    omega_a = np.concatenate((open_arr[:, 3], np.full(n_post, w)))
    omega_b = np.concatenate((open_arr[:, 4], np.full(n_post, w)))
    phi = np.concatenate((open_arr[:, 5], np.full(n_post, scenario.joint_design.latch_angle_phi0)))
    latch = np.array([LatchMode.OPEN.value] * len(open_arr) + [LatchMode.RELOCKED.value] * n_post)
    energy = np.concatenate((e_open, np.full(n_post, locked_energy)))
    com_x, com_y = _com_track(launch, s.gravity_g, t - t0)
    return AerialTrajectory(t, theta_a, theta_b, omega_a, omega_b, phi, latch, com_x, com_y,
                            energy, rl)


def simulate_rigid(scenario: Scenario) -> AerialTrajectory:
    """Constant-rate rotation of the latched robot over the ballistic flight."""
    if scenario.epj_enabled:
        raise ValueError("scenario has the EPJ enabled; use simulate_aerial")
    s, launch = scenario.settings, scenario.launch
    st = initial_state(scenario)
    duration = min(flight_time(launch, s.gravity_g), s.t_max)
    n_last = int(math.floor(duration / s.dt))
    elapsed = np.arange(0, n_last + 1, dtype=float) * s.dt
    elapsed = elapsed[elapsed < duration]
    elapsed = np.append(elapsed, duration)
    w = scenario.rigid_omega
    n = elapsed.size
    m = scenario.mass_properties
    com_x, com_y = _com_track(launch, s.gravity_g, elapsed)
    return AerialTrajectory(
        t=launch.t0 + elapsed,
        theta_A=st.theta_A + w * elapsed,
        theta_B=st.theta_B + w * elapsed,
        omega_A=np.full(n, w),
        omega_B=np.full(n, w),
        phi=np.full(n, scenario.joint_design.latch_angle_phi0),
        latch=np.array([LatchMode.LOCKED.value] * n),
        com_x=com_x,
        com_y=com_y,
        energy=np.full(n, 0.5 * m.total_inertia * w * w),
    )


def simulate(scenario: Scenario) -> AerialTrajectory:
    return simulate_aerial(scenario) if scenario.epj_enabled else simulate_rigid(scenario)


def _com_track(launch, g, elapsed):
    (x0, y0), (vx, vy) = launch.com_position, launch.com_velocity
    return x0 + vx * elapsed, y0 + vy * elapsed - 0.5 * g * elapsed * elapsed


def _com_offset(scenario):
    lay = scenario.layout
    if lay is None:
        return (0.0, 0.0)
    m = scenario.mass_properties
    return lay.com(m.mass_A, m.mass_B)


def jump_metrics(scenario: Scenario) -> JumpMetrics:
    """Final angular velocity, apex, range and timing for one jump."""
    g = scenario.settings.gravity_g
    if not scenario.epj_enabled:
        launch = scenario.launch
        T = flight_time(launch, g)
        rotation = scenario.rigid_omega * T
        distance = landing_distance(launch, g)
        return JumpMetrics(
            omega_end=scenario.rigid_omega,
            apex_height=apex_height(launch, g),
            landing_distance=distance,
            flight_time=T,
            distance_corrected=orientation_corrected_distance(distance, _com_offset(scenario), rotation),
            net_rotation=rotation,
        )
    launch = takeoff_energy_partition(scenario)
    T = flight_time(launch, g)
    phase = _integrate_open(scenario, record=False, landing_elapsed=T)
    ev, rl = phase.event, phase.relock
    t_rel = ev.t - launch.t0
    if phase.theta_B_at_landing is not None:
        theta_land = phase.theta_B_at_landing
    else:
        theta_land = ev.theta_B + rl.omega_end * (T - t_rel)
    rotation = theta_land - scenario.launch.theta_B0
    distance = landing_distance(launch, g)
    return JumpMetrics(
        omega_end=rl.omega_end,
        apex_height=apex_height(launch, g),
        landing_distance=distance,
        flight_time=T,
        relock_time=t_rel,
        distance_corrected=orientation_corrected_distance(distance, _com_offset(scenario), rotation),
        net_rotation=rotation,
    )


TRAJECTORY_COLUMNS = ("t", "theta_a", "theta_b", "omega_a", "omega_b", "phi", "latch",
                      "com_x", "com_y", "energy")


def write_trajectory_csv(trajectory: AerialTrajectory, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    cols = (trajectory.t, trajectory.theta_A, trajectory.theta_B, trajectory.omega_A,
            trajectory.omega_B, trajectory.phi)
    tail = (trajectory.com_x, trajectory.com_y, trajectory.energy)
    for i in range(len(trajectory)):
        writer.writerow([format(float(c[i]), ".9g") for c in cols] + [trajectory.latch[i]]
                        + [format(float(c[i]), ".9g") for c in tail])
