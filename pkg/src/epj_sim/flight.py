"""Ballistic CoM flight and jump metrics.

All quantities here are closed form.  Landing is taken where the CoM returns
to its launch height.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from .errors import InfeasibleLaunchError
from .model import LaunchState, Scenario, Vec2
from .spring import SpringGeometry, _energy


@dataclass(frozen=True)
class BallisticState:
    t: float
    x: float
    y: float
    vx: float
    vy: float


@dataclass(frozen=True)
class JumpMetrics:
    omega_end: float
    apex_height: float
    landing_distance: float
    flight_time: float
    relock_time: Optional[float] = None
    distance_corrected: Optional[float] = None
    net_rotation: float = 0.0


def _require_upward(launch):
    if not launch.com_velocity[1] > 0:
        raise ValueError(f"vertical launch speed must be > 0, got {launch.com_velocity[1]!r}")


def ballistic_state(launch: LaunchState, g: float, t: float) -> BallisticState:
    """CoM state ``t`` seconds after take-off."""
    if t < 0:
        raise ValueError("t must be >= 0")
    (x0, y0), (vx, vy) = launch.com_position, launch.com_velocity
    return BallisticState(launch.t0 + t, x0 + vx * t, y0 + vy * t - 0.5 * g * t * t, vx, vy - g * t)


def apex_height(launch: LaunchState, g: float) -> float:
    _require_upward(launch)
    vy = launch.com_velocity[1]
    return launch.com_position[1] + vy * vy / (2.0 * g)


def flight_time(launch: LaunchState, g: float) -> float:
    """Time for the CoM to come back down to its launch height."""
    _require_upward(launch)
    return 2.0 * launch.com_velocity[1] / g


def landing_distance(launch: LaunchState, g: float) -> float:
    """Horizontal CoM travel until the CoM is back at launch height."""
    return launch.com_velocity[0] * flight_time(launch, g)


def launch_velocity_for(height_gain: float, distance: float, g: float) -> Tuple[float, float]:
    """Invert apex gain and range into a launch velocity (vx, vy)."""
    if height_gain <= 0:
        raise ValueError("height gain must be positive")
    vy = math.sqrt(2.0 * g * height_gain)
    return g * distance / (2.0 * vy), vy


def takeoff_energy_partition(scenario: Scenario) -> LaunchState:
    """Launch state with the spring's take-off energy taken out of CoM motion.

    The energy stored in the stretched spring at take-off is removed from the
    translational kinetic energy; the launch direction is kept.  The rigid
    baseline is returned unchanged.
    """
    launch = scenario.launch
    if not scenario.epj_enabled:
        return launch
    stored = _energy(SpringGeometry.from_joint(scenario.joint_design), launch.phi0_open)
    if stored == 0.0:
        return launch
    vx, vy = launch.com_velocity
    kinetic = 0.5 * scenario.mass_properties.total_mass * (vx * vx + vy * vy)
    if stored >= kinetic:
        raise InfeasibleLaunchError(
            f"spring stores {stored:.6g} J at take-off, launch kinetic energy is only {kinetic:.6g} J"
        )
    scale = math.sqrt(1.0 - stored / kinetic)
    return replace(launch, com_velocity=(vx * scale, vy * scale))


def orientation_corrected_distance(distance: float, com_offset: Vec2, net_rotation: float) -> float:
    """Shift the CoM range by how far the landing attitude moves the CoM.

    ``com_offset`` is the robot CoM in body coordinates (from the body origin
    at the rear-bottom corner); ``net_rotation`` is the body's rotation
    between take-off and landing.  A backward lean puts the CoM further back.
    """
    cx, cy = com_offset
    c, s = math.cos(net_rotation), math.sin(net_rotation)
    return distance + (cx * c - cy * s) - cx
