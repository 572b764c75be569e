"""Calibrated reference scenario.

Published quantities are used as given: segment masses, take-off
angular velocities of leg and body, the rigid-baseline angular velocity and
the rigid-baseline apex/range (inverted into a launch velocity).  Joint
geometry, spring anchors and inertias are not published; the values below
are a 10 cm-scale layout chosen so that the simulated trends match the
reported ones (see tools/calibrate_reference.py).
"""
from __future__ import annotations

import math

from .flight import launch_velocity_for
from .model import BodyLayout, JointDesign, LaunchState, MassProperties, Scenario, SimSettings

LEG_MASS = 0.03346
BODY_MASS = 0.1188
OMEGA_LEG_TAKEOFF = 29.99
OMEGA_BODY_TAKEOFF = -0.02
RIGID_OMEGA = -3.46
RIGID_APEX = 0.4968
RIGID_DISTANCE = 1.46

REFERENCE_LAYOUT = BodyLayout(
    com_A=(-0.005, -0.050),
    com_B=(0.020, 0.015),
    inertia_A_com=4.208e-5,
    inertia_B_com=2.5e-5,
    anchor_C=(0.010, -0.015),
    anchor_D=(0.005, 0.015),
)
JOINT_X = 0.0298
JOINT_Y = 0.0040
NATURAL_LENGTH = 0.0304
STIFFNESS = 1338.0
PHI_OPEN = math.radians(77.5)

# annotations only: these depend on the unpublished original geometry
REPORTED_VALUES = {
    "omega_end_epj": -0.37,
    "omega_end_rigid": -3.46,
    "apex_epj_m": 0.4929,
    "apex_rigid_m": 0.4968,
    "distance_epj_m": 1.50,
    "distance_rigid_m": 1.46,
    "zero_crossing_k_n_per_m": 1566.0,
    "zero_crossing_x_mm": 30.35,
    "zero_crossing_y_mm": 3.7,
}


def default_reference_scenario() -> Scenario:
    settings = SimSettings()
    derived = REFERENCE_LAYOUT.at_joint(JOINT_X, JOINT_Y, LEG_MASS, BODY_MASS)
    vx, vy = launch_velocity_for(RIGID_APEX, RIGID_DISTANCE, settings.gravity_g)
    return Scenario(
        epj_enabled=True,
        mass_properties=MassProperties(LEG_MASS, BODY_MASS, derived["inertia_A"], derived["inertia_B"]),
        joint_design=JointDesign(
            joint_x=JOINT_X,
            joint_y=JOINT_Y,
            l_OC=derived["l_OC"],
            l_OD=derived["l_OD"],
            natural_length_L0=NATURAL_LENGTH,
            stiffness_k=STIFFNESS,
            latch_angle_phi0=derived["latch_angle_phi0"],
        ),
        launch=LaunchState(
            t0=0.0,
            com_position=(0.0, 0.0),
            com_velocity=(vx, vy),
            theta_A0=0.0,
            theta_B0=0.0,
            omega_A0=OMEGA_LEG_TAKEOFF,
            omega_B0=OMEGA_BODY_TAKEOFF,
            phi0_open=PHI_OPEN,
        ),
        settings=settings,
        rigid_omega=RIGID_OMEGA,
        layout=REFERENCE_LAYOUT,
    )
