"""Independent reference computations and small scenario builders for the tests.

Nothing here calls the integrator.  The open-joint motion is a conservative
one-degree-of-freedom system in phi, so its end state follows from two
first integrals:

    P = J_A w_A - J_B w_B                     (the shared torque cancels)
    E = 0.5 * mu * u**2 + V(phi) + P**2 / (2 J),   u = w_A + w_B,  mu = J_A J_B / J
"""
from __future__ import annotations

import math

from epj_sim.model import JointDesign, LaunchState, MassProperties, Scenario, SimSettings


def law_of_cosines(a, b, phi):
    return math.sqrt(a * a + b * b - 2.0 * a * b * math.cos(phi))


def spring_potential(k, l_oc, l_od, L0, phi):
    return 0.5 * k * (law_of_cosines(l_oc, l_od, phi) - L0) ** 2


def open_phase_omega_end(ja, jb, wa0, wb0, k, l_oc, l_od, L0, phi_open, phi0):
    """omega_end after the joint swings from phi_open back to phi0.

    Rates are in joint coordinates (positive closes the joint).  At the
    closing crossing u = w_A + w_B is positive.
    """
    J = ja + jb
    mu = ja * jb / J
    P = ja * wa0 - jb * wb0
    u0 = wa0 + wb0
    dV = spring_potential(k, l_oc, l_od, L0, phi_open) - spring_potential(k, l_oc, l_od, L0, phi0)
    u_end = math.sqrt(u0 * u0 + 2.0 * dV / mu)
    return P * (ja - jb) / (J * J) + 2.0 * mu * u_end / J


def momentum_mean(ja, jb, wa, wb):
    return (ja * wa + jb * wb) / (ja + jb)


# geometry used by the hand-worked spring examples
TOY_L_OC = 0.03
TOY_L_OD = 0.04
TOY_L0 = 0.03
TOY_K = 1566.0


def toy_scenario(k=TOY_K, L0=TOY_L0, phi0=1.0, phi_open=1.3, omega_a=5.0, omega_b=0.0,
                 ja=2e-4, jb=8e-4, epj=True, t_max=2.0, dt=1e-5, tension_only=False,
                 velocity=(2.0, 3.0), rigid_omega=-3.46):
    """Small scenario on the hand-worked geometry; omegas are world-frame."""
    return Scenario(
        epj_enabled=epj,
        mass_properties=MassProperties(0.03346, 0.1188, ja, jb),
        joint_design=JointDesign(0.03, 0.004, TOY_L_OC, TOY_L_OD, L0, k, phi0, tension_only),
        launch=LaunchState(0.0, (0.0, 0.0), velocity, 0.0, 0.0, omega_a, omega_b, phi_open),
        settings=SimSettings(dt=dt, t_max=t_max),
        rigid_omega=rigid_omega,
    )
