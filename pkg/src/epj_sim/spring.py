"""Spring geometry and joint torque for the elastic passive joint.

The spring runs from anchor C (on mechanism A) to anchor D (on the body);
the joint angle ``phi`` is the angle COD at the revolute joint O.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, SingularityError
from .model import JointDesign


@dataclass(frozen=True)
class SpringGeometry:
    l_OC: float
    l_OD: float
    natural_length_L0: float
    stiffness_k: float
    tension_only: bool = False

    def __post_init__(self):
        if not (self.l_OC > 0 and self.l_OD > 0):
            raise ValueError("spring arms l_OC and l_OD must be positive")
        if self.stiffness_k < 0 or self.natural_length_L0 < 0:
            raise ValueError("stiffness and natural length must be non-negative")

    @classmethod
    def from_joint(cls, joint: JointDesign) -> "SpringGeometry":
        return cls(joint.l_OC, joint.l_OD, joint.natural_length_L0, joint.stiffness_k,
                   joint.tension_only)


@dataclass(frozen=True)
class JointLoad:
    length_L: float
    elongation: float
    force_F: float
    torque_M: float
    sin_phi1: float


def _check(phi):
    if not 0.0 <= phi <= math.pi:
        raise DomainError(f"joint angle {phi!r} rad outside [0, pi]")


def _length(l_oc, l_od, phi):
    # law of cosines rewritten with 1 - cos(phi) = 2 sin^2(phi / 2): no cancellation near phi = 0
    d, h = l_oc - l_od, math.sin(0.5 * phi)
    return math.sqrt(d * d + 4.0 * l_oc * l_od * h * h)


def _force(geometry, length):
    force = geometry.stiffness_k * (length - geometry.natural_length_L0)
    if geometry.tension_only and force < 0.0:
        return 0.0
    return force


def _torque(geometry, phi):
    """Torque magnitude without the domain check; used inside the integrator."""
    length = _length(geometry.l_OC, geometry.l_OD, phi)
    if length == 0.0:
        raise SingularityError("spring length is zero (l_OC == l_OD at phi = 0)")
    s1 = geometry.l_OD / length * math.sin(phi)
    return _force(geometry, length) * geometry.l_OC * s1


def _energy(geometry, phi):
    length = _length(geometry.l_OC, geometry.l_OD, phi)
    stretch = length - geometry.natural_length_L0
    if geometry.tension_only and stretch < 0.0:
        return 0.0
    return 0.5 * geometry.stiffness_k * stretch * stretch


def spring_length(geometry: SpringGeometry, phi: float) -> float:
    """Law-of-cosines length of CD for joint angle ``phi``."""
    _check(phi)
    return _length(geometry.l_OC, geometry.l_OD, phi)


def spring_force(geometry: SpringGeometry, phi: float) -> float:
    """Linear spring force k (L - L0); negative means compression.

    With ``tension_only`` the force is clamped at zero instead.
    """
    return _force(geometry, spring_length(geometry, phi))


def sin_phi1(geometry: SpringGeometry, phi: float) -> float:
    """Sine of the angle between arm OC and the spring line, by the law of sines."""
    length = spring_length(geometry, phi)
    if length == 0.0:
        raise SingularityError("spring length is zero (l_OC == l_OD at phi = 0)")
    return geometry.l_OD / length * math.sin(phi)


def joint_torque(geometry: SpringGeometry, phi: float) -> float:
    """Moment of the spring force about O, k l_OC (L - L0) sin(phi1).

    The same magnitude acts on both mechanisms; the dynamics assign signs.
    """
    _check(phi)
    return _torque(geometry, phi)


def joint_load(geometry: SpringGeometry, phi: float) -> JointLoad:
    length = spring_length(geometry, phi)
    if length == 0.0:
        raise SingularityError("spring length is zero (l_OC == l_OD at phi = 0)")
    s1 = geometry.l_OD / length * math.sin(phi)
    force = _force(geometry, length)
    return JointLoad(length, length - geometry.natural_length_L0, force,
                     force * geometry.l_OC * s1, s1)


def spring_energy(geometry: SpringGeometry, phi: float) -> float:
    """Elastic potential energy 0.5 k (L - L0)^2 (zero in compression if tension-only)."""
    _check(phi)
    return _energy(geometry, phi)
