"""Domain types and scenario configuration.

Configuration files are INI documents (``configparser``).  At the boundary,
lengths are millimetres, masses grams and angles degrees; every such key also
accepts an SI spelling (``x_m``, ``leg_kg``, ``phi0_rad``) so that any
scenario can be written back out without rounding.  Internally everything
is SI.
"""
from __future__ import annotations

import configparser
import enum
import io
import math
from decimal import Decimal
from dataclasses import dataclass, field, fields
from typing import Optional, Tuple

from .errors import ConfigError

Vec2 = Tuple[float, float]


class LatchMode(enum.Enum):
    LOCKED = "Locked"
    OPEN = "Open"
    RELOCKED = "Relocked"

    def advance(self, target: "LatchMode") -> "LatchMode":
        """Return ``target`` if the transition is legal, raise otherwise."""
        allowed = {LatchMode.LOCKED: LatchMode.OPEN, LatchMode.OPEN: LatchMode.RELOCKED}
        if allowed.get(self) is not target:
            raise ValueError(f"illegal latch transition {self.value} -> {target.value}")
        return target


def _positive(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{type(obj).__name__}.{name}", f"must be > 0, got {value!r}")


def _nonnegative(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (math.isfinite(value) and value >= 0):
            raise ConfigError(f"{type(obj).__name__}.{name}", f"must be >= 0, got {value!r}")


@dataclass(frozen=True)
class MassProperties:
    mass_A: float  # leg + rear frame, kg
    mass_B: float  # body, kg
    inertia_A: float  # about axis O, kg m^2
    inertia_B: float

    def __post_init__(self):
        _positive(self, "mass_A", "mass_B", "inertia_A", "inertia_B")

    @property
    def total_mass(self) -> float:
        return self.mass_A + self.mass_B

    @property
    def total_inertia(self) -> float:
        return self.inertia_A + self.inertia_B


@dataclass(frozen=True)
class JointDesign:
    joint_x: float  # m, from the rear end of the body
    joint_y: float  # m, from the lowest point of the body
    l_OC: float
    l_OD: float
    natural_length_L0: float
    stiffness_k: float
    latch_angle_phi0: float
    tension_only: bool = False

    def __post_init__(self):
        _positive(self, "l_OC", "l_OD")
        _nonnegative(self, "stiffness_k", "natural_length_L0")
        for name in ("joint_x", "joint_y"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"JointDesign.{name}", "must be finite")
        if not 0 < self.latch_angle_phi0 < math.pi:
            raise ConfigError(
                "JointDesign.latch_angle_phi0",
                f"must lie in (0, pi), got {self.latch_angle_phi0!r}",
            )


@dataclass(frozen=True)
class BodyLayout:
    """Body-frame positions (m) of the segment CoMs and spring anchors.

    Coordinates share the origin of ``JointDesign.joint_x/joint_y`` and are
    taken in the latched configuration.  Anchor C rides on mechanism A,
    anchor D on the body.
    """

    com_A: Vec2
    com_B: Vec2
    inertia_A_com: float
    inertia_B_com: float
    anchor_C: Vec2
    anchor_D: Vec2

    def __post_init__(self):
        _positive(self, "inertia_A_com", "inertia_B_com")
        for name in ("com_A", "com_B", "anchor_C", "anchor_D"):
            if len(getattr(self, name)) != 2 or not all(map(math.isfinite, getattr(self, name))):
                raise ConfigError(f"BodyLayout.{name}", "must be a finite (x, y) pair")
        if self.anchor_C == self.anchor_D:
            raise ConfigError("BodyLayout.anchor_D", "coincides with anchor_C")

    def at_joint(self, x: float, y: float, mass_A: float, mass_B: float) -> dict:
        """Arm lengths, latch angle and inertias about a joint placed at (x, y)."""
        cx, cy = self.anchor_C[0] - x, self.anchor_C[1] - y
        dx, dy = self.anchor_D[0] - x, self.anchor_D[1] - y
        l_oc, l_od = math.hypot(cx, cy), math.hypot(dx, dy)
        if l_oc == 0 or l_od == 0:
            raise ConfigError("JointDesign.joint_x", "joint coincides with a spring anchor")
        phi0 = abs(math.atan2(cx * dy - cy * dx, cx * dx + cy * dy))
        ja = self.inertia_A_com + mass_A * ((self.com_A[0] - x) ** 2 + (self.com_A[1] - y) ** 2)
        jb = self.inertia_B_com + mass_B * ((self.com_B[0] - x) ** 2 + (self.com_B[1] - y) ** 2)
        return {"l_OC": l_oc, "l_OD": l_od, "latch_angle_phi0": phi0, "inertia_A": ja, "inertia_B": jb}

    def com(self, mass_A: float, mass_B: float) -> Vec2:
        m = mass_A + mass_B
        return (
            (mass_A * self.com_A[0] + mass_B * self.com_B[0]) / m,
            (mass_A * self.com_A[1] + mass_B * self.com_B[1]) / m,
        )


@dataclass(frozen=True)
class LaunchState:
    """Take-off conditions, world frame: x forward, y up, angles CCW positive.

    Negative angular velocity is a forward (nose-down) flip.
    """

    t0: float
    com_position: Vec2
    com_velocity: Vec2
    theta_A0: float
    theta_B0: float
    omega_A0: float
    omega_B0: float
    phi0_open: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            values = value if isinstance(value, tuple) else (value,)
            if not all(math.isfinite(v) for v in values):
                raise ConfigError(f"LaunchState.{f.name}", "must be finite")
        if self.com_velocity[1] <= 0:
            raise ConfigError("LaunchState.com_velocity", "vertical component must be > 0")
        if not 0 < self.phi0_open <= math.pi:
            raise ConfigError("LaunchState.phi0_open", "must lie in (0, pi]")


@dataclass(frozen=True)
class SimSettings:
    dt: float = 1e-5
    t_max: float = 2.0
    event_tol: float = 1e-9
    gravity_g: float = 9.81
    omega_zero_tol: float = 1e-4

    def __post_init__(self):
        _positive(self, "dt", "t_max", "event_tol", "gravity_g", "omega_zero_tol")


@dataclass(frozen=True)
class Scenario:
    epj_enabled: bool
    mass_properties: MassProperties
    joint_design: JointDesign
    launch: LaunchState
    settings: SimSettings = field(default_factory=SimSettings)
    rigid_omega: float = 0.0
    layout: Optional[BodyLayout] = None

    def __post_init__(self):
        if not math.isfinite(self.rigid_omega):
            raise ConfigError("Scenario.rigid_omega", "must be finite")
        if self.layout is not None:
            m, j = self.mass_properties, self.joint_design
            derived = self.layout.at_joint(j.joint_x, j.joint_y, m.mass_A, m.mass_B)
            for owner, obj, name in (("MassProperties", m, "inertia_A"), ("MassProperties", m, "inertia_B"),
                                     ("JointDesign", j, "l_OC"), ("JointDesign", j, "l_OD"),
                                     ("JointDesign", j, "latch_angle_phi0")):
                _agree(f"{owner}.{name}", getattr(obj, name), derived[name])
        if self.epj_enabled and not self.launch.phi0_open > self.joint_design.latch_angle_phi0:
            raise ConfigError(
                "LaunchState.phi0_open",
                "joint must be open at take-off (phi0_open > latch_angle_phi0)",
            )


# --------------------------------------------------------------------------
# config ingestion

def _milli_to_si(text):
    # decimal shift of the written digits, so "33.46" g gives exactly 0.03346
    return float(Decimal(text).scaleb(-3))


def _si_to_milli(value):
    return format(Decimal(repr(float(value))).scaleb(3).normalize(), "f")


def _deg_to_rad(text):
    return math.radians(float(text))


def _rad_to_deg(value):
    return repr(math.degrees(value))


def _plain(value):
    return repr(float(value))


# (suffix, text -> SI float, SI float -> text); the first entry is the preferred spelling
_MM = (("_mm", _milli_to_si, _si_to_milli), ("_m", float, _plain))
_G = (("_g", _milli_to_si, _si_to_milli), ("_kg", float, _plain))
_DEG = (("_deg", _deg_to_rad, _rad_to_deg), ("_rad", float, _plain))
_PLAIN = (("", float, _plain),)

_SIM_KEYS = {"dt": "dt", "t_max": "t_max", "event_tol": "event_tol",
             "g": "gravity_g", "omega_zero_tol": "omega_zero_tol"}


class _Reader:
    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    def has(self, section, base, units=_PLAIN):
        return self.parser.has_section(section) and any(
            self.parser.has_option(section, base + suffix) for suffix, _, _ in units
        )

    def get(self, section, base, units=_PLAIN, default=None):
        found = []
        if self.parser.has_section(section):
            found = [(s, conv) for s, conv, _ in units if self.parser.has_option(section, base + s)]
        if len(found) > 1:
            keys = ", ".join(base + s for s, _ in found)
            raise ConfigError(f"[{section}] {base}", f"given more than once ({keys})")
        if not found:
            if default is not None:
                return default
            raise ConfigError(f"[{section}] {base}{units[0][0]}", "missing required key")
        suffix, conv = found[0]
        raw = self.parser.get(section, base + suffix).strip()
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {base}{suffix}", f"not a number: {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"[{section}] {base}{suffix}", "must be finite")
        return conv(raw)

    def flag(self, section, key, default):
        if not self.parser.has_option(section, key):
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise ConfigError(f"[{section}] {key}", "not a boolean") from None


def _agree(name, given, derived):
    if given is not None and abs(given - derived) > 1e-9 * max(abs(derived), 1e-12):
        raise ConfigError(name, f"{given!r} disagrees with [layout]-derived {derived!r}")


def load_scenario(config_text: str) -> Scenario:
    """Parse an INI scenario document into a validated :class:`Scenario`."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(config_text)
    except configparser.Error as exc:
        raise ConfigError("<document>", str(exc).splitlines()[0]) from None
    r = _Reader(parser)

    epj = r.flag("scenario", "epj", True)
    mass_a = r.get("masses", "leg", _G)
    mass_b = r.get("masses", "body", _G)
    if r.has("masses", "total", _G):
        total = r.get("masses", "total", _G)
        if abs(mass_a + mass_b - total) > 1e-9:
            raise ConfigError("[masses] total_g", f"leg + body = {mass_a + mass_b!r} kg, not {total!r}")
    for name, value in (("[masses] leg_g", mass_a), ("[masses] body_g", mass_b)):
        if value <= 0:
            raise ConfigError(name, "must be > 0")

    joint_x = r.get("joint", "x", _MM)
    joint_y = r.get("joint", "y", _MM)

    layout = None
    if parser.has_section("layout"):
        layout = BodyLayout(
            com_A=(r.get("layout", "com_a_x", _MM), r.get("layout", "com_a_y", _MM)),
            com_B=(r.get("layout", "com_b_x", _MM), r.get("layout", "com_b_y", _MM)),
            inertia_A_com=r.get("layout", "inertia_a_com_kg_m2"),
            inertia_B_com=r.get("layout", "inertia_b_com_kg_m2"),
            anchor_C=(r.get("layout", "anchor_c_x", _MM), r.get("layout", "anchor_c_y", _MM)),
            anchor_D=(r.get("layout", "anchor_d_x", _MM), r.get("layout", "anchor_d_y", _MM)),
        )
        derived = layout.at_joint(joint_x, joint_y, mass_a, mass_b)
    else:
        derived = None

    def derivable(section, base, units, key, label):
        if derived is None:
            return r.get(section, base, units)
        given = r.get(section, base, units, default=math.nan) if r.has(section, base, units) else None
        _agree(label, given, derived[key])
        return derived[key] if given is None else given

    inertia_a = derivable("masses", "inertia_a_kg_m2", _PLAIN, "inertia_A", "[masses] inertia_a_kg_m2")
    inertia_b = derivable("masses", "inertia_b_kg_m2", _PLAIN, "inertia_B", "[masses] inertia_b_kg_m2")
    l_oc = derivable("joint", "l_oc", _MM, "l_OC", "[joint] l_oc_mm")
    l_od = derivable("joint", "l_od", _MM, "l_OD", "[joint] l_od_mm")
    phi0 = derivable("joint", "phi0", _DEG, "latch_angle_phi0", "[joint] phi0_deg")

    masses = MassProperties(mass_a, mass_b, inertia_a, inertia_b)
    joint = JointDesign(
        joint_x=joint_x,
        joint_y=joint_y,
        l_OC=l_oc,
        l_OD=l_od,
        natural_length_L0=r.get("joint", "l0", _MM),
        stiffness_k=r.get("joint", "k_n_per_m"),
        latch_angle_phi0=phi0,
        tension_only=r.flag("joint", "tension_only", False),
    )
    launch = LaunchState(
        t0=r.get("launch", "t0_s", default=0.0),
        com_position=(r.get("launch", "x", _MM, default=0.0), r.get("launch", "y", _MM, default=0.0)),
        com_velocity=(r.get("launch", "vx_m_s"), r.get("launch", "vy_m_s")),
        theta_A0=r.get("launch", "theta_a", _DEG, default=0.0),
        theta_B0=r.get("launch", "theta_b", _DEG, default=0.0),
        omega_A0=r.get("launch", "omega_a"),
        omega_B0=r.get("launch", "omega_b"),
        phi0_open=r.get("joint", "phi_open", _DEG),
    )
    defaults = SimSettings()
    settings = SimSettings(**{
        attr: r.get("sim", key, default=getattr(defaults, attr)) for key, attr in _SIM_KEYS.items()
    })
    return Scenario(
        epj_enabled=epj,
        mass_properties=masses,
        joint_design=joint,
        launch=launch,
        settings=settings,
        rigid_omega=r.get("launch", "rigid_omega"),
        layout=layout,
    )


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def _encode(base, value, units):
    """Pick the mm/g/deg key when it round-trips exactly, else the SI key."""
    suffix, to_si, from_si = units[0]
    candidate = from_si(value)
    if to_si(candidate) == value:
        return base + suffix, candidate
    return base + units[-1][0], repr(float(value))


def dump_scenario(scenario: Scenario) -> str:
    """Serialise ``scenario``; ``load_scenario`` reproduces it bit-for-bit."""
    m, j, ln, s = scenario.mass_properties, scenario.joint_design, scenario.launch, scenario.settings
    doc = {
        "scenario": [("epj", "true" if scenario.epj_enabled else "false")],
        "masses": [
            _encode("leg", m.mass_A, _G),
            _encode("body", m.mass_B, _G),
            ("inertia_a_kg_m2", repr(m.inertia_A)),
            ("inertia_b_kg_m2", repr(m.inertia_B)),
        ],
        "joint": [
            _encode("x", j.joint_x, _MM),
            _encode("y", j.joint_y, _MM),
            _encode("l_oc", j.l_OC, _MM),
            _encode("l_od", j.l_OD, _MM),
            _encode("l0", j.natural_length_L0, _MM),
            ("k_n_per_m", repr(j.stiffness_k)),
            _encode("phi0", j.latch_angle_phi0, _DEG),
            _encode("phi_open", ln.phi0_open, _DEG),
            ("tension_only", "true" if j.tension_only else "false"),
        ],
        "launch": [
            ("t0_s", repr(ln.t0)),
            _encode("x", ln.com_position[0], _MM),
            _encode("y", ln.com_position[1], _MM),
            ("vx_m_s", repr(ln.com_velocity[0])),
            ("vy_m_s", repr(ln.com_velocity[1])),
            _encode("theta_a", ln.theta_A0, _DEG),
            _encode("theta_b", ln.theta_B0, _DEG),
            ("omega_a", repr(ln.omega_A0)),
            ("omega_b", repr(ln.omega_B0)),
            ("rigid_omega", repr(scenario.rigid_omega)),
        ],
        "sim": [(key, repr(getattr(s, attr))) for key, attr in _SIM_KEYS.items()],
    }
    lay = scenario.layout
    if lay is not None:
        doc["layout"] = [
            _encode("com_a_x", lay.com_A[0], _MM),
            _encode("com_a_y", lay.com_A[1], _MM),
            _encode("com_b_x", lay.com_B[0], _MM),
            _encode("com_b_y", lay.com_B[1], _MM),
            ("inertia_a_com_kg_m2", repr(lay.inertia_A_com)),
            ("inertia_b_com_kg_m2", repr(lay.inertia_B_com)),
            _encode("anchor_c_x", lay.anchor_C[0], _MM),
            _encode("anchor_c_y", lay.anchor_C[1], _MM),
            _encode("anchor_d_x", lay.anchor_D[0], _MM),
            _encode("anchor_d_y", lay.anchor_D[1], _MM),
        ]
    out = io.StringIO()
    for section, items in doc.items():
        out.write(f"[{section}]\n")
        for key, value in items:
            out.write(f"{key} = {value}\n")
        out.write("\n")
    return out.getvalue()
