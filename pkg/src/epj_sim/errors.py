"""Exception hierarchy shared by the simulator modules."""


class EPJError(Exception):
    """Base class for all simulator errors."""


class ConfigError(EPJError, ValueError):
    """A configuration document is malformed or violates a model invariant."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(EPJError, ValueError):
    pass


class SingularityError(EPJError, ArithmeticError):
    pass


class InfeasibleLaunchError(EPJError, ValueError):
    pass


class SimulationError(EPJError, RuntimeError):
    pass


class LatchStateError(SimulationError):
    pass


class NumericalError(SimulationError):
    def __init__(self, field, value, t):
        self.field = field
        super().__init__(f"non-finite {field} = {value!r} at t = {t:.9g} s")


class LatchNeverClosedError(SimulationError):
    """The open joint did not return to the latch angle."""

    def __init__(self, reason, t, min_phi):
        self.t = t
        self.min_phi = min_phi
        super().__init__(
            f"latch never closed ({reason}) at t = {t:.9g} s; "
            f"min phi reached = {min_phi:.9g} rad"
        )


class BracketError(EPJError, ValueError):
    def __init__(self, lo, hi, f_lo, f_hi):
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi
        super().__init__(
            f"no sign change on [{lo:.9g}, {hi:.9g}]: "
            f"omega_end = {f_lo:.9g} and {f_hi:.9g} rad/s"
        )


class SweepError(EPJError, RuntimeError):
    pass
