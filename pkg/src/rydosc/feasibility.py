"""Hardware accessibility arithmetic: Rabi rescaling, footprint and capacity."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

TWO_PI = 2.0 * math.pi
DEFAULT_T_PREP = 2.0


class ScheduleError(ValueError):
    """Preparation does not fit inside the device time limit."""


@dataclass(frozen=True)
class HardwareConstraints:
    t_max: float = 4.0
    a_min: float = 4.0
    field_of_view: tuple[float, float] = (75.0, 76.0)
    omega_range: tuple[float, float] = (0.0, 15.8)
    delta_glob_range: tuple[float, float] = (-125.0, 125.0)

    def __post_init__(self):
        if self.t_max <= 0 or self.a_min <= 0 or min(self.field_of_view) <= 0:
            raise ValueError("t_max, a_min and the field of view must be positive")
        for lo, hi in (self.omega_range, self.delta_glob_range):
            if lo > hi:
                raise ValueError(f"interval ({lo}, {hi}) is not ordered")


@dataclass(frozen=True)
class Protocol:
    omega: float
    a: float
    blockade_radius: float
    t_prep: float
    t_evolve: float
    delta_glob: float | None = None
    path_sites: int = 16

    @property
    def effective_duration(self) -> float:
        """Omega * t_evolve / 2 pi."""
        return self.omega * self.t_evolve / TWO_PI

    @property
    def footprint(self) -> float:
        """Side of a square-like closed path, d ~ (n_s / 4) a."""
        return self.path_sites / 4 * self.a

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(effective_duration=self.effective_duration, footprint=self.footprint,
                 rb_over_a=self.blockade_radius / self.a)
        return d


def rescale(omega: float, a: float, blockade_radius: float, omega_new: float,
            t_prep: float = DEFAULT_T_PREP, t_max: float = 4.0,
            delta_glob: float | None = None, path_sites: int = 16) -> Protocol:
    """Raise the Rabi frequency to ``omega_new``.

    R_b shrinks by f = (omega_new / omega)^(1/6) and the spacing is taken
    as f * a, which gives 8.93 um at 20 MHz; note this moves R_b / a by 1/f^2
    (see ``Protocol.to_dict()['rb_over_a']``).  Detunings scale linearly.
    """
    if omega_new <= 0 or omega <= 0:
        raise ValueError("Rabi frequencies must be positive")
    if t_prep >= t_max:
        raise ScheduleError(f"t_prep={t_prep} leaves no evolution time before t_max={t_max}")
    factor = (omega_new / omega) ** (1.0 / 6.0)
    dg = None if delta_glob is None else delta_glob * omega_new / omega
    return Protocol(omega_new, a * factor, blockade_radius / factor, t_prep, t_max - t_prep,
                    dg, path_sites)


def capacity(constraints: HardwareConstraints, a: float) -> tuple[int, int, int]:
    """(n_x, n_y, n_chain) for a rectangular closed path of spacing ``a``."""
    if a <= 0:
        raise ValueError("spacing must be positive")
    fx, fy = constraints.field_of_view
    nx, ny = math.floor(fx / a), math.floor(fy / a)
    if nx == 0 or ny == 0:
        return 0, 0, 0
    return nx, ny, 2 * nx + 2 * ny


@dataclass(frozen=True)
class Violation:
    quantity: str
    value: float
    bound: tuple[float, float]

    @property
    def margin(self) -> float:
        """Distance outside the bound (positive means violated by that much)."""
        lo, hi = self.bound
        return max(lo - self.value, self.value - hi)


def validate(protocol: Protocol, constraints: HardwareConstraints) -> list[Violation]:
    out = []
    checks = [
        ("omega", protocol.omega, constraints.omega_range),
        ("a", protocol.a, (constraints.a_min, math.inf)),
        ("t_total", protocol.t_prep + protocol.t_evolve, (0.0, constraints.t_max)),
        ("footprint_x", protocol.footprint, (0.0, constraints.field_of_view[0])),
        ("footprint_y", protocol.footprint, (0.0, constraints.field_of_view[1])),
    ]
    if protocol.delta_glob is not None:
        checks.append(("delta_glob", protocol.delta_glob, constraints.delta_glob_range))
    for name, value, (lo, hi) in checks:
        if not lo - 1e-12 <= value <= hi + 1e-12:
            out.append(Violation(name, value, (lo, hi)))
    return out
