"""Ring geometry, drive parameters and the staggered detuning field.

Units: energies and angular frequencies in rad/us (hbar = 1), lengths in um,
times in us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

TWO_PI = 2.0 * math.pi

# Rb-87 70S value commonly used for analog Rydberg devices; gives R_b = 9.76 um
# at Omega/2pi = 1 MHz.
DEFAULT_C6 = TWO_PI * 862690.0


class ParameterError(ValueError):
    """Invalid model parameters or geometry."""


class Layout(str, Enum):
    RING_CHORD = "ring-chord"
    MODULAR_1D = "modular-1d"


@dataclass(frozen=True)
class ChainSpec:
    n_s: int
    a: float
    layout: Layout = Layout.RING_CHORD

    def __post_init__(self):
        if self.n_s < 4 or self.n_s % 2:
            raise ParameterError(f"n_s must be even and >= 4, got {self.n_s}")
        if not self.a > 0:
            raise ParameterError(f"spacing a must be positive, got {self.a}")
        object.__setattr__(self, "layout", Layout(self.layout))

    @property
    def radius(self) -> float:
        return self.a / (2.0 * math.sin(math.pi / self.n_s))

    def separation(self, j: int, k: int) -> int:
        """Ring separation between 1-based sites j and k."""
        for s in (j, k):
            if not 1 <= s <= self.n_s:
                raise ParameterError(f"site index {s} outside 1..{self.n_s}")
        d = abs(j - k)
        return min(d, self.n_s - d)


@dataclass(frozen=True)
class DriveParams:
    omega: float
    delta_glob: float
    delta_loc: float
    c6: float = DEFAULT_C6

    def __post_init__(self):
        if not self.omega > 0:
            raise ParameterError(f"omega must be positive, got {self.omega}")
        if not self.c6 > 0:
            raise ParameterError(f"C6 must be positive, got {self.c6}")

    @property
    def alpha(self) -> float:
        return self.delta_glob / self.omega

    @property
    def beta(self) -> float:
        return self.delta_loc / self.delta_glob

    @property
    def blockade_radius(self) -> float:
        return (self.c6 / self.omega) ** (1.0 / 6.0)

    def with_beta(self, beta: float) -> "DriveParams":
        return DriveParams(self.omega, self.delta_glob, beta * self.delta_glob, self.c6)

    def with_delta_loc(self, delta_loc: float) -> "DriveParams":
        return DriveParams(self.omega, self.delta_glob, delta_loc, self.c6)


def pair_distance(spec: ChainSpec, j: int, k: int) -> float:
    d = spec.separation(j, k)
    if spec.layout is Layout.MODULAR_1D:
        return d * spec.a
    return 2.0 * spec.radius * math.sin(math.pi * d / spec.n_s)


def interaction(params: DriveParams, r: float) -> float:
    if not r > 0:
        raise ParameterError(f"pair distance must be positive, got {r}")
    return params.c6 / r**6


def neighbor_interaction(spec: ChainSpec, params: DriveParams, d: int) -> float:
    """V_d for sites d apart along the ring (V_1, V_2, ...)."""
    return interaction(params, pair_distance(spec, 1, 1 + d))


def local_detuning(j: int, params: DriveParams) -> float:
    """Staggered field (-1)^j * Delta_loc; odd sites get -Delta_loc."""
    return params.delta_loc if j % 2 == 0 else -params.delta_loc


def site_detuning(j: int, params: DriveParams) -> float:
    return params.delta_glob + local_detuning(j, params)


def params_from_dimensionless(
    n_s: int,
    rb_over_a: float,
    alpha: float,
    beta: float,
    omega: float = TWO_PI,
    layout: Layout | str = Layout.RING_CHORD,
    blockade_radius: float | None = None,
) -> tuple[ChainSpec, DriveParams]:
    """Build geometry and drive from (R_b/a, alpha, beta, Omega).

    The blockade radius defaults to the one implied by DEFAULT_C6 at the
    given Omega; passing ``blockade_radius`` pins R_b and derives C6 from it.
    """
    if not omega > 0 or not rb_over_a > 0 or not alpha > 0:
        raise ParameterError("omega, rb_over_a and alpha must be positive")
    if blockade_radius is None:
        blockade_radius = (DEFAULT_C6 / omega) ** (1.0 / 6.0)
    elif not blockade_radius > 0:
        raise ParameterError("blockade_radius must be positive")
    c6 = omega * blockade_radius**6
    delta_glob = alpha * omega
    spec = ChainSpec(n_s, blockade_radius / rb_over_a, Layout(layout))
    return spec, DriveParams(omega, delta_glob, beta * delta_glob, c6)
