"""Run configuration: an INI-style ``[run]`` section of key = value pairs."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .hamiltonian import Thresholds
from .hilbert import BasisMode
from .model import TWO_PI, ChainSpec, DriveParams, Layout, params_from_dimensionless


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    # model
    n_s: int = 16
    rb_over_a: float = 1.8
    alpha: float = 4.0
    beta: float = 0.01
    beta_prep: float = -1e-3
    omega_mhz: float = 1.0
    layout: str = Layout.RING_CHORD.value
    blockade_radius_um: float = 0.0  # 0 -> implied by the default C6
    basis: str = BasisMode.BLOCKADE.value
    # evolution, in units of the Rabi period 2 pi / Omega
    dt_periods: float = 0.005
    t_stops: tuple[float, ...] = (4.0, 40.0, 400.0)
    krylov_dim: int = 30
    krylov_tol: float = 1e-10
    # spectrum
    pad_factor: int = 8
    min_prominence_frac: float = 1e-3
    min_separation_bins: float = 3.0
    leakage_factor: float = 1.5
    match_tol_bins: float = 2.0
    # classification
    energy_window: float = 500.0
    zero_meson_rho_max: float = 1.0
    one_meson_rho_lo: float = 1.5
    one_meson_rho_hi: float = 2.5
    # sweep / models
    sweep_betas: tuple[float, ...] = (0.02, 0.06, 0.10, -0.02, -0.06, -0.10)
    spacing_rtol: float = 0.2
    out_dir: str = "out"
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        try:
            Layout(self.layout)
            BasisMode(self.basis)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.n_s < 4 or self.n_s % 2:
            raise ConfigError(f"n_s must be even and >= 4, got {self.n_s}")
        for name in ("rb_over_a", "alpha", "omega_mhz", "dt_periods", "krylov_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.t_stops or min(self.t_stops) <= 0:
            raise ConfigError("t_stops must be a nonempty list of positive values")
        if self.pad_factor < 1:
            raise ConfigError("pad_factor must be >= 1")

    # derived quantities
    @property
    def omega(self) -> float:
        return TWO_PI * self.omega_mhz

    @property
    def period(self) -> float:
        return TWO_PI / self.omega

    @property
    def dt(self) -> float:
        return self.dt_periods * self.period

    @property
    def t_stop_max(self) -> float:
        return max(self.t_stops) * self.period

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(self.energy_window, self.zero_meson_rho_max,
                          (self.one_meson_rho_lo, self.one_meson_rho_hi))

    def model(self, beta: float | None = None) -> tuple[ChainSpec, DriveParams]:
        return params_from_dimensionless(
            self.n_s, self.rb_over_a, self.alpha, self.beta if beta is None else beta,
            omega=self.omega, layout=self.layout,
            blockade_radius=self.blockade_radius_um or None,
        )

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    # text representation
    def to_text(self) -> str:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser["run"] = {f.name: _format(getattr(self, f.name)) for f in fields(self)
                         if f.name != "extra"}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def digest(self) -> str:
        """sha256 of the physics settings (output directory excluded)."""
        return hashlib.sha256(self.replace(out_dir="").to_text().encode()).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        if "run" not in parser:
            raise ConfigError("config needs a [run] section")
        known = {f.name: f for f in fields(cls) if f.name != "extra"}
        kwargs = {}
        for key, raw in parser["run"].items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _parse(known[key], raw)
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def _format(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(f: dataclasses.Field, raw: str):
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    try:
        if kind.startswith("tuple"):
            return _floats(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            return value
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {f.name}: {raw!r}") from exc
