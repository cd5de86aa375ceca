"""Fourier magnitude of the magnetization, peak detection and line matching."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks

from .evolve import TimeSeries


class GridError(ValueError):
    """Time samples are not on a uniform grid."""


def transform(series: TimeSeries) -> TimeSeries:
    """Attach M_T = M - mean(M)."""
    if len(series.t) == 0:
        raise ValueError("empty time series")
    # shifting by the first sample first keeps a constant series exactly zero
    shifted = series.magnetization - series.magnetization[0]
    return replace(series, m_t=shifted - shifted.mean())


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    magnitude: np.ndarray
    t_stop: float
    dt: float
    pad_factor: int
    drive_omega: float = 2 * np.pi

    @property
    def bin_width(self) -> float:
        """Native resolution 2 pi / T of the unpadded transform, in rad/us."""
        return 2 * np.pi / (self.n_samples * self.dt)

    @property
    def n_samples(self) -> int:
        return int(round(self.t_stop / self.dt)) + 1

    @property
    def omega_over_drive(self) -> np.ndarray:
        return self.omega / self.drive_omega

    def at(self, w: float, half_width: float = 0.0) -> float:
        """Largest magnitude within ``half_width`` of ``|w|``."""
        w = abs(w)
        sel = np.abs(self.omega - w) <= half_width
        if not sel.any():
            return float(self.magnitude[np.argmin(np.abs(self.omega - w))])
        return float(self.magnitude[sel].max())


def fourier_magnitude(series: TimeSeries, pad_factor: int = 8) -> Spectrum:
    """|sum_n M_T(t_n) exp(i w t_n)| dt with a rectangular window.

    The series is zero-padded to ``pad_factor`` times its length; the grid
    runs from 0 to the Nyquist frequency in rad/us.
    """
    if pad_factor < 1:
        raise ValueError("pad_factor must be >= 1")
    if series.m_t is None:
        series = transform(series)
    t = series.t
    if len(t) > 2:
        steps = np.diff(t)
        if np.abs(steps - steps[0]).max() > 1e-9 * steps[0]:
            raise GridError("time grid is not uniform")
    dt = series.dt if len(t) > 1 else 1.0
    n_fft = pad_factor * len(t)
    mag = np.abs(np.fft.rfft(series.m_t, n=n_fft)) * dt
    omega = 2 * np.pi * np.fft.rfftfreq(n_fft, dt)
    return Spectrum(omega, mag, float(t[-1] - t[0]), dt, pad_factor, series.omega)


@dataclass(frozen=True)
class Peak:
    omega: float
    magnitude: float
    prominence: float
    dominant: bool = False


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...]
    bin_width: float

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def dominant(self) -> Peak | None:
        return next((p for p in self.peaks if p.dominant), None)

    @property
    def secondary(self) -> list[Peak]:
        return [p for p in self.peaks if not p.dominant]

    def within(self, lo: float, hi: float) -> list[Peak]:
        return [p for p in self.peaks if lo <= p.omega <= hi]


def leakage_envelope(omega: np.ndarray, peaks: list[tuple[float, float]],
                     bin_width: float, n_samples: int | None = None) -> np.ndarray:
    """Upper bound on rectangular-window sidelobes from ``(omega, height)`` peaks.

    A real tone of height A at w0 leaks at most A / (N |sin(pi x / N)|) at x
    native bins from +w0 or -w0 (the Dirichlet kernel); without ``n_samples``
    the small-x form A / (pi x) is used.
    """
    env = np.zeros_like(omega, dtype=float)
    for w0, a in peaks:
        for centre in (w0, -w0):
            x = np.abs(omega - centre) / bin_width
            d = np.pi * x if n_samples is None else n_samples * np.abs(np.sin(np.pi * x / n_samples))
            env += a * np.minimum(1.0, 1.0 / np.maximum(d, 1e-12))
    return env


def detect_peaks(spectrum: Spectrum, min_prominence_frac: float = 0.02,
                 min_separation_bins: float = 3.0, omega_min: float = 0.0,
                 leakage_factor: float = 1.5) -> PeakSet:
    """Local maxima of the magnitude spectrum.

    Prominence is measured relative to the global maximum; the separation is
    counted in native (unpadded) frequency bins.  Candidates are accepted in
    order of decreasing height, and one is dropped when it does not exceed
    ``leakage_factor`` times the sidelobe envelope of the peaks already
    accepted (set 0 to disable).  Peaks below ``omega_min`` are discarded.
    """
    mag = spectrum.magnitude
    if mag.size == 0 or mag.max() <= 0:
        return PeakSet((), spectrum.bin_width)
    distance = max(1, int(round(min_separation_bins * spectrum.pad_factor)))
    idx, props = find_peaks(mag, prominence=min_prominence_frac * mag.max(), distance=distance)
    keep = spectrum.omega[idx] >= omega_min
    idx, prom = idx[keep], props["prominences"][keep]
    if idx.size == 0:
        return PeakSet((), spectrum.bin_width)
    accepted: list[tuple[float, float]] = []
    chosen = []
    for pos in np.argsort(-mag[idx], kind="stable"):
        w, a = float(spectrum.omega[idx[pos]]), float(mag[idx[pos]])
        if accepted and leakage_factor > 0:
            env = leakage_envelope(np.array([w]), accepted, spectrum.bin_width,
                                   spectrum.n_samples)[0]
            if a <= leakage_factor * env:
                continue
        accepted.append((w, a))
        chosen.append(pos)
    chosen.sort()
    top = idx[np.argmax(mag[idx])]
    peaks = tuple(
        Peak(float(spectrum.omega[idx[c]]), float(mag[idx[c]]), float(prom[c]), bool(idx[c] == top))
        for c in chosen
    )
    return PeakSet(peaks, spectrum.bin_width)


@dataclass
class PeakMatch:
    omega: float
    magnitude: float
    dominant: bool
    line: int | None
    line_omega: float | None
    residual: float | None

    @property
    def matched(self) -> bool:
        return self.line is not None


@dataclass
class MatchReport:
    matches: list[PeakMatch]
    lines: np.ndarray
    tolerance: float
    extra: dict = field(default_factory=dict)

    @property
    def unmatched(self) -> list[PeakMatch]:
        return [m for m in self.matches if not m.matched]

    @property
    def dominant(self) -> PeakMatch | None:
        return next((m for m in self.matches if m.dominant), None)

    def secondary_matched(self) -> list[PeakMatch]:
        return [m for m in self.matches if m.matched and not m.dominant]

    def signed_omegas(self, secondary_only: bool = True) -> np.ndarray:
        """Matched peak positions carrying the sign of their line."""
        ms = self.secondary_matched() if secondary_only else [m for m in self.matches if m.matched]
        return np.array([np.sign(m.line_omega) * m.omega for m in ms])

    def to_dict(self) -> dict:
        return {
            "tolerance_rad_per_us": self.tolerance,
            "lines": [float(x) for x in self.lines],
            "peaks": [
                {
                    "omega": m.omega,
                    "magnitude": m.magnitude,
                    "dominant": m.dominant,
                    "line": None if m.line is None else m.line + 1,
                    "line_omega": m.line_omega,
                    "residual": m.residual,
                }
                for m in self.matches
            ],
            "unmatched": len(self.unmatched),
            **self.extra,
        }


def match_peaks(peaks: PeakSet, lines, tol_bins: float = 2.0) -> MatchReport:
    """Assign each peak to the nearest |omega_l| within tol_bins native bins.

    Lines are E_l - E_v and may be negative; a real signal only shows
    |omega_l|, so matching uses magnitudes.  Line numbers are 0-based here
    (l - 1).
    """
    lines = np.asarray(lines, dtype=float)
    tol = tol_bins * peaks.bin_width
    matches = []
    for p in peaks:
        if lines.size:
            d = np.abs(np.abs(lines) - p.omega)
            j = int(np.argmin(d))
            if d[j] <= tol:
                matches.append(PeakMatch(p.omega, p.magnitude, p.dominant, j, float(lines[j]),
                                         float(p.omega - abs(lines[j]))))
                continue
        matches.append(PeakMatch(p.omega, p.magnitude, p.dominant, None, None, None))
    return MatchReport(matches, lines, tol)


def count_inversions(values) -> int:
    """Adjacent pairs that break a non-decreasing order."""
    v = np.asarray(values, dtype=float)
    return int(np.sum(np.diff(v) < 0))


def peak_width(spectrum: Spectrum, omega0: float, level: float = 0.5) -> float:
    """Full width at ``level`` of the maximum of the peak nearest ``omega0``."""
    mag = spectrum.magnitude
    i = int(np.argmin(np.abs(spectrum.omega - omega0)))
    # climb to the local maximum
    while 0 < i < len(mag) - 1 and max(mag[i - 1], mag[i + 1]) > mag[i]:
        i = i - 1 if mag[i - 1] > mag[i + 1] else i + 1
    cut = level * mag[i]
    lo = i
    while lo > 0 and mag[lo] > cut:
        lo -= 1
    hi = i
    while hi < len(mag) - 1 and mag[hi] > cut:
        hi += 1
    return float(spectrum.omega[hi] - spectrum.omega[lo])
