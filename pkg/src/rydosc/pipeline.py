"""End-to-end stages (eigens, simulate, spectrum, models) and their file formats."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import feasibility as feas
from .config import RunConfig
from .evolve import TimeSeries, evolve, prepare_initial
from .hamiltonian import (
    build_hamiltonian,
    EigenSummary,
    classify,
    k0_mesons,
    omega_lines,
    sector_eigensolve,
)
from .hilbert import Basis, build_sectors, enumerate_basis
from .meson import (
    DependencyError,
    classical_potentials,
    classicality_ratio,
    compare_models,
    kinetic_scale,
    perturbative_prediction,
)
from .model import neighbor_interaction
from .spectrum import MatchReport, PeakSet, Spectrum, detect_peaks, fourier_magnitude, match_peaks, transform

TIMESERIES_COLUMNS = ("t_us", "omega_t_over_2pi", "M", "M_T", "rho_ns", "energy", "norm")


@lru_cache(maxsize=8)
def cached_basis(mode: str, n_s: int) -> Basis:
    return enumerate_basis(mode, n_s)


@lru_cache(maxsize=8)
def cached_sectors(mode: str, n_s: int):
    return build_sectors(cached_basis(mode, n_s))


def reference_state(beta: float) -> str:
    """MS when the Z2 initial state sits near the metastable state (beta > 0)."""
    return "MS" if beta > 0 else "GS"


def run_tag(beta: float) -> str:
    return f"beta_{beta:+.4f}"


# ---------------------------------------------------------------- stages


def solve_eigens(cfg: RunConfig, beta: float | None = None) -> EigenSummary:
    spec, params = cfg.model(beta)
    basis = cached_basis(cfg.basis, cfg.n_s)
    h = build_hamiltonian(spec, params, basis)
    summary = sector_eigensolve(h, cached_sectors(cfg.basis, cfg.n_s), basis, params.omega)
    return classify(summary, cfg.thresholds)


def simulate(cfg: RunConfig, beta: float | None = None, beta_prep: float | None = None,
             observers: dict | None = None) -> TimeSeries:
    beta = cfg.beta if beta is None else beta
    beta_prep = cfg.beta_prep if beta_prep is None else beta_prep
    spec, params = cfg.model(beta)
    basis = cached_basis(cfg.basis, cfg.n_s)
    psi0 = prepare_initial(spec, params.with_beta(beta_prep), basis)
    h = build_hamiltonian(spec, params, basis)
    series = evolve(psi0, h, basis, cfg.dt, cfg.t_stop_max, params.omega,
                    max_dim=cfg.krylov_dim, tol=cfg.krylov_tol, observers=observers)
    series.meta.update(beta=beta, beta_prep=beta_prep)
    return transform(series)


def spectra(cfg: RunConfig, series: TimeSeries) -> dict[float, Spectrum]:
    """One spectrum per configured stop time (in units of 2 pi / Omega)."""
    out = {}
    for stop in sorted(cfg.t_stops):
        part = transform(series.truncate(stop * cfg.period))
        out[stop] = fourier_magnitude(part, cfg.pad_factor)
    return out


def peaks_of(cfg: RunConfig, spectrum: Spectrum) -> PeakSet:
    return detect_peaks(spectrum, cfg.min_prominence_frac, cfg.min_separation_bins,
                        leakage_factor=cfg.leakage_factor)


@dataclass
class Analysis:
    beta: float
    summary: EigenSummary
    spectrum: Spectrum
    peaks: PeakSet
    report: MatchReport

    @property
    def reference(self) -> str:
        return reference_state(self.beta)


def analyse(cfg: RunConfig, beta: float, series: TimeSeries,
            summary: EigenSummary | None = None, t_stop: float | None = None) -> Analysis:
    summary = solve_eigens(cfg, beta) if summary is None else summary
    stop = max(cfg.t_stops) if t_stop is None else t_stop
    spectrum = fourier_magnitude(transform(series.truncate(stop * cfg.period)), cfg.pad_factor)
    peaks = peaks_of(cfg, spectrum)
    lines = omega_lines(summary, reference_state(beta))
    return Analysis(beta, summary, spectrum, peaks, match_peaks(peaks, lines, cfg.match_tol_bins))


def trend_row(analysis: Analysis) -> dict:
    sec = analysis.report.signed_omegas()
    dom = analysis.report.dominant
    return {
        "beta": analysis.beta,
        "dominant_omega": float("nan") if dom is None else dom.omega,
        "secondary_centroid": float(sec.mean()) if sec.size else float("nan"),
        "secondary_spread": float(sec.max() - sec.min()) if sec.size else float("nan"),
        "n_secondary": int(sec.size),
        "secondary_omegas": " ".join(f"{w:.6f}" for w in np.sort(sec)),
    }


def model_reports(cfg: RunConfig, beta: float, summary: EigenSummary | None = None,
                  analysis: Analysis | None = None) -> dict:
    spec, params = cfg.model(beta)
    summary = solve_eigens(cfg, beta) if summary is None else summary
    classical = classical_potentials(spec, params)
    prediction = perturbative_prediction(summary, cached_basis(cfg.basis, cfg.n_s), params,
                                         reference_state(beta))
    out = {
        "beta": beta,
        "classicality_ratio": classicality_ratio(params),
        "kinetic_scale": kinetic_scale(params),
        "classical": classical.to_dict(),
        "prediction": prediction.to_dict(),
    }
    if analysis is not None:
        out["comparison"] = compare_models(analysis.report, analysis.spectrum, classical,
                                           prediction, cfg.spacing_rtol, cfg.match_tol_bins)
    return out


# ---------------------------------------------------------------- files


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header, rows, digest: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_sha256: {digest}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(x) for x in row] for row in reader])
    return header, data.reshape(-1, len(header))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    doc = {"config_sha256": cfg.digest(), "config": cfg.to_text(), **payload}
    Path(path).write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def write_timeseries(path: Path, series: TimeSeries, cfg: RunConfig) -> None:
    m_t = series.m_t if series.m_t is not None else series.magnetization - series.magnetization.mean()
    rows = zip(series.t, series.omega_t_over_2pi, series.magnetization, m_t,
               series.rho_ns, series.energy, series.norm)
    write_csv(path, TIMESERIES_COLUMNS, rows, cfg.digest())
    write_json(path.with_suffix(".json"), {"parameters": _parameters(cfg, series.meta.get("beta")),
                                            "solver": series.meta}, cfg)


def read_timeseries(path: Path, omega: float) -> TimeSeries:
    if not Path(path).exists():
        raise DependencyError(f"{path} not found; run the 'simulate' command first")
    header, data = read_csv(path)
    col = {name: data[:, i] for i, name in enumerate(header)}
    return TimeSeries(col["t_us"], col["M"], col["rho_ns"], col["energy"], col["norm"], omega,
                      m_t=col["M_T"])


def write_spectrum(path: Path, spectrum: Spectrum, cfg: RunConfig) -> None:
    rows = zip(spectrum.omega, spectrum.omega_over_drive, spectrum.magnitude)
    write_csv(path, ("omega_rad_per_us", "omega_over_Omega", "magnitude"), rows, cfg.digest())


def eigen_payload(summary: EigenSummary) -> dict:
    return {
        "omega": summary.omega,
        "e_ground_absolute": summary.e_ground,
        "states": [
            {"E": float(e), "k_index": int(k), "rho_ns": float(r),
             "z2_overlap": [float(o) for o in ov], "tag": str(t)}
            for e, k, r, ov, t in zip(summary.energies, summary.k_index, summary.rho_ns,
                                      summary.z2_overlap, summary.tags)
        ],
        "k0_one_meson": [int(i) for i in k0_mesons(summary)],
        "omega_lines_MS": omega_lines(summary, "MS"),
        "omega_lines_GS": omega_lines(summary, "GS"),
    }


def write_eigens(out: Path, summary: EigenSummary, cfg: RunConfig, beta: float) -> None:
    write_json(out / "eigens.json", {"parameters": _parameters(cfg, beta), **eigen_payload(summary)}, cfg)
    rows = zip(summary.energies, summary.energies / summary.omega, summary.k_index,
               summary.rho_ns, summary.tags)
    write_csv(out / "eigens.csv", ("E_rad_per_us", "E_over_Omega", "k_index", "rho_ns", "tag"),
              rows, cfg.digest())


def _parameters(cfg: RunConfig, beta: float | None) -> dict:
    beta = cfg.beta if beta is None else beta
    spec, params = cfg.model(beta)
    return {
        "n_s": spec.n_s, "a_um": spec.a, "layout": spec.layout.value, "basis": cfg.basis,
        "omega": params.omega, "delta_glob": params.delta_glob, "delta_loc": params.delta_loc,
        "c6": params.c6, "alpha": params.alpha, "beta": beta, "beta_prep": cfg.beta_prep,
        "blockade_radius_um": params.blockade_radius,
        "v1": neighbor_interaction(spec, params, 1), "v2": neighbor_interaction(spec, params, 2),
    }


def feasibility_report(cfg: RunConfig, constraints: feas.HardwareConstraints,
                       rabi_targets_mhz=(2.0, 20.0), t_prep: float = feas.DEFAULT_T_PREP) -> dict:
    spec, params = cfg.model()
    base = feas.Protocol(params.omega, spec.a, params.blockade_radius, t_prep,
                         constraints.t_max - t_prep, params.delta_glob, spec.n_s)
    rows = []
    for target in (cfg.omega_mhz, *rabi_targets_mhz):
        proto = feas.rescale(params.omega, spec.a, params.blockade_radius, feas.TWO_PI * target,
                             t_prep, constraints.t_max, params.delta_glob, spec.n_s)
        rows.append({
            "omega_mhz": target,
            "protocol": proto.to_dict(),
            "violations": [{"quantity": v.quantity, "value": v.value, "bound": list(v.bound),
                            "margin": v.margin} for v in feas.validate(proto, constraints)],
        })
    nx, ny, nchain = feas.capacity(constraints, spec.a)
    return {
        "constraints": {
            "t_max": constraints.t_max, "a_min": constraints.a_min,
            "field_of_view": list(constraints.field_of_view),
            "omega_range": list(constraints.omega_range),
            "delta_glob_range": list(constraints.delta_glob_range),
        },
        "baseline": base.to_dict(),
        "rescaled": rows,
        "capacity": {"n_x": nx, "n_y": ny, "n_chain": nchain},
    }
