"""Classical short-range meson repulsion model and first-order peak predictor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from .hamiltonian import EigenSummary, k0_mesons, reference_index
from .hilbert import Basis, occupations, popcount, z2_labels
from .model import ChainSpec, DriveParams, local_detuning, neighbor_interaction
from .spectrum import MatchReport, Spectrum

METASTABLE_FIXED = "metastable-fixed"
# ratio -Delta_loc / V2 separating small / intermediate / large local detuning
REGIME_BOUNDS = (1.0 / 3.0, 3.0)


class DependencyError(RuntimeError):
    """A required upstream result (classification, simulation) is missing."""


@dataclass(frozen=True)
class ClassicalPotentials:
    """Site-basis energies of the Z2 state and of single odd-size domains."""

    eps0: float
    sizes: np.ndarray
    eps: np.ndarray
    v2: float
    delta_loc: float
    regime: str

    @property
    def omegas(self) -> np.ndarray:
        return self.eps - self.eps0

    def eps_of(self, n: int) -> float:
        if n % 2 == 0:
            raise ValueError("only odd domain sizes exist under nearest-neighbour blockade")
        return float(self.eps[np.searchsorted(self.sizes, n)])

    def order_relations(self) -> dict[str, bool]:
        eps = self.eps
        if self.delta_loc > 0:
            return {"eps1_gt_eps3_gt_dots": bool(np.all(np.diff(eps) < 0))}
        if self.delta_loc < 0:
            return {
                "eps0_below_all": bool(np.all(eps > self.eps0)),
                "eps3_lt_eps5_lt_dots": bool(np.all(np.diff(eps[1:]) > 0)),
            }
        return {}

    def to_dict(self) -> dict:
        return {
            "eps0": self.eps0,
            "v2": self.v2,
            "regime": self.regime,
            "table": [
                {"n": int(n), "eps": float(e), "omega": float(e - self.eps0)}
                for n, e in zip(self.sizes, self.eps)
            ],
            "order_relations": self.order_relations(),
        }


def classical_potentials(spec: ChainSpec, params: DriveParams) -> ClassicalPotentials:
    """Only the V2 tail is kept; longer-range terms are dropped on purpose."""
    n_s = spec.n_s
    dg, dl = params.delta_glob, params.delta_loc
    v2 = neighbor_interaction(spec, params, 2)
    eps0 = (n_s / 2) * (-dg + dl + v2)
    sizes = np.arange(1, n_s, 2)
    eps = eps0 + dg - sizes * dl - np.where(sizes == 1, 2.0, 3.0) * v2
    return ClassicalPotentials(eps0, sizes, eps, v2, dl, regime_classify(spec, params))


def regime_classify(spec: ChainSpec, params: DriveParams) -> str:
    if params.delta_loc > 0:
        return METASTABLE_FIXED
    r = -params.delta_loc / neighbor_interaction(spec, params, 2)
    lo, hi = REGIME_BOUNDS
    if r < lo:
        return "small"
    return "intermediate" if r <= hi else "large"


def classicality_ratio(params: DriveParams) -> float:
    """beta * alpha^2, the potential-to-kinetic ratio of the one-meson problem."""
    return params.beta * params.alpha**2


def kinetic_scale(params: DriveParams) -> float:
    """Domain-growth hopping scale Omega^2 / Delta_glob."""
    return params.omega**2 / params.delta_glob


@dataclass(frozen=True)
class PerturbativePrediction:
    reference: str
    frequencies: np.ndarray
    weights: np.ndarray
    hamming: np.ndarray

    @property
    def dominant_index(self) -> int:
        """1-based l of the largest predicted peak."""
        return int(np.argmax(self.weights)) + 1

    def ranking(self) -> list[int]:
        return [int(i) + 1 for i in np.argsort(-self.weights, kind="stable")]

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "dominant_index": self.dominant_index,
            "ranking": self.ranking(),
            "table": [
                {"l": i + 1, "omega": float(w), "weight": float(x), "hamming": int(h)}
                for i, (w, x, h) in enumerate(zip(self.frequencies, self.weights, self.hamming))
            ],
        }


def hamming_proxy(vector: np.ndarray, z2_label: int, basis: Basis) -> int:
    """Hamming distance from ``z2_label`` to the largest-amplitude basis label."""
    dominant = basis.states[int(np.argmax(np.abs(vector)))]
    return int(popcount(np.int64(dominant) ^ np.int64(z2_label)))


def perturbative_prediction(summary: EigenSummary, basis: Basis, params: DriveParams,
                            v: str) -> PerturbativePrediction:
    """Peak weights |<l|U|v><v|M|l>| / |E_l - E_v| over the k=0 one-meson states.

    U is the staggered-detuning term -sum_j (-1)^j Delta_loc n_j; exact
    eigenvectors of H stand in for the unperturbed ones.
    """
    if summary.tags is None:
        raise DependencyError("perturbative prediction needs a classified eigen summary")
    ref = reference_index(summary, v)
    mesons = k0_mesons(summary)
    occ = occupations(basis.states, basis.n_s).astype(float)
    u = -occ @ np.array([local_detuning(j, params) for j in range(1, basis.n_s + 1)])
    mag = 1.0 - 2.0 * occ.sum(axis=1) / basis.n_s
    psi_v = summary.state_vector(ref)
    z2 = z2_labels(basis.n_s)[0]
    freqs, weights, ham = [], [], []
    for i in mesons:
        phi = summary.state_vector(i)
        w = summary.energies[i] - summary.energies[ref]
        u_el = np.vdot(phi, u * psi_v)
        m_el = np.vdot(psi_v, mag * phi)
        freqs.append(w)
        weights.append(abs(u_el * m_el) / abs(w) if w != 0 else np.inf)
        ham.append(hamming_proxy(phi, z2, basis))
    return PerturbativePrediction(
        "MS" if summary.tags[ref] == "MS" else "GS",
        np.array(freqs), np.array(weights), np.array(ham),
    )


def line_magnitudes(spectrum: Spectrum, lines, tol_bins: float = 2.0) -> np.ndarray:
    """Spectrum height near each |omega_l|."""
    half = tol_bins * spectrum.bin_width
    return np.array([spectrum.at(w, half) for w in lines])


def rank_correlation(a, b) -> float:
    """Spearman coefficient; 0 when either input is constant."""
    if np.ptp(np.asarray(a, float)) == 0 or np.ptp(np.asarray(b, float)) == 0:
        return 0.0
    rho = spearmanr(a, b).statistic
    return float(rho) if np.isfinite(rho) else 0.0


def secondary_spacing(report: MatchReport) -> float:
    """Median spacing of matched secondary peaks per unit step in l."""
    ms = sorted(report.secondary_matched(), key=lambda m: m.line)
    steps = []
    for a, b in zip(ms, ms[1:]):
        wa = np.sign(a.line_omega) * a.omega
        wb = np.sign(b.line_omega) * b.omega
        if b.line != a.line:
            steps.append((wb - wa) / (b.line - a.line))
    return float(np.median(np.abs(steps))) if steps else float("nan")


def compare_models(report: MatchReport, spectrum: Spectrum, classical: ClassicalPotentials,
                   prediction: PerturbativePrediction, spacing_rtol: float = 0.2,
                   tol_bins: float = 2.0) -> dict:
    """Measured peaks against the classical table and the perturbative weights."""
    classical_w = classical.omegas
    peaks = []
    for m in report.matches:
        signed = m.omega if m.line_omega is None else np.sign(m.line_omega) * m.omega
        j = int(np.argmin(np.abs(classical_w - signed)))
        peaks.append({
            "omega": m.omega,
            "line": None if m.line is None else m.line + 1,
            "residual_perturbative": m.residual,
            "nearest_classical_n": int(classical.sizes[j]),
            "residual_classical": float(signed - classical_w[j]),
        })
    measured = line_magnitudes(spectrum, prediction.frequencies, tol_bins)
    corr = rank_correlation(measured, prediction.weights)
    spacing = secondary_spacing(report)
    expected = 2 * abs(classical.delta_loc)
    measured_dominant = report.dominant
    return {
        "peaks": peaks,
        "line_magnitudes": [float(x) for x in measured],
        "rank_correlation": corr,
        "predicted_dominant_index": prediction.dominant_index,
        "measured_dominant_index": None if measured_dominant is None or measured_dominant.line is None
        else measured_dominant.line + 1,
        "secondary_spacing": spacing,
        "classical_spacing": expected,
        "spacing_within_tolerance": bool(np.isfinite(spacing)
                                         and abs(spacing - expected) <= spacing_rtol * expected),
        "regime": classical.regime,
        "order_relations": classical.order_relations(),
    }
