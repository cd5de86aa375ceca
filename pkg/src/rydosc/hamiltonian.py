"""Sparse Rydberg Hamiltonian, translation operators and sector eigensolves."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    Basis,
    MomentumSector,
    domain_wall_number,
    occupations,
    translate1,
    translate2,
    z2_labels,
)
from .model import ChainSpec, DriveParams, pair_distance, interaction, site_detuning

TAGS = ("GS", "MS", "one-meson", "other")


class IntegrityError(ValueError):
    """Operator failed a structural check (e.g. Hermiticity)."""


class ClassificationError(RuntimeError):
    """No metastable/ground state pair could be identified."""


def interaction_matrix(spec: ChainSpec, params: DriveParams) -> np.ndarray:
    n = spec.n_s
    v = np.zeros((n, n))
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            v[j - 1, k - 1] = v[k - 1, j - 1] = interaction(params, pair_distance(spec, j, k))
    return v


def diagonal_energies(spec: ChainSpec, params: DriveParams, labels) -> np.ndarray:
    """-sum_j Delta_j n_j + sum_{j<k} V_jk n_j n_k for each label."""
    occ = occupations(labels, spec.n_s).astype(float)
    detuning = np.array([site_detuning(j, params) for j in range(1, spec.n_s + 1)])
    v = interaction_matrix(spec, params)
    return -occ @ detuning + 0.5 * np.einsum("ij,ij->i", occ @ v, occ)


def build_hamiltonian(spec: ChainSpec, params: DriveParams, basis: Basis) -> sp.csr_matrix:
    """Real symmetric CSR matrix of H in ``basis``.

    In a blockade-restricted basis, drive terms that would leave the basis
    are dropped.
    """
    if spec.n_s != basis.n_s:
        raise IntegrityError(f"spec has {spec.n_s} sites but basis has {basis.n_s}")
    n = spec.n_s
    dim = basis.dim
    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diagonal_energies(spec, params, basis.states)]
    for j in range(1, n + 1):
        target = basis.lookup(basis.states ^ (1 << (n - j)))
        ok = target >= 0
        rows.append(np.nonzero(ok)[0])
        cols.append(target[ok])
        vals.append(np.full(ok.sum(), 0.5 * params.omega))
    h = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    h.sum_duplicates()
    return h


def translation_operator(basis: Basis, shift: int = 2) -> sp.csr_matrix:
    """Permutation matrix T with T|x> = |x >> shift> (cyclic)."""
    move = {1: translate1, 2: translate2}[shift]
    target = basis.lookup(move(basis.states, basis.n_s))
    if np.any(target < 0):
        raise IntegrityError(f"basis is not closed under {shift}-site translation")
    dim = basis.dim
    return sp.csr_matrix((np.ones(dim), (target, np.arange(dim))), shape=(dim, dim))


def commutator_norm(h: sp.spmatrix, t: sp.spmatrix) -> float:
    """Largest entry magnitude of HT - TH."""
    c = (h @ t - t @ h).tocoo()
    return float(np.abs(c.data).max()) if c.nnz else 0.0


def is_hermitian(h, rtol: float = 1e-12) -> bool:
    diff = h - h.conj().T
    if sp.issparse(diff):
        diff = diff.tocoo().data
    scale = np.abs(h.data if sp.issparse(h) else h).max(initial=0.0)
    return np.abs(diff).max(initial=0.0) <= rtol * max(scale, 1.0)


def sector_matrix(h: sp.spmatrix, sector: MomentumSector) -> np.ndarray:
    p = sector.projector
    return (p.conj().T @ (h @ p)).toarray()


@dataclass(frozen=True)
class Thresholds:
    """Classification windows; energies are in units of Omega above E_g."""

    energy_window: float = 500.0
    zero_meson_rho_max: float = 1.0
    one_meson_rho: tuple[float, float] = (1.5, 2.5)


@dataclass
class EigenSummary:
    """Eigenpairs of H resolved by T2 momentum.

    ``energies`` are shifted so the ground state sits at zero; the absolute
    ground energy is kept in ``e_ground``.  Records are ordered by sector
    index and ascending energy.  ``vectors[m]`` holds the eigenvectors of
    sector ``m`` in its Bloch basis.
    """

    omega: float
    n_s: int
    energies: np.ndarray
    k_index: np.ndarray
    rho_ns: np.ndarray
    z2_overlap: np.ndarray
    e_ground: float
    sectors: list[MomentumSector] = field(repr=False)
    vectors: list[np.ndarray] = field(repr=False)
    tags: np.ndarray | None = None
    z2_ground: int = 0

    def __len__(self):
        return len(self.energies)

    @property
    def absolute_energies(self) -> np.ndarray:
        return self.energies + self.e_ground

    def index_of(self, tag: str) -> np.ndarray:
        if self.tags is None:
            raise ClassificationError("eigenstates have not been classified")
        return np.nonzero(self.tags == tag)[0]

    def state_vector(self, i: int) -> np.ndarray:
        """Eigenvector ``i`` expressed in the site basis."""
        m = int(self.k_index[i])
        offset = int(np.searchsorted(self.k_index, m))
        return self.sectors[m].projector @ self.vectors[m][:, i - offset]


def sector_eigensolve(h: sp.spmatrix, sectors: list[MomentumSector], basis: Basis,
                      omega: float) -> EigenSummary:
    if not is_hermitian(h):
        raise IntegrityError("Hamiltonian is not Hermitian")
    rho_diag = domain_wall_number(basis.states, basis.n_s).astype(float)
    z2 = [basis.lookup([lab])[0] for lab in z2_labels(basis.n_s)]
    energies, ks, rhos, overlaps, vectors = [], [], [], [], []
    for sector in sectors:
        hk = sector_matrix(h, sector)
        if not is_hermitian(hk, rtol=1e-10):
            raise IntegrityError(f"sector {sector.m} block is not Hermitian")
        w, v = np.linalg.eigh(hk)
        site = sector.projector @ v
        energies.append(w)
        ks.append(np.full(len(w), sector.m))
        rhos.append(rho_diag @ np.abs(site) ** 2)
        ov = np.zeros((len(w), 2))
        for c, row in enumerate(z2):
            if row >= 0:
                ov[:, c] = np.abs(site[row]) ** 2
        overlaps.append(ov)
        vectors.append(v)
    energies = np.concatenate(energies)
    k_index = np.concatenate(ks)
    e_ground = float(energies[k_index == 0].min())
    return EigenSummary(
        omega=omega,
        n_s=basis.n_s,
        energies=energies - e_ground,
        k_index=k_index,
        rho_ns=np.concatenate(rhos),
        z2_overlap=np.concatenate(overlaps),
        e_ground=e_ground,
        sectors=sectors,
        vectors=vectors,
    )


def classify(summary: EigenSummary, thresholds: Thresholds = Thresholds()) -> EigenSummary:
    """Tag GS, MS and one-meson states.

    GS is the lowest k=0 state.  MS is the k=0 state (other than GS) with
    the largest weight on the Z2 label that GS is not dominated by; picking
    by overlap rather than energy keeps MS identifiable once it crosses into
    the meson band.
    """
    tags = np.full(len(summary), "other", dtype=object)
    k0 = np.nonzero(summary.k_index == 0)[0]
    gs = k0[np.argmin(summary.energies[k0])]
    z2_gs = int(np.argmax(summary.z2_overlap[gs]))
    other = 1 - z2_gs
    lo, hi = thresholds.one_meson_rho
    window = summary.energies <= thresholds.energy_window * summary.omega
    meson = window & (summary.rho_ns >= lo) & (summary.rho_ns <= hi)
    tags[meson] = "one-meson"
    candidates = k0[(k0 != gs) & (summary.rho_ns[k0] < thresholds.zero_meson_rho_max)]
    if len(candidates) == 0:
        raise ClassificationError("no k=0 state with low domain-wall density besides GS")
    ms = candidates[np.argmax(summary.z2_overlap[candidates, other])]
    if summary.z2_overlap[ms, other] <= 0:
        raise ClassificationError("no k=0 state overlaps the second Z2 product state")
    tags[gs] = "GS"
    tags[ms] = "MS"
    return replace(summary, tags=tags, z2_ground=z2_gs)


def k0_mesons(summary: EigenSummary) -> np.ndarray:
    """Indices of the k=0 one-meson states ordered E_1 < E_2 < ..."""
    idx = summary.index_of("one-meson")
    idx = idx[summary.k_index[idx] == 0]
    return idx[np.argsort(summary.energies[idx], kind="stable")]


def reference_index(summary: EigenSummary, v: str) -> int:
    v = {"m": "MS", "g": "GS"}.get(v, v)
    (i,) = summary.index_of(v)
    return int(i)


def omega_lines(summary: EigenSummary, v: str) -> np.ndarray:
    """E_l - E_v for the k=0 one-meson states; v is "MS" or "GS"."""
    ref = summary.energies[reference_index(summary, v)]
    return summary.energies[k0_mesons(summary)] - ref


def omega_mg(summary: EigenSummary) -> float:
    return float(summary.energies[reference_index(summary, "MS")]
                 - summary.energies[reference_index(summary, "GS")])
