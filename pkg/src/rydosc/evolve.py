"""Initial-state preparation and Krylov time evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hamiltonian import build_hamiltonian
from .hilbert import Basis, build_sectors, domain_wall_number, occupations, z2_labels
from .model import ChainSpec, DriveParams

BETA_PREP = -1e-3


class IterationLimitError(RuntimeError):
    """Iterative eigensolver did not converge."""


class AccuracyError(RuntimeError):
    """Time step could not meet the requested propagation tolerance."""


def magnetization_diagonal(basis: Basis) -> np.ndarray:
    occ = occupations(basis.states, basis.n_s)
    return 1.0 - 2.0 * occ.sum(axis=1) / basis.n_s


def domain_wall_diagonal(basis: Basis) -> np.ndarray:
    return domain_wall_number(basis.states, basis.n_s).astype(float)


def measure_magnetization(state: np.ndarray, basis: Basis) -> float:
    """(1/n_s) sum_j <sigma_z,j> with sigma_z = +1 on the ground level."""
    return float(magnetization_diagonal(basis) @ np.abs(state) ** 2)


def measure_domain_density(state: np.ndarray, basis: Basis) -> float:
    """<R> * n_s, i.e. the expected number of domain walls."""
    return float(domain_wall_diagonal(basis) @ np.abs(state) ** 2)


def product_state(basis: Basis, label: int) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index(label)] = 1.0
    return psi


def prepare_initial(spec: ChainSpec, params_prep: DriveParams, basis: Basis,
                    tol: float = 1e-12, maxiter: int = 20000) -> np.ndarray:
    """Ground state of H_prep inside the k=0 sector, in the site basis.

    The phase is fixed so the amplitude on |1010...10> is real and positive.
    """
    h = build_hamiltonian(spec, params_prep, basis)
    k0 = build_sectors(basis)[0]
    hk = k0.projector.conj().T @ h @ k0.projector
    z2 = z2_labels(basis.n_s)[0]
    z2_row = basis.index(z2)
    # start from the Bloch state of |1010..10> so ARPACK is deterministic
    v0 = np.asarray(k0.projector[z2_row].todense()).ravel().conj()
    v0 = v0 + 1e-3 * np.ones_like(v0)
    if k0.dim <= 64:
        w, v = np.linalg.eigh(hk.toarray())
        vec = v[:, 0]
    else:
        try:
            w, v = spla.eigsh(hk, k=1, which="SA", v0=v0, tol=tol, maxiter=maxiter)
        except spla.ArpackNoConvergence as exc:
            raise IterationLimitError(f"ground-state solve did not converge: {exc}") from exc
        vec = v[:, 0]
    psi = np.asarray(k0.projector @ vec).ravel()
    psi /= np.linalg.norm(psi)
    amp = psi[z2_row]
    if abs(amp) > 0:
        psi *= abs(amp) / amp
    return psi


@dataclass
class KrylovStats:
    steps: int = 0
    substeps: int = 0
    max_dim: int = 0
    max_error: float = 0.0


class KrylovPropagator:
    """exp(-i H tau) v by Lanczos with full reorthogonalisation.

    The error of a step is estimated by the standard a posteriori bound
    beta_m |[exp(-i tau T_m) e_1]_m|.  A step that misses ``tol`` with
    ``max_dim`` vectors is split in halves.
    """

    def __init__(self, h: sp.spmatrix, max_dim: int = 30, tol: float = 1e-10,
                 max_halvings: int = 12):
        self.h = sp.csr_matrix(h, dtype=complex)
        self.max_dim = max_dim
        self.tol = tol
        self.max_halvings = max_halvings
        self.stats = KrylovStats()
        self._check_dim = 8

    def _try_step(self, v: np.ndarray, tau: float):
        n = len(v)
        m_max = min(self.max_dim, n)
        vnorm = np.linalg.norm(v)
        basis = np.empty((m_max + 1, n), dtype=complex)
        basis[0] = v / vnorm
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        check = min(self._check_dim, m_max)
        for j in range(m_max):
            w = self.h @ basis[j]
            alpha[j] = np.vdot(basis[j], w).real
            w -= alpha[j] * basis[j]
            if j:
                w -= beta[j - 1] * basis[j - 1]
            # two passes of Gram-Schmidt against the whole basis
            for _ in range(2):
                w -= (basis[: j + 1].conj() @ w) @ basis[: j + 1]
            beta[j] = np.linalg.norm(w)
            m = j + 1
            breakdown = beta[j] < 1e-14 * max(1.0, abs(alpha[j]))
            if m < check and not breakdown and m < m_max:
                basis[m] = w / beta[j]
                continue
            if m == 1:
                c = np.array([np.exp(-1j * tau * alpha[0])])
            else:
                theta, q = sla.eigh_tridiagonal(alpha[:m], beta[: m - 1])
                c = q @ (np.exp(-1j * tau * theta) * q[0].conj())
            err = 0.0 if breakdown else beta[j] * abs(c[-1]) * vnorm
            if err <= self.tol:
                self.stats.max_dim = max(self.stats.max_dim, m)
                self.stats.max_error = max(self.stats.max_error, err)
                self._check_dim = max(2, m - 1)
                return vnorm * (c @ basis[:m]), err
            if m == m_max:
                return None, err
            basis[m] = w / beta[j]
        return None, np.inf

    def step(self, v: np.ndarray, tau: float) -> np.ndarray:
        """Propagate ``v`` by time ``tau``, sub-stepping as needed."""
        self.stats.steps += 1
        pieces = [(tau, 0)]
        out = v
        while pieces:
            t, depth = pieces.pop()
            new, err = self._try_step(out, t)
            if new is None:
                if depth >= self.max_halvings:
                    raise AccuracyError(
                        f"Krylov error {err:.3e} above tolerance {self.tol:.1e} "
                        f"after {self.max_halvings} halvings of dt={tau}"
                    )
                pieces.extend([(t / 2, depth + 1), (t / 2, depth + 1)])
                continue
            out = new
            self.stats.substeps += 1
        return out


@dataclass
class TimeSeries:
    t: np.ndarray
    magnetization: np.ndarray
    rho_ns: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    omega: float
    m_t: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    @property
    def omega_t_over_2pi(self) -> np.ndarray:
        return self.omega * self.t / (2 * math.pi)

    def truncate(self, t_stop: float) -> "TimeSeries":
        """Prefix of the series up to ``t_stop`` (same grid)."""
        n = num_samples(t_stop, self.dt)
        cut = slice(0, n)
        return TimeSeries(self.t[cut], self.magnetization[cut], self.rho_ns[cut],
                          self.energy[cut], self.norm[cut], self.omega,
                          None if self.m_t is None else self.m_t[cut], dict(self.meta),
                          {k: v[cut] for k, v in self.extra.items()})


def num_samples(t_stop: float, dt: float) -> int:
    return int(math.floor(t_stop / dt + 1e-9)) + 1


def evolve(state: np.ndarray, h: sp.spmatrix, basis: Basis, dt: float, t_stop: float,
           omega: float, max_dim: int = 30, tol: float = 1e-10,
           keep_states: bool = False, observers: dict | None = None):
    """Evolve ``state`` under ``h`` and sample observables on t = 0, dt, 2dt, ...

    ``observers`` maps names to callables ``f(psi) -> float`` evaluated at
    every sample; their traces land in ``TimeSeries.extra``.  Returns a
    :class:`TimeSeries`; with ``keep_states`` also the sampled state vectors.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = num_samples(t_stop, dt)
    mag = magnetization_diagonal(basis)
    dw = domain_wall_diagonal(basis)
    prop = KrylovPropagator(h, max_dim=max_dim, tol=tol)
    out = {key: np.empty(n) for key in ("M", "rho", "E", "norm")}
    observers = observers or {}
    extra = {name: np.empty(n) for name in observers}
    psi = np.asarray(state, dtype=complex)
    states = []
    for i in range(n):
        if i:
            psi = prop.step(psi, dt)
        p = np.abs(psi) ** 2
        out["M"][i] = mag @ p
        out["rho"][i] = dw @ p
        out["E"][i] = np.vdot(psi, h @ psi).real
        out["norm"][i] = math.sqrt(p.sum())
        for name, fn in observers.items():
            extra[name][i] = fn(psi)
        if keep_states:
            states.append(psi.copy())
    series = TimeSeries(dt * np.arange(n), out["M"], out["rho"], out["E"], out["norm"], omega,
                        meta={"krylov_max_dim": max_dim, "krylov_tol": tol,
                              "krylov_used_dim": prop.stats.max_dim,
                              "krylov_substeps": prop.stats.substeps,
                              "krylov_max_error": prop.stats.max_error},
                        extra=extra)
    return (series, states) if keep_states else series


def dense_evolve(state: np.ndarray, h: sp.spmatrix, basis: Basis, times: np.ndarray,
                 chunk: int = 2000) -> np.ndarray:
    """Magnetization at ``times`` from a full eigendecomposition of ``h``."""
    w, v = np.linalg.eigh(h.toarray())
    coeff = v.conj().T @ state
    mag = magnetization_diagonal(basis)
    times = np.asarray(times, dtype=float)
    result = np.empty(len(times))
    for start in range(0, len(times), chunk):
        t = times[start:start + chunk]
        psi = v @ (np.exp(-1j * np.outer(w, t)) * coeff[:, None])
        result[start:start + chunk] = mag @ np.abs(psi) ** 2
    return result


def sector_leakage(sectors, keep: int = 0):
    """Observer: weight of a state outside momentum sector ``keep``."""
    others = sp.hstack([s.projector for s in sectors if s.m != keep]).tocsc().conj().T
    return lambda psi: float(np.linalg.norm(others @ psi) ** 2)
