"""Computational bases, the 2-site translation and momentum sectors.

A basis label is an ``n_s``-bit integer whose leftmost (most significant) bit
is atom 1, so site ``j`` (1-based) lives at bit ``n_s - j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

MAX_SITES = 24


class CapacityError(ValueError):
    """Requested system size is outside what the enumerator supports."""


class BasisMode(str, Enum):
    FULL = "full"
    BLOCKADE = "blockade-restricted"


def _rotr(x, s: int, n: int):
    mask = (1 << n) - 1
    return ((x >> s) | (x << (n - s))) & mask


def translate2(label, n_s: int):
    """Cyclic right shift by two bits; moves the content of site j to j+2."""
    return _rotr(label, 2, n_s)


def translate1(label, n_s: int):
    return _rotr(label, 1, n_s)


def occupations(labels, n_s: int) -> np.ndarray:
    """Boolean array of shape (len(labels), n_s); column j-1 is site j."""
    labels = np.asarray(labels, dtype=np.int64)
    shifts = np.arange(n_s - 1, -1, -1, dtype=np.int64)
    return ((labels[:, None] >> shifts) & 1).astype(bool)


def popcount(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return np.bitwise_count(x.astype(np.uint64)).astype(np.int64)


def domain_wall_number(label, n_s: int):
    """Number of cyclic neighbor pairs in the same state (00 or 11).

    This is the diagonal value of rho * n_s on a product state.
    """
    return n_s - popcount(label ^ _rotr(label, 1, n_s))


def label_from_string(bits: str) -> int:
    return int(bits, 2)


def label_to_string(label: int, n_s: int) -> str:
    return format(int(label), f"0{n_s}b")


def z2_labels(n_s: int) -> tuple[int, int]:
    """(|1010...10>, |0101...01>); the first has Rydberg atoms on odd sites."""
    odd = label_from_string("10" * (n_s // 2))
    return odd, odd >> 1


@dataclass(frozen=True)
class Basis:
    mode: BasisMode
    n_s: int
    states: np.ndarray
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, label: int) -> int:
        return self._index[int(label)]

    def lookup(self, labels) -> np.ndarray:
        """Positions of ``labels``; -1 where a label is not in the basis."""
        labels = np.asarray(labels, dtype=np.int64)
        pos = np.searchsorted(self.states, labels)
        pos = np.minimum(pos, self.dim - 1)
        return np.where(self.states[pos] == labels, pos, -1)

    def __contains__(self, label) -> bool:
        return int(label) in self._index


def enumerate_basis(mode: BasisMode | str, n_s: int) -> Basis:
    mode = BasisMode(mode)
    if n_s % 2 or not 4 <= n_s <= MAX_SITES:
        raise CapacityError(f"n_s must be even with 4 <= n_s <= {MAX_SITES}, got {n_s}")
    labels = np.arange(1 << n_s, dtype=np.int64)
    if mode is BasisMode.BLOCKADE:
        labels = labels[(labels & _rotr(labels, 1, n_s)) == 0]
    index = {int(x): i for i, x in enumerate(labels)}
    return Basis(mode, n_s, labels, index)


@dataclass(frozen=True)
class MomentumSector:
    """Bloch sums over T2 orbits with T2 eigenvalue exp(i k), k = 2 pi m / L.

    ``projector`` has the orthonormal Bloch vectors as columns, expressed in
    the parent basis.
    """

    m: int
    n_cells: int
    representatives: np.ndarray
    periods: np.ndarray
    projector: sp.csc_matrix

    @property
    def k(self) -> float:
        return 2.0 * np.pi * self.m / self.n_cells

    @property
    def dim(self) -> int:
        return len(self.representatives)

    @property
    def norms(self) -> np.ndarray:
        return 1.0 / np.sqrt(self.periods)


def orbit_data(basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    """Per basis state: smallest label in its T2 orbit and the orbit period."""
    n_cells = basis.n_s // 2
    rep = basis.states.copy()
    period = np.zeros(basis.dim, dtype=np.int64)
    t = basis.states
    for shift in range(1, n_cells + 1):
        t = translate2(t, basis.n_s)
        rep = np.minimum(rep, t)
        period = np.where((period == 0) & (t == basis.states), shift, period)
    return rep, period


def build_sectors(basis: Basis) -> list[MomentumSector]:
    n_s = basis.n_s
    n_cells = n_s // 2
    rep, period = orbit_data(basis)
    is_rep = rep == basis.states
    reps = basis.states[is_rep]
    periods = period[is_rep]
    sectors = []
    for m in range(n_cells):
        keep = (m * periods) % n_cells == 0
        r, p = reps[keep], periods[keep]
        k = 2.0 * np.pi * m / n_cells
        rows, cols, vals = [], [], []
        t = r.copy()
        for l in range(n_cells):
            live = l < p
            rows.append(basis.lookup(t[live]))
            cols.append(np.nonzero(live)[0])
            vals.append(np.exp(-1j * k * l) / np.sqrt(p[live]))
            t = translate2(t, n_s)
        proj = sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(basis.dim, len(r)),
        )
        sectors.append(MomentumSector(m, n_cells, r, p, proj))
    return sectors
