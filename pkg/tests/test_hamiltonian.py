from functools import reduce

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from rydosc.hamiltonian import (
    ClassificationError,
    IntegrityError,
    Thresholds,
    build_hamiltonian,
    classify,
    commutator_norm,
    diagonal_energies,
    k0_mesons,
    omega_lines,
    omega_mg,
    sector_eigensolve,
    translation_operator,
)
from rydosc.hilbert import build_sectors, enumerate_basis, z2_labels
from rydosc.model import Layout, neighbor_interaction, params_from_dimensionless

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
N = np.diag([0.0, 1.0])
I2 = np.eye(2)


def site_op(op, j, n_s):
    """``op`` on 1-based site j; site 1 is the leftmost tensor factor."""
    return reduce(np.kron, [op if s == j else I2 for s in range(1, n_s + 1)])


def kron_hamiltonian(spec, params):
    """Dense H straight from the operator sum, independent of bit tricks."""
    n = spec.n_s
    h = np.zeros((2**n, 2**n))
    for j in range(1, n + 1):
        h += params.omega / 2 * site_op(SX, j, n)
        delta_j = params.delta_glob + (-1) ** j * params.delta_loc
        h -= delta_j * site_op(N, j, n)
    xy = spec.radius * np.array([[np.cos(2 * np.pi * s / n), np.sin(2 * np.pi * s / n)]
                                 for s in range(n)])
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            if spec.layout is Layout.MODULAR_1D:
                r = min(k - j, n - k + j) * spec.a
            else:
                r = np.linalg.norm(xy[j - 1] - xy[k - 1])
            h += params.c6 / r**6 * site_op(N, j, n) @ site_op(N, k, n)
    return h


def model(n_s, beta=0.01, layout="ring-chord", alpha=4.0, rb=1.8):
    return params_from_dimensionless(n_s, rb, alpha, beta, layout=layout)


@pytest.mark.parametrize("layout", ["ring-chord", "modular-1d"])
@pytest.mark.parametrize("n_s", [4, 6, 8])
def test_full_hamiltonian_matches_kronecker_oracle(n_s, layout):
    spec, params = model(n_s, beta=0.13, layout=layout)
    h = build_hamiltonian(spec, params, enumerate_basis("full", n_s)).toarray()
    assert np.allclose(h, kron_hamiltonian(spec, params), atol=1e-9 * np.abs(h).max())


def test_blockade_hamiltonian_is_projected_full_hamiltonian():
    spec, params = model(8)
    full = enumerate_basis("full", 8)
    restricted = enumerate_basis("blockade-restricted", 8)
    h_full = build_hamiltonian(spec, params, full).toarray()
    keep = full.lookup(restricted.states)
    h = build_hamiltonian(spec, params, restricted).toarray()
    assert np.allclose(h, h_full[np.ix_(keep, keep)])


def test_z2_diagonal_direct_sum():
    spec, params = model(16, layout="modular-1d")
    z2 = z2_labels(16)[0]
    (e,) = diagonal_energies(spec, params, [z2])
    # odd sites occupied: detuning Delta_glob - Delta_loc on each
    tail = sum(8 * neighbor_interaction(spec, params, d) for d in (2, 4, 6))
    tail += 4 * neighbor_interaction(spec, params, 8)
    expected = 8 * (-params.delta_glob + params.delta_loc) + tail
    assert e == pytest.approx(expected, rel=1e-12)
    leading = 8 * (-params.delta_glob + params.delta_loc) / params.omega
    assert leading == pytest.approx(-31.68)


def test_z2_degenerate_without_staggered_field():
    spec, params = model(12, beta=0.0)
    e = diagonal_energies(spec, params, list(z2_labels(12)))
    assert e[0] == pytest.approx(e[1], rel=1e-14)


def test_full_basis_row_has_n_s_flips():
    spec, params = model(8)
    h = build_hamiltonian(spec, params, enumerate_basis("full", 8)).tocsr()
    offdiag = h - sp.diags(h.diagonal())
    offdiag.eliminate_zeros()
    assert np.all(np.diff(offdiag.indptr) == 8)
    assert np.allclose(offdiag.data, params.omega / 2)


def test_spec_basis_mismatch():
    spec, params = model(8)
    with pytest.raises(IntegrityError):
        build_hamiltonian(spec, params, enumerate_basis("full", 10))


@given(st.sampled_from([8, 12, 16]), st.floats(0.5, 8.0), st.floats(-0.5, 0.5),
       st.floats(1.2, 2.0), st.sampled_from(list(Layout)))
def test_two_site_translation_commutes(n_s, alpha, beta, rb, layout):
    spec, params = params_from_dimensionless(n_s, rb, alpha, beta, layout=layout)
    basis = enumerate_basis("blockade-restricted", n_s)
    h = build_hamiltonian(spec, params, basis)
    t2 = translation_operator(basis, 2)
    assert commutator_norm(h, t2) <= 1e-12 * np.abs(h.data).max()


def test_one_site_translation_breaks_only_with_staggering():
    basis = enumerate_basis("full", 8)
    t1 = translation_operator(basis, 1)
    spec, params = model(8, beta=0.05)
    assert commutator_norm(build_hamiltonian(spec, params, basis), t1) > 1e-3
    spec, params = model(8, beta=0.0)
    h = build_hamiltonian(spec, params, basis)
    assert commutator_norm(h, t1) <= 1e-12 * np.abs(h.data).max()


@pytest.mark.parametrize("mode,n_s", [("full", 8), ("full", 10), ("blockade-restricted", 12)])
def test_sector_spectrum_equals_dense_spectrum(mode, n_s):
    spec, params = model(n_s, beta=0.07)
    basis = enumerate_basis(mode, n_s)
    h = build_hamiltonian(spec, params, basis)
    summary = sector_eigensolve(h, build_sectors(basis), basis, params.omega)
    dense = np.linalg.eigvalsh(h.toarray())
    assert np.allclose(np.sort(summary.absolute_energies), dense, atol=1e-9 * np.abs(dense).max())


def test_sector_eigenvectors_are_eigenvectors_in_site_basis():
    spec, params = model(10, beta=0.03)
    basis = enumerate_basis("blockade-restricted", 10)
    h = build_hamiltonian(spec, params, basis)
    summary = sector_eigensolve(h, build_sectors(basis), basis, params.omega)
    for i in range(0, len(summary), 7):
        v = summary.state_vector(i)
        assert np.linalg.norm(h @ v - summary.absolute_energies[i] * v) < 1e-9


def test_non_hermitian_rejected():
    basis = enumerate_basis("full", 4)
    h = sp.random(16, 16, density=0.3, random_state=np.random.default_rng(1), format="csr")
    with pytest.raises(IntegrityError):
        sector_eigensolve(h + 10 * sp.eye(16), build_sectors(basis), basis, 1.0)


def eigen(n_s, beta, mode="blockade-restricted", layout="ring-chord"):
    spec, params = model(n_s, beta=beta, layout=layout)
    basis = enumerate_basis(mode, n_s)
    h = build_hamiltonian(spec, params, basis)
    return classify(sector_eigensolve(h, build_sectors(basis), basis, params.omega))


@pytest.fixture(scope="module")
def production():
    return eigen(16, 0.01)


def test_beta_sign_flip_preserves_spectrum(production):
    flipped = eigen(16, -0.01)
    a, b = np.sort(production.absolute_energies), np.sort(flipped.absolute_energies)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-8 * np.abs(a).max())


def test_one_meson_counts(production):
    mesons = production.index_of("one-meson")
    assert len(mesons) == 64
    assert np.bincount(production.k_index[mesons]).tolist() == [8] * 8
    assert len(k0_mesons(production)) == 8


def test_ms_gs_tags(production):
    (gs,) = production.index_of("GS")
    (ms,) = production.index_of("MS")
    assert production.k_index[gs] == production.k_index[ms] == 0
    assert production.rho_ns[gs] < 1 and production.rho_ns[ms] < 1
    assert production.energies[gs] == 0.0
    # beta > 0 favours atoms on even sites, so GS sits on |0101..> and MS on |1010..>
    assert production.z2_ground == 1
    assert production.z2_overlap[ms, 0] > 0.5


def test_one_meson_lines_near_expected_frequencies(production):
    lines = omega_lines(production, "MS")
    assert np.all(np.diff(lines) > 0)
    assert lines[-1] == pytest.approx(19.0, abs=1.0)
    assert 10.0 < lines[0] and lines[-2] < 17.0
    g = omega_lines(production, "GS")
    assert np.allclose(g - lines, omega_mg(production))
    assert 14.0 < g[0] and g[-2] < 20.0


def test_lines_coincide_without_staggering():
    # only the exponentially small Z2 tunnelling splitting separates MS and GS
    s = eigen(12, 0.0)
    assert abs(omega_mg(s)) <= 1e-4 * s.omega
    assert np.allclose(omega_lines(s, "MS"), omega_lines(s, "GS"), atol=1e-4 * s.omega)


def test_omega_mg_is_linear_in_delta_loc():
    betas = np.array([0.002, 0.005, 0.01, 0.02, 0.05])
    w = np.array([omega_mg(eigen(16, b)) for b in betas])
    slope, icpt = np.polyfit(betas, w, 1)
    r2 = 1 - np.sum((w - (slope * betas + icpt)) ** 2) / np.sum((w - w.mean()) ** 2)
    assert r2 >= 0.999
    assert slope > 0


def truncation_error(n_s, rb):
    """Largest gap between full and no-11 eigenvalues within 10 Omega of GS, over Omega.

    Energies are measured from each basis' own ground state and compared
    sector by sector.
    """
    runs = []
    for mode in ("full", "blockade-restricted"):
        spec, params = model(n_s, beta=0.01, rb=rb)
        basis = enumerate_basis(mode, n_s)
        h = build_hamiltonian(spec, params, basis)
        runs.append(sector_eigensolve(h, build_sectors(basis), basis, params.omega))
    full, restricted = runs
    gap = 0.0
    for m in range(n_s // 2):
        ef = np.sort(full.energies[full.k_index == m])
        er = np.sort(restricted.energies[restricted.k_index == m])
        er = er[er <= 10 * params.omega]
        gap = max(gap, np.abs(ef[: len(er)] - er).max())
    return gap / params.omega, neighbor_interaction(spec, params, 1) / params.omega


@pytest.mark.parametrize("n_s", [8, 10, 12])
def test_blockade_truncation_within_stated_tolerance(n_s):
    # stated control: 1e-2 Omega at R_b/a = 1.8; the virtual 11 admixture
    # shifts meson-band levels by O(Omega^2 / V_1) ~ 0.05 Omega, so this fails
    gap, _ = truncation_error(n_s, 1.8)
    assert gap <= 1e-2


@pytest.mark.parametrize("n_s", [8, 10, 12])
def test_blockade_truncation_error_is_second_order(n_s):
    scaled = []
    for rb in (1.8, 2.2, 3.0):
        gap, v1 = truncation_error(n_s, rb)
        scaled.append(gap * v1)
    assert max(scaled) / min(scaled) < 2.0
    assert max(scaled) < n_s / 4


@pytest.mark.parametrize("n_s", [8, 10, 12])
def test_blockade_truncation_keeps_ms_gs_gap(n_s):
    full, restricted = eigen(n_s, 0.01, "full"), eigen(n_s, 0.01)
    assert abs(omega_mg(full) - omega_mg(restricted)) <= 1e-2 * full.omega


def test_classification_error_when_no_metastable_candidate():
    s = eigen(8, 0.01)
    with pytest.raises(ClassificationError):
        classify(s, Thresholds(zero_meson_rho_max=0.0))


def test_state_vector_round_trip(production):
    i = int(production.index_of("MS")[0])
    v = production.state_vector(i)
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_translation_operator_is_a_permutation():
    basis = enumerate_basis("full", 6)
    t = translation_operator(basis, 2)
    assert (t @ t.T - sp.eye(basis.dim)).count_nonzero() == 0
