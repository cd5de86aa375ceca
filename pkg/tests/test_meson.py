import numpy as np
import pytest
from hypothesis import given, strategies as st

from rydosc.hamiltonian import build_hamiltonian, classify, omega_lines, sector_eigensolve
from rydosc.hilbert import build_sectors, enumerate_basis, z2_labels
from rydosc.meson import (
    METASTABLE_FIXED,
    DependencyError,
    classical_potentials,
    classicality_ratio,
    hamming_proxy,
    kinetic_scale,
    perturbative_prediction,
    rank_correlation,
    regime_classify,
)
from rydosc.model import TWO_PI, ChainSpec, DriveParams, neighbor_interaction, params_from_dimensionless


def model(beta, layout="ring-chord", n_s=16):
    return params_from_dimensionless(n_s, 1.8, 4.0, beta, layout=layout)


def test_eps_differences_match_formulas():
    spec, params = model(0.03)
    cp = classical_potentials(spec, params)
    v2, dl = cp.v2, params.delta_loc
    assert cp.eps_of(1) - cp.eps_of(3) == pytest.approx(2 * dl + v2)
    for n in range(3, 14, 2):
        assert cp.eps_of(n + 2) - cp.eps_of(n) == pytest.approx(-2 * dl)
    assert cp.eps0 == pytest.approx(8 * (-params.delta_glob + dl + v2))


def test_omega_1_modular_plug_in():
    spec, params = model(0.01, "modular-1d")
    cp = classical_potentials(spec, params)
    w1 = cp.omegas[0]
    assert w1 / params.omega == pytest.approx(4.0 - 0.04 - 2 * cp.v2 / params.omega)
    assert w1 / params.omega == pytest.approx(2.897, abs=2e-3)
    assert w1 == pytest.approx(18.2, abs=0.05)


def test_even_domain_sizes_rejected():
    spec, params = model(0.01)
    cp = classical_potentials(spec, params)
    assert cp.sizes.tolist() == list(range(1, 16, 2))
    with pytest.raises(ValueError):
        cp.eps_of(4)


@given(st.floats(-3.0, 3.0).filter(lambda x: abs(x) > 1e-6), st.floats(0.05, 5.0))
def test_order_relations_hold(delta_loc, v2_scale):
    # any sign of Delta_loc and any V2 > 0: printed inequalities hold
    spec = ChainSpec(16, 5.0)
    params = DriveParams(TWO_PI, 8 * np.pi, delta_loc, c6=1.0)
    v2 = neighbor_interaction(spec, params, 2)
    params = DriveParams(TWO_PI, 8 * np.pi, delta_loc, c6=v2_scale / v2)
    relations = classical_potentials(spec, params).order_relations()
    assert relations and all(relations.values())


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_omega_affine_in_delta_loc_with_slope_minus_n(d1, d2):
    spec, base = model(0.0)
    a = classical_potentials(spec, base.with_delta_loc(d1))
    b = classical_potentials(spec, base.with_delta_loc(d2))
    # eps0 also carries (n_s/2) Delta_loc, so omega_[n] = eps_[n] - eps0 moves by -n
    eps_slope = (b.eps - a.eps) - (b.eps0 - a.eps0)
    assert np.allclose(eps_slope, -a.sizes * (d2 - d1), atol=1e-9)


def test_regimes():
    spec, params = model(-0.01, "modular-1d")
    assert regime_classify(spec, params) == "small"
    spec, params = model(-0.10, "modular-1d")
    assert regime_classify(spec, params) == "intermediate"
    spec, params = model(0.05)
    assert regime_classify(spec, params) == METASTABLE_FIXED
    spec, params = model(-0.5, "modular-1d")
    assert regime_classify(spec, params) == "large"
    # V2 -> infinity
    strong = DriveParams(TWO_PI, 8 * np.pi, -0.3, c6=1e12)
    assert regime_classify(ChainSpec(16, 5.0), strong) == "small"


def test_classicality_ratio():
    _, p = model(0.1)
    assert classicality_ratio(p) == pytest.approx(1.6)
    _, p = model(0.01)
    assert classicality_ratio(p) == pytest.approx(0.16)
    _, p = model(0.0)
    assert classicality_ratio(p) == 0.0
    assert kinetic_scale(p) == pytest.approx(TWO_PI / 4)


def eigen(beta, n_s=16):
    spec, params = model(beta, n_s=n_s)
    basis = enumerate_basis("blockade-restricted", n_s)
    h = build_hamiltonian(spec, params, basis)
    return params, basis, classify(sector_eigensolve(h, build_sectors(basis), basis, params.omega))


@pytest.fixture(scope="module")
def plus():
    return eigen(0.01)


def test_prediction_metastable(plus):
    params, basis, summary = plus
    pred = perturbative_prediction(summary, basis, params, "MS")
    assert pred.dominant_index == 8
    assert np.all(pred.weights >= 0)
    assert np.allclose(pred.frequencies, omega_lines(summary, "MS"), atol=1e-8)
    # weights shrink towards l = 1 along the MS-side ladder; l = 7 is the
    # single-flip state on the other Z2 background and barely couples to MS
    assert np.all(np.diff(pred.weights[:6]) > 0)
    assert pred.hamming[6] == 16 and pred.weights[6] < pred.weights[5] / 100
    # Hamming distance anticorrelates with the weights
    assert rank_correlation(pred.hamming, pred.weights) < 0


def test_prediction_ground(plus):
    params, basis, summary = plus
    pred = perturbative_prediction(summary, basis, params.with_beta(-0.01), "GS")
    assert pred.reference == "GS"
    assert np.allclose(pred.frequencies, omega_lines(summary, "GS"), atol=1e-8)
    assert pred.ranking()[0] == pred.dominant_index


def test_prediction_vanishes_without_staggering():
    params, basis, summary = eigen(0.0, n_s=12)
    pred = perturbative_prediction(summary, basis, params, "MS")
    assert np.all(pred.weights == 0.0)


def test_prediction_requires_classification(plus):
    params, basis, summary = plus
    from dataclasses import replace
    with pytest.raises(DependencyError):
        perturbative_prediction(replace(summary, tags=None), basis, params, "MS")


def test_hamming_proxy(plus):
    _, basis, summary = plus
    z2 = z2_labels(16)[0]
    ms = int(summary.index_of("MS")[0])
    assert hamming_proxy(summary.state_vector(ms), z2, basis) == 0
    flipped = np.zeros(basis.dim)
    flipped[basis.index(z2 ^ (1 << 15))] = 1.0
    assert hamming_proxy(flipped, z2, basis) == 1


def test_rank_correlation_degenerate_input():
    assert rank_correlation([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert rank_correlation([1, 1, 1], [1, 2, 3]) == 0.0


def test_to_dict_shapes(plus):
    params, basis, summary = plus
    spec, _ = model(0.01)
    table = classical_potentials(spec, params).to_dict()
    assert [row["n"] for row in table["table"]] == list(range(1, 16, 2))
    pred = perturbative_prediction(summary, basis, params, "MS").to_dict()
    assert pred["dominant_index"] == 8 and len(pred["table"]) == 8
