import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schmidtlab.analysis import model_kernel, svd_spectrum
from schmidtlab.model import ScatteringModel
from schmidtlab.quadrature import build_grid, default_extents
from schmidtlab.schmidt import (
    NumericalError,
    SchmidtSpectrum,
    discretize,
    entropy_report,
    marginal_matrix,
    modes,
    purity_from_marginal,
    spectrum,
)


def hermite0(x):
    return np.pi**-0.25 * np.exp(-(x**2) / 2)


def hermite1(x):
    return math.sqrt(2) * x * hermite0(x)


@pytest.fixture(scope="module")
def grids():
    return build_grid("gauss_legendre", 64, 10.0), build_grid("gauss_legendre", 96, 9.0)


def product_state(k, q):
    return hermite0(k - 0.5) * (1 + 0.3j * q) * np.exp(-(q**2) / 3)


def bell_state(k, q):
    return (hermite0(k) * hermite0(q) + hermite1(k) * hermite1(q)) / math.sqrt(2)


@pytest.fixture(scope="module")
def paper_kernel_10():
    return model_kernel(ScatteringModel(10.0))


# -- discretize ----------------------------------------------------------------

def test_constant_amplitude_norm():
    kg, qg = build_grid("trapezoid", 11, 2.0), build_grid("gauss_legendre", 9, 3.0)
    kern = discretize(lambda k, q: 0.5 - 0.5j, kg, qg)
    assert kern.matrix.shape == (11, 9)
    assert kern.norm == pytest.approx(4 * 2 * 3 * 0.5, rel=1e-13)


def test_discretize_entries_are_weighted_samples(grids):
    kg, qg = grids
    kern = discretize(product_state, kg, qg)
    i, j = 7, 30
    expected = math.sqrt(kg.weights[i] * qg.weights[j]) * product_state(kg.nodes[i], qg.nodes[j])
    assert kern.matrix[i, j] == pytest.approx(expected, rel=1e-15)


def test_discretize_reports_nan_node(grids):
    kg, qg = grids
    with pytest.raises(NumericalError, match="k="):
        discretize(lambda k, q: np.where((k > 0) & (q > 0), np.nan, 1.0), kg, qg)


def test_paper_kernel_norm_matches_box_fraction():
    kern = model_kernel(ScatteringModel(1.0))
    # the box holds all but ~2/(pi * 80) of the state
    assert kern.norm == pytest.approx(1 - 2 / (math.pi * 80), abs=2e-4)
    assert not kern.check_normalized()


@pytest.mark.xfail(strict=True, reason="default k box truncates the 1/k^2 tail by ~8e-3 at eta=1")
def test_paper_kernel_norm_within_1e4():
    assert abs(model_kernel(ScatteringModel(1.0)).norm - 1) <= 1e-4


# -- spectrum --------------------------------------------------------------------

def test_rank_one_separable(grids):
    spec = spectrum(discretize(product_state, *grids))
    assert spec.schmidt_number - 1 <= 1e-8
    assert spec.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    assert spec.eigenvalues[1] <= 1e-14


def test_bell_like_state(grids):
    spec = spectrum(discretize(bell_state, *grids))
    np.testing.assert_allclose(spec.eigenvalues[:2], [0.5, 0.5], atol=1e-12)
    assert spec.schmidt_number == pytest.approx(2.0, abs=1e-8)
    assert spec.trace == pytest.approx(1.0, abs=1e-12)


def test_paper_spectrum_eta10(paper_kernel_10, k_oracle):
    spec = spectrum(paper_kernel_10)
    assert spec.schmidt_number == pytest.approx(k_oracle[10.0], rel=1e-3)
    assert spec.schmidt_number == pytest.approx(3.4869, rel=1e-3)
    assert np.all(np.diff(spec.eigenvalues) <= 0)
    assert np.all(spec.eigenvalues >= 0)
    assert spec.trace == pytest.approx(1.0, abs=5e-3)


def test_schmidt_number_is_scale_invariant(grids):
    a = spectrum(discretize(bell_state, *grids))
    b = spectrum(discretize(lambda k, q: 3.7j * bell_state(k, q), *grids))
    assert b.schmidt_number == pytest.approx(a.schmidt_number, rel=1e-12)
    assert b.trace == pytest.approx(3.7**2 * a.trace, rel=1e-12)


def test_from_eigenvalues_clamps_noise():
    spec = SchmidtSpectrum.from_eigenvalues([0.5, -1e-16, 0.5])
    assert spec.n_clamped == 1
    assert spec.eigenvalues[-1] == 0.0
    with pytest.raises(ValueError):
        SchmidtSpectrum.from_eigenvalues([0.5, -1e-3])
    with pytest.raises(ValueError):
        SchmidtSpectrum.from_eigenvalues([])


def test_significance_floor():
    spec = SchmidtSpectrum.from_eigenvalues([1.0, 1e-6, 1e-13, 0.0])
    assert spec.n_significant == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=30))
def test_spectrum_invariants(values):
    spec = SchmidtSpectrum.from_eigenvalues(values)
    lam = np.asarray(values)
    assert spec.schmidt_number == pytest.approx(lam.sum() ** 2 / np.sum(lam**2), rel=1e-12)
    assert spec.schmidt_number >= 1 - 1e-12
    assert np.all(np.diff(spec.eigenvalues) <= 0)


# -- modes -----------------------------------------------------------------------

def test_separable_modes_recover_factors(grids):
    kg, qg = grids
    kern = discretize(product_state, kg, qg)
    md = modes(kern, 1)
    g = hermite0(kg.nodes - 0.5)
    h = (1 + 0.3j * qg.nodes) * np.exp(-(qg.nodes**2) / 3)
    g = g / math.sqrt(kg.inner(g, g).real)
    h = h / math.sqrt(qg.inner(h, h).real)
    assert abs(kg.inner(md.field_modes[0], g)) == pytest.approx(1.0, abs=1e-10)
    assert abs(qg.inner(md.atom_modes[0], h)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("amp", [product_state, bell_state, "paper"])
def test_modes_satisfy_decomposition(amp, grids, paper_kernel_10):
    kern = paper_kernel_10 if amp == "paper" else discretize(amp, *grids)
    kg, qg = kern.k_grid, kern.q_grid
    md = modes(kern, 5)
    sampled = kern.matrix / np.outer(kg.sqrt_weights, qg.sqrt_weights)
    for i in range(md.count):
        applied = sampled @ (qg.weights * np.conj(md.atom_modes[i]))
        resid = np.sqrt(kg.inner(applied - md.singular_values[i] * md.field_modes[i],
                                 applied - md.singular_values[i] * md.field_modes[i]).real)
        assert resid <= 1e-8
        pairing = kg.inner(md.field_modes[i], applied)
        assert pairing.real > 0 and abs(pairing.imag) <= 1e-12 * pairing.real


def test_mode_gram_matrices(paper_kernel_10):
    md = modes(paper_kernel_10, 12)
    kg, qg = paper_kernel_10.k_grid, paper_kernel_10.q_grid
    gram_f = (md.field_modes.conj() * kg.weights) @ md.field_modes.T
    gram_a = (md.atom_modes.conj() * qg.weights) @ md.atom_modes.T
    assert np.max(np.abs(gram_f - np.eye(12))) <= 1e-8
    assert np.max(np.abs(gram_a - np.eye(12))) <= 1e-8


def test_paper_mode_count_eta10(paper_kernel_10):
    # eight eigenvalues above 0.01; cross-checked against a Nystrom eigen-
    # decomposition of the closed-form marginal (n = 256..1024)
    spec = spectrum(paper_kernel_10)
    assert int(np.count_nonzero(spec.eigenvalues > 0.01)) == 8


def test_modes_beyond_rank_are_flagged(grids):
    md = modes(discretize(product_state, *grids), 3)
    assert md.count == 1 and md.truncated
    assert md.field_modes.shape == (1, 64)


def test_modes_zero_and_invalid(grids):
    kern = discretize(bell_state, *grids)
    md = modes(kern, 0)
    assert md.count == 0 and md.field_modes.shape[0] == 0
    with pytest.raises(ValueError):
        modes(kern, 65)
    with pytest.raises(ValueError):
        modes(kern, -1)


# -- marginal purity -------------------------------------------------------------

def test_pure_projector_purity():
    g = build_grid("gauss_legendre", 96, 10.0)
    phi = lambda x: hermite1(x) * np.exp(0.4j * x)
    assert purity_from_marginal(lambda a, b: phi(a) * np.conj(phi(b)), g) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("eta", [1.0, 10.0])
def test_paper_marginal_purity(eta, k_oracle):
    g = build_grid("gauss_legendre", 512, default_extents(eta)[1])
    p = purity_from_marginal(ScatteringModel(eta).marginal_density, g)
    assert p == pytest.approx(1 / k_oracle[eta], abs=1e-6)


def test_purity_values_eta1_eta10():
    g1 = build_grid("gauss_legendre", 512, default_extents(1.0)[1])
    g10 = build_grid("gauss_legendre", 512, default_extents(10.0)[1])
    assert purity_from_marginal(ScatteringModel(1.0).marginal_density, g1) == pytest.approx(0.9053541, abs=1e-6)
    assert purity_from_marginal(ScatteringModel(10.0).marginal_density, g10) == pytest.approx(0.2867900, abs=1e-6)


def test_purity_rejects_non_hermitian():
    g = build_grid("gauss_legendre", 32, 5.0)
    with pytest.raises(ValueError, match="Hermitian"):
        purity_from_marginal(lambda a, b: np.exp(-(a**2) - b**2) * (1 + 0.1j * a), g)


def test_purity_rejects_unnormalized():
    g = build_grid("gauss_legendre", 64, 10.0)
    with pytest.raises(NumericalError):
        purity_from_marginal(lambda a, b: 2 * hermite0(a) * hermite0(b), g)


def test_marginal_matrix_sides(grids):
    kern = discretize(bell_state, *grids)
    for side in ("field", "atom"):
        m = marginal_matrix(kern, side)
        assert np.allclose(m, m.conj().T)
        assert np.trace(m).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        marginal_matrix(kern, "both")


def test_atom_marginal_matrix_matches_closed_form():
    m = ScatteringModel(2.0)
    kern = model_kernel(m, n=256)
    qg = kern.q_grid
    num = marginal_matrix(kern, "atom") / np.outer(qg.sqrt_weights, qg.sqrt_weights)
    ref = m.marginal_density(qg.nodes[:, None], qg.nodes[None, :])
    # truncation of the k box removes ~N^2 exp(..) * 2/L from every entry
    assert np.max(np.abs(num - ref)) <= 2e-2 * np.max(np.abs(ref))


# -- route equivalence -----------------------------------------------------------

@pytest.mark.parametrize("eta", [
    0.5, 1.0, 5.0,
    pytest.param(10.0, marks=pytest.mark.xfail(strict=True, reason="k axis under-resolved at n=512: 2.3e-4")),
])
def test_route_equivalence(eta):
    m = ScatteringModel(eta)
    k_svd = svd_spectrum(m).schmidt_number
    g = build_grid("gauss_legendre", 512, default_extents(eta)[1])
    k_purity = 1 / purity_from_marginal(m.marginal_density, g)
    assert abs(k_svd - k_purity) / k_purity <= 1e-4


@pytest.mark.slow
@pytest.mark.parametrize("eta", [
    0.5, 1.0, 5.0,
    pytest.param(10.0, marks=pytest.mark.xfail(strict=True, reason="512 -> 1024 moves K by 2.1e-4")),
    pytest.param(20.0, marks=pytest.mark.xfail(strict=True, reason="512 -> 1024 moves K by 9.6e-3")),
])
def test_grid_doubling_stability(eta):
    m = ScatteringModel(eta)
    a = svd_spectrum(m, 512).schmidt_number
    b = svd_spectrum(m, 1024).schmidt_number
    assert abs(b - a) / b <= 1e-4


# -- entropies -------------------------------------------------------------------

def test_entropies_pure():
    rep = entropy_report(SchmidtSpectrum.from_eigenvalues([1.0]), [1.5, 2, 3, 7])
    assert rep.tsallis == (0.0,) * 4 and rep.renyi == (0.0,) * 4
    assert rep.linear == 0.0 and rep.von_neumann == 0.0


def test_entropies_two_term():
    spec = SchmidtSpectrum.from_eigenvalues([0.5, 0.5])
    rep = entropy_report(spec, [2])
    assert rep.tsallis[0] == pytest.approx(0.5, abs=1e-15)
    assert rep.renyi[0] == pytest.approx(math.log(2), abs=1e-15)
    assert rep.linear == pytest.approx(1 - 1 / spec.schmidt_number, abs=1e-15)
    assert rep.von_neumann == pytest.approx(math.log(2), abs=1e-15)


def test_entropies_uniform_four():
    rep = entropy_report(SchmidtSpectrum.from_eigenvalues([0.25] * 4), [3])
    assert rep.tsallis[0] == pytest.approx(0.46875, abs=1e-15)
    assert rep.renyi[0] == pytest.approx(math.log(4), abs=1e-14)
    assert rep.trace_powers[0] == pytest.approx(1 / 16, abs=1e-16)


def test_entropy_orders_must_exceed_one():
    spec = SchmidtSpectrum.from_eigenvalues([0.5, 0.5])
    for bad in ([1.0], [0.5, 2], [-1]):
        with pytest.raises(ValueError):
            entropy_report(spec, bad)


def random_spectrum(weights):
    return SchmidtSpectrum.from_eigenvalues(weights)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(1e-4, 1.0), min_size=2, max_size=80))
def test_entropy_invariants(weights):
    spec = random_spectrum(weights)
    rep = entropy_report(spec, [1 + 1e-6, 1.5, 2, 3])
    assert rep.linear == pytest.approx(1 - 1 / spec.schmidt_number, abs=1e-12)
    assert rep.tsallis[2] == pytest.approx(rep.linear, abs=1e-12)
    assert min(rep.tsallis + rep.renyi + (rep.linear, rep.von_neumann)) >= -1e-12
    if 1.1 <= spec.schmidt_number <= 50:
        assert rep.tsallis[0] == pytest.approx(rep.von_neumann, rel=1e-4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1e-3, 1.0), min_size=2, max_size=40), st.floats(1.01, 6))
def test_renyi_tsallis_relation(weights, p):
    rep = entropy_report(random_spectrum(weights), [p])
    # S_p = (1 - exp((1-p) R_p)) / (p - 1)
    assert rep.tsallis[0] == pytest.approx(-math.expm1((1 - p) * rep.renyi[0]) / (p - 1), rel=1e-10, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(0.3, 2), st.floats(-1, 1), st.floats(0.3, 2))
def test_any_separable_gaussian_is_rank_one(k0, kw, q0, qw):
    kg, qg = build_grid("gauss_legendre", 48, 12.0), build_grid("gauss_legendre", 40, 12.0)
    amp = lambda k, q: np.exp(-((k - k0) / kw) ** 2) * np.exp(-((q - q0) / qw) ** 2 + 1j * q)
    assert spectrum(discretize(amp, kg, qg)).schmidt_number - 1 <= 1e-8
