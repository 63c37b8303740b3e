import math
import warnings

import numpy as np
import pytest
from scipy import integrate, stats

from coherent_sampling.exceptions import NonSymmetric, NotPositiveDefinite, NotPure, TailMassError, UnsupportedOverlap
from coherent_sampling.gaussian import (
    GaussianPureState,
    GaussianSuperposition,
    MeasurementSpec,
    amplitude,
    coherent,
    component_sample,
    displaced_squeezed,
    gkp_k_factor,
    het_amplitude,
    k_factor,
    make_cat,
    make_gkp,
    position_wavefunction,
    product_state,
    random_gaussian_state,
    scan_gkp_truncation,
    single_density,
    superposition_density,
    vacuum,
)

HET = MeasurementSpec.heterodyne()
HOM = MeasurementSpec.homodyne()


def coherent_wavefunction(x, mx, mp):
    """Textbook coherent state with quadrature means (mx, mp); its vacuum overlap is positive."""
    return np.pi**-0.25 * np.exp(-((x - mx) ** 2) / 2 + 1j * mp * x - 0.5j * mx * mp)


def cquad(f, lo=-np.inf, hi=np.inf):
    # a near-zero part cannot reach the relative tolerance; the absolute one is what matters
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda x: f(x).real, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
        im = integrate.quad(lambda x: f(x).imag, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return re + 1j * im


def psi(state):
    return lambda x: position_wavefunction(state, np.array([x]))


def random_states(n, seed=0):
    rng = np.random.default_rng(seed)
    return [random_gaussian_state(rng, 1, max_squeeze=0.8, max_disp=2.0) for _ in range(n)]


# -- validation --------------------------------------------------------------------


def test_validation_errors():
    with pytest.raises(NonSymmetric):
        GaussianPureState([[1.0, 0.2], [0.0, 1.0]], [0, 0])
    with pytest.raises(NotPositiveDefinite):
        GaussianPureState([[-1.0, 0.0], [0.0, -1.0]], [0, 0])
    with pytest.raises(NotPure):
        GaussianPureState([[2.0, 0.0], [0.0, 2.0]], [0, 0])
    with pytest.raises(ValueError):
        GaussianPureState(np.eye(3), [0, 0, 0])
    with pytest.raises(ValueError):
        GaussianPureState(np.eye(2), [0, 0, 0])


def test_entangled_state_has_no_product_amplitude():
    r = 0.5
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    # two-mode squeezed vacuum
    g = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
    st = GaussianPureState(g, np.zeros(4))
    assert not st.is_product
    with pytest.raises(UnsupportedOverlap):
        het_amplitude(st, np.zeros(4))
    # the density formula itself does not need a product structure
    assert single_density(st, HET, np.zeros(4)) > 0


def test_measurement_spec():
    assert MeasurementSpec("het") == HET
    assert MeasurementSpec("hom").kind == "homodyne"
    assert HET.outcome_dim(2) == 4 and HOM.outcome_dim(2) == 2
    with pytest.raises(ValueError):
        MeasurementSpec("general")
    with pytest.raises(ValueError):
        MeasurementSpec.general(-1.0)
    with pytest.raises(ValueError):
        MeasurementSpec("bogus")


# -- wavefunctions against independent oracles ---------------------------------------


def test_closed_form_wavefunctions():
    x = np.linspace(-4, 4, 33)[:, None]
    for z, delta in [(0.0, 1.0), (1.5, 0.3), (-2.0, 0.7)]:
        want = np.exp(-((x[:, 0] - z) ** 2) / (2 * delta**2)) / (np.pi * delta**2) ** 0.25
        np.testing.assert_allclose(position_wavefunction(displaced_squeezed(z, delta), x), want, atol=1e-14)
    alpha = 0.7 - 1.1j
    mx, mp = math.sqrt(2) * alpha.real, math.sqrt(2) * alpha.imag
    np.testing.assert_allclose(
        position_wavefunction(coherent(alpha), x), coherent_wavefunction(x[:, 0], mx, mp), atol=1e-14
    )


@pytest.mark.parametrize("state", random_states(20), ids=lambda s: "")
def test_wavefunction_moments(state):
    f = psi(state)
    norm = integrate.quad(lambda x: abs(f(x)) ** 2, -np.inf, np.inf, epsabs=1e-13)[0]
    assert norm == pytest.approx(1, abs=1e-9)
    mean_x = integrate.quad(lambda x: x * abs(f(x)) ** 2, -np.inf, np.inf, epsabs=1e-13)[0]
    var_x = integrate.quad(lambda x: (x - mean_x) ** 2 * abs(f(x)) ** 2, -np.inf, np.inf, epsabs=1e-13)[0]
    h = 1e-5
    dpsi = lambda x: (f(x + h) - f(x - h)) / (2 * h)
    mean_p = cquad(lambda x: np.conj(f(x)) * -1j * dpsi(x)).real
    assert mean_x == pytest.approx(state.disp[0], abs=1e-8)
    assert var_x == pytest.approx(state.gamma[0, 0] / 2, abs=1e-8)
    assert mean_p == pytest.approx(state.disp[1], abs=1e-6)
    # the phase convention: positive overlap with the vacuum
    ov = cquad(lambda x: np.pi**-0.25 * np.exp(-(x**2) / 2) * f(x))
    assert abs(ov.imag) < 1e-10 and ov.real > 0


@pytest.mark.parametrize("state", random_states(20, seed=1), ids=lambda s: "")
def test_het_amplitude_matches_quadrature(state):
    f = psi(state)
    rng = np.random.default_rng(2)
    for m in rng.uniform(-3, 3, size=(3, 2)):
        oracle = cquad(lambda x: np.conj(coherent_wavefunction(x, *m)) * f(x))
        assert abs(het_amplitude(state, m) - oracle) < 1e-8


def test_vacuum_and_coherent_values():
    assert het_amplitude(vacuum(), np.zeros(2)) == pytest.approx(1.0, abs=1e-15)
    assert single_density(vacuum(), HET, np.zeros(2)) == pytest.approx(1 / math.pi, rel=1e-14)
    alpha = 1 + 1j
    assert het_amplitude(coherent(alpha), np.zeros(2)) == pytest.approx(math.exp(-1), abs=1e-15)
    beta = 0.3 - 0.4j
    m = math.sqrt(2) * np.array([beta.real, beta.imag])
    q = math.exp(-abs(alpha - beta) ** 2) / math.pi
    assert single_density(coherent(alpha), HET, m) == pytest.approx(q, rel=1e-12)


# -- densities --------------------------------------------------------------------


@pytest.mark.parametrize("state", random_states(10, seed=3), ids=lambda s: "")
def test_density_formula_matches_amplitude(state):
    rng = np.random.default_rng(4)
    m = rng.uniform(-3, 3, size=(20, 2))
    np.testing.assert_allclose(single_density(state, HET, m), np.abs(het_amplitude(state, m)) ** 2 / np.pi,
                               rtol=1e-10, atol=1e-16)
    x = m[:, :1]
    np.testing.assert_allclose(single_density(state, HOM, x), np.abs(position_wavefunction(state, x)) ** 2,
                               rtol=1e-10, atol=1e-16)
    for z in (0.5, 2.0):
        meas = MeasurementSpec.general(z)
        np.testing.assert_allclose(single_density(state, meas, m), np.abs(amplitude(state, meas, m)) ** 2 / np.pi,
                                   rtol=1e-10, atol=1e-16)


def _integrate_2d(f, center, half, n=501):
    ax = [np.linspace(c - half, c + half, n) for c in center]
    X, Y = np.meshgrid(*ax, indexing="ij")
    v = f(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
    return integrate.trapezoid(integrate.trapezoid(v, ax[1], axis=1), ax[0])


@pytest.mark.parametrize("meas", [HET, HOM, MeasurementSpec.general(0.5), MeasurementSpec.general(2.0)],
                         ids=["het", "hom", "z0.5", "z2"])
def test_densities_integrate_to_one(meas):
    for st in random_states(5, seed=5):
        f = lambda X: single_density(st, meas, X)
        if meas.kind == "homodyne":
            total = integrate.quad(lambda x: f(np.array([x])), -np.inf, np.inf, epsabs=1e-13)[0]
        else:
            total = _integrate_2d(f, st.disp, 30.0, n=801) / 2
        assert total == pytest.approx(1, abs=1e-6)


def test_multimode_product_density_factorizes():
    a, b = coherent(0.5 + 0.2j), displaced_squeezed(0.4, 0.6)
    joint = product_state(a, b)
    rng = np.random.default_rng(0)
    m = rng.normal(size=(10, 4))
    np.testing.assert_allclose(single_density(joint, HET, m),
                               single_density(a, HET, m[:, :2]) * single_density(b, HET, m[:, 2:]), rtol=1e-12)
    np.testing.assert_allclose(single_density(joint, HOM, m[:, ::2]),
                               single_density(a, HOM, m[:, :1]) * single_density(b, HOM, m[:, 2:3]), rtol=1e-12)
    np.testing.assert_allclose(het_amplitude(joint, m), het_amplitude(a, m[:, :2]) * het_amplitude(b, m[:, 2:]),
                               rtol=1e-12)


# -- samplers ------------------------------------------------------------------------


def _bin_chisquare(samples, density, edges_x, edges_y=None):
    """Chi-square p-value of samples against bin probabilities integrated from the density."""
    nodes, weights = np.polynomial.legendre.leggauss(10)

    def gl(edges):
        lo, hi = edges[:-1], edges[1:]
        pts = ((lo + hi) / 2)[:, None] + ((hi - lo) / 2)[:, None] * nodes
        return pts, ((hi - lo) / 2)[:, None] * weights

    px, wx = gl(edges_x)
    if edges_y is None:
        probs = (density(px.reshape(-1, 1)).reshape(px.shape) * wx).sum(axis=1)
        counts, _ = np.histogram(samples[:, 0], edges_x)
    else:
        py, wy = gl(edges_y)
        X, Y = np.meshgrid(px.ravel(), py.ravel(), indexing="ij")
        v = density(np.column_stack([X.ravel(), Y.ravel()])).reshape(X.shape)
        v = v * wx.ravel()[:, None] * wy.ravel()[None, :]
        probs = v.reshape(len(edges_x) - 1, 10, len(edges_y) - 1, 10).sum(axis=(1, 3)).ravel()
        counts = np.histogram2d(samples[:, 0], samples[:, 1], [edges_x, edges_y])[0].ravel()
    n = samples.shape[0]
    inside = counts.sum()
    exp = np.append(probs * n, n - probs.sum() * n)
    obs = np.append(counts, n - inside)
    keep = exp > 5
    obs, exp = obs[keep], exp[keep]
    return stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue


@pytest.mark.parametrize("meas", [HET, HOM, MeasurementSpec.general(0.5), MeasurementSpec.general(2.0)],
                         ids=["het", "hom", "z0.5", "z2"])
def test_component_sampler_chisquare(meas):
    rng = np.random.default_rng(6)
    for st in random_states(3, seed=7):
        X = component_sample(st, meas, rng, size=40_000)
        f = lambda Y: single_density(st, meas, Y)
        sd = np.sqrt(np.var(X, axis=0))
        ex = np.linspace(st.disp[0] - 3 * sd[0], st.disp[0] + 3 * sd[0], 13)
        if meas.kind == "homodyne":
            p = _bin_chisquare(X, f, ex)
        else:
            ey = np.linspace(st.disp[1] - 3 * sd[1], st.disp[1] + 3 * sd[1], 9)
            p = _bin_chisquare(X, f, ex, ey)
        assert p > 1e-3


def test_component_sample_shapes():
    rng = np.random.default_rng(0)
    st = coherent([0.5, 1j])
    assert component_sample(st, HET, rng).shape == (4,)
    assert component_sample(st, HET, rng, size=5).shape == (5, 4)
    assert component_sample(st, HOM, rng, size=5).shape == (5, 2)


# -- superpositions and example models ------------------------------------------------


def test_cat_values():
    sup, model = make_cat(1 + 1j)
    e4 = math.exp(-4)
    assert sup.norm_squared == pytest.approx(1, abs=1e-14)
    assert k_factor(sup) == pytest.approx(2 / (1 + e4), rel=1e-14)
    assert float(np.sum(np.abs(sup.coeffs))) ** 2 == pytest.approx(2 / (1 + e4), rel=1e-14)
    assert sup.gram[0, 1] == pytest.approx(e4, rel=1e-12)
    f0 = superposition_density(sup, HET, np.zeros(2))
    assert f0 == pytest.approx(2 * math.exp(-2) / ((1 + e4) * math.pi), rel=1e-12)
    assert f0 == pytest.approx(0.084607, abs=1e-6)


def test_superposition_density_matches_quadrature():
    rng = np.random.default_rng(8)
    comps = tuple(random_states(3, seed=9))
    sup = GaussianSuperposition(comps, rng.normal(size=3) + 1j * rng.normal(size=3)).normalized()
    for m in rng.uniform(-2, 2, size=(5, 2)):
        amp = sum(c * cquad(lambda x: np.conj(coherent_wavefunction(x, *m)) * psi(s)(x))
                  for c, s in zip(sup.coeffs, comps))
        assert superposition_density(sup, HET, m) == pytest.approx(abs(amp) ** 2 / np.pi, rel=1e-8, abs=1e-14)
    gram = np.array([[cquad(lambda x: np.conj(psi(a)(x)) * psi(b)(x)) for b in comps] for a in comps])
    np.testing.assert_allclose(sup.gram, gram, atol=1e-9)
    assert _integrate_2d(lambda X: superposition_density(sup, HET, X), (0, 0), 30.0, n=801) / 2 == pytest.approx(
        1, abs=1e-6)


def test_gkp_gram_and_scan():
    delta = 0.3
    wf = lambda x, z: np.exp(-((x - z) ** 2) / (2 * delta**2)) / (np.pi * delta**2) ** 0.25
    ov = integrate.quad(lambda x: wf(x, 0) * wf(x, 1), -np.inf, np.inf, epsabs=1e-15)[0]
    assert ov == pytest.approx(math.exp(-1 / (4 * delta**2)), rel=1e-9)
    table = {zm: K for zm, _, K in scan_gkp_truncation(0.6, 0.3)}
    assert table[7] == pytest.approx(13.47, rel=5e-3)
    assert abs(table[6] - 13.47) / 13.47 > 5e-3 and abs(table[8] - 13.47) / 13.47 > 5e-3
    sup, model = make_gkp(0.6, 0.3, 7, tail_tol=1e-5)
    assert model.k_factor == pytest.approx(table[7], rel=1e-12)
    assert gkp_k_factor(0.6, 0.3, 7) == pytest.approx(table[7])
    with pytest.raises(TailMassError):
        make_gkp(0.6, 0.3, 7)
    x = np.linspace(-9, 9, 4001)[:, None]
    f = superposition_density(sup, HOM, x)
    assert f.min() >= 0
    assert integrate.trapezoid(f, x[:, 0]) == pytest.approx(1, abs=1e-6)
