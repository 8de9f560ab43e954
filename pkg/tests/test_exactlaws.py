import math

import numpy as np
import pytest
from scipy import stats

from polygas import ensembles as en
from polygas import exactlaws as ex
from polygas import functionals as fn
from polygas.errors import BadMixtureStructure


def test_normalization_pinned_by_degree_one_law():
    # the density of the single root of a degree-1 complex Gaussian
    # polynomial is the complex Cauchy law, for both bases
    for basis in ("kac", "elliptic"):
        spec = en.ModelSpec(basis, "complex", 1)
        for z in (0.3 + 0.2j, 2.0 - 1.0j, 0.0j):
            got = ex.complex_root_logdensity([z], spec).log_density
            want = -math.log(math.pi) - 2.0 * math.log1p(abs(z) ** 2)
            assert got == pytest.approx(want, abs=1e-12)


def test_density_is_gibbs_form():
    rng = np.random.default_rng(0)
    spec = en.ModelSpec("kac", "complex", 4)
    for _ in range(20):
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ld = ex.complex_root_logdensity(z, spec, normalized=False).log_density
        assert ld == pytest.approx(-spec.beta_n * fn.hamiltonian(z, spec), abs=1e-12)


def test_density_example_n2():
    spec = en.ModelSpec("kac", "complex", 2)
    ld = ex.complex_root_logdensity([1.0, -1.0], spec, normalized=False).log_density
    assert ld == pytest.approx(-math.log(2.0))


def test_density_permutation_and_rotation_invariance():
    rng = np.random.default_rng(1)
    spec = en.ModelSpec("kac", "complex", 3)
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    base = ex.complex_root_logdensity(z, spec).log_density
    perm = ex.complex_root_logdensity(z[[2, 0, 1]], spec).log_density
    assert perm == pytest.approx(base, abs=1e-12)
    rot = ex.complex_root_logdensity(np.exp(0.7j) * z, spec).log_density
    assert rot == pytest.approx(base, abs=1e-9)


def test_inversion_invariance_of_root_moduli():
    # the law of a uniformly chosen root's modulus at n=3 matches the law of
    # its inverse, on independent batches
    draws = 10_000
    spec = en.ModelSpec("kac", "complex", 3)
    rng = np.random.default_rng(2)

    def batch(seed0):
        out = np.empty(draws)
        for i in range(draws):
            roots = en.find_roots(en.sample_coefficients(spec, seed0 + i)).atoms
            out[i] = abs(roots[rng.integers(3)])
        return out

    a = batch(0)
    b = 1.0 / batch(5_000_000)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_mixture_constants_examples():
    spec = en.ModelSpec("kac", "real", 2)
    mc = ex.mixture_constants(spec)
    assert math.exp(mc.log_z[1]) == pytest.approx(math.pi)
    assert len(mc.log_z) == 2
    assert ex.mixture_constants(en.ModelSpec("kac", "real", 200)).uniform_control < 0.05
    s100 = ex.mixture_constants(en.ModelSpec("kac", "real", 100)).uniform_control
    s400 = ex.mixture_constants(en.ModelSpec("kac", "real", 400)).uniform_control
    assert s400 < s100


def test_real_mixture_logdensity_structure():
    spec = en.ModelSpec("kac", "real", 4)
    good = np.array([0.5, -1.0, 1 + 1j, 1 - 1j])
    val = ex.real_mixture_logdensity(good, spec, k=1)
    expect = -0.5 * spec.beta_n * fn.hamiltonian(good, spec) - ex.mixture_constants(spec).log_z[1]
    assert val.log_density == pytest.approx(expect, abs=1e-12)
    with pytest.raises(BadMixtureStructure):
        ex.real_mixture_logdensity(np.array([0.5, -1.0, 1 + 1j, 2 - 1j]), spec, k=1)
    with pytest.raises(BadMixtureStructure):
        ex.real_mixture_logdensity(np.array([0.5, 1 + 1j, -1.0, 1 - 1j]), spec, k=1)


def test_real_mixture_accepts_root_finder_output():
    spec = en.ModelSpec("kac", "real", 8)
    for seed in range(10):
        roots = en.find_roots(en.sample_coefficients(spec, seed)).atoms
        reals = np.sort(roots[np.abs(roots.imag) <= 1e-10].real)
        ups = roots[roots.imag > 1e-10]
        layout = np.concatenate([reals.astype(complex), ups, np.conj(ups)])
        k = len(ups)
        rec = ex.real_mixture_logdensity(layout, spec, k=k)
        assert np.isfinite(rec.log_density)
        assert rec.k == k


def test_bernstein_markov_monomial_and_equality():
    n = 12
    mono = en.ComplexPolynomial.from_coefficients(np.eye(n + 1)[-1])
    chk = ex.bernstein_markov_check(mono, en.ModelSpec("kac", "complex", n))
    assert chk.sup_value == pytest.approx(1.0)
    assert chk.l2_norm == pytest.approx(1.0)
    assert chk.ok
    ones = en.ComplexPolynomial.from_coefficients(np.ones(11))
    chk2 = ex.bernstein_markov_check(ones, en.ModelSpec("kac", "complex", 10))
    assert chk2.sup_value == pytest.approx(11.0, abs=1e-12)
    assert chk2.ratio == pytest.approx(math.sqrt(11.0), abs=1e-12)
    assert chk2.ok


def test_bernstein_markov_random_suite():
    rng = np.random.default_rng(3)
    for basis in ("kac", "elliptic"):
        for _ in range(200):
            n = int(rng.integers(1, 31))
            spec = en.ModelSpec(basis, "complex", n)
            poly = en.sample_coefficients(spec, int(rng.integers(0, 2**62)))
            assert ex.bernstein_markov_check(poly, spec).ok


def test_elliptic_inner_product_examples():
    assert ex.elliptic_inner_product(0, 0) == pytest.approx(1.0)
    assert ex.elliptic_inner_product(0, 1) == pytest.approx(0.5)
    assert ex.elliptic_inner_product(1, 2) == pytest.approx(1.0 / 6.0)
    for n in (1, 5, 12):
        for k in range(n + 1):
            exact = ex.elliptic_inner_product(k, n)
            quad = ex.elliptic_inner_product_quadrature(k, n)
            assert abs(exact - quad) <= 1e-8 * exact
