import math

import numpy as np
import pytest

from polygas import ensembles as en
from polygas.errors import SingularGram


def test_complex_coefficient_variance():
    spec = en.ModelSpec("kac", "complex", 1)
    draws = 100_000
    re0 = np.empty(draws)
    for seed in range(draws):
        poly = en.sample_coefficients(spec, seed)
        assert len(poly.log_abs) == 2
        re0[seed] = (poly.coefficients()[0] * math.exp(poly.log_scale)).real
    var = re0.var()
    tol = 3.0 * 0.5 * math.sqrt(2.0 / draws)
    assert abs(var - 0.5) <= tol


def test_real_coefficients_are_real():
    spec = en.ModelSpec("kac", "real", 5)
    poly = en.sample_coefficients(spec, 0)
    coeffs = poly.coefficients()
    assert np.all(coeffs.imag == 0.0)


def test_elliptic_binomial_folding():
    spec = en.ModelSpec("elliptic", "complex", 2)
    draws = 100_000
    vals = np.empty(draws)
    for seed in range(draws):
        p = en.sample_coefficients(spec, seed)
        vals[seed] = (p.coefficients()[1] * math.exp(p.log_scale)).real
    # variance of Re(a_1 sqrt(binom(2,1))) = 2 * 1/2 = 1
    tol = 3.0 * 1.0 * math.sqrt(2.0 / draws)
    assert abs(vals.var() - 1.0) <= tol


def test_reproducibility():
    spec = en.ModelSpec("kac", "complex", 20)
    a = en.sample_coefficients(spec, 42)
    b = en.sample_coefficients(spec, 42)
    assert np.array_equal(a.log_abs, b.log_abs) and np.array_equal(a.phase, b.phase)
    ra = en.find_roots(a).atoms
    rb = en.find_roots(b).atoms
    assert np.array_equal(ra, rb)


def test_find_roots_hand_examples():
    p = en.ComplexPolynomial.from_coefficients([-1, 0, 1])
    roots = en.find_roots(p).atoms
    assert np.allclose(sorted(roots, key=lambda z: z.real), [-1, 1], atol=1e-12)
    q = en.ComplexPolynomial.from_coefficients([1, 0, 1])
    roots = en.find_roots(q).atoms
    assert np.allclose(sorted(roots, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)


def _reconstruction_error(poly):
    roots = en.find_roots(poly).atoms
    b, _ = en.monic_from_roots(roots)
    c = poly.coefficients()
    return float(np.max(np.abs(b / b[-1] - c / c[-1])) / np.max(np.abs(c / c[-1])))


@pytest.mark.parametrize("basis,n", [("kac", 50), ("kac", 100), ("elliptic", 50)])
def test_reconstruction_contract(basis, n):
    for seed in range(5):
        poly = en.sample_coefficients(en.ModelSpec(basis, "complex", n), seed)
        assert _reconstruction_error(poly) <= 1e-8


def test_scale_invariance_of_roots():
    poly = en.sample_coefficients(en.ModelSpec("kac", "complex", 30), 7)
    scaled = en.ComplexPolynomial(
        basis="kac", log_abs=poly.log_abs + math.log(37.0), phase=poly.phase
    )
    r1 = en.find_roots(poly).atoms
    r2 = en.find_roots(scaled).atoms
    assert np.max(np.abs(r1 - r2)) <= 1e-10


def test_degree_one_root_law():
    # median modulus of -a0/a1 for iid complex Gaussians is 1
    rng = np.random.default_rng(11)
    g = rng.normal(0, math.sqrt(0.5), size=(100_000, 4))
    ratio = np.abs((g[:, 0] + 1j * g[:, 1]) / (g[:, 2] + 1j * g[:, 3]))
    assert abs(np.median(ratio) - 1.0) <= 0.01
    # and find_roots agrees with the closed form on sampled instances
    spec = en.ModelSpec("kac", "complex", 1)
    for seed in range(100):
        poly = en.sample_coefficients(spec, seed)
        c = poly.coefficients()
        assert en.find_roots(poly).atoms[0] == pytest.approx(-c[0] / c[1], rel=1e-12)


def test_monic_from_roots_order_independence():
    rng = np.random.default_rng(5)
    roots = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    b1, s1 = en.monic_from_roots(roots)
    shuffled = roots.copy()
    rng.shuffle(shuffled)
    b2, s2 = en.monic_from_roots(shuffled)
    assert np.max(np.abs(b1 * math.exp(s1) - b2 * math.exp(s2))) <= 1e-10 * math.exp(s1)


def test_gram_schmidt_circle_is_identity():
    m = 256
    grid = np.exp(2j * np.pi * np.arange(m) / m)
    change = en.gram_schmidt_basis(grid, np.full(m, 1.0 / m), np.zeros(m), 3)
    assert abs(change.log_jacobian_sq) <= 1e-9
    assert np.allclose(np.abs(change.matrix), np.eye(4), atol=1e-10)


def test_gram_schmidt_elliptic_diagonal():
    # Gauss-Legendre in the Fubini-Study quantile makes the discretization
    # nearly exact, so the inverse diagonal matches sqrt((n+1) binom(n,k))
    n = 2
    nodes, gl_w = np.polynomial.legendre.leggauss(64)
    q = 0.5 * (nodes + 1.0)
    radii = np.sqrt(q / (1.0 - q))
    n_ang = 32
    angles = np.exp(2j * np.pi * np.arange(n_ang) / n_ang)
    support = np.outer(radii, angles).ravel()
    weights = np.outer(gl_w / 2.0, np.full(n_ang, 1.0 / n_ang)).ravel()
    weights /= weights.sum()
    phi = np.log1p(np.abs(support) ** 2)
    change = en.gram_schmidt_basis(support, weights, phi, n)
    inv_diag = 1.0 / np.abs(np.diag(change.matrix))
    expect = np.sqrt((n + 1) * np.array([1.0, 2.0, 1.0]))
    assert np.allclose(inv_diag, expect, rtol=1e-8)


def test_gram_schmidt_singular_cases():
    with pytest.raises(SingularGram):
        en.gram_schmidt_basis(np.array([1.0 + 0j]), np.array([1.0]), np.array([0.0]), 1)
    support = np.exp(2j * np.pi * np.arange(3) / 3)
    with pytest.raises(SingularGram):
        en.gram_schmidt_basis(support, np.array([0.5, 0.5, 0.0]), np.zeros(3), 2)


def test_real_symmetry_check():
    assert en.real_symmetry_check(np.array([1j, -1j]))
    assert not en.real_symmetry_check(np.array([1j]))
    for seed in range(10):
        poly = en.sample_coefficients(en.ModelSpec("kac", "real", 12), seed)
        assert en.real_symmetry_check(en.find_roots(poly))


def test_orthogonal_sampling_matches_kac_on_circle():
    m = 128
    grid = np.exp(2j * np.pi * np.arange(m) / m)
    spec = en.ModelSpec(
        "orthogonal", "complex", 4, support=grid, nu_weights=np.full(m, 1.0 / m), phi=np.zeros(m)
    )
    kac = en.ModelSpec("kac", "complex", 4)
    po = en.sample_coefficients(spec, 3)
    pk = en.sample_coefficients(kac, 3)
    co = po.coefficients() * math.exp(po.log_scale)
    ck = pk.coefficients() * math.exp(pk.log_scale)
    # same seed, same draws; the circle basis change is the identity up to phases
    assert np.allclose(np.abs(co), np.abs(ck), atol=1e-9)


def test_orthogonal_table_io(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("re,im,nu_weight,phi\n1.0,0.0,0.5,0.0\n-1.0,0.0,0.5,0.1\n")
    support, w, phi = en.read_orthogonal_table(path)
    assert np.allclose(support, [1.0, -1.0])
    assert np.allclose(w, [0.5, 0.5])
    assert np.allclose(phi, [0.0, 0.1])
