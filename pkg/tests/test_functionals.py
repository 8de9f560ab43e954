import math

import numpy as np
import pytest

from polygas import ensembles as en
from polygas import functionals as fn
from polygas.measures import EmpiricalMeasure, GridMeasure


def atoms(*zs):
    return EmpiricalMeasure("plane", np.array(zs, dtype=complex))


def circle_measure(m=4096):
    return GridMeasure("plane", fn.circle_grid(m), np.full(m, 1.0 / m))


def test_log_potential_examples():
    assert fn.log_potential(atoms(0.0), 1.0) == 0.0
    assert fn.log_potential(atoms(0.0), 0.0) == math.inf


def test_circle_potential_oracle():
    m = 4096
    nu = circle_measure(m)
    for r in (0.5, 2.0):
        expect = -math.log(max(r, 1.0))
        assert fn.log_potential(nu, r + 0.0j) == pytest.approx(expect, abs=1e-6)
    # on the circle itself the atomic discretization floor is log(2)/m,
    # attained halfway between atoms; off-circle radii are spectrally exact
    mid = np.exp(1j * math.pi / m)
    assert abs(fn.log_potential(nu, mid)) <= math.log(2.0) / m + 1e-12


def test_discrete_energy_examples():
    assert fn.discrete_energy(atoms(0.0, 1.0)) == 0.0
    assert fn.discrete_energy(atoms(0.0, 2.0)) == pytest.approx(-math.log(2) / 2)
    assert fn.discrete_energy(atoms(1.0, -1.0)) == pytest.approx(-math.log(2) / 2)
    assert fn.discrete_energy(atoms(0.5, 0.5)) == math.inf


def test_truncated_energy_examples():
    assert fn.truncated_energy(atoms(0.0), M=5.0) == pytest.approx(5.0)
    two = atoms(0.0, 2.0)
    expect = -math.log(2) / 2 + 0.25 * (2 * 30.0)
    assert fn.truncated_energy(two, M=30.0) == pytest.approx(expect)


def test_truncated_energy_monotone_in_m():
    rng = np.random.default_rng(0)
    support = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    w = rng.dirichlet(np.ones(20))
    mu = GridMeasure("plane", support, w)
    values = [fn.truncated_energy(mu, M=m) for m in (1.0, 5.0, 10.0, 30.0)]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_j_functional_examples():
    spec = fn.kac_plane_spec(m=512, offset=0.5)
    assert fn.j_functional(atoms(0.0), spec) == pytest.approx(0.0, abs=1e-12)
    assert fn.j_functional(circle_measure(4096), fn.kac_plane_spec(m=4096, offset=0.5)) == pytest.approx(
        0.0, abs=1e-3
    )


def test_j_elliptic_delta_zero():
    spec = fn.elliptic_plane_spec()
    val = fn.j_functional(atoms(0.0), spec)
    # sup_z [log|z|^2 - log(1+|z|^2)] = 0, approached as |z| -> infinity
    assert val <= 0.0
    assert val == pytest.approx(0.0, abs=1e-6)


def test_hamiltonian_examples():
    spec2 = en.ModelSpec("kac", "complex", 2)
    assert fn.hamiltonian([1.0, -1.0], spec2) == pytest.approx(math.log(2) / 4)
    spec1 = en.ModelSpec("kac", "complex", 1)
    assert fn.hamiltonian([0.0], spec1) == pytest.approx(0.0)
    assert fn.hamiltonian([0.5, 0.5], spec2) == math.inf
    # confinement for roots {2} equals 5, and the quadrature oracle agrees
    conf = math.exp(fn.confinement_log(np.array([2.0 + 0j]), spec1))
    assert conf == pytest.approx(5.0, abs=1e-12)
    quad = fn.circle_quadrature(lambda z: np.abs(z - 2.0) ** 2, 256)
    assert quad == pytest.approx(conf, abs=1e-12)


def test_orthogonal_confinement_matches_kac():
    m = 256
    grid = fn.circle_grid(m)
    ospec = en.ModelSpec(
        "orthogonal", "complex", 5, support=grid, nu_weights=np.full(m, 1.0 / m), phi=np.zeros(m)
    )
    kspec = en.ModelSpec("kac", "complex", 5)
    rng = np.random.default_rng(1)
    z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    assert fn.confinement_log(z, ospec) == pytest.approx(fn.confinement_log(z, kspec), abs=1e-10)


def test_parseval_invariant():
    rng = np.random.default_rng(2)
    for _ in range(100):
        deg = int(rng.integers(1, 51))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        total = float(np.sum(np.abs(c) ** 2))
        quad = fn.circle_quadrature(lambda z: np.abs(np.polyval(c[::-1], z)) ** 2, 4 * 64)
        assert abs(quad - total) <= 1e-10 * total


def test_quadrature_examples():
    assert fn.circle_quadrature(lambda z: np.ones_like(z, dtype=float), 4) == pytest.approx(1.0)
    assert fn.circle_quadrature(lambda z: np.abs(z) ** 2, 4) == pytest.approx(1.0)
    pts, w = fn.sphere_grid(16, 16)
    assert w.sum() == pytest.approx(1.0)
    assert fn.sphere_quadrature(lambda x: np.ones(len(x)), pts, w) == pytest.approx(1.0)
    # mean of x3 over the uniform sphere measure is 1/2 (center height)
    assert fn.sphere_quadrature(lambda x: x[:, 2], pts, w) == pytest.approx(0.5, abs=1e-12)


def test_rate_function_examples():
    delta = GridMeasure("plane", np.array([0.0 + 0j]), np.array([1.0]))
    spec = fn.kac_plane_spec(m=512, offset=0.5)
    assert fn.rate_function(delta, spec, M=30.0) == pytest.approx(30.0, abs=1e-12)
    nu = circle_measure(4096)
    assert abs(fn.rate_function(nu, fn.kac_plane_spec(m=4096, offset=0.5), M=30.0)) <= 1e-3


def test_rate_function_monotone_and_stabilizes():
    rng = np.random.default_rng(3)
    support = rng.standard_normal(15) + 1j * rng.standard_normal(15)
    mu = GridMeasure("plane", support, rng.dirichlet(np.ones(15)))
    spec = fn.kac_plane_spec(m=256, offset=0.5)
    ms = [1.0, 3.0, 10.0, 30.0]
    vals = [fn.rate_function(mu, spec, M=m) for m in ms]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    d = np.abs(support[:, None] - support[None, :])
    min_dist = d[d > 0].min()
    m_star = -math.log(min_dist) + 1.0
    assert abs(
        fn.rate_function(mu, spec, M=m_star) - fn.rate_function(mu, spec, M=m_star + 5.0)
    ) <= 1e-9


def test_tilde_rate_gate():
    spec = fn.kac_plane_spec(m=256, offset=0.5)
    asym = GridMeasure("plane", np.array([1j, -1j]), np.array([0.9, 0.1]))
    assert fn.tilde_rate_function(asym, spec) == math.inf
    sym = GridMeasure("plane", np.array([1j, -1j]), np.array([0.5, 0.5]))
    assert fn.tilde_rate_function(sym, spec) == pytest.approx(
        0.5 * fn.rate_function(sym, spec)
    )


def test_plane_sphere_identity_two_atoms():
    mu = GridMeasure("plane", np.array([1.0 + 0j, -1.0 + 0j]), np.array([0.5, 0.5]))
    spec = fn.kac_plane_spec(m=512, offset=0.5)
    assert fn.plane_sphere_rate_identity_residual(mu, spec, M=30.0) <= 1e-12


def test_plane_sphere_identity_random_measures():
    rng = np.random.default_rng(4)
    for variant in ("kac", "elliptic"):
        for _ in range(10):
            pts = []
            while len(pts) < 50:
                z = rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
                if all(abs(z - p) >= 1e-3 for p in pts):
                    pts.append(z)
            mu = GridMeasure("plane", np.array(pts), rng.dirichlet(np.ones(50)))
            spec = (
                fn.kac_plane_spec(m=256, offset=0.5)
                if variant == "kac"
                else fn.elliptic_plane_spec(n_r=40, n_angle=16)
            )
            assert fn.plane_sphere_rate_identity_residual(mu, spec, M=30.0) <= 1e-9


def test_plane_sphere_identity_circle_grid():
    nu = circle_measure(1024)
    spec = fn.kac_plane_spec(m=1024, offset=0.5)
    assert fn.plane_sphere_rate_identity_residual(nu, spec, M=30.0) <= 1e-6


def test_elliptic_rate_at_uniform_sphere_is_half_minus_one():
    # energy of the uniform radius-1/2 sphere measure is 1/2 and its
    # spherical J is -1; the grid evaluation reproduces -1/2 closely
    pts, w = fn.sphere_grid(60, 80)
    mu = GridMeasure("sphere", pts, w)
    spec = fn.elliptic_sphere_spec(61, 79)
    value = fn.rate_function(mu, spec, M=30.0)
    assert value == pytest.approx(-0.5, abs=5e-3)


def test_sphere_kac_constant_log2():
    spec = fn.kac_sphere_spec(m=128, offset=0.5)
    assert spec.constant == pytest.approx(math.log(2.0))
    espec = fn.elliptic_sphere_spec(16, 16)
    assert espec.constant == 0.0
