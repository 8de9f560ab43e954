"""Energy-like functionals: potentials, truncated energies, J suprema,
Hamiltonians, rate functions, and the quadrature backends behind them.

Sign conventions: the potential is U(z) = -sum w log|z - x|; energies carry a
global minus sign so the circle equilibrium has energy zero.  Truncation
replaces log(t) by max(log(t), -M); the default level M = 30 corresponds to
an exp(-30) length scale, far below any atom separation used here.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import geometry
from .ensembles import log_binomial, monic_from_roots
from .measures import EmpiricalMeasure, GridMeasure, _pairwise_dist, _points_weights
from .measures import is_conjugation_symmetric

DEFAULT_TRUNCATION = 30.0
_GOLDEN_ITERS = 60
_BLOCK = 512


def log_trunc(dist, M):
    """max(log(dist), -M); coincidences land exactly on the floor."""
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(dist), -M)


# ---------------------------------------------------------------------------
# quadrature backends


def circle_grid(m, offset=0.0):
    """m points on the unit circle at angles 2*pi*(k + offset)/m."""
    return np.exp(2j * np.pi * (np.arange(m) + offset) / m)


def circle_quadrature(f, m):
    """Trapezoid rule against the uniform unit-circle probability measure.

    Spectrally accurate for smooth periodic integrands; exact for |P|^2 with
    P a polynomial of degree below m.
    """
    if m < 4:
        raise ValueError("need at least 4 circle points")
    return float(np.mean(f(circle_grid(m))))


def sphere_grid(n_theta, n_phi, phi_offset=0.0):
    """Product Gauss-Legendre x uniform grid on the radius-1/2 sphere.

    Returns (points, weights) with weights summing to one, a quadrature rule
    for the uniform probability measure on the sphere.
    """
    u, v = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * (np.arange(n_phi) + phi_offset) / n_phi
    rho = 0.5 * np.sqrt(1.0 - u**2)
    x1 = np.outer(rho, np.cos(phi)).ravel()
    x2 = np.outer(rho, np.sin(phi)).ravel()
    x3 = np.outer(0.5 + 0.5 * u, np.ones(n_phi)).ravel()
    pts = np.stack([x1, x2, x3], axis=-1)
    w = np.outer(v / 2.0, np.full(n_phi, 1.0 / n_phi)).ravel()
    return pts, w / w.sum()


def sphere_quadrature(f, points, weights):
    return float(np.sum(weights * f(points)))


def plane_quadrature(f, support, weights):
    return float(np.sum(weights * f(np.asarray(support, dtype=complex))))


def fubini_study_grid(n_r=32, n_angle=32):
    """Equal-mass discretization of the complex Cauchy measure: quantile
    radii sqrt(q/(1-q)) crossed with uniform angles, all weights equal."""
    q = (np.arange(n_r) + 0.5) / n_r
    radii = np.sqrt(q / (1.0 - q))
    ang = np.exp(2j * np.pi * (np.arange(n_angle) + 0.5) / n_angle)
    pts = np.outer(radii, ang).ravel()
    return pts, np.full(len(pts), 1.0 / len(pts))


# ---------------------------------------------------------------------------
# potentials and energies


def log_potential(mu, point):
    """U(z) = -sum_j w_j log|z - x_j|; +inf when an atom sits on the point."""
    pts, w = _points_weights(mu)
    if mu.space == "plane":
        d = np.abs(np.asarray(point, dtype=complex) - pts)
    else:
        d = np.sqrt(np.sum((np.asarray(point, dtype=float) - pts) ** 2, axis=-1))
    with np.errstate(divide="ignore"):
        logs = np.log(d)
    if np.any(np.isneginf(logs)):
        return math.inf
    return float(-np.sum(w * logs))


def _sorted_atoms(mu):
    atoms = mu.atoms
    if mu.space == "plane":
        order = np.lexsort((atoms.imag, atoms.real))
    else:
        order = np.lexsort((atoms[:, 2], atoms[:, 1], atoms[:, 0]))
    return atoms[order]


def discrete_energy(mu):
    """Off-diagonal pair energy -(1/n^2) sum_{i != j} log|z_i - z_j|.

    Atoms are sorted first so the accumulation order is reproducible;
    coincident atoms give +inf.
    """
    atoms = _sorted_atoms(mu)
    n = len(atoms)
    d = _pairwise_dist(mu.space, atoms, atoms)
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] == 0.0):
        return math.inf
    return float(-np.sum(np.log(d[off])) / n**2)


def truncated_energy(mu, M=DEFAULT_TRUNCATION):
    """-double integral of log_M |x - y|, diagonal included (log_M(0) = -M).

    Finite for every measure, nondecreasing in M, and equal to the full
    energy once M exceeds minus the log of the smallest pairwise distance.
    """
    pts, w = _points_weights(mu)
    d = _pairwise_dist(mu.space, pts, pts)
    return float(-w @ log_trunc(d, M) @ w)


def nearest_neighbor_distances(space, pts):
    """Distance from each point to its nearest distinct neighbor (inf if alone)."""
    n = len(pts)
    if n == 1:
        return np.array([np.inf])
    d = _pairwise_dist(space, pts, pts)
    np.fill_diagonal(d, np.inf)
    return d.min(axis=1)


def grid_energy(mu, M=DEFAULT_TRUNCATION):
    """Energy of a grid measure seen as a discretization of a continuous one.

    Off-diagonal pairs use log_M as in `truncated_energy`; the diagonal uses
    the half nearest-neighbor distance as the cell's own length scale,
    -w_i^2 log_M(r_i / 2), so that refining the grid converges to the
    continuous energy instead of inheriting the +M/n atomic self-term.  A
    single isolated support point falls back to log_M(0) = -M, which keeps
    the all-mass-on-one-atom rate at M + J.
    """
    pts, w = _points_weights(mu)
    d = _pairwise_dist(mu.space, pts, pts)
    np.fill_diagonal(d, np.inf)
    off = log_trunc(d, M)
    np.fill_diagonal(off, 0.0)
    value = -float(w @ off @ w)
    nn = d.min(axis=1)
    nn[~np.isfinite(nn)] = 0.0
    value -= float(np.sum(w**2 * log_trunc(nn / 2.0, M)))
    return value


# ---------------------------------------------------------------------------
# the J suprema


@dataclass
class RateFunctionalSpec:
    """Where the sup in the J functional runs and what field it subtracts.

    variant: "kac" (sup over the unit circle), "elliptic" (sup over the
    plane or the whole sphere, field log(1+|z|^2) on the plane), or
    "orthogonal" (sup over the support of nu, user field phi).
    `constant` is the additive constant of the spherical Kac form (log 2).
    `phi_at` evaluates the field anywhere (enables refinement); `phi` is a
    table aligned with sup_points used when only tabulated values exist.
    """

    variant: str
    space: str
    sup_points: np.ndarray
    phi: np.ndarray = None
    phi_at: callable = None
    constant: float = 0.0
    refiner: callable = None  # (evaluate, i_best) -> refined value or None

    def field_values(self):
        if self.phi is not None:
            return np.asarray(self.phi, dtype=float)
        if self.phi_at is not None:
            return np.asarray(self.phi_at(self.sup_points), dtype=float)
        return np.zeros(len(self.sup_points))


def _pair_log_sum(space, sup_pts, pts, w, M=None):
    """sum_j w_j * 2 log|z - x_j| for every sup point z, blockwise."""
    out = np.empty(len(sup_pts))
    for start in range(0, len(sup_pts), _BLOCK):
        block = sup_pts[start : start + _BLOCK]
        d = _pairwise_dist(space, block, pts)
        if M is None:
            with np.errstate(divide="ignore"):
                logs = np.log(d)
        else:
            logs = log_trunc(d, M)
        out[start : start + _BLOCK] = 2.0 * (logs @ w)
    return out


def _golden_max(f, lo, hi, iters=_GOLDEN_ITERS):
    """Golden-section maximization with a fixed iteration budget."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    best = max(fc, fd)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
        best = max(best, fc, fd)
    return best


def make_circle_refiner(m, offset=0.0, to_point=None):
    """One golden-section pass in angle around the best unit-circle grid point."""
    angles = 2.0 * np.pi * (np.arange(m) + offset) / m
    h = 2.0 * np.pi / m

    def refiner(evaluate, i_best):
        theta = angles[i_best]

        def f(t):
            z = complex(np.cos(t), np.sin(t))
            return evaluate(to_point(z) if to_point is not None else z)

        return _golden_max(f, theta - h, theta + h)

    return refiner


def make_radial_refiner(radii, angles, to_point=None):
    """One golden-section pass in log-radius along the ray of the best point."""
    log_r = np.log(np.asarray(radii, dtype=float))

    def refiner(evaluate, i_best):
        ri, ai = divmod(i_best, len(angles))
        lo = log_r[max(ri - 1, 0)]
        hi = log_r[min(ri + 1, len(log_r) - 1)]
        if lo == hi:
            return None
        phase = np.exp(1j * angles[ai])

        def f(t):
            z = math.exp(t) * phase
            return evaluate(to_point(z) if to_point is not None else z)

        return _golden_max(f, lo, hi)

    return refiner


def kac_plane_spec(m=4096, offset=0.5):
    return RateFunctionalSpec(
        variant="kac",
        space="plane",
        sup_points=circle_grid(m, offset),
        refiner=make_circle_refiner(m, offset),
    )


def kac_sphere_spec(m=4096, offset=0.5):
    return RateFunctionalSpec(
        variant="kac",
        space="sphere",
        sup_points=geometry.project(circle_grid(m, offset)),
        constant=math.log(2.0),
        refiner=make_circle_refiner(m, offset, to_point=geometry.project),
    )


def elliptic_plane_spec(n_r=80, n_angle=32, r_min=1e-3, r_max=1e4):
    radii = np.geomspace(r_min, r_max, n_r)
    angles = 2.0 * np.pi * np.arange(n_angle) / n_angle
    pts = np.concatenate([[0.0 + 0.0j], np.outer(radii, np.exp(1j * angles)).ravel()])

    def phi_at(z):
        return np.log1p(np.abs(np.asarray(z, dtype=complex)) ** 2)

    def refiner(evaluate, i_best):
        if i_best == 0:
            return None
        return make_radial_refiner(radii, angles)(evaluate, i_best - 1)

    return RateFunctionalSpec(
        variant="elliptic", space="plane", sup_points=pts, phi_at=phi_at, refiner=refiner
    )


def elliptic_sphere_spec(n_theta=45, n_phi=45):
    pts, _ = sphere_grid(n_theta, n_phi, phi_offset=0.5)
    return RateFunctionalSpec(variant="elliptic", space="sphere", sup_points=pts)


def orthogonal_plane_spec(sup_points, phi):
    return RateFunctionalSpec(
        variant="orthogonal",
        space="plane",
        sup_points=np.asarray(sup_points, dtype=complex),
        phi=np.asarray(phi, dtype=float),
    )


def j_functional(mu, spec, M=None):
    """sup over the spec's grid of  int log|z-w|^2 dmu(w) - phi(z) + constant.

    The grid maximum gets one local golden-section refinement pass when the
    spec provides one; the reported value is a certified lower bound of the
    true supremum (every candidate is an actual objective evaluation).
    """
    if mu.space != spec.space:
        raise ValueError(f"measure lives on {mu.space}, spec on {spec.space}")
    pts, w = _points_weights(mu)
    values = _pair_log_sum(spec.space, spec.sup_points, pts, w, M=M) - spec.field_values()
    i_best = int(np.argmax(values))
    best = values[i_best]
    if spec.refiner is not None and M is None and np.isfinite(best):

        def evaluate(point):
            if spec.space == "plane":
                d = np.abs(point - pts)
            else:
                d = np.sqrt(np.sum((point - pts) ** 2, axis=-1))
            with np.errstate(divide="ignore"):
                val = 2.0 * float(np.sum(w * np.log(d)))
            if spec.phi_at is not None:
                val -= float(spec.phi_at(point))
            return val

        refined = spec.refiner(evaluate, i_best)
        if refined is not None:
            best = max(best, refined)
    return float(best + spec.constant)


# ---------------------------------------------------------------------------
# Hamiltonians


def hamiltonian(particles, model_spec):
    """Pair repulsion plus confinement for one gas configuration.

    H = -(1/n^2) sum_{i != j} log|z_i - z_j|
        + ((n+1)/n^2) log int prod_i |z - z_i|^2 dnu_tilde(z).

    The confinement integral is evaluated exactly in coefficient space for
    the kac and elliptic bases (the monomials are orthogonal there), and by
    grid quadrature against (nu, phi) for orthogonal models.  Coincident
    particles return +inf.
    """
    z = np.asarray(particles, dtype=complex)
    n = model_spec.n
    if len(z) != n:
        raise ValueError(f"expected {n} particles, got {len(z)}")
    mu = EmpiricalMeasure(space="plane", atoms=z)
    energy = discrete_energy(mu)
    if not np.isfinite(energy):
        return math.inf
    return energy + (n + 1) / n**2 * confinement_log(z, model_spec)


def confinement_log(particles, model_spec):
    """log int prod_i |z - z_i|^2 dnu_tilde(z) for the model's weighted measure."""
    z = np.asarray(particles, dtype=complex)
    n = model_spec.n
    if model_spec.basis in ("kac", "elliptic"):
        b, log_scale = monic_from_roots(z)
        sq = np.abs(b) ** 2
        if model_spec.basis == "kac":
            total = sq.sum()
        else:
            weights = np.exp(-np.log(n + 1.0) - log_binomial(n, np.arange(n + 1)))
            total = float(sq @ weights)
        return float(2.0 * log_scale + np.log(total))
    logs = _pair_log_sum("plane", model_spec.support, z, np.ones(len(z)))
    with np.errstate(divide="ignore"):
        log_w = np.log(model_spec.nu_weights)
    return float(logsumexp(log_w - n * model_spec.phi + logs))


# ---------------------------------------------------------------------------
# rate functions and the plane/sphere identity


def rate_function(mu, spec, M=DEFAULT_TRUNCATION, center=0.0):
    """Grid-discretized rate functional: truncated energy plus the J term.

    `center` subtracts the infimum of the functional (zero for the kac
    variant, obtainable from the equilibrium minimizer otherwise).
    """
    if not isinstance(mu, GridMeasure):
        raise TypeError("rate_function expects a GridMeasure")
    return grid_energy(mu, M) + j_functional(mu, spec) - center


def tilde_rate_function(mu, spec, M=DEFAULT_TRUNCATION, center=0.0, tol=1e-8):
    """Real-coefficient rate: half the centered value on conjugation-symmetric
    measures, +inf on everything else."""
    if not is_conjugation_symmetric(mu, tol):
        return math.inf
    return 0.5 * rate_function(mu, spec, M, center)


def _matched_sphere_energy(mu, M):
    """Sphere-side energy of the pushforward with the truncation thresholds
    transported from the plane, so the plane/sphere identity is exact even on
    truncated pairs and on the diagonal."""
    z, w = _points_weights(mu)
    x = geometry.project(z)
    comp = geometry.plane_complement(z)  # 1/(1+|z|^2)
    half_log = 0.5 * np.log(comp)
    d = _pairwise_dist("sphere", x, x)
    np.fill_diagonal(d, np.inf)
    with np.errstate(divide="ignore"):
        logs = np.log(d)
    floor = -M + half_log[:, None] + half_log[None, :]
    off = np.maximum(logs, floor)
    np.fill_diagonal(off, 0.0)
    value = -float(w @ off @ w)
    nn_plane = nearest_neighbor_distances("plane", z)
    nn_plane[~np.isfinite(nn_plane)] = 0.0
    diag = log_trunc(nn_plane / 2.0, M) + 2.0 * half_log
    value -= float(np.sum(w**2 * diag))
    return value


def _project_refiner(plane_refiner):
    """Lift a planar refiner to the sphere: same candidate points, projected."""
    if plane_refiner is None:
        return None

    def refiner(evaluate, i_best):
        return plane_refiner(lambda z: evaluate(geometry.project(z)), i_best)

    return refiner


def sphere_spec_from_plane(spec):
    """The matched spherical form of a planar rate-functional spec.

    The sup grid is the projection of the planar one; the Kac form gains the
    +log 2 constant, the elliptic field cancels against the projection
    factor, and an orthogonal field phi becomes phi - log(1+|z|^2).
    Refinement reuses the planar parameterization so both sides of the
    plane/sphere identity explore identical candidates.
    """
    pts = geometry.project(spec.sup_points)
    refiner = _project_refiner(spec.refiner)
    if spec.variant == "kac":
        return RateFunctionalSpec(
            variant="kac",
            space="sphere",
            sup_points=pts,
            constant=math.log(2.0),
            refiner=refiner,
        )
    if spec.variant == "elliptic":
        return RateFunctionalSpec(
            variant="elliptic", space="sphere", sup_points=pts, refiner=refiner
        )
    tilde_phi = spec.field_values() - np.log1p(np.abs(spec.sup_points) ** 2)
    return RateFunctionalSpec(
        variant="orthogonal", space="sphere", sup_points=pts, phi=tilde_phi, refiner=refiner
    )


def plane_sphere_rate_identity_residual(mu, spec, M=DEFAULT_TRUNCATION):
    """|I(mu) - I_sphere(T* mu)| with matched truncation and matched sup grids."""
    plane_value = grid_energy(mu, M) + j_functional(mu, spec)
    sphere_mu = GridMeasure(
        space="sphere", support=geometry.project(mu.support), weights=mu.weights
    )
    sphere_value = _matched_sphere_energy(mu, M) + j_functional(
        sphere_mu, sphere_spec_from_plane(spec)
    )
    return abs(plane_value - sphere_value)
