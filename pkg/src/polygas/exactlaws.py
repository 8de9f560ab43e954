"""Closed-form root laws as executable checks: Gibbs log-densities, mixture
normalizing constants, Bernstein-Markov validators, exact inner products.

All constants go through log-gamma, never raw factorials, so n in the
hundreds stays finite.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .ensembles import log_binomial
from .errors import BadMixtureStructure
from .functionals import hamiltonian

REAL_TOL = 1e-10


@dataclass
class DensityValue:
    log_density: float
    k: int = None


@dataclass
class MixtureConstants:
    """log Z_{n,k} for k = 0..floor(n/2), plus the uniform-control statistic."""

    n: int
    log_z: np.ndarray

    @property
    def uniform_control(self):
        """max_k |log Z_{n,k}| / n^2; vanishes as n grows."""
        return float(np.max(np.abs(self.log_z)) / self.n**2)


def elliptic_log_jacobian_sq(n):
    """log |A_n|^2 for the elliptic basis: the squared Jacobian of the map
    from monomial to orthonormal coefficients is prod_k 1/((n+1) C(n,k))."""
    k = np.arange(n + 1)
    return float(-np.sum(np.log(n + 1.0) + log_binomial(n, k)))


def _log_jacobian_sq(model_spec):
    if model_spec.basis == "kac":
        return 0.0
    if model_spec.basis == "elliptic":
        return elliptic_log_jacobian_sq(model_spec.n)
    return model_spec.basis_change().log_jacobian_sq


def log_partition_complex(model_spec):
    """log Z_n with Z_n = pi^n / (n! |A_n|^2); the monomial basis gives |A_n| = 1.

    Pinned by the n = 1 oracle: the density of the single root of a degree-one
    complex Gaussian polynomial is the complex Cauchy law.
    """
    n = model_spec.n
    return n * math.log(math.pi) - float(gammaln(n + 1)) - _log_jacobian_sq(model_spec)


def mixture_constants(model_spec):
    """log Z_{n,k} = log[k! (n-2k)! pi^((n+1)/2) / (2^k Gamma((n+1)/2) |A_n|)]."""
    n = model_spec.n
    k = np.arange(n // 2 + 1)
    log_z = (
        gammaln(k + 1)
        + gammaln(n - 2 * k + 1)
        + (n + 1) / 2.0 * math.log(math.pi)
        - k * math.log(2.0)
        - gammaln((n + 1) / 2.0)
        - 0.5 * _log_jacobian_sq(model_spec)
    )
    return MixtureConstants(n=n, log_z=np.asarray(log_z, dtype=float))


def complex_root_logdensity(particles, model_spec, normalized=True):
    """Log density of the complex-case root vector w.r.t. Lebesgue on C^n.

    The unnormalized part is exactly -beta_n H(particles); subtracting
    log Z_n normalizes it whenever the basis change is available.
    """
    value = -model_spec.beta_n * hamiltonian(particles, model_spec)
    if normalized:
        value -= log_partition_complex(model_spec)
    return DensityValue(log_density=float(value), k=None)


def split_mixture_layout(particles, k, tol=REAL_TOL):
    """Validate the (reals first, then k conjugate pairs) layout.

    Returns (reals, pair_representatives); raises BadMixtureStructure when
    the first n-2k entries are not real or the rest do not pair up with
    their conjugates within `tol` (pairs matched greedily by nearest
    conjugate, absorbing root-finder noise).
    """
    z = np.asarray(particles, dtype=complex)
    n = len(z)
    if k < 0 or 2 * k > n:
        raise BadMixtureStructure(f"mixture index {k} out of range for n={n}")
    reals, rest = z[: n - 2 * k], np.array(z[n - 2 * k :])
    if np.any(np.abs(reals.imag) > tol):
        raise BadMixtureStructure("leading particles are not real")
    pairs = []
    remaining = list(range(len(rest)))
    while remaining:
        i = remaining[0]
        target = np.conj(rest[i])
        cand = remaining[1:]
        if not cand:
            raise BadMixtureStructure("odd particle left without a conjugate")
        d = np.abs(rest[cand] - target)
        j = cand[int(np.argmin(d))]
        if np.min(d) > tol:
            raise BadMixtureStructure("particles do not form conjugate pairs")
        rep = rest[i] if rest[i].imag > 0 else rest[j]
        if rep.imag <= 0:
            raise BadMixtureStructure("conjugate pair degenerated to the real line")
        pairs.append(rep)
        remaining.remove(i)
        remaining.remove(j)
    return reals.real, np.asarray(pairs, dtype=complex)


def real_mixture_logdensity(particles, model_spec, k=None):
    """Log density w.r.t. the mixed reference measure with n-2k real slots
    and k complex-pair slots: -(beta_n/2) H - log Z_{n,k}."""
    if k is None and hasattr(particles, "k"):
        k = particles.k
    if hasattr(particles, "particles"):
        particles = particles.particles
    split_mixture_layout(particles, k)
    constants = mixture_constants(model_spec)
    value = -0.5 * model_spec.beta_n * hamiltonian(particles, model_spec)
    return DensityValue(log_density=float(value - constants.log_z[k]), k=k)


# ---------------------------------------------------------------------------
# Bernstein-Markov validators


@dataclass
class BernsteinMarkovCheck:
    sup_value: float
    l2_norm: float
    bound: float
    ratio: float
    ok: bool


def _log_abs_poly(coeffs, z):
    """log |P(z)| evaluated overflow-safe (reversed Horner outside the disk)."""
    n = len(coeffs) - 1
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape)
    inner = np.abs(z) <= 1.0
    with np.errstate(divide="ignore"):
        if np.any(inner):
            zi = z[inner]
            p = np.full(zi.shape, coeffs[-1])
            for c in coeffs[-2::-1]:
                p = p * zi + c
            out[inner] = np.log(np.abs(p))
        if np.any(~inner):
            zo = z[~inner]
            u = 1.0 / zo
            r = np.full(u.shape, coeffs[0])
            for c in coeffs[1:]:
                r = r * u + c
            out[~inner] = n * np.log(np.abs(zo)) + np.log(np.abs(r))
    return out


def bernstein_markov_check(poly, model_spec):
    """Grid estimate of the weighted sup norm against the L2 bound.

    Circle variant: sup_{|z|=1} |P| <= sqrt(N+1) ||P||, with the L2 norm over
    the uniform circle measure (the coefficient l2 norm).  Elliptic variant:
    sup_z |P(z)|^2 / (1+|z|^2)^n <= (n+1) ||P||^2 with the Fubini-Study norm.
    The sup is a 16(N+1)-point grid sup, a lower bound of the true sup, so a
    reported pass is sound.
    """
    coeffs = poly.coefficients()  # scale-invariant checks: normalization drops out
    n = len(coeffs) - 1
    if model_spec.basis == "kac":
        grid = np.exp(2j * np.pi * np.arange(16 * (n + 1)) / (16 * (n + 1)))
        sup = float(np.exp(np.max(_log_abs_poly(coeffs, grid))))
        l2 = float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))
        bound = math.sqrt(n + 1) * l2
        return BernsteinMarkovCheck(sup, l2, bound, sup / l2, sup <= bound * (1 + 1e-12))
    if model_spec.basis == "elliptic":
        q = (np.arange(2 * (n + 1)) + 0.5) / (2 * (n + 1))
        radii = np.sqrt(q / (1.0 - q))
        angles = np.exp(2j * np.pi * np.arange(8) / 8)
        grid = np.outer(radii, angles).ravel()
        log_weighted = 2.0 * _log_abs_poly(coeffs, grid) - n * np.log1p(np.abs(grid) ** 2)
        sup = float(np.exp(np.max(log_weighted)))
        weights = np.exp(-np.log(n + 1.0) - log_binomial(n, np.arange(n + 1)))
        l2_sq = float(np.abs(coeffs) ** 2 @ weights)
        bound = (n + 1) * l2_sq
        return BernsteinMarkovCheck(sup, math.sqrt(l2_sq), bound, sup / l2_sq, sup <= bound * (1 + 1e-12))
    raise ValueError("Bernstein-Markov checks cover the kac and elliptic bases only")


# ---------------------------------------------------------------------------
# exact inner products


def elliptic_inner_product(k, n):
    """<X^k, X^k> under the degree-n Fubini-Study scalar product:
    1 / ((n+1) binom(n, k))."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return float(np.exp(-np.log(n + 1.0) - log_binomial(n, k)))


def elliptic_inner_product_quadrature(k, n):
    """Independent oracle: the radial Beta integral int_0^inf u^k/(1+u)^(n+2) du."""
    value, _ = quad(lambda u: u**k / (1.0 + u) ** (n + 2), 0.0, np.inf, limit=200)
    return float(value)
