"""Random polynomial models: coefficient sampling, root extraction, bases.

Three models are supported: monomial-basis Gaussian polynomials ("kac"),
square-root-binomial scaled ones ("elliptic"), and general orthonormal
families built by Gram-Schmidt against a user-supplied discretized pair
(weights nu, external field phi).  Coefficients are held as
(log-magnitude, phase) pairs so the binomial scaling survives large degrees.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import ConvergenceError, DegenerateLeading, SingularGram
from .measures import EmpiricalMeasure

GRAM_CONDITION_CAP = 1e12
ABERTH_TOL = 1e-13
ABERTH_MAX_SWEEPS = 200
COMPANION_DEGREE_CAP = 60


def log_binomial(n, k):
    return gammaln(n + 1) - gammaln(np.asarray(k) + 1) - gammaln(n - np.asarray(k) + 1)


@dataclass
class BasisChange:
    """Triangular map from canonical to orthonormal coefficient vectors.

    `matrix` sends monomial coefficients b to orthonormal-basis coefficients
    a = matrix @ b; its inverse columns express the orthonormal polynomials
    in the monomial basis.  `log_jacobian_sq` is the log of the squared
    modulus of the real Jacobian of that change of variables, i.e. the sum
    of the log squared diagonal entries.
    """

    matrix: np.ndarray
    log_jacobian_sq: float

    def to_monomial(self, a):
        """Monomial coefficients of sum_k a_k R_k."""
        return solve_triangular(self.matrix, np.asarray(a, dtype=complex), lower=False)


@dataclass
class ModelSpec:
    """Which ensemble to draw from and at which speed.

    basis: "kac" | "elliptic" | "orthogonal"; field: "real" | "complex";
    beta_n defaults to n^2, the speed matching the law of the roots.
    Orthogonal models carry a discretized support with probability weights
    and a table of external-field values on it.
    """

    basis: str
    field: str
    n: int
    beta_n: float = None
    support: np.ndarray = None
    nu_weights: np.ndarray = None
    phi: np.ndarray = None
    _basis_change: BasisChange = None

    def __post_init__(self):
        if self.basis not in ("kac", "elliptic", "orthogonal"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown coefficient field {self.field!r}")
        if self.n < 1:
            raise ValueError("degree must be at least 1")
        if self.beta_n is None:
            self.beta_n = float(self.n) ** 2
        if self.beta_n <= 0:
            raise ValueError("speed beta_n must be positive")
        if self.basis == "orthogonal":
            if self.support is None or self.nu_weights is None or self.phi is None:
                raise ValueError("orthogonal model needs support, nu_weights and phi")
            self.support = np.asarray(self.support, dtype=complex)
            self.nu_weights = np.asarray(self.nu_weights, dtype=float)
            self.phi = np.asarray(self.phi, dtype=float)
            if np.any(self.nu_weights < 0):
                raise ValueError("nu weights must be nonnegative")
            if abs(self.nu_weights.sum() - 1.0) > 1e-9:
                raise ValueError("nu weights must sum to 1")

    def basis_change(self):
        if self.basis != "orthogonal":
            raise ValueError("basis change only applies to orthogonal models")
        if self._basis_change is None:
            self._basis_change = gram_schmidt_basis(
                self.support, self.nu_weights, self.phi, self.n
            )
        return self._basis_change


@dataclass
class ComplexPolynomial:
    """Degree-n polynomial held as log-magnitude/phase monomial coefficients.

    Whatever the generating model, the stored coefficients are in the
    monomial basis (basis factors are folded in at sampling time); `basis`
    records the provenance.
    """

    basis: str
    log_abs: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        self.log_abs = np.asarray(self.log_abs, dtype=float)
        self.phase = np.asarray(self.phase, dtype=float)
        if self.log_abs.shape != self.phase.shape or self.log_abs.ndim != 1:
            raise ValueError("log_abs and phase must be 1-d arrays of equal length")
        if np.isneginf(self.log_abs[-1]):
            raise ValueError("leading coefficient must be nonzero")

    @classmethod
    def from_coefficients(cls, coeffs, basis="kac"):
        coeffs = np.asarray(coeffs, dtype=complex)
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(coeffs))
        return cls(basis=basis, log_abs=log_abs, phase=np.angle(coeffs))

    @property
    def degree(self):
        return len(self.log_abs) - 1

    @property
    def log_scale(self):
        """Log of the magnitude factored out by `coefficients`."""
        return float(np.max(self.log_abs))

    def coefficients(self):
        """Monomial coefficients normalized so the largest magnitude is 1.

        Phases of exactly 0 or pi reconstruct exactly real values, so
        real-coefficient models stay real through the log/phase storage.
        """
        mags = np.exp(self.log_abs - self.log_scale)
        out = mags * np.exp(1j * self.phase)
        real_mask = (self.phase == 0.0) | (np.abs(self.phase) == np.pi)
        if np.any(real_mask):
            out[real_mask] = mags[real_mask] * np.cos(self.phase[real_mask])
        return out


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def sample_coefficients(spec, seed):
    """Draw one polynomial from the model; deterministic under (spec, seed)."""
    rng = _rng(seed)
    for _ in range(2):
        if spec.field == "complex":
            g = rng.normal(0.0, np.sqrt(0.5), size=(spec.n + 1, 2))
            a = g[:, 0] + 1j * g[:, 1]
        else:
            a = rng.normal(0.0, np.sqrt(0.5), size=spec.n + 1).astype(complex)
        if a[-1] != 0:
            break
    else:
        raise DegenerateLeading("leading coefficient sampled as exactly zero twice")

    if spec.basis == "kac":
        return ComplexPolynomial.from_coefficients(a, basis="kac")
    if spec.basis == "elliptic":
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(a)) + 0.5 * log_binomial(spec.n, np.arange(spec.n + 1))
        return ComplexPolynomial(basis="elliptic", log_abs=log_abs, phase=np.angle(a))
    b = spec.basis_change().to_monomial(a)
    if b[-1] == 0:
        raise DegenerateLeading("leading monomial coefficient vanished")
    return ComplexPolynomial.from_coefficients(b, basis="orthogonal")


def _leja_order(roots):
    """Deterministic Leja ordering: start at the largest modulus, then greedily
    maximize the log-product of distances to the points already chosen.
    Expanding a polynomial in this order keeps intermediate coefficients
    small, which sorted-order expansion does not."""
    n = len(roots)
    if n <= 2:
        return roots
    order = np.lexsort((roots.imag, roots.real))
    pts = roots[order]
    chosen = np.empty(n, dtype=complex)
    remaining = list(range(n))
    first = int(np.argmax(np.abs(pts)))
    chosen[0] = pts[first]
    remaining.remove(first)
    score = np.full(n, 0.0)
    with np.errstate(divide="ignore"):
        for k in range(1, n):
            prev = chosen[k - 1]
            score[remaining] += np.log(np.abs(pts[remaining] - prev))
            best = remaining[int(np.argmax(score[remaining]))]
            chosen[k] = pts[best]
            remaining.remove(best)
    return chosen


def monic_from_roots(roots):
    """Monic coefficients (ascending) from roots, with running rescaling.

    Returns (coeffs, log_scale): the true coefficients are coeffs * exp(log_scale)
    and max |coeffs| == 1, so degrees in the hundreds cannot overflow.  Roots
    are multiplied in Leja order for numerical stability; the result does not
    depend on the input order beyond roundoff.
    """
    roots = _leja_order(np.asarray(roots, dtype=complex))
    b = np.array([1.0 + 0j])
    log_scale = 0.0
    for r in roots:
        nxt = np.empty(len(b) + 1, dtype=complex)
        nxt[0] = -r * b[0]
        nxt[1:-1] = b[:-1] - r * b[1:]
        nxt[-1] = b[-1]
        b = nxt
        top = np.max(np.abs(b))
        if top > 1e100 or (0 < top < 1e-100):
            b /= top
            log_scale += np.log(top)
    top = np.max(np.abs(b))
    if top > 0 and (top > 2.0 or top < 0.5):
        b /= top
        log_scale += np.log(top)
    return b, log_scale


def _horner_ratio(coeffs, z):
    """Newton correction p(z)/p'(z), overflow-safe for |z| > 1.

    Points inside the closed unit disk use direct Horner evaluation; points
    outside evaluate the reversed polynomial at 1/z, which keeps every
    intermediate bounded.
    """
    n = len(coeffs) - 1
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    inner = np.abs(z) <= 1.0
    if np.any(inner):
        zi = z[inner]
        p = np.full(zi.shape, coeffs[-1])
        dp = np.zeros_like(zi)
        for c in coeffs[-2::-1]:
            dp = dp * zi + p
            p = p * zi + c
        with np.errstate(divide="ignore", invalid="ignore"):
            out[inner] = p / dp
    if np.any(~inner):
        zo = z[~inner]
        u = 1.0 / zo
        r = np.full(u.shape, coeffs[0])
        dr = np.zeros_like(u)
        for c in coeffs[1:]:
            dr = dr * u + r
            r = r * u + c
        # p(z) = z^n r(u); p'(z) = z^(n-1) (n r(u) - u r'(u))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[~inner] = zo * r / (n * r - u * dr)
    return out


def _aberth_initial(coeffs, attempt):
    n = len(coeffs) - 1
    if n <= COMPANION_DEGREE_CAP and attempt == 0:
        monic = coeffs / coeffs[-1]
        comp = np.zeros((n, n), dtype=complex)
        comp[1:, :-1] = np.eye(n - 1)
        comp[:, -1] = -monic[:-1]
        return np.linalg.eigvals(comp)
    # scaled roots of unity: radius from the geometric mean of root moduli
    lead = np.abs(coeffs[-1])
    low = np.abs(coeffs[0])
    if low == 0:
        low = np.max(np.abs(coeffs[:-1])) + 1e-300
    radius = (low / lead) ** (1.0 / n) * (1.0 + 0.1 * attempt)
    angles = 2.0 * np.pi * np.arange(n) / n + 0.39 + 0.17 * attempt
    return radius * np.exp(1j * angles)


def find_roots(poly):
    """All roots with multiplicity via Aberth-Ehrlich simultaneous iteration.

    Initialized from companion-matrix eigenvalues up to degree 60, from
    scaled roots of unity above; one restart with a perturbed initialization
    before giving up.  Roots come back lexicographically sorted by (Re, Im)
    as a planar empirical measure.
    """
    coeffs = poly.coefficients()
    if coeffs[-1] == 0:
        raise ConvergenceError("leading coefficient is zero")
    n = len(coeffs) - 1
    for attempt in range(2):
        z = _aberth_initial(coeffs, attempt)
        converged = False
        for _ in range(ABERTH_MAX_SWEEPS):
            newton = _horner_ratio(coeffs, z)
            bad = ~np.isfinite(newton)
            if np.any(bad):
                newton[bad] = 0.0
                z = z + bad * (1e-8 + 1e-8j)
                continue
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - newton * s
            denom[denom == 0] = 1.0  # fall back to a plain Newton step
            corr = newton / denom
            z = z - corr
            if np.all(np.abs(corr) <= ABERTH_TOL * np.maximum(1.0, np.abs(z))):
                converged = True
                break
        if converged:
            order = np.lexsort((z.imag, z.real))
            return EmpiricalMeasure(space="plane", atoms=z[order])
    raise ConvergenceError(f"Aberth iteration failed twice at degree {n}")


def gram_schmidt_basis(support, nu_weights, phi, n):
    """Orthonormalize monomials against the discretized scalar product.

    The scalar product is sum_m w_m P(s_m) conj(Q(s_m)) exp(-n phi(s_m)); the
    continuous pair the user has in mind is represented only through this
    grid.  Raises SingularGram when the weighted Vandermonde is numerically
    rank-deficient (condition number above 1e12).
    """
    support = np.asarray(support, dtype=complex)
    nu_weights = np.asarray(nu_weights, dtype=float)
    phi = np.asarray(phi, dtype=float)
    mask = nu_weights > 0
    pts, w, f = support[mask], nu_weights[mask], phi[mask]
    if len(pts) < n + 1:
        raise SingularGram(f"need at least {n + 1} support points with positive weight")
    scale = np.sqrt(w * np.exp(-n * f))
    vander = scale[:, None] * pts[:, None] ** np.arange(n + 1)[None, :]
    _, r = np.linalg.qr(vander)
    diag = np.diag(r)
    if np.any(np.abs(diag) == 0) or np.linalg.cond(r) > GRAM_CONDITION_CAP:
        raise SingularGram("discretized moment matrix is numerically singular")
    # rotate rows so the diagonal is real positive
    r = (np.conj(diag) / np.abs(diag))[:, None] * r
    log_jac_sq = float(np.sum(2.0 * np.log(np.abs(diag))))
    return BasisChange(matrix=r, log_jacobian_sq=log_jac_sq)


def read_orthogonal_table(path):
    """Orthogonal-model input: CSV with header re,im,nu_weight,phi.

    Returns (support, nu_weights, phi) ready for ModelSpec.
    """
    import csv

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:4]] != ["re", "im", "nu_weight", "phi"]:
            raise ValueError(f"expected header re,im,nu_weight,phi in {path}")
        rows = [[float(v) for v in row[:4]] for row in reader]
    data = np.asarray(rows, dtype=float)
    return data[:, 0] + 1j * data[:, 1], data[:, 2], data[:, 3]


def real_symmetry_check(mu, tol=1e-8):
    """True iff the atom multiset is closed under conjugation within `tol`."""
    atoms = mu.atoms if isinstance(mu, EmpiricalMeasure) else np.asarray(mu, dtype=complex)
    target = np.conj(atoms)
    taken = np.zeros(len(atoms), dtype=bool)
    for z in atoms:
        d = np.abs(target - z)
        d[taken] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            return False
        taken[j] = True
    return True
