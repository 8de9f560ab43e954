"""The acceptance suite: every check returns a record with its statistic,
bound and verdict, and the CLI `validate` subcommand runs them all.

Each check pins its tolerance here; nothing is deferred to calibration.
Record format matches the validation-report interface:
{check, n, statistic, bound, pass}.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import ensembles as en
from . import equilibrium as eq
from . import exactlaws as ex
from . import functionals as fn
from . import geometry as geo
from . import gibbs as gb
from .measures import GridMeasure, bl_distance, symmetrize


@dataclass
class CheckRecord:
    check: str
    n: object
    statistic: float
    bound: float
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self):
        return {
            "check": self.check,
            "n": self.n,
            "statistic": self.statistic,
            "bound": self.bound,
            "pass": bool(self.passed),
            "details": {k: _jsonable(v) for k, v in self.details.items()},
            "seconds": round(self.seconds, 3),
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def _timed(fn_check):
    def wrapper(*args, **kwargs):
        start = time.time()
        rec = fn_check(*args, **kwargs)
        rec.seconds = time.time() - start
        return rec

    return wrapper


@_timed
def check_geometry_identities(pairs=100_000, seed=0):
    """Chordal and norm identities on scaled Gaussian pairs, |z| up to 1e6."""
    rng = np.random.default_rng(seed)
    scale_z = 10.0 ** rng.uniform(-3, 6, pairs)
    scale_w = 10.0 ** rng.uniform(-3, 6, pairs)
    z = scale_z * (rng.standard_normal(pairs) + 1j * rng.standard_normal(pairs))
    w = scale_w * (rng.standard_normal(pairs) + 1j * rng.standard_normal(pairs))
    chordal = geo.chordal_identity_residual(z, w) / (1.0 + np.abs(z - w) ** 2)
    norm = geo.norm_identity_residual(np.concatenate([z, w]))
    worst = float(max(chordal.max(), norm.max()))
    return CheckRecord(
        check="geometry-identities",
        n=pairs,
        statistic=worst,
        bound=1e-10,
        passed=worst <= 1e-10,
        details={"max_scaled_chordal": float(chordal.max()), "max_norm": float(norm.max())},
    )


@_timed
def check_parseval(instances=100, max_degree=50, seed=1):
    """Circle quadrature of |P|^2 against the coefficient sum of squares."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        deg = int(rng.integers(1, max_degree + 1))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        total = float(np.sum(np.abs(c) ** 2))
        quad = fn.circle_quadrature(lambda z: np.abs(np.polyval(c[::-1], z)) ** 2, 256)
        worst = max(worst, abs(quad - total) / total)
    return CheckRecord(
        check="parseval-confinement",
        n=instances,
        statistic=worst,
        bound=1e-10,
        passed=worst <= 1e-10,
    )


@_timed
def check_elliptic_orthonormality(max_n=20):
    """Closed-form monomial norms against the radial Beta-integral oracle."""
    worst = 0.0
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            exact = ex.elliptic_inner_product(k, n)
            quad = ex.elliptic_inner_product_quadrature(k, n)
            worst = max(worst, abs(exact - quad) / exact)
    return CheckRecord(
        check="elliptic-orthonormality",
        n=max_n,
        statistic=worst,
        bound=1e-8,
        passed=worst <= 1e-8,
    )


@_timed
def check_bernstein_markov(instances=1000, max_n=30, seed=2):
    """No violations over random polynomials; the all-ones Kac polynomial
    saturates its circle bound."""
    rng = np.random.default_rng(seed)
    violations = 0
    for basis in ("kac", "elliptic"):
        for i in range(instances):
            n = int(rng.integers(1, max_n + 1))
            spec = en.ModelSpec(basis, "complex", n)
            poly = en.sample_coefficients(spec, int(rng.integers(0, 2**62)))
            if not ex.bernstein_markov_check(poly, spec).ok:
                violations += 1
    n_eq = 10
    eq_poly = en.ComplexPolynomial.from_coefficients(np.ones(n_eq + 1))
    chk = ex.bernstein_markov_check(eq_poly, en.ModelSpec("kac", "complex", n_eq))
    saturation = abs(chk.sup_value - chk.bound) / chk.bound
    passed = violations == 0 and saturation <= 1e-12
    return CheckRecord(
        check="bernstein-markov",
        n=2 * instances,
        statistic=float(violations + saturation),
        bound=1e-12,
        passed=passed,
        details={"violations": violations, "equality_saturation": saturation},
    )


@_timed
def check_root_finder(instances=50, seed=3):
    """Monic reconstruction error for Kac up to degree 100, elliptic up to 50."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for basis, max_n in (("kac", 100), ("elliptic", 50)):
        for i in range(instances):
            n = int(rng.integers(2, max_n + 1)) if i else max_n
            spec = en.ModelSpec(basis, "complex", n)
            poly = en.sample_coefficients(spec, int(rng.integers(0, 2**62)))
            roots = en.find_roots(poly).atoms
            b, _ = en.monic_from_roots(roots)
            c = poly.coefficients()
            cm = c / c[-1]
            bm = b / b[-1]
            worst = max(worst, float(np.max(np.abs(bm - cm)) / np.max(np.abs(cm))))
    return CheckRecord(
        check="root-finder-reconstruction",
        n=2 * instances,
        statistic=worst,
        bound=1e-8,
        passed=worst <= 1e-8,
    )


def direct_root_stats(basis, n, draws, seed0):
    prod = np.empty(draws)
    tot = np.empty(draws)
    spec = en.ModelSpec(basis, "complex", n)
    for i in range(draws):
        z = en.find_roots(en.sample_coefficients(spec, seed0 + i)).atoms
        prod[i] = np.abs(np.prod(z))
        tot[i] = np.abs(z).sum()
    return prod, tot


@_timed
def check_law_equivalence(draws=10_000, seed=4):
    """Complex Kac gases at n = 2, 3: chain vs direct root sampling, KS on
    (|prod z_i|, sum |z_i|), p > 0.01 with at least `draws` effective
    chain samples."""
    worst_p = 1.0
    details = {}
    for n, steps in ((2, 700_000), (3, 900_000)):
        spec = en.ModelSpec("kac", "complex", n)
        prod_d, tot_d = direct_root_stats("kac", n, draws, 10_000_000 * (n + 1))
        run = gb.mcmc_complex(spec, steps, seed=seed + n)
        states = run.effective_states()
        details[f"n{n}_effective"] = len(states)
        prod_c = np.array([abs(np.prod(s.particles)) for s in states])
        tot_c = np.array([np.abs(s.particles).sum() for s in states])
        for name, a, b in (("prod", prod_d, prod_c), ("sum", tot_d, tot_c)):
            p = float(stats.ks_2samp(a, b).pvalue)
            details[f"n{n}_{name}_p"] = p
            worst_p = min(worst_p, p)
        if len(states) < draws:
            worst_p = 0.0
    return CheckRecord(
        check="law-equivalence-complex",
        n=[2, 3],
        statistic=worst_p,
        bound=0.01,
        passed=worst_p > 0.01,
        details=details,
    )


@_timed
def check_real_mixture_weights(steps=400_000, mc_draws=100_000, seed=5):
    """Reversible-jump k-marginal at n = 2 against the discriminant event."""
    spec = en.ModelSpec("kac", "real", 2)
    run = gb.mcmc_real_mixture(spec, steps, seed=seed)
    kt = run.k_trace
    p_chain = float(np.mean(kt == 1))
    iat = gb.integrated_autocorrelation((kt == 1).astype(float))
    se_chain = math.sqrt(max(p_chain * (1 - p_chain), 1e-12) * iat / len(kt))
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, math.sqrt(0.5), size=(mc_draws, 3))
    p_mc = float(np.mean(a[:, 1] ** 2 < 4.0 * a[:, 0] * a[:, 2]))
    se_mc = math.sqrt(p_mc * (1 - p_mc) / mc_draws)
    diff = abs(p_chain - p_mc)
    bound = 2.0 * math.sqrt(se_chain**2 + se_mc**2)
    return CheckRecord(
        check="real-mixture-weights",
        n=2,
        statistic=diff,
        bound=bound,
        passed=diff <= bound,
        details={"p_chain": p_chain, "p_mc": p_mc, "se_chain": se_chain, "se_mc": se_mc},
    )


@_timed
def check_z_uniform_control():
    """max_k |log Z_{n,k}| / n^2 small at n = 200 and decreasing in n."""
    stat = {n: ex.mixture_constants(en.ModelSpec("kac", "real", n)).uniform_control for n in (100, 200, 400)}
    passed = stat[200] < 0.05 and stat[400] < stat[100]
    return CheckRecord(
        check="z-constant-uniform-control",
        n=200,
        statistic=stat[200],
        bound=0.05,
        passed=passed,
        details={f"n{n}": s for n, s in stat.items()},
    )


@_timed
def check_rate_centering(seed=6):
    """I at the circle-equilibrium grid measure is 0 within 1e-3, and the
    plane/sphere rate identity holds to 1e-9 on random 50-atom measures."""
    m = 4096
    circle = fn.circle_grid(m)
    nu_s = GridMeasure("plane", circle, np.full(m, 1.0 / m))
    spec = fn.kac_plane_spec(m=m, offset=0.5)
    value = fn.rate_function(nu_s, spec, M=30.0)
    rng = np.random.default_rng(seed)
    worst_res = 0.0
    for i in range(100):
        atoms = _separated_atoms(rng, 50, min_dist=1e-3)
        w = rng.dirichlet(np.ones(50))
        mu = GridMeasure("plane", atoms, w)
        variant = fn.kac_plane_spec(m=256, offset=0.5) if i % 2 == 0 else fn.elliptic_plane_spec(n_r=40, n_angle=16)
        worst_res = max(worst_res, fn.plane_sphere_rate_identity_residual(mu, variant, M=30.0))
    passed = abs(value) <= 1e-3 and worst_res <= 1e-9
    return CheckRecord(
        check="rate-centering-and-identity",
        n=m,
        statistic=abs(value),
        bound=1e-3,
        passed=passed,
        details={"rate_at_circle_grid": value, "max_identity_residual": worst_res},
    )


def _separated_atoms(rng, count, min_dist, radius=1.0):
    atoms = []
    while len(atoms) < count:
        z = radius * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        if all(abs(z - a) >= min_dist for a in atoms):
            atoms.append(z)
    return np.asarray(atoms)


@_timed
def check_elliptic_equilibrium():
    """Minimizer of the elliptic rate on a 2000-point sphere grid: value
    -0.5 within 0.02 and close to the uniform measure."""
    pts, wts = fn.sphere_grid(40, 50)
    spec = fn.elliptic_sphere_spec(41, 49)
    cfg = eq.OptimizerConfig(support=pts, space="sphere", max_iterations=3000, tolerance=2e-2)
    res = eq.minimize_rate(spec, cfg)
    uniform = GridMeasure("sphere", pts, wts)
    dist = bl_distance(res.measure, uniform, mode="surrogate").value
    passed = abs(res.value + 0.5) <= 0.02 and dist <= 0.1
    return CheckRecord(
        check="elliptic-equilibrium",
        n=len(pts),
        statistic=res.value,
        bound=0.02,
        passed=passed,
        details={"distance_to_uniform": dist, "gap": res.gap, "iterations": res.iterations},
    )


@_timed
def check_convergence_to_equilibrium(seeds=20):
    """Median surrogate distance to the equilibrium grid decreases over
    n in {16, 64, 256} and ends below 0.1, for both models."""
    m = 1024
    nu_s = GridMeasure("plane", fn.circle_grid(m), np.full(m, 1.0 / m))
    fs_pts, fs_w = fn.fubini_study_grid(32, 32)
    fs = GridMeasure("plane", fs_pts, fs_w)
    medians = {}
    passed = True
    for basis, ref in (("kac", nu_s), ("elliptic", fs)):
        med = []
        for n in (16, 64, 256):
            ds = []
            for seed in range(seeds):
                mu = en.find_roots(en.sample_coefficients(en.ModelSpec(basis, "complex", n), seed))
                ds.append(bl_distance(mu, ref, mode="surrogate").value)
            med.append(float(np.median(ds)))
        medians[basis] = med
        passed = passed and med[0] > med[1] > med[2] and med[2] < 0.1
    return CheckRecord(
        check="convergence-to-equilibrium",
        n=[16, 64, 256],
        statistic=max(medians["kac"][2], medians["elliptic"][2]),
        bound=0.1,
        passed=passed,
        details=medians,
    )


@_timed
def check_symmetry_gate(seed=7):
    """The real-case rate is +inf exactly on asymmetric grid measures and
    half the centered value on their symmetrizations."""
    rng = np.random.default_rng(seed)
    spec = fn.kac_plane_spec(m=256, offset=0.5)
    failures = 0
    for _ in range(100):
        upper = _separated_atoms(rng, 10, 1e-3) + 0.2j  # keep off the real axis
        support = np.concatenate([upper, np.conj(upper)])
        w = rng.dirichlet(np.ones(len(support)))
        mu = GridMeasure("plane", support, w)
        sym = symmetrize(mu)
        t_asym = fn.tilde_rate_function(mu, spec, M=30.0)
        t_sym = fn.tilde_rate_function(sym, spec, M=30.0)
        expect = 0.5 * fn.rate_function(sym, spec, M=30.0)
        if not math.isinf(t_asym) or abs(t_sym - expect) > 1e-12:
            failures += 1
    return CheckRecord(
        check="real-symmetry-gate",
        n=100,
        statistic=float(failures),
        bound=0.0,
        passed=failures == 0,
    )


@_timed
def check_chain_health(seed=8):
    """Detailed balance on logged proposals, cache coherence, Gelman-Rubin."""
    db_err = detailed_balance_error(seed=seed)
    spec = en.ModelSpec("kac", "complex", 4)
    run = gb.mcmc_complex(spec, 20_000, seed=seed)
    drift = run.diagnostics.max_cache_drift
    traces = []
    for stream, init_scale in ((1, 0.05), (2, 5.0)):
        sampler = gb.ComplexGasSampler(
            spec, seed=seed, stream=stream,
            init=init_scale * np.exp(2j * np.pi * np.arange(4) / 4),
        )
        traces.append(sampler.run(40_000).h_trace)
    gr = gb.gelman_rubin(traces)
    passed = db_err <= 1e-12 and drift <= gb.CACHE_DRIFT_TOL and gr < 1.1
    return CheckRecord(
        check="chain-health",
        n=4,
        statistic=max(db_err, drift),
        bound=1e-9,
        passed=passed,
        details={"detailed_balance_error": db_err, "cache_drift": drift, "gelman_rubin": gr},
    )


def _log_multiset_density(particles, k, spec):
    """Unnormalized stationary density of the mixture chain on multisets:
    (n-2k)! k! / Z_{n,k} * exp(-beta/2 H), pair slots on the upper half-plane."""
    n = spec.n
    log_z = ex.mixture_constants(spec).log_z
    h = fn.hamiltonian(particles, spec)
    return (
        math.lgamma(n - 2 * k + 1)
        + math.lgamma(k + 1)
        - log_z[k]
        - 0.5 * spec.beta_n * h
    )


def detailed_balance_error(seed=8, proposals_per_move=40):
    """pi(x) q(x->y) alpha(x->y) = pi(y) q(y->x) alpha(y->x) on logged
    proposals, with every density recomputed from first principles.

    For in-place moves the proposal is symmetric, so the balance condition
    reduces to the acceptance ratio matching the from-scratch density
    ratio; for dimension moves the full reversible-jump ratio is rebuilt
    from the mixture constants, move probabilities, half-normal densities
    and the (midpoint, spread) change of variables.
    """
    worst = 0.0
    # complex chain: particle moves and the inversion involution at n = 3
    cspec = en.ModelSpec("kac", "complex", 3)
    sampler = gb.ComplexGasSampler(cspec, seed=seed)
    for _ in range(200):
        rec = sampler.step()
        h_x = fn.hamiltonian(rec.before, cspec)
        h_y = fn.hamiltonian(rec.after, cspec)
        expected = -cspec.beta_n * (h_y - h_x)
        if rec.move == "invert":
            expected += rec.aux["log_jacobian"]
        worst = max(worst, abs(rec.log_ratio - expected))

    # real mixture chain at n = 3: every move type
    rspec = en.ModelSpec("kac", "real", 3)
    rsampler = gb.RealMixtureSampler(rspec, seed=seed)
    seen = {m: 0 for m in ("real", "pair", "split", "merge", "invert")}
    guard = 0
    while min(seen.values()) < proposals_per_move and guard < 100_000:
        guard += 1
        k_before = rsampler.k
        probs_before = gb.move_probabilities(3, k_before)
        sigma = rsampler.scale_dim
        rec = rsampler.step()
        if not np.isfinite(rec.log_ratio):
            continue
        seen[rec.move] = seen.get(rec.move, 0) + 1
        pi_x = _log_multiset_density(rec.before, rec.k_before, rspec)
        pi_y = _log_multiset_density(rec.after, rec.k_after, rspec)
        if rec.move in ("real", "pair"):
            expected = pi_y - pi_x
        elif rec.move == "invert":
            expected = pi_y - pi_x + rec.aux["log_jacobian"]
        elif rec.move == "split":
            k = rec.k_before
            n_real = 3 - 2 * k
            probs_after = gb.move_probabilities(3, k + 1)
            log_qf = (
                math.log(probs_before["split"])
                + math.log(2.0 / (n_real * (n_real - 1)))
                + gb._half_normal_logpdf(rec.aux["s"], sigma)
                + math.log(2.0)  # d(r_min) d(r_max) = 2 dm dv
            )
            log_qr = (
                math.log(probs_after["merge"])
                - math.log(k + 1.0)
                + gb._half_normal_logpdf(rec.aux["v"], sigma)
            )
            expected = (pi_y + log_qr) - (pi_x + log_qf)
        else:  # merge
            k = rec.k_before
            n_real_after = 3 - 2 * (k - 1)
            probs_after = gb.move_probabilities(3, k - 1)
            log_qf = (
                math.log(probs_before["merge"])
                - math.log(float(k))
                + gb._half_normal_logpdf(rec.aux["v"], sigma)
            )
            log_qr = (
                math.log(probs_after["split"])
                + math.log(2.0 / (n_real_after * (n_real_after - 1)))
                + gb._half_normal_logpdf(rec.aux["s"], sigma)
                + math.log(2.0)
            )
            expected = (pi_y + log_qr) - (pi_x + log_qf)
        worst = max(worst, abs(rec.log_ratio - expected))
    return worst


ALL_CHECKS = [
    ("1-geometry", check_geometry_identities),
    ("2-parseval", check_parseval),
    ("3-elliptic-orthonormality", check_elliptic_orthonormality),
    ("4-bernstein-markov", check_bernstein_markov),
    ("5-root-finder", check_root_finder),
    ("6-law-equivalence", check_law_equivalence),
    ("7-real-mixture", check_real_mixture_weights),
    ("8-z-control", check_z_uniform_control),
    ("9-rate-centering", check_rate_centering),
    ("10-elliptic-equilibrium", check_elliptic_equilibrium),
    ("11-convergence", check_convergence_to_equilibrium),
    ("12-symmetry-gate", check_symmetry_gate),
    ("13-chain-health", check_chain_health),
]


def run_all(names=None, report=print):
    """Run (a subset of) the acceptance checks, printing one line each."""
    records = []
    for label, check in ALL_CHECKS:
        if names and not any(s in label for s in names):
            continue
        rec = check()
        records.append((label, rec))
        verdict = "PASS" if rec.passed else "FAIL"
        report(
            f"{verdict} {label}: statistic={rec.statistic:.6g} bound={rec.bound:.6g}"
            f" ({rec.seconds:.1f}s)"
        )
    return records
