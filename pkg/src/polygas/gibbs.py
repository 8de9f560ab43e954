"""MCMC for the root gases: a Metropolis chain for the complex case and a
reversible-jump chain for the real mixture, plus cross-validation helpers.

Both chains keep the confinement term incrementally up to date through the
monic coefficients of prod_i (X - z_i): moving one particle is a synthetic
division followed by a multiplication, O(n) per move.  Caches are rebuilt
from scratch every `resync_every` steps and the observed drift is recorded.

Randomness comes from the counter-based Philox generator: identical
(seed, stream) gives identical chains; stream s of a multi-chain run uses
Philox(key=seed).jumped(s).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .ensembles import log_binomial, monic_from_roots, sample_coefficients, find_roots
from .ensembles import ModelSpec
from .exactlaws import mixture_constants

RESYNC_EVERY = 1000
CACHE_DRIFT_TOL = 1e-9
DIM_MOVE_PROB = 0.15
INVERT_MOVE_PROB = 0.05
TARGET_ACCEPTANCE = 0.3


@dataclass
class GasState:
    """One gas configuration; k counts conjugate pairs (None for the complex chain)."""

    particles: np.ndarray
    k: int = None
    energy: float = math.nan


@dataclass
class ProposalRecord:
    """Everything needed to audit one proposal against detailed balance."""

    move: str
    before: np.ndarray
    after: np.ndarray
    k_before: int
    k_after: int
    log_accept: float  # min(0, log R)
    log_ratio: float  # the full log R the sampler used
    aux: dict
    accepted: bool


@dataclass
class ChainDiagnostics:
    acceptance_rates: dict
    autocorr_time: float
    k_histogram: np.ndarray
    max_cache_drift: float
    burn_in: int


@dataclass
class GibbsRun:
    states: list
    h_trace: np.ndarray
    k_trace: np.ndarray
    diagnostics: ChainDiagnostics
    record_every: int = 1

    def effective_states(self):
        """States thinned by the integrated autocorrelation time of H."""
        thin = max(1, math.ceil(self.diagnostics.autocorr_time / self.record_every))
        return self.states[::thin]


def integrated_autocorrelation(x, window_factor=10.0):
    """Sokal-windowed IAT estimate: tau = 1 + 2 sum rho_t, stopping at the
    first negative autocorrelation or at t > window_factor * tau."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 16:
        return 1.0
    x = x - x.mean()
    var = float(x @ x)
    if var == 0.0:
        return 1.0
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n].real / var
    tau = 1.0
    for t in range(1, n):
        if acov[t] < 0.0:
            break
        tau += 2.0 * acov[t]
        if t > window_factor * tau:
            break
    return max(tau, 1.0)


def gelman_rubin(traces):
    """Potential scale reduction factor across chains of equal length."""
    traces = np.asarray(traces, dtype=float)
    m, n = traces.shape
    means = traces.mean(axis=1)
    w = traces.var(axis=1, ddof=1).mean()
    b = n * means.var(ddof=1)
    v_hat = (n - 1) / n * w + b / n
    return float(np.sqrt(v_hat / w))


def _half_normal_logpdf(x, sigma):
    if x <= 0:
        return -math.inf
    return 0.5 * math.log(2.0 / math.pi) - math.log(sigma) - x * x / (2.0 * sigma * sigma)


def _deflate(b, r):
    """Divide the ascending-coefficient polynomial by (X - r); r must be a root.

    Forward synthetic division is stable for |r| <= 1, the reversed recursion
    for |r| > 1.
    """
    n = len(b) - 1
    q = np.empty(n, dtype=complex)
    if abs(r) <= 1.0:
        q[n - 1] = b[n]
        for k in range(n - 1, 0, -1):
            q[k - 1] = b[k] + r * q[k]
    else:
        q[0] = -b[0] / r
        for k in range(1, n):
            q[k] = (q[k - 1] - b[k]) / r
    return q

def _graft(b, r):
    """Multiply the ascending-coefficient polynomial by (X - r)."""
    out = np.empty(len(b) + 1, dtype=complex)
    out[0] = -r * b[0]
    out[1:-1] = b[:-1] - r * b[1:]
    out[-1] = b[-1]
    return out


class _Confinement:
    """Incrementally maintained log of the confinement integral.

    For the kac and elliptic bases this is Parseval in coefficient space:
    log sum_k |b_k|^2 m_k over the monic coefficients, with m_k = 1 (kac) or
    1/((n+1) C(n,k)) (elliptic).  Orthogonal models keep the per-grid-point
    log products and integrate by quadrature.
    """

    def __init__(self, spec):
        self.spec = spec
        n = spec.n
        if spec.basis == "kac":
            self.weights = np.ones(n + 1)
        elif spec.basis == "elliptic":
            self.weights = np.exp(-np.log(n + 1.0) - log_binomial(n, np.arange(n + 1)))
        else:
            self.weights = None
            with np.errstate(divide="ignore"):
                self.log_nu = np.log(spec.nu_weights) - n * spec.phi

    def from_scratch(self, particles):
        if self.weights is not None:
            b, log_scale = monic_from_roots(particles)
            return (b, log_scale)
        d = np.abs(self.spec.support[:, None] - particles[None, :])
        with np.errstate(divide="ignore"):
            logs = 2.0 * np.sum(np.log(d), axis=1)
        return (logs,)

    def value(self, cache):
        if self.weights is not None:
            b, log_scale = cache
            return 2.0 * log_scale + math.log(float((np.abs(b) ** 2) @ self.weights))
        from scipy.special import logsumexp

        return float(logsumexp(self.log_nu + cache[0]))

    def update(self, cache, removed, added):
        if self.weights is not None:
            b, log_scale = cache
            for r in removed:
                b = _deflate(b, r)
            for r in added:
                b = _graft(b, r)
            top = np.max(np.abs(b))
            if top > 0 and (top > 1e50 or top < 1e-50):
                b = b / top
                log_scale = log_scale + math.log(top)
            return (b, log_scale)
        logs = cache[0].copy()
        with np.errstate(divide="ignore"):
            for r in removed:
                logs -= 2.0 * np.log(np.abs(self.spec.support - r))
            for r in added:
                logs += 2.0 * np.log(np.abs(self.spec.support - r))
        return (logs,)


def _pair_sum(particles):
    """sum_{i<j} log |z_i - z_j|."""
    n = len(particles)
    if n < 2:
        return 0.0
    d = np.abs(particles[:, None] - particles[None, :])
    iu = np.triu_indices(n, k=1)
    return float(np.sum(np.log(d[iu])))


def _cross_sum(z, others):
    """sum_o log |z - others_o|."""
    if len(others) == 0:
        return 0.0
    return float(np.sum(np.log(np.abs(z - others))))


def philox_stream(seed, stream=0):
    """Documented multi-chain splitting rule: stream s jumps the Philox
    counter s times, so chains never overlap."""
    bg = np.random.Philox(seed)
    if stream:
        bg = bg.jumped(stream)
    return np.random.Generator(bg)


SCALE_CLAMP = 16.0  # adaptive scales stay within this factor of their start


class _BaseSampler:
    def __init__(self, spec, seed, stream=0):
        self.spec = spec
        self.n = spec.n
        self.beta = spec.beta_n
        self.rng = philox_stream(seed, stream)
        self.confinement = _Confinement(spec)
        self.accept_counts = {}
        self.propose_counts = {}
        self.max_cache_drift = 0.0
        self._steps_done = 0

    def _count(self, move, accepted):
        self.propose_counts[move] = self.propose_counts.get(move, 0) + 1
        if accepted:
            self.accept_counts[move] = self.accept_counts.get(move, 0) + 1

    def hamiltonian_value(self):
        n = self.n
        return -2.0 * self.pair_sum / n**2 + (n + 1) / n**2 * self.confinement.value(
            self.conf_cache
        )

    def resync(self):
        """Rebuild caches from scratch; record (and return) the H drift."""
        h_cached = self.hamiltonian_value()
        self.pair_sum = _pair_sum(self.particles_array())
        self.conf_cache = self.confinement.from_scratch(self.particles_array())
        drift = abs(h_cached - self.hamiltonian_value())
        self.max_cache_drift = max(self.max_cache_drift, drift)
        return drift

    def acceptance_rates(self):
        return {
            move: self.accept_counts.get(move, 0) / max(1, cnt)
            for move, cnt in self.propose_counts.items()
        }

    def run(self, steps, record_every=1, burn_in=None, adapt=True):
        """Drive the chain; burn-in defaults to steps // 5 and is discarded.

        Proposal scales adapt toward 0.3 acceptance during burn-in only, so
        the recorded part of the chain is a fixed-kernel Markov chain.
        """
        burn_in = steps // 5 if burn_in is None else burn_in
        h_trace = np.empty(steps - burn_in)
        k_trace = np.empty(steps - burn_in, dtype=int)
        states = []
        for t in range(steps):
            self.step(adapt=adapt and t < burn_in)
            if self._steps_done % RESYNC_EVERY == 0:
                self.resync()
            if t >= burn_in:
                i = t - burn_in
                h_trace[i] = self.hamiltonian_value()
                k_trace[i] = self.k if self.k is not None else -1
                if i % record_every == 0:
                    states.append(self.snapshot())
        kmax = self.n // 2
        k_hist = None
        if self.k is not None:
            k_hist = np.bincount(k_trace, minlength=kmax + 1)[: kmax + 1]
        diag = ChainDiagnostics(
            acceptance_rates=self.acceptance_rates(),
            autocorr_time=integrated_autocorrelation(h_trace),
            k_histogram=k_hist,
            max_cache_drift=self.max_cache_drift,
            burn_in=burn_in,
        )
        return GibbsRun(
            states=states,
            h_trace=h_trace,
            k_trace=k_trace if self.k is not None else None,
            diagnostics=diag,
            record_every=record_every,
        )


class ComplexGasSampler(_BaseSampler):
    """Metropolis chain with single-particle Gaussian proposals targeting
    exp(-beta_n H) on C^n."""

    def __init__(self, spec, seed, init=None, scale=None, stream=0):
        super().__init__(spec, seed, stream)
        if init is None:
            complex_spec = ModelSpec(
                basis=spec.basis,
                field="complex",
                n=spec.n,
                beta_n=spec.beta_n,
                support=spec.support,
                nu_weights=spec.nu_weights,
                phi=spec.phi,
            )
            init = find_roots(sample_coefficients(complex_spec, seed)).atoms
        self.z = np.asarray(init, dtype=complex).copy()
        self.k = None
        self.scale = scale if scale is not None else 0.5 / math.sqrt(self.n)
        self.pair_sum = _pair_sum(self.z)
        self.conf_cache = self.confinement.from_scratch(self.z)

    def particles_array(self):
        return self.z

    def snapshot(self):
        return GasState(particles=self.z.copy(), k=None, energy=self.hamiltonian_value())

    def propose(self):
        i = int(self.rng.integers(self.n))
        dz = self.scale * complex(self.rng.standard_normal(), self.rng.standard_normal())
        z_new = self.z[i] + dz
        others = np.delete(self.z, i)
        delta_pair = _cross_sum(z_new, others) - _cross_sum(self.z[i], others)
        cache_new = self.confinement.update(self.conf_cache, [self.z[i]], [z_new])
        conf_old = self.confinement.value(self.conf_cache)
        conf_new = self.confinement.value(cache_new)
        n = self.n
        delta_h = -2.0 * delta_pair / n**2 + (n + 1) / n**2 * (conf_new - conf_old)
        log_ratio = -self.beta * delta_h
        return i, z_new, cache_new, delta_pair, log_ratio

    def step(self, adapt=False):
        self._steps_done += 1
        if self.rng.uniform() < INVERT_MOVE_PROB:
            return self._invert_step()
        i, z_new, cache_new, delta_pair, log_ratio = self.propose()
        accepted = math.log(self.rng.uniform()) < log_ratio
        before = self.z.copy()
        if accepted:
            self.z[i] = z_new
            self.pair_sum += delta_pair
            self.conf_cache = cache_new
        self._count("particle", accepted)
        if adapt:
            self._adapt()
        return ProposalRecord(
            move="particle",
            before=before,
            after=self.z.copy() if accepted else np.concatenate([before[:i], [z_new], before[i + 1 :]]),
            k_before=-1,
            k_after=-1,
            log_accept=min(0.0, log_ratio),
            log_ratio=log_ratio,
            aux={"index": i, "scale": self.scale},
            accepted=accepted,
        )

    def _invert_step(self):
        """Deterministic involution z -> 1/z on every particle.

        The root law is exchange-symmetric under coefficient reversal, so at
        beta_n = n^2 this global jump is accepted with probability one; the
        acceptance below carries the full Metropolis ratio (target change
        plus the inversion Jacobian 1/|z_i|^4 per particle), so it remains
        correct for any beta_n.  It teleports heavy-tail excursions back
        into the bulk, which single-particle moves traverse slowly.
        """
        before = self.z.copy()
        if np.any(self.z == 0):
            return ProposalRecord("invert", before, before, -1, -1, -math.inf, -math.inf, {}, False)
        z_new = 1.0 / self.z
        pair_new = _pair_sum(z_new)
        cache_new = self.confinement.from_scratch(z_new)
        n = self.n
        h_old = self.hamiltonian_value()
        h_new = -2.0 * pair_new / n**2 + (n + 1) / n**2 * self.confinement.value(cache_new)
        log_jac = -4.0 * float(np.sum(np.log(np.abs(self.z))))
        log_ratio = -self.beta * (h_new - h_old) + log_jac
        accepted = math.log(self.rng.uniform()) < log_ratio
        if accepted:
            self.z = z_new
            self.pair_sum = pair_new
            self.conf_cache = cache_new
        self._count("invert", accepted)
        return ProposalRecord(
            move="invert",
            before=before,
            after=z_new,
            k_before=-1,
            k_after=-1,
            log_accept=min(0.0, log_ratio),
            log_ratio=log_ratio,
            aux={"log_jacobian": log_jac},
            accepted=accepted,
        )

    def _adapt(self):
        cnt = self.propose_counts.get("particle", 0)
        if cnt and cnt % 50 == 0:
            rate = self.accept_counts.get("particle", 0) / cnt
            grown = self.scale * math.exp(0.5 * (rate - TARGET_ACCEPTANCE))
            base = 0.5 / math.sqrt(self.n)
            self.scale = min(max(grown, base / SCALE_CLAMP), base * SCALE_CLAMP)


def move_probabilities(n, k):
    """Probabilities of the four move types at mixture index k; dimension
    moves carry fixed mass when feasible, in-place moves share the rest."""
    n_real = n - 2 * k
    probs = {}
    if n_real >= 2:
        probs["split"] = DIM_MOVE_PROB
    if k >= 1:
        probs["merge"] = DIM_MOVE_PROB
    in_place = []
    if n_real >= 1:
        in_place.append("real")
    if k >= 1:
        in_place.append("pair")
    rest = 1.0 - sum(probs.values())
    for move in in_place:
        probs[move] = rest / len(in_place)
    return probs


class RealMixtureSampler(_BaseSampler):
    """Reversible-jump chain for the mixture over (reals, conjugate pairs).

    State layout: n - 2k exactly-real particles and k upper-half-plane pair
    representatives (their mirrors are implicit).  Moves: a real particle
    slides along R, a pair representative moves in C (reflected back to the
    upper half-plane), and a dimension move exchanges two reals for one
    conjugate pair.  The dimension move places the pair at the midpoint of
    the vanishing reals with a fresh half-normal imaginary part, and the
    reverse move re-draws the half-spread of the restored reals from the
    same half-normal, making both directions absolutely continuous; the
    acceptance ratio carries the Z_{n,k} ratio, the move-choice and proposal
    densities, and a constant 1/4 from the (midpoint, spread)
    change of variables together with the half-plane pair convention.  The
    mixture's pair slots range over the upper half-plane: that convention is
    pinned by the degree-2 oracle (the chain's k-marginal must reproduce the
    probability that a random real quadratic has complex roots).
    """

    def __init__(self, spec, seed, init=None, scale=None, stream=0):
        super().__init__(spec, seed, stream)
        if spec.field != "real":
            raise ValueError("the mixture chain targets the real-coefficient law")
        self.log_z = mixture_constants(spec).log_z
        if init is None:
            roots = find_roots(sample_coefficients(spec, seed)).atoms
            reals = roots[np.abs(roots.imag) <= 1e-9].real
            pairs = roots[roots.imag > 1e-9]
            self.reals = np.sort(reals.astype(float))
            self.pairs = np.asarray(pairs, dtype=complex)
        else:
            self.reals = np.asarray(init[0], dtype=float).copy()
            self.pairs = np.asarray(init[1], dtype=complex).copy()
        if len(self.reals) + 2 * len(self.pairs) != self.n:
            raise ValueError("initial state has the wrong particle count")
        base = scale if scale is not None else 0.5 / math.sqrt(self.n)
        self.scale_real = base
        self.scale_pair = base
        self.scale_dim = base
        self.pair_sum = _pair_sum(self.particles_array())
        self.conf_cache = self.confinement.from_scratch(self.particles_array())

    @property
    def k(self):
        return len(self.pairs)

    @k.setter
    def k(self, value):  # k is derived state; setter keeps the base class happy
        pass

    def particles_array(self):
        return np.concatenate(
            [self.reals.astype(complex), self.pairs, np.conj(self.pairs)]
        )

    def snapshot(self):
        return GasState(
            particles=self.particles_array(), k=self.k, energy=self.hamiltonian_value()
        )

    def _others(self, exclude_reals=(), exclude_pairs=()):
        keep_r = np.delete(self.reals, list(exclude_reals)).astype(complex)
        keep_p = np.delete(self.pairs, list(exclude_pairs))
        return np.concatenate([keep_r, keep_p, np.conj(keep_p)])

    def step(self, adapt=False):
        self._steps_done += 1
        if self.rng.uniform() < INVERT_MOVE_PROB:
            record = self._move_invert()
            self._count("invert", record.accepted)
            return record
        probs = move_probabilities(self.n, self.k)
        moves = sorted(probs)
        u = self.rng.uniform()
        acc = 0.0
        move = moves[-1]
        for name in moves:
            acc += probs[name]
            if u < acc:
                move = name
                break
        record = getattr(self, f"_move_{move}")(probs)
        self._count(move, record.accepted)
        if adapt:
            self._adapt(move)
        return record

    def _move_invert(self):
        """Global involution: reals r -> 1/r, pair representatives p -> 1/conj(p)
        (which stays in the upper half-plane).  Rejection-free at beta_n = n^2
        by the reversal symmetry of the root law; the ratio below keeps it
        correct for general beta_n."""
        before = self.particles_array()
        k = self.k
        if np.any(self.reals == 0) or np.any(self.pairs == 0):
            return ProposalRecord("invert", before, before, k, k, -math.inf, -math.inf, {}, False)
        new_reals = 1.0 / self.reals
        new_pairs = 1.0 / np.conj(self.pairs)
        proposed = self._proposed_particles(new_reals, new_pairs)
        pair_new = _pair_sum(proposed)
        cache_new = self.confinement.from_scratch(proposed)
        n = self.n
        h_old = self.hamiltonian_value()
        h_new = -2.0 * pair_new / n**2 + (n + 1) / n**2 * self.confinement.value(cache_new)
        log_jac = -2.0 * float(np.sum(np.log(np.abs(self.reals)))) - 4.0 * float(
            np.sum(np.log(np.abs(self.pairs)))
        )
        log_ratio = -0.5 * self.beta * (h_new - h_old) + log_jac
        accepted = math.log(self.rng.uniform()) < log_ratio
        if accepted:
            self.reals = new_reals
            self.pairs = new_pairs
            self.pair_sum = pair_new
            self.conf_cache = cache_new
        return ProposalRecord(
            move="invert",
            before=before,
            after=proposed,
            k_before=k,
            k_after=k,
            log_accept=min(0.0, log_ratio),
            log_ratio=log_ratio,
            aux={"log_jacobian": log_jac},
            accepted=accepted,
        )

    def _adapt(self, move):
        """Burn-in adaptation: in-place scales do a clamped Robbins-Monro
        step toward 0.3 acceptance; the dimension scale instead tracks the
        scale of the imaginary parts actually in play.

        Acceptance-targeting is unstable for the dimension scale: shrinking
        it lowers both split and merge acceptance (the reverse-move density
        at order-one spreads vanishes), so the feedback spirals to zero and
        freezes the k moves.  Matching the half-normal to the observed
        |Im| of the pairs keeps both directions well proposed.
        """
        base = 0.5 / math.sqrt(self.n)
        if move in ("real", "pair"):
            cnt = self.propose_counts.get(move, 0)
            if cnt and cnt % 50 == 0:
                rate = self.accept_counts.get(move, 0) / cnt
                attr = {"real": "scale_real", "pair": "scale_pair"}[move]
                grown = getattr(self, attr) * math.exp(0.5 * (rate - TARGET_ACCEPTANCE))
                setattr(self, attr, min(max(grown, base / SCALE_CLAMP), base * SCALE_CLAMP))
        if len(self.pairs) > 0:
            observed = math.sqrt(math.pi / 2.0) * float(np.mean(np.abs(self.pairs.imag)))
            blended = 0.95 * self.scale_dim + 0.05 * observed
            self.scale_dim = min(max(blended, base / SCALE_CLAMP), base * SCALE_CLAMP)

    def _finish(self, move, before, k_before, k_after, proposed, delta_pair, cache_new, log_extra, aux, commit):
        conf_old = self.confinement.value(self.conf_cache)
        conf_new = self.confinement.value(cache_new)
        n = self.n
        delta_h = -2.0 * delta_pair / n**2 + (n + 1) / n**2 * (conf_new - conf_old)
        log_ratio = -0.5 * self.beta * delta_h + log_extra
        accepted = math.log(self.rng.uniform()) < log_ratio
        if accepted:
            commit()
            self.pair_sum += delta_pair
            self.conf_cache = cache_new
        return ProposalRecord(
            move=move,
            before=before,
            after=proposed,
            k_before=k_before,
            k_after=k_after,
            log_accept=min(0.0, log_ratio),
            log_ratio=log_ratio,
            aux=aux,
            accepted=accepted,
        )

    def _proposed_particles(self, reals, pairs):
        return np.concatenate([np.asarray(reals, dtype=complex), pairs, np.conj(pairs)])

    def _move_real(self, probs):
        before = self.particles_array()
        i = int(self.rng.integers(len(self.reals)))
        r_old = self.reals[i]
        r_new = r_old + self.scale_real * self.rng.standard_normal()
        others = self._others(exclude_reals=[i])
        delta_pair = _cross_sum(complex(r_new), others) - _cross_sum(complex(r_old), others)
        cache_new = self.confinement.update(self.conf_cache, [complex(r_old)], [complex(r_new)])
        new_reals = self.reals.copy()
        new_reals[i] = r_new
        proposed = self._proposed_particles(new_reals, self.pairs)

        def commit():
            self.reals[i] = r_new

        return self._finish(
            "real", before, self.k, self.k, proposed, delta_pair, cache_new, 0.0,
            {"index": i, "old": r_old, "new": r_new, "scale": self.scale_real}, commit,
        )

    def _move_pair(self, probs):
        before = self.particles_array()
        j = int(self.rng.integers(len(self.pairs)))
        p_old = self.pairs[j]
        dz = self.scale_pair * complex(self.rng.standard_normal(), self.rng.standard_normal())
        p_new = p_old + dz
        if p_new.imag < 0:
            p_new = np.conj(p_new)  # reflected proposal, still symmetric
        aux = {"index": j, "old": p_old, "new": p_new, "scale": self.scale_pair}
        if p_new.imag == 0.0:
            return ProposalRecord("pair", before, before, self.k, self.k, -math.inf, -math.inf, aux, False)
        others = self._others(exclude_pairs=[j])
        removed = [p_old, np.conj(p_old)]
        added = [p_new, np.conj(p_new)]
        delta_pair = (
            _cross_sum(p_new, others)
            + _cross_sum(np.conj(p_new), others)
            + math.log(abs(p_new - np.conj(p_new)))
            - _cross_sum(p_old, others)
            - _cross_sum(np.conj(p_old), others)
            - math.log(abs(p_old - np.conj(p_old)))
        )
        cache_new = self.confinement.update(self.conf_cache, removed, added)
        new_pairs = self.pairs.copy()
        new_pairs[j] = p_new
        proposed = self._proposed_particles(self.reals, new_pairs)

        def commit():
            self.pairs[j] = p_new

        return self._finish("pair", before, self.k, self.k, proposed, delta_pair, cache_new, 0.0, aux, commit)

    def _move_split(self, probs):
        before = self.particles_array()
        k = self.k
        idx = self.rng.choice(len(self.reals), size=2, replace=False)
        i, j = int(idx[0]), int(idx[1])
        r_i, r_j = self.reals[i], self.reals[j]
        mid = 0.5 * (r_i + r_j)
        spread_old = 0.5 * abs(r_j - r_i)
        s = abs(self.scale_dim * self.rng.standard_normal())
        p_new = complex(mid, s)
        aux = {"i": i, "j": j, "s": s, "v": spread_old, "mid": mid, "sigma": self.scale_dim}
        if s == 0.0 or spread_old == 0.0:
            return ProposalRecord("split", before, before, k, k, -math.inf, -math.inf, aux, False)
        others = self._others(exclude_reals=[i, j])
        delta_pair = (
            _cross_sum(p_new, others)
            + _cross_sum(np.conj(p_new), others)
            + math.log(abs(p_new - np.conj(p_new)))
            - _cross_sum(complex(r_i), others)
            - _cross_sum(complex(r_j), others)
            - math.log(abs(r_i - r_j))
        )
        cache_new = self.confinement.update(
            self.conf_cache, [complex(r_i), complex(r_j)], [p_new, np.conj(p_new)]
        )
        probs_after = move_probabilities(self.n, k + 1)
        log_extra = (
            self.log_z[k]
            - self.log_z[k + 1]
            + math.log(probs_after["merge"])
            - math.log(probs["split"])
            + _half_normal_logpdf(spread_old, self.scale_dim)
            - _half_normal_logpdf(s, self.scale_dim)
            - 2.0 * math.log(2.0)
        )
        proposed = self._proposed_particles(
            np.delete(self.reals, [i, j]), np.append(self.pairs, p_new)
        )

        def commit():
            self.reals = np.delete(self.reals, [i, j])
            self.pairs = np.append(self.pairs, p_new)

        return self._finish("split", before, k, k + 1, proposed, delta_pair, cache_new, log_extra, aux, commit)

    def _move_merge(self, probs):
        before = self.particles_array()
        k = self.k
        j = int(self.rng.integers(len(self.pairs)))
        p_old = self.pairs[j]
        mid, s = p_old.real, p_old.imag
        v = abs(self.scale_dim * self.rng.standard_normal())
        r_a, r_b = mid - v, mid + v
        aux = {"j": j, "s": s, "v": v, "mid": mid, "sigma": self.scale_dim}
        if v == 0.0:
            return ProposalRecord("merge", before, before, k, k, -math.inf, -math.inf, aux, False)
        others = self._others(exclude_pairs=[j])
        delta_pair = (
            _cross_sum(complex(r_a), others)
            + _cross_sum(complex(r_b), others)
            + math.log(abs(r_a - r_b))
            - _cross_sum(p_old, others)
            - _cross_sum(np.conj(p_old), others)
            - math.log(abs(p_old - np.conj(p_old)))
        )
        cache_new = self.confinement.update(
            self.conf_cache, [p_old, np.conj(p_old)], [complex(r_a), complex(r_b)]
        )
        probs_after = move_probabilities(self.n, k - 1)
        log_extra = (
            self.log_z[k]
            - self.log_z[k - 1]
            + math.log(probs_after["split"])
            - math.log(probs["merge"])
            + _half_normal_logpdf(s, self.scale_dim)
            - _half_normal_logpdf(v, self.scale_dim)
            + 2.0 * math.log(2.0)
        )
        proposed = self._proposed_particles(
            np.append(self.reals, [r_a, r_b]), np.delete(self.pairs, j)
        )

        def commit():
            self.pairs = np.delete(self.pairs, j)
            self.reals = np.append(self.reals, [r_a, r_b])

        return self._finish("merge", before, k, k - 1, proposed, delta_pair, cache_new, log_extra, aux, commit)


def mcmc_complex(spec, steps, seed, record_every=1, init=None):
    """Run the complex-gas Metropolis chain; returns a GibbsRun."""
    return ComplexGasSampler(spec, seed, init=init).run(steps, record_every=record_every)


def mcmc_real_mixture(spec, steps, seed, record_every=1, init=None):
    """Run the real-mixture reversible-jump chain; returns a GibbsRun."""
    return RealMixtureSampler(spec, seed, init=init).run(steps, record_every=record_every)


@dataclass
class TwoSampleRecord:
    statistic: str
    ks_statistic: float
    p_value: float
    method: str


def two_sample_validate(sample_a, sample_b, statistics):
    """Two-sample KS per summary statistic; exact method for small samples,
    permutation fallback for tiny ones.

    `statistics` maps names to callables GasState -> float; samples are
    sequences of GasState (or ready-made float arrays).
    """
    records = []
    for name, fn in statistics.items():
        if fn is None:
            a, b = np.asarray(sample_a, dtype=float), np.asarray(sample_b, dtype=float)
        else:
            a = np.array([fn(s) for s in sample_a], dtype=float)
            b = np.array([fn(s) for s in sample_b], dtype=float)
        n_min = min(len(a), len(b))
        if n_min == 0:
            raise ValueError("empty sample")
        if n_min < 30:
            stat = stats.ks_2samp(a, b, method="exact").statistic
            pooled = np.concatenate([a, b])
            rng = np.random.default_rng(0)
            count = 0
            n_perm = 2000
            for _ in range(n_perm):
                rng.shuffle(pooled)
                s = stats.ks_2samp(pooled[: len(a)], pooled[len(a) :], method="asymp").statistic
                if s >= stat:
                    count += 1
            records.append(TwoSampleRecord(name, float(stat), (count + 1) / (n_perm + 1), "permutation"))
        else:
            res = stats.ks_2samp(a, b, method="auto")
            records.append(TwoSampleRecord(name, float(res.statistic), float(res.pvalue), "ks"))
    return records
