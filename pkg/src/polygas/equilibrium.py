"""Convex minimization of (truncated) rate functionals over grid measures.

Frank-Wolfe on the simplex of grid weights: the energy enters as a quadratic
form in the weights, the J term as a max of affine functions with the argmax
grid point supplying the subgradient.  Each iterate is a sparse measure and
the linear minimization oracle is an argmin over grid points, so one
iteration costs O(grid) after the one-off kernel assembly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .functionals import DEFAULT_TRUNCATION, log_trunc, nearest_neighbor_distances
from .measures import GridMeasure, _pairwise_dist, conjugation_pairing

_LINE_SEARCH_ITERS = 60


@dataclass
class OptimizerConfig:
    """Grid, truncation and stopping policy for the rate minimizer.

    With `symmetric` set, iterates are projected onto conjugation-symmetric
    measures after every step (the grid must be conjugation-closed).
    `smoothing` is the temperature of the softmax that replaces the
    pointwise max in the J term: a bare argmax subgradient makes Frank-Wolfe
    jam on symmetric grids where many sup rows tie, while the smoothed
    objective is within smoothing * log(#sup points) of the true one and
    restores the standard convergence rate.  None picks a temperature
    matched to the requested tolerance.
    """

    support: np.ndarray
    space: str
    truncation: float = DEFAULT_TRUNCATION
    max_iterations: int = 4000
    tolerance: float = 1e-3
    symmetric: bool = False
    smoothing: float = 1e-3


@dataclass
class MinimizeResult:
    measure: GridMeasure
    value: float
    gap: float
    iterations: int
    converged: bool


def energy_kernel(space, support, M):
    """Quadratic-form matrix of the grid energy: -log_M distances off the
    diagonal, half nearest-neighbor self-interaction on it."""
    d = _pairwise_dist(space, support, support)
    np.fill_diagonal(d, np.inf)
    a = -log_trunc(d, M)
    nn = nearest_neighbor_distances(space, support)
    nn[~np.isfinite(nn)] = 0.0
    np.fill_diagonal(a, -log_trunc(nn / 2.0, M))
    return a


def j_term_matrix(spec, space, support, M):
    """Rows of the truncated J objective: B[z, j] = 2 log_M |z - x_j|, plus a
    per-row shift from the external field and the spec's additive constant."""
    d = _pairwise_dist(space, spec.sup_points, support)
    b = 2.0 * log_trunc(d, M)
    shift = -spec.field_values() + spec.constant
    return b, shift


def _softmax(values):
    shifted = values - values.max()
    e = np.exp(shifted)
    return e / e.sum()


def _smoothing_schedule(final_tau, max_iterations):
    """Annealing schedule: geometric temperatures ending at final_tau, with
    most of the iteration budget spent at the coldest stages."""
    taus = [0.3]
    while taus[-1] > final_tau * 1.0001:
        taus.append(max(taus[-1] / 3.0, final_tau))
    fractions = np.array([1.5**i for i in range(len(taus))], dtype=float)
    fractions /= fractions.sum()
    budgets = np.maximum((fractions * max_iterations).astype(int), 1)
    return list(zip(taus, budgets))


def minimize_rate(spec, cfg):
    """Frank-Wolfe minimization of energy + J over the simplex of weights.

    The pointwise max in J is smoothed by a softmax whose temperature is
    annealed down to cfg.smoothing across the iteration budget: the bare
    argmax subgradient jams on grids where many sup rows tie by symmetry,
    while the smoothed objective restores descent and stays within
    smoothing * log(#sup rows) of the true one.  The reported value is the
    true, unsmoothed objective of the final measure; the gap is the
    Frank-Wolfe gap at the final temperature.  A gap above tolerance at the
    iteration cap is flagged in the result, not raised.
    """
    if len(cfg.support) < 16:
        if len(cfg.support) == 1:
            w = np.array([1.0])
            mu = GridMeasure(space=cfg.space, support=cfg.support, weights=w)
            a = energy_kernel(cfg.space, cfg.support, cfg.truncation)
            b, shift = j_term_matrix(spec, cfg.space, cfg.support, cfg.truncation)
            value = float(a[0, 0] + np.max(b @ w + shift))
            return MinimizeResult(mu, value, 0.0, 0, True)
        raise ValueError("grid must have at least 16 points (or exactly one)")
    a = energy_kernel(cfg.space, cfg.support, cfg.truncation)
    b, shift = j_term_matrix(spec, cfg.space, cfg.support, cfg.truncation)
    m = len(cfg.support)
    pairing = None
    sup_pairing = None
    if cfg.symmetric:
        pairing = conjugation_pairing(cfg.support, space=cfg.space)
        sup_pairing = conjugation_pairing(spec.sup_points, space=spec.space)

    w = np.full(m, 1.0 / m)
    aw = a @ w
    waw = float(w @ aw)
    u = b @ w

    gap = math.inf
    iterations = 0
    final_tau = cfg.smoothing
    for tau, budget in _smoothing_schedule(final_tau, cfg.max_iterations):

        def smooth_j(rows):
            peak = rows.max()
            return peak + tau * math.log(float(np.sum(np.exp((rows - peak) / tau))))

        for _ in range(budget):
            iterations += 1
            p = _softmax((u + shift) / tau)
            grad = 2.0 * aw + b.T @ p
            s = int(np.argmin(grad))
            gw = float(grad @ w)
            gap = gw - float(grad[s])
            if gap <= cfg.tolerance:
                break
            # away steps only once the smoothing has cooled: with a warm
            # softmax the away-vertex choice is unreliable and disrupts the
            # global restructuring the plain steps perform
            if tau == final_tau:
                active = np.nonzero(w > 1e-15)[0]
                v = int(active[np.argmax(grad[active])])
                away_gap = float(grad[v]) - gw
            else:
                v = s
                away_gap = -math.inf
            if gap >= away_gap or w[v] >= 1.0:
                # toward-vertex step: w <- (1-t) w + t e_s
                was, sas, us = float(aw[s]), float(a[s, s]), b[:, s]

                def value_at(t):
                    quad = (1 - t) ** 2 * waw + 2 * t * (1 - t) * was + t**2 * sas
                    return quad + smooth_j((1 - t) * u + t * us + shift)

                t = _golden_min(value_at, 0.0, 1.0)
                w = (1 - t) * w
                w[s] += t
                aw = (1 - t) * aw + t * a[:, s]
                waw = (1 - t) ** 2 * waw + 2 * t * (1 - t) * was + t**2 * sas
                u = (1 - t) * u + t * us
            else:
                # away step: w <- w + t (w - e_v), drains stubborn atoms
                t_max = w[v] / (1.0 - w[v])
                wad = waw - float(aw[v])
                dad = waw - 2.0 * float(aw[v]) + float(a[v, v])
                dus = u - b[:, v]

                def value_at(t):
                    quad = waw + 2.0 * t * wad + t**2 * dad
                    return quad + smooth_j(u + t * dus + shift)

                t = min(_golden_min(value_at, 0.0, t_max), t_max)
                w = (1.0 + t) * w
                w[v] -= t
                w[v] = max(w[v], 0.0)
                aw = (1.0 + t) * aw - t * a[:, v]
                waw = waw + 2.0 * t * wad + t**2 * dad
                u = u + t * dus
            if cfg.symmetric:
                w = 0.5 * (w + w[pairing])
                aw = 0.5 * (aw + aw[pairing])
                u = 0.5 * (u + u[sup_pairing])
                waw = float(w @ aw)
        if gap <= cfg.tolerance and tau == final_tau:
            break
    w = np.maximum(w, 0.0)
    w /= w.sum()
    measure = GridMeasure(space=cfg.space, support=cfg.support, weights=w)
    return MinimizeResult(
        measure=measure,
        value=waw + float(np.max(u + shift)),
        gap=gap,
        iterations=iterations,
        converged=bool(gap <= cfg.tolerance),
    )


def _golden_min(f, lo, hi, iters=_LINE_SEARCH_ITERS):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def center_rate(spec, cfg):
    """inf of the rate functional over the grid, for use as the centering
    constant; raises ConvergenceError if the minimizer did not converge."""
    result = minimize_rate(spec, cfg)
    if not result.converged:
        raise ConvergenceError(
            f"rate minimization stalled at gap {result.gap:.3e} after {result.iterations} iterations"
        )
    return result.value
