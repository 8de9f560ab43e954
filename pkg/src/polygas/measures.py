"""Empirical and grid measures, bounded-Lipschitz distance, symmetry helpers.

The bounded-Lipschitz metric (sup over functions bounded by 1 and
1-Lipschitz) equals the optimal-transport cost with capped ground distance
min(d, 2); small instances are solved exactly as that linear program, larger
ones fall back to a fixed dictionary of admissible test functions which gives
a certified lower bound.
"""

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from . import geometry
from .errors import AsymmetricSupport, SpaceMismatch

LP_SUPPORT_CAP = 4000
WEIGHT_TOL = 1e-12
CONJ_TOL = 1e-12


def _check_points(space, pts):
    pts = np.asarray(pts)
    if space == "plane":
        pts = np.atleast_1d(pts.astype(complex))
        if pts.ndim != 1:
            raise ValueError("planar points must be a 1-d complex array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite planar point")
    elif space == "sphere":
        pts = np.atleast_2d(pts.astype(float))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("sphere points must have shape (n, 3)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite sphere point")
        if not geometry.on_sphere(pts):
            raise ValueError("point off the sphere beyond tolerance")
    else:
        raise ValueError(f"unknown space {space!r}")
    return pts


@dataclass
class EmpiricalMeasure:
    """n unit-weight atoms, each carrying mass 1/n, in the plane or on the sphere."""

    space: str
    atoms: np.ndarray

    def __post_init__(self):
        self.atoms = _check_points(self.space, self.atoms)
        if self.n < 1:
            raise ValueError("empirical measure needs at least one atom")

    @property
    def n(self):
        return len(self.atoms)

    @property
    def weights(self):
        return np.full(self.n, 1.0 / self.n)


@dataclass
class GridMeasure:
    """Nonnegative weights on a fixed support, summing to one."""

    space: str
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.support = _check_points(self.space, self.support)
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.support):
            raise ValueError("weights and support length mismatch")
        if np.any(self.weights < -WEIGHT_TOL):
            raise ValueError("negative weight")
        if abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must sum to 1")

    @property
    def n(self):
        return len(self.support)


def _points_weights(mu):
    if isinstance(mu, EmpiricalMeasure):
        return mu.atoms, mu.weights
    return mu.support, mu.weights


def _pairwise_dist(space, a, b):
    if space == "plane":
        return np.abs(a[:, None] - b[None, :])
    return np.sqrt(np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1))


@dataclass
class BLResult:
    value: float
    mode: str  # "lp" (exact) or "surrogate" (lower bound)

    def __float__(self):
        return self.value


def _bl_lp(space, xa, wa, xb, wb):
    cost = np.minimum(_pairwise_dist(space, xa, xb), 2.0)
    m, k = cost.shape
    # transport polytope: row sums wa, column sums wb
    rows, cols, data = [], [], []
    for i in range(m):
        rows.extend([i] * k)
        cols.extend(range(i * k, (i + 1) * k))
        data.extend([1.0] * k)
    for j in range(k):
        rows.extend([m + j] * m)
        cols.extend(range(j, m * k, k))
        data.extend([1.0] * m)
    a_eq = sp.csr_matrix((data, (rows, cols)), shape=(m + k, m * k))
    b_eq = np.concatenate([wa, wb])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return float(res.fun)


def _surrogate_anchors(space, pts):
    """4x8 polar anchor template scaled to the data's bounding disk."""
    if space == "plane":
        plane_pts = pts
    else:
        plane_pts = geometry.unproject(pts)
    center = 0.5 * (plane_pts.real.min() + plane_pts.real.max()) + 0.5j * (
        plane_pts.imag.min() + plane_pts.imag.max()
    )
    radius = max(np.abs(plane_pts - center).max(), 1e-9)
    radii = np.array([0.25, 0.5, 0.75, 1.0]) * radius
    angles = np.arange(8) * (np.pi / 4.0)
    anchors = (center + np.outer(radii, np.exp(1j * angles))).ravel()
    if space == "plane":
        return center, anchors
    return center, geometry.project(anchors)


def _bl_surrogate(space, xa, wa, xb, wb):
    center, anchors = _surrogate_anchors(
        space, np.concatenate([xa, xb]) if space == "plane" else np.vstack([xa, xb])
    )
    best = 0.0

    def admit(fa, fb):
        nonlocal best
        best = max(best, abs(float(fa @ wa - fb @ wb)))

    if space == "plane":
        admit(np.clip((xa - center).real, -1, 1), np.clip((xb - center).real, -1, 1))
        admit(np.clip((xa - center).imag, -1, 1), np.clip((xb - center).imag, -1, 1))
        for a in anchors:
            admit(np.minimum(np.abs(xa - a), 2.0), np.minimum(np.abs(xb - a), 2.0))
    else:
        for axis in range(3):
            admit(xa[:, axis], xb[:, axis])
        for a in anchors:
            admit(
                np.sqrt(np.sum((xa - a) ** 2, axis=-1)),
                np.sqrt(np.sum((xb - a) ** 2, axis=-1)),
            )
    return best


def bl_distance(mu, nu, mode=None):
    """Bounded-Lipschitz distance between two measures on the same space.

    mode=None picks the exact LP whenever the combined support has at most
    4000 points and the surrogate lower bound otherwise; the returned
    BLResult records which one ran.
    """
    if mu.space != nu.space:
        raise SpaceMismatch(f"cannot compare {mu.space} with {nu.space}")
    xa, wa = _points_weights(mu)
    xb, wb = _points_weights(nu)
    if mode is None:
        mode = "lp" if len(xa) + len(xb) <= LP_SUPPORT_CAP else "surrogate"
    if mode == "lp":
        if len(xa) + len(xb) > LP_SUPPORT_CAP:
            raise ValueError("combined support too large for LP mode")
        return BLResult(_bl_lp(mu.space, xa, wa, xb, wb), "lp")
    if mode == "surrogate":
        return BLResult(_bl_surrogate(mu.space, xa, wa, xb, wb), "surrogate")
    raise ValueError(f"unknown mode {mode!r}")


def _conjugated(space, pts):
    """Conjugation in the plane, mirror across the x2 = 0 plane on the sphere."""
    if space == "plane":
        return np.conj(pts)
    mirrored = pts.copy()
    mirrored[:, 1] = -mirrored[:, 1]
    return mirrored


def conjugation_pairing(support, tol=CONJ_TOL, space="plane"):
    """Index j(i) with support[j(i)] == conj(support[i]); AsymmetricSupport if none."""
    target = _conjugated(space, np.asarray(support))
    pairing = np.full(len(target), -1, dtype=int)
    taken = np.zeros(len(target), dtype=bool)
    for i in range(len(target)):
        d = _pairwise_dist(space, target[i : i + 1], np.asarray(support))[0]
        d[taken] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            raise AsymmetricSupport(f"no conjugate partner for support point {i}")
        pairing[i] = j
        taken[j] = True
    return pairing


def symmetrize(mu, tol=CONJ_TOL):
    """Average weights over conjugate support pairs: w'(z) = (w(z) + w(conj z)) / 2."""
    pairing = conjugation_pairing(mu.support, tol, space=mu.space)
    w = 0.5 * (mu.weights + mu.weights[pairing])
    return GridMeasure(space=mu.space, support=mu.support, weights=w)


def is_conjugation_symmetric(mu, tol=1e-8):
    """True iff the support is conjugation-closed and weights match across pairs."""
    try:
        pairing = conjugation_pairing(mu.support, tol, space=mu.space)
    except AsymmetricSupport:
        return False
    return bool(np.all(np.abs(mu.weights - mu.weights[pairing]) <= tol))


def to_grid(mu, support, space=None):
    """Snap each atom of an empirical measure to its nearest grid point.

    Mass is preserved exactly; ties go to the lowest grid index.
    """
    space = space or mu.space
    support = _check_points(space, support)
    dist = _pairwise_dist(space, mu.atoms, support)
    idx = np.argmin(dist, axis=1)  # argmin takes the first minimum: lowest index
    counts = np.bincount(idx, minlength=len(support))
    return GridMeasure(space=space, support=support, weights=counts / mu.n)


def write_measure_csv(path, mu):
    """CSV rows re,im,weight (plane) or x1,x2,x3,weight (sphere)."""
    pts, w = _points_weights(mu)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if mu.space == "plane":
            writer.writerow(["re", "im", "weight"])
            for z, wi in zip(pts, w):
                writer.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", f"{wi:.17g}"])
        else:
            writer.writerow(["x1", "x2", "x3", "weight"])
            for x, wi in zip(pts, w):
                writer.writerow([f"{x[0]:.17g}", f"{x[1]:.17g}", f"{x[2]:.17g}", f"{wi:.17g}"])


def read_measure_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows)
    if header[:3] == ["re", "im", "weight"]:
        return GridMeasure(space="plane", support=data[:, 0] + 1j * data[:, 1], weights=data[:, 2])
    if header[:4] == ["x1", "x2", "x3", "weight"]:
        return GridMeasure(space="sphere", support=data[:, :3], weights=data[:, 3])
    raise ValueError(f"unrecognized measure header {header}")
