"""Inverse stereographic projection onto the radius-1/2 sphere tangent at the origin.

The sphere has center (0, 0, 1/2) and radius 1/2; the plane point z maps to
(Re z, Im z, |z|^2) / (1 + |z|^2).  All operations are pure and vectorized:
planar points are complex scalars or arrays, sphere points are arrays with a
trailing axis of length 3.
"""

import numpy as np

from .errors import NorthPoleError

SPHERE_CENTER = np.array([0.0, 0.0, 0.5])
SPHERE_RADIUS = 0.5
NORTH_POLE = np.array([0.0, 0.0, 1.0])
NORTH_POLE.setflags(write=False)

SPHERE_TOL = 1e-12


def plane_complement(z):
    """Return 1/(1 + |z|^2), guarded against overflow for huge |z|.

    This equals 1 - |T(z)|^2 and 1 - x3 for x = T(z); computing it in this
    factored form keeps the chordal identity accurate out to |z| ~ 1e6 and
    beyond, where 1 - (x1^2 + x2^2 + x3^2) would lose all digits.
    """
    z = np.asarray(z, dtype=complex)
    a = np.maximum(1.0, np.abs(z))
    u = z / a
    # (1 + |z|^2) / a^2, always in [1/a^2, 2]
    s = (1.0 / a) ** 2 + np.abs(u) ** 2
    return (1.0 / a) ** 2 / s


def project(z):
    """Map plane points to the sphere; never returns the north pole.

    Accepts a complex scalar or array of shape (...,) and returns floats of
    shape (..., 3).
    """
    z = np.asarray(z, dtype=complex)
    a = np.maximum(1.0, np.abs(z))
    u = z / a
    s = (1.0 / a) ** 2 + np.abs(u) ** 2  # (1 + |z|^2) / a^2
    x1 = u.real / (a * s)
    x2 = u.imag / (a * s)
    x3 = np.abs(u) ** 2 / s
    return np.stack([x1, x2, x3], axis=-1)


def unproject(x):
    """Invert the projection; raises NorthPoleError on the exact north pole.

    Near the pole the subtraction 1 - x3 cancels, so there the denominator
    is evaluated through the sphere identity 1 - x3 = (x1^2 + x2^2)/x3,
    which keeps the round trip accurate to relative 1e-12 for |z| up to 1e6.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.all(x == NORTH_POLE, axis=-1)):
        raise NorthPoleError("north pole has no finite preimage")
    x3 = x[..., 2]
    planar_sq = x[..., 0] ** 2 + x[..., 1] ** 2
    denom = np.where(x3 > 0.5, planar_sq / np.maximum(x3, 1e-300), 1.0 - x3)
    z = (x[..., 0] + 1j * x[..., 1]) / denom
    if x.ndim == 1:
        return complex(z)
    return z


def sphere_residual(x):
    """Absolute deviation of x from the sphere equation |x - c|^2 = 1/4."""
    x = np.asarray(x, dtype=float)
    d = x - SPHERE_CENTER
    return np.abs(np.sum(d * d, axis=-1) - SPHERE_RADIUS**2)


def on_sphere(x, tol=SPHERE_TOL):
    return bool(np.all(sphere_residual(x) <= tol))


def chordal_identity_residual(z, w):
    """|LHS - RHS| of  |z-w|^2 = |T(z)-T(w)|^2 / ((1-|T(z)|^2)(1-|T(w)|^2)).

    The complements are evaluated in the stable factored form; the deviation
    is then pure floating-point noise, bounded by ~1e-10 * (1 + |z-w|^2).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    lhs = np.abs(z - w) ** 2
    dx = project(z) - project(w)
    num = np.sum(dx * dx, axis=-1)
    rhs = num / (plane_complement(z) * plane_complement(w))
    return np.abs(lhs - rhs)


def norm_identity_residual(z):
    """|(1 - |T(z)|^2) - 1/(1 + |z|^2)| with the left side summed naively."""
    z = np.asarray(z, dtype=complex)
    x = project(z)
    naive = 1.0 - np.sum(x * x, axis=-1)
    return np.abs(naive - plane_complement(z))


def pushforward_measure(mu):
    """Project a planar empirical measure onto the sphere, atom by atom."""
    from .errors import SpaceMismatch
    from .measures import EmpiricalMeasure

    if mu.space != "plane":
        raise SpaceMismatch("pushforward expects a planar measure")
    return EmpiricalMeasure(space="sphere", atoms=project(mu.atoms))


def pullback_measure(mu):
    """Unproject a spherical empirical measure back to the plane."""
    from .errors import SpaceMismatch
    from .measures import EmpiricalMeasure

    if mu.space != "sphere":
        raise SpaceMismatch("pullback expects a spherical measure")
    return EmpiricalMeasure(space="plane", atoms=np.atleast_1d(unproject(mu.atoms)))
