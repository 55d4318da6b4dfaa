"""Hyperbolic geometry of the unit disk and the right half-plane.

Distances and densities in both models, the Cayley transfer between them,
Stolz sector membership, and the normalized half-plane Moebius maps used to
align boundary data with the positive real axis.

All distance functions accept either raw scalars (``complex``, ``float``, or
mpmath numbers, which are computed at the ambient mpmath precision) or the
typed wrappers :class:`DiskPoint` / :class:`HalfPlanePoint`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath

from ._numerics import conjugate_of, is_mp, phase_of

__all__ = [
    "DiskPoint",
    "HalfPlanePoint",
    "StolzSpec",
    "pseudo_hyperbolic_distance",
    "hyperbolic_distance_disk",
    "hyperbolic_distance_halfplane",
    "distance_from_ratio",
    "hyperbolic_density",
    "cayley",
    "cayley_inverse",
    "mu_angle_gadget",
    "mobius_L",
    "mobius_L_derivative",
]

UNIMODULAR_TOL = 1e-12


@dataclass(frozen=True)
class DiskPoint:
    """A point strictly inside the unit disk; construction enforces |z| < 1."""

    value: complex

    def __post_init__(self):
        if not abs(self.value) < 1.0:
            raise ValueError(f"not strictly inside the unit disk: {self.value!r}")


@dataclass(frozen=True)
class HalfPlanePoint:
    """A point strictly inside the right half-plane; enforces Re > 0."""

    value: complex

    def __post_init__(self):
        if not self.value.real > 0:
            raise ValueError(
                f"not strictly inside the right half-plane: {self.value!r}"
            )


@dataclass(frozen=True)
class StolzSpec:
    """A Stolz sector: vertex on the unit circle, half-aperture, and radius.

    Membership is symmetric under reflection about the vertex direction.
    """

    vertex: complex
    aperture: float
    radius: float

    def __post_init__(self):
        if abs(abs(self.vertex) - 1.0) > UNIMODULAR_TOL:
            raise ValueError(f"vertex must be unimodular: {self.vertex!r}")
        if not 0.0 < self.aperture < math.pi / 2:
            raise ValueError(f"aperture must lie in (0, pi/2): {self.aperture!r}")
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive: {self.radius!r}")

    def contains(self, z) -> bool:
        z = _disk_value(z)
        offset = 1.0 - conjugate_of(self.vertex) * z
        if offset == 0:
            return False
        return (
            abs(z - self.vertex) < self.radius
            and abs(phase_of(offset)) < self.aperture
        )


def _disk_value(z):
    if isinstance(z, DiskPoint):
        return z.value
    if isinstance(z, HalfPlanePoint):
        raise TypeError("expected a disk point, got a half-plane point")
    if not abs(z) < 1.0:
        raise ValueError(f"not strictly inside the unit disk: {z!r}")
    return z


def _halfplane_value(z):
    if isinstance(z, HalfPlanePoint):
        return z.value
    if isinstance(z, DiskPoint):
        raise TypeError("expected a half-plane point, got a disk point")
    if not z.real > 0:
        raise ValueError(f"not strictly inside the right half-plane: {z!r}")
    return z


def pseudo_hyperbolic_distance(z, w) -> float:
    """|z - w| / |1 - conj(w) z| for points inside the unit disk."""
    z = _disk_value(z)
    w = _disk_value(w)
    return abs(z - w) / abs(1.0 - conjugate_of(w) * z)


def distance_from_ratio(rho):
    """Hyperbolic distance 2*artanh(rho) in a cancellation-safe form.

    ``log1p`` at both ends keeps full relative accuracy for ratios near 0
    and near 1; mpmath inputs use ``mpmath.atanh`` at the ambient precision.
    """
    if is_mp(rho):
        return 2 * mpmath.atanh(rho)
    return math.log1p(rho) - math.log1p(-rho)


def hyperbolic_distance_disk(z, w):
    """Hyperbolic distance in the disk (density 2/(1-|z|^2) normalization)."""
    return distance_from_ratio(pseudo_hyperbolic_distance(z, w))


def hyperbolic_distance_halfplane(zeta, omega):
    """Hyperbolic distance in the right half-plane (density 1/Re)."""
    zeta = _halfplane_value(zeta)
    omega = _halfplane_value(omega)
    rho = abs(zeta - omega) / abs(zeta + conjugate_of(omega))
    return distance_from_ratio(rho)


def hyperbolic_density(point, domain: str = "disk"):
    """Density of the hyperbolic metric: 2/(1-|z|^2) or 1/Re(zeta)."""
    if domain == "disk":
        z = _disk_value(point)
        return 2.0 / ((1.0 - abs(z)) * (1.0 + abs(z)))
    if domain == "half-plane":
        zeta = _halfplane_value(point)
        return 1.0 / zeta.real
    raise ValueError(f"unknown domain tag: {domain!r}")


def cayley(zeta):
    """Half-plane to disk: (zeta - 1) / (zeta + 1); sends 1 to 0, inf to 1."""
    if isinstance(zeta, HalfPlanePoint):
        return DiskPoint((zeta.value - 1.0) / (zeta.value + 1.0))
    v = _halfplane_value(zeta)
    return (v - 1.0) / (v + 1.0)


def cayley_inverse(z):
    """Disk to half-plane: (1 + z) / (1 - z); sends 0 to 1, 1 to inf."""
    if isinstance(z, DiskPoint):
        return HalfPlanePoint((1.0 + z.value) / (1.0 - z.value))
    v = _disk_value(z)
    return (1.0 + v) / (1.0 - v)


def mu_angle_gadget(mu) -> float:
    """Cotangent of half the argument of ``mu``: Im(mu) / (|mu| - Re(mu)).

    Positive reals return ``math.inf`` (the sentinel is branched on before
    any arithmetic, so nothing is ever snapped to the axis); zero is
    rejected because it has no direction.
    """
    mu = complex(mu)
    if mu == 0:
        raise ValueError("zero has no direction angle")
    if mu.imag == 0.0 and mu.real > 0.0:
        return math.inf
    return mu.imag / (abs(mu) - mu.real)


def mobius_L(zeta, mu):
    """The half-plane automorphism (1 + i*a*zeta) / (i*a + zeta), a = a(mu).

    Fixes 1 and turns the direction of ``mu`` onto the positive real axis
    there: conj(mu) * L'(1; mu) > 0.  For positive real ``mu`` the map is
    the identity (the sentinel branch), taken before any arithmetic.
    """
    wrapped = isinstance(zeta, HalfPlanePoint)
    v = _halfplane_value(zeta)
    a = mu_angle_gadget(mu)
    if math.isinf(a):
        return zeta
    out = (1.0 + 1j * a * v) / (1j * a + v)
    return HalfPlanePoint(out) if wrapped else out


def mobius_L_derivative(zeta, mu):
    """Derivative of :func:`mobius_L` in its first argument."""
    v = _halfplane_value(zeta)
    a = mu_angle_gadget(mu)
    if math.isinf(a):
        return 1.0 + 0.0j
    return -(1.0 + a * a) / (1j * a + v) ** 2
