"""Geometric approach paths toward a boundary point.

A path is a sequence ``z_n = sigma * (1 - offset_n)`` whose complex offsets
``offset_n = s0 * q**n * exp(i*beta)`` shrink geometrically toward the
vertex.  The offsets - not the points - are the authoritative description:
they stay exactly representable long after ``1 - |z_n|`` falls below double
rounding, so every consumer that needs boundary residuals reconstructs the
point from its offset at whatever precision the gap demands.

The same parameterization serves the right half-plane with the vertex at
infinity, where ``zeta_n = exp(i*beta) / offset_magnitude_n`` marches to
infinity inside a sector around the positive real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from ._numerics import conjugate_of, to_mpc, working_dps
from .geometry import distance_from_ratio

__all__ = ["ApproachPath", "distance_between_offsets", "one_minus_sq_from_offset"]

DEFAULT_APERTURES = (0.0, math.pi / 4, -math.pi / 4)


@dataclass(frozen=True)
class ApproachPath:
    """Geometric approach to a boundary point of the disk or half-plane.

    Args:
        vertex: unimodular complex number (disk) or the string ``"inf"``
            for the half-plane path to infinity.
        aperture: angle between the path and the inward normal, in
            (-pi/2, pi/2); 0 is the radial/axial path.
        start_offset: magnitude of the first offset, in (0, 1).
        ratio: geometric shrink factor per step, in (0, 1).
        length: number of points.
    """

    vertex: complex | str
    aperture: float = 0.0
    start_offset: float = 0.5
    ratio: float = 0.5
    length: int = 48

    def __post_init__(self):
        if isinstance(self.vertex, str):
            if self.vertex != "inf":
                raise ValueError(f"unknown vertex token: {self.vertex!r}")
        elif abs(abs(self.vertex) - 1.0) > 1e-12:
            raise ValueError(f"vertex must be unimodular: {self.vertex!r}")
        if not -math.pi / 2 < self.aperture < math.pi / 2:
            raise ValueError("aperture must lie in (-pi/2, pi/2)")
        if not 0.0 < self.start_offset < 1.0:
            raise ValueError("start_offset must lie in (0, 1)")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        if self.length < 2:
            raise ValueError("length must be at least 2")

    @property
    def domain(self) -> str:
        return "half-plane" if self.vertex == "inf" else "disk"

    def gap(self, n: int) -> float:
        """Magnitude of the n-th offset (the boundary-gap scale)."""
        return self.start_offset * self.ratio**n

    def offset(self, n: int) -> complex:
        """Exact complex offset ``1 - conj(vertex) * z_n`` of the n-th point.

        Computed once in double precision; the resulting double is the
        authoritative definition of the point at every working precision.
        """
        phase = complex(math.cos(self.aperture), math.sin(self.aperture))
        return self.gap(n) * phase

    def point(self, n: int) -> complex:
        """The n-th point in double precision."""
        if self.vertex == "inf":
            d = self.offset(n)
            return complex(math.cos(self.aperture), math.sin(self.aperture)) / abs(d)
        return self.vertex * (1.0 - self.offset(n))

    def point_mp(self, n: int) -> mpmath.mpc:
        """The n-th point reconstructed exactly from its double offset.

        Callers are expected to hold an ``mpmath.workdps`` context sized by
        :func:`dps_for`.  The vertex is re-normalized to working precision so
        that ``1 - |z_n|**2`` agrees with :func:`one_minus_sq_from_offset`;
        the double vertex alone is unimodular only to double rounding, which
        would contaminate boundary residuals far below the 1e-3 gap scale.
        """
        if self.vertex == "inf":
            d = self.offset(n)
            phase = to_mpc(complex(math.cos(self.aperture), math.sin(self.aperture)))
            return phase / abs(to_mpc(d))
        vertex = to_mpc(self.vertex)
        vertex /= abs(vertex)
        return vertex * (1 - to_mpc(self.offset(n)))

    def dps_for(self, n: int) -> int:
        """Working precision adequate for residual quantities at point n."""
        return working_dps(self.gap(n))

    def points(self) -> list[complex]:
        return [self.point(n) for n in range(self.length)]

    def indices(self) -> range:
        return range(self.length)

    def with_aperture(self, aperture: float) -> "ApproachPath":
        return ApproachPath(
            self.vertex, aperture, self.start_offset, self.ratio, self.length
        )


def one_minus_sq_from_offset(offset) -> float:
    """``1 - |z|**2`` for ``z = sigma * (1 - offset)``, exactly in the offset.

    Expands to ``2*Re(offset) - |offset|**2``, which involves no
    cancellation against 1 and therefore stays accurate for tiny offsets.
    Accepts float or mpmath offsets.
    """
    return 2 * offset.real - (offset.real**2 + offset.imag**2)


def distance_between_offsets(d1, d2):
    """Hyperbolic distance between disk points given by offsets from sigma.

    For ``z = sigma*(1-d1)`` and ``w = sigma*(1-d2)`` the pseudo-hyperbolic
    ratio reduces to ``|d1-d2| / |conj(d1) + d2 - conj(d1)*d2|``, which is
    built from same-scale terms only and keeps full relative accuracy when
    both offsets are tiny.
    """
    num = abs(d1 - d2)
    den = abs(conjugate_of(d1) + d2 - conjugate_of(d1) * d2)
    return distance_from_ratio(num / den)
