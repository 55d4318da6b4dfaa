"""Reproducing-kernel arithmetic for disk self-maps.

Each self-map carries a positive-definite kernel
``k(z, w) = (1 - conj(f(w)) f(z)) / (1 - conj(w) z)`` whose Hilbert
space is never materialized: inner products reduce to kernel values via
the reproducing identity, norms to diagonal values, and the boundary
conditions here to limits of normalized inner products along approach
paths.  The normalized modulus also has a distance meaning (its square
is the ratio of pseudo-hyperbolic distance deficits), which other
modules compute independently; the two routes are kept separate on
purpose so they can be cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from ._numerics import (
    MP_GAP,
    conjugate_of,
    tail_limit,
    to_mpc,
)
from .geometry import (
    DiskPoint,
    hyperbolic_distance_disk,
    pseudo_hyperbolic_distance,
)
from .maps import DomainEscape, SelfMap
from .paths import ApproachPath, one_minus_sq_from_offset
from .reporting import ConditionResult

__all__ = [
    "KERNEL_LIMIT_TOL",
    "KERNEL_LIMINF_FLOOR",
    "KERNEL_DECAY_RATIO",
    "KernelPoint",
    "kernel_point",
    "kernel_eval",
    "normalized_inner_product",
    "gram_matrix",
    "delta_pseudometric",
    "chain_inequality_check",
    "kernel_boundary_condition",
]

# Defaults for the boundary-condition verdicts; strong catalog maps pass
# with limits near 1, two to three orders above these floors.
KERNEL_LIMIT_TOL = 1e-3
KERNEL_LIMINF_FLOOR = 1e-3
KERNEL_DECAY_RATIO = 0.7

_LAGS = (1, 2, 4, 8)


@dataclass(frozen=True)
class KernelPoint:
    """A kernel index point together with its squared norm."""

    base: DiskPoint
    norm_sq: float


def _checked_value(m: SelfMap, point) -> tuple[complex, complex]:
    """(point, image) with interior and escape checks, disk maps only."""
    if m.domain != "disk":
        raise ValueError("the reproducing kernel is defined for disk maps")
    z = point.value if isinstance(point, DiskPoint) else complex(point)
    if not abs(z) < 1.0:
        raise ValueError(f"point is not interior to the disk: {z!r}")
    value = complex(m(z))
    if not abs(value) < 1.0:
        raise DomainEscape(f"map leaves the disk at {z!r}: value {value!r}")
    return z, value


def kernel_point(m: SelfMap, w) -> KernelPoint:
    """Kernel index point at ``w`` with norm_sq = k(w, w)."""
    wv, fw = _checked_value(m, w)
    norm_sq = (1.0 - abs(fw) ** 2) / (1.0 - abs(wv) ** 2)
    if not norm_sq > 0.0:
        raise ValueError(f"kernel norm degenerates at {wv!r}")
    return KernelPoint(base=DiskPoint(wv), norm_sq=norm_sq)


def kernel_eval(m: SelfMap, z, w) -> complex:
    """Kernel value ``(1 - conj(f(w)) f(z)) / (1 - conj(w) z)``.

    Hermitian in its arguments: ``k(z, w) = conj(k(w, z))``.
    """
    zv, fz = _checked_value(m, z)
    wv, fw = _checked_value(m, w)
    return (1.0 - fw.conjugate() * fz) / (1.0 - wv.conjugate() * zv)


def normalized_inner_product(m: SelfMap, z, w) -> complex:
    """Inner product of the normalized kernel functions at ``z`` and ``w``.

    By the reproducing identity this is ``k(w, z) / sqrt(k(z,z) k(w,w))``;
    its modulus is at most 1 by Cauchy-Schwarz (checked, with rounding
    slack).  Points close to the boundary are recomputed through mpmath,
    where the three vanishing kernel quantities keep their digits.
    """
    zv, fz = _checked_value(m, z)
    wv, fw = _checked_value(m, w)
    gap = min(1.0 - abs(zv), 1.0 - abs(wv))
    if gap < MP_GAP:
        from ._numerics import working_dps

        with mpmath.workdps(working_dps(gap)):
            zm, wm = to_mpc(zv), to_mpc(wv)
            fzm, fwm = m(zm), m(wm)
            cross = (1 - conjugate_of(fzm) * fwm) / (1 - conjugate_of(zm) * wm)
            norm_z = (1 - abs(fzm) ** 2) / (1 - abs(zm) ** 2)
            norm_w = (1 - abs(fwm) ** 2) / (1 - abs(wm) ** 2)
            value = complex(cross / mpmath.sqrt(norm_z * norm_w))
    else:
        cross = (1.0 - fz.conjugate() * fw) / (1.0 - zv.conjugate() * wv)
        norm_z = (1.0 - abs(fz) ** 2) / (1.0 - abs(zv) ** 2)
        norm_w = (1.0 - abs(fw) ** 2) / (1.0 - abs(wv) ** 2)
        value = cross / math.sqrt(norm_z * norm_w)
    if abs(value) > 1.0 + 1e-9:
        raise ValueError(
            f"normalized kernel inner product {value!r} violates Cauchy-Schwarz"
        )
    return value


def gram_matrix(m: SelfMap, points: Sequence) -> tuple[np.ndarray, bool]:
    """Hermitian matrix of kernel values with a positivity verdict.

    The verdict comes from diagonal-pivoted Cholesky; the matrix passes
    when the smallest pivot stays above ``-tol`` with ``tol`` scaled by
    dimension, machine epsilon, and the largest diagonal entry (floored
    at 1e-10).

    Raises:
        ValueError: duplicate points.
    """
    values = [
        p.value if isinstance(p, DiskPoint) else complex(p) for p in points
    ]
    if len(set(values)) != len(values):
        raise ValueError("kernel Gram matrix requires distinct points")
    n = len(values)
    matrix = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            matrix[i, j] = kernel_eval(m, values[i], values[j])
    tol = max(1e-10, n * np.finfo(float).eps * float(np.max(np.abs(np.diagonal(matrix).real)))) if n else 1e-10
    min_pivot = _pivoted_cholesky_min_pivot(matrix)
    return matrix, bool(min_pivot >= -tol)


def _pivoted_cholesky_min_pivot(matrix: np.ndarray) -> float:
    """Smallest pivot met by diagonal-pivoted Cholesky elimination."""
    work = matrix.astype(complex).copy()
    n = work.shape[0]
    min_pivot = math.inf
    for k in range(n):
        diag = work.diagonal().real
        j = k + int(np.argmax(diag[k:]))
        if j != k:
            work[[k, j], :] = work[[j, k], :]
            work[:, [k, j]] = work[:, [j, k]]
        pivot = float(work[k, k].real)
        min_pivot = min(min_pivot, pivot)
        if pivot <= 0.0:
            # All remaining diagonal entries are at most this pivot.
            break
        column = work[k + 1:, k]
        work[k + 1:, k + 1:] -= np.outer(column, column.conjugate()) / pivot
    return min_pivot


def delta_pseudometric(m: SelfMap, z, w) -> float:
    """Pseudo-metric ``sqrt(1 - |<normalized kernels>|**2)`` in [0, 1]."""
    modulus = min(abs(normalized_inner_product(m, z, w)), 1.0)
    return math.sqrt(max(0.0, 1.0 - modulus * modulus))


def chain_inequality_check(m: SelfMap, z, w) -> bool:
    """Three-term chain linking the distance deficit ratio to k-contraction.

    With ``ratio = (1 - rho(fz, fw)**2) / (1 - rho(z, w)**2) >= 1``:
    ``0 <= log(ratio) <= k(z,w) - k(fz,fw) <= sqrt(ratio - 1)``,
    checked with 1e-10 slack.

    The first two legs hold for every self-map and every pair (the
    middle one reduces to the Schwarz-Pick contraction of rho).  The
    square-root leg is an asymptotic bound: it is valid once the image
    separation is comparable to the source separation (in particular
    along joint approach to a point of conformality, where the middle
    term collapses onto ``log(ratio)``), and it genuinely reverses for
    pairs whose images huddle together, e.g. any constant map at
    moderate separation.  A False return for such pairs is information,
    not an error.
    """
    zv, fz = _checked_value(m, z)
    wv, fw = _checked_value(m, w)
    if zv == wv:
        return True
    rho = pseudo_hyperbolic_distance(zv, wv)
    rho_image = pseudo_hyperbolic_distance(fz, fw)
    ratio = (1.0 - rho_image * rho_image) / (1.0 - rho * rho)
    middle = hyperbolic_distance_disk(zv, wv) - hyperbolic_distance_disk(fz, fw)
    lower = math.log(ratio)
    upper = math.sqrt(max(ratio - 1.0, 0.0))
    slack = 1e-10
    return (
        lower >= -slack
        and lower <= middle + slack
        and middle <= upper + slack
    )


def _path_modulus(
    m: SelfMap, path_z: ApproachPath, nz: int, path_w: ApproachPath, nw: int
) -> float:
    """|<normalized kernels>| for one path pair, at gap-scaled precision."""
    gap = min(path_z.gap(nz), path_w.gap(nw))
    if gap >= MP_GAP:
        z, w = path_z.point(nz), path_w.point(nw)
        fz, fw = complex(m(z)), complex(m(w))
        norm_z = (1.0 - abs(fz) ** 2) / one_minus_sq_from_offset(path_z.offset(nz))
        norm_w = (1.0 - abs(fw) ** 2) / one_minus_sq_from_offset(path_w.offset(nw))
        cross = (1.0 - fz.conjugate() * fw) / (1.0 - z.conjugate() * w)
        return abs(cross) / math.sqrt(norm_z * norm_w)
    dps = max(path_z.dps_for(nz), path_w.dps_for(nw))
    with mpmath.workdps(dps):
        z, w = path_z.point_mp(nz), path_w.point_mp(nw)
        fz, fw = m(z), m(w)
        norm_z = (1 - abs(fz) ** 2) / one_minus_sq_from_offset(
            to_mpc(path_z.offset(nz))
        )
        norm_w = (1 - abs(fw) ** 2) / one_minus_sq_from_offset(
            to_mpc(path_w.offset(nw))
        )
        cross = (1 - conjugate_of(fz) * fw) / (1 - conjugate_of(z) * w)
        return float(abs(cross) / mpmath.sqrt(norm_z * norm_w))


def _anchor_modulus(m: SelfMap, path_z: ApproachPath, nz: int, w0: complex) -> float:
    """|<normalized kernels>| against the fixed anchor ``w0``."""
    fw0 = complex(m(complex(w0)))
    norm_w0 = (1.0 - abs(fw0) ** 2) / (1.0 - abs(w0) ** 2)
    gap = path_z.gap(nz)
    if gap >= MP_GAP:
        z = path_z.point(nz)
        fz = complex(m(z))
        norm_z = (1.0 - abs(fz) ** 2) / one_minus_sq_from_offset(path_z.offset(nz))
        cross = (1.0 - fz.conjugate() * fw0) / (1.0 - z.conjugate() * w0)
        return abs(cross) / math.sqrt(norm_z * norm_w0)
    with mpmath.workdps(path_z.dps_for(nz)):
        z = path_z.point_mp(nz)
        fz = m(z)
        norm_z = (1 - abs(fz) ** 2) / one_minus_sq_from_offset(
            to_mpc(path_z.offset(nz))
        )
        cross = (1 - conjugate_of(fz) * to_mpc(fw0)) / (1 - conjugate_of(z) * w0)
        return float(abs(cross) / mpmath.sqrt(norm_z * norm_w0))


def _lag_series(
    m: SelfMap, path_z: ApproachPath, path_w: ApproachPath, lag: int
) -> tuple[list[int], list[float]]:
    """Moduli along pairs ``(z_n, w_{lag*n})``.

    ``lag = 1`` pairs equal indices across the two paths; larger lags
    drive the second point toward the boundary faster, so the pair's
    hyperbolic separation grows without bound and the series probes the
    unrestricted double limit rather than a single tangential direction.
    """
    count = path_z.length if lag == 1 else path_z.length // lag
    indices = list(range(min(count, path_w.length // max(lag, 1))))
    series = [_path_modulus(m, path_z, n, path_w, lag * n) for n in indices]
    return indices, series


def kernel_boundary_condition(
    m: SelfMap,
    sigma,
    paths: Sequence[ApproachPath],
    *,
    limit_tol: float = KERNEL_LIMIT_TOL,
    liminf_floor: float = KERNEL_LIMINF_FLOOR,
    decay_ratio: float = KERNEL_DECAY_RATIO,
) -> tuple[ConditionResult, ConditionResult, float]:
    """Kernel-route boundary conditions at ``sigma``.

    Returns ``(c, c_prime, limsup_anchor)``:

    * ``c`` (id T2c): the doubling-pair series ``|<k_hat(z_n),
      k_hat(w_2n)>|`` should tend to 1; holds when the extrapolated tail
      limit is within ``limit_tol`` of 1, fails when it settles below.
    * ``c_prime`` (id T2c'): per-lag limits over pairs ``(z_n, w_Ln)``
      for lags 1, 2, 4, 8 probe whether the liminf over joint sequences
      stays positive; a limit falling below ``liminf_floor`` or decaying
      with the lag (largest-lag limit under ``decay_ratio`` times the
      lag-1 limit) means it does not.
    * ``limsup_anchor``: max over the deep half of
      ``|<k_hat(z_n), k_hat(0)>|``, a proxy for the limsup against the
      fixed anchor point 0; it is also quoted in ``c_prime``'s note.
    """
    sigma = complex(sigma)
    if abs(abs(sigma) - 1.0) > 1e-12:
        raise ValueError(f"sigma must be unimodular: {sigma!r}")
    if not paths:
        raise ValueError("need at least one approach path")
    path_z = paths[0]
    path_w = paths[1] if len(paths) > 1 else paths[0]
    for path in (path_z, path_w):
        if path.domain != "disk":
            raise ValueError("kernel boundary conditions live on the disk")
        if abs(complex(path.vertex) - sigma) > 1e-12:
            raise ValueError("path vertex differs from sigma")

    indices, series = _lag_series(m, path_z, path_w, 2)
    fit_limit, decided, _model = tail_limit(indices, series)
    if decided and fit_limit >= 1.0 - limit_tol:
        verdict = "holds"
    elif decided and fit_limit < 1.0 - limit_tol:
        verdict = "fails"
    else:
        verdict = "undecided"
    condition_c = ConditionResult(
        condition="T2c",
        verdict=verdict,
        evidence={
            "n": indices,
            "w_index": [2 * n for n in indices],
            "modulus": series,
        },
        note=f"doubling-pair tail limit {fit_limit:.6g} (sampled-pairs evidence)",
    )

    lag_limits: list[float] = []
    lag_counts: list[int] = []
    lag_decided: list[bool] = []
    for lag in _LAGS:
        lag_idx, lag_vals = _lag_series(m, path_z, path_w, lag)
        limit, ok, _ = tail_limit(lag_idx, lag_vals)
        lag_limits.append(limit)
        lag_counts.append(len(lag_vals))
        lag_decided.append(ok)

    anchor_series = [
        _anchor_modulus(m, path_z, n, 0j) for n in path_z.indices()
    ]
    anchor_limit, anchor_decided, _ = tail_limit(
        list(path_z.indices()), anchor_series
    )
    if anchor_decided:
        limsup_anchor = max(anchor_limit, 0.0)
    else:
        limsup_anchor = max(anchor_series[len(anchor_series) // 2:])

    if min(lag_limits) <= liminf_floor:
        verdict_prime = "fails"
    elif lag_limits[-1] < decay_ratio * lag_limits[0]:
        verdict_prime = "fails"
    elif lag_decided[0] and lag_limits[0] > 10.0 * liminf_floor:
        verdict_prime = "holds"
    else:
        verdict_prime = "undecided"
    condition_c_prime = ConditionResult(
        condition="T2c'",
        verdict=verdict_prime,
        evidence={
            "lag": list(_LAGS),
            "limit_estimate": lag_limits,
            "pairs": lag_counts,
        },
        note=(
            f"per-lag limits over (z_n, w_Ln); anchor limsup proxy "
            f"{limsup_anchor:.6g} at w0 = 0"
        ),
    )
    return condition_c, condition_c_prime, limsup_anchor
