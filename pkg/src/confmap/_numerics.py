"""Shared numeric machinery: precision policy, scalar-generic elementary
functions, sequence extrapolation, and Gauss-Legendre quadrature.

Residual quantities measured against a domain boundary (for example
``1 - |z|**2`` or one minus a contraction factor) lose roughly ``1/gap``
relative digits when computed in double precision at boundary gap ``gap``.
The helpers here let callers rerun such computations through mpmath with a
working precision scaled to the gap, so residuals keep ~15 significant
digits arbitrarily close to the boundary.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np

__all__ = [
    "MP_GAP",
    "working_dps",
    "needs_mp",
    "is_mp",
    "to_mpc",
    "conjugate_of",
    "real_of",
    "imag_of",
    "phase_of",
    "exp_of",
    "log_of",
    "sqrt_of",
    "TailFit",
    "ComplexTailFit",
    "richardson",
    "fit_geometric_tail",
    "extrapolate_complex",
    "log_linear_slope",
    "log_log_slope",
    "tail_limit",
    "unwrap_phases",
    "gauss_nodes",
    "fixed_gauss",
    "adaptive_quadrature",
]

# Boundary gap below which double precision can no longer resolve the
# residual quantities this package cares about; computations switch to
# mpmath underneath this threshold.
MP_GAP = 1e-3

_MIN_DPS = 25


def working_dps(gap: float) -> int:
    """Decimal precision keeping ~15 digits in residuals of order ``gap**2``.

    Args:
        gap: distance to the domain boundary, in (0, 1].

    Returns:
        Number of decimal digits to hand to ``mpmath.workdps``.
    """
    gap = abs(float(gap))
    if gap == 0.0:
        raise ValueError("boundary gap must be nonzero")
    if gap >= 1.0:
        return _MIN_DPS
    return max(_MIN_DPS, 15 + int(math.ceil(2.0 * math.log10(1.0 / gap))))


def needs_mp(gap: float) -> bool:
    """True when a point at boundary gap ``gap`` needs the mpmath path."""
    return abs(gap) < MP_GAP


def is_mp(x) -> bool:
    return isinstance(x, (mpmath.mpf, mpmath.mpc))


def to_mpc(x) -> mpmath.mpc:
    """Losslessly promote a float/complex scalar to ``mpmath.mpc``."""
    if isinstance(x, mpmath.mpc):
        return x
    return mpmath.mpc(x)


def conjugate_of(x):
    if is_mp(x):
        return mpmath.conj(x)
    return complex(x).conjugate()


def real_of(x) -> float:
    if is_mp(x):
        return x.real if isinstance(x, mpmath.mpf) else x.real
    return complex(x).real


def imag_of(x):
    if is_mp(x):
        return mpmath.mpf(0) if isinstance(x, mpmath.mpf) else x.imag
    return complex(x).imag


def phase_of(x) -> float:
    """Principal argument in (-pi, pi], as a float for any scalar kind."""
    if is_mp(x):
        return float(mpmath.arg(x))
    return cmath.phase(complex(x))


def exp_of(x):
    return mpmath.exp(x) if is_mp(x) else cmath.exp(x)


def log_of(x):
    """Principal-branch logarithm (cut on the negative real axis)."""
    return mpmath.log(x) if is_mp(x) else cmath.log(x)


def sqrt_of(x):
    """Principal-branch square root (cut on the negative real axis)."""
    return mpmath.sqrt(x) if is_mp(x) else cmath.sqrt(x)


# ---------------------------------------------------------------------------
# Sequence extrapolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailFit:
    """Extrapolated limit of a real sequence with geometric residual decay.

    ``decided`` is True when the geometric model explained the tail well
    enough (fit quality above ``r2_min`` and ratio below the cap); otherwise
    ``limit`` is just the last sequence value and should be treated as a
    lower-confidence estimate.
    """

    limit: float
    error: float
    ratio: float
    r_squared: float
    decided: bool
    n_used: int


@dataclass(frozen=True)
class ComplexTailFit:
    limit: complex
    error: float
    ratio: complex
    decided: bool
    n_used: int


def richardson(values: Sequence[float], ratio: float, orders: int = 1) -> list[float]:
    """Accelerate ``v_n = L + c1*ratio**n + c2*ratio**(2n) + ...``.

    Each pass eliminates the currently-leading geometric term; the factor
    squares between passes.

    Returns:
        The accelerated sequence after ``orders`` elimination passes.
    """
    vals = [float(v) for v in values]
    factor = ratio
    for _ in range(orders):
        if len(vals) < 2 or factor == 1.0:
            break
        vals = [
            (vals[i + 1] - factor * vals[i]) / (1.0 - factor)
            for i in range(len(vals) - 1)
        ]
        factor *= ratio
    return vals


def _r_squared(xs: np.ndarray, ys: np.ndarray, slope: float, icept: float) -> float:
    pred = slope * xs + icept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    if ss_tot == 0.0:
        return 1.0
    return 1.0 - ss_res / ss_tot


def fit_geometric_tail(
    values: Sequence[float],
    *,
    noise_floor: float = 0.0,
    window: int = 12,
    min_points: int = 5,
    ratio_cap: float = 0.97,
    r2_min: float = 0.99,
) -> TailFit:
    """Fit the tail of a real sequence against geometric residual decay.

    The decay ratio is read off a log-linear regression of successive
    differences; when the regression is convincing the limit comes from two
    Richardson elimination passes, otherwise the last value is returned
    undecided.  Differences at or below ``noise_floor`` are treated as
    converged noise.
    """
    vals = [float(v) for v in values]
    if len(vals) < 2:
        v = vals[-1] if vals else math.nan
        return TailFit(v, math.inf, 0.0, 0.0, False, len(vals))

    tail = vals[-(window + 1):]
    diffs = [tail[i + 1] - tail[i] for i in range(len(tail) - 1)]

    if all(abs(d) <= noise_floor for d in diffs):
        # Converged below the caller's noise level.
        return TailFit(tail[-1], max(noise_floor, 0.0), 0.0, 1.0, True, len(tail))

    usable = [(i, d) for i, d in enumerate(diffs) if abs(d) > noise_floor]
    if len(usable) < min_points:
        return TailFit(vals[-1], abs(diffs[-1]), 0.0, 0.0, False, len(usable))

    xs = np.array([i for i, _ in usable], dtype=float)
    ys = np.array([math.log(abs(d)) for _, d in usable])
    slope, icept = np.polyfit(xs, ys, 1)
    r2 = _r_squared(xs, ys, slope, icept)
    magnitude = math.exp(slope) if slope < 300 else math.inf

    signs = [
        usable[i + 1][1] * usable[i][1]
        for i in range(len(usable) - 1)
        if usable[i + 1][0] == usable[i][0] + 1
    ]
    sign = -1.0 if signs and sum(1 for s in signs if s < 0) > len(signs) / 2 else 1.0
    ratio = sign * magnitude

    if r2 >= r2_min and abs(ratio) <= ratio_cap:
        accel = richardson(tail, ratio, orders=2)
        limit = accel[-1]
        err = abs(accel[-1] - accel[-2]) if len(accel) >= 2 else abs(diffs[-1])
        err += noise_floor / max(1.0 - abs(ratio), 0.03)
        return TailFit(limit, err, ratio, r2, True, len(usable))
    return TailFit(vals[-1], abs(diffs[-1]), ratio, r2, False, len(usable))


def extrapolate_complex(
    values: Sequence[complex],
    *,
    noise_floor: float = 0.0,
    window: int = 12,
    ratio_cap: float = 0.97,
) -> ComplexTailFit:
    """Extrapolate a complex sequence with a single geometric error mode.

    The common ratio is the least-squares solution of
    ``d_{n+1} ~= c * d_n`` over the tail window; the limit adds the summed
    geometric tail to the last value when the model fits.
    """
    vals = [complex(v) for v in values]
    if len(vals) < 2:
        v = vals[-1] if vals else complex(math.nan)
        return ComplexTailFit(v, math.inf, 0.0, False, len(vals))

    tail = vals[-(window + 1):]
    diffs = [tail[i + 1] - tail[i] for i in range(len(tail) - 1)]
    if all(abs(d) <= noise_floor for d in diffs):
        return ComplexTailFit(tail[-1], max(noise_floor, 0.0), 0.0, True, len(tail))

    num = sum(diffs[i + 1] * diffs[i].conjugate() for i in range(len(diffs) - 1))
    den = sum(abs(diffs[i]) ** 2 for i in range(len(diffs) - 1))
    if den == 0.0 or len(diffs) < 4:
        return ComplexTailFit(vals[-1], abs(diffs[-1]), 0.0, False, len(diffs))
    c = num / den
    resid = math.sqrt(
        sum(abs(diffs[i + 1] - c * diffs[i]) ** 2 for i in range(len(diffs) - 1))
        / max(sum(abs(diffs[i + 1]) ** 2 for i in range(len(diffs) - 1)), 1e-300)
    )

    if abs(c) <= ratio_cap and resid <= 0.1:
        limit = tail[-1] + diffs[-1] * c / (1.0 - c)
        err = abs(diffs[-1]) * abs(c) ** 2 / (1.0 - abs(c))
        err += noise_floor / max(1.0 - abs(c), 0.03) + resid * abs(diffs[-1])
        return ComplexTailFit(limit, err, c, True, len(diffs))
    return ComplexTailFit(vals[-1], abs(diffs[-1]), c, False, len(diffs))


def log_linear_slope(
    indices: Sequence[float], values: Sequence[float]
) -> tuple[float, float]:
    """Slope and fit quality of ``log|values|`` against ``indices``.

    A good fit with slope ``s`` means the magnitudes decay geometrically
    with per-step ratio ``exp(s)``.  Zero entries are skipped; fewer than
    three usable points returns ``(0.0, 0.0)``.
    """
    pairs = [(float(i), abs(float(v))) for i, v in zip(indices, values) if v != 0.0]
    if len(pairs) < 3:
        return 0.0, 0.0
    xs = np.array([p[0] for p in pairs])
    ys = np.array([math.log(p[1]) for p in pairs])
    slope, icept = np.polyfit(xs, ys, 1)
    return float(slope), _r_squared(xs, ys, slope, icept)


def log_log_slope(
    indices: Sequence[float], values: Sequence[float]
) -> tuple[float, float]:
    """Slope and fit quality of ``log|values|`` against ``log(indices)``.

    A good fit with slope ``b`` means the magnitudes follow a power law
    ``~ index**b``.  Non-positive indices and zero values are skipped;
    fewer than three usable points returns ``(0.0, 0.0)``.
    """
    pairs = [
        (float(i), abs(float(v)))
        for i, v in zip(indices, values)
        if i > 0 and v != 0.0
    ]
    if len(pairs) < 3:
        return 0.0, 0.0
    xs = np.array([math.log(p[0]) for p in pairs])
    ys = np.array([math.log(p[1]) for p in pairs])
    slope, icept = np.polyfit(xs, ys, 1)
    return float(slope), _r_squared(xs, ys, slope, icept)


def tail_limit(
    indices: Sequence[int],
    values: Sequence[float],
    *,
    noise_floor: float = 1e-12,
) -> tuple[float, bool, str]:
    """Limit of a sampled sequence, choosing between two tail models.

    Successive differences are fitted against a geometric model
    (``log|d|`` linear in the index) and a power-law model (``log|d|``
    linear in ``log(index)``); the better-fitting model supplies the
    extrapolated limit.  The distinction matters: Richardson acceleration
    applied to a power-law tail converges to a spurious offset, so slowly
    decaying sequences must be corrected with the power-law formula
    ``limit = last + n*d/alpha`` instead.

    Returns:
        (limit, decided, model) with model one of "converged",
        "geometric", "power", "short", "none".  ``decided`` is False when
        no model explained the tail; ``limit`` is then the last value.
    """
    vals = [float(v) for v in values]
    idx = [int(i) for i in indices]
    if len(vals) != len(idx):
        raise ValueError("indices and values must have equal lengths")
    if len(vals) < 6:
        if not vals:
            return math.nan, False, "short"
        return vals[-1], False, "short"

    window = min(12, len(vals) - 1)
    t_idx = idx[-(window + 1):]
    t_val = vals[-(window + 1):]
    diffs = [t_val[i + 1] - t_val[i] for i in range(len(t_val) - 1)]
    if all(abs(d) <= noise_floor for d in diffs):
        return t_val[-1], True, "converged"

    d_idx = t_idx[:-1]
    _, geo_r2 = log_linear_slope(d_idx, diffs)
    pow_slope, pow_r2 = log_log_slope(d_idx, diffs)
    monotone = all(d < 0 for d in diffs) or all(d > 0 for d in diffs)

    if monotone and pow_r2 >= 0.99 and pow_r2 > geo_r2 and pow_slope < -1.2:
        # Differences ~ C*n**pow_slope mean values ~ limit + C'*n**(-alpha).
        alpha = -pow_slope - 1.0
        limit = t_val[-1] + t_idx[-1] * diffs[-1] / alpha
        return limit, True, "power"

    geo = fit_geometric_tail(vals, noise_floor=noise_floor, window=window)
    if geo.decided:
        return geo.limit, True, "geometric"
    return vals[-1], False, "none"


def unwrap_phases(values: Sequence[complex]) -> list[float]:
    """Continuously-unwrapped arguments along a sequence.

    Consecutive phase steps are assumed smaller than pi; each step is the
    principal argument of the successive ratio.
    """
    out: list[float] = []
    prev = None
    for v in values:
        if prev is None or prev == 0 or v == 0:
            out.append(phase_of(v))
        else:
            out.append(out[-1] + phase_of(v / prev))
        prev = v
    return out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

_NODE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], cached per order."""
    if n not in _NODE_CACHE:
        _NODE_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _NODE_CACHE[n]


def fixed_gauss(f: Callable[[float], float], a: float, b: float, n: int):
    """Fixed-order Gauss-Legendre rule; summation order is deterministic."""
    xs, ws = gauss_nodes(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    total = 0.0
    for xi, wi in zip(xs, ws):
        total = total + wi * f(mid + half * xi)
    return total * half


def adaptive_quadrature(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    tol: float = 1e-12,
    max_depth: int = 12,
    base_nodes: int = 12,
) -> tuple[float, float]:
    """Adaptive Gauss quadrature by interval bisection.

    The local error indicator compares ``base_nodes`` against a doubled
    rule; intervals split until the indicator clears the (absolute) local
    tolerance or the depth cap is reached.

    Returns:
        (value, error_indicator_sum)
    """

    def recurse(lo: float, hi: float, loc_tol: float, depth: int):
        coarse = fixed_gauss(f, lo, hi, base_nodes)
        fine = fixed_gauss(f, lo, hi, 2 * base_nodes)
        err = abs(fine - coarse)
        if err <= loc_tol or depth >= max_depth:
            return fine, err
        mid = 0.5 * (lo + hi)
        left, el = recurse(lo, mid, 0.5 * loc_tol, depth + 1)
        right, er = recurse(mid, hi, 0.5 * loc_tol, depth + 1)
        return left + right, el + er

    value, err = recurse(float(a), float(b), tol, 0)
    return value, err
