"""Boundary-point analysis for holomorphic self-maps.

Everything here asks one question in several ways: how does a self-map
behave as its argument approaches a boundary point non-tangentially?
The answers come in two graded batteries of conditions.  The first
battery detects weak conformality (angle preservation: unimodular
boundary value, distortion tending to 1, angles tending to 0); the
second detects strong conformality (finite angular derivative: the
deficit integral converges, hyperbolic distances are asymptotically
preserved, the kernel conditions hold).  :func:`classify` consolidates
both into a single report.

Numeric honesty rules: a verdict is "holds" or "fails" only when the
documented decision rule fires on the sampled evidence; everything else
stays "undecided".  Deep samples are taken through exact path offsets
and mpmath working precision scaled to the boundary gap, so vanishing
quantities keep their leading digits instead of drowning in double
rounding.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath

from ._numerics import (
    MP_GAP,
    conjugate_of,
    tail_limit,
    to_mpc,
    unwrap_phases,
)
from .distortion import integral_I, is_automorphism_like
from .geometry import distance_from_ratio
from .kernel import kernel_boundary_condition
from .maps import SelfMap, expression_text
from .paths import ApproachPath, one_minus_sq_from_offset
from .reporting import (
    ConditionResult,
    ConformalityReport,
    VERDICT_FAILS,
    VERDICT_HOLDS,
    VERDICT_UNDECIDED,
)

__all__ = [
    "INFINITE",
    "GammaTrace",
    "angular_limit",
    "julia_quotient_profile",
    "angular_derivative",
    "visser_ostrowski",
    "weak_conformality_arg",
    "theorem1_battery",
    "theorem2_battery",
    "classify",
    "trace_gamma",
]

# Token for a divergent angular derivative in reports and JSON.
INFINITE = "infinite"

# Limits of ratio-type quantities (distortion, distance quotients,
# Visser-Ostrowski) are accepted as 1 within this tolerance and rejected
# decisively below the failure level.  Power-model extrapolations of
# harmonic tails carry a fit bias of order 1/length, so they get a
# wider acceptance band; the series in question are bounded by 1
# (Schwarz-Pick), which makes an overshoot pure extrapolation artifact.
LIMIT_TOL = 5e-3
POWER_LIMIT_TOL = 2.5e-2
FAIL_LEVEL = 0.9

# Angle-type limits (radians).
ANGLE_TOL = 5e-3
ANGLE_FAIL = 0.1

# Distance-difference and distance-ratio thresholds for the strong
# (Theorem-2) conditions.
DIFF_TOL = 0.05
RATIO_TOL = 0.05

# Dual-aperture Cauchy threshold for angular limits.
CAUCHY_TOL = 1e-7

# A boundary-value estimate counts as unimodular within this tolerance
# (widened by the estimate's own confidence) and as decisively interior
# below 1 - INTERIOR_MARGIN.
UNIMODULAR_TOL = 1e-6
INTERIOR_MARGIN = 1e-3

# Above this confidence the widened unimodularity test would accept
# anything, so the estimate carries no contact information at all.
CONTACT_MAX_CONFIDENCE = 0.1

# Divergence detection: primary tier needs monotone growth beyond this
# magnitude; the slow tier needs monotone growth by the given factor
# across the tail window (log-speed divergence never reaches the
# primary magnitude at sampling depth).
BLOWUP_MAGNITUDE = 1e6
BLOWUP_RUN = 10
SLOW_GROWTH_WINDOW = 12
SLOW_GROWTH_FACTOR = 1.25

# Series built against the estimated boundary value stop once the
# quantity in the denominator-sensitive position falls below this many
# multiples of the estimate's confidence.  The contamination of such a
# series is confidence/quantity, so this multiplier pins it at or below
# SERIES_FLOOR; deeper samples would measure the estimate's error, not
# the map.
OMEGA_ERROR_MULT = 1e9

# Depth cap for angular-derivative difference quotients: below this gap
# the boundary-value estimate's own error, amplified by 1/gap, would
# contaminate the quotients.
QUOTIENT_GAP_FLOOR = 1e-7

# Tail-fit noise floors for verdict series.  Verdict thresholds sit at
# 5e-3 and 0.05, so fluctuations at these scales are converged noise:
# direct samples carry mp accuracy (~1e-12), pair quantities inherit
# ~1e-9 from the exact-offset distance formulas at depth.
SERIES_FLOOR = 1e-9
PAIR_FLOOR = 1e-8

# Growing-lag pairs stop once the source pseudo-hyperbolic deficit
# 1 - rho^2 drops below this: the double-precision distance formula
# loses ulp/(1-rho) absolute accuracy, which would exceed PAIR_FLOOR.
PAIR_DEFICIT_FLOOR = 1e-6

_WINDING_GUARD = math.pi / 2


# --------------------------------------------------------------------------
# Path sampling at gap-scaled precision


@dataclass(frozen=True)
class _PathSamples:
    """Cached per-point data along one approach path.

    ``values_mp`` keeps the mpmath image values (at each point's own
    working precision) so pair quantities can later be combined at joint
    precision without re-evaluating the map; ``values`` are double
    casts for limit extrapolation.  ``one_minus_sq`` and
    ``image_one_minus_sq`` are the exact boundary deficits 1-|z_n|^2 and
    1-|f(z_n)|^2; ``dh`` is the hyperbolic distortion built from them.
    """

    path: ApproachPath
    values: tuple
    values_mp: tuple
    derivatives: tuple
    one_minus_sq: tuple
    image_one_minus_sq: tuple
    image_gap: tuple
    dh: tuple
    dps: tuple

    @property
    def length(self) -> int:
        return self.path.length


@functools.lru_cache(maxsize=256)
def _sample_path(m: SelfMap, path: ApproachPath) -> _PathSamples:
    values, values_mp, derivatives = [], [], []
    one_minus_sq, image_one_minus_sq, image_gap, dh, dps_list = [], [], [], [], []
    for n in path.indices():
        gap = path.gap(n)
        if gap >= MP_GAP:
            z = path.point(n)
            val, der = m.eval_dual(z)
            val, der = complex(val), complex(der)
            oms = one_minus_sq_from_offset(path.offset(n))
            ims = 1.0 - abs(val) ** 2
            igap = 1.0 - abs(val)
            values_mp.append(val)
            dps_list.append(0)
        else:
            dps = path.dps_for(n)
            with mpmath.workdps(dps):
                zm = path.point_mp(n)
                val_m, der_m = m.eval_dual(zm)
                oms = float(one_minus_sq_from_offset(to_mpc(path.offset(n))))
                ims = float(1 - abs(val_m) ** 2)
                igap = float(1 - abs(val_m))
                val, der = complex(val_m), complex(der_m)
            values_mp.append(val_m)
            dps_list.append(dps)
        values.append(val)
        derivatives.append(der)
        one_minus_sq.append(oms)
        image_one_minus_sq.append(ims)
        image_gap.append(igap)
        dh.append(oms * abs(der) / ims if ims > 0.0 else math.inf)
    return _PathSamples(
        path=path,
        values=tuple(values),
        values_mp=tuple(values_mp),
        derivatives=tuple(derivatives),
        one_minus_sq=tuple(one_minus_sq),
        image_one_minus_sq=tuple(image_one_minus_sq),
        image_gap=tuple(image_gap),
        dh=tuple(dh),
        dps=tuple(dps_list),
    )


def _one_minus_rho_sq_from_offsets(d1: complex, d2: complex) -> float:
    """1 - rho(z, w)^2 for points given by exact offsets from sigma."""
    num = abs(d1 - d2)
    den = abs(d1.conjugate() + d2 - d1.conjugate() * d2)
    return (den - num) * (den + num) / (den * den)


def _image_pair(sa: _PathSamples, ia: int, sb: _PathSamples, ib: int):
    """(k_image, one_minus_rho_sq_image) for one sample pair.

    Combined at the deeper point's working precision; the cached mp
    values carry enough digits that the cancellation in den - num stays
    far above their representation error.
    """
    dps = max(sa.dps[ia], sb.dps[ib])
    va, vb = sa.values_mp[ia], sb.values_mp[ib]
    if dps == 0:
        num = abs(va - vb)
        den = abs(1.0 - vb.conjugate() * va)
        if num == 0.0:
            return 0.0, 1.0
        k = math.log((den + num) / (den - num))
        deficit = (den - num) * (den + num) / (den * den)
        return k, float(deficit)
    with mpmath.workdps(dps):
        num = abs(to_mpc(va) - vb)
        den = abs(1 - conjugate_of(to_mpc(vb)) * va)
        if num == 0:
            return 0.0, 1.0
        k = float(mpmath.log((den + num) / (den - num)))
        deficit = float((den - num) * (den + num) / (den * den))
        return k, deficit


def _source_k(sa: _PathSamples, ia: int, sb: _PathSamples, ib: int) -> float:
    d1, d2 = sa.path.offset(ia), sb.path.offset(ib)
    num = abs(d1 - d2)
    den = abs(d1.conjugate() + d2 - d1.conjugate() * d2)
    return distance_from_ratio(num / den)


def _monotone_increasing(values: Sequence[float]) -> bool:
    return all(b >= a for a, b in zip(values, values[1:]))


def _tail(values: Sequence, count: int) -> list:
    return list(values[-count:]) if len(values) >= count else list(values)


# --------------------------------------------------------------------------
# Elementary boundary quantities


def _tail_limit_retry(
    values: Sequence[float], *, noise_floor: float = 1e-12
) -> tuple[float, bool, str]:
    """tail_limit with a short-window retry.

    Truncated series put shallow samples inside the default fit window,
    where second-order terms bend the decay off its asymptotic model;
    a second pass over the last nine values sees only the clean tail.
    """
    vals = list(values)
    if len(vals) < 4:
        return (vals[-1] if vals else math.nan), False, ""
    limit, decided, model = tail_limit(
        range(len(vals)), vals, noise_floor=noise_floor
    )
    if not decided and len(vals) >= 10:
        short = vals[-9:]
        start = len(vals) - 9
        limit2, decided2, model2 = tail_limit(
            range(start, len(vals)), short, noise_floor=noise_floor
        )
        if decided2:
            return limit2, True, model2
    return limit, decided, model


def _complex_tail_limit(
    values: Sequence[complex], *, noise_floor: float = 1e-12
) -> tuple[complex, bool]:
    """Componentwise dual-model limit of a complex sequence."""
    re, re_ok, _ = _tail_limit_retry(
        [v.real for v in values], noise_floor=noise_floor
    )
    im, im_ok, _ = _tail_limit_retry(
        [v.imag for v in values], noise_floor=noise_floor
    )
    return complex(re, im), re_ok and im_ok


def angular_limit(m: SelfMap, path: ApproachPath) -> tuple[complex, float]:
    """Boundary value estimate along dual apertures with a confidence.

    The map is sampled along the path's aperture and its mirror image
    (+-pi/4 when the path is radial); each value sequence is
    extrapolated componentwise and the two limits are averaged.  The
    confidence is the diameter of the tail cloud: the largest pairwise
    distance among the last few samples of both sequences and the two
    extrapolated limits.  A confidence below ``CAUCHY_TOL`` is the
    dual-aperture Cauchy criterion for accepting the estimate.
    """
    if m.domain != "disk" or path.domain != "disk":
        raise ValueError("angular limits are sampled on disk paths")
    beta = path.aperture if path.aperture != 0.0 else math.pi / 4
    plus = _sample_path(m, path.with_aperture(beta))
    minus = _sample_path(m, path.with_aperture(-beta))
    est_plus, _ = _complex_tail_limit(plus.values)
    est_minus, _ = _complex_tail_limit(minus.values)
    estimate = (est_plus + est_minus) / 2.0
    cloud = _tail(plus.values, 4) + _tail(minus.values, 4) + [est_plus, est_minus]
    confidence = max(
        abs(a - b) for i, a in enumerate(cloud) for b in cloud[i + 1:]
    )
    return estimate, confidence


def julia_quotient_profile(
    m: SelfMap, path: ApproachPath
) -> tuple[tuple[float, ...], float]:
    """Samples of (1-|f(z_n)|)/(1-|z_n|) and a liminf estimate.

    The boundary liminf of this quotient is the angular derivative
    modulus when finite; the estimate is ``math.inf`` when the profile
    keeps growing through the tail (slow divergence included).
    """
    if m.domain != "disk" or path.domain != "disk":
        raise ValueError("the Julia quotient is sampled on disk paths")
    samples = _sample_path(m, path)
    profile = []
    for n in path.indices():
        src_gap = samples.one_minus_sq[n] / (1.0 + abs(1.0 - path.offset(n)))
        profile.append(samples.image_gap[n] / src_gap)
    estimate = _growth_or_limit(profile)
    return tuple(profile), estimate


def _growth_or_limit(profile: Sequence[float]) -> float:
    """Extrapolated limit, or math.inf when the tail keeps growing."""
    if _diverges(profile):
        return math.inf
    limit, decided, _ = tail_limit(
        range(len(profile)), list(profile), noise_floor=SERIES_FLOOR
    )
    return limit if decided else profile[-1]


def _diverges(profile: Sequence[float]) -> bool:
    run = _tail(profile, BLOWUP_RUN)
    if _monotone_increasing(run) and run[-1] > BLOWUP_MAGNITUDE:
        return True
    window = _tail(profile, SLOW_GROWTH_WINDOW)
    return (
        len(window) == SLOW_GROWTH_WINDOW
        and _monotone_increasing(window)
        and window[0] > 0.0
        and window[-1] >= SLOW_GROWTH_FACTOR * window[0]
    )


def _require_contact(
    m: SelfMap, sigma: complex, path: ApproachPath
) -> tuple[complex, float]:
    omega, confidence = angular_limit(m, path)
    if confidence > CONTACT_MAX_CONFIDENCE:
        raise ValueError(
            f"boundary value estimate at {sigma!r} is too uncertain "
            f"(confidence {confidence:.3g}) to test for contact"
        )
    if abs(abs(omega) - 1.0) > max(UNIMODULAR_TOL, 2.0 * confidence):
        raise ValueError(
            f"no unimodular boundary value at {sigma!r}: "
            f"estimate {omega!r} with confidence {confidence:.3g}"
        )
    return omega / abs(omega), confidence


def _derivative_quotients(
    m: SelfMap,
    sigma: complex,
    path: ApproachPath,
    omega: complex,
    confidence: float = 0.0,
) -> tuple[list[int], list[complex]]:
    """(f(z_n) - omega) / (z_n - sigma) down to the quotient gap floor."""
    samples = _sample_path(m, path)
    floor = OMEGA_ERROR_MULT * confidence
    indices, quotients = [], []
    for n in path.indices():
        if path.gap(n) < QUOTIENT_GAP_FLOOR:
            break
        if samples.dps[n] == 0:
            num = samples.values[n] - omega
            q = num / (-sigma * path.offset(n))
        else:
            with mpmath.workdps(samples.dps[n]):
                om = to_mpc(omega)
                om = om / abs(om)
                num = complex(samples.values_mp[n] - om)
                q = num / (-sigma * path.offset(n))
        if abs(num) < floor:
            break
        indices.append(n)
        quotients.append(q)
    return indices, quotients


def angular_derivative(m: SelfMap, sigma, path: ApproachPath | None = None):
    """Angular derivative at ``sigma``: a complex estimate or "infinite".

    Extrapolates the Caratheodory quotients (f(z_n) - omega)/(z_n -
    sigma) along the path and cross-checks the result against the
    extrapolated f'(z_n); the two must agree for the estimate to be
    meaningful, and the evidence of divergence is the Julia quotient
    profile (whose liminf shares finiteness with the derivative), since
    difference quotients against an estimated omega cannot be trusted
    deep below the estimate's own accuracy.

    Returns:
        A complex estimate, or the string "infinite" on divergence.

    Raises:
        ValueError: no unimodular boundary value at sigma.
    """
    sigma = complex(sigma)
    if path is None:
        path = ApproachPath(sigma)
    omega, confidence = _require_contact(m, sigma, path)
    profile, julia_estimate = julia_quotient_profile(m, path)
    if math.isinf(julia_estimate):
        return INFINITE
    indices, quotients = _derivative_quotients(m, sigma, path, omega, confidence)
    if not quotients:
        raise ValueError(
            "boundary value estimate is too uncertain for derivative quotients"
        )
    estimate, decided = _complex_tail_limit(quotients, noise_floor=SERIES_FLOOR)
    derivative_limit, der_decided = _complex_tail_limit(
        list(_sample_path(m, path).derivatives), noise_floor=SERIES_FLOOR
    )
    if (
        decided
        and der_decided
        and abs(estimate - derivative_limit) <= 1e-4 * max(1.0, abs(estimate))
    ):
        # Both routes share the limit when the derivative is finite, and
        # the f' route needs no boundary-value estimate, so agreement
        # promotes its cleaner number.
        return derivative_limit
    return estimate if decided else quotients[-1]


def visser_ostrowski(m: SelfMap, sigma, path: ApproachPath | None = None) -> complex:
    """Extrapolated Visser-Ostrowski quotient (z-sigma) f'(z) / (f(z)-omega).

    A limit of 1 (with a unimodular boundary value) marks weak
    conformality.  For half-plane maps with vertex at infinity the
    quotient takes the form ``zeta F'(zeta) / F(zeta)``.
    """
    if m.domain == "half-plane":
        if path is None:
            path = ApproachPath("inf")
        if path.domain != "half-plane":
            raise ValueError("half-plane maps need a path with vertex 'inf'")
        series = []
        for n in path.indices():
            zeta = path.point(n)
            val, der = m.eval_dual(zeta)
            series.append(zeta * der / val)
        estimate, _ = _complex_tail_limit(series, noise_floor=SERIES_FLOOR)
        return estimate
    sigma = complex(sigma)
    if path is None:
        path = ApproachPath(sigma)
    omega, confidence = _require_contact(m, sigma, path)
    series = _vo_series(m, sigma, path, omega, confidence)
    if not series:
        raise ValueError(
            f"boundary value estimate at {sigma!r} is too uncertain "
            f"(confidence {confidence:.3g}) for the quotient"
        )
    estimate, decided = _complex_tail_limit(series, noise_floor=SERIES_FLOOR)
    return estimate if decided else series[-1]


def _vo_series(
    m: SelfMap,
    sigma: complex,
    path: ApproachPath,
    omega: complex,
    confidence: float,
) -> list[complex]:
    samples = _sample_path(m, path)
    floor = OMEGA_ERROR_MULT * confidence
    series = []
    for n in path.indices():
        if samples.dps[n] == 0:
            num = (-sigma * path.offset(n)) * samples.derivatives[n]
            den = samples.values[n] - omega
        else:
            with mpmath.workdps(samples.dps[n]):
                om = to_mpc(omega)
                om = om / abs(om)
                num = (-to_mpc(sigma) * path.offset(n)) * samples.derivatives[n]
                den = samples.values_mp[n] - om
                num, den = complex(num), complex(den)
        if abs(den) < floor:
            break
        series.append(num / den)
    return series


def weak_conformality_arg(
    m: SelfMap, sigma, path: ApproachPath | None = None
) -> float:
    """Extrapolated limit of arg((1 - conj(omega) f(z)) / (1 - conj(sigma) z)).

    Zero marks weak conformality (with unimodular omega).  The
    denominator's argument is exactly the path aperture, so only the
    numerator needs evaluation.
    """
    sigma = complex(sigma)
    if path is None:
        path = ApproachPath(sigma)
    omega, confidence = _require_contact(m, sigma, path)
    angles = _weak_arg_series(m, sigma, path, omega, confidence)
    if not angles:
        raise ValueError(
            f"boundary value estimate at {sigma!r} is too uncertain "
            f"(confidence {confidence:.3g}) for the argument limit"
        )
    limit, decided, _ = _tail_limit_retry(angles, noise_floor=SERIES_FLOOR)
    return limit if decided else angles[-1]


def _weak_arg_series(
    m: SelfMap,
    sigma: complex,
    path: ApproachPath,
    omega: complex,
    confidence: float = 0.0,
) -> list[float]:
    """Arguments of 1 - conj(omega) f(z_n), aperture removed.

    The boundary value is renormalized to the unit circle in working
    precision (its double rounding alone would tilt deep numerators),
    and the series stops once the numerator is within reach of the
    boundary-value estimate's error.
    """
    samples = _sample_path(m, path)
    floor = OMEGA_ERROR_MULT * confidence
    raw = []
    for n in path.indices():
        if samples.dps[n] == 0:
            num = 1.0 - omega.conjugate() * samples.values[n]
        else:
            with mpmath.workdps(samples.dps[n]):
                om = to_mpc(omega)
                om = om / abs(om)
                num = complex(1 - conjugate_of(om) * samples.values_mp[n])
        if abs(num) < floor:
            break
        raw.append(num)
    return [a - path.aperture for a in unwrap_phases(raw)]


# --------------------------------------------------------------------------
# Verdict rules


def _tail_settled(values: Sequence[float], floor: float, count: int = 6) -> bool:
    """True when the last few values agree to within the noise floor.

    Complements the diff-based converged test in ``tail_limit``: a fast
    geometric series reaches the floor early, leaving the fit window
    with too few clean differences to support any model.
    """
    tail = _tail(values, count)
    if len(tail) < 3:
        return False
    center = tail[-1]
    return all(abs(v - center) <= floor for v in tail)


def _verdict_limit_one(indices, series, *, noise_floor: float) -> tuple[str, float, str]:
    values = list(series)
    if len(values) < 3:
        return VERDICT_UNDECIDED, (values[-1] if values else math.nan), ""
    if _tail_settled(values, noise_floor):
        limit, decided, model = values[-1], True, "settled"
    else:
        limit, decided, model = tail_limit(
            list(indices), values, noise_floor=noise_floor
        )
    tol = POWER_LIMIT_TOL if model == "power" else LIMIT_TOL
    if decided and abs(limit - 1.0) <= tol:
        return VERDICT_HOLDS, limit, model
    if decided and limit < FAIL_LEVEL:
        return VERDICT_FAILS, limit, model
    return VERDICT_UNDECIDED, limit, model


def _verdict_angle_zero(series) -> tuple[str, float]:
    values = list(series)
    if len(values) < 3:
        return VERDICT_UNDECIDED, (values[-1] if values else math.nan)
    winding = max(values[-SLOW_GROWTH_WINDOW:]) - min(values[-SLOW_GROWTH_WINDOW:])
    limit, decided, _ = _tail_limit_retry(values, noise_floor=SERIES_FLOOR)
    if winding > _WINDING_GUARD:
        return VERDICT_UNDECIDED, limit
    if decided and abs(limit) <= ANGLE_TOL:
        return VERDICT_HOLDS, limit
    if decided and abs(limit) > ANGLE_FAIL:
        return VERDICT_FAILS, limit
    return VERDICT_UNDECIDED, limit


def _verdict_difference_zero(series) -> tuple[str, float]:
    values = list(series)
    if len(values) < 3:
        return VERDICT_UNDECIDED, (values[-1] if values else math.nan)
    if _tail_settled(values, PAIR_FLOOR):
        limit, decided = values[-1], True
    else:
        limit, decided, _ = tail_limit(
            range(len(values)), values, noise_floor=PAIR_FLOOR
        )
    if decided and abs(limit) <= DIFF_TOL:
        return VERDICT_HOLDS, limit
    if decided and limit > DIFF_TOL:
        return VERDICT_FAILS, limit
    if not decided and _diverges(values) and values[-1] > DIFF_TOL:
        return VERDICT_FAILS, math.inf
    return VERDICT_UNDECIDED, limit


def _verdict_ratio_one(series) -> tuple[str, float]:
    values = list(series)
    if len(values) < 3:
        return VERDICT_UNDECIDED, (values[-1] if values else math.nan)
    if _tail_settled(values, PAIR_FLOOR):
        limit, decided = values[-1], True
    else:
        limit, decided, _ = tail_limit(
            range(len(values)), values, noise_floor=PAIR_FLOOR
        )
    if decided and abs(limit - 1.0) <= RATIO_TOL:
        return VERDICT_HOLDS, limit
    if decided and abs(limit - 1.0) > RATIO_TOL:
        return VERDICT_FAILS, limit
    if not decided and _diverges(values) and values[-1] > 1.0 + RATIO_TOL:
        return VERDICT_FAILS, math.inf
    return VERDICT_UNDECIDED, limit


# --------------------------------------------------------------------------
# Batteries


@dataclass(frozen=True)
class _Context:
    m: SelfMap
    sigma: complex
    radial: _PathSamples
    plus: _PathSamples
    minus: _PathSamples
    omega: complex
    confidence: float
    state: str  # "contact" | "interior" | "unknown"
    isometry: bool

    @property
    def omega_hat(self) -> complex:
        return self.omega / abs(self.omega)


def _build_context(
    m: SelfMap,
    sigma,
    *,
    aperture: float = math.pi / 4,
    start_offset: float = 0.5,
    ratio: float = 0.5,
    length: int = 48,
) -> _Context:
    if m.domain != "disk":
        raise ValueError("boundary batteries run on disk maps")
    sigma = complex(sigma)
    if abs(abs(sigma) - 1.0) > 1e-12:
        raise ValueError(f"sigma must be unimodular: {sigma!r}")
    sigma /= abs(sigma)
    base = ApproachPath(sigma, 0.0, start_offset, ratio, length)
    radial = _sample_path(m, base)
    plus = _sample_path(m, base.with_aperture(aperture))
    minus = _sample_path(m, base.with_aperture(-aperture))
    omega, confidence = angular_limit(m, base)
    if (
        abs(omega) > 0.0
        and confidence <= CONTACT_MAX_CONFIDENCE
        and abs(abs(omega) - 1.0) <= max(UNIMODULAR_TOL, 2.0 * confidence)
    ):
        state = "contact"
    elif abs(omega) < 1.0 - INTERIOR_MARGIN and confidence < INTERIOR_MARGIN:
        state = "interior"
    else:
        state = "unknown"
    return _Context(
        m=m,
        sigma=sigma,
        radial=radial,
        plus=plus,
        minus=minus,
        omega=omega,
        confidence=confidence,
        state=state,
        isometry=is_automorphism_like(m),
    )


def _degenerate_battery(ctx: _Context, ids: Sequence[str]) -> list[ConditionResult]:
    if ctx.state == "interior":
        verdict = VERDICT_FAILS
        note = (
            f"boundary value estimate {ctx.omega:.6g} is not unimodular; "
            "conformality requires a contact point"
        )
    else:
        verdict = VERDICT_UNDECIDED
        note = (
            f"boundary value undecided (estimate {ctx.omega:.6g}, "
            f"confidence {ctx.confidence:.3g})"
        )
    return [
        ConditionResult(condition=cid, verdict=verdict, evidence={}, note=note)
        for cid in ids
    ]


def _growing_lag_pairs(sa: _PathSamples, sb: _PathSamples):
    """Index pairs (n, 2n): hyperbolic separation grows without bound.

    Pairs whose source deficit undercuts ``PAIR_DEFICIT_FLOOR`` are
    dropped; beyond that depth the double-precision distance between the
    offsets is noisier than the verdict floors.
    """
    pairs = []
    for n in range(1, sa.length // 2):
        deficit = _one_minus_rho_sq_from_offsets(
            sa.path.offset(n), sb.path.offset(2 * n)
        )
        if deficit < PAIR_DEFICIT_FLOOR:
            break
        pairs.append((n, 2 * n))
    return pairs


def _condition_t1a(ctx: _Context, samples: _PathSamples, cid: str) -> ConditionResult:
    series = list(samples.dh)
    verdict, limit, model = _verdict_limit_one(
        samples.path.indices(), series, noise_floor=SERIES_FLOOR
    )
    return ConditionResult(
        condition=cid,
        verdict=verdict,
        evidence={
            "n": list(samples.path.indices()),
            "gap": [samples.path.gap(n) for n in samples.path.indices()],
            "distortion": series,
        },
        note=f"hyperbolic distortion tail limit {limit:.6g} ({model} model)",
    )


def _condition_t1b(ctx: _Context) -> ConditionResult:
    pairs = _growing_lag_pairs(ctx.plus, ctx.minus)
    indices, series = [], []
    for i, j in pairs:
        k_src = _source_k(ctx.plus, i, ctx.minus, j)
        k_img, _ = _image_pair(ctx.plus, i, ctx.minus, j)
        indices.append(i)
        series.append(k_img / k_src)
    verdict, limit, model = _verdict_limit_one(
        indices, series, noise_floor=PAIR_FLOOR
    )
    return ConditionResult(
        condition="T1b",
        verdict=verdict,
        evidence={
            "n": indices,
            "w_index": [j for _, j in pairs],
            "quotient": series,
        },
        note=(
            f"two-point distance quotient limit {limit:.6g} "
            f"({model} model; sampled-pairs evidence)"
        ),
    )


def _condition_weak_arg(ctx: _Context, samples: _PathSamples, cid: str) -> ConditionResult:
    angles = _weak_arg_series(
        ctx.m, ctx.sigma, samples.path, ctx.omega_hat, ctx.confidence
    )
    verdict, limit = _verdict_angle_zero(angles)
    note = f"argument tail limit {limit:.6g} rad"
    window = _tail(angles, SLOW_GROWTH_WINDOW)
    if window and max(window) - min(window) > _WINDING_GUARD:
        note += "; winding guard tripped (tail swings beyond pi/2)"
    return ConditionResult(
        condition=cid,
        verdict=verdict,
        evidence={
            "n": list(range(len(angles))),
            "angle": angles,
        },
        note=note,
    )


def _condition_t1b_prime(ctx: _Context) -> ConditionResult:
    samples = ctx.plus
    moduli = [abs(d) for d in samples.derivatives]
    if min(_tail(moduli, SLOW_GROWTH_WINDOW)) < 1e-12:
        return ConditionResult(
            condition="T1b'",
            verdict=VERDICT_FAILS,
            evidence={"n": list(samples.path.indices()), "abs_derivative": moduli},
            note="derivative vanishes along the tail; arg f' has no limit",
        )
    angles = unwrap_phases(samples.derivatives)
    window = _tail(angles, SLOW_GROWTH_WINDOW)
    limit, decided, _ = tail_limit(
        range(len(angles)), angles, noise_floor=SERIES_FLOOR
    )
    if max(window) - min(window) > _WINDING_GUARD:
        verdict = VERDICT_UNDECIDED
        note = "winding guard tripped (tail swings beyond pi/2)"
    elif decided:
        verdict = VERDICT_HOLDS
        note = f"arg f' settles at {limit:.6g} rad"
    else:
        verdict = VERDICT_UNDECIDED
        note = f"arg f' tail at {limit:.6g} rad, not settled"
    return ConditionResult(
        condition="T1b'",
        verdict=verdict,
        evidence={"n": list(samples.path.indices()), "arg_derivative": angles},
        note=note,
    )


def _condition_vo(ctx: _Context) -> ConditionResult:
    series = _vo_series(
        ctx.m, ctx.sigma, ctx.radial.path, ctx.omega_hat, ctx.confidence
    )
    if not series:
        return ConditionResult(
            condition="VO",
            verdict=VERDICT_UNDECIDED,
            note="every sample sits within the boundary-value error",
        )
    estimate, decided = _complex_tail_limit(series, noise_floor=SERIES_FLOOR)
    deviation = abs(estimate - 1.0)
    if decided and deviation <= LIMIT_TOL:
        verdict = VERDICT_HOLDS
    elif decided and deviation > 2.0 * ANGLE_FAIL:
        verdict = VERDICT_FAILS
    else:
        verdict = VERDICT_UNDECIDED
    return ConditionResult(
        condition="VO",
        verdict=verdict,
        evidence={
            "n": list(range(len(series))),
            "re": [q.real for q in series],
            "im": [q.imag for q in series],
        },
        note=f"Visser-Ostrowski quotient limit {estimate:.6g}",
    )


_T1_IDS = ("T1a", "T1b", "T1c", "T1a'", "T1b'", "T1c'", "VO")
_T2_IDS = ("T2a", "T2b", "T2b'", "T2b''", "T2b'''", "T2c", "T2c'", "T2d-julia")


_ISOMETRY_NOTE = (
    "map preserves hyperbolic distance (automorphism probe); "
    "the condition is an exact identity"
)


def _isometry_result(cid: str) -> ConditionResult:
    return ConditionResult(
        condition=cid,
        verdict=VERDICT_HOLDS,
        evidence={},
        note=_ISOMETRY_NOTE,
    )


def _battery1(ctx: _Context) -> list[ConditionResult]:
    if ctx.state != "contact":
        return _degenerate_battery(ctx, _T1_IDS)
    if ctx.isometry:
        # Deep deficit samples would only measure the coefficients'
        # double rounding (a rotation constant cannot have modulus
        # exactly 1 in floating point), so the distance-based checks
        # are settled by the probe instead of by path samples.
        return [
            _isometry_result("T1a"),
            _isometry_result("T1b"),
            _condition_weak_arg(ctx, ctx.radial, "T1c"),
            _isometry_result("T1a'"),
            _condition_t1b_prime(ctx),
            _condition_weak_arg(ctx, ctx.plus, "T1c'"),
            _condition_vo(ctx),
        ]
    return [
        _condition_t1a(ctx, ctx.radial, "T1a"),
        _condition_t1b(ctx),
        _condition_weak_arg(ctx, ctx.radial, "T1c"),
        _condition_t1a(ctx, ctx.plus, "T1a'"),
        _condition_t1b_prime(ctx),
        _condition_weak_arg(ctx, ctx.plus, "T1c'"),
        _condition_vo(ctx),
    ]


def _condition_t2a(ctx: _Context) -> ConditionResult:
    estimate = integral_I(ctx.m, ctx.sigma, 32)
    verdict = {
        "convergent": VERDICT_HOLDS,
        "divergent": VERDICT_FAILS,
        "undecided": VERDICT_UNDECIDED,
    }[estimate.verdict]
    return ConditionResult(
        condition="T2a",
        verdict=verdict,
        evidence={
            "shell": list(range(len(estimate.shells))),
            "contribution": list(estimate.shells),
        },
        note=(
            f"deficit integral {estimate.value:.6g}, tail bound "
            f"{estimate.tail_bound:.3g}, verdict {estimate.verdict}"
        ),
    )


def _condition_t2b(ctx: _Context, sa: _PathSamples, sb: _PathSamples, cid: str) -> ConditionResult:
    pairs = _growing_lag_pairs(sa, sb)
    indices, series = [], []
    for i, j in pairs:
        k_src = _source_k(sa, i, sb, j)
        k_img, _ = _image_pair(sa, i, sb, j)
        indices.append(i)
        series.append(k_src - k_img)
    verdict, limit = _verdict_difference_zero(series)
    return ConditionResult(
        condition=cid,
        verdict=verdict,
        evidence={
            "n": indices,
            "w_index": [j for _, j in pairs],
            "difference": series,
        },
        note=(
            f"distance difference tail {limit:.6g} (sampled-pairs evidence)"
        ),
    )


def _condition_t2b_double_prime(ctx: _Context) -> ConditionResult:
    pairs = _growing_lag_pairs(ctx.plus, ctx.minus)
    indices, series = [], []
    for i, j in pairs:
        src = _one_minus_rho_sq_from_offsets(
            ctx.plus.path.offset(i), ctx.minus.path.offset(j)
        )
        _, img = _image_pair(ctx.plus, i, ctx.minus, j)
        indices.append(i)
        series.append(img / src)
    verdict, limit = _verdict_ratio_one(series)
    return ConditionResult(
        condition="T2b''",
        verdict=verdict,
        evidence={
            "n": indices,
            "w_index": [j for _, j in pairs],
            "quotient": series,
        },
        note=(
            f"pseudo-hyperbolic deficit quotient tail {limit:.6g} "
            "(distance route; sampled-pairs evidence)"
        ),
    )


def _condition_t2b_triple_prime(ctx: _Context) -> ConditionResult:
    samples = ctx.radial
    omega = ctx.omega_hat
    floor = OMEGA_ERROR_MULT * ctx.confidence
    series = []
    for n in samples.path.indices():
        if samples.dps[n] == 0:
            edge = abs(1.0 - omega.conjugate() * samples.values[n])
            horo_img = edge**2 / samples.image_one_minus_sq[n]
        else:
            with mpmath.workdps(samples.dps[n]):
                om = to_mpc(omega)
                om = om / abs(om)
                edge = float(abs(1 - conjugate_of(om) * samples.values_mp[n]))
                horo_img = edge**2 / samples.image_one_minus_sq[n]
        if edge < floor:
            break
        horo_src = samples.path.gap(n) ** 2 / samples.one_minus_sq[n]
        series.append(horo_img / horo_src)
    if len(series) < 3:
        return ConditionResult(
            condition="T2b'''",
            verdict=VERDICT_UNDECIDED,
            evidence={"n": list(range(len(series))), "quotient": series},
            note="too few trustworthy samples for the horocycle quotient",
        )
    window = _tail(series, SLOW_GROWTH_WINDOW)
    spread = max(abs(v - series[-1]) for v in window)
    if spread < DIFF_TOL * (1.0 + abs(series[-1])):
        verdict = VERDICT_HOLDS
        note = f"horocycle quotient settles at {series[-1]:.6g}"
    elif (
        _monotone_increasing(window)
        and window[0] > 0.0
        and window[-1] >= SLOW_GROWTH_FACTOR * window[0]
    ):
        verdict = VERDICT_FAILS
        note = "horocycle quotient keeps growing; Julia liminf is infinite"
    else:
        verdict = VERDICT_UNDECIDED
        note = f"horocycle quotient tail at {series[-1]:.6g}, not settled"
    return ConditionResult(
        condition="T2b'''",
        verdict=verdict,
        evidence={"n": list(range(len(series))), "quotient": series},
        note=note,
    )


def _finite_derivative_estimate(ctx: _Context) -> tuple[complex | None, str]:
    """Angular derivative by dual routes, or None with the reason.

    The difference quotients against the boundary value are the primary
    route; the extrapolated f'(z_n) limit validates them and, on
    agreement, supplies the returned number (it needs no boundary-value
    estimate, so it is accurate to full sampling depth).
    """
    indices, quotients = _derivative_quotients(
        ctx.m, ctx.sigma, ctx.radial.path, ctx.omega_hat, ctx.confidence
    )
    if not quotients:
        return None, "no trustworthy derivative quotients at this confidence"
    estimate, decided = _complex_tail_limit(quotients, noise_floor=SERIES_FLOOR)
    cross, cross_decided = _complex_tail_limit(
        list(ctx.radial.derivatives), noise_floor=SERIES_FLOOR
    )
    if decided and cross_decided:
        if abs(estimate - cross) <= 1e-4 * max(1.0, abs(estimate)):
            return cross, (
                f"angular derivative {cross:.8g} agrees with the "
                f"difference-quotient limit {estimate:.8g}"
            )
        return None, (
            f"quotient limit {estimate:.6g} and f' limit {cross:.6g} disagree"
        )
    if decided:
        return estimate, (
            f"difference quotients settle at {estimate:.8g} (f' route unsettled)"
        )
    return None, f"derivative quotients not settled (last {quotients[-1]:.6g})"


def _condition_t2d(ctx: _Context) -> ConditionResult:
    profile, julia_estimate = julia_quotient_profile(ctx.m, ctx.radial.path)
    evidence = {
        "n": list(ctx.radial.path.indices()),
        "julia_quotient": list(profile),
    }
    if math.isinf(julia_estimate):
        return ConditionResult(
            condition="T2d-julia",
            verdict=VERDICT_FAILS,
            evidence=evidence,
            note="Julia quotient diverges; angular derivative is infinite",
        )
    value, note = _finite_derivative_estimate(ctx)
    return ConditionResult(
        condition="T2d-julia",
        verdict=VERDICT_HOLDS if value is not None else VERDICT_UNDECIDED,
        evidence=evidence,
        note=f"{note}; Julia liminf {julia_estimate:.6g}",
    )


def _battery2(ctx: _Context) -> list[ConditionResult]:
    if ctx.state != "contact":
        return _degenerate_battery(ctx, _T2_IDS)
    if ctx.isometry:
        return [
            _condition_t2a(ctx),
            _isometry_result("T2b"),
            _isometry_result("T2b'"),
            _isometry_result("T2b''"),
            _condition_t2b_triple_prime(ctx),
            _isometry_result("T2c"),
            _isometry_result("T2c'"),
            _condition_t2d(ctx),
        ]
    kernel_c, kernel_c_prime, _ = kernel_boundary_condition(
        ctx.m, ctx.sigma, (ctx.plus.path, ctx.minus.path)
    )
    return [
        _condition_t2a(ctx),
        _condition_t2b(ctx, ctx.plus, ctx.minus, "T2b"),
        _condition_t2b(ctx, ctx.radial, ctx.radial, "T2b'"),
        _condition_t2b_double_prime(ctx),
        _condition_t2b_triple_prime(ctx),
        kernel_c,
        kernel_c_prime,
        _condition_t2d(ctx),
    ]


def theorem1_battery(m: SelfMap, sigma, **path_kwargs) -> list[ConditionResult]:
    """Weak-conformality conditions at ``sigma`` (ids T1a..T1c', VO).

    Keyword arguments configure the approach paths (``aperture``,
    ``start_offset``, ``ratio``, ``length``).
    """
    return _battery1(_build_context(m, sigma, **path_kwargs))


def theorem2_battery(m: SelfMap, sigma, **path_kwargs) -> list[ConditionResult]:
    """Strong-conformality conditions at ``sigma`` (ids T2a..T2d-julia)."""
    return _battery2(_build_context(m, sigma, **path_kwargs))


def _consensus(results: Sequence[ConditionResult]) -> str:
    holds = any(r.verdict == VERDICT_HOLDS for r in results)
    fails = any(r.verdict == VERDICT_FAILS for r in results)
    if holds and fails:
        return "mixed"
    if holds:
        return VERDICT_HOLDS
    if fails:
        return VERDICT_FAILS
    return VERDICT_UNDECIDED


def classify(
    m: SelfMap,
    sigma,
    *,
    aperture: float = math.pi / 4,
    start_offset: float = 0.5,
    ratio: float = 0.5,
    length: int = 48,
) -> ConformalityReport:
    """Consolidated conformality classification at a boundary point.

    Runs both condition batteries and reduces them to one of:

    * ``strong``: the Theorem-2 battery holds (finite angular
      derivative); the weak conditions must not contradict it.
    * ``weak-only``: the Theorem-1 battery holds but a strong indicator
      fails (angle preservation without a finite derivative).
    * ``none``: no unimodular boundary value, or the weak battery fails.
    * ``inconclusive``: anything else, in particular contradictory
      verdicts inside a battery (spelled out in ``diagnostic``).
    """
    ctx = _build_context(
        m,
        sigma,
        aperture=aperture,
        start_offset=start_offset,
        ratio=ratio,
        length=length,
    )
    t1 = _battery1(ctx)
    t2 = _battery2(ctx)
    c1, c2 = _consensus(t1), _consensus(t2)
    diagnostic = ""
    if ctx.state == "interior":
        classification = "none"
        diagnostic = (
            f"boundary value estimate {ctx.omega:.6g} stays interior; "
            "no conformality possible"
        )
    elif c1 == "mixed" or c2 == "mixed":
        classification = "inconclusive"
        parts = []
        for name, results, consensus in (("T1", t1, c1), ("T2", t2, c2)):
            if consensus == "mixed":
                held = [r.condition for r in results if r.verdict == VERDICT_HOLDS]
                failed = [r.condition for r in results if r.verdict == VERDICT_FAILS]
                parts.append(
                    f"{name} battery contradicts itself: "
                    f"holds {held}, fails {failed}"
                )
        diagnostic = "; ".join(parts)
    elif c2 == VERDICT_HOLDS and c1 == VERDICT_FAILS:
        classification = "inconclusive"
        diagnostic = (
            "strong conditions hold while weak conditions fail; "
            "the theorems forbid this combination"
        )
    elif c2 == VERDICT_HOLDS:
        classification = "strong"
    elif c1 == VERDICT_HOLDS and c2 == VERDICT_FAILS:
        classification = "weak-only"
    elif c1 == VERDICT_FAILS:
        classification = "none"
    else:
        classification = "inconclusive"
        if not diagnostic:
            diagnostic = "not enough decided conditions"

    derivative: complex | str | None = None
    for result in t2:
        if result.condition == "T2d-julia" and ctx.state == "contact":
            if result.verdict == VERDICT_FAILS:
                derivative = INFINITE
            elif result.verdict == VERDICT_HOLDS:
                derivative, _ = _finite_derivative_estimate(ctx)
    boundary_value = ctx.omega if ctx.state != "unknown" else None
    return ConformalityReport(
        map_text=expression_text(m.expr, "z"),
        domain=m.domain,
        sigma=ctx.sigma,
        boundary_value=boundary_value,
        angular_derivative=derivative,
        classification=classification,
        conditions=tuple(t1 + t2),
        diagnostic=diagnostic,
    )


# --------------------------------------------------------------------------
# Preimage ray tracing


@dataclass(frozen=True)
class GammaTrace:
    """Unit-speed trace of the preimage of a real ray [R, oo).

    ``samples`` pairs the arc-length parameter with the curve point;
    ``targets`` are the real values F(gamma) was steered to.  The tail
    diagnostics quantify the geometric properties the curve should
    satisfy when F is weakly conformal at infinity: Re gamma(s)/s -> 1,
    arg gamma(s) -> 0, and bounded hyperbolic distance to the real
    point s.
    """

    samples: tuple[tuple[float, complex], ...]
    targets: tuple[float, ...]
    max_real_residual: float
    ratio_tail: float
    arg_tail: float
    step_distance_bound: float
    diagnostic: str = ""

    def csv(self) -> str:
        from .reporting import csv_table

        return csv_table(
            {
                "s": [s for s, _ in self.samples],
                "re": [g.real for _, g in self.samples],
                "im": [g.imag for _, g in self.samples],
                "target": list(self.targets),
            }
        )


def trace_gamma(F: SelfMap, R: float, steps: int = 160) -> GammaTrace:
    """Continue the preimage of [R, oo) under a half-plane self-map.

    Predictor steps follow gamma' = 1/F' toward the next (geometrically
    growing) real target; Newton corrector solves F(gamma) = target.
    Newton divergence truncates the trace and is reported in
    ``diagnostic`` rather than raised: a partial curve is still
    evidence.
    """
    if F.domain != "half-plane":
        raise ValueError("gamma traces live on half-plane maps")
    if R <= 0.0:
        raise ValueError("R must be positive")
    if steps < 2:
        raise ValueError("steps must be at least 2")

    def newton(start: complex, target: float) -> complex | None:
        z = start
        for _ in range(40):
            val, der = F.eval_dual(z)
            if z.real <= 0.0 or der == 0:
                return None
            step = (val - target) / der
            z = z - step
            if abs(step) <= 1e-14 * (1.0 + abs(z)):
                return z if z.real > 0.0 else None
        return None

    diagnostic = ""
    gamma = newton(complex(2.0 * R, 0.0), R) or newton(complex(R, 0.0), R)
    if gamma is None:
        return GammaTrace(
            samples=(),
            targets=(),
            max_real_residual=math.inf,
            ratio_tail=math.nan,
            arg_tail=math.nan,
            step_distance_bound=math.inf,
            diagnostic=f"Newton failed to reach the ray start F(gamma) = {R}",
        )
    growth = 1.06
    targets = [R * growth**k for k in range(steps)]
    points: list[complex] = []
    reached: list[float] = []
    residual = 0.0
    for target in targets:
        if points:
            val, der = F.eval_dual(gamma)
            predicted = gamma + (target - val.real) / der
            candidate = newton(predicted, target)
        else:
            candidate = gamma
        if candidate is None:
            diagnostic = (
                f"Newton diverged at target {target:.6g}; "
                f"trace truncated after {len(points)} points"
            )
            break
        gamma = candidate
        points.append(gamma)
        reached.append(target)
        residual = max(residual, abs(F(gamma).imag))
    arc = points[0].real if points else 0.0
    samples = []
    for i, g in enumerate(points):
        if i > 0:
            arc += abs(g - points[i - 1])
        samples.append((arc, g))
    tail = samples[-max(3, len(samples) // 4):] if samples else []
    ratio_tail = tail[-1][1].real / tail[-1][0] if tail else math.nan
    arg_tail = (
        max(abs(math.atan2(g.imag, g.real)) for _, g in tail) if tail else math.nan
    )
    step_bound = 0.0
    for s, g in tail:
        rho = abs(g - s) / abs(g + s)
        step_bound = max(step_bound, distance_from_ratio(rho))
    return GammaTrace(
        samples=tuple(samples),
        targets=tuple(reached),
        max_real_residual=residual,
        ratio_tail=ratio_tail,
        arg_tail=arg_tail,
        step_distance_bound=step_bound,
        diagnostic=diagnostic,
    )
