"""Backward dynamics of disk self-maps.

Forward iteration locates the Denjoy-Wolff point; a circle scan finds
boundary fixed points and grades them by their angular derivative.
Backward orbits toward a repulsive fixed point are produced by a
linearized pull-back with Newton correction, and the associated
pre-model is graded regular / irregular / undecided by the summability
of the hyperbolic-distortion chain products along the orbit.  The
step-limit law ties the limiting orbit step to the derivative at the
fixed point and serves as an independent cross-check.

Orbit points are tracked through their exact boundary offsets
``1 - conj(sigma) * z_n`` (a double keeps full relative precision at
any depth, while the point itself does not), so steps and distortion
products stay clean far beyond the reach of plain double arithmetic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from ._numerics import needs_mp, tail_limit, to_mpc, unwrap_phases, working_dps
from .boundary import INFINITE, angular_derivative
from .distortion import _sequence_verdict
from .geometry import distance_from_ratio, hyperbolic_distance_disk
from .maps import SelfMap
from .reporting import csv_table

__all__ = [
    "BackwardOrbit",
    "PreModelReport",
    "backward_orbit",
    "boundary_fixed_points",
    "denjoy_wolff",
    "functional_equation_residual",
    "orbit_csv",
    "premodel_analysis",
    "step_limit_check",
]

# Forward iteration: stop once the seed triple has collapsed or a point
# has reached the boundary shell.
DW_DIAMETER_TOL = 1e-9
DW_BOUNDARY_GAP = 1e-9
DW_MAX_ROUNDS = 4000
_DW_SEEDS = (0.0, 0.35 + 0.2j, -0.45j)

# Boundary fixed-point scan.
SCAN_RADIUS = 1.0 - 1e-6
STABILITY_RADIUS = 1.0 - 1e-5
CONTACT_DISPLACEMENT = 1e-3
STABILITY_TOL = 1e-2
REPULSIVE_MARGIN = 1e-6

# Backward pull-back solver.
NEWTON_MAX_ITER = 60
NEWTON_RESTARTS = 8
RESTART_SEED = 20260816
RESIDUAL_TOL = 1e-10
STEP_SLACK = 1e-9
STEP_BOUND_SLACK = 1e-6

# Pre-model analysis.
DERIVATIVE_FLOOR = 1e-12
MIN_USABLE_TERMS = 12


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BackwardOrbit:
    """A backward orbit z_0, z_1, ... with phi(z_{n+1}) = z_n.

    ``offsets`` stores ``1 - conj(limit_point) * z_n`` for every point;
    these doubles are the authoritative high-relative-precision record
    of the orbit and all derived quantities (steps, distortion products)
    are computed from them.  ``regular`` means the steps stay bounded
    and the points leave every compact subset of the disk;
    ``limit_point`` is the boundary point the orbit converges to, or
    None when it does not settle.
    """

    points: tuple[complex, ...]
    steps: tuple[float, ...]
    regular: bool
    limit_point: complex | None
    offsets: tuple[complex, ...]
    max_residual: float

    def __post_init__(self) -> None:
        if len(self.points) != len(self.offsets):
            raise ValueError("points and offsets must pair up")
        if self.steps and len(self.steps) != len(self.points) - 1:
            raise ValueError("need one step per consecutive pair")


@dataclass(frozen=True)
class PreModelReport:
    """Regularity grading of the pre-model at a repulsive fixed point.

    ``derivative`` is the angular derivative at ``sigma`` (greater than
    1 at a repulsive point); ``mu`` is the limit of the distortion chain
    products along the orbit, in (0, 1]; ``partial_sums`` accumulates
    the differences between the products and ``mu``.  The verdict is
    "regular" when those differences are summable by the tail-decay
    fits, "irregular" when they decidedly are not, and "undecided"
    otherwise (including when a re-run with the start index shifted by
    one contradicts the first pass).
    """

    sigma: complex
    derivative: float
    n0: int
    mu: float
    partial_sums: tuple[float, ...]
    rho_measured: float
    rho_formula: float
    theta: float
    verdict: str

    def __post_init__(self) -> None:
        if self.verdict not in ("regular", "irregular", "undecided"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"mu must lie in (0, 1]: {self.mu!r}")

    def to_json_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "derivative": self.derivative,
            "n0": self.n0,
            "mu": self.mu,
            "partial_sums": list(self.partial_sums),
            "rho_measured": self.rho_measured,
            "rho_formula": self.rho_formula,
            "theta": self.theta,
            "verdict": self.verdict,
        }


# ---------------------------------------------------------------------------
# Denjoy-Wolff point
# ---------------------------------------------------------------------------


def _triple_diameter(points: Sequence[complex]) -> float:
    return max(
        hyperbolic_distance_disk(points[i], points[j])
        for i in range(len(points))
        for j in range(i + 1, len(points))
    )


def _newton_fixed_point(m: SelfMap, z: complex) -> complex:
    for _ in range(40):
        val, der = m.eval_dual(z)
        slope = der - 1.0
        if abs(slope) < 1e-12:
            break
        step = (val - z) / slope
        z = z - step
        if abs(step) < 1e-15:
            break
    return z


def denjoy_wolff(m: SelfMap) -> complex:
    """Denjoy-Wolff point estimate: interior, or unimodular for boundary.

    Three spread seeds are iterated until their hyperbolic diameter
    collapses (interior case, refined by Newton on ``phi(z) = z``) or a
    point reaches the boundary shell (boundary case, returned
    normalized).  Rotation-like maps contract neither way.

    Raises:
        ValueError: when the iterates never settle (elliptic-rotation
            behaviour, or convergence too slow to observe).
    """
    if m.domain != "disk":
        raise ValueError("Denjoy-Wolff estimation runs on disk maps")
    points = [complex(s) for s in _DW_SEEDS]
    for _ in range(DW_MAX_ROUNDS):
        points = [complex(m(z)) for z in points]
        for z in points:
            if abs(z) > 1.0 - DW_BOUNDARY_GAP:
                return z / abs(z)
        if _triple_diameter(points) < DW_DIAMETER_TOL:
            return _newton_fixed_point(m, points[0])
    raise ValueError(
        f"iterates did not settle after {DW_MAX_ROUNDS} rounds; "
        "the map behaves like an elliptic rotation"
    )


# ---------------------------------------------------------------------------
# Boundary fixed points
# ---------------------------------------------------------------------------


def _angle_displacement(m: SelfMap, t: float) -> float:
    """Principal argument of the image relative to the boundary point."""
    u = cmath.exp(1j * t)
    return cmath.phase(u.conjugate() * m(SCAN_RADIUS * u))


def _bisect_displacement(m: SelfMap, lo: float, hi: float) -> float:
    f_lo = _angle_displacement(m, lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = _angle_displacement(m, mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) == (f_mid < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def boundary_fixed_points(
    m: SelfMap, resolution: int = 720
) -> list[tuple[complex, complex | str, str]]:
    """Boundary fixed points with derivative estimates and a grading.

    Scans the angular displacement ``arg(conj(u) * phi(r u))`` on a
    boundary grid for zero crossings, refines each by bisection, keeps
    candidates whose radial limits are stable and land back on the
    point, and grades them by the angular derivative: "repulsive" above
    1, "super-repulsive" when infinite, "regular" otherwise.  Coarse
    grids can miss tightly paired fixed points; raising ``resolution``
    narrows the scan.
    """
    if m.domain != "disk":
        raise ValueError("the boundary scan runs on disk maps")
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    ts = [2.0 * math.pi * j / resolution for j in range(resolution)]
    deltas = [_angle_displacement(m, t) for t in ts]

    candidates: list[float] = []
    zero_like = [abs(d) < 1e-12 for d in deltas]
    for j in range(resolution):
        if zero_like[j]:
            # Take one representative per run of consecutive zeros.
            if not zero_like[j - 1]:
                candidates.append(ts[j])
            continue
        k = (j + 1) % resolution
        if zero_like[k]:
            continue
        wrap_safe = abs(deltas[j]) < 0.75 and abs(deltas[k]) < 0.75
        if wrap_safe and (deltas[j] < 0.0) != (deltas[k] < 0.0):
            hi = ts[k] if k != 0 else 2.0 * math.pi
            candidates.append(_bisect_displacement(m, ts[j], hi))

    results: list[tuple[complex, complex | str, str]] = []
    seen: list[float] = []
    for t in sorted(c % (2.0 * math.pi) for c in candidates):
        if any(abs(t - s) < 1e-6 or abs(abs(t - s) - 2.0 * math.pi) < 1e-6 for s in seen):
            continue
        sigma = cmath.exp(1j * t)
        near = complex(m(SCAN_RADIUS * sigma))
        if abs(near - sigma) > CONTACT_DISPLACEMENT:
            continue
        if abs(complex(m(STABILITY_RADIUS * sigma)) - near) > STABILITY_TOL:
            continue
        try:
            derivative = angular_derivative(m, sigma)
        except ValueError:
            continue
        if derivative == INFINITE:
            kind = "super-repulsive"
        elif abs(derivative) > 1.0 + REPULSIVE_MARGIN:
            kind = "repulsive"
        else:
            kind = "regular"
        seen.append(t)
        results.append((sigma, derivative, kind))
    return results


# ---------------------------------------------------------------------------
# Backward orbits
# ---------------------------------------------------------------------------


def _gap_from_offset(t: complex) -> float:
    """1 - |z|^2 computed exactly from the offset of z."""
    return 2.0 * t.real - abs(t) ** 2


def _step_from_offsets(t1: complex, t2: complex) -> float:
    """Hyperbolic distance between the points carrying the two offsets."""
    num = abs(t1 - t2)
    den = abs(t1 + t2.conjugate() - t2.conjugate() * t1)
    return distance_from_ratio(num / den)


def _solve_pullback(
    m: SelfMap, sigma: complex, t_target: complex, t_seed: complex
) -> complex | None:
    """Solve phi(sigma * (1 - t)) = sigma * (1 - t_target) for t.

    Newton iteration in the offset coordinate; the working precision is
    sized by the seed's boundary gap so the root keeps full relative
    accuracy at any depth.  Returns None when the iteration leaves the
    disk or fails to converge.
    """
    gap = abs(t_seed)
    if gap <= 0.0:
        return None
    if not needs_mp(gap):
        target = sigma * (1.0 - t_target)
        w = sigma * (1.0 - t_seed)
        for _ in range(NEWTON_MAX_ITER):
            val, der = m.eval_dual(w)
            if der == 0:
                return None
            step = (complex(val) - target) / complex(der)
            w = w - step
            if abs(w) >= 1.0:
                return None
            if abs(step) <= 1e-16:
                break
        val, _ = m.eval_dual(w)
        if abs(complex(val) - target) > 1e-13:
            return None
        return 1.0 - sigma.conjugate() * w
    with mpmath.workdps(working_dps(gap)):
        sig = to_mpc(sigma)
        sig = sig / abs(sig)
        target = sig * (1 - to_mpc(t_target))
        t = to_mpc(t_seed)
        tiny = mpmath.mpf(10) ** (4 - mpmath.mp.dps)
        for _ in range(NEWTON_MAX_ITER):
            if _gap_from_offset(complex(t)) <= 0.0:
                return None
            w = sig * (1 - t)
            val, der = m.eval_dual(w)
            if der == 0:
                return None
            dt = (val - target) / (sig * der)
            t = t + dt
            if abs(dt) <= tiny * abs(t):
                break
        w = sig * (1 - t)
        val, _ = m.eval_dual(w)
        if abs(val - target) > 1e-10 * max(1e-3, abs(t)):
            return None
        return complex(t)


def _pullback_polynomial(m: SelfMap, target: complex) -> np.ndarray | None:
    """Coefficients of phi(w) - target cleared of denominators, or None."""
    params = dict(m.params)
    if m.family == "power":
        n = int(params["n"])
        coeffs = np.zeros(n + 1, dtype=complex)
        coeffs[0] = 1.0
        coeffs[-1] = -target
        return coeffs
    if m.family == "blaschke":
        num = np.array([1.0 + 0j])
        den = np.array([1.0 + 0j])
        for a in params["zeros"]:
            num = np.polymul(num, np.array([1.0, -a], dtype=complex))
            den = np.polymul(den, np.array([-np.conj(a), 1.0], dtype=complex))
        width = max(len(num), len(den))
        num = np.pad(num, (width - len(num), 0))
        den = np.pad(den, (width - len(den), 0))
        return num - target * den
    if m.family == "blaschke2":
        a = complex(params["a"])
        return np.array([1.0, a * (target - 1.0), -target], dtype=complex)
    if m.family == "psi":
        b = complex(params["b"])
        return np.array(
            [1.0 - target * b.conjugate(), -(target - b)], dtype=complex
        )
    return None


def _rational_pullback(
    m: SelfMap, sigma: complex, t_target: complex, t_seed: complex
) -> complex | None:
    """Root-set fallback: pick the preimage closest to the seed."""
    target = sigma * (1.0 - t_target)
    coeffs = _pullback_polynomial(m, target)
    if coeffs is None:
        return None
    seed = sigma * (1.0 - t_seed)
    best = None
    for root in np.roots(coeffs):
        root = complex(root)
        if abs(root) >= 1.0:
            continue
        if best is None or abs(root - seed) < abs(best - seed):
            best = root
    if best is None:
        return None
    # Polish the double-precision root so deep offsets stay accurate.
    t_root = 1.0 - sigma.conjugate() * best
    polished = _solve_pullback(m, sigma, t_target, t_root)
    if polished is not None:
        return polished
    if abs(complex(m(best)) - target) <= RESIDUAL_TOL:
        return t_root
    return None


def backward_orbit(
    m: SelfMap, z0, sigma, length: int = 24
) -> BackwardOrbit:
    """Backward orbit from z0 toward the repulsive fixed point sigma.

    Each step solves ``phi(z_{n+1}) = z_n`` by Newton seeded at the
    linearized pull-back ``sigma + (z_n - sigma) / phi'(sigma)``; for
    the rational catalog families a companion-matrix root extraction
    backs the solver up, and jittered restarts (seeded by
    ``RESTART_SEED``) are the last resort.  Unresolvable steps truncate
    the orbit, as does a violation of step monotonicity.
    """
    if m.domain != "disk":
        raise ValueError("backward orbits are built for disk maps")
    if length < 2:
        raise ValueError("length must be at least 2")
    sigma = complex(sigma)
    if abs(abs(sigma) - 1.0) > 1e-12:
        raise ValueError(f"sigma must be unimodular: {sigma!r}")
    sigma /= abs(sigma)
    z0 = complex(z0)
    if not abs(z0) < 1.0:
        raise ValueError(f"initial point must be interior: {z0!r}")
    probe = complex(m((1.0 - 1e-4) * sigma))
    if abs(probe - sigma) > 0.05:
        raise ValueError(f"{sigma!r} is not a boundary fixed point")
    derivative = angular_derivative(m, sigma)
    if derivative == INFINITE:
        raise ValueError(
            f"the angular derivative at {sigma!r} is infinite; "
            "pull-back seeding needs a repulsive fixed point"
        )
    lam = complex(derivative)
    if abs(lam) <= 1.0:
        raise ValueError(
            f"derivative {abs(lam):.6g} at {sigma!r} does not exceed 1; "
            "the point is not repulsive"
        )

    rng = np.random.default_rng(RESTART_SEED)
    offsets = [1.0 - sigma.conjugate() * z0]
    for _ in range(length - 1):
        t_prev = offsets[-1]
        t_seed = t_prev / lam
        t_next = _solve_pullback(m, sigma, t_prev, t_seed)
        if t_next is None:
            t_next = _rational_pullback(m, sigma, t_prev, t_seed)
        restarts = 0
        while t_next is None and restarts < NEWTON_RESTARTS:
            jitter = 1.0 + 0.25 * complex(rng.normal(), rng.normal())
            t_next = _solve_pullback(m, sigma, t_prev, t_seed * jitter)
            restarts += 1
        if t_next is None:
            break
        offsets.append(t_next)

    steps = [
        _step_from_offsets(offsets[i], offsets[i + 1])
        for i in range(len(offsets) - 1)
    ]
    cut = len(steps)
    for i in range(len(steps) - 1):
        if steps[i + 1] < steps[i] - STEP_SLACK:
            cut = i + 1
            break
    steps = steps[:cut]
    offsets = offsets[: cut + 1]
    points = [sigma * (1.0 - t) for t in offsets]

    residuals = [
        abs(complex(m(points[i + 1])) - points[i])
        for i in range(len(points) - 1)
    ]
    max_residual = max(residuals) if residuals else 0.0

    if len(points) < 3:
        regular, limit_point = False, None
    else:
        bounded = max(steps) < steps[-1] + STEP_BOUND_SLACK
        shrinking = all(
            abs(offsets[i + 1]) < abs(offsets[i]) for i in range(len(offsets) - 1)
        )
        escaping = shrinking and abs(offsets[-1]) < 0.5 * abs(offsets[0])
        regular = bounded and escaping
        limit_point = sigma if escaping else None
    return BackwardOrbit(
        points=tuple(points),
        steps=tuple(steps),
        regular=regular,
        limit_point=limit_point,
        offsets=tuple(offsets),
        max_residual=max_residual,
    )


# ---------------------------------------------------------------------------
# Pre-model regularity
# ---------------------------------------------------------------------------


def _chain_products(
    offsets: Sequence[complex], moduli: Sequence[float], n0: int
) -> list[float]:
    """Distortion of the m-fold composition at z_{n0+m}, for m = 1.., by
    the chain rule: the product of single-step distortions telescopes
    the boundary gaps, so each factor is gap(n) * |phi'| / gap(n - 1).
    """
    products = []
    running = 1.0
    for j in range(n0 + 1, len(offsets)):
        running *= (
            _gap_from_offset(offsets[j])
            * moduli[j]
            / _gap_from_offset(offsets[j - 1])
        )
        products.append(running)
    return products


def _series_verdict(products: Sequence[float]) -> tuple[str, float, list[float]]:
    """(verdict, mu, partial sums) for one chain-product series."""
    count = len(products)
    mu, decided, _ = tail_limit(
        range(1, count + 1), list(products), noise_floor=1e-12
    )
    if not decided or not math.isfinite(mu) or mu <= 0.0:
        mu = products[-1]
    mu = min(max(mu, 1e-300), 1.0)
    increments = [p - mu for p in products]
    sums, total = [], 0.0
    for inc in increments:
        total += inc
        sums.append(total)
    verdict_map = {
        "convergent": "regular",
        "divergent": "irregular",
        "undecided": "undecided",
    }
    verdict = verdict_map[_sequence_verdict([abs(v) for v in increments])]
    if not decided:
        verdict = "undecided"
    return verdict, mu, sums


def premodel_analysis(m: SelfMap, orbit: BackwardOrbit) -> PreModelReport:
    """Grade the pre-model at the orbit's limit point.

    Computes the hyperbolic distortion of the m-fold composition at the
    orbit points by the chain-rule product, extrapolates its limit mu,
    and asks whether the differences from mu are summable.  The
    analysis is re-run with the start index shifted by one; a
    contradiction between the two passes downgrades the verdict to
    undecided.
    """
    if not orbit.regular or orbit.limit_point is None:
        raise ValueError("pre-model analysis needs a regular backward orbit")
    sigma = orbit.limit_point
    derivative = angular_derivative(m, sigma)
    if derivative == INFINITE:
        raise ValueError(
            f"the angular derivative at {sigma!r} is infinite; "
            "the pre-model is defined at repulsive fixed points"
        )
    lam = abs(complex(derivative))

    moduli = [abs(complex(m.eval_dual(z)[1])) for z in orbit.points]
    n0 = 0
    for i, value in enumerate(moduli):
        if value <= DERIVATIVE_FLOOR:
            n0 = i + 1
    usable = len(orbit.points) - 1 - n0
    if usable < MIN_USABLE_TERMS:
        raise ValueError(
            f"orbit too short: {usable} usable terms after n0={n0}, "
            f"need {MIN_USABLE_TERMS}"
        )

    products = _chain_products(orbit.offsets, moduli, n0)
    verdict, mu, sums = _series_verdict(products)
    if len(products) > 9:
        shifted, _, _ = _series_verdict(
            _chain_products(orbit.offsets, moduli, n0 + 1)
        )
        decided = {"regular", "irregular"}
        if verdict in decided and shifted in decided and shifted != verdict:
            verdict = "undecided"

    args = unwrap_phases(orbit.offsets)
    theta, theta_decided, _ = tail_limit(
        range(len(args)), list(args), noise_floor=1e-12
    )
    if not theta_decided:
        theta = args[-1]
    rho_measured, rho_formula = step_limit_check(orbit, lam, theta)
    return PreModelReport(
        sigma=sigma,
        derivative=lam,
        n0=n0,
        mu=mu,
        partial_sums=tuple(sums),
        rho_measured=rho_measured,
        rho_formula=rho_formula,
        theta=theta,
        verdict=verdict,
    )


def step_limit_check(
    orbit: BackwardOrbit, derivative: float, theta: float = 0.0
) -> tuple[float, float]:
    """(measured, predicted) limit of the orbit steps.

    The measured value extrapolates k(z_n, z_{n+1}); the prediction is
    ``2 artanh((lam - 1) / |exp(2 i theta) lam + 1|)`` with lam the
    derivative at the fixed point and theta the limiting offset
    argument.
    """
    if not orbit.steps:
        raise ValueError("the orbit has no steps")
    lam = float(derivative)
    if lam <= 1.0:
        raise ValueError("the step-limit law needs a derivative above 1")
    steps = list(orbit.steps)
    measured, decided, _ = tail_limit(
        range(len(steps)), steps, noise_floor=1e-12
    )
    if not decided:
        measured = steps[-1]
    formula = 2.0 * math.atanh(
        (lam - 1.0) / abs(cmath.exp(2j * theta) * lam + 1.0)
    )
    return measured, formula


# ---------------------------------------------------------------------------
# Pre-model functional equation
# ---------------------------------------------------------------------------


def functional_equation_residual(
    f: SelfMap, F: SelfMap, multiplier: float, samples: int = 200
) -> float:
    """Max residual of ``f(F(zeta)) = F(multiplier * zeta)`` on a sector.

    ``multiplier`` is the dilation of ``f`` at infinity (below 1 at a
    repulsive point).  The grid covers three decades of radius within
    the sector |arg zeta| <= pi/3.
    """
    if f.domain != "half-plane" or F.domain != "half-plane":
        raise ValueError("the functional equation lives on half-plane maps")
    if multiplier <= 0.0:
        raise ValueError("multiplier must be positive")
    if samples < 4:
        raise ValueError("need at least 4 samples")
    rows = max(3, int(round(math.sqrt(samples))))
    cols = max(3, -(-samples // rows))
    radii = np.logspace(-0.5, 1.5, rows)
    angles = np.linspace(-math.pi / 3.0, math.pi / 3.0, cols)
    worst = 0.0
    for r in radii:
        for a in angles:
            zeta = r * cmath.exp(1j * a)
            residual = abs(
                complex(f(F(zeta))) - complex(F(multiplier * zeta))
            )
            worst = max(worst, residual)
    return worst


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def orbit_csv(orbit: BackwardOrbit, report: PreModelReport | None = None) -> str:
    """Orbit table: n, point, step, and (with a report) the pre-model
    chain products and partial sums aligned at n = n0 + m."""
    count = len(orbit.points)
    steps: list[object] = list(orbit.steps) + [""] * (count - len(orbit.steps))
    products: list[object] = [""] * count
    sums: list[object] = [""] * count
    if report is not None:
        previous = 0.0
        for i, total in enumerate(report.partial_sums):
            n = report.n0 + 1 + i
            if n < count:
                products[n] = (total - previous) + report.mu
                sums[n] = total
            previous = total
    return csv_table(
        {
            "n": list(range(count)),
            "re": [z.real for z in orbit.points],
            "im": [z.imag for z in orbit.points],
            "step": steps,
            "dh_product": products,
            "partial_sum": sums,
        }
    )
