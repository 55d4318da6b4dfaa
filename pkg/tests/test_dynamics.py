"""Denjoy-Wolff points, boundary fixed points, backward orbits, pre-models."""

from __future__ import annotations

import dataclasses
import math

import pytest

from confmap.boundary import INFINITE, classify
from confmap.dynamics import (
    BackwardOrbit,
    PreModelReport,
    backward_orbit,
    boundary_fixed_points,
    denjoy_wolff,
    functional_equation_residual,
    orbit_csv,
    premodel_analysis,
    step_limit_check,
)
from confmap.maps import (
    Compose,
    Const,
    Mul,
    SelfMap,
    Var,
    automorphism,
    blaschke,
    conjugate_to_disk,
    degree_two_blaschke,
    hp_affine,
    hp_joukowski,
    hp_log_slow,
    identity_map,
    iterate,
    parse,
    power_map,
    rotation,
)

# The standard test orbit: z -> z^2 pulled back from 0.81 toward 1.  The
# exact orbit is z_n = exp(-T0 * 2**-n) with T0 = -log(0.81), and the
# chain products converge to T0 / sinh(T0).
T0 = -math.log(0.81)


def slow_disk_map():
    return conjugate_to_disk(hp_log_slow(), 1.0)


def exact_offset(n: int) -> float:
    # 1 - exp(-x) through expm1, immune to cancellation at depth.
    return -math.expm1(-T0 * 2.0**-n)


# ---------------------------------------------------------------------------
# Denjoy-Wolff points
# ---------------------------------------------------------------------------


class TestDenjoyWolff:
    def test_power_map_fixes_origin(self):
        assert abs(denjoy_wolff(power_map(2))) < 1e-9

    def test_degree_two_blaschke_fixes_origin(self):
        assert abs(denjoy_wolff(degree_two_blaschke(0.5))) < 1e-9

    def test_interior_point_refined_by_newton(self):
        # 0.5 z + 0.3 contracts the disk into itself with fixed point 0.6.
        m = parse("0.5*z + 0.3", domain="disk")
        assert abs(denjoy_wolff(m) - 0.6) < 1e-12

    def test_automorphism_attracts_to_boundary(self):
        value = denjoy_wolff(automorphism(0.5))
        assert abs(abs(value) - 1.0) < 1e-12
        assert abs(value - 1.0) < 1e-7

    def test_rotation_raises(self):
        with pytest.raises(ValueError, match="settle"):
            denjoy_wolff(rotation(0.7))

    def test_half_plane_map_rejected(self):
        with pytest.raises(ValueError, match="disk maps"):
            denjoy_wolff(hp_affine(2.0))


# ---------------------------------------------------------------------------
# Boundary fixed points
# ---------------------------------------------------------------------------


class TestBoundaryFixedPoints:
    def test_power_map(self):
        found = boundary_fixed_points(power_map(2))
        assert len(found) == 1
        sigma, derivative, kind = found[0]
        assert abs(sigma - 1.0) < 1e-12
        assert abs(derivative - 2.0) < 1e-6
        assert kind == "repulsive"

    def test_cube_map_finds_both(self):
        found = boundary_fixed_points(power_map(3))
        assert len(found) == 2
        assert abs(found[0][0] - 1.0) < 1e-12
        assert abs(found[1][0] + 1.0) < 1e-12
        for _, derivative, kind in found:
            assert abs(derivative - 3.0) < 1e-6
            assert kind == "repulsive"

    def test_degree_two_blaschke(self):
        found = boundary_fixed_points(degree_two_blaschke(0.5))
        assert len(found) == 1
        sigma, derivative, kind = found[0]
        assert abs(sigma - 1.0) < 1e-12
        assert abs(derivative - 4.0) < 1e-6
        assert kind == "repulsive"

    def test_automorphism_grades_both_ends(self):
        found = boundary_fixed_points(automorphism(0.5))
        assert len(found) == 2
        sigma0, der0, kind0 = found[0]
        sigma1, der1, kind1 = found[1]
        assert abs(sigma0 - 1.0) < 1e-12 and kind0 == "regular"
        assert abs(der0 - 1.0 / 3.0) < 1e-6
        assert abs(sigma1 + 1.0) < 1e-12 and kind1 == "repulsive"
        assert abs(der1 - 3.0) < 1e-6

    def test_slow_map_is_super_repulsive(self):
        found = boundary_fixed_points(slow_disk_map())
        by_kind = {kind: (sigma, der) for sigma, der, kind in found}
        assert set(by_kind) == {"super-repulsive", "regular"}
        sigma, derivative = by_kind["super-repulsive"]
        assert abs(sigma - 1.0) < 1e-12
        assert derivative == INFINITE
        sigma, derivative = by_kind["regular"]
        assert abs(sigma + 1.0) < 1e-12
        assert abs(derivative - 1.0) < 1e-6

    def test_resolution_validated(self):
        with pytest.raises(ValueError, match="at least 8"):
            boundary_fixed_points(power_map(2), resolution=4)

    def test_half_plane_map_rejected(self):
        with pytest.raises(ValueError, match="disk maps"):
            boundary_fixed_points(hp_affine(2.0))


# ---------------------------------------------------------------------------
# Backward orbits
# ---------------------------------------------------------------------------


class TestBackwardOrbit:
    def test_power_map_orbit_matches_exact_form(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=30)
        assert len(orbit.points) == 30
        for n, offset in enumerate(orbit.offsets):
            assert abs(offset - exact_offset(n)) <= 1e-12 * exact_offset(n)

    def test_residuals_below_tolerance(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=30)
        assert orbit.max_residual < 1e-10

    def test_steps_nondecreasing_and_bounded(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=30)
        for a, b in zip(orbit.steps, orbit.steps[1:]):
            assert b >= a - 1e-9
        assert max(orbit.steps) < orbit.steps[-1] + 1e-6

    def test_steps_converge_to_log_two(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=30)
        assert abs(orbit.steps[-1] - math.log(2.0)) < 1e-12

    def test_orbit_is_regular_with_limit_sigma(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=24)
        assert orbit.regular
        assert orbit.limit_point == 1.0

    def test_deep_orbit_keeps_full_relative_precision(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=40)
        assert abs(orbit.offsets[-1]) < 1e-11
        assert orbit.max_residual < 1e-10
        n = len(orbit.offsets) - 1
        assert abs(orbit.offsets[-1] - exact_offset(n)) <= 1e-11 * exact_offset(n)

    def test_automorphism_orbit_has_constant_steps(self):
        orbit = backward_orbit(automorphism(0.5), 0.25, -1.0, length=24)
        assert orbit.regular
        assert orbit.limit_point == -1.0
        assert max(orbit.steps) - min(orbit.steps) < 1e-12
        # The isometry step equals its own limit, log 3 for this slope.
        assert abs(orbit.steps[0] - math.log(3.0)) < 1e-12

    def test_chain_products_match_direct_composition(self):
        # D_h of the k-fold composite at z_k, straight from the
        # definition, against the telescoped product in the report.
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        report = premodel_analysis(m, orbit)
        products = []
        previous = 0.0
        for total in report.partial_sums:
            products.append(total - previous + report.mu)
            previous = total
        for k in range(1, 17):
            z_k = orbit.points[k]
            value, derivative = iterate(m, k).eval_dual(z_k)
            direct = (
                (1.0 - abs(z_k) ** 2)
                * abs(complex(derivative))
                / (1.0 - abs(complex(value)) ** 2)
            )
            assert abs(products[k - 1] - direct) <= 1e-9 * direct

    def test_half_plane_map_rejected(self):
        with pytest.raises(ValueError, match="disk maps"):
            backward_orbit(hp_affine(2.0), 0.5, 1.0)

    def test_length_validated(self):
        with pytest.raises(ValueError, match="at least 2"):
            backward_orbit(power_map(2), 0.5, 1.0, length=1)

    def test_sigma_must_be_unimodular(self):
        with pytest.raises(ValueError, match="unimodular"):
            backward_orbit(power_map(2), 0.5, 0.7)

    def test_start_must_be_interior(self):
        with pytest.raises(ValueError, match="interior"):
            backward_orbit(power_map(2), 1.5, 1.0)

    def test_contact_point_without_fixing_rejected(self):
        with pytest.raises(ValueError, match="not a boundary fixed point"):
            backward_orbit(blaschke([0.3, -0.4j]), 0.5, 1.0)

    def test_attracting_point_rejected(self):
        with pytest.raises(ValueError, match="does not exceed 1"):
            backward_orbit(automorphism(0.5), 0.5, 1.0)

    def test_infinite_derivative_rejected(self):
        with pytest.raises(ValueError, match="infinite"):
            backward_orbit(slow_disk_map(), 0.5, 1.0)

    def test_points_and_offsets_must_pair(self):
        with pytest.raises(ValueError, match="pair up"):
            BackwardOrbit(
                points=(0.5,),
                steps=(),
                regular=False,
                limit_point=None,
                offsets=(0.5, 0.25),
                max_residual=0.0,
            )


# ---------------------------------------------------------------------------
# Pre-model analysis
# ---------------------------------------------------------------------------


class TestPreModel:
    def test_power_map_is_regular(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        report = premodel_analysis(m, orbit)
        assert report.verdict == "regular"
        assert report.n0 == 0
        assert abs(report.derivative - 2.0) < 1e-9

    def test_power_map_mu(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        report = premodel_analysis(m, orbit)
        assert abs(report.mu - T0 / math.sinh(T0)) < 1e-4

    def test_power_map_step_limit(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        report = premodel_analysis(m, orbit)
        assert abs(report.rho_measured - math.log(2.0)) < 1e-5
        assert abs(report.rho_formula - math.log(2.0)) < 1e-5
        assert abs(report.theta) < 1e-9

    def test_power_map_partial_sums_settle(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        report = premodel_analysis(m, orbit)
        sums = report.partial_sums
        assert abs(sums[-1] - sums[-2]) < 1e-10

    def test_automorphism_premodel_is_exact(self):
        # Isometries have distortion 1 everywhere: mu = 1, zero sums.
        m = automorphism(0.5)
        orbit = backward_orbit(m, 0.25, -1.0, length=24)
        report = premodel_analysis(m, orbit)
        assert report.verdict == "regular"
        assert abs(report.mu - 1.0) < 1e-9
        assert max(abs(s) for s in report.partial_sums) < 1e-9
        assert abs(report.rho_measured - math.log(3.0)) < 1e-9
        assert abs(report.rho_formula - math.log(3.0)) < 1e-9

    @pytest.mark.parametrize(
        ("z0", "mu_exact"),
        [(0.5, 1.0 / 3.0), (2.0 / 3.0, 3.0 / 5.0)],
        ids=["start-half", "start-two-thirds"],
    )
    def test_affine_mu_depends_on_orbit_start(self, z0, mu_exact):
        # For zeta/2 + 1 on the half-plane the backward orbit from
        # x0 = (1 + z0)/(1 - z0) has Re zeta_n = 2^n (x0 - 2) + 2, and
        # the chain products telescope to (x0 - 2)/x0.
        g = conjugate_to_disk(hp_affine(0.5, 1.0), 1.0)
        orbit = backward_orbit(g, z0, 1.0, length=26)
        report = premodel_analysis(g, orbit)
        assert report.verdict == "regular"
        assert abs(report.mu - mu_exact) < 1e-6

    def test_step_formula_with_nonzero_angle(self):
        # A complex start approaches the fixed point along a slanted
        # ray; the step limit must track the offset angle theta.
        m = degree_two_blaschke(0.25)
        orbit = backward_orbit(m, 0.3 + 0.4j, 1.0, length=26)
        report = premodel_analysis(m, orbit)
        assert report.verdict == "regular"
        assert 1e-3 < abs(report.theta) < math.pi / 2
        assert abs(report.rho_measured - report.rho_formula) < 1e-9

    def test_mu_invariant_under_presentation(self):
        # The same dynamics written as a half-plane conjugate must give
        # the same chain-product limit.
        direct = power_map(2)
        conjugated = conjugate_to_disk(hp_joukowski(), 1.0)
        report_a = premodel_analysis(
            direct, backward_orbit(direct, 0.81, 1.0, length=24)
        )
        report_b = premodel_analysis(
            conjugated, backward_orbit(conjugated, 0.81, 1.0, length=24)
        )
        assert abs(report_a.mu - report_b.mu) < 2e-4

    def test_mu_invariant_under_rotation(self):
        base = power_map(2)
        rotated = SelfMap(
            domain="disk",
            expr=Mul(Const(-1j), Compose(base.expr, Mul(Const(1j), Var()))),
            certificate="analytic",
            label="rotated-power2",
        )
        report_a = premodel_analysis(
            base, backward_orbit(base, 0.81, 1.0, length=24)
        )
        report_b = premodel_analysis(
            rotated, backward_orbit(rotated, -0.81j, -1j, length=24)
        )
        assert abs(report_a.mu - report_b.mu) < 1e-12
        assert report_b.verdict == "regular"

    def test_regular_premodel_matches_strong_classification(self):
        # The explicit pre-model of z -> z^2 seen from the disk: its
        # dilation at the fixed point is finite and positive exactly
        # when the orbit analysis says regular.
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        assert premodel_analysis(m, orbit).verdict == "regular"
        linearizer = parse(
            "(1+exp(-1/w))/(1-exp(-1/w))", domain="half-plane"
        )
        report = classify(conjugate_to_disk(linearizer, 1.0), 1.0)
        assert report.classification == "strong"
        assert abs(report.angular_derivative - 0.5) < 1e-6

    def test_json_dict_round_trip_fields(self):
        m = power_map(2)
        report = premodel_analysis(
            m, backward_orbit(m, 0.81, 1.0, length=24)
        )
        data = report.to_json_dict()
        assert set(data) == {
            "sigma",
            "derivative",
            "n0",
            "mu",
            "partial_sums",
            "rho_measured",
            "rho_formula",
            "theta",
            "verdict",
        }
        assert data["verdict"] == "regular"
        assert len(data["partial_sums"]) == len(report.partial_sums)

    def test_report_validates_mu_range(self):
        with pytest.raises(ValueError, match="mu"):
            PreModelReport(
                sigma=1.0,
                derivative=2.0,
                n0=0,
                mu=1.5,
                partial_sums=(),
                rho_measured=0.7,
                rho_formula=0.7,
                theta=0.0,
                verdict="regular",
            )

    def test_report_validates_verdict(self):
        with pytest.raises(ValueError, match="verdict"):
            PreModelReport(
                sigma=1.0,
                derivative=2.0,
                n0=0,
                mu=1.0,
                partial_sums=(),
                rho_measured=0.7,
                rho_formula=0.7,
                theta=0.0,
                verdict="bogus",
            )

    def test_requires_regular_orbit(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=24)
        broken = dataclasses.replace(orbit, regular=False, limit_point=None)
        with pytest.raises(ValueError, match="regular backward orbit"):
            premodel_analysis(m, broken)

    def test_requires_enough_terms(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=8)
        with pytest.raises(ValueError, match="too short"):
            premodel_analysis(m, orbit)


# ---------------------------------------------------------------------------
# Step-limit law
# ---------------------------------------------------------------------------


class TestStepLimitCheck:
    def test_power_map_radial(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=24)
        measured, formula = step_limit_check(orbit, 2.0)
        assert abs(measured - math.log(2.0)) < 1e-5
        assert abs(formula - math.log(2.0)) < 1e-12

    def test_slanted_approach_takes_longer_steps(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=24)
        _, radial = step_limit_check(orbit, 2.0, theta=0.0)
        _, slanted = step_limit_check(orbit, 2.0, theta=1.0)
        assert slanted > radial

    def test_derivative_must_exceed_one(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=24)
        with pytest.raises(ValueError, match="above 1"):
            step_limit_check(orbit, 0.9)

    def test_needs_steps(self):
        bare = BackwardOrbit(
            points=(0.5,),
            steps=(),
            regular=False,
            limit_point=None,
            offsets=(0.5,),
            max_residual=0.0,
        )
        with pytest.raises(ValueError, match="no steps"):
            step_limit_check(bare, 2.0)


# ---------------------------------------------------------------------------
# Pre-model functional equation
# ---------------------------------------------------------------------------


class TestFunctionalEquationResidual:
    def test_dilation_with_identity_model(self):
        residual = functional_equation_residual(
            hp_affine(0.5), identity_map("half-plane"), 0.5
        )
        assert residual < 1e-14

    def test_affine_with_shift_model(self):
        residual = functional_equation_residual(
            hp_affine(0.5, 1.0), parse("w + 2", domain="half-plane"), 0.5
        )
        assert residual < 1e-12

    def test_joukowski_with_exponential_model(self):
        model = parse("(1+exp(-1/w))/(1-exp(-1/w))", domain="half-plane")
        residual = functional_equation_residual(hp_joukowski(), model, 0.5)
        assert residual < 1e-8

    def test_wrong_multiplier_is_loud(self):
        residual = functional_equation_residual(
            hp_affine(0.5, 1.0), parse("w + 2", domain="half-plane"), 0.7
        )
        assert residual > 0.1

    def test_domains_validated(self):
        with pytest.raises(ValueError, match="half-plane"):
            functional_equation_residual(
                power_map(2), identity_map("half-plane"), 0.5
            )

    def test_multiplier_validated(self):
        with pytest.raises(ValueError, match="positive"):
            functional_equation_residual(
                hp_affine(0.5), identity_map("half-plane"), -1.0
            )

    def test_samples_validated(self):
        with pytest.raises(ValueError, match="samples"):
            functional_equation_residual(
                hp_affine(0.5), identity_map("half-plane"), 0.5, samples=2
            )


# ---------------------------------------------------------------------------
# Orbit CSV
# ---------------------------------------------------------------------------


class TestOrbitCsv:
    def test_header_and_row_count(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=16)
        lines = orbit_csv(orbit).splitlines()
        assert lines[0] == "n,re,im,step,dh_product,partial_sum"
        assert len(lines) == 17

    def test_plain_orbit_leaves_analysis_columns_empty(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=16)
        row = orbit_csv(orbit).splitlines()[1].split(",")
        assert row[0] == "0"
        assert float(row[1]) == orbit.points[0].real
        assert float(row[3]) == orbit.steps[0]
        assert row[4] == "" and row[5] == ""

    def test_last_row_has_no_step(self):
        orbit = backward_orbit(power_map(2), 0.81, 1.0, length=16)
        row = orbit_csv(orbit).splitlines()[-1].split(",")
        assert row[3] == ""

    def test_report_columns_align_after_n0(self):
        m = power_map(2)
        orbit = backward_orbit(m, 0.81, 1.0, length=16)
        report = premodel_analysis(m, orbit)
        lines = orbit_csv(orbit, report).splitlines()
        first = lines[1 + report.n0].split(",")
        assert first[4] == "" and first[5] == ""
        second = lines[2 + report.n0].split(",")
        assert float(second[5]) == report.partial_sums[0]
        assert abs(float(second[4]) - (report.partial_sums[0] + report.mu)) < 1e-15
