"""Expression DSL, dual derivatives, catalog maps, validation, conjugation."""

from __future__ import annotations

import math

import mpmath
import pytest

from confmap.maps import (
    Compose,
    DomainEscape,
    Dual,
    ParseError,
    SelfMap,
    ValidationCertificate,
    ViolationReport,
    automorphism,
    blaschke,
    catalog_disk_sweep,
    catalog_halfplane_sweep,
    catalog_map,
    conjugate_to_disk,
    conjugate_to_halfplane,
    degree_two_blaschke,
    eval_with_derivative,
    expression_text,
    hp_affine,
    hp_joukowski,
    hp_log_slow,
    hp_sqrt_drift,
    identity_map,
    iterate,
    parse,
    parse_constant,
    power_map,
    rotation,
    validate_self_map,
)
from confmap.geometry import DiskPoint, HalfPlanePoint

from conftest import random_disk_points, random_halfplane_points

FD_STEP = 1e-6
FD_TOL = 1e-6
ROUND_TRIP_TOL = 1e-12


def sample_points(rng, m, n):
    if m.domain == "disk":
        return [complex(z) for z in random_disk_points(rng, n, max_radius=0.9)]
    return [complex(z) for z in random_halfplane_points(rng, n)]


class TestParser:
    def test_literal_forms(self):
        assert parse_constant("0.5") == 0.5
        assert parse_constant("1-2i") == 1.0 - 2.0j
        assert parse_constant("-0.4i") == -0.4j
        assert parse_constant("1e-3") == 1e-3
        assert parse_constant("(0.2+0.1i)") == 0.2 + 0.1j
        assert parse_constant("2*i") == 2.0j

    def test_double_star_power(self, rng):
        m1 = parse("z**2")
        m2 = parse("z^2")
        for z in sample_points(rng, m1, 10):
            assert m1(z) == m2(z)

    def test_negative_exponent(self):
        m = parse("w^(-1)", domain="half-plane")
        assert m(2.0) == pytest.approx(0.5, abs=1e-15)

    def test_precedence(self):
        m = parse("1+2*z^2")
        assert m(0.5) == pytest.approx(1.5, abs=1e-15)

    def test_functions(self):
        m = parse("exp(log(1+w))-1", domain="half-plane")
        assert m(0.7 + 0.2j) == pytest.approx(0.7 + 0.2j, rel=1e-14)
        s = parse("sqrt(w)", domain="half-plane")
        assert s(4.0) == pytest.approx(2.0, abs=1e-15)

    @pytest.mark.parametrize(
        "source, domain",
        [
            ("z+", "disk"),
            ("(z", "disk"),
            ("z^w", "half-plane"),
            ("z^0.5", "disk"),
            ("2z", "disk"),
            ("exp(z, 1)", "disk"),
            ("w*q", "half-plane"),
            ("z", "half-plane"),
            ("$z", "disk"),
        ],
    )
    def test_rejects_bad_input(self, source, domain):
        with pytest.raises(ParseError):
            parse(source, domain=domain)

    def test_error_position(self):
        with pytest.raises(ParseError) as err:
            parse("z*q+1")
        assert err.value.position == 2

    def test_wrong_variable_named(self):
        with pytest.raises(ParseError, match="unknown identifier"):
            parse("w^2", domain="disk")


class TestPrinter:
    @pytest.mark.parametrize(
        "builder, text",
        [
            (lambda: power_map(2), "z^2"),
            (lambda: automorphism(0.5), "(z+0.5)/(1+0.5*z)"),
            (lambda: automorphism(-0.3), "(z-0.3)/(1-0.3*z)"),
            (lambda: degree_two_blaschke(0.5), "z*((z-0.5)/(1-0.5*z))"),
            (lambda: hp_joukowski(), "(w^2+1)/(2*w)"),
            (lambda: hp_log_slow(), "w/(1+log(1+w))"),
            (lambda: identity_map("disk"), "z"),
        ],
    )
    def test_frozen_texts(self, builder, text):
        assert builder().source_text() == text

    def test_round_trip_all_catalog(self, rng):
        for m in catalog_disk_sweep() + catalog_halfplane_sweep():
            back = parse(m.source_text(), domain=m.domain)
            for z in sample_points(rng, m, 25):
                assert back(z) == pytest.approx(m(z), rel=ROUND_TRIP_TOL, abs=1e-15)

    def test_compose_prints_by_substitution(self):
        m = iterate(power_map(2), 2)
        assert m.source_text() == "(z^2)^2"
        n = Compose(automorphism(0.5).expr, power_map(2).expr)
        assert expression_text(n) == "((z^2)+0.5)/(1+0.5*(z^2))"


class TestDualDerivative:
    def test_against_finite_differences(self, rng):
        for m in catalog_disk_sweep() + catalog_halfplane_sweep():
            for z in sample_points(rng, m, 20):
                _, der = m.eval_dual(z)
                fd = (m(z + FD_STEP) - m(z - FD_STEP)) / (2 * FD_STEP)
                assert der == pytest.approx(fd, rel=FD_TOL, abs=FD_TOL)

    def test_function_derivatives(self):
        m = parse("exp(w)+log(w)+sqrt(w)", domain="half-plane")
        z = 1.3 + 0.4j
        _, der = m.eval_dual(z)
        import cmath

        want = cmath.exp(z) + 1 / z + 0.5 / cmath.sqrt(z)
        assert der == pytest.approx(want, rel=1e-13)

    def test_constant_map_derivative_zero(self):
        m = parse("0.3")
        val, der = m.eval_dual(0.5)
        assert val == 0.3
        assert der == 0

    def test_mp_scalars_pass_through(self):
        m = power_map(2)
        with mpmath.workdps(40):
            val, der = m.eval_dual(mpmath.mpc("0.9999999999999999999"))
            assert isinstance(val, mpmath.mpc)
            assert abs(der - 2 * mpmath.mpc("0.9999999999999999999")) < 1e-35

    def test_dual_pow_rejects_fractions(self):
        with pytest.raises(TypeError):
            Dual(1.0, 1.0) ** 0.5


class TestIterate:
    def test_zero_is_identity(self):
        m = iterate(power_map(2), 0)
        assert m(0.37) == 0.37

    def test_three_fold_square(self):
        m = iterate(power_map(2), 3)
        assert m(0.9) == pytest.approx(0.9**8, abs=1e-16)

    def test_chain_rule(self):
        m = iterate(power_map(2), 2)
        for x in (0.2, 0.5, 0.8):
            _, der = m.eval_dual(x)
            assert der == pytest.approx(4 * x**3, rel=1e-14)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            iterate(power_map(2), -1)


class TestEvalWithDerivative:
    def test_domain_escape(self):
        doubler = SelfMap(domain="disk", expr=parse("2*z").expr)
        with pytest.raises(DomainEscape):
            eval_with_derivative(doubler, 0.7)
        val, der = eval_with_derivative(doubler, 0.3)
        assert val == 0.6
        assert der == 2.0

    def test_rejects_exterior_input(self):
        with pytest.raises(ValueError):
            eval_with_derivative(power_map(2), 1.2)

    def test_wrapped_points(self):
        val, der = eval_with_derivative(power_map(2), DiskPoint(0.5))
        assert val == 0.25
        assert der == 1.0
        with pytest.raises(TypeError):
            eval_with_derivative(power_map(2), HalfPlanePoint(1.0))

    def test_halfplane_side(self):
        val, der = eval_with_derivative(hp_affine(2.0, 1.0), 3.0)
        assert val == 7.0
        assert der == 2.0


class TestValidation:
    def test_violation_reported_with_witness(self):
        doubler = SelfMap(domain="disk", expr=parse("2*z").expr)
        report = validate_self_map(doubler)
        assert isinstance(report, ViolationReport)
        assert abs(report.witness) < 1.0
        assert abs(report.value) >= 1.0

    def test_sampled_certificate(self):
        m = parse("(z+0.5)/(1+0.5*z)")
        cert = validate_self_map(m)
        assert isinstance(cert, ValidationCertificate)
        assert cert.kind == "sampled"
        assert cert.max_modulus < 1.0

    def test_analytic_shortcut(self):
        cert = validate_self_map(blaschke([0.3, -0.4j]))
        assert cert.kind == "analytic"
        assert cert.max_modulus < 1.0

    def test_halfplane_certificate(self):
        cert = validate_self_map(hp_log_slow())
        assert cert.min_real > 0.0


class TestCatalog:
    def test_ids_round_trip(self, rng):
        for m in catalog_disk_sweep() + catalog_halfplane_sweep():
            rebuilt = catalog_map(m.label)
            for z in sample_points(rng, m, 10):
                assert rebuilt(z) == pytest.approx(m(z), rel=1e-14, abs=1e-15)

    @pytest.mark.parametrize(
        "spec",
        ["nope", "psi", "blaschke2:a=1.5", "power:n=0", "blaschke:zeros="],
    )
    def test_invalid_specs(self, spec):
        with pytest.raises((ValueError, KeyError)):
            catalog_map(spec)

    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            automorphism(1.0)
        with pytest.raises(ValueError):
            degree_two_blaschke(-0.1)
        with pytest.raises(ValueError):
            hp_affine(0.0)
        with pytest.raises(ValueError):
            hp_sqrt_drift(-1.0)
        with pytest.raises(ValueError):
            blaschke([1.5])

    def test_blaschke_modulus_near_boundary(self):
        m = blaschke([0.3, -0.4j])
        for k in range(12):
            z = (1 - 1e-8) * complex(math.cos(k), math.sin(k))
            assert abs(m(z)) == pytest.approx(1.0, abs=1e-7)

    def test_log_slow_reference_value(self):
        m = hp_log_slow()
        assert m(1.0) == pytest.approx(1.0 / (1.0 + math.log(2.0)), rel=1e-15)

    def test_rotation_label_round_trip(self):
        m = rotation(math.pi / 3)
        rebuilt = catalog_map(m.label)
        assert rebuilt(0.4 + 0.1j) == pytest.approx(m(0.4 + 0.1j), rel=1e-15)


class TestConjugation:
    def test_square_map_becomes_joukowski(self, rng):
        transferred = conjugate_to_halfplane(power_map(2), 1.0)
        reference = hp_joukowski()
        for w in sample_points(rng, reference, 100):
            assert transferred(w) == pytest.approx(reference(w), rel=1e-11, abs=1e-11)

    def test_automorphism_becomes_affine(self, rng):
        b = 0.5
        transferred = conjugate_to_halfplane(automorphism(b), -1.0)
        reference = hp_affine((1.0 - b) / (1.0 + b))
        for w in sample_points(rng, reference, 50):
            assert transferred(w) == pytest.approx(reference(w), rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("sigma", [1.0, complex(math.cos(1.1), math.sin(1.1))])
    def test_round_trip(self, rng, sigma):
        m = degree_two_blaschke(0.5)
        back = conjugate_to_disk(conjugate_to_halfplane(m, sigma), sigma)
        for z in sample_points(rng, m, 40):
            assert back(z) == pytest.approx(m(z), rel=1e-11, abs=1e-11)

    def test_domain_guards(self):
        with pytest.raises(ValueError):
            conjugate_to_halfplane(hp_joukowski(), 1.0)
        with pytest.raises(ValueError):
            conjugate_to_disk(power_map(2), 1.0)
        with pytest.raises(ValueError):
            conjugate_to_halfplane(power_map(2), 0.5)

    def test_transferred_map_is_selfmap(self, rng):
        transferred = conjugate_to_halfplane(degree_two_blaschke(0.25), 1.0)
        for w in sample_points(rng, transferred, 30):
            assert transferred(w).real > 0
