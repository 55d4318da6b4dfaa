"""Kernel arithmetic: reproducing identities, positivity, boundary conditions."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from confmap.geometry import (
    hyperbolic_distance_disk,
    pseudo_hyperbolic_distance,
)
from confmap.kernel import (
    chain_inequality_check,
    delta_pseudometric,
    gram_matrix,
    kernel_boundary_condition,
    kernel_eval,
    kernel_point,
    normalized_inner_product,
)
from confmap.maps import (
    DomainEscape,
    automorphism,
    catalog_disk_sweep,
    conjugate_to_disk,
    degree_two_blaschke,
    hp_log_slow,
    identity_map,
    parse,
    power_map,
)
from confmap.paths import ApproachPath

from conftest import random_disk_points

IDENTITY_TOL = 1e-12
HERMITIAN_TOL = 1e-14
CS_SLACK = 1e-13


def zero_map():
    return parse("0*z", domain="disk")


def constant_map(c="0.3"):
    return parse(f"{c} + 0*z", domain="disk")


def slow_disk_map():
    return conjugate_to_disk(hp_log_slow(), 1.0)


def vertex_paths(length=48):
    return (
        ApproachPath(1.0, aperture=math.pi / 4, length=length),
        ApproachPath(1.0, aperture=-math.pi / 4, length=length),
    )


class TestKernelEval:
    def test_identity_kernel_is_one(self, rng):
        m = identity_map("disk")
        pts = random_disk_points(rng, 20)
        for z, w in zip(pts[:10], pts[10:]):
            assert kernel_eval(m, z, w) == pytest.approx(1.0, abs=1e-15)

    def test_zero_map_gives_szego_kernel(self, rng):
        m = zero_map()
        assert kernel_eval(m, 0j, 0j) == pytest.approx(1.0, abs=1e-15)
        for z, w in zip(random_disk_points(rng, 8), random_disk_points(rng, 8)):
            expected = 1.0 / (1.0 - w.conjugate() * z)
            assert kernel_eval(m, z, w) == pytest.approx(expected, abs=1e-14)

    def test_square_map_diagonal_value(self):
        # (1 - 1/16) / (1 - 1/4) = 5/4
        assert kernel_eval(power_map(2), 0.5, 0.5) == pytest.approx(1.25, abs=1e-15)

    def test_hermitian_symmetry(self, rng):
        pts = random_disk_points(rng, 40)
        for m in catalog_disk_sweep():
            for z, w in zip(pts[:20], pts[20:]):
                left = kernel_eval(m, z, w)
                right = kernel_eval(m, w, z)
                assert abs(left - right.conjugate()) < HERMITIAN_TOL

    def test_rejects_exterior_and_halfplane(self):
        with pytest.raises(ValueError, match="interior"):
            kernel_eval(power_map(2), 1.2, 0.1)
        from confmap.maps import hp_affine

        with pytest.raises(ValueError, match="disk"):
            kernel_eval(hp_affine(2.0), 1 + 1j, 2 + 1j)

    def test_escaping_map_raises(self):
        stretch = parse("2*z", domain="disk")
        with pytest.raises(DomainEscape):
            kernel_eval(stretch, 0.7, 0.1)


class TestKernelPoint:
    def test_norm_is_julia_quotient(self):
        kp = kernel_point(power_map(2), 0.5)
        assert kp.norm_sq == pytest.approx(1.25, abs=1e-15)
        assert kp.base.value == 0.5

    def test_identity_norm_one(self, rng):
        for z in random_disk_points(rng, 6):
            assert kernel_point(identity_map("disk"), z).norm_sq == pytest.approx(
                1.0, abs=1e-14
            )


class TestNormalizedInnerProduct:
    def test_identity_map_gives_one(self, rng):
        m = identity_map("disk")
        pts = random_disk_points(rng, 16)
        for z, w in zip(pts[:8], pts[8:]):
            assert normalized_inner_product(m, z, w) == pytest.approx(1.0, abs=1e-14)

    def test_diagonal_modulus_one(self, rng):
        for m in (power_map(2), automorphism(0.4), zero_map()):
            for z in random_disk_points(rng, 5):
                assert abs(normalized_inner_product(m, z, z)) == pytest.approx(
                    1.0, abs=1e-14
                )

    def test_square_map_invariant_julia_example(self):
        m = power_map(2)
        z, w = 0.3 + 0j, 0.6 + 0j
        s = normalized_inner_product(m, z, w)
        rho = pseudo_hyperbolic_distance(z, w)
        rho_image = pseudo_hyperbolic_distance(m(z), m(w))
        expected = (1.0 - rho * rho) / (1.0 - rho_image * rho_image)
        assert abs(s) ** 2 == pytest.approx(expected, abs=IDENTITY_TOL)

    def test_invariant_julia_identity_sweep(self, rng):
        # |<k_hat_z, k_hat_w>|^2 * (1 - rho(fz, fw)^2) = 1 - rho(z, w)^2,
        # ten catalog maps x 1000 pairs = 1e4 samples.
        for m in catalog_disk_sweep():
            zs = random_disk_points(rng, 1000)
            ws = random_disk_points(rng, 1000)
            for z, w in zip(zs, ws):
                s = normalized_inner_product(m, z, w)
                rho = pseudo_hyperbolic_distance(z, w)
                rho_image = pseudo_hyperbolic_distance(m(z), m(w))
                lhs = abs(s) ** 2 * (1.0 - rho_image * rho_image)
                assert lhs == pytest.approx(1.0 - rho * rho, abs=IDENTITY_TOL)
                assert abs(s) <= 1.0 + CS_SLACK

    def test_deep_points_agree_with_distance_route(self):
        # Near the boundary the direct kernel route must match the
        # distance-deficit route computed independently in mpmath.
        m = degree_two_blaschke(0.5)
        z = 1.0 - 1e-5
        w = (1.0 - 2e-5) * complex(math.cos(1e-5), math.sin(1e-5))
        s = abs(normalized_inner_product(m, z, w))
        with mpmath.workdps(40):
            zm, wm = mpmath.mpc(z), mpmath.mpc(w)
            fz, fw = m(zm), m(wm)
            rho = abs((zm - wm) / (1 - mpmath.conj(wm) * zm))
            rho_image = abs((fz - fw) / (1 - mpmath.conj(fw) * fz))
            expected = float(mpmath.sqrt((1 - rho**2) / (1 - rho_image**2)))
        assert s == pytest.approx(expected, abs=1e-10)


class TestGramMatrix:
    def test_five_random_points_psd(self, rng):
        pts = random_disk_points(rng, 5)
        matrix, psd = gram_matrix(power_map(2), pts)
        assert psd
        assert matrix.shape == (5, 5)
        assert np.max(np.abs(matrix - matrix.conj().T)) < HERMITIAN_TOL

    def test_single_point_positive(self):
        matrix, psd = gram_matrix(power_map(2), [0.5])
        assert psd
        assert matrix[0, 0].real == pytest.approx(1.25, abs=1e-15)

    def test_identity_all_ones_rank_one(self, rng):
        pts = random_disk_points(rng, 6)
        matrix, psd = gram_matrix(identity_map("disk"), pts)
        assert psd
        assert np.max(np.abs(matrix - 1.0)) < 1e-14
        assert np.linalg.matrix_rank(matrix, tol=1e-8) == 1

    def test_catalog_maps_psd_at_twelve_points(self, rng):
        pts = random_disk_points(rng, 12)
        for m in catalog_disk_sweep():
            _, psd = gram_matrix(m, pts)
            assert psd, m.label

    def test_duplicate_points_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            gram_matrix(power_map(2), [0.3, 0.1j, 0.3])


class TestDeltaPseudometric:
    def test_zero_map_reduces_to_pseudo_distance(self, rng):
        m = zero_map()
        pts = random_disk_points(rng, 40)
        for z, w in zip(pts[:20], pts[20:]):
            assert delta_pseudometric(m, z, w) == pytest.approx(
                pseudo_hyperbolic_distance(z, w), abs=1e-13
            )

    def test_diagonal_zero(self, rng):
        for z in random_disk_points(rng, 5):
            assert delta_pseudometric(power_map(3), z, z) == pytest.approx(
                0.0, abs=1e-13
            )

    def test_triangle_inequality_sweep(self, rng):
        # 100 triples per catalog map, 1e3 triples in total.  For
        # distance-preserving maps the pseudo-metric degenerates to 0
        # and only carries sqrt(eps) rounding noise, so the triangle
        # statement is replaced by the degeneracy itself.
        from confmap.distortion import is_automorphism_like

        for m in catalog_disk_sweep():
            a = random_disk_points(rng, 100)
            b = random_disk_points(rng, 100)
            c = random_disk_points(rng, 100)
            if is_automorphism_like(m):
                for x, y in zip(a, b):
                    assert delta_pseudometric(m, x, y) < 1e-7
                continue
            for x, y, v in zip(a, b, c):
                d_xy = delta_pseudometric(m, x, y)
                d_xv = delta_pseudometric(m, x, v)
                d_vy = delta_pseudometric(m, v, y)
                assert d_xy <= d_xv + d_vy + 1e-10


class TestChainInequality:
    def test_identity_map_all_terms_zero(self, rng):
        m = identity_map("disk")
        pts = random_disk_points(rng, 10)
        for z, w in zip(pts[:5], pts[5:]):
            assert chain_inequality_check(m, z, w)

    def test_coincident_points(self):
        assert chain_inequality_check(power_map(2), 0.4 + 0.1j, 0.4 + 0.1j)

    def test_holds_along_approach_pairs(self):
        # The regime the chain serves: both points jointly approaching a
        # point of conformality, where the middle term collapses onto
        # the lower one.  Depth is capped where double precision keeps
        # the slack meaningful.
        path_a, path_b = vertex_paths(length=14)
        for m in catalog_disk_sweep():
            for n in range(2, 12):
                for lag in (0, 1, 3):
                    if n + lag >= path_b.length:
                        continue
                    assert chain_inequality_check(
                        m, path_a.point(n), path_b.point(n + lag)
                    ), (m.label, n, lag)

    def test_universal_legs_on_random_pairs(self, rng):
        # The first two legs hold for arbitrary pairs and maps, the
        # constant map included; checked against geometry primitives.
        maps = list(catalog_disk_sweep()) + [constant_map()]
        for m in maps:
            zs = random_disk_points(rng, 100)
            ws = random_disk_points(rng, 100)
            for z, w in zip(zs, ws):
                rho = pseudo_hyperbolic_distance(z, w)
                rho_image = pseudo_hyperbolic_distance(m(z), m(w))
                ratio = (1.0 - rho_image**2) / (1.0 - rho**2)
                middle = hyperbolic_distance_disk(z, w) - hyperbolic_distance_disk(
                    m(z), m(w)
                )
                assert math.log(ratio) >= -1e-10
                assert math.log(ratio) <= middle + 1e-10

    def test_square_root_leg_reverses_for_constant_maps(self):
        # k(z, w) - 0 exceeds sqrt(1/(1 - rho^2) - 1) at moderate
        # separation, so the printed chain genuinely fails there.
        assert not chain_inequality_check(constant_map(), 0.1, 0.5)


class TestKernelBoundaryCondition:
    def test_automorphism_holds_with_limit_one(self):
        c, c_prime, anchor = kernel_boundary_condition(
            automorphism(0.5), 1.0, vertex_paths()
        )
        assert c.condition == "T2c"
        assert c_prime.condition == "T2c'"
        assert c.verdict == "holds"
        assert c_prime.verdict == "holds"
        assert anchor == pytest.approx(1.0, abs=1e-9)
        tail = c.evidence["modulus"][-6:]
        assert all(abs(v - 1.0) < 1e-9 for v in tail)

    def test_strong_blaschke_holds(self):
        c, c_prime, anchor = kernel_boundary_condition(
            degree_two_blaschke(0.5), 1.0, vertex_paths()
        )
        assert c.verdict == "holds"
        assert c_prime.verdict == "holds"
        # anchor limit 1/sqrt(angular derivative) = 1/2 since f(0) = 0
        assert anchor == pytest.approx(0.5, abs=1e-6)
        # >= 10x margin over the default 1e-3 tolerance
        limits = c_prime.evidence["limit_estimate"]
        assert all(v > 0.99 for v in limits)

    def test_slow_map_fails_all_three(self):
        c, c_prime, anchor = kernel_boundary_condition(
            slow_disk_map(), 1.0, vertex_paths()
        )
        assert c.verdict == "fails"
        assert c_prime.verdict == "fails"
        assert anchor < 1e-3
        # doubling pairs settle near 1/sqrt(2), far from 1
        tail = c.evidence["modulus"][-4:]
        assert all(abs(v - 1 / math.sqrt(2)) < 0.01 for v in tail)
        # per-lag limits decay with the lag
        limits = c_prime.evidence["limit_estimate"]
        assert limits[-1] < 0.7 * limits[0]

    def test_constant_map_fails(self):
        c, c_prime, anchor = kernel_boundary_condition(
            constant_map("0.3+0.1i"), 1.0, vertex_paths()
        )
        assert c.verdict == "fails"
        assert c_prime.verdict == "fails"
        assert anchor < 1e-3

    def test_single_path_reused_for_both_legs(self):
        path = ApproachPath(1.0, aperture=0.0, length=40)
        c, c_prime, _ = kernel_boundary_condition(
            automorphism(0.3), 1.0, [path]
        )
        assert c.verdict == "holds"
        assert c_prime.verdict == "holds"

    def test_evidence_rows_align(self):
        c, c_prime, _ = kernel_boundary_condition(
            power_map(2), 1.0, vertex_paths(length=32)
        )
        assert len(c.evidence["n"]) == len(c.evidence["modulus"]) == 16
        assert c.evidence["w_index"] == [2 * n for n in c.evidence["n"]]
        csv = c.evidence_csv()
        assert csv.splitlines()[0] == "n,w_index,modulus"
        assert c_prime.evidence["lag"] == [1, 2, 4, 8]
        assert "anchor limsup" in c_prime.note

    def test_validates_sigma_and_paths(self):
        paths = vertex_paths()
        with pytest.raises(ValueError, match="unimodular"):
            kernel_boundary_condition(power_map(2), 0.5, paths)
        with pytest.raises(ValueError, match="vertex"):
            kernel_boundary_condition(power_map(2), 1j, paths)
        with pytest.raises(ValueError, match="path"):
            kernel_boundary_condition(power_map(2), 1.0, [])
