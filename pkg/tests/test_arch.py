"""Archimedean estimators: box integrals, truncated eta-integrals, sausage
densities, and real positivity witnesses.

Closed forms for linear polynomials and scipy quadrature serve as the
independent oracles.
"""
import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from circlekit.arch import (I_eta, J_of_L, QuadratureSpec,
                            mu_infinity, real_nonsingular_witness,
                            sigma_measure, sigma_scaled)
from circlekit.poly import parse_polynomial

SPEC = QuadratureSpec(box_points=1 << 18, seed=7)


def I_linear_exact(eta):
    """Closed form of the box integral of e(eta x) on [0,1]."""
    if eta == 0:
        return 1.0 + 0j
    return (cmath.exp(2j * cmath.pi * eta) - 1) / (2j * cmath.pi * eta)


class TestBoxIntegral:
    @pytest.mark.parametrize("eta", [0.0, 0.3, 1.0, -2.5, 7.25])
    def test_linear_closed_form(self, eta):
        f = parse_polynomial("n=1\n1 1\n")
        val, se = I_eta(f, eta, SPEC)
        assert abs(val - I_linear_exact(eta)) < max(5 * se, 1e-7)

    def test_product_form_against_quadrature(self):
        # I(eta) for x1 x2 on the unit square, real part vs scipy
        f = parse_polynomial("n=2\n1 1 1\n")
        val, se = I_eta(f, 1.0, SPEC)
        re_exact, _ = quad(
            lambda x: math.sin(2 * math.pi * x) / (2 * math.pi * x)
            if x else 1.0, 0, 1)
        assert abs(val.real - re_exact) < max(5 * se, 1e-5)

    def test_rejects_inhomogeneous(self):
        with pytest.raises(ValueError):
            I_eta(parse_polynomial("n=1\n1 1\n1 0\n"), 1.0, SPEC)

    def test_reproducible(self):
        f = parse_polynomial("n=2\n1 2 0\n1 0 2\n")
        assert I_eta(f, 1.5, SPEC) == I_eta(f, 1.5, SPEC)


class TestTruncatedIntegral:
    def test_linear_matches_eta_quadrature(self):
        f = parse_polynomial("n=1\n1 1\n")
        L = 4.0
        got = J_of_L(f, L, SPEC)
        exact, _ = quad(lambda e: I_linear_exact(e).real, -L, L, limit=200)
        assert got == pytest.approx(exact, abs=1e-6)

    def test_increasing_toward_half_for_linear(self):
        # boundary zero of x1: the limit density is 1/2
        f = parse_polynomial("n=1\n1 1\n")
        j8, j32 = J_of_L(f, 8, SPEC), J_of_L(f, 32, SPEC)
        assert abs(j32 - 0.5) < abs(j8 - 0.5) + 1e-3
        assert j32 == pytest.approx(0.5, abs=0.02)

    def test_rejects_bad_L(self):
        with pytest.raises(ValueError):
            J_of_L(parse_polynomial("n=1\n1 1\n"), 0.0, SPEC)


class TestSausage:
    def test_strip_density_is_one(self):
        f = parse_polynomial("n=2\n1 1 0\n-1 0 1\n")     # x1 - x2
        est = sigma_measure(f, SPEC)
        assert est.value == pytest.approx(1.0, abs=0.03)
        assert not est.flags

    def test_quarter_circle_density(self):
        # x1^2 + x2^2 on the unit square: constant density pi/8
        f = parse_polynomial("n=2\n1 2 0\n1 0 2\n")
        est = sigma_measure(f, SPEC)
        assert est.value == pytest.approx(math.pi / 8, abs=0.02)
        assert not est.diverged

    def test_no_zero_set(self):
        f = parse_polynomial("n=2\n1 2 0\n1 0 2\n1 0 0\n")
        est = sigma_measure(f, SPEC)
        assert est.value == 0.0
        assert "zero_measure" in est.flags

    def test_divergent_flag(self):
        f = parse_polynomial("n=2\n1 2 0\n-1 0 2\n")
        assert sigma_measure(f, SPEC).diverged


class TestSingularIntegral:
    def test_strip(self):
        f = parse_polynomial("n=2\n1 1 0\n-1 0 1\n")
        est = mu_infinity(f, SPEC)
        assert est.value == pytest.approx(1.0, abs=0.03)
        assert not est.flags

    def test_definite_form_small(self):
        f = parse_polynomial("n=2\n1 2 0\n1 0 2\n")
        est = mu_infinity(f, SPEC)
        assert est.value == pytest.approx(math.pi / 8, abs=0.03)

    def test_divergent_flag(self):
        f = parse_polynomial("n=2\n1 2 0\n-1 0 2\n")
        assert mu_infinity(f, SPEC).diverged

    def test_reproducible(self):
        f = parse_polynomial("n=2\n1 1 0\n-1 0 1\n")
        assert mu_infinity(f, SPEC).value == mu_infinity(f, SPEC).value


class TestScaledDensity:
    def test_strip_any_scale(self):
        b = parse_polynomial("n=2\n1 1 0\n-1 0 1\n")
        for N in (10, 50, 200):
            est = sigma_scaled(b, N, SPEC)
            assert est.value == pytest.approx(1.0, abs=0.02), N

    def test_lower_order_terms_matter(self):
        # x1 - N/2 has a zero sheet only when the constant is in range
        b_in = parse_polynomial("n=1\n1 1\n-25 0\n")
        b_out = parse_polynomial("n=1\n1 1\n-500 0\n")
        assert sigma_scaled(b_in, 50, SPEC).value > 0.5
        assert sigma_scaled(b_out, 50, SPEC).value == 0.0

    def test_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            sigma_scaled(parse_polynomial("n=1\n1 1\n"), 0, SPEC)


class TestRealWitness:
    def test_found_on_interior_zero(self):
        f = parse_polynomial("n=3\n1 1 1 0\n-1 0 0 2\n")
        w = real_nonsingular_witness(f)
        assert w is not None
        assert abs(w.value) < 1e-12
        assert w.gradient_norm > 1e-3
        assert all(0 < c < 1 for c in w.point)

    def test_none_for_definite(self):
        f = parse_polynomial("n=3\n1 2 0 0\n1 0 2 0\n1 0 0 2\n")
        assert real_nonsingular_witness(f) is None

    def test_found_despite_corner_singularity(self):
        f = parse_polynomial("n=2\n1 2 0\n-1 0 2\n")
        w = real_nonsingular_witness(f)
        assert w is not None and w.gradient_norm > 1e-3


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(box_points=2)
    with pytest.raises(ValueError):
        QuadratureSpec(eps=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(eta_L=-1.0)
