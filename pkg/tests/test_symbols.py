import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinavg.symbols import (
    ConstraintViolation,
    ScanGrid,
    bessel_weight,
    bracket,
    build_cutoff_1d,
    build_cutoff_nd,
    check_constraints,
    conjugate_exponent,
    gaussian_symbol,
    hilbert_norm_constant,
    hilbert_pair_symbol,
    hormander_bound,
    hypoelliptic_symbol,
    marcinkiewicz_bound,
    regularity_index,
    riesz_weight,
    scaling_exponent,
    sign_tensor_symbol,
    truncation_symbol,
)

fractions = st.fractions(min_value=-3, max_value=3, max_denominator=50)
nonnegative = st.fractions(min_value=0, max_value=3, max_denominator=50)
positive = st.fractions(min_value=Fraction(1, 50), max_value=3, max_denominator=50)
exponents = st.floats(1.01, 50.0)


class TestRegularityIndex:
    def test_zero_parameters_give_one_half(self):
        assert regularity_index(0, 0, 0, 0, 0, 0) == Fraction(1, 2)

    @given(st.fractions(min_value=-3, max_value=Fraction(1, 2), max_denominator=100),
           st.fractions(min_value=Fraction(-49, 100), max_value=3, max_denominator=100))
    def test_duality_specialization_is_exactly_one_half(self, a, alpha):
        sigma = regularity_index(a, -a, a, alpha, -alpha, alpha)
        assert isinstance(sigma, Fraction)
        assert sigma == Fraction(1, 2)

    @given(fractions, fractions, fractions, nonnegative, nonnegative, positive)
    def test_inverse_relation(self, a, b, alpha, slack_c, slack_beta, gamma_shift):
        # constraints hold by construction, so no draws are filtered
        c = (1 + a + b) / 2 - slack_c
        beta = -alpha - slack_beta
        gamma = Fraction(-1, 2) + gamma_shift
        s = scaling_exponent(a, b, c, alpha, beta, gamma)
        sigma = regularity_index(a, b, c, alpha, beta, gamma)
        assert 2 * (sigma - c) / (1 + 2 * gamma) == s

    def test_float_inputs_stay_float(self):
        assert isinstance(regularity_index(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), float)

    @pytest.mark.parametrize("args, fragment", [
        ((0, 0, 1, 0, 0, 0), "1 + a + b - 2c"),
        ((0, 0, 0, 1, 0, 0), "alpha + beta"),
        ((0, 0, 0, 0, 0, Fraction(-1, 2)), "gamma > -1/2"),
    ])
    def test_violations_name_the_inequality(self, args, fragment):
        with pytest.raises(ConstraintViolation, match=fragment.replace("+", r"\+")):
            regularity_index(*args)


class TestExponents:
    @given(exponents)
    def test_conjugate_is_involution(self, p):
        assert conjugate_exponent(conjugate_exponent(p)) == pytest.approx(p)
        assert 1 / p + 1 / conjugate_exponent(p) == pytest.approx(1.0)

    def test_endpoints(self):
        assert conjugate_exponent(1) == math.inf
        assert conjugate_exponent(math.inf) == 1
        assert conjugate_exponent(Fraction(4, 3)) == 4

    @given(exponents)
    def test_hilbert_constant_is_self_dual(self, p):
        assert hilbert_norm_constant(p) == pytest.approx(hilbert_norm_constant(conjugate_exponent(p)))

    def test_hilbert_constant_at_two(self):
        assert hilbert_norm_constant(2.0) == pytest.approx(1.0)

    def test_hilbert_constant_rejects_endpoints(self):
        with pytest.raises(ValueError):
            hilbert_norm_constant(1.0)


class TestConstraints:
    def test_renormalization_window(self):
        ok = check_constraints("renormalization", {"p0": 4, "q0": 4, "p1": 2, "q1": 2, "n": 1})
        assert ok.ok
        bad = check_constraints("renormalization", {"p0": 2, "q0": 1.5, "p1": 1.5, "q1": 4, "n": 4})
        assert not bad.ok and "q1/p1" in bad.diagnostic

    def test_harmonic_mean(self):
        assert check_constraints("harmonic_mean", {"r0": 2, "p0": 2, "r1": 2, "p1": 2}).ok
        assert not check_constraints("harmonic_mean", {"r0": 2, "p0": 4, "r1": 2, "p1": 2}).ok

    def test_strichartz_rejects_endpoint(self):
        assert check_constraints("strichartz", {"n": 1, "q": 4, "p": 4, "r": 4 / 3, "a": 2}).ok
        endpoint = check_constraints("strichartz", {"n": 1, "q": 2, "p": math.inf, "r": 1, "a": 2})
        assert not endpoint.ok

    def test_mixed_needs_open_interval(self):
        assert not check_constraints("mixed", {"p": 1.0, "q": 2.0}).ok
        assert check_constraints("mixed", {"p": 1.5, "q": 3.0}).ok

    def test_unknown_id(self):
        with pytest.raises(ValueError, match="unknown"):
            check_constraints("nope", {})


class TestSymbols:
    def test_gaussian_commutator_symbol(self):
        sym = gaussian_symbol(1, 0.7)
        xi, eta = np.array([0.3, -1.2]), np.array([2.0, 0.5])
        mu = sym.commutator_symbol()([xi], [eta])
        expected = xi * (-2 * 0.7 * eta) * np.exp(-0.7 * (xi**2 + eta**2))
        np.testing.assert_allclose(mu, expected, rtol=1e-14)

    def test_bessel_weight_gradient_matches_difference(self):
        sym = bessel_weight(0.5, -0.75)
        xi, eta, h = np.array([1.3]), np.array([0.8]), 1e-6
        numeric = (sym([xi], [eta + h]) - sym([xi], [eta - h])) / (2 * h)
        np.testing.assert_allclose(sym.eta_gradient([xi], [eta])[0], numeric, rtol=1e-8)

    def test_sign_symbols_have_no_gradient(self):
        with pytest.raises(ValueError, match="eta-derivative"):
            hilbert_pair_symbol(1, 0).commutator_symbol()

    def test_sign_tensor_sums_pairs(self):
        sym = sign_tensor_symbol(2)
        val = sym([np.array(1.0), np.array(-2.0)], [np.array(3.0), np.array(4.0)])
        assert val == 0.0

    def test_riesz_zero_mode(self):
        sym = riesz_weight(-0.5, zero_mode=7.0)
        assert sym([np.array([0.0])], [np.array([1.0])])[0] == 7.0

    def test_bracket(self):
        assert bracket([np.array(3.0)]) == pytest.approx(math.sqrt(10.0))

    def test_hypoelliptic_vanishes_far_from_the_cone(self):
        sym = hypoelliptic_symbol("1d", 0.5, 1.0)
        assert sym([np.array([1.0])], [np.array([100.0])])[0] == 0.0
        assert abs(sym([np.array([1.0])], [np.array([0.1])])[0]) == pytest.approx(1.0)

    def test_truncation_rejects_positive_exponent(self):
        with pytest.raises(ValueError):
            truncation_symbol(0.5, 1.0)


class TestCutoffs:
    @given(st.floats(-0.5, 0.5))
    def test_plateau_is_one_inside(self, r):
        assert build_cutoff_1d()(r) == 1.0

    @given(st.floats(1.0, 100.0))
    def test_plateau_is_zero_outside(self, r):
        assert build_cutoff_1d()(r) == 0.0
        assert build_cutoff_1d()(-r) == 0.0

    def test_plateau_derivative_matches_difference(self):
        cut = build_cutoff_1d()
        r, h = 0.7, 1e-6
        numeric = (cut(r + h) - cut(r - h)) / (2 * h)
        assert cut.derivative(r) == pytest.approx(numeric, rel=1e-6)

    def test_schwartz_cutoff_is_flat_at_origin(self):
        cut = build_cutoff_nd(0.5, 2, 1)
        assert cut(np.array(0.0)) == pytest.approx(1.0, abs=1e-12)
        h = 1e-2
        second = (cut(np.array(h)) - 2 * cut(np.array(0.0)) + cut(np.array(-h))) / h**2
        assert abs(second) <= 1e-3

    def test_schwartz_cutoff_order_requirement(self):
        with pytest.raises(ValueError, match="too small"):
            build_cutoff_nd(1.0, 1, 1)

    def test_schwartz_cutoff_gradient(self):
        cut = build_cutoff_nd(0.0, 2, 2)
        r, s, h = np.array(0.9), np.array(-0.4), 1e-6
        numeric = (cut(r + h, s) - cut(r - h, s)) / (2 * h)
        assert cut.gradient(r, s)[0] == pytest.approx(numeric, rel=1e-5, abs=1e-9)


class TestCriteria:
    def test_scan_grid_avoids_axes(self):
        vals = ScanGrid(2, radius=4.0).axis_values()
        assert np.all(vals != 0)
        assert vals.max() == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="2n"):
            marcinkiewicz_bound(gaussian_symbol(1), ScanGrid(1))

    def test_gaussian_satisfies_both_criteria_stably(self):
        sym = gaussian_symbol(1)
        small, large = ScanGrid(2, radius=8.0), ScanGrid(2, radius=16.0)
        assert marcinkiewicz_bound(sym, large) == pytest.approx(marcinkiewicz_bound(sym, small), rel=1e-3)
        assert hormander_bound(sym, large) == pytest.approx(hormander_bound(sym, small), rel=1e-3)

    def test_truncation_symbol_separates_the_criteria(self):
        sym = truncation_symbol(-0.5, 1.0)
        grid = ScanGrid(2, radius=32.0)
        m1, h1 = marcinkiewicz_bound(sym, grid), hormander_bound(sym, grid)
        m2, h2 = marcinkiewicz_bound(sym, grid.doubled()), hormander_bound(sym, grid.doubled())
        assert abs(m2 / m1 - 1) <= 0.1
        assert h2 / h1 >= 1.5
