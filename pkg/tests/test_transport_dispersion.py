import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinavg.norms import MixedLebesgue, mixed_norm
from kinavg.spectral_core import TensorField, l2_norm, make_grid
from kinavg.symbols import ConstraintViolation
from kinavg.transport_dispersion import (
    BoxOverflowError,
    adjoint_exponents,
    build_parametrix_cutoffs,
    dispersion_decay_fit,
    dispersive_adjoint_gap,
    dispersive_lemma_ratio,
    effective_extent,
    free_stream,
    parametrix_reconstruct,
    stream_norm,
    strichartz_exponents,
    strichartz_report,
    time_average,
)

from .conftest import gaussian


@pytest.fixture(scope="module")
def stream_grid():
    return make_grid(1, 256, 128, 16.0, 6.0)


@pytest.fixture(scope="module")
def stream_gaussian(stream_grid):
    return stream_grid.sample(gaussian)


def _bump(z):
    inside = np.abs(z) < 1
    return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - z * z, 1.0)), 0.0)


class TestFreeStream:
    @given(st.floats(-1.5, 1.5))
    def test_gaussian_closed_form(self, t):
        g = make_grid(1, 256, 128, 16.0, 6.0)
        f = g.sample(gaussian)
        exact = g.sample(lambda xs, vs: np.exp(-(xs[0] - t * vs[0]) ** 2 - vs[0] ** 2))
        assert np.max(np.abs(free_stream(f, t).samples - exact.samples)) <= 1e-10

    def test_zero_time_is_identity(self, stream_gaussian):
        np.testing.assert_allclose(free_stream(stream_gaussian, 0.0).samples, stream_gaussian.samples,
                                   atol=1e-15)

    @given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
    def test_group_property(self, s, t):
        g = make_grid(1, 128, 64, 16.0, 6.0)
        f = g.sample(gaussian)
        once = free_stream(f, s + t)
        twice = free_stream(free_stream(f, s), t)
        assert np.max(np.abs(once.samples - twice.samples)) <= 1e-12

    @given(st.sampled_from([1.0, 2.0, 3.0, math.inf]), st.floats(0.0, 1.5))
    def test_joint_norms_are_conserved(self, p, t):
        g = make_grid(1, 256, 128, 16.0, 6.0)
        f = g.sample(gaussian)
        spec = MixedLebesgue(p, p)
        tol = 2e-2 if p == math.inf else 1e-8
        assert stream_norm(f, t, spec) == pytest.approx(mixed_norm(f, spec), rel=tol)

    def test_box_overflow_reports_safe_width(self, stream_gaussian):
        with pytest.raises(BoxOverflowError) as info:
            free_stream(stream_gaussian, 10.0)
        assert info.value.minimal_half_width > stream_gaussian.grid.half_width_x

    def test_x_independent_field_is_exempt(self):
        g = make_grid(1, 32, 64, 2.0, 6.0)
        f = g.sample(lambda xs, vs: np.exp(-vs[0] ** 2) + 0 * xs[0])
        assert effective_extent(f)[0] == 0.0
        np.testing.assert_allclose(free_stream(f, 50.0).samples, f.samples, atol=1e-14)

    def test_tensor_factorization(self):
        g = make_grid(1, 64, 32, 12.0, 5.0)
        a = g.sample(gaussian)
        b = g.sample(lambda xs, vs: np.exp(-2 * xs[0] ** 2 - vs[0] ** 2))
        tensor = TensorField((a, b))
        spec = MixedLebesgue(4.0, 4 / 3)
        assert stream_norm(tensor, 1.0, spec) == pytest.approx(
            mixed_norm(free_stream(tensor.dense(), 1.0), spec), rel=1e-12)


class TestParametrix:
    def test_cutoff_has_unit_mass(self):
        cut = build_parametrix_cutoffs((1.0, 2.0))
        assert np.sum(cut.weights0) == pytest.approx(1.0, abs=1e-10)

    def test_second_cutoff_profile(self):
        cut = build_parametrix_cutoffs((1.0, 2.0))
        np.testing.assert_allclose(cut.chi1([-1.0, 0.5, 2.5]), [0.0, 1.0, 0.0], atol=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError, match="t_lo < t_hi"):
            build_parametrix_cutoffs((2.0, 1.0))
        with pytest.raises(ValueError, match="origin"):
            build_parametrix_cutoffs((-1.0, 1.0), away_from_zero=True)
        assert build_parametrix_cutoffs((-1.0, 1.0)).contains_origin

    @pytest.mark.parametrize("support", [(1.0, 2.0), (-1.0, 1.0), (-2.0, -0.5)])
    def test_reconstructs_bump(self, support):
        g = make_grid(1, 128, 128, 8.0, 8.0)
        f = g.sample(lambda xs, vs: _bump(xs[0] / 2) * _bump(vs[0] / 2))
        cut = build_parametrix_cutoffs(support, quadrature_points=64)
        err = l2_norm(parametrix_reconstruct(f, cut) - f) / l2_norm(f)
        assert err <= 1e-6

    def test_error_decreases_with_nodes(self):
        g = make_grid(1, 128, 128, 8.0, 8.0)
        f = g.sample(lambda xs, vs: _bump(xs[0] / 2) * _bump(vs[0] / 2))
        errs = [l2_norm(parametrix_reconstruct(f, build_parametrix_cutoffs((1.0, 2.0), quadrature_points=k)) - f)
                for k in (16, 32, 64)]
        assert errs[0] > errs[1] > errs[2]

    def test_adjoint_identity(self):
        g = make_grid(1, 256, 64, 16.0, 5.0)
        f = g.sample(gaussian)
        h = g.sample(lambda xs, vs: np.exp(-(xs[0] - 1) ** 2 - 2 * vs[0] ** 2) * (1 + vs[0]))
        assert dispersive_adjoint_gap(f, h, build_parametrix_cutoffs((1.0, 2.0))) <= 1e-12

    def test_time_average_of_x_constant_is_identity(self):
        g = make_grid(1, 32, 64, 2.0, 6.0)
        f = g.sample(lambda xs, vs: np.exp(-vs[0] ** 2) + 0 * xs[0])
        out = time_average(f, build_parametrix_cutoffs((1.0, 2.0)))
        np.testing.assert_allclose(out.samples, f.samples, atol=1e-12)

    def test_lemma_ratio_rejects_bad_window(self, stream_gaussian):
        cut = build_parametrix_cutoffs((1.0, 2.0))
        with pytest.raises(ConstraintViolation):
            dispersive_lemma_ratio(stream_gaussian, 2.0, 2.0, 4.0, 1.5, cut)

    def test_lemma_ratio_is_finite(self, stream_gaussian):
        cut = build_parametrix_cutoffs((1.0, 2.0))
        ratio = dispersive_lemma_ratio(stream_gaussian, 4.0, 4 / 3, 4.0, 4 / 3, cut)
        assert 0 < ratio < math.inf

    def test_adjoint_exponents(self):
        assert adjoint_exponents(4.0, 2.0, math.inf, 1.0) == (math.inf, 1, 2.0, 4 / 3)


class TestDispersion:
    def test_validation(self, stream_gaussian):
        with pytest.raises(ValueError, match="r <= p"):
            dispersion_decay_fit(stream_gaussian, 1.0, 2.0, [1, 2, 3, 4, 5])
        with pytest.raises(ValueError, match="5 sample"):
            dispersion_decay_fit(stream_gaussian, 2.0, 1.0, [1, 2, 3])
        with pytest.raises(ValueError, match="positive"):
            dispersion_decay_fit(stream_gaussian, 2.0, 1.0, [0, 1, 2, 3, 4])

    def test_equal_exponents_do_not_decay(self):
        g = make_grid(1, 512, 128, 80.0, 5.0)
        f = g.sample(gaussian)
        fit = dispersion_decay_fit(f, 2.0, 2.0, np.geomspace(2, 12, 6))
        assert fit.theoretical == 0.0
        assert abs(fit.exponent) <= 1e-8

    def test_sup_decay_rate(self):
        g = make_grid(1, 1024, 512, 160.0, 5.0)
        f = g.sample(gaussian)
        fit = dispersion_decay_fit(f, math.inf, 1.0, np.geomspace(4, 32, 8))
        assert fit.theoretical == -1.0
        assert fit.relative_error <= 0.02


class TestStrichartz:
    def test_exponent_completion(self):
        ex = strichartz_exponents(1, 4.0, 4 / 3)
        assert ex["q"] == pytest.approx(4.0)
        assert ex["a"] == pytest.approx(2.0)

    def test_endpoint_rejected(self):
        with pytest.raises(ConstraintViolation):
            strichartz_exponents(1, math.inf, 1.0)

    def test_report_rejects_inadmissible_tuple(self, stream_gaussian):
        with pytest.raises(ConstraintViolation):
            strichartz_report(stream_gaussian, 3.0, 4.0, 4 / 3, 2.0)

    def test_report_fields(self):
        g = make_grid(1, 512, 128, 80.0, 5.0)
        res = strichartz_report(g.sample(gaussian), 4.0, 4.0, 4 / 3, 2.0, window=4.0)
        assert res.ratio == pytest.approx(res.time_norm / res.data_norm)
        assert res.tail_estimate > 0
