import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinavg.spectral_core import (
    BoundaryMassError,
    Field,
    PhaseGrid,
    TensorField,
    apply_transport,
    boundary_mass_fraction,
    crop_velocity,
    field_from_bytes,
    field_to_bytes,
    forward_transform,
    inner,
    inverse_transform,
    l2_norm,
    line_hilbert,
    load_field,
    make_grid,
    multiply,
    pad_velocity,
    save_field,
    spatial_derivative,
    velocity_average,
)
from kinavg.symbols import gaussian_symbol, hilbert_symbol

from .conftest import gaussian


class TestPhaseGrid:
    def test_rejects_odd_point_count(self):
        with pytest.raises(ValueError, match="even"):
            make_grid(1, 63, 64, 1.0, 1.0)

    def test_rejects_non_power_of_two_in_strict_mode(self):
        with pytest.raises(ValueError, match="power of two"):
            make_grid(1, 48, 64, 1.0, 1.0)
        assert make_grid(1, 48, 64, 1.0, 1.0, strict=False).points_x == 48

    @pytest.mark.parametrize("width", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_width(self, width):
        with pytest.raises(ValueError):
            make_grid(1, 64, 64, width, 1.0)

    def test_rejects_zero_dimension(self):
        with pytest.raises(ValueError):
            make_grid(0, 64, 64, 1.0, 1.0)

    def test_cell_centered_nodes_are_symmetric(self):
        g = make_grid(1, 8, 8, 2.0, 2.0)
        nodes = g.x.nodes
        np.testing.assert_allclose(nodes, -nodes[::-1])
        assert nodes[0] == pytest.approx(-2.0 + g.dx / 2)

    def test_shape_and_axes(self):
        g = make_grid(2, 8, 16, 1.0, 1.0)
        assert g.shape == (8, 8, 16, 16)
        assert g.x_axes == (0, 1)
        assert g.v_axes == (2, 3)

    def test_refined_keeps_box(self):
        g = make_grid(1, 32, 32, 3.0, 4.0).refined()
        assert (g.points_x, g.half_width_x, g.half_width_v) == (64, 3.0, 4.0)


class TestField:
    def test_samples_are_read_only(self, gaussian_small):
        with pytest.raises(ValueError):
            gaussian_small.samples[0, 0] = 1.0

    def test_rejects_non_finite(self, grid_small):
        data = np.zeros(grid_small.shape)
        data[3, 3] = np.nan
        with pytest.raises(ValueError, match="finite"):
            Field(grid_small, data)

    def test_rejects_shape_mismatch(self, grid_small):
        with pytest.raises(ValueError, match="shape"):
            Field(grid_small, np.zeros((4, 4)))

    def test_arithmetic(self, gaussian_small):
        doubled = gaussian_small + gaussian_small
        np.testing.assert_allclose(doubled.samples, (gaussian_small * 2).samples)
        assert l2_norm(doubled - gaussian_small * 2) == 0.0


class TestTransform:
    def test_gaussian_closed_form(self, gaussian_medium):
        g = gaussian_medium.grid
        coeffs = forward_transform(gaussian_medium).coefficients
        xi, eta = g.frequencies()
        exact = np.pi * np.exp(-(xi[0] ** 2 + eta[0] ** 2) / 4.0)
        assert np.max(np.abs(coeffs - exact)) <= 1e-12

    def test_roundtrip(self, gaussian_medium):
        back = inverse_transform(forward_transform(gaussian_medium))
        assert np.max(np.abs(back.samples - gaussian_medium.samples)) <= 1e-13

    @given(st.integers(0, 2**32 - 1))
    def test_roundtrip_random_fields(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(1, 16, 16, 2.0, 3.0)
        data = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
        f = Field(g, data)
        back = inverse_transform(forward_transform(f))
        assert np.max(np.abs(back.samples - data)) <= 1e-12 * np.max(np.abs(data))

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    def test_shift_becomes_phase(self, x0, v0):
        g = make_grid(1, 128, 128, 10.0, 10.0)
        f = g.sample(lambda xs, vs: np.exp(-(xs[0] - x0) ** 2 - (vs[0] - v0) ** 2))
        xi, eta = g.frequencies()
        exact = np.pi * np.exp(-(xi[0] ** 2 + eta[0] ** 2) / 4.0 - 1j * (xi[0] * x0 + eta[0] * v0))
        assert np.max(np.abs(forward_transform(f).coefficients - exact)) <= 1e-10

    def test_parseval(self, gaussian_medium):
        g = gaussian_medium.grid
        coeffs = forward_transform(gaussian_medium).coefficients
        spectral = np.sum(np.abs(coeffs) ** 2) * g.x.mode_spacing * g.v.mode_spacing / (2 * np.pi) ** 2
        assert spectral == pytest.approx(l2_norm(gaussian_medium) ** 2, rel=1e-12)


class TestMultipliers:
    def test_hilbert_maps_cos_to_i_sin(self):
        g = make_grid(1, 128, 64, 8 * np.pi, 8.0)
        f = g.sample(lambda xs, vs: np.cos(xs[0]) * np.exp(-vs[0] ** 2))
        out = multiply(f, hilbert_symbol(1, 0, "x"))
        expected = g.sample(lambda xs, vs: 1j * np.sin(xs[0]) * np.exp(-vs[0] ** 2))
        assert np.max(np.abs(out.samples - expected.samples)) <= 1e-10

    @given(st.integers(0, 2**32 - 1))
    def test_odd_real_symbol_keeps_real_fields_imaginary(self, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(1, 16, 16, 2.0, 2.0)
        f = Field(g, rng.standard_normal(g.shape))
        out = multiply(f, hilbert_symbol(1, 0, "x"))
        assert np.max(np.abs(out.samples.real)) <= 1e-12

    def test_constant_symbol_is_identity(self, gaussian_small):
        out = multiply(gaussian_small, lambda xi, eta: np.ones_like(xi[0] * eta[0]))
        np.testing.assert_allclose(out.samples, gaussian_small.samples, atol=1e-14)

    def test_gaussian_symbol_is_self_adjoint(self, grid_small):
        rng = np.random.default_rng(4)
        f = Field(grid_small, rng.standard_normal(grid_small.shape))
        h = Field(grid_small, rng.standard_normal(grid_small.shape))
        sym = gaussian_symbol(1, 0.3)
        assert inner(multiply(f, sym), h) == pytest.approx(inner(f, multiply(h, sym)), rel=1e-12)


class TestTransport:
    def test_gaussian_closed_form(self, gaussian_medium):
        out = apply_transport(gaussian_medium)
        exact = gaussian_medium.grid.sample(lambda xs, vs: -2 * xs[0] * vs[0] * gaussian(xs, vs))
        assert np.max(np.abs(out.samples - exact.samples)) <= 1e-10

    def test_is_skew_adjoint(self, gaussian_medium):
        g = gaussian_medium.grid
        other = g.sample(lambda xs, vs: np.exp(-(xs[0] - 0.5) ** 2 - 2 * vs[0] ** 2) * (1 + xs[0]))
        left = inner(apply_transport(gaussian_medium), other)
        right = -inner(gaussian_medium, apply_transport(other))
        assert abs(left - right) <= 1e-12

    def test_boundary_mass_raises(self):
        g = make_grid(1, 64, 64, 8.0, 2.0)
        wide = g.sample(lambda xs, vs: np.exp(-xs[0] ** 2 - 0.1 * vs[0] ** 2))
        with pytest.raises(BoundaryMassError, match="half_width_v"):
            apply_transport(wide)

    def test_spatial_derivative_of_gaussian(self, gaussian_medium):
        out = spatial_derivative(gaussian_medium, 0)
        exact = gaussian_medium.grid.sample(lambda xs, vs: -2 * xs[0] * gaussian(xs, vs))
        assert np.max(np.abs(out.samples - exact.samples)) <= 1e-10

    def test_boundary_fraction_of_centered_gaussian_is_tiny(self, gaussian_medium):
        assert boundary_mass_fraction(gaussian_medium, "xv") < 1e-20


class TestVelocityTools:
    def test_velocity_average_of_gaussian(self, gaussian_medium):
        g = gaussian_medium.grid
        avg = velocity_average(gaussian_medium)
        exact = np.sqrt(np.pi) * np.exp(-g.x.nodes ** 2)
        assert np.max(np.abs(avg - exact)) <= 1e-12

    def test_pad_and_crop_roundtrip(self, gaussian_small):
        padded = pad_velocity(gaussian_small, 4)
        assert padded.grid.points_v == 4 * gaussian_small.grid.points_v
        assert padded.grid.dv == pytest.approx(gaussian_small.grid.dv)
        back = crop_velocity(padded, gaussian_small.grid)
        np.testing.assert_array_equal(back.samples, gaussian_small.samples)

    def test_line_hilbert_of_slow_cosine(self):
        t = np.linspace(-400, 400, 4096)
        window = np.exp(-((t / 200.0) ** 2))
        out = line_hilbert(np.cos(0.3 * t) * window, 0)
        mid = slice(1800, 2300)
        expected = 1j * np.sin(0.3 * t) * window
        assert np.max(np.abs(out[mid] - expected[mid])) <= 1e-3

    def test_line_hilbert_is_skew(self):
        rng = np.random.default_rng(1)
        a, b = rng.standard_normal(64), rng.standard_normal(64)
        left = np.vdot(b, line_hilbert(a, 0))
        right = np.vdot(line_hilbert(b, 0), a)
        assert abs(left - right) <= 1e-12


class TestTensorField:
    def test_dense_is_outer_product(self):
        g = make_grid(1, 8, 8, 2.0, 2.0)
        a = g.sample(gaussian)
        b = g.sample(lambda xs, vs: np.exp(-2 * xs[0] ** 2 - vs[0] ** 2))
        dense = TensorField((a, b)).dense()
        assert dense.grid.n == 2
        assert dense.samples[1, 2, 3, 4] == pytest.approx(a.samples[1, 3] * b.samples[2, 4])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            TensorField(())


class TestSerialization:
    def test_bytes_roundtrip(self, gaussian_small):
        back = field_from_bytes(field_to_bytes(gaussian_small))
        assert back.grid.shape == gaussian_small.grid.shape
        np.testing.assert_array_equal(back.samples, gaussian_small.samples)

    def test_file_roundtrip(self, tmp_path, gaussian_small):
        path = tmp_path / "g.kavg"
        save_field(path, gaussian_small)
        np.testing.assert_array_equal(load_field(path).samples, gaussian_small.samples)

    def test_rejects_foreign_bytes(self, gaussian_small):
        data = bytearray(field_to_bytes(gaussian_small))
        data[0] ^= 0xFF
        with pytest.raises(ValueError):
            field_from_bytes(bytes(data))

    def test_rejects_truncated(self, gaussian_small):
        with pytest.raises(ValueError, match="truncated"):
            field_from_bytes(field_to_bytes(gaussian_small)[:-16])

    def test_encoding_is_deterministic(self, gaussian_small):
        assert field_to_bytes(gaussian_small) == field_to_bytes(PhaseGrid(1, 64, 64, 8.0, 8.0).sample(gaussian))
