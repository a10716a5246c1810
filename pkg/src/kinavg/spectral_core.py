"""Phase-space grids, Fourier transforms, multipliers and the transport operator.

Transforms use the asymmetric convention

    f_hat(xi, eta) = integral of f(x, v) exp(-i(xi.x + eta.v)) dx dv,

with inverse weight (2 pi)^(-2n).  Discretely this is a DFT scaled by the
cell volume and corrected by the phase of the first cell center.

Axis layout of every sample array is ``(x_1, ..., x_n, v_1, ..., v_n)``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

__all__ = [
    "AxisLattice",
    "PhaseGrid",
    "Field",
    "SpectralField",
    "TensorField",
    "BoundaryMassError",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "transform_x",
    "inverse_transform_x",
    "symbol_on_lattice",
    "apply_multiplier",
    "multiply",
    "apply_transport",
    "spatial_derivative",
    "velocity_average",
    "average_spectrum_trace",
    "inner",
    "l2_norm",
    "boundary_mass_fraction",
    "pad_velocity",
    "crop_velocity",
    "line_hilbert",
    "field_to_bytes",
    "field_from_bytes",
    "save_field",
    "load_field",
]

BOUNDARY_MASS_TOL = 1e-8
_MAGIC = b"KAVGFLD1"
_HEADER = struct.Struct("<8sIIIIdd")


class BoundaryMassError(ValueError):
    """Field carries too much mass near the velocity boundary of the box."""


def _is_power_of_two(k: int) -> bool:
    return k > 0 and (k & (k - 1)) == 0


@dataclass(frozen=True)
class AxisLattice:
    """One group of ``n`` identical axes: points, half-width and derived lattices."""

    n: int
    points: int
    half_width: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.n

    @property
    def mode_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """Cell centers ``-L + h (k + 1/2)``."""
        return -self.half_width + self.spacing * (np.arange(self.points) + 0.5)

    @cached_property
    def modes(self) -> np.ndarray:
        """Angular frequencies in FFT order; the unpaired Nyquist mode is negative."""
        return self.mode_spacing * np.fft.fftfreq(self.points, d=1.0 / self.points)

    @cached_property
    def extended_modes(self) -> np.ndarray:
        """Ascending modes ``-N/2 .. N/2`` (both Nyquist copies)."""
        half = self.points // 2
        return self.mode_spacing * np.arange(-half, half + 1)

    def open_nodes(self) -> list[np.ndarray]:
        return _open_mesh(self.nodes, self.n)

    def open_modes(self) -> list[np.ndarray]:
        return _open_mesh(self.modes, self.n)

    @cached_property
    def phase(self) -> np.ndarray:
        """Center-phase factor ``exp(-i xi x_0)`` per axis, FFT order."""
        return np.exp(-1j * self.modes * self.nodes[0])

    def scaled(self, factor: int) -> "AxisLattice":
        return AxisLattice(self.n, self.points * factor, self.half_width * factor)


def _open_mesh(axis_values: np.ndarray, n: int, offset: int = 0, ndim: int | None = None):
    ndim = n if ndim is None else ndim
    out = []
    for j in range(n):
        shape = [1] * ndim
        shape[offset + j] = axis_values.size
        out.append(axis_values.reshape(shape))
    return out


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform cell-centered grid on ``[-L_x, L_x]^n x [-L_v, L_v]^n``.

    Parameters
    ----------
    n : int
        Spatial dimension.
    points_x, points_v : int
        Samples per axis; even and at least 4.
    half_width_x, half_width_v : float
        Box half-widths.
    strict : bool
        Require power-of-two point counts.
    """

    n: int
    points_x: int
    points_v: int
    half_width_x: float
    half_width_v: float
    strict: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        for name in ("points_x", "points_v"):
            k = getattr(self, name)
            if int(k) != k or k < 4 or k % 2:
                raise ValueError(f"{name} must be an even integer >= 4, got {k}")
            if self.strict and not _is_power_of_two(int(k)):
                raise ValueError(f"{name}={k} is not a power of two (strict mode)")
        for name in ("half_width_x", "half_width_v"):
            w = getattr(self, name)
            if not np.isfinite(w) or w <= 0:
                raise ValueError(f"{name} must be positive, got {w}")

    @cached_property
    def x(self) -> AxisLattice:
        return AxisLattice(self.n, int(self.points_x), float(self.half_width_x))

    @cached_property
    def v(self) -> AxisLattice:
        return AxisLattice(self.n, int(self.points_v), float(self.half_width_v))

    @property
    def dx(self) -> float:
        return self.x.cell_volume

    @property
    def dv(self) -> float:
        return self.v.cell_volume

    @property
    def shape(self) -> tuple[int, ...]:
        return self.x.shape + self.v.shape

    @property
    def ndim(self) -> int:
        return 2 * self.n

    @property
    def x_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def v_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n, 2 * self.n))

    def coordinates(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Broadcastable open meshes ``(x_1..x_n), (v_1..v_n)``."""
        xs = _open_mesh(self.x.nodes, self.n, 0, self.ndim)
        vs = _open_mesh(self.v.nodes, self.n, self.n, self.ndim)
        return xs, vs

    def frequencies(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Broadcastable open meshes of ``xi`` and ``eta`` in FFT order."""
        xi = _open_mesh(self.x.modes, self.n, 0, self.ndim)
        eta = _open_mesh(self.v.modes, self.n, self.n, self.ndim)
        return xi, eta

    def sample(self, fn: Callable) -> "Field":
        """Evaluate ``fn(xs, vs)`` on the grid (``xs``, ``vs`` are coordinate lists)."""
        xs, vs = self.coordinates()
        values = np.broadcast_to(np.asarray(fn(xs, vs), dtype=complex), self.shape)
        return Field(self, values)

    def with_velocity_padding(self, factor: int) -> "PhaseGrid":
        return PhaseGrid(self.n, self.points_x, self.points_v * factor,
                         self.half_width_x, self.half_width_v * factor, self.strict)

    def refined(self, factor: int = 2) -> "PhaseGrid":
        """Same box, ``factor`` times more points per axis."""
        return PhaseGrid(self.n, self.points_x * factor, self.points_v * factor,
                         self.half_width_x, self.half_width_v, self.strict)


def make_grid(n: int, points_x: int, points_v: int, half_width_x: float,
              half_width_v: float, strict: bool = True) -> PhaseGrid:
    """Build a :class:`PhaseGrid`, validating sizes and widths."""
    return PhaseGrid(int(n), points_x, points_v, float(half_width_x), float(half_width_v), strict)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Field:
    """Samples of ``f(x, v)`` at cell centers."""

    grid: PhaseGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.samples)
        if a.shape != self.grid.shape:
            raise ValueError(f"samples shape {a.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(a))

    def with_samples(self, samples: np.ndarray) -> "Field":
        return Field(self.grid, samples)

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.samples - other.samples)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.samples))

    @property
    def real(self) -> np.ndarray:
        return self.samples.real


@dataclass(frozen=True)
class TensorField:
    """Separable field ``f(x, v) = prod_j g_j(x_j, v_j)`` stored as one-dimensional factors.

    Free streaming and mixed norms factor over coordinates, which lets
    ``n >= 2`` decay studies run at one-dimensional cost.
    """

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors or any(f.grid.n != 1 for f in factors):
            raise ValueError("tensor factors must be non-empty one-dimensional fields")
        object.__setattr__(self, "factors", factors)

    @property
    def n(self) -> int:
        return len(self.factors)

    def dense(self) -> Field:
        """Assemble the full ``2n``-dimensional field (factors must share one grid)."""
        g0 = self.factors[0].grid
        if any(f.grid != g0 for f in self.factors):
            raise ValueError("dense assembly needs identical factor grids")
        grid = PhaseGrid(self.n, g0.points_x, g0.points_v, g0.half_width_x, g0.half_width_v, g0.strict)
        letters = "abcdefghijklmnopqrstuvwxyz"
        xs = letters[:self.n]
        vs = letters[self.n:2 * self.n]
        spec = ",".join(x + v for x, v in zip(xs, vs)) + "->" + xs + vs
        return Field(grid, np.einsum(spec, *[f.samples for f in self.factors]))


@dataclass(frozen=True)
class SpectralField:
    """Continuum-normalized transform coefficients in FFT order."""

    grid: PhaseGrid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.coefficients)
        if a.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {a.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coefficients", _frozen(a))


def _phase_array(lattice: AxisLattice, offset: int, ndim: int) -> np.ndarray:
    out = np.ones((1,) * ndim, dtype=complex)
    for p in _open_mesh(lattice.phase, lattice.n, offset, ndim):
        out = out * p
    return out


def _transform_axes(samples: np.ndarray, lattices: Sequence[tuple[AxisLattice, int]],
                    ndim: int, inverse: bool) -> np.ndarray:
    axes = [off + j for lat, off in lattices for j in range(lat.n)]
    out = samples
    if not inverse:
        out = sfft.fftn(out, axes=axes)
        for lat, off in lattices:
            out = out * (_phase_array(lat, off, ndim) * lat.cell_volume)
    else:
        for lat, off in lattices:
            out = out * (np.conj(_phase_array(lat, off, ndim)) / lat.cell_volume)
        out = sfft.ifftn(out, axes=axes)
    return out


def forward_transform(f: Field) -> SpectralField:
    """Continuum-normalized transform in all variables."""
    g = f.grid
    coeffs = _transform_axes(f.samples, [(g.x, 0), (g.v, g.n)], g.ndim, inverse=False)
    return SpectralField(g, coeffs)


def inverse_transform(spec: SpectralField) -> Field:
    """Inverse of :func:`forward_transform` (carries the ``(2 pi)^(-2n)`` weight)."""
    g = spec.grid
    samples = _transform_axes(spec.coefficients, [(g.x, 0), (g.v, g.n)], g.ndim, inverse=True)
    return Field(g, samples)


def transform_x(samples: np.ndarray, lattice: AxisLattice) -> np.ndarray:
    """Transform a function of ``x`` alone (array of shape ``lattice.shape``)."""
    return _transform_axes(np.asarray(samples, dtype=complex), [(lattice, 0)], lattice.n, False)


def inverse_transform_x(coeffs: np.ndarray, lattice: AxisLattice) -> np.ndarray:
    return _transform_axes(np.asarray(coeffs, dtype=complex), [(lattice, 0)], lattice.n, True)


def _fold_nyquist(values: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Average the two Nyquist copies on each axis, then reorder into FFT order."""
    for ax in axes:
        first = np.take(values, [0], axis=ax)
        last = np.take(values, [values.shape[ax] - 1], axis=ax)
        interior = np.take(values, np.arange(1, values.shape[ax] - 1), axis=ax)
        values = np.concatenate([0.5 * (first + last), interior], axis=ax)
        values = np.fft.ifftshift(values, axes=ax)
    return values


def symbol_on_lattice(grid: PhaseGrid, symbol: Callable) -> np.ndarray:
    """Evaluate ``symbol(xi, eta)`` on the frequency lattice in FFT order.

    The unpaired Nyquist mode receives the mean of the symbol at ``+/-`` the
    Nyquist frequency, so odd symbols vanish there and even real symbols keep
    real fields real.
    """
    n, ndim = grid.n, grid.ndim
    xi = _open_mesh(grid.x.extended_modes, n, 0, ndim)
    eta = _open_mesh(grid.v.extended_modes, n, n, ndim)
    ext_shape = tuple(m.size for m in (grid.x.extended_modes,) * n + (grid.v.extended_modes,) * n)
    values = np.broadcast_to(np.asarray(symbol(xi, eta)), ext_shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("symbol is not finite at every lattice point")
    return _fold_nyquist(np.array(values), range(ndim))


def apply_multiplier(spec: SpectralField, symbol: Callable) -> SpectralField:
    """Multiply coefficients by ``m(xi, eta)``."""
    m = symbol_on_lattice(spec.grid, symbol)
    return SpectralField(spec.grid, spec.coefficients * m)


def multiply(f: Field, symbol: Callable) -> Field:
    """Apply the multiplier ``m(D_x, D_v)`` to a field."""
    return inverse_transform(apply_multiplier(forward_transform(f), symbol))


def _boundary_shell(size: int) -> int:
    return max(2, size // 16)


def boundary_mass_fraction(f: Field, variables: str = "v") -> float:
    """Fraction of ``sum |f|^2`` lying in the outer shell of the chosen axes."""
    a = np.abs(f.samples) ** 2
    total = a.sum()
    if total == 0:
        return 0.0
    axes = {"v": f.grid.v_axes, "x": f.grid.x_axes, "xv": tuple(range(f.grid.ndim))}[variables]
    mask = np.zeros(f.grid.shape, dtype=bool)
    for ax in axes:
        size = f.grid.shape[ax]
        w = _boundary_shell(size)
        idx = np.r_[0:w, size - w:size]
        sl = [slice(None)] * f.grid.ndim
        sl[ax] = idx
        mask[tuple(sl)] = True
    return float(a[mask].sum() / total)


def _check_velocity_boundary(f: Field, tol: float):
    frac = boundary_mass_fraction(f, "v")
    if frac >= tol:
        raise BoundaryMassError(
            f"velocity boundary-shell mass fraction {frac:.3e} >= {tol:.1e}; "
            f"enlarge half_width_v (currently {f.grid.half_width_v})")


def spatial_derivative(f: Field, axis: int) -> Field:
    """Spectral ``d/dx_axis`` (Nyquist mode zeroed)."""
    g = f.grid
    k = g.x.modes.copy()
    k[g.points_x // 2] = 0.0
    shape = [1] * g.ndim
    shape[axis] = k.size
    fh = sfft.fft(f.samples, axis=axis)
    return Field(g, sfft.ifft(fh * (1j * k).reshape(shape), axis=axis))


def apply_transport(f: Field, boundary_tol: float = BOUNDARY_MASS_TOL) -> Field:
    """Return ``v . grad_x f``.

    Raises
    ------
    BoundaryMassError
        If the velocity boundary shell carries a mass fraction ``>= boundary_tol``;
        multiplication by the sawtooth ``v`` would otherwise wrap.
    """
    _check_velocity_boundary(f, boundary_tol)
    _, vs = f.grid.coordinates()
    out = np.zeros(f.grid.shape, dtype=complex)
    for j in range(f.grid.n):
        out += vs[j] * spatial_derivative(f, j).samples
    return Field(f.grid, out)


def velocity_average(f: Field) -> np.ndarray:
    """``sum_v f dv``, an array over the spatial lattice."""
    return f.samples.sum(axis=f.grid.v_axes) * f.grid.dv


def average_spectrum_trace(spec: SpectralField) -> np.ndarray:
    """The ``eta = 0`` slice of the coefficients, indexed by ``xi`` in FFT order."""
    idx = (slice(None),) * spec.grid.n + (0,) * spec.grid.n
    return np.array(spec.coefficients[idx])


def inner(f: Field, g: Field) -> complex:
    """``<f, g> = integral f conj(g) dx dv``."""
    return complex(np.vdot(g.samples, f.samples) * f.grid.dx * f.grid.dv)


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.samples) ** 2) * f.grid.dx * f.grid.dv))


def pad_velocity(f: Field, factor: int) -> Field:
    """Embed ``f`` in a box ``factor`` times wider in ``v`` with the same spacing."""
    if factor == 1:
        return f
    g = f.grid.with_velocity_padding(factor)
    out = np.zeros(g.shape, dtype=complex)
    off = (g.points_v - f.grid.points_v) // 2
    sl = (slice(None),) * f.grid.n + (slice(off, off + f.grid.points_v),) * f.grid.n
    out[sl] = f.samples
    return Field(g, out)


def crop_velocity(f: Field, grid: PhaseGrid) -> Field:
    """Inverse of :func:`pad_velocity` onto ``grid``."""
    off = (f.grid.points_v - grid.points_v) // 2
    sl = (slice(None),) * grid.n + (slice(off, off + grid.points_v),) * grid.n
    return Field(grid, f.samples[sl])


def line_hilbert(samples: np.ndarray, axis: int) -> np.ndarray:
    """Discrete whole-line Hilbert transform along ``axis``.

    Convolution with the kernel ``2i / (pi m)`` for odd ``m`` (zero for even
    ``m``), whose symbol on the unit circle is ``i sign`` up to convention;
    the sign is chosen so that a slowly varying ``cos`` maps to ``i sin``.
    The data are zero-extended, so no periodization occurs.
    """
    a = np.asarray(samples, dtype=complex)
    size = a.shape[axis]
    m = np.arange(-size + 1, size)
    safe = np.where(m == 0, 1, m)
    kernel = np.where(m % 2 != 0, 2j / (np.pi * safe), 0.0)
    length = sfft.next_fast_len(2 * size)
    wrapped = np.zeros(length, dtype=complex)
    wrapped[:size] = kernel[size - 1:]
    wrapped[length - size + 1:] = kernel[:size - 1]
    shape = [1] * a.ndim
    shape[axis] = length
    conv = sfft.ifft(sfft.fft(a, n=length, axis=axis) * sfft.fft(wrapped).reshape(shape), axis=axis)
    return np.take(conv, np.arange(size), axis=axis)


def field_to_bytes(f: Field) -> bytes:
    """Header followed by row-major little-endian ``(re, im)`` float64 pairs."""
    g = f.grid
    header = _HEADER.pack(_MAGIC, 1, g.n, g.points_x, g.points_v, g.half_width_x, g.half_width_v)
    body = np.ascontiguousarray(f.samples, dtype="<c16").tobytes(order="C")
    return header + body


def field_from_bytes(data: bytes) -> Field:
    magic, version, n, nx, nv, lx, lv = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC or version != 1:
        raise ValueError("not a field record")
    grid = PhaseGrid(n, nx, nv, lx, lv, strict=False)
    body = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if body.size != int(np.prod(grid.shape)):
        raise ValueError("field record truncated")
    return Field(grid, body.reshape(grid.shape))


def save_field(path, f: Field) -> None:
    with open(path, "wb") as fh:
        fh.write(field_to_bytes(f))


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        return field_from_bytes(fh.read())
