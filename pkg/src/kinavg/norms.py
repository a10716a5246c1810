"""Mixed Lebesgue, Sobolev, Lorentz norms, the velocity-average seminorm and Bessel kernels."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .spectral_core import (AxisLattice, Field, SpectralField, average_spectrum_trace,
                            forward_transform, inverse_transform, inverse_transform_x, transform_x)
from .symbols import bracket, conjugate_exponent, euclidean

__all__ = [
    "MixedLebesgue",
    "Sobolev",
    "Lorentz",
    "lebesgue_norm",
    "mixed_norm",
    "sobolev_norm",
    "average_h_half",
    "lorentz_norm",
    "bessel_kernel",
    "bessel_kernel_closed_form",
    "bessel_kernel_mass",
    "local_embedding_ratio",
]


def _check_exponent(name, p, lo=1.0):
    if not (lo <= p <= math.inf) or (isinstance(p, float) and math.isnan(p)):
        raise ValueError(f"{name}={p} outside [{lo}, inf]")


@dataclass(frozen=True)
class MixedLebesgue:
    """``L^p_x L^q_v`` (``nesting="x-outer"``) or ``L^q_v L^p_x`` (``"v-outer"``)."""

    p: float
    q: float
    nesting: str = "x-outer"

    def __post_init__(self):
        _check_exponent("p", self.p)
        _check_exponent("q", self.q)
        if self.nesting not in ("x-outer", "v-outer"):
            raise ValueError(f"unknown nesting {self.nesting!r}")

    def dual(self) -> "MixedLebesgue":
        return MixedLebesgue(conjugate_exponent(self.p), conjugate_exponent(self.q), self.nesting)


@dataclass(frozen=True)
class Sobolev:
    """``W^{s,r}`` (Bessel weight) or its homogeneous version (Riesz weight)."""

    s: float
    r: float = 2.0
    homogeneous: bool = False
    variable: str = "x"

    def __post_init__(self):
        if not 1 < self.r < math.inf:
            raise ValueError(f"r={self.r} must lie in (1, inf)")
        if self.variable not in ("x", "v", "joint"):
            raise ValueError(f"unknown variable {self.variable!r}")


@dataclass(frozen=True)
class Lorentz:
    q: float
    c: float

    def __post_init__(self):
        if not (0 < self.q < math.inf and 0 < self.c < math.inf):
            raise ValueError("Lorentz exponents must lie in (0, inf)")


def _power_sum(a: np.ndarray, p: float, axes, weight: float) -> np.ndarray:
    if p == math.inf:
        return np.max(a, axis=axes)
    if p == 1:
        return np.sum(a, axis=axes) * weight
    m = np.max(a, axis=axes, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe) ** p, axis=axes) * weight
    return np.squeeze(safe, axis=axes) * s ** (1.0 / p)


def lebesgue_norm(samples: np.ndarray, p: float, cell_volume: float) -> float:
    """Joint ``L^p`` norm of samples with uniform cell volume."""
    _check_exponent("p", p)
    a = np.abs(np.asarray(samples))
    if p == math.inf:
        return float(a.max())
    return float(np.sum(a**p) * cell_volume) ** (1.0 / p)


def mixed_norm(f: Field, spec: MixedLebesgue) -> float:
    """Nested Riemann-sum norm with cell-volume weights."""
    g = f.grid
    a = np.abs(f.samples)
    if spec.nesting == "x-outer":
        inner = _power_sum(a, spec.q, g.v_axes, g.dv)
        return float(_power_sum(inner, spec.p, tuple(range(g.n)), g.dx))
    inner = _power_sum(a, spec.p, g.x_axes, g.dx)
    return float(_power_sum(inner, spec.q, tuple(range(g.n)), g.dv))


def _weight(lattice: AxisLattice, s: float, homogeneous: bool) -> np.ndarray:
    modes = lattice.open_modes()
    if homogeneous:
        r = euclidean(modes)
        with np.errstate(divide="ignore"):
            return np.where(r > 0, r ** s, 0.0)
    return bracket(modes) ** s


def sobolev_norm(samples, spec: Sobolev, lattice: AxisLattice | None = None) -> float:
    """``L^r`` norm of the Bessel (or Riesz) potential of the samples.

    ``samples`` is either a :class:`Field` (the weight acts on ``spec.variable``)
    or an array over ``lattice``.  Homogeneous weights vanish at the zero mode.
    """
    if isinstance(samples, Field):
        f = samples
        g = f.grid
        coeffs = forward_transform(f).coefficients
        w = 1.0
        if spec.variable in ("x", "joint"):
            wx = _weight(g.x, spec.s, spec.homogeneous)
            w = w * wx.reshape(wx.shape + (1,) * g.n)
        if spec.variable in ("v", "joint"):
            wv = _weight(g.v, spec.s, spec.homogeneous)
            w = w * wv.reshape((1,) * g.n + wv.shape)
        if spec.variable == "joint" and spec.homogeneous:
            xi, eta = g.frequencies()
            r = np.sqrt(euclidean(xi) ** 2 + euclidean(eta) ** 2)
            with np.errstate(divide="ignore"):
                w = np.where(r > 0, r ** spec.s, 0.0)
        if spec.variable == "joint" and not spec.homogeneous:
            xi, eta = g.frequencies()
            w = np.sqrt(1.0 + euclidean(xi) ** 2 + euclidean(eta) ** 2) ** spec.s
        out = inverse_transform(SpectralField(g, coeffs * w)).samples
        return lebesgue_norm(out, spec.r, g.dx * g.dv)
    if lattice is None:
        raise ValueError("a lattice is required for plain sample arrays")
    coeffs = transform_x(samples, lattice)
    out = inverse_transform_x(coeffs * _weight(lattice, spec.s, spec.homogeneous), lattice)
    return lebesgue_norm(out, spec.r, lattice.cell_volume)


def average_h_half(f: Field) -> float:
    """``((2 pi)^-n sum |xi| |f_hat(xi, 0)|^2 dxi)^(1/2)``."""
    g = f.grid
    trace = average_spectrum_trace(forward_transform(f))
    r = euclidean(g.x.open_modes())
    dxi = g.x.mode_spacing**g.n
    return float(np.sqrt(np.sum(r * np.abs(trace) ** 2) * dxi / (2 * np.pi) ** g.n))


def lorentz_norm(values, weights, q: float, c: float) -> float:
    """Exact ``L^{q,c}`` norm of a step function.

    Parameters
    ----------
    values : array_like
        Sample values; only ``|values|`` matters.
    weights : array_like or float
        Measure carried by each sample.
    q, c : float
        Lorentz exponents in ``(0, inf)``.
    """
    Lorentz(q, c)
    a = np.abs(np.asarray(values, dtype=complex)).ravel()
    w = np.broadcast_to(np.asarray(weights, dtype=float), a.shape).ravel()
    if np.sum(w) <= 0:
        raise ValueError("zero total measure")
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    t = np.cumsum(w)
    t_prev = np.concatenate([[0.0], t[:-1]])
    e = c / q
    total = np.sum(a**c * (t**e - t_prev**e)) * (q / c)
    return float(total ** (1.0 / c))


def _bessel_integrand(u, r, s, n):
    return math.exp(-math.exp(u) - r * r * math.exp(-u) / 4.0 + u * (s - n) / 2.0)


def bessel_kernel(s: float, radii, n: int = 1, rtol: float = 1e-10) -> np.ndarray:
    """Bessel potential kernel ``G_s`` by quadrature of its heat-kernel representation.

    Uses the substitution ``t = e^u``; the integrand is then smooth with
    double-exponential decay on both sides.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    pref = 1.0 / ((4 * math.pi) ** (n / 2) * math.gamma(s / 2))
    out = np.empty_like(radii)
    for i, r in enumerate(radii):
        centre = math.log(max(r / 2.0, 1e-300))
        lo = min(centre, 0.0) - 40.0
        hi = max(centre, 0.0) + 5.0
        val, err = integrate.quad(_bessel_integrand, lo, hi, args=(r, s, n),
                                  points=[centre], limit=400, epsabs=0.0, epsrel=rtol)
        if not np.isfinite(val) or err > 1e-6 * abs(val) + 1e-300:
            raise ArithmeticError(f"kernel quadrature did not converge at r={r}")
        out[i] = pref * val
    return out


def bessel_kernel_closed_form(s: float, radii, n: int = 1) -> np.ndarray:
    """``G_s(r) = 2 (r/2)^((s-n)/2) K_((n-s)/2)(r) / ((4 pi)^(n/2) Gamma(s/2))``."""
    r = np.asarray(radii, dtype=float)
    return (2.0 * (r / 2.0) ** ((s - n) / 2.0) * special.kv((n - s) / 2.0, r)
            / ((4 * math.pi) ** (n / 2) * math.gamma(s / 2)))


def bessel_kernel_mass(s: float, n: int = 1) -> float:
    """``integral of G_s`` over ``R^n`` by radial quadrature of :func:`bessel_kernel`."""
    sphere = 2 * math.pi ** (n / 2) / math.gamma(n / 2)

    def radial(r):
        return sphere * r ** (n - 1) * bessel_kernel(s, [r], n)[0]

    total = 0.0
    edges = [0.0, 1e-6, 1e-3, 0.1, 1.0, 4.0, 12.0, 30.0, 80.0]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(radial, a, b, limit=200, epsabs=1e-13, epsrel=1e-11)
        total += val
    return total


def local_embedding_ratio(samples, lattice: AxisLattice, r: float, p0: float, p1: float,
                          support_radius: float | None = None, tol: float = 1e-12) -> float:
    """``||<D>^r h||_{L^p0} / ||<D>^r h||_{L^p1}`` for compactly supported ``h``.

    Raises
    ------
    ValueError
        If ``p0 > p1`` or ``h`` is not negligible outside ``support_radius``.
    """
    if p0 > p1:
        raise ValueError("requires p0 <= p1")
    h = np.asarray(samples, dtype=complex)
    if support_radius is not None:
        rad = euclidean(lattice.open_nodes())
        outside = np.max(np.abs(h) * (rad > support_radius), initial=0.0)
        if outside > tol * max(np.max(np.abs(h)), 1e-300):
            raise ValueError(f"samples not supported in radius {support_radius}")
    coeffs = transform_x(h, lattice) * bracket(lattice.open_modes()) ** r
    out = inverse_transform_x(coeffs, lattice)
    return lebesgue_norm(out, p0, lattice.cell_volume) / lebesgue_norm(out, p1, lattice.cell_volume)
