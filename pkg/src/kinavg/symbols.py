"""Fourier multiplier symbols, cutoffs, multiplier criteria and regularity formulas.

Symbols are called as ``m(xi, eta)`` where ``xi`` and ``eta`` are sequences of
``n`` mutually broadcastable arrays (one per coordinate).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.special import comb

__all__ = [
    "MultiplierSymbol",
    "CutoffFn",
    "ScanGrid",
    "ConstraintViolation",
    "ConstraintCheck",
    "bracket",
    "euclidean",
    "sign_tensor_symbol",
    "hilbert_symbol",
    "hilbert_pair_symbol",
    "bessel_weight",
    "riesz_weight",
    "smooth_symbol",
    "gaussian_symbol",
    "build_cutoff_1d",
    "build_cutoff_nd",
    "hypoelliptic_symbol",
    "truncation_symbol",
    "marcinkiewicz_bound",
    "hormander_bound",
    "regularity_index",
    "scaling_exponent",
    "check_constraints",
    "hilbert_norm_constant",
    "conjugate_exponent",
]


def euclidean(components: Sequence[np.ndarray]) -> np.ndarray:
    return np.sqrt(sum(np.square(c) for c in components))


def bracket(components: Sequence[np.ndarray]) -> np.ndarray:
    """Japanese bracket ``(1 + |r|^2)^(1/2)``."""
    return np.sqrt(1.0 + sum(np.square(c) for c in components))


@dataclass(frozen=True)
class MultiplierSymbol:
    """A named symbol ``m(xi, eta)``.

    Attributes
    ----------
    family : str
        Family name, as used in config files.
    params : tuple
        ``(name, value)`` pairs.
    real : bool
        True when the symbol is real-valued, so ``m(D)`` is self-adjoint.
    fn : callable
        Evaluation rule.
    eta_gradient : callable or None
        ``(xi, eta) -> [d m / d eta_j]``; needed for commutator checks.
    """

    family: str
    params: tuple
    real: bool
    n: int
    fn: Callable = field(repr=False, compare=False)
    eta_gradient: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, xi, eta):
        return self.fn(list(xi), list(eta))

    def commutator_symbol(self) -> "MultiplierSymbol":
        """``mu = xi . grad_eta m``, the symbol of ``[m(D), v . grad_x]``."""
        if self.eta_gradient is None:
            raise ValueError(f"symbol {self.family!r} has no analytic eta-derivative")
        grad = self.eta_gradient

        def mu(xi, eta):
            return sum(x * d for x, d in zip(xi, grad(xi, eta)))

        return MultiplierSymbol("commutator:" + self.family, self.params, self.real, self.n, mu)

    def param(self, name):
        return dict(self.params)[name]


def _sign(a):
    return np.sign(a)


def sign_tensor_symbol(n: int) -> MultiplierSymbol:
    """``sum_j sign(xi_j) sign(eta_j)``."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def fn(xi, eta):
        return sum(_sign(xi[j]) * _sign(eta[j]) for j in range(n))

    return MultiplierSymbol("sign_tensor", (("n", n),), True, n, fn)


def hilbert_symbol(n: int, axis: int, variable: str = "x") -> MultiplierSymbol:
    """``sign`` of one frequency coordinate (purely imaginary kernel, real symbol)."""
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range for n={n}")
    if variable not in ("x", "v"):
        raise ValueError("variable must be 'x' or 'v'")

    def fn(xi, eta):
        return _sign((xi if variable == "x" else eta)[axis])

    return MultiplierSymbol("hilbert", (("axis", axis), ("variable", variable)), True, n, fn)


def hilbert_pair_symbol(n: int, axis: int) -> MultiplierSymbol:
    """``sign(xi_j) sign(eta_j)``, the tensor Hilbert transform on one axis pair."""
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range for n={n}")

    def fn(xi, eta):
        return _sign(xi[axis]) * _sign(eta[axis])

    return MultiplierSymbol("hilbert_pair", (("axis", axis),), True, n, fn)


def bessel_weight(a: float, alpha: float, n: int = 1) -> MultiplierSymbol:
    """``<xi>^a <eta>^alpha``."""

    def fn(xi, eta):
        return bracket(xi) ** a * bracket(eta) ** alpha

    def grad(xi, eta):
        base = bracket(xi) ** a * bracket(eta) ** (alpha - 2)
        return [alpha * e * base for e in eta]

    return MultiplierSymbol("bessel", (("a", a), ("alpha", alpha)), True, n, fn, grad)


def riesz_weight(s: float, variable: str = "x", n: int = 1, zero_mode: float = 0.0) -> MultiplierSymbol:
    """``|xi|^s`` (or ``|eta|^s``); the zero mode takes ``zero_mode`` when ``s <= 0``."""

    def fn(xi, eta):
        r = euclidean(xi if variable == "x" else eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(r > 0, r ** s, 0.0 if s > 0 else zero_mode)
        return out

    return MultiplierSymbol("riesz", (("s", s), ("variable", variable), ("zero_mode", zero_mode)),
                            True, n, fn)


def smooth_symbol(fn: Callable, eta_gradient: Callable | None, n: int = 1, name: str = "custom",
                  real: bool = True, params: tuple = ()) -> MultiplierSymbol:
    """Wrap a user symbol with an optional analytic eta-gradient."""
    return MultiplierSymbol(name, params, real, n, fn, eta_gradient)


def gaussian_symbol(n: int = 1, scale: float = 1.0) -> MultiplierSymbol:
    """``exp(-scale (|xi|^2 + |eta|^2))``."""

    def fn(xi, eta):
        return np.exp(-scale * (sum(np.square(x) for x in xi) + sum(np.square(e) for e in eta)))

    def grad(xi, eta):
        m = fn(xi, eta)
        return [-2.0 * scale * e * m for e in eta]

    return MultiplierSymbol("gaussian", (("scale", scale),), True, n, fn, grad)


# ---------------------------------------------------------------- cutoffs

@dataclass(frozen=True)
class CutoffFn:
    """A cutoff with value and gradient evaluators.

    Called as ``chi(r_1, ..., r_d)`` with one array per coordinate.
    """

    kind: str
    dim: int
    value: Callable = field(repr=False)
    gradient: Callable = field(repr=False)
    params: tuple = ()

    def __call__(self, *components):
        return self.value(*components)

    def derivative(self, r):
        """Derivative of a one-dimensional cutoff."""
        return self.gradient(r)[0]


def _quintic_step(u):
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _quintic_step_prime(u):
    inside = (u > 0) & (u < 1)
    return np.where(inside, 30.0 * u * u * (1.0 - u) ** 2, 0.0)


def build_cutoff_1d() -> CutoffFn:
    """Even plateau equal to 1 on ``|r| <= 1/2`` and 0 on ``|r| >= 1`` (quintic smoothstep)."""

    def value(r):
        u = 2.0 * np.abs(np.asarray(r, dtype=float)) - 1.0
        return 1.0 - _quintic_step(u)

    def gradient(r):
        r = np.asarray(r, dtype=float)
        u = 2.0 * np.abs(r) - 1.0
        return [-2.0 * np.sign(r) * _quintic_step_prime(u)]

    return CutoffFn("plateau", 1, value, gradient)


_BUMP_NODES = 800
_SERIES_TERMS = 40
_SERIES_RADIUS = 2.0
_TABLE_END = 400.0


def _bump(z):
    return np.exp(-1.0 / (1.0 - z * z))


@lru_cache(maxsize=1)
def _bump_profile():
    """Tables for ``phi(t) = int b(z) cos(tz) dz / int b``, ``b`` the standard bump."""
    z, w = leggauss(_BUMP_NODES)
    wb = w * _bump(z)
    wb = wb / wb.sum()
    moments = np.array([np.sum(wb * z ** (2 * k)) for k in range(_SERIES_TERMS + 1)])
    t = np.linspace(_SERIES_RADIUS - 0.5, _TABLE_END, 40001)
    phi = np.empty_like(t)
    dphi = np.empty_like(t)
    for chunk in np.array_split(np.arange(t.size), 40):
        tz = np.outer(t[chunk], z)
        phi[chunk] = np.cos(tz) @ wb
        dphi[chunk] = -(np.sin(tz) * z) @ wb
    return moments, CubicSpline(t, phi), CubicSpline(t, dphi)


def _series_coefficients(moments):
    """Taylor coefficients of phi in powers of t^2: (-1)^k mu_2k / (2k)!."""
    k = np.arange(moments.size)
    return np.array([(-1) ** j * moments[j] / math.factorial(2 * j) for j in k])


def _bump_transform(t):
    """``(phi(t), phi'(t))`` for the normalized bump transform."""
    moments, spline, dspline = _bump_profile()
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    coeff = _series_coefficients(moments)
    small = a <= _SERIES_RADIUS
    t2 = np.where(small, t * t, 0.0)
    phi = np.polynomial.polynomial.polyval(t2, coeff)
    dcoeff = np.array([2 * j * coeff[j] for j in range(1, coeff.size)])
    dphi = t * np.polynomial.polynomial.polyval(t2, dcoeff) if dcoeff.size else 0 * t
    mid = (~small) & (a <= _TABLE_END)
    am = np.where(mid, a, _SERIES_RADIUS)
    phi = np.where(small, phi, np.where(mid, spline(am), 0.0))
    dphi = np.where(small, dphi, np.where(mid, np.sign(t) * dspline(am), 0.0))
    return phi, dphi


def _reciprocal_series(a, order):
    """Coefficients of ``1 / sum a_k x^k`` up to ``x^order`` (a_0 = 1)."""
    c = np.zeros(order + 1)
    c[0] = 1.0
    for m in range(1, order + 1):
        c[m] = -sum(a[j] * c[m - j] for j in range(1, min(m, a.size - 1) + 1))
    return c


def build_cutoff_nd(gamma: float, order: int, dim: int = 1) -> CutoffFn:
    """Cutoff ``chi = chi0 * p`` with compactly supported transform.

    ``chi0`` is a tensor product of transforms of the standard bump; ``p`` is
    the truncated Taylor polynomial of ``1 / chi0`` so that all derivatives of
    ``chi`` of order ``1..order`` vanish at the origin.

    Parameters
    ----------
    gamma : float
        Weight exponent; requires ``order >= ceil(2 gamma) + 1`` when positive.
    order : int
        Number of vanishing derivative orders at 0.
    dim : int
        Number of coordinates of the argument.
    """
    if gamma > 0 and order < math.ceil(2 * gamma) + 1:
        raise ValueError(f"order {order} too small for gamma={gamma}: need >= {math.ceil(2 * gamma) + 1}")
    if order < 0 or dim < 1:
        raise ValueError("order must be >= 0 and dim >= 1")
    moments = _bump_profile()[0]
    even = _series_coefficients(moments)
    taylor = np.zeros(order + 1)
    for j, cj in enumerate(even):
        if 2 * j <= order:
            taylor[2 * j] = cj
    recip = _reciprocal_series(taylor, order)
    if not np.all(np.isfinite(recip)):
        raise ValueError("correction polynomial solve failed")
    terms = [lam for lam in itertools.product(range(order + 1), repeat=dim) if sum(lam) <= order]
    coeffs = [float(np.prod([recip[k] for k in lam])) for lam in terms]

    def _poly(comps):
        p = 0.0
        grad = [0.0] * dim
        for lam, c in zip(terms, coeffs):
            if c == 0.0:
                continue
            mono = c
            for i, k in enumerate(lam):
                mono = mono * comps[i] ** k
            p = p + mono
            for i, k in enumerate(lam):
                if k == 0:
                    continue
                d = c * k * comps[i] ** (k - 1)
                for j, kj in enumerate(lam):
                    if j != i:
                        d = d * comps[j] ** kj
                grad[i] = grad[i] + d
        return p, grad

    def _parts(components):
        comps = [np.asarray(c, dtype=float) for c in components]
        if len(comps) != dim:
            raise ValueError(f"cutoff expects {dim} coordinates, got {len(comps)}")
        pairs = [_bump_transform(c) for c in comps]
        return comps, pairs

    def value(*components):
        comps, pairs = _parts(components)
        base = np.prod([p for p, _ in pairs], axis=0)
        p, _ = _poly(comps)
        return base * p

    def gradient(*components):
        comps, pairs = _parts(components)
        base = np.prod([p for p, _ in pairs], axis=0)
        p, gp = _poly(comps)
        out = []
        for i in range(dim):
            others = np.prod([pairs[j][0] for j in range(dim) if j != i], axis=0) if dim > 1 else 1.0
            out.append(pairs[i][1] * others * p + base * gp[i])
        return out

    return CutoffFn("schwartz", dim, value, gradient, (("gamma", gamma), ("order", order)))


def hypoelliptic_symbol(dimension_case: str, sigma: float, s: float, cutoff: CutoffFn | None = None,
                        axis: int = 0, n: int = 1) -> MultiplierSymbol:
    """Symbols ``sign xi_j sign eta_j <xi>^(2 sigma - 1) chi(eta / <xi>^s)^k``.

    ``dimension_case="1d"`` uses a plateau cutoff with ``k = 1``;
    ``"nd"`` uses an ``n``-dimensional cutoff of the full ``eta`` vector with ``k = 2``.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if dimension_case == "1d":
        n = 1
        cutoff = cutoff or build_cutoff_1d()
        power = 1
    elif dimension_case == "nd":
        cutoff = cutoff or build_cutoff_nd(0.0, 2, n)
        power = 2
    else:
        raise ValueError("dimension_case must be '1d' or 'nd'")
    if not 0 <= axis < n:
        raise ValueError(f"axis {axis} out of range for n={n}")
    if cutoff.dim != n:
        raise ValueError(f"cutoff dimension {cutoff.dim} does not match n={n}")

    def fn(xi, eta):
        scale = bracket(xi) ** s
        chi = cutoff(*[e / scale for e in eta]) ** power
        return _sign(xi[axis]) * _sign(eta[axis]) * bracket(xi) ** (2 * sigma - 1) * chi

    return MultiplierSymbol("hypo_" + dimension_case,
                            (("sigma", sigma), ("s", s), ("axis", axis)), True, n, fn)


def truncation_symbol(alpha_plus_beta: float, s: float, cutoff: CutoffFn | None = None) -> MultiplierSymbol:
    """``(<eta>/<xi>^s)^(-(alpha+beta)) chi(eta/<xi>^s)`` in one dimension."""
    if alpha_plus_beta > 0:
        raise ValueError(f"alpha+beta must be <= 0, got {alpha_plus_beta}")
    cutoff = cutoff or build_cutoff_1d()

    def fn(xi, eta):
        scale = bracket(xi) ** s
        return (bracket(eta) / scale) ** (-alpha_plus_beta) * cutoff(eta[0] / scale)

    return MultiplierSymbol("truncation", (("alpha_plus_beta", alpha_plus_beta), ("s", s)), True, 1, fn)


# ---------------------------------------------------------------- criteria

@dataclass(frozen=True)
class ScanGrid:
    """Axis-avoiding dyadic scan grid ``+/- geomspace(inner, radius)`` per coordinate."""

    dim: int
    radius: float = 64.0
    inner: float = 1.0 / 16.0
    points_per_octave: int = 6
    reflect: bool = False

    def axis_values(self) -> np.ndarray:
        octaves = math.log2(self.radius / self.inner)
        count = max(2, int(round(octaves * self.points_per_octave)) + 1)
        pos = np.geomspace(self.inner, self.radius, count)
        vals = np.concatenate([-pos[::-1], pos])
        return -vals if self.reflect else vals

    def points(self) -> list[np.ndarray]:
        axes = [self.axis_values()] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return [m.ravel() for m in mesh]

    def doubled(self) -> "ScanGrid":
        return ScanGrid(self.dim, 2 * self.radius, self.inner,
                        self.points_per_octave, self.reflect)


def _evaluate(symbol, pts, n):
    vals = np.asarray(symbol(pts[:n], pts[n:]), dtype=complex)
    vals = np.broadcast_to(vals, pts[0].shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("symbol not finite on scan grid")
    return vals


def _mixed_difference(symbol, pts, n, orders, delta):
    """Central difference of multi-order ``orders`` with relative steps ``delta |k_i|``."""
    steps = [delta * np.abs(p) for p in pts]
    active = [i for i, d in enumerate(orders) if d > 0]
    stencils = []
    for i in active:
        d = orders[i]
        stencils.append([((-1) ** k * comb(d, k, exact=True), d / 2.0 - k) for k in range(d + 1)])
    total = 0.0
    for combo in itertools.product(*stencils):
        coef = 1.0
        shifted = list(pts)
        for i, (c, off) in zip(active, combo):
            coef *= c
            shifted[i] = pts[i] + off * steps[i]
        total = total + coef * _evaluate(symbol, shifted, n)
    denom = 1.0
    for i in active:
        denom = denom * steps[i] ** orders[i]
    return total / denom


def _refined_derivative(symbol, pts, n, orders, delta=1e-2, levels=4, rtol=1e-4):
    if sum(orders) == 0:
        return _evaluate(symbol, pts, n)
    prev = _mixed_difference(symbol, pts, n, orders, delta)
    for _ in range(levels):
        delta /= 2.0
        cur = _mixed_difference(symbol, pts, n, orders, delta)
        extrap = (4.0 * cur - prev) / 3.0
        scale = max(np.max(np.abs(extrap)), 1e-300)
        if np.max(np.abs(extrap - cur)) <= rtol * scale:
            return extrap
        prev = cur
    return extrap


def _criterion(symbol, scan_grid: ScanGrid, multi_indices, weight):
    n = symbol.n
    if scan_grid.dim != 2 * n:
        raise ValueError(f"scan grid dimension {scan_grid.dim} != 2n = {2 * n}")
    pts = scan_grid.points()
    total = 0.0
    for lam in multi_indices:
        d = _refined_derivative(symbol, pts, n, lam)
        total += float(np.max(weight(pts, lam) * np.abs(d)))
    return total


def marcinkiewicz_bound(symbol: MultiplierSymbol, scan_grid: ScanGrid) -> float:
    """``sum over lambda in {0,1}^N of sup |k^lambda d^lambda psi|`` on the scan grid."""
    dims = 2 * symbol.n
    indices = list(itertools.product((0, 1), repeat=dims))

    def weight(pts, lam):
        w = 1.0
        for p, l in zip(pts, lam):
            if l:
                w = w * np.abs(p)
        return w

    return _criterion(symbol, scan_grid, indices, weight)


def hormander_bound(symbol: MultiplierSymbol, scan_grid: ScanGrid) -> float:
    """``sum over |lambda| <= [N/2]+1 of sup |k|^|lambda| |d^lambda psi|`` on the scan grid."""
    dims = 2 * symbol.n
    top = dims // 2 + 1
    indices = [lam for lam in itertools.product(range(top + 1), repeat=dims) if sum(lam) <= top]

    def weight(pts, lam):
        return euclidean(pts) ** sum(lam)

    return _criterion(symbol, scan_grid, indices, weight)


# ---------------------------------------------------------------- parameters

class ConstraintViolation(ValueError):
    """A parameter constraint failed; the message names the inequality."""


class ConstraintCheck(NamedTuple):
    ok: bool
    diagnostic: str


def _validate_regularity(a, b, c, alpha, beta, gamma):
    if not 1 + a + b - 2 * c >= 0:
        raise ConstraintViolation(f"1 + a + b - 2c >= 0 violated: {1 + a + b - 2 * c}")
    if not alpha + beta <= 0:
        raise ConstraintViolation(f"alpha + beta <= 0 violated: {alpha + beta}")
    if not gamma > Fraction(-1, 2):
        raise ConstraintViolation(f"gamma > -1/2 violated: gamma = {gamma}")


def scaling_exponent(a, b, c, alpha, beta, gamma):
    """``s = (1 + a + b - 2c) / (1 - alpha - beta + 2 gamma)``; exact for Fraction input."""
    _validate_regularity(a, b, c, alpha, beta, gamma)
    num = 1 + a + b - 2 * c
    if all(isinstance(x, (int, Fraction)) for x in (a, b, c, alpha, beta, gamma)):
        num = Fraction(num)
    return num / (1 - alpha - beta + 2 * gamma)


def regularity_index(a, b, c, alpha, beta, gamma):
    """``sigma = s (1/2 + gamma) + c``; exact for Fraction input."""
    s = scaling_exponent(a, b, c, alpha, beta, gamma)
    half = Fraction(1, 2) if isinstance(gamma, (int, Fraction)) else 0.5
    sigma = s * (half + gamma) + c
    back = 2 * (sigma - c) / (1 + 2 * gamma)
    if abs(back - s) > 1e-12 * max(1, abs(s)):
        raise ArithmeticError("s and sigma formulas inconsistent")
    return sigma


def conjugate_exponent(p):
    """``p'`` with ``1/p + 1/p' = 1``; ``1 <-> inf``."""
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1
    if isinstance(p, Fraction):
        return p / (p - 1)
    return p / (p - 1.0)


def _require_open(name, value, lo=1, hi=math.inf):
    if not lo < value < hi:
        raise ValueError(f"{name}={value} must lie in ({lo}, {hi})")


def _inv(p):
    return 0.0 if p == math.inf else 1.0 / p


def check_constraints(lemma_id: str, params: dict) -> ConstraintCheck:
    """Evaluate a named parameter constraint.

    Recognized ids
    --------------
    ``renormalization``
        ``q1/p1 < q0/p0 + q1/n`` (keys ``p0, q0, p1, q1, n``).
    ``directional_localization``
        ``q1/p1 < (n-1)/n + q1/n`` (keys ``p1, q1, n``).
    ``dispersive_window``
        ``(n-1)/p0 < n/r1' < n/p0 + 1/p1`` (keys ``n, p0, r1, p1``).
    ``harmonic_mean``
        ``1/r0 + 1/p0 + 1/r1 + 1/p1 = 2``.
    ``regularity``
        ``1+a+b-2c >= 0``, ``alpha+beta <= 0``, ``gamma > -1/2``.
    ``hilbertian`` / ``mixed``
        ``1 < p < inf`` (and ``1 < q < inf``).
    ``strichartz``
        ``2/q = n(1/r - 1/p)``, ``2/a = 1/p + 1/r``, ``a < q`` (keys ``n, q, p, r, a``).
    ``dispersive_lemma``
        Balanced exponents, ``r0 <= p0``, ``r1 <= p1`` and either the
        ``p``-window ``(n-1)/p1 < n/p0 <= n/p1`` or the ``r``-window
        ``(n-1)/r0' < n/r1' <= n/r0'``; with ``origin_in_support`` also
        ``n/r1 < 1 + n/p0``.
    """
    p = params
    if lemma_id == "renormalization":
        for k in ("p0", "q0", "p1", "q1"):
            _require_open(k, p[k])
        lhs = p["q1"] / p["p1"]
        rhs = p["q0"] / p["p0"] + p["q1"] / p["n"]
        return ConstraintCheck(lhs < rhs, f"q1/p1 = {lhs:.6g} < q0/p0 + q1/n = {rhs:.6g}")
    if lemma_id == "directional_localization":
        for k in ("p1", "q1"):
            _require_open(k, p[k])
        n = p["n"]
        lhs = p["q1"] / p["p1"]
        rhs = (n - 1) / n + p["q1"] / n
        return ConstraintCheck(lhs < rhs, f"q1/p1 = {lhs:.6g} < (n-1)/n + q1/n = {rhs:.6g}")
    if lemma_id == "dispersive_window":
        n = p["n"]
        for k in ("p0", "r1", "p1"):
            if not 1 <= p[k] <= math.inf:
                raise ValueError(f"{k}={p[k]} must lie in [1, inf]")
        left = (n - 1) * _inv(p["p0"])
        mid = n * (1 - _inv(p["r1"]))
        right = n * _inv(p["p0"]) + _inv(p["p1"])
        return ConstraintCheck(left < mid < right,
                               f"(n-1)/p0 = {left:.6g} < n/r1' = {mid:.6g} < n/p0 + 1/p1 = {right:.6g}")
    if lemma_id == "harmonic_mean":
        total = sum(Fraction(1) / Fraction(p[k]) if not isinstance(p[k], float) else 1.0 / p[k]
                    for k in ("r0", "p0", "r1", "p1"))
        ok = abs(float(total) - 2.0) <= 1e-12
        return ConstraintCheck(ok, f"1/r0 + 1/p0 + 1/r1 + 1/p1 = {float(total):.6g} (required 2)")
    if lemma_id == "regularity":
        try:
            _validate_regularity(p.get("a", 0), p.get("b", 0), p.get("c", 0),
                                 p.get("alpha", 0), p.get("beta", 0), p.get("gamma", 0))
        except ConstraintViolation as exc:
            return ConstraintCheck(False, str(exc))
        return ConstraintCheck(True, "1+a+b-2c >= 0, alpha+beta <= 0, gamma > -1/2")
    if lemma_id in ("hilbertian", "mixed"):
        keys = ("p",) if lemma_id == "hilbertian" else ("p", "q")
        bad = [k for k in keys if not 1 < p[k] < math.inf]
        return ConstraintCheck(not bad, "; ".join(f"1 < {k} = {p[k]} < inf" for k in keys))
    if lemma_id == "strichartz":
        n, q, pp, r, a = p["n"], p["q"], p["p"], p["r"], p["a"]
        e1 = abs(2 / q - n * (1 / r - _inv(pp)))
        e2 = abs(2 / a - (_inv(pp) + 1 / r))
        ok = e1 <= 1e-12 and e2 <= 1e-12 and a < q
        return ConstraintCheck(ok, f"|2/q - n(1/r-1/p)| = {e1:.3g}, |2/a - 1/p - 1/r| = {e2:.3g}, a={a:.6g} < q={q:.6g}")
    if lemma_id == "dispersive_lemma":
        n = p["n"]
        p0, r0, p1, r1 = (p[k] for k in ("p0", "r0", "p1", "r1"))
        bal = abs(_inv(p0) + _inv(r0) - _inv(p1) - _inv(r1)) <= 1e-12
        order = r0 <= p0 and r1 <= p1
        p_win = (n - 1) * _inv(p1) < n * _inv(p0) <= n * _inv(p1) + 1e-15
        r_win = (n - 1) * (1 - _inv(r0)) < n * (1 - _inv(r1)) <= n * (1 - _inv(r0)) + 1e-15
        parts = [f"1/p0+1/r0 = 1/p1+1/r1: {bal}", f"r0 <= p0 and r1 <= p1: {order}",
                 f"(n-1)/p1 < n/p0 <= n/p1: {p_win}", f"(n-1)/r0' < n/r1' <= n/r0': {r_win}"]
        ok = bal and order and (p_win or r_win)
        if p.get("origin_in_support", False):
            extra = n * _inv(r1) < 1 + n * _inv(p0)
            parts.append(f"n/r1 < 1 + n/p0: {extra}")
            ok = ok and extra
        return ConstraintCheck(ok, "; ".join(parts))
    raise ValueError(f"unknown constraint id {lemma_id!r}")


def hilbert_norm_constant(p: float) -> float:
    """Operator norm of the Hilbert transform on ``L^p``."""
    if not 1 < p < math.inf:
        raise ValueError(f"p={p} must lie in (1, inf)")
    angle = math.pi / (2 * p)
    return math.tan(angle) if p <= 2 else 1.0 / math.tan(angle)
