"""Free streaming, the time-cutoff parametrix, and dispersion/Strichartz measurements."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from numpy.polynomial.legendre import leggauss
from scipy import integrate, stats

from .norms import MixedLebesgue, lebesgue_norm, mixed_norm
from .spectral_core import Field, PhaseGrid, TensorField, apply_transport, inner
from .symbols import ConstraintViolation, check_constraints, conjugate_exponent

__all__ = [
    "BoxOverflowError",
    "ParametrixCutoffs",
    "DecayFit",
    "StrichartzResult",
    "effective_extent",
    "free_stream",
    "stream_norm",
    "build_parametrix_cutoffs",
    "time_average",
    "parametrix_reconstruct",
    "dispersion_decay_fit",
    "strichartz_exponents",
    "strichartz_report",
    "strichartz_ratio",
    "dispersive_lemma_ratio",
    "dispersive_adjoint_gap",
]

SUPPORT_THRESHOLD = 1e-8


class BoxOverflowError(ValueError):
    """Streamed support would leave the periodic box."""

    def __init__(self, message: str, minimal_half_width: float):
        super().__init__(message)
        self.minimal_half_width = minimal_half_width


def effective_extent(f: Field, threshold: float = SUPPORT_THRESHOLD) -> tuple[float, float]:
    """``(max |x|, max |v|)`` over cells with ``|f| > threshold * max |f|``.

    A field whose samples do not vary in ``x`` has spatial extent 0: its
    periodic shear is exact.
    """
    g = f.grid
    a = np.abs(f.samples)
    top = a.max()
    if top == 0:
        return 0.0, 0.0
    mask = a > threshold * top
    xs, vs = g.coordinates()
    vmax = max(float(np.max(np.where(mask, np.abs(v), 0.0))) for v in vs)
    varying = f.samples - f.samples.mean(axis=g.x_axes, keepdims=True)
    if np.max(np.abs(varying)) <= 1e-13 * top:
        return 0.0, vmax
    xmax = max(float(np.max(np.where(mask, np.abs(x), 0.0))) for x in xs)
    return xmax, vmax


def _check_box(f: Field, tmax: float):
    xmax, vmax = effective_extent(f)
    need = xmax + abs(tmax) * vmax
    if xmax > 0 and need > f.grid.half_width_x:
        raise BoxOverflowError(
            f"streaming to |t|={abs(tmax):.4g} needs half_width_x >= {need:.4g} "
            f"(support {xmax:.4g} + |t| v_max {abs(tmax) * vmax:.4g}); box has {f.grid.half_width_x:.4g}",
            need)


def _shear_phase(g: PhaseGrid, t: float) -> np.ndarray:
    """``exp(-i t v . xi)`` in x-FFT order; Nyquist rows use ``cos`` to keep real data real."""
    xs_modes = g.x.modes
    nyq = g.points_x // 2
    vnodes = g.v.nodes
    out = np.ones((1,) * g.ndim, dtype=complex)
    for j in range(g.n):
        ph = np.exp(-1j * t * np.outer(xs_modes, vnodes))
        ph[nyq] = np.cos(t * xs_modes[nyq] * vnodes)
        shape = [1] * g.ndim
        shape[j] = g.points_x
        shape[g.n + j] = g.points_v
        out = out * ph.reshape(shape)
    return out


def free_stream(f, t: float, check: bool = True):
    """Return ``f(x - t v, v)``.

    Works on :class:`Field` and, factor by factor, on :class:`TensorField`.

    Raises
    ------
    BoxOverflowError
        If the streamed support leaves the box; carries the minimal safe half-width.
    """
    if isinstance(f, TensorField):
        return TensorField(tuple(free_stream(g, t, check) for g in f.factors))
    if check:
        _check_box(f, t)
    g = f.grid
    fh = sfft.fftn(f.samples, axes=g.x_axes)
    return Field(g, sfft.ifftn(fh * _shear_phase(g, t), axes=g.x_axes))


def stream_norm(f, t: float, spec: MixedLebesgue, check: bool = True) -> float:
    """Mixed norm of the streamed field; factorizes over tensor factors."""
    if isinstance(f, TensorField):
        return float(np.prod([stream_norm(g, t, spec, check) for g in f.factors]))
    return mixed_norm(free_stream(f, t, check), spec)


# ---------------------------------------------------------------- parametrix

def _bump(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1
    safe = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    val, _ = integrate.quad(lambda u: float(_bump(u)), -1.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


_CUMULATIVE_NODES = 160


@dataclass(frozen=True)
class ParametrixCutoffs:
    """Time profiles ``chi0`` (unit mass bump) and ``chi1 = 1_{t>=0} - int_{-inf}^t chi0``.

    Attributes
    ----------
    support : tuple
        ``[t_lo, t_hi]``, the support of ``chi0``.
    nodes0, weights0 : ndarray
        Quadrature for integrals against ``chi0`` (weights include ``chi0``).
    nodes1, weights1 : ndarray
        Quadrature for integrals against ``chi1``, split at ``t = 0``.
    """

    support: tuple
    quadrature_points: int
    nodes0: np.ndarray = field(repr=False)
    weights0: np.ndarray = field(repr=False)
    nodes1: np.ndarray = field(repr=False)
    weights1: np.ndarray = field(repr=False)

    @property
    def contains_origin(self) -> bool:
        return self.support[0] <= 0.0 <= self.support[1]

    @property
    def radius(self) -> float:
        return max(abs(self.support[0]), abs(self.support[1]))

    def chi0(self, t):
        lo, hi = self.support
        half = 0.5 * (hi - lo)
        return _bump((np.asarray(t, dtype=float) - 0.5 * (lo + hi)) / half) / (half * _bump_mass())

    def primitive0(self, t):
        """``int_{-inf}^t chi0`` by high-order Gauss-Legendre on ``[t_lo, t]``."""
        lo, hi = self.support
        t = np.atleast_1d(np.asarray(t, dtype=float))
        z, w = leggauss(_CUMULATIVE_NODES)
        tc = np.clip(t, lo, hi)
        half = 0.5 * (tc - lo)
        pts = lo + half[:, None] * (z[None, :] + 1.0)
        return np.sum(w[None, :] * self.chi0(pts), axis=1) * half

    def chi1(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (t >= 0).astype(float) - self.primitive0(t)


def build_parametrix_cutoffs(support=(1.0, 2.0), away_from_zero: bool = False,
                             quadrature_points: int = 64) -> ParametrixCutoffs:
    """Build ``chi0``/``chi1`` and their Gauss-Legendre quadratures.

    Parameters
    ----------
    support : (float, float)
        Support ``[t_lo, t_hi]`` of ``chi0``.
    away_from_zero : bool
        Require ``0`` outside the support.
    quadrature_points : int
        Nodes per smooth piece.
    """
    lo, hi = float(support[0]), float(support[1])
    if not lo < hi:
        raise ValueError(f"support must satisfy t_lo < t_hi, got {support}")
    if away_from_zero and lo <= 0.0 <= hi:
        raise ValueError(f"support {support} contains the origin but away_from_zero was requested")
    if quadrature_points < 2:
        raise ValueError("need at least 2 quadrature points")
    z, w = leggauss(quadrature_points)
    shell = ParametrixCutoffs((lo, hi), quadrature_points, np.empty(0), np.empty(0),
                              np.empty(0), np.empty(0))
    half = 0.5 * (hi - lo)
    nodes0 = lo + half * (z + 1.0)
    weights0 = half * w * shell.chi0(nodes0)
    breaks = sorted({min(lo, 0.0), 0.0, lo, hi, max(hi, 0.0)})
    n1, w1 = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        mid, rad = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid + rad * z
        n1.append(pts)
        w1.append(rad * w * shell.chi1(pts))
    return ParametrixCutoffs((lo, hi), quadrature_points, nodes0, weights0,
                             np.concatenate(n1), np.concatenate(w1))


def _time_kernel(g: PhaseGrid, nodes, weights) -> np.ndarray:
    kernel = np.zeros(g.x.shape + g.v.shape, dtype=complex)
    for t, w in zip(nodes, weights):
        if w != 0.0:
            kernel = kernel + w * _shear_phase(g, t)
    return kernel


def time_average(f: Field, cutoffs: ParametrixCutoffs, which: str = "chi0",
                 reverse: bool = False, check: bool = True) -> Field:
    """``int f(x - t v, v) chi(s t) dt`` with ``s = -1`` when ``reverse``."""
    nodes, weights = ((cutoffs.nodes0, cutoffs.weights0) if which == "chi0"
                      else (cutoffs.nodes1, cutoffs.weights1))
    if reverse:
        nodes = -nodes
    if check and nodes.size:
        _check_box(f, float(np.max(np.abs(nodes))))
    g = f.grid
    fh = sfft.fftn(f.samples, axes=g.x_axes)
    return Field(g, sfft.ifftn(fh * _time_kernel(g, nodes, weights), axes=g.x_axes))


def parametrix_reconstruct(f: Field, cutoffs: ParametrixCutoffs) -> Field:
    """``int f(x-tv,v) chi0 dt + int (v . grad_x f)(x-tv,v) chi1 dt``."""
    tmax = float(np.max(np.abs(np.concatenate([cutoffs.nodes0, cutoffs.nodes1]))))
    _check_box(f, tmax)
    transported = apply_transport(f)
    return (time_average(f, cutoffs, "chi0", check=False)
            + time_average(transported, cutoffs, "chi1", check=False))


# ---------------------------------------------------------------- dispersion

@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of ``log ||f(x-tv,v)||`` against ``log t``."""

    exponent: float
    stderr: float
    intercept: float
    t_range: tuple
    theoretical: float
    times: tuple
    norms: tuple

    @property
    def relative_error(self) -> float:
        if self.theoretical == 0:
            return abs(self.exponent)
        return abs(self.exponent / self.theoretical - 1.0)


def _dimension(f) -> int:
    return f.n if isinstance(f, TensorField) else f.grid.n


def dispersion_decay_fit(f, p: float, r: float, t_samples) -> DecayFit:
    """Fit the decay exponent of ``||f(x-tv,v)||_{L^p_x L^r_v}``.

    The theoretical exponent ``-n (1/r - 1/p)`` is attached to the result.
    """
    if not 0 < r <= p:
        raise ValueError(f"requires 0 < r <= p, got r={r}, p={p}")
    t = np.asarray(sorted(t_samples), dtype=float)
    if t.size < 5:
        raise ValueError("decay fit needs at least 5 sample times")
    if np.any(t <= 0):
        raise ValueError("sample times must be positive")
    spec = MixedLebesgue(p, r)
    norms = np.array([stream_norm(f, ti, spec) for ti in t])
    if np.any(norms <= 0):
        raise ValueError("degenerate fit: vanishing norm")
    res = stats.linregress(np.log(t), np.log(norms))
    n = _dimension(f)
    theory = -n * (1.0 / r - (0.0 if p == math.inf else 1.0 / p))
    return DecayFit(float(res.slope), float(res.stderr), float(res.intercept),
                    (float(t[0]), float(t[-1])), theory, tuple(t.tolist()), tuple(norms.tolist()))


def strichartz_exponents(n: int, p: float, r: float) -> dict:
    """Complete ``(p, r)`` to an admissible tuple ``(q, p, r, a)``."""
    inv_p = 0.0 if p == math.inf else 1.0 / p
    gap = n * (1.0 / r - inv_p)
    if gap <= 0:
        raise ConstraintViolation("requires r < p")
    q = 2.0 / gap
    a = 2.0 / (inv_p + 1.0 / r)
    out = {"n": n, "q": q, "p": p, "r": r, "a": a}
    ok, msg = check_constraints("strichartz", out)
    if not ok:
        raise ConstraintViolation(msg)
    return out


@dataclass(frozen=True)
class StrichartzResult:
    ratio: float
    window: float
    time_norm: float
    tail_estimate: float
    data_norm: float


def _time_panels(window: float, nodes: int):
    z, w = leggauss(nodes)
    edges = [0.0, 0.5, 1.0]
    while edges[-1] < window:
        edges.append(min(2.0 * edges[-1], window))
    pts, wts = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        pts.append(0.5 * (a + b) + 0.5 * (b - a) * z)
        wts.append(0.5 * (b - a) * w)
    t = np.concatenate(pts)
    wt = np.concatenate(wts)
    return np.concatenate([-t[::-1], t]), np.concatenate([wt[::-1], wt])


def strichartz_report(f, q: float, p: float, r: float, a: float, window: float = 8.0,
                      nodes_per_panel: int = 8) -> StrichartzResult:
    """``||f(x-tv,v)||_{L^q_t(|t|<T) L^p_x L^r_v} / ||f||_{L^a_{x,v}}`` with a tail estimate.

    The tail beyond ``|t| = T`` is estimated from the decay rate ``2/q``:
    ``int_T^inf N(t)^q dt ~ T N(T)^q`` on each side.
    """
    n = _dimension(f)
    ok, msg = check_constraints("strichartz", {"n": n, "q": q, "p": p, "r": r, "a": a})
    if not ok:
        if abs(a - q) <= 1e-12:
            raise ConstraintViolation(f"endpoint a = q is excluded: {msg}")
        raise ConstraintViolation(msg)
    spec = MixedLebesgue(p, r)
    t, w = _time_panels(window, nodes_per_panel)
    vals = np.array([stream_norm(f, ti, spec) for ti in t])
    integral = float(np.sum(w * vals**q))
    ends = [stream_norm(f, -window, spec), stream_norm(f, window, spec)]
    tail = float(sum(window * e**q for e in ends))
    if isinstance(f, TensorField):
        data = float(np.prod([lebesgue_norm(g.samples, a, g.grid.dx * g.grid.dv) for g in f.factors]))
    else:
        data = lebesgue_norm(f.samples, a, f.grid.dx * f.grid.dv)
    time_norm = integral ** (1.0 / q)
    return StrichartzResult(time_norm / data, window, time_norm, tail, data)


def strichartz_ratio(f, q: float, p: float, r: float, a: float, window: float = 8.0) -> float:
    """Finite-window Strichartz ratio; see :func:`strichartz_report`."""
    return strichartz_report(f, q, p, r, a, window).ratio


def dispersive_lemma_ratio(f: Field, p0: float, r0: float, p1: float, r1: float,
                           cutoffs: ParametrixCutoffs) -> float:
    """``||int f(x-tv,v) chi(t) dt||_{L^p0_x L^r0_v} / ||f||_{L^r1_x L^p1_v}``.

    Raises
    ------
    ConstraintViolation
        If the exponent window for the averaged dispersive estimate fails.
    """
    params = {"n": f.grid.n, "p0": p0, "r0": r0, "p1": p1, "r1": r1,
              "origin_in_support": cutoffs.contains_origin}
    ok, msg = check_constraints("dispersive_lemma", params)
    if not ok:
        raise ConstraintViolation(msg)
    avg = time_average(f, cutoffs, "chi0")
    return mixed_norm(avg, MixedLebesgue(p0, r0)) / mixed_norm(f, MixedLebesgue(r1, p1))


def dispersive_adjoint_gap(f: Field, g: Field, cutoffs: ParametrixCutoffs) -> float:
    """Relative gap in ``<T f, g> = <f, T* g>``, ``T*`` streaming with ``chi(-t)``."""
    lhs = inner(time_average(f, cutoffs, "chi0"), g)
    rhs = inner(f, time_average(g, cutoffs, "chi0", reverse=True))
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def adjoint_exponents(p0, r0, p1, r1) -> tuple:
    """Exponents ``(r1', p1', r0', p0')`` of the dual configuration."""
    c = conjugate_exponent
    return c(r1), c(p1), c(r0), c(p0)
