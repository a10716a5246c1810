"""Command line entry point, run configuration and report emission.

Exit codes: 0 when every check passes, 1 when at least one check fails its
tolerance, 2 for configuration or precondition errors (no computation and
no output files in the configuration case).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import harness
from .harness import ClaimStrength, TestFamily, TheoremSpec, VerificationReport
from .norms import bessel_kernel, bessel_kernel_closed_form, bessel_kernel_mass
from .spectral_core import TensorField, make_grid
from .symbols import (ConstraintViolation, ScanGrid, gaussian_symbol, hormander_bound,
                      hypoelliptic_symbol, marcinkiewicz_bound, smooth_symbol, truncation_symbol)
from .transport_dispersion import dispersion_decay_fit, strichartz_exponents, strichartz_report

SCHEMA_VERSION = "1.0"
SUBCOMMANDS = ("verify-energy", "verify-commutator", "sweep", "dispersion-decay", "strichartz",
               "parametrix-check", "renorm-convergence", "criteria-scan", "kernel-check",
               "convergence-study")


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


# ---------------------------------------------------------------- value parsing

def parse_number(text: str) -> float:
    """Parse ``"inf"``, fractions like ``"4/3"`` and decimals."""
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def format_number(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x)) if isinstance(x, float) else str(x)


def _optional_number(text):
    return None if str(text).strip().lower() in ("", "none") else parse_number(text)


def _parse_int(text) -> int:
    try:
        return int(str(text).strip())
    except ValueError as exc:
        raise ConfigError(f"not an integer: {text!r}") from exc


def _parse_list(text) -> tuple:
    return tuple(parse_number(t) for t in str(text).split(",") if t.strip())


# ---------------------------------------------------------------- config sections

@dataclass(frozen=True)
class GridConfig:
    n: int = 1
    points_x: int = 256
    points_v: int = 256
    half_width_x: float = 12.0
    half_width_v: float = 12.0


@dataclass(frozen=True)
class SymbolConfig:
    family: str = "gaussian"
    scale: float = 1.0
    s: float = 1.0
    sigma: float = 0.5
    alpha_plus_beta: float = -0.5
    dimension_case: str = "1d"
    radius: float = 64.0
    doublings: int = 3


@dataclass(frozen=True)
class NormConfig:
    p: float = 2.0
    q: float = 2.0
    r: float = 1.0
    pairs: str = "inf:1,2:1,4:4/3"
    nesting: str = "x-outer"


@dataclass(frozen=True)
class TheoremConfig:
    id: str = "result1"
    points: str = ""
    p: float | None = None
    q: float | None = None
    a: float | None = None
    b: float | None = None
    c: float | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    r0: float | None = None
    p0: float | None = None
    r1: float | None = None
    p1: float | None = None
    r2: float | None = None
    sigma: float | None = None


@dataclass(frozen=True)
class FamilyConfig:
    kind: str = "gaussian"
    count: int = 1
    seed: int = 0
    frequencies: str = "4,8,16,32"
    components: int = 3
    lam: float = 0.25
    eps: float = 0.25
    velocity_radius: float = 3.0
    amplitude: float = 1.0


@dataclass(frozen=True)
class RunSection:
    out: str = "kinavg-out"
    formats: str = "json,csv"
    check: str = "energy"
    levels: str = ""
    mode: str = ""
    multiplier: str = "hilbert_pair"
    times: str = "4,32,8"
    window: float = 8.0
    levels_sweep: int = 2


@dataclass(frozen=True)
class ToleranceConfig:
    energy: float = 1e-3
    commutator: float = 1e-6
    stability: float = 0.1
    parametrix: float = 1e-6
    dispersion: float = 0.02
    dispersion_nd: float = 0.05
    strichartz_window: float = 0.1
    renormalization: float = 0.02
    defect: float = 0.05
    kernel_mass: float = 1e-6
    kernel_closed_form: float = 1e-8
    criteria_stability: float = 0.1
    criteria_growth: float = 1.5


SECTIONS = {
    "grid": GridConfig,
    "symbol": SymbolConfig,
    "norm": NormConfig,
    "theorem": TheoremConfig,
    "family": FamilyConfig,
    "run": RunSection,
    "tolerances": ToleranceConfig,
}

_CHOICES = {
    ("symbol", "family"): ("gaussian", "constant", "xi_only", "hypoelliptic", "truncation"),
    ("symbol", "dimension_case"): ("1d", "nd"),
    ("norm", "nesting"): ("x-outer", "v-outer"),
    ("theorem", "id"): harness.THEOREM_IDS,
    ("family", "kind"): harness.FAMILY_KINDS,
    ("run", "check"): ("energy", "roundtrip", "commutator", "parametrix"),
    ("run", "mode"): ("", "padded", "line"),
    ("run", "multiplier"): ("hilbert_pair", "sign_tensor"),
}

_DEFAULT_GRIDS = {
    "verify-energy": GridConfig(1, 256, 256, 12.0, 12.0),
    "verify-commutator": GridConfig(1, 256, 256, 12.0, 12.0),
    "sweep": GridConfig(1, 128, 128, 8.0, 8.0),
    "dispersion-decay": GridConfig(1, 1024, 512, 160.0, 5.0),
    "strichartz": GridConfig(1, 1024, 256, 160.0, 5.0),
    "parametrix-check": GridConfig(1, 128, 128, 8.0, 8.0),
    "renorm-convergence": GridConfig(1, 256, 256, 8.0, 8.0),
    "criteria-scan": GridConfig(),
    "kernel-check": GridConfig(),
    "convergence-study": GridConfig(),
}

_DEFAULT_LEVELS = {"energy": "128,256,512", "roundtrip": "64,128,256",
                   "commutator": "64,128,256", "parametrix": "16,32,64"}


def _convert(section: str, name: str, ftype, raw):
    if ftype in (int, "int"):
        return _parse_int(raw)
    if ftype in (float, "float"):
        return parse_number(raw)
    if ftype in ("float | None",):
        return _optional_number(raw)
    value = str(raw).strip()
    choices = _CHOICES.get((section, name))
    if choices is not None and value not in choices:
        raise ConfigError(f"[{section}] {name} = {value!r}; expected one of {list(choices)}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for one subcommand."""

    subcommand: str
    grid: GridConfig = field(default_factory=GridConfig)
    symbol: SymbolConfig = field(default_factory=SymbolConfig)
    norm: NormConfig = field(default_factory=NormConfig)
    theorem: TheoremConfig = field(default_factory=TheoremConfig)
    family: FamilyConfig = field(default_factory=FamilyConfig)
    run: RunSection = field(default_factory=RunSection)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    @classmethod
    def defaults(cls, subcommand: str) -> "RunConfig":
        if subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        return cls(subcommand, grid=_DEFAULT_GRIDS[subcommand])

    def updated(self, section: str, values: dict) -> "RunConfig":
        """Overlay raw string values onto one section, converting and validating keys."""
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]; expected one of {list(SECTIONS)}")
        current = getattr(self, section)
        known = {f.name: f.type for f in fields(current)}
        converted = {}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{section}]; expected one of {sorted(known)}")
            converted[key] = _convert(section, key, known[key], raw)
        return dataclasses.replace(self, **{section: dataclasses.replace(current, **converted)})


def parse_config(text: str, subcommand: str | None = None) -> RunConfig:
    """Parse INI text; ``[run] subcommand`` may name the subcommand."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    declared = parser.get("run", "subcommand", fallback=None) if parser.has_section("run") else None
    sub = subcommand or declared
    if sub is None:
        raise ConfigError("no subcommand given")
    if declared is not None and subcommand is not None and declared != subcommand:
        raise ConfigError(f"config declares subcommand {declared!r} but {subcommand!r} was requested")
    cfg = RunConfig.defaults(sub)
    for section in parser.sections():
        values = {k: v for k, v in parser.items(section) if not (section == "run" and k == "subcommand")}
        cfg = cfg.updated(section, values)
    return cfg


def emit_config(cfg: RunConfig) -> str:
    """Serialize every key; ``parse_config(emit_config(c)) == c``."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    for section in SECTIONS:
        obj = getattr(cfg, section)
        items = {} if section != "run" else {"subcommand": cfg.subcommand}
        for f in fields(obj):
            v = getattr(obj, f.name)
            items[f.name] = format_number(v) if (v is None or isinstance(v, float)) else str(v)
        parser[section] = items
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)

    def exit(self, status=0, message=None):
        if status:
            raise ConfigError(message or "argument error")
        if message:
            sys.stdout.write(message)
        raise SystemExit(status)


# flag -> (section, key)
_FLAG_MAP = {
    "n": ("grid", "n"), "N": None, "Nx": ("grid", "points_x"), "Nv": ("grid", "points_v"),
    "L": None, "Lx": ("grid", "half_width_x"), "Lv": ("grid", "half_width_v"),
    "symbol": ("symbol", "family"), "scale": ("symbol", "scale"), "s": ("symbol", "s"),
    "alpha_plus_beta": ("symbol", "alpha_plus_beta"), "radius": ("symbol", "radius"),
    "doublings": ("symbol", "doublings"),
    "p": None, "q": None, "r": ("norm", "r"), "pairs": ("norm", "pairs"),
    "theorem": ("theorem", "id"), "points": ("theorem", "points"), "sigma": ("theorem", "sigma"),
    "family": None, "seed": ("family", "seed"), "frequencies": ("family", "frequencies"),
    "out": ("run", "out"), "format": ("run", "formats"), "check": ("run", "check"),
    "levels": ("run", "levels"), "mode": ("run", "mode"), "multiplier": ("run", "multiplier"),
    "times": ("run", "times"), "window": ("run", "window"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kinavg", description="Numerical checks for kinetic velocity averaging.")
    subs = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = subs.add_parser(name)
        sp.add_argument("--config", help="INI file; flags override it")
        sp.add_argument("--n", help="phase-space half-dimension")
        sp.add_argument("--N", help="points per axis (x and v)")
        sp.add_argument("--Nx")
        sp.add_argument("--Nv")
        sp.add_argument("--L", help="box half-width (x and v)")
        sp.add_argument("--Lx")
        sp.add_argument("--Lv")
        sp.add_argument("--symbol")
        sp.add_argument("--scale")
        sp.add_argument("--s")
        sp.add_argument("--alpha-plus-beta", dest="alpha_plus_beta")
        sp.add_argument("--radius")
        sp.add_argument("--doublings")
        sp.add_argument("--p", help="exponent, or comma list of sweep values")
        sp.add_argument("--q")
        sp.add_argument("--r")
        sp.add_argument("--pairs", help="dispersion pairs p:r separated by commas")
        sp.add_argument("--theorem")
        sp.add_argument("--points", help="sweep points, e.g. 'p=4/3;p=2'")
        sp.add_argument("--sigma")
        sp.add_argument("--family", help="kind or kind:count")
        sp.add_argument("--seed")
        sp.add_argument("--frequencies")
        sp.add_argument("--out")
        sp.add_argument("--format", help="comma list from json,csv,svg")
        sp.add_argument("--check")
        sp.add_argument("--levels")
        sp.add_argument("--mode")
        sp.add_argument("--multiplier")
        sp.add_argument("--times", help="start,stop,count")
        sp.add_argument("--window")
    return parser


def config_from_args(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    if args.subcommand is None:
        raise ConfigError(f"a subcommand is required: {list(SUBCOMMANDS)}")
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        cfg = parse_config(text, args.subcommand)
    else:
        cfg = RunConfig.defaults(args.subcommand)
    overlay: dict[str, dict] = {}

    def put(section, key, value):
        overlay.setdefault(section, {})[key] = value

    for flag, target in _FLAG_MAP.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if target is not None:
            put(*target, value)
        elif flag == "N":
            put("grid", "points_x", value)
            put("grid", "points_v", value)
        elif flag == "L":
            put("grid", "half_width_x", value)
            put("grid", "half_width_v", value)
        elif flag == "family":
            kind, _, count = value.partition(":")
            put("family", "kind", kind)
            if count:
                put("family", "count", count)
        elif flag in ("p", "q"):
            if cfg.subcommand == "sweep" and flag == "p" and "," in value:
                put("theorem", "points", ";".join(f"p={v}" for v in value.split(",")))
            else:
                put("norm", flag, value)
                if cfg.subcommand == "sweep":
                    put("theorem", flag, value)
    for section, values in overlay.items():
        cfg = cfg.updated(section, values)
    validate_config(cfg)
    return cfg


def _formats(cfg: RunConfig) -> tuple[str, ...]:
    out = tuple(f.strip() for f in cfg.run.formats.split(",") if f.strip())
    bad = [f for f in out if f not in ("json", "csv", "svg")]
    if bad or not out:
        raise ConfigError(f"formats must be drawn from json,csv,svg; got {cfg.run.formats!r}")
    return out


def _theorem_params(cfg: RunConfig) -> dict:
    th = cfg.theorem
    names = harness._DEFAULTS[th.id]
    return {k: getattr(th, k) for k in names if getattr(th, k, None) is not None}


def _sweep_points(cfg: RunConfig) -> list[dict]:
    text = cfg.theorem.points.strip()
    if not text:
        return [{}]
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        pt = {}
        for item in chunk.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"sweep point item {item!r} is not key=value")
            pt[key.strip()] = _optional_number(value)
        points.append(pt)
    if not points:
        raise ConfigError("empty parameter grid")
    return points


def _pairs(cfg: RunConfig) -> list[tuple[float, float]]:
    out = []
    for item in cfg.norm.pairs.split(","):
        p, sep, r = item.partition(":")
        if not sep:
            raise ConfigError(f"dispersion pair {item!r} is not p:r")
        out.append((parse_number(p), parse_number(r)))
    return out


def validate_config(cfg: RunConfig) -> None:
    """All checks that can fail before computation."""
    _formats(cfg)
    g = cfg.grid
    try:
        make_grid(g.n, g.points_x, g.points_v, g.half_width_x, g.half_width_v)
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc
    sub = cfg.subcommand
    if sub == "sweep":
        base = TheoremSpec(cfg.theorem.id, _theorem_params(cfg), cfg.theorem.sigma)
        for pt in _sweep_points(cfg):
            try:
                base.with_params(**pt).validate(g.n)
            except (ConstraintViolation, ValueError) as exc:
                raise ConfigError(str(exc)) from exc
        if cfg.run.levels_sweep < 2:
            raise ConfigError("levels_sweep must be at least 2")
    if sub == "convergence-study":
        levels = cfg.run.levels or _DEFAULT_LEVELS[cfg.run.check]
        if len(_parse_list(levels)) < 3:
            raise ConfigError("a convergence study needs at least 3 levels")
    if sub == "dispersion-decay":
        _pairs(cfg)
        t = _parse_list(cfg.run.times)
        if len(t) != 3 or t[2] < 5:
            raise ConfigError("times must be start,stop,count with count >= 5")
    if sub == "strichartz":
        try:
            strichartz_exponents(g.n, cfg.norm.p, cfg.norm.r)
        except ConstraintViolation as exc:
            raise ConfigError(str(exc)) from exc
    if sub in ("verify-energy", "verify-commutator", "sweep") and cfg.family.count < 1:
        raise ConfigError("family count must be positive")
    if sub == "verify-commutator" and g.n != 1 and cfg.symbol.family == "hypoelliptic":
        raise ConfigError("the hypoelliptic symbol has no analytic eta gradient")


# ---------------------------------------------------------------- subcommands

def _grid(cfg: RunConfig):
    g = cfg.grid
    return make_grid(g.n, g.points_x, g.points_v, g.half_width_x, g.half_width_v)


def _family(cfg: RunConfig) -> TestFamily:
    f = cfg.family
    params = {"frequencies": _parse_list(f.frequencies), "components": f.components, "lam": f.lam,
              "eps": f.eps, "velocity_radius": f.velocity_radius, "amplitude": f.amplitude}
    return TestFamily(f.kind, f.count, f.seed, params)


def _run_verify_energy(cfg):
    g = _grid(cfg)
    fam = _family(cfg)
    mode = cfg.run.mode or None
    return [harness.verify_energy_identity(f, cfg.run.multiplier, mode=mode,
                                           tolerance=cfg.tolerances.energy)
            for f in fam.fields(g)]


def _commutator_symbol(cfg):
    s = cfg.symbol
    n = cfg.grid.n
    if s.family == "gaussian":
        return gaussian_symbol(n, s.scale)
    if s.family == "constant":
        return smooth_symbol(lambda xi, eta: np.full(np.broadcast(*xi, *eta).shape, s.scale),
                             lambda xi, eta: [np.zeros(np.broadcast(*xi, *eta).shape) for _ in eta],
                             n, "constant")
    if s.family == "xi_only":
        return smooth_symbol(lambda xi, eta: np.exp(-s.scale * sum(np.square(x) for x in xi))
                             * np.ones(np.broadcast(*xi, *eta).shape),
                             lambda xi, eta: [np.zeros(np.broadcast(*xi, *eta).shape) for _ in eta],
                             n, "xi_only")
    raise ConfigError(f"symbol family {s.family!r} has no analytic eta gradient")


def _run_verify_commutator(cfg):
    g = _grid(cfg)
    sym = _commutator_symbol(cfg)
    return [harness.verify_commutator(f, sym, cfg.tolerances.commutator) for f in _family(cfg).fields(g)]


def _run_sweep(cfg):
    spec = TheoremSpec(cfg.theorem.id, _theorem_params(cfg), cfg.theorem.sigma)
    fixtures = Path(cfg.run.out) / "fixtures"
    return [harness.sweep(spec, _family(cfg), _sweep_points(cfg), _grid(cfg), cfg.run.levels_sweep,
                          cfg.tolerances.stability, fixture_dir=fixtures)]


def _gaussian_data(cfg):
    g = cfg.grid
    line = make_grid(1, g.points_x, g.points_v, g.half_width_x, g.half_width_v)
    factor = line.sample(lambda xs, vs: np.exp(-xs[0] ** 2 - vs[0] ** 2))
    if g.n == 1:
        return factor
    return TensorField(tuple([factor] * g.n))


def _run_dispersion(cfg):
    start, stop, count = _parse_list(cfg.run.times)
    times = np.geomspace(start, stop, int(count))
    data = _gaussian_data(cfg)
    tol = cfg.tolerances.dispersion if cfg.grid.n == 1 else cfg.tolerances.dispersion_nd
    rows, worst = [], 0.0
    for p, r in _pairs(cfg):
        fit = dispersion_decay_fit(data, p, r, times)
        err = abs(fit.exponent - fit.theoretical) if fit.theoretical == 0 else fit.relative_error
        worst = max(worst, err)
        rows.append({"p": p, "r": r, "exponent": fit.exponent, "theoretical": fit.theoretical,
                     "relative_error": err, "stderr": fit.stderr, "intercept": fit.intercept,
                     "passed": err <= tol, "times": list(fit.times), "norms": list(fit.norms)})
    return [VerificationReport("dispersion_decay", {"max_relative_error": worst}, tol, worst <= tol,
                                {"n": cfg.grid.n, "t_range": [float(start), float(stop)],
                                 "points_x": cfg.grid.points_x, "points_v": cfg.grid.points_v,
                                 "half_width_x": cfg.grid.half_width_x,
                                 "half_width_v": cfg.grid.half_width_v},
                               ClaimStrength.NUMERICAL_EVIDENCE, False, rows)]


def _run_strichartz(cfg):
    ex = strichartz_exponents(cfg.grid.n, cfg.norm.p, cfg.norm.r)
    data = _gaussian_data(cfg)
    first = strichartz_report(data, ex["q"], ex["p"], ex["r"], ex["a"], window=cfg.run.window)
    second = strichartz_report(data, ex["q"], ex["p"], ex["r"], ex["a"], window=2 * cfg.run.window)
    change = abs(second.ratio / first.ratio - 1.0)
    rows = [{"window": res.window, "ratio": res.ratio, "time_norm": res.time_norm,
             "tail_estimate": res.tail_estimate, "data_norm": res.data_norm} for res in (first, second)]
    tol = cfg.tolerances.strichartz_window
    return [VerificationReport("strichartz", {**ex, "window_change": change}, tol, change <= tol,
                               {"n": cfg.grid.n}, ClaimStrength.NUMERICAL_EVIDENCE, True, rows)]


def _levels(cfg):
    return [int(v) for v in _parse_list(cfg.run.levels or _DEFAULT_LEVELS[cfg.run.check])]


def _run_parametrix(cfg):
    levels = [int(v) for v in _parse_list(cfg.run.levels or _DEFAULT_LEVELS["parametrix"])]
    return [harness.convergence_study("parametrix", levels, cfg.tolerances.parametrix)]


def _run_renorm(cfg):
    g = _grid(cfg)
    base = g.sample(lambda xs, vs: cfg.family.amplitude * np.exp(-sum(x * x for x in xs)
                                                                  - sum(v * v for v in vs)))
    bump = g.sample(lambda xs, vs: np.prod([harness._smooth_bump(x / 3.0) for x in xs], axis=0)
                    * np.prod([harness._smooth_bump(v / 3.0) for v in vs], axis=0))
    return [harness.verify_renormalization_convergence(base, velocity_radius=cfg.family.velocity_radius,
                                                       tolerance=cfg.tolerances.renormalization),
            harness.mollifier_commutator_defect(bump, final_fraction=cfg.tolerances.defect)]


def _scan_symbol(cfg):
    s = cfg.symbol
    if s.family == "truncation":
        return truncation_symbol(s.alpha_plus_beta, s.s)
    if s.family == "hypoelliptic":
        return hypoelliptic_symbol(s.dimension_case, s.sigma, s.s, n=cfg.grid.n)
    return gaussian_symbol(cfg.grid.n, s.scale)


def _run_criteria(cfg):
    sym = _scan_symbol(cfg)
    grid = ScanGrid(2 * sym.n, radius=cfg.symbol.radius)
    rows = []
    for _ in range(cfg.symbol.doublings + 1):
        rows.append({"radius": grid.radius, "marcinkiewicz": marcinkiewicz_bound(sym, grid),
                     "hormander": hormander_bound(sym, grid)})
        grid = grid.doubled()
    for prev, row in zip(rows[:-1], rows[1:]):
        row["marcinkiewicz_change"] = abs(row["marcinkiewicz"] / prev["marcinkiewicz"] - 1.0)
        row["hormander_growth"] = row["hormander"] / prev["hormander"]
    tol = cfg.tolerances
    stable = all(r["marcinkiewicz_change"] <= tol.criteria_stability for r in rows[1:])
    growing = all(r["hormander_growth"] >= tol.criteria_growth for r in rows[1:])
    return [VerificationReport(
        "criteria_scan",
        {"marcinkiewicz_stable": stable, "hormander_growing": growing,
         "max_marcinkiewicz_change": max(r["marcinkiewicz_change"] for r in rows[1:]),
         "min_hormander_growth": min(r["hormander_growth"] for r in rows[1:])},
        tol.criteria_stability, stable and growing, {"symbol": sym.family, "initial_radius": cfg.symbol.radius},
        ClaimStrength.NUMERICAL_EVIDENCE, True, rows)]


def _run_kernel(cfg):
    tol = cfg.tolerances
    n = cfg.grid.n
    s_values = (0.5, 1.0, 2.0, 3.0)
    rows = []
    mass_ok = True
    for s in s_values:
        mass = bessel_kernel_mass(s, n)
        rows.append({"test": "mass", "s": s, "value": mass, "error": abs(mass - 1.0)})
        mass_ok = mass_ok and abs(mass - 1.0) <= tol.kernel_mass
    radii = np.linspace(0.1, 10.0, 100)
    closed = bessel_kernel(2.0, radii, 1)
    closed_err = float(np.max(np.abs(closed - np.exp(-radii) / 2.0)))
    rows.append({"test": "closed_form_s2_n1", "s": 2.0, "value": closed_err, "error": closed_err})
    far = np.linspace(2.0, 10.0, 81)
    bound_ok = True
    for s in s_values:
        vals = bessel_kernel(s, far, n)
        fitted = float(np.max(vals * np.exp(far / 2.0)))
        ratio_tail = float(vals[-1] * np.exp(far[-1] / 2.0) / fitted)
        ok = bool(np.all(vals <= fitted * np.exp(-far / 2.0) * (1 + 1e-12)))
        bound_ok = bound_ok and ok
        oracle = float(np.max(np.abs(vals - bessel_kernel_closed_form(s, far, n))
                              / bessel_kernel_closed_form(s, far, n)))
        rows.append({"test": "exponential_bound", "s": s, "value": fitted, "error": oracle,
                     "tail_ratio": ratio_tail})
    passed = mass_ok and closed_err <= tol.kernel_closed_form and bound_ok
    return [VerificationReport("kernel_check", {"closed_form_error": closed_err, "mass_ok": mass_ok,
                                                "exponential_bound_ok": bound_ok},
                               tol.kernel_mass, passed, {"n": n}, ClaimStrength.IDENTITY, False, rows)]


def _run_convergence(cfg):
    check = cfg.run.check
    tol = {"energy": cfg.tolerances.energy, "commutator": cfg.tolerances.commutator,
           "parametrix": cfg.tolerances.parametrix, "roundtrip": None}[check]
    return [harness.convergence_study(check, _levels(cfg), tol)]


_RUNNERS = {
    "verify-energy": _run_verify_energy,
    "verify-commutator": _run_verify_commutator,
    "sweep": _run_sweep,
    "dispersion-decay": _run_dispersion,
    "strichartz": _run_strichartz,
    "parametrix-check": _run_parametrix,
    "renorm-convergence": _run_renorm,
    "criteria-scan": _run_criteria,
    "kernel-check": _run_kernel,
    "convergence-study": _run_convergence,
}


# ---------------------------------------------------------------- emission

def _encode(value, indent=0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(value[k], indent + 1)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in value) + "\n" + end + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            raise ValueError("NaN cannot be serialized")
        if math.isinf(value):
            return json.dumps("inf" if value > 0 else "-inf")
        return format(value, ".17g")
    return json.dumps(value)


def _csv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else format(v, ".17g")
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_value(x) for x in v)
    return "" if v is None else str(v)


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_bytes(reports: Sequence[VerificationReport]) -> bytes:
    records = []
    for rep in reports:
        d = rep.to_dict()
        base = {"check": d["check"], "passed": d["passed"], "claim": d["claim"]}
        if d["rows"]:
            records.extend({**base, **row} for row in d["rows"])
        else:
            records.append({**base, **d["quantities"]})
    columns = ["check", "passed", "claim"] + sorted({k for r in records for k in r} - {"check", "passed", "claim"})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow([_csv_value(r.get(c)) for c in columns])
    return buf.getvalue().encode()


def _svg_bytes(report: VerificationReport) -> bytes | None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "kinavg"
    fig, ax = plt.subplots(figsize=(6, 4))
    if report.check == "dispersion_decay":
        for row in report.rows:
            t = np.asarray(row["times"])
            line, = ax.loglog(t, row["norms"], "o", ms=4)
            ax.loglog(t, np.exp(row["intercept"]) * t ** row["exponent"], "-", color=line.get_color(),
                      label=f"p={format_number(row['p'])}, r={row['r']:.4g}: slope {row['exponent']:.4f}"
                            f" (theory {row['theoretical']:.4g})")
        ax.set_xlabel("t")
        ax.set_ylabel("mixed norm")
        ax.legend(fontsize=7)
    elif report.check.startswith("sweep"):
        groups: dict[str, list] = {}
        for row in report.rows:
            groups.setdefault(row["point"], []).append(row["ratio_fine"])
        keys = list(groups)
        for i, k in enumerate(keys):
            vals = [v for v in groups[k] if isinstance(v, float)]
            ax.plot([i] * len(vals), vals, "o", ms=3)
        ax.set_xticks(range(len(keys)))
        ax.set_xticklabels(keys, rotation=30, fontsize=7)
        ax.set_ylabel("ratio")
    elif report.check.startswith("convergence") or report.check == "criteria_scan":
        label = report.metadata.get("level_kind", "radius")
        key = "error" if report.check.startswith("convergence") else "hormander"
        xs = [row[label] for row in report.rows]
        ax.loglog(xs, [row[key] for row in report.rows], "o-", label=key)
        if report.check == "criteria_scan":
            ax.loglog(xs, [row["marcinkiewicz"] for row in report.rows], "s-", label="marcinkiewicz")
            ax.legend(fontsize=7)
        ax.set_xlabel(label)
    else:
        plt.close(fig)
        return None
    ax.set_title(report.check)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def emit_report(reports: Sequence[VerificationReport], formats: Sequence[str], out_dir,
                stem: str = "report", config: RunConfig | None = None) -> list[str]:
    """Write the JSON record, CSV table and optional SVG plots.

    Files are written to a temporary name and renamed, so a failure leaves
    no partial file behind.  Returns the written paths.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("empty report list")
    out = Path(out_dir)
    written = []
    dicts = [r.to_dict() for r in reports]
    if "json" in formats:
        doc = {"schema_version": SCHEMA_VERSION, "reports": dicts,
               "passed": all(d["passed"] is not False for d in dicts)}
        if config is not None:
            doc["subcommand"] = config.subcommand
            doc["config"] = emit_config(config)
        path = out / f"{stem}.json"
        _write_atomic(path, (_encode(doc) + "\n").encode())
        written.append(str(path))
    if "csv" in formats:
        path = out / f"{stem}.csv"
        _write_atomic(path, _csv_bytes(reports))
        written.append(str(path))
    if "svg" in formats:
        for i, rep in enumerate(reports):
            data = _svg_bytes(rep)
            if data is not None:
                path = out / f"{stem}_{i}.svg"
                _write_atomic(path, data)
                written.append(str(path))
    return written


# ---------------------------------------------------------------- entry point

def _error_record(kind: str, message: str) -> str:
    return _encode({"schema_version": SCHEMA_VERSION, "status": "error", "error": kind,
                    "message": message, "exit_code": 2})


def run(argv: Sequence[str] | None = None) -> int:
    """Parse, validate, execute and emit; return the exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(_error_record("configuration", str(exc)), file=sys.stderr)
        return 2
    try:
        reports = _RUNNERS[cfg.subcommand](cfg)
    except (ConfigError, ConstraintViolation, ValueError) as exc:
        print(_error_record(type(exc).__name__, str(exc)), file=sys.stderr)
        return 2
    files = emit_report(reports, _formats(cfg), cfg.run.out, cfg.subcommand.replace("-", "_"), cfg)
    failed = [r.check for r in reports if r.passed is False]
    code = 1 if failed else 0
    print(_encode({"schema_version": SCHEMA_VERSION, "status": "fail" if failed else "pass",
                   "failed_checks": failed, "files": files, "exit_code": code}))
    return code


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
