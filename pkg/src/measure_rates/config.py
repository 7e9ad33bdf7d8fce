"""Flat ``key = value`` run configuration with dotted section keys.

Example::

    interval.a = 0
    interval.b = 1
    support.points = 0, 1
    initial.weights = 0.5, 0.5
    field.builtin = linear
    field.beta = 0.5
    sim.dt = 0.001
    sim.T = 1
    sim.n_paths = 1000
    sim.seed = 7

Instead of ``field.builtin`` a field may list factors explicitly::

    field.d = 1
    field.h1.knots = 0, 1
    field.h1.values = 0, 1
    field.h1.beta = 0.5

Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .measure_space import AtomicMeasure, Interval, PiecewiseLinearFn, new_atomic
from .sde_solver import SCHEMES, SimulationConfig
from .volatility import VolatilityField, builtin_fields, make_centered_field, zero_field

TARGETS = ("uniform", "truncated-exponential", "two-point")
BUILTIN_FIELDS = ("zero", "linear", "level-curvature")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class FactorSpec:
    knots: tuple
    values: tuple
    beta: float


@dataclass(frozen=True)
class RunConfig:
    a: float = 0.0
    b: float = 1.0
    support_points: tuple | None = None
    support_n: int | None = None
    weights: tuple | None = None
    target: str | None = None
    target_rate: float = 1.0
    target_points: tuple | None = None
    target_masses: tuple | None = None
    field_builtin: str | None = None
    field_beta: float = 0.5
    factors: tuple = ()
    dt: float = 1e-3
    T: float = 1.0
    n_paths: int = 1
    seed: int = 0
    scheme: str = "projected-euler"
    maturities: tuple = (0.25, 0.5, 1.0, 2.0, 5.0, 10.0)
    flow_t: float | None = None
    check_maturities: tuple | None = None
    n_list: tuple = (4, 8, 16, 32)
    stability_weights: tuple | None = None

    # -- derived objects --------------------------------------------------
    def interval(self) -> Interval:
        try:
            return Interval(self.a, self.b)
        except ValueError as exc:
            raise ConfigError("interval", str(exc)) from None

    def volatility(self) -> VolatilityField:
        iv = self.interval()
        if self.field_builtin is not None:
            if self.field_builtin == "zero":
                return zero_field(iv)
            return builtin_fields(iv, self.field_beta)[self.field_builtin]
        if not self.factors:
            return zero_field(iv)
        try:
            hs = [PiecewiseLinearFn(f.knots, f.values) for f in self.factors]
            return make_centered_field(iv, hs, [f.beta for f in self.factors])
        except ValueError as exc:
            raise ConfigError("field", str(exc)) from None

    def initial_measure(self) -> AtomicMeasure:
        from .experiments import discretize_target

        iv = self.interval()
        if self.target is not None:
            if self.support_points is not None or self.weights is not None:
                raise ConfigError("initial.target",
                                  "a target distribution fixes support and weights itself; "
                                  "drop support.points / initial.weights")
            n = self.support_n if self.support_n is not None else 2
            return discretize_target(self.target, n, iv, **self.target_params())
        if self.weights is None:
            raise ConfigError("initial.weights", "missing (or give initial.target)")
        if self.support_points is not None:
            pts = self.support_points
        elif self.support_n is not None:
            pts = tuple(midpoint_grid(iv, self.support_n))
        else:
            raise ConfigError("support.points", "missing (or give support.n)")
        if len(pts) != len(self.weights):
            raise ConfigError("initial.weights",
                              f"{len(self.weights)} weights for {len(pts)} support points")
        if list(pts) != sorted(set(pts)):
            raise ConfigError("support.points", "points must be distinct and ascending")
        try:
            return new_atomic(iv, pts, self.weights)
        except ValueError as exc:
            raise ConfigError("support.points", str(exc)) from None

    def target_params(self) -> dict:
        if self.target == "truncated-exponential":
            return {"rate": self.target_rate}
        if self.target == "two-point":
            out = {}
            if self.target_points is not None:
                out["points"] = self.target_points
            if self.target_masses is not None:
                out["masses"] = self.target_masses
            return out
        return {}

    def simulation(self, **overrides) -> tuple:
        """``(SimulationConfig, x0)`` built from this run."""
        mu0 = self.initial_measure()
        kw = dict(support=mu0.points, field=self.volatility(), dt=self.dt, T=self.T,
                  scheme=self.scheme, seed=self.seed, n_paths=self.n_paths)
        kw.update(overrides)
        try:
            cfg = SimulationConfig(**kw)
        except ValueError as exc:
            raise ConfigError("sim", str(exc)) from None
        return cfg, np.asarray(mu0.weights)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    # -- text form ----------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"interval.a = {_fmt(self.a)}", f"interval.b = {_fmt(self.b)}"]
        if self.support_points is not None:
            lines.append(f"support.points = {_fmt_list(self.support_points)}")
        if self.support_n is not None:
            lines.append(f"support.n = {self.support_n}")
        if self.weights is not None:
            lines.append(f"initial.weights = {_fmt_list(self.weights)}")
        if self.target is not None:
            lines.append(f"initial.target = {self.target}")
        if self.target_rate != 1.0:
            lines.append(f"initial.rate = {_fmt(self.target_rate)}")
        if self.target_points is not None:
            lines.append(f"initial.points = {_fmt_list(self.target_points)}")
        if self.target_masses is not None:
            lines.append(f"initial.masses = {_fmt_list(self.target_masses)}")
        if self.field_builtin is not None:
            lines.append(f"field.builtin = {self.field_builtin}")
            lines.append(f"field.beta = {_fmt(self.field_beta)}")
        elif self.factors:
            lines.append(f"field.d = {len(self.factors)}")
            for k, f in enumerate(self.factors, start=1):
                lines.append(f"field.h{k}.knots = {_fmt_list(f.knots)}")
                lines.append(f"field.h{k}.values = {_fmt_list(f.values)}")
                lines.append(f"field.h{k}.beta = {_fmt(f.beta)}")
        lines += [f"sim.dt = {_fmt(self.dt)}", f"sim.T = {_fmt(self.T)}",
                  f"sim.n_paths = {self.n_paths}", f"sim.seed = {self.seed}",
                  f"sim.scheme = {self.scheme}",
                  f"price.maturities = {_fmt_list(self.maturities)}",
                  f"converge.n_list = {', '.join(str(n) for n in self.n_list)}"]
        if self.flow_t is not None:
            lines.append(f"flow.t = {_fmt(self.flow_t)}")
        if self.check_maturities is not None:
            lines.append(f"check.maturities = {_fmt_list(self.check_maturities)}")
        if self.stability_weights is not None:
            lines.append(f"stability.weights = {_fmt_list(self.stability_weights)}")
        return "\n".join(lines) + "\n"


def midpoint_grid(interval: Interval, n: int) -> np.ndarray:
    edges = np.linspace(interval.left, interval.right, n + 1)
    return 0.5 * (edges[:-1] + edges[1:])


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_list(xs) -> str:
    return ", ".join(_fmt(x) for x in xs)


def _float(key, raw):
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw!r}") from None
    if not np.isfinite(v):
        raise ConfigError(key, "must be finite")
    return v


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None


def _floats(key, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(key, "empty list")
    return tuple(_float(key, p) for p in parts)


def _ints(key, raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ConfigError(key, "empty list")
    return tuple(_int(key, p) for p in parts)


_SIMPLE = {
    "interval.a": ("a", _float),
    "interval.b": ("b", _float),
    "support.points": ("support_points", _floats),
    "support.n": ("support_n", _int),
    "initial.weights": ("weights", _floats),
    "initial.target": ("target", None),
    "initial.rate": ("target_rate", _float),
    "initial.points": ("target_points", _floats),
    "initial.masses": ("target_masses", _floats),
    "field.builtin": ("field_builtin", None),
    "field.beta": ("field_beta", _float),
    "sim.dt": ("dt", _float),
    "sim.T": ("T", _float),
    "sim.n_paths": ("n_paths", _int),
    "sim.seed": ("seed", _int),
    "sim.scheme": ("scheme", None),
    "price.maturities": ("maturities", _floats),
    "flow.t": ("flow_t", _float),
    "check.maturities": ("check_maturities", _floats),
    "converge.n_list": ("n_list", _ints),
    "stability.weights": ("stability_weights", _floats),
}


def parse_config(text: str) -> RunConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(key, "given twice")
        raw[key] = value

    kw = {}
    factor_raw = {}
    d = None
    for key, value in raw.items():
        if key in _SIMPLE:
            name, conv = _SIMPLE[key]
            kw[name] = conv(key, value) if conv else value
        elif key == "field.d":
            d = _int(key, value)
        elif key.startswith("field.h") and key.count(".") == 2:
            _, idx, attr = key.split(".")
            try:
                k = int(idx[1:])
            except ValueError:
                raise ConfigError(key, "factor index must be an integer") from None
            if attr not in ("knots", "values", "beta"):
                raise ConfigError(key, "factor attribute must be knots, values or beta")
            factor_raw.setdefault(k, {})[attr] = (key, value)
        else:
            raise ConfigError(key, "unknown key")

    if factor_raw or d is not None:
        if "field_builtin" in kw:
            raise ConfigError("field.builtin", "cannot be combined with explicit factors")
        d = d if d is not None else len(factor_raw)
        if sorted(factor_raw) != list(range(1, d + 1)):
            raise ConfigError("field.d", f"expected factors h1..h{d}, got "
                                         f"{['h%d' % k for k in sorted(factor_raw)]}")
        factors = []
        for k in range(1, d + 1):
            spec = factor_raw[k]
            for attr in ("knots", "values", "beta"):
                if attr not in spec:
                    raise ConfigError(f"field.h{k}.{attr}", "missing")
            knots = _floats(*spec["knots"])
            values = _floats(*spec["values"])
            if len(knots) != len(values):
                raise ConfigError(f"field.h{k}.values", "length differs from knots")
            beta = _float(*spec["beta"])
            if beta < 0:
                raise ConfigError(f"field.h{k}.beta", "must be nonnegative")
            factors.append(FactorSpec(knots, values, beta))
        kw["factors"] = tuple(factors)

    cfg = RunConfig(**kw)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    cfg.interval()
    if cfg.scheme not in SCHEMES:
        raise ConfigError("sim.scheme", f"unknown scheme {cfg.scheme!r}; choose from {SCHEMES}")
    if cfg.target is not None and cfg.target not in TARGETS:
        raise ConfigError("initial.target", f"unknown target {cfg.target!r}; choose from {TARGETS}")
    if cfg.field_builtin is not None and cfg.field_builtin not in BUILTIN_FIELDS:
        raise ConfigError("field.builtin",
                          f"unknown field {cfg.field_builtin!r}; choose from {BUILTIN_FIELDS}")
    if cfg.field_beta < 0:
        raise ConfigError("field.beta", "must be nonnegative")
    if cfg.dt <= 0:
        raise ConfigError("sim.dt", "must be positive")
    if cfg.T <= 0:
        raise ConfigError("sim.T", "must be positive")
    if cfg.dt > cfg.T:
        raise ConfigError("sim.dt", "exceeds sim.T")
    if cfg.n_paths < 1:
        raise ConfigError("sim.n_paths", "must be >= 1")
    if cfg.support_n is not None and cfg.support_n < 1:
        raise ConfigError("support.n", "must be >= 1")
    if any(t <= 0 for t in cfg.maturities):
        raise ConfigError("price.maturities", "must be positive")
    if list(cfg.maturities) != sorted(cfg.maturities):
        raise ConfigError("price.maturities", "must be sorted")
    if cfg.check_maturities is not None and any(not 0 < t <= cfg.T for t in cfg.check_maturities):
        raise ConfigError("check.maturities", "must lie in (0, sim.T]")
    if any(n < 1 for n in cfg.n_list):
        raise ConfigError("converge.n_list", "entries must be >= 1")
    if cfg.flow_t is not None and cfg.flow_t < 0:
        raise ConfigError("flow.t", "must be nonnegative")


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
