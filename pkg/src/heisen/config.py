"""Run configuration: line-based ``key = value`` text with ``[section]`` headers.

    # comment
    seed = 7
    [grid]
    d = 1
    lam_min = 1e-3
    [symbol]
    symbol = schrodinger(nu=0.5, r=4.0, t=10)

Keys before the first header may name any key that belongs to exactly one
section.  Unknown sections and keys are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .biradial import SpectralGrid


class ConfigError(ValueError):
    pass


def _float_list(text):
    text = text.strip().strip("[]")
    return [float(v) for v in text.split(",") if v.strip()]


def _positive(v):
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _nonneg(v):
    if v < 0:
        raise ValueError("must be >= 0")
    return v


# section -> key -> (parser, default)
SCHEMA = {
    "run": {
        "seed": (lambda s: _nonneg(int(s)), 42),
        "jobs": (lambda s: _positive(int(s)), 4),
        "out": (str, "out"),
    },
    "grid": {
        "d": (lambda s: _positive(int(s)), 1),
        "lam_min": (lambda s: _positive(float(s)), 1e-3),
        "lam_max": (lambda s: _positive(float(s)), 1e3),
        "n_lam": (lambda s: _positive(int(s)), 200),
        "n_max": (lambda s: _nonneg(int(s)), 100),
    },
    "symbol": {
        "symbol": (str, "heat(t=1)"),
    },
    "kernel": {
        "rho_max": (lambda s: _positive(float(s)), 4.0),
        "n_rho": (lambda s: _positive(int(s)), 41),
        "s_max": (lambda s: _positive(float(s)), 4.0),
        "n_s": (lambda s: _positive(int(s)), 41),
    },
    "evolve": {
        "nu": (lambda s: _positive(float(s)), 1.0),
        "t_list": (_float_list, [0.0, 1.0, 10.0]),
        "initial": (str, "random"),
    },
    "probe": {
        "probe": (str, "miyachi"),
        "nu": (lambda s: _positive(float(s)), 1.0),
        "p": (str, "2"),
        "t_list": (_float_list, [1.0, 3.0, 10.0, 30.0, 100.0]),
        "m": (lambda s: _positive(int(s)), 1),
        "N": (lambda s: _positive(int(s)), 1),
        "word": (str, "1"),
    },
    "algebra": {
        "expr": (str, "X1*Y1 - Y1*X1"),
        "d": (lambda s: _positive(int(s)), 0),
    },
    "tolerances": {
        "tail_tol": (lambda s: _positive(float(s)), 1e-2),
    },
}

INITIAL = ("random", "gaussian")


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        full = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
        for sec, kv in self.values.items():
            full[sec].update(kv)
        self.values = full

    def get(self, section, key):
        return self.values[section][key]

    def set(self, section, key, value):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {section}.{key}")
        self.values[section][key] = value

    @property
    def seed(self):
        return self.values["run"]["seed"]

    def grid(self):
        g = self.values["grid"]
        try:
            return SpectralGrid(g["d"], g["lam_min"], g["lam_max"], g["n_lam"], g["n_max"])
        except ValueError as e:
            raise ConfigError(f"bad grid: {e}") from None


def _owner(key):
    hits = [sec for sec, keys in SCHEMA.items() if key in keys]
    if len(hits) != 1:
        return None
    return hits[0]


def parse_config(text) -> RunConfig:
    values = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header")
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (p.strip() for p in line.split("=", 1))
        if section is None and sum(key in keys for keys in SCHEMA.values()) > 1:
            raise ConfigError(f"line {lineno}: key '{key}' is ambiguous at top level; "
                              "put it under a [section]")
        sec = section or _owner(key)
        if sec is None or key not in SCHEMA[sec]:
            where = f"[{section}]" if section else "top level"
            raise ConfigError(f"line {lineno}: unknown key '{key}' ({where})")
        parser = SCHEMA[sec][key][0]
        try:
            parsed = parser(val)
        except ValueError as e:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {e}") from None
        values.setdefault(sec, {})[key] = parsed
    cfg = RunConfig(values)
    if cfg.get("evolve", "initial") not in INITIAL:
        raise ConfigError(f"initial must be one of {INITIAL}")
    g = cfg.values["grid"]
    if g["lam_min"] >= g["lam_max"]:
        raise ConfigError("lam_min must be below lam_max")
    if g["n_lam"] < 5:
        raise ConfigError("n_lam must be >= 5")
    return cfg


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
