"""Run configuration: ``key = value`` lines, ``#`` comments, case-sensitive keys.

Every problem in a file is collected and reported together, each with its line
number.  Example::

    gamma = 1.6666666666666667
    T = 0.2
    dx = 0.01
    domain = -1, 1
    nozzle = laval
    nozzle_h = 0.5
    init = riemann:1,0,0.3,0
    snapshots = 0.1, 0.2
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .gas import DomainError, GasConstants
from .initial import InitialData, parse_init
from .nozzle import PRESETS, NozzleProfile, presets, read_table, weight_from_samples
from .params import default_delta, exponent_violations


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class RunConfig:
    T: float
    dx: float
    init: str
    gamma: float = 5.0 / 3.0
    domain: tuple[float, float] = (-1.0, 1.0)
    nozzle: str = "constant"
    nozzle_h: float | None = None
    nozzle_X: float | None = None
    area_file: str | None = None
    b_file: str | None = None
    alpha: float = 0.7
    beta: float = 0.1
    delta: float | None = None
    M: float | None = None
    epsilon: float = 0.0
    out: str = "out"
    snapshots: tuple[float, ...] = ()
    force: bool = False
    workers: int = 1
    gnuplot: bool = False
    base_dir: Path = field(default=Path("."), repr=False)

    @property
    def gas(self) -> GasConstants:
        return GasConstants(self.gamma)

    def resolve(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else self.base_dir / q

    def profile(self) -> NozzleProfile:
        params = {}
        if self.nozzle_h is not None:
            params["h"] = self.nozzle_h
        if self.nozzle_X is not None:
            params["X"] = self.nozzle_X
        if self.area_file is not None:
            params["path"] = self.resolve(self.area_file)
        b = None
        if self.b_file is not None:
            data = read_table(self.resolve(self.b_file))
            b = weight_from_samples(data[:, 0], data[:, 1])
        return presets(self.nozzle, params, gas=self.gas, dx=self.dx, b_override=b)

    def initial_data(self) -> InitialData:
        text = self.init
        if text.startswith("file:"):
            text = "file:" + str(self.resolve(text[5:].strip()))
        return parse_init(text)


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"not finite: {s}")
    return v


def _floats(s: str) -> tuple[float, ...]:
    return tuple(_float(t) for t in s.split(",") if t.strip())


def _pair(s: str) -> tuple[float, float]:
    v = _floats(s)
    if len(v) != 2 or not v[0] < v[1]:
        raise ValueError(f"expected 'lo, hi' with lo < hi, got {s!r}")
    return v


def _bool(s: str) -> bool:
    t = s.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _name(s: str) -> str:
    if s not in PRESETS:
        raise ValueError(f"unknown nozzle {s!r}; choose from {', '.join(PRESETS)}")
    return s


KEYS = {
    "gamma": _float,
    "T": _float,
    "dx": _float,
    "domain": _pair,
    "nozzle": _name,
    "nozzle_h": _float,
    "nozzle_X": _float,
    "area_file": str,
    "b_file": str,
    "init": str,
    "alpha": _float,
    "beta": _float,
    "delta": _float,
    "M": _float,
    "epsilon": _float,
    "out": str,
    "snapshots": _floats,
    "force": _bool,
    "workers": int,
    "gnuplot": _bool,
}
REQUIRED = ("T", "dx", "init")


def parse_config(text: str, base_dir: Path | str = ".") -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    seen: dict[str, int] = {}
    values: dict[str, object] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or not key:
            errors.append(f"line {n}: expected 'key = value', got {raw.strip()!r}")
            continue
        if key not in KEYS:
            errors.append(f"line {n}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {n}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = n
        try:
            values[key] = KEYS[key](val)
        except ValueError as exc:
            errors.append(f"line {n}: bad value for {key!r}: {exc}")
    for key in REQUIRED:
        if key not in seen:
            errors.append(f"missing required key {key!r}")

    def where(k):
        return f"line {seen[k]}: " if k in seen else ""

    g = values.get("gamma", 5.0 / 3.0)
    if not 1.0 < g <= 5.0 / 3.0:
        errors.append(f"{where('gamma')}gamma must lie in (1, 5/3] (gamma={g})")
    else:
        c = GasConstants(g)
        alpha = values.get("alpha", 0.7)
        beta = values.get("beta", 0.1)
        delta = values.get("delta", default_delta(c))
        for msg in exponent_violations(alpha, beta, delta, c):
            involved = [f"line {seen[k]}" for k in ("alpha", "beta", "delta") if k in msg and k in seen]
            errors.append((", ".join(involved) + ": " if involved else "") + msg)
    if "T" in values and values["T"] < 0.0:
        errors.append(f"{where('T')}T must be nonnegative")
    if "dx" in values and not values["dx"] > 0.0:
        errors.append(f"{where('dx')}dx must be positive")
    if "M" in values and not values["M"] > 0.0:
        errors.append(f"{where('M')}M must be positive")
    if "workers" in values and values["workers"] < 1:
        errors.append(f"{where('workers')}workers must be at least 1")
    eps = values.get("epsilon", 0.0)
    if eps < 0.0:
        errors.append(f"{where('epsilon')}epsilon must be nonnegative")
    if values.get("nozzle") == "tabulated" and "area_file" not in values:
        errors.append(f"{where('nozzle')}nozzle = tabulated needs area_file")
    if "init" in values:
        try:
            init = values["init"]
            if not init.startswith("file:"):
                parse_init(init)
        except (DomainError, ValueError) as exc:
            errors.append(f"{where('init')}bad init: {exc}")
    if errors:
        raise ConfigError(errors)
    return RunConfig(base_dir=Path(base_dir), **values)


def load_config(path) -> RunConfig:
    p = Path(path)
    return parse_config(p.read_text(encoding="utf-8"), p.parent)
