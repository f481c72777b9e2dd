"""Nozzle geometry, the source coefficient ``a = -A'/A`` and its majorant ``b``.

``B(x)`` is the integral of ``b`` from 0 to ``x``; the scheme's space-dependent
bounds are ``-M exp(-B(x)) <= z`` and ``w <= M exp(B(x))``.  ``b`` is stored as
a C1 piecewise cubic on a uniform grid so that ``B`` is an exact piecewise
quartic, reproducible bit for bit inside a run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.ndimage import maximum_filter1d

from .gas import DomainError, GasConstants

# relative head-room on the derived majorant, covers peaks of |a| between samples
B_SAFETY = 1e-6


@dataclass(frozen=True)
class AdmissibilityConstants:
    mu: float
    sigma: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma={self.sigma} outside (0, 1)")
        if self.epsilon < 0.0 or self.sigma + 2.0 * self.epsilon >= 1.0:
            raise DomainError(f"epsilon={self.epsilon} needs sigma + 2 eps < 1")

    @property
    def integral_bound(self) -> float:
        """Largest admissible one-sided integral of ``b``."""
        return 0.5 * math.log(1.0 / (self.sigma + 2.0 * self.epsilon))


def mu_sigma(c: GasConstants, epsilon: float = 0.0) -> AdmissibilityConstants:
    th = c.theta
    if not 0.0 < th <= 1.0 / 3.0 + 1e-15:
        raise DomainError(f"theta={th} outside (0, 1/3]")
    sq = math.sqrt(th)
    mu = (1.0 - th) ** 2 / (th * (1.0 + th - 2.0 * sq))
    sigma = (1.0 - th) / ((1.0 - sq) * (2.0 * math.sqrt(th + 1.0) + sq - 1.0))
    return AdmissibilityConstants(mu, sigma, epsilon)


def f_of_k(k, c: GasConstants):
    """``2((1-th)k + 1 + th) / (th |k^2 - 1|)``; ``+inf`` at the poles ``k = +-1``."""
    th = c.theta
    k = np.asarray(k, dtype=float)
    den = th * np.abs(k * k - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0.0, 2.0 * ((1.0 - th) * k + 1.0 + th) / np.where(den > 0.0, den, 1.0), np.inf)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# the weight b and its integral B


class PiecewiseWeight:
    """C1 piecewise cubic ``b`` on a uniform grid, zero outside it.

    ``B`` is the exact antiderivative normalised to ``B(0) = 0``.
    """

    def __init__(self, x0: float, h: float, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if np.any(values < 0.0):
            raise DomainError("b must be nonnegative")
        n = len(values)
        if n < 2:
            raise DomainError("need at least two samples of b")
        self.x0 = float(x0)
        self.h = float(h)
        self.n = n - 1
        self.x1 = self.x0 + self.n * self.h
        grid = self.x0 + self.h * np.arange(n)
        pp = PchipInterpolator(grid, values, extrapolate=False)
        # coefficients in the local variable s = x - x_i, highest power first
        self._cb = np.ascontiguousarray(pp.c.T)
        anti = pp.antiderivative()
        self._cB = np.ascontiguousarray(anti.c.T)
        B_right = float(anti(self.x1))
        zero = float(anti(min(max(0.0, self.x0), self.x1)))
        t0 = -self.x0 / self.h
        if 0.0 < t0 < self.n and t0 == int(t0):
            # origin on a node: use that piece's constant so B(0) is exactly 0
            zero = float(self._cB[int(t0), -1])
        self._cB[:, -1] -= zero
        self._B_lo = -zero
        self._B_hi = B_right - zero
        self._cb_list = self._cb.tolist()
        self._cB_list = self._cB.tolist()

    # vectorised
    def _locate(self, x):
        t = (x - self.x0) / self.h
        i = np.clip(np.floor(t).astype(np.int64), 0, self.n - 1)
        return i, x - (self.x0 + i * self.h)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        i, s = self._locate(x)
        c = self._cb[i]
        val = ((c[..., 0] * s + c[..., 1]) * s + c[..., 2]) * s + c[..., 3]
        inside = (x >= self.x0) & (x <= self.x1)
        return np.where(inside, np.maximum(val, 0.0), 0.0)

    def B(self, x):
        x = np.asarray(x, dtype=float)
        i, s = self._locate(x)
        c = self._cB[i]
        val = (((c[..., 0] * s + c[..., 1]) * s + c[..., 2]) * s + c[..., 3]) * s + c[..., 4]
        return np.where(x < self.x0, self._B_lo, np.where(x > self.x1, self._B_hi, val))

    # scalar fast paths
    def b1(self, x: float) -> float:
        if x < self.x0 or x > self.x1:
            return 0.0
        i = min(int((x - self.x0) / self.h), self.n - 1)
        s = x - (self.x0 + i * self.h)
        c = self._cb_list[i]
        return max(((c[0] * s + c[1]) * s + c[2]) * s + c[3], 0.0)

    def B1(self, x: float) -> float:
        if x < self.x0:
            return self._B_lo
        if x > self.x1:
            return self._B_hi
        i = min(int((x - self.x0) / self.h), self.n - 1)
        s = x - (self.x0 + i * self.h)
        c = self._cB_list[i]
        return (((c[0] * s + c[1]) * s + c[2]) * s + c[3]) * s + c[4]

    @property
    def B_plus(self) -> float:
        return self._B_hi

    @property
    def B_minus(self) -> float:
        return -self._B_lo


class ZeroWeight:
    def b(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def B(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def b1(self, x):
        return 0.0

    def B1(self, x):
        return 0.0

    B_plus = 0.0
    B_minus = 0.0


class ConstantWeight:
    """``b = c`` on ``[lo, hi]`` and zero elsewhere (``lo <= 0 <= hi``)."""

    def __init__(self, c: float, lo: float, hi: float):
        if c < 0.0 or not lo <= 0.0 <= hi:
            raise DomainError("need c >= 0 and lo <= 0 <= hi")
        self.c, self.lo, self.hi = float(c), float(lo), float(hi)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.c, 0.0)

    def B(self, x):
        return self.c * np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def b1(self, x):
        return self.c if self.lo <= x <= self.hi else 0.0

    def B1(self, x):
        return self.c * min(max(x, self.lo), self.hi)

    @property
    def B_plus(self):
        return self.c * self.hi

    @property
    def B_minus(self):
        return -self.c * self.lo


def _zero_a(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _unit_area(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class NozzleProfile:
    """Cross section ``area``, source coefficient ``a`` and weight ``b``/``B``.

    ``area`` and ``a`` are vectorised callables; ``weight`` provides ``b``,
    ``B`` and their scalar fast paths ``b1``, ``B1``.
    """

    name: str
    X: float
    area: Callable = _unit_area
    a: Callable = _zero_a
    weight: object = field(default_factory=ZeroWeight)
    zero_source: bool = False

    def b(self, x):
        return self.weight.b(x)

    def B(self, x):
        return self.weight.B(x)

    def b1(self, x: float) -> float:
        return self.weight.b1(x)

    def B1(self, x: float) -> float:
        return self.weight.B1(x)

    @property
    def B_plus(self) -> float:
        """Integral of ``b`` over ``(0, inf)``."""
        return self.weight.B_plus

    @property
    def B_minus(self) -> float:
        """Integral of ``b`` over ``(-inf, 0)``."""
        return self.weight.B_minus

    @property
    def max_one_sided(self) -> float:
        return max(self.B_plus, self.B_minus)

    def with_weight(self, weight) -> "NozzleProfile":
        zero = self.zero_source and isinstance(weight, ZeroWeight)
        return NozzleProfile(self.name, self.X, self.area, self.a, weight, zero)


def _bump(t):
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def derive_b(a: Callable, X: float, mu: float, width: float) -> PiecewiseWeight | ZeroWeight:
    """Smooth majorant ``b >= |a|/mu`` built from ``a`` supported in ``[-X, X]``.

    ``|a|`` is first max-filtered over a window wider than the mollifier and
    then mollified with a bump of total support ``width``, so the result stays
    above ``|a|/mu`` everywhere while being C1.
    """
    half = 0.5 * width
    h = width / 16.0
    hf = h / 8.0
    window = half + h + hf
    pad = 2.0 * window + 4.0 * h
    n = 2 * int(math.ceil((X + pad) / h))
    x0 = -0.5 * n * h
    fine = x0 + hf * np.arange(8 * n + 1)
    abs_a = np.abs(np.asarray(a(fine), dtype=float))
    if not np.any(abs_a > 0.0):
        return ZeroWeight()
    r = int(math.ceil(window / hf))
    env = maximum_filter1d(abs_a, size=2 * r + 1, mode="constant", cval=0.0)
    kr = int(math.ceil(half / hf))
    kern = _bump(np.arange(-kr, kr + 1) * hf / half)
    kern /= kern.sum()
    smooth = np.convolve(env, kern, mode="same")
    # max(env, ...) is not needed: every kernel point sees a window covering
    # the neighbouring grid cells, so smooth >= |a| on them already
    values = smooth[::8] * (1.0 + B_SAFETY) / mu
    values[0] = values[-1] = 0.0
    return PiecewiseWeight(x0, h, values)


def weight_from_samples(x, b) -> PiecewiseWeight:
    """User supplied ``b`` on a uniform grid."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    h = np.diff(x)
    if len(x) < 4 or np.any(h <= 0.0) or np.ptp(h) > 1e-9 * h.mean():
        raise DomainError("b table needs >= 4 uniformly spaced increasing x values")
    return PiecewiseWeight(x[0], h.mean(), b)


# ---------------------------------------------------------------------------
# condition-M


@dataclass
class ConditionReport:
    passed: bool
    mu: float
    sigma: float
    bound: float
    majorant_margin: float
    integral: float
    integral_margin: float
    violated: list[str]

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL " + ",".join(self.violated)
        return (
            f"{state} mu={self.mu:.10g} sigma={self.sigma:.10g} "
            f"|a|<=mu*b margin={self.majorant_margin:.6g} "
            f"max one-sided int b={self.integral:.10g} bound={self.bound:.10g} "
            f"margin={self.integral_margin:.6g}"
        )


def validate_condition_M(
    profile: NozzleProfile, consts: AdmissibilityConstants, n_grid: int = 10_000
) -> ConditionReport:
    """Check ``|a| <= mu b`` on a grid and the one-sided integral bound on ``b``.

    The first margin is ``min(mu b / |a|) - 1`` over points with ``a != 0``
    (infinite when ``a`` vanishes); the second is ``bound - max int b``.
    """
    X = max(profile.X, 1e-12)
    x = np.linspace(-X, X, n_grid)
    aa = np.abs(np.asarray(profile.a(x), dtype=float))
    bb = np.asarray(profile.b(x), dtype=float)
    nz = aa > 0.0
    if np.any(nz):
        majorant_margin = float(np.min(consts.mu * bb[nz] / aa[nz]) - 1.0)
    else:
        majorant_margin = math.inf
    integral = profile.max_one_sided
    bound = consts.integral_bound
    violated = []
    if majorant_margin < 0.0:
        violated.append("majorant")
    if integral > bound:
        violated.append("integral")
    return ConditionReport(
        not violated,
        consts.mu,
        consts.sigma,
        bound,
        majorant_margin,
        integral,
        bound - integral,
        violated,
    )


# ---------------------------------------------------------------------------
# presets


def _taper(t):
    """C2 ramp: ``1 - (1 - t^2)^3`` on ``|t| < 1`` and 1 outside."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    return np.where(inside, 1.0 - (1.0 - t * t) ** 3, 1.0)


def _dtaper(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    return np.where(inside, 6.0 * t * (1.0 - t * t) ** 2, 0.0)


def _laval(h: float, X: float):
    def area(x):
        return 1.0 + h * _taper(np.asarray(x, dtype=float) / X)

    def a(x):
        x = np.asarray(x, dtype=float)
        return -h * _dtaper(x / X) / (X * area(x))

    return area, a


def _wind_tunnel(h: float, X: float):
    half = 0.5 * X

    def q(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.0, _taper((x + half) / half), _taper((x - half) / half))

    def dq(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.0, _dtaper((x + half) / half), _dtaper((x - half) / half)) / half

    def area(x):
        return 1.0 + h * q(x)

    def a(x):
        return -h * dq(x) / area(x)

    return area, a


def read_table(path, ncols: int = 2) -> np.ndarray:
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != ncols:
            raise DomainError(f"{path}: expected {ncols} columns, got {line!r}")
        rows.append([float(p) for p in parts])
    data = np.array(rows, dtype=float)
    if len(data) < 4:
        raise DomainError(f"{path}: need at least 4 rows")
    if np.any(np.diff(data[:, 0]) <= 0.0):
        raise DomainError(f"{path}: x must be strictly increasing")
    return data


def _tabulated(xs, As):
    xs = np.asarray(xs, dtype=float)
    As = np.asarray(As, dtype=float)
    if np.any(As <= 0.0):
        raise DomainError("cross section must be positive")
    spline = CubicSpline(xs, As, bc_type="clamped")
    dspline = spline.derivative()
    lo, hi = xs[0], xs[-1]

    def area(x):
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        return spline(x)

    def a(x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, lo, hi)
        inside = (x > lo) & (x < hi)
        return np.where(inside, -dspline(xc) / spline(xc), 0.0)

    return area, a, float(max(abs(lo), abs(hi)))


PRESETS = ("constant", "laval", "wind_tunnel", "tabulated")


def presets(name: str, params: dict | None = None, *, gas: GasConstants | None = None,
            dx: float = 0.01, b_override=None) -> NozzleProfile:
    """Build a profile; ``b`` is derived with mollifier width ``2 dx`` unless overridden.

    params: ``h`` (throat depth) and ``X`` for laval / wind_tunnel; ``path`` or
    ``x``/``A`` arrays for tabulated.
    """
    params = dict(params or {})
    gas = gas or GasConstants()
    if name == "constant":
        X = float(params.get("X", 1.0))
        return NozzleProfile("constant", X, zero_source=True)
    if name == "laval":
        h, X = float(params.get("h", 0.5)), float(params.get("X", 1.0))
        if 1.0 + min(h, 0.0) <= 0.0:
            raise DomainError("laval cross section must stay positive")
        area, a = _laval(h, X)
    elif name == "wind_tunnel":
        h, X = float(params.get("h", 0.3)), float(params.get("X", 2.0))
        if 1.0 + min(h, 0.0) <= 0.0:
            raise DomainError("wind tunnel cross section must stay positive")
        area, a = _wind_tunnel(h, X)
    elif name == "tabulated":
        if "path" in params:
            data = read_table(params["path"])
            xs, As = data[:, 0], data[:, 1]
        else:
            xs, As = params["x"], params["A"]
        area, a, X = _tabulated(xs, As)
    else:
        raise DomainError(f"unknown nozzle preset {name!r}; choose from {PRESETS}")
    profile = NozzleProfile(name, X, area, a)
    if b_override is not None:
        return profile.with_weight(b_override)
    consts = mu_sigma(gas)
    return profile.with_weight(derive_b(a, X, consts.mu, 2.0 * dx))
