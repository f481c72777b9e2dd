"""Scheme parameters, exponent constraints, mesh ratio and the amplitude ``M``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .gas import DomainError, GasConstants
from .nozzle import NozzleProfile

DEFAULT_ALPHA = 0.7
DEFAULT_BETA = 0.1
AUTO_M_SAFETY = 1e-12


def default_delta(c: GasConstants) -> float:
    return 0.5 * (1.0 + 1.0 / (2.0 * c.theta))


def exponent_violations(alpha: float, beta: float, delta: float, c: GasConstants) -> list[str]:
    """Every violated inequality, as readable strings; empty when admissible."""
    g = c.gamma
    out = []
    if not 0.5 < alpha < 1.0:
        out.append(f"need 1/2 < alpha < 1 (alpha={alpha})")
    if not 0.0 < beta < alpha:
        out.append(f"need 0 < beta < alpha (beta={beta}, alpha={alpha})")
    if not 0.5 + 0.5 * beta < alpha:
        out.append(f"need 1/2 + beta/2 < alpha ({0.5 + 0.5 * beta} >= {alpha})")
    if not alpha < 1.0 - 2.0 * beta:
        out.append(f"need alpha < 1 - 2 beta ({alpha} >= {1.0 - 2.0 * beta})")
    if not beta < 2.0 / (g + 5.0):
        out.append(f"need beta < 2/(gamma+5) ({beta} >= {2.0 / (g + 5.0)})")
    if not (9.0 - 3.0 * g) * beta / 2.0 < alpha:
        out.append(f"need (9 - 3 gamma) beta/2 < alpha ({(9.0 - 3.0 * g) * beta / 2.0} >= {alpha})")
    upper = 1.0 / (2.0 * c.theta)
    if not 1.0 < delta < upper:
        out.append(f"need 1 < delta < 1/(2 theta) = {upper} (delta={delta})")
    return out


def mesh_ratio(M: float, profile: NozzleProfile, dx: float) -> tuple[float, float]:
    """``(dx, dt)`` with ``dx/dt = 2 M exp(max one-sided integral of b)``."""
    if not M > 0.0 or not math.isfinite(M):
        raise DomainError(f"amplitude M must be positive and finite (M={M})")
    if not dx > 0.0:
        raise DomainError(f"dx must be positive (dx={dx})")
    return dx, dx / (2.0 * M * math.exp(profile.max_one_sided))


def auto_M(x, rho, v, profile: NozzleProfile, c: GasConstants) -> float:
    """Smallest amplitude whose bounds contain the sampled data, times ``1 + 1e-12``.

    Returns 0 for all-vacuum data; the caller must reject that.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(v)) and np.all(np.isfinite(x))):
        raise DomainError("initial data contain non-finite values")
    if np.any(rho < 0.0):
        raise DomainError("initial density is negative somewhere")
    s = np.where(rho > 0.0, np.power(np.maximum(rho, 0.0), c.theta) / c.theta, 0.0)
    vv = np.where(rho > 0.0, v, 0.0)
    z = vv - s
    w = vv + s
    B = profile.B(x)
    m = max(float(np.max(-z * np.exp(B))), float(np.max(w * np.exp(-B))), 0.0)
    return m * (1.0 + AUTO_M_SAFETY)


@dataclass(frozen=True)
class SchemeParams:
    c: GasConstants
    M: float
    dx: float
    T: float
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    delta: float | None = None
    newton_tol: float = 1e-12
    newton_max_iter: int = 60
    gauss_points: int = 16
    dt: float = field(default=0.0)

    def __post_init__(self):
        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.c))
        bad = exponent_violations(self.alpha, self.beta, self.delta, self.c)
        if bad:
            raise DomainError("; ".join(bad))
        if not self.M > 0.0:
            raise DomainError(f"amplitude M must be positive (M={self.M})")
        if self.T < 0.0:
            raise DomainError(f"final time must be nonnegative (T={self.T})")
        if self.gauss_points < 16:
            raise DomainError("at least 16 Gauss points per piece")

    @classmethod
    def build(cls, c: GasConstants, M: float, dx: float, T: float, profile: NozzleProfile, **kw):
        _, dt = mesh_ratio(M, profile, dx)
        return cls(c, M, dx, T, dt=dt, **kw)

    def with_dt(self, dt: float) -> "SchemeParams":
        return replace(self, dt=dt)

    @property
    def fan_step(self) -> float:
        """Invariant increment of the piecewise constant fans."""
        return self.dx**self.alpha

    @property
    def vacuum_level(self) -> float:
        """Middle densities at or below this go through the near-vacuum construction."""
        return self.dx**self.beta

    @property
    def cutoff_level(self) -> float:
        """Cell averages with density below this are set to vacuum."""
        return self.dx**self.delta
