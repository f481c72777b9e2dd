"""Isentropic gas: equation of state, Riemann invariants and elementary waves.

The pressure law is fixed to ``p = rho**gamma / gamma``.  All functions work on
plain floats; they are called millions of times per run, so they avoid numpy
scalars on purpose.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

# densities below this are treated as exact vacuum
RHO_VACUUM = 1e-300


class DomainError(ValueError):
    """A state or argument lies outside the physical domain."""


@dataclass(frozen=True)
class GasConstants:
    """Adiabatic exponent ``gamma`` in (1, 5/3] and ``theta = (gamma - 1)/2``."""

    gamma: float = 5.0 / 3.0
    theta: float = field(init=False)

    def __post_init__(self):
        if not (1.0 < self.gamma <= 5.0 / 3.0 + 1e-15):
            raise DomainError(f"gamma={self.gamma} outside (1, 5/3]")
        object.__setattr__(self, "theta", 0.5 * (self.gamma - 1.0))


class GasState(NamedTuple):
    rho: float
    m: float

    @property
    def v(self) -> float:
        return self.m / self.rho if self.rho > RHO_VACUUM else 0.0


class Invariants(NamedTuple):
    z: float
    w: float


class EntropyPair(NamedTuple):
    eta: float
    q: float


VACUUM = GasState(0.0, 0.0)


def pressure(rho: float, c: GasConstants) -> float:
    return rho**c.gamma / c.gamma if rho > 0.0 else 0.0


def rho_theta(rho: float, c: GasConstants) -> float:
    """``rho**theta`` with vacuum guard."""
    if rho < RHO_VACUUM:
        return 0.0
    return math.exp(c.theta * math.log(rho))


def state_from_rho_v(rho: float, v: float) -> GasState:
    if rho < 0.0:
        raise DomainError(f"negative density {rho}")
    if rho < RHO_VACUUM:
        return VACUUM
    return GasState(rho, rho * v)


def to_invariants(u: GasState, c: GasConstants) -> Invariants:
    rho, m = u
    if rho < 0.0:
        raise DomainError(f"negative density {rho}")
    if rho < RHO_VACUUM:
        return Invariants(0.0, 0.0)
    v = m / rho
    s = rho_theta(rho, c) / c.theta
    return Invariants(v - s, v + s)


def rho_from_zw(z: float, w: float, c: GasConstants) -> float:
    d = w - z
    if d <= 0.0:
        return 0.0
    return (0.5 * c.theta * d) ** (1.0 / c.theta)


def from_invariants(iv: Invariants, c: GasConstants) -> GasState:
    z, w = iv
    if w < z:
        raise DomainError(f"w={w} < z={z}: negative density")
    rho = rho_from_zw(z, w, c)
    if rho < RHO_VACUUM:
        return VACUUM
    return GasState(rho, rho * 0.5 * (w + z))


def char_speeds(u: GasState, c: GasConstants) -> tuple[float, float]:
    rho, m = u
    if rho < 0.0:
        raise DomainError(f"negative density {rho}")
    if rho < RHO_VACUUM:
        return 0.0, 0.0
    v = m / rho
    s = rho_theta(rho, c)
    return v - s, v + s


def flux(u: GasState, c: GasConstants) -> tuple[float, float]:
    rho, m = u
    if rho < RHO_VACUUM:
        return 0.0, 0.0
    return m, m * m / rho + pressure(rho, c)


def mech_entropy(u: GasState, c: GasConstants) -> EntropyPair:
    """Mechanical energy and its flux."""
    rho, m = u
    if rho < 0.0:
        raise DomainError(f"negative density {rho}")
    if rho < RHO_VACUUM:
        return EntropyPair(0.0, 0.0)
    g = c.gamma
    eta = 0.5 * m * m / rho + rho**g / (g * (g - 1.0))
    q = m * (0.5 * m * m / (rho * rho) + rho ** (g - 1.0) / (g - 1.0))
    return EntropyPair(eta, q)


def shock_speed_S(rho: float, rho0: float, c: GasConstants) -> float:
    """The factor ``S(rho, rho0)`` giving a 1-jump speed ``v0 - S``.

    Continuous across ``rho == rho0`` where it equals the sound speed.
    """
    if rho < 0.0 or rho0 < 0.0:
        raise DomainError("negative density")
    if rho0 <= 0.0:
        if rho <= 0.0:
            raise DomainError("S undefined for two vacuum states")
        return math.inf
    if rho == rho0:
        return rho_theta(rho0, c)
    num = rho * (pressure(rho, c) - pressure(rho0, c))
    return math.sqrt(num / (rho0 * (rho - rho0)))


def hugoniot_dv(rho: float, rho0: float, c: GasConstants) -> float:
    """``sqrt((p - p0)(rho - rho0)/(rho rho0))`` on the Hugoniot locus."""
    if rho == rho0:
        return 0.0
    return math.sqrt((pressure(rho, c) - pressure(rho0, c)) * (rho - rho0) / (rho * rho0))


_ADMISSIBLE = {
    (1, "rarefaction"): lambda r, r0: r < r0,
    (2, "rarefaction"): lambda r, r0: r > r0,
    (1, "shock"): lambda r, r0: r > r0 > 0.0,
    (2, "shock"): lambda r, r0: r < r0,
    (1, "inverse_shock"): lambda r, r0: r < r0,
    (2, "inverse_shock"): lambda r, r0: r > r0 > 0.0,
}


def wave_curve(family: int, kind: str, u0: GasState, rho: float, c: GasConstants) -> GasState:
    """State at density ``rho`` on the ``family`` wave curve of ``kind`` through ``u0``.

    ``rho == rho0`` returns ``u0`` for every curve.  Inverse shocks share the
    shock formula but live on the opposite density branch.
    """
    try:
        ok = _ADMISSIBLE[(family, kind)]
    except KeyError:
        raise DomainError(f"unknown wave curve ({family}, {kind!r})") from None
    rho0 = u0.rho
    if rho < 0.0:
        raise DomainError(f"negative density {rho}")
    if rho == rho0:
        return u0
    if not ok(rho, rho0):
        raise DomainError(f"rho={rho} not admissible on {kind} curve {family} from rho0={rho0}")
    z0, w0 = to_invariants(u0, c)
    if kind == "rarefaction":
        if family == 1:
            v = w0 - rho_theta(rho, c) / c.theta
        else:
            v = z0 + rho_theta(rho, c) / c.theta
    else:
        # one smooth locus per family; the sign of rho - rho0 picks the branch
        dv = math.copysign(hugoniot_dv(rho, rho0, c), rho - rho0)
        v = u0.v - dv if family == 1 else u0.v + dv
    return state_from_rho_v(rho, v)


def rh_residual(sigma: float, uL: GasState, uR: GasState, c: GasConstants) -> tuple[float, float]:
    fL = flux(uL, c)
    fR = flux(uR, c)
    return (
        fR[0] - fL[0] - sigma * (uR.rho - uL.rho),
        fR[1] - fL[1] - sigma * (uR.m - uL.m),
    )


def entropy_production(sigma: float, uL: GasState, uR: GasState, c: GasConstants) -> float:
    """Nonnegative for admissible jumps of the mechanical entropy pair."""
    eL = mech_entropy(uL, c)
    eR = mech_entropy(uR, c)
    return sigma * (eR.eta - eL.eta) - (eR.q - eL.q)


def rh_speed(uL: GasState, uR: GasState) -> float:
    """Jump speed from the mass equation; undefined for equal densities."""
    return (uR.m - uL.m) / (uR.rho - uL.rho)
