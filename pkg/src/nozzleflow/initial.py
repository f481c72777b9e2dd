"""Initial data: vectorised ``(rho, v)`` profiles with their known discontinuities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gas import DomainError
from .nozzle import read_table

PRESETS = ("constant", "riemann", "wave", "file")


@dataclass(frozen=True)
class InitialData:
    name: str
    fn: Callable  # x -> (rho, v), vectorised
    breaks: tuple[float, ...] = field(default=())
    args: tuple[float, ...] = field(default=())

    def __call__(self, x):
        rho, v = self.fn(np.asarray(x, dtype=float))
        rho = np.broadcast_to(np.asarray(rho, dtype=float), np.shape(x))
        v = np.broadcast_to(np.asarray(v, dtype=float), np.shape(x))
        return rho, v


def constant(rho: float, v: float) -> InitialData:
    if rho < 0.0:
        raise DomainError("negative density")
    return InitialData("constant", lambda x: (np.full_like(x, rho), np.full_like(x, v)), (), (rho, v))


def riemann(rhoL: float, vL: float, rhoR: float, vR: float, x0: float = 0.0) -> InitialData:
    if rhoL < 0.0 or rhoR < 0.0:
        raise DomainError("negative density")

    def fn(x):
        left = x < x0
        return np.where(left, rhoL, rhoR), np.where(left, vL, vR)

    return InitialData("riemann", fn, (x0,), (rhoL, vL, rhoR, vR, x0))


def wave(length: float = 2.0, rho_amp: float = 1.0, v_amp: float = 2.0, periods: int = 1) -> InitialData:
    """Large smooth data: ``rho = 1 + rho_amp sin``, ``v = v_amp cos``.

    With the defaults the density touches zero and ``|v|`` reaches 2.
    """
    if rho_amp > 1.0:
        raise DomainError("rho_amp > 1 gives negative density")
    k = 2.0 * math.pi * periods / length

    def fn(x):
        return np.maximum(1.0 + rho_amp * np.sin(k * x), 0.0), v_amp * np.cos(k * x)

    return InitialData("wave", fn, (), (length, rho_amp, v_amp, periods))


def from_file(path) -> InitialData:
    """Three columns ``x rho v``; linear interpolation, constant beyond the ends."""
    data = read_table(path, ncols=3)
    xs, rs, vs = data[:, 0], data[:, 1], data[:, 2]
    if np.any(rs < 0.0):
        raise DomainError(f"{path}: negative density")

    def fn(x):
        return np.interp(x, xs, rs), np.interp(x, xs, vs)

    return InitialData("file", fn)


def parse_init(text: str) -> InitialData:
    """``constant:rho,v`` | ``riemann:rhoL,vL,rhoR,vR[,x0]`` | ``wave[:L,rho_amp,v_amp,periods]`` | ``file:PATH``."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name == "file":
        if not rest:
            raise DomainError("file initial data needs a path")
        return from_file(rest.strip())
    args = [float(t) for t in rest.split(",")] if rest.strip() else []
    if name == "constant":
        if len(args) != 2:
            raise DomainError("constant needs rho,v")
        return constant(*args)
    if name == "riemann":
        if len(args) not in (4, 5):
            raise DomainError("riemann needs rhoL,vL,rhoR,vR[,x0]")
        return riemann(*args)
    if name == "wave":
        if len(args) > 4:
            raise DomainError("wave takes at most L,rho_amp,v_amp,periods")
        if len(args) == 4:
            args[3] = int(args[3])
        return wave(*args)
    raise DomainError(f"unknown initial data {name!r}; choose from {PRESETS}")
