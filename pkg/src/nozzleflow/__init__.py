"""Isentropic nozzle flow: exact Riemann solver, modified Godunov scheme and diagnostics."""
from .gas import (
    VACUUM,
    DomainError,
    GasConstants,
    GasState,
    char_speeds,
    entropy_production,
    from_invariants,
    mech_entropy,
    rh_residual,
    shock_speed_S,
    to_invariants,
    wave_curve,
)
from .jumps import ConstructionError
from .nozzle import NozzleProfile, mu_sigma, presets, validate_condition_M
from .params import SchemeParams
from .riemann import WaveFan, classify, solve
from .scheme import RunResult, Snapshot, run, sample_M
from .initial import parse_init

__all__ = [
    "VACUUM",
    "ConstructionError",
    "DomainError",
    "GasConstants",
    "GasState",
    "NozzleProfile",
    "RunResult",
    "SchemeParams",
    "Snapshot",
    "WaveFan",
    "char_speeds",
    "classify",
    "entropy_production",
    "from_invariants",
    "mech_entropy",
    "mu_sigma",
    "parse_init",
    "presets",
    "rh_residual",
    "run",
    "sample_M",
    "shock_speed_S",
    "solve",
    "to_invariants",
    "validate_condition_M",
    "wave_curve",
]
