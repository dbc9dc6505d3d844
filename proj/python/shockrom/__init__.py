"""Reduced-order models for 1-D scalar conservation laws with shocks."""

from ._core import (
    FluxModel,
    HullConstruction,
    ShockromError,
    dmd_eigenvalues,
    run,
    scenario,
    scenarios,
    shock_formation_time,
    upwind,
    welge_front,
)

__all__ = [
    "FluxModel",
    "HullConstruction",
    "ShockromError",
    "dmd_eigenvalues",
    "run",
    "scenario",
    "scenarios",
    "shock_formation_time",
    "upwind",
    "welge_front",
]
