"""Many-body dynamics: dense density-matrix integration and quantum trajectories."""

from .basis import all_excited, product_state
from .channels import Channel, JumpChannels, build_jump_channels
from .dense import Generator, evolve_density_matrix, liouvillian_apply, thermal_product_state
from .observables import (
    DynamicsResult,
    correlation_map,
    default_time_grid,
    emission_rate,
)
from .trajectories import NoJumpPropagator, run_trajectories

__all__ = [
    "Channel",
    "DynamicsResult",
    "Generator",
    "JumpChannels",
    "NoJumpPropagator",
    "all_excited",
    "build_jump_channels",
    "correlation_map",
    "default_time_grid",
    "emission_rate",
    "evolve_density_matrix",
    "liouvillian_apply",
    "product_state",
    "run_trajectories",
    "thermal_product_state",
]
