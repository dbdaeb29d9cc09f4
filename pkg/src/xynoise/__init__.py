"""Noise-driven entanglement dynamics in small XY spin chains."""

from .dynamics import EvolutionParams, IntegrationDiverged, Propagator, Trajectory, evolve, evolve_oracle
from .entanglement import ConcurrenceTrace, concurrence, concurrence_x, entanglement_area, esd_time
from .experiments import (
    SweepConfig,
    classify_effect,
    default_grid,
    paper_spec,
    run_sweep,
    sweep_anisotropy,
    sweep_temperature,
)
from .operators import ChainSpec, NoisePlacement, build_hamiltonian, noise_operator, noise_operators, spin_operator
from .states import get_preparation, initial_state, make_preparation, partial_trace
from .tables import reproduce_table

__version__ = "0.1.0"
