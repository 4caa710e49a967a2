"""Ab initio engine: radial FE-DVR grid, partial-wave propagation, projections."""

from .bound import (BoundSpectrum, ConvergenceError, bound_population, bound_projector, bound_states,
                    ground_state, negative_energy_states, remove_bound_states, total_ionization)
from .grid import RadialGrid
from .propagate import PropagationError, Propagator, propagate, propagate_pulse
from .state import PartialWaveState, load_checkpoint, save_checkpoint
