"""Time-splitting Fourier pseudospectral solvers (Lie-Trotter S1, Strang S2) for
the 1D nonlinear Dirac equation in the nonrelativistic regime."""
from .observables import (ErrorRecord, current, current_error_rel_l1, density, density_error_l1, energy,
                          energy_error_rel, h1_error)
from .resonance import ResonanceSpec, is_non_resonant, nearest_non_resonant, resonant_step
from .schemes import PhysicsParams, SchemeRun, evolve, lie_step, nonlinearity, potential_flow, strang_step
from .spectral import (Grid, SpectralField, SpinorField, dirac_symbol, dsemigroup, forward_transform, free_flow,
                       inverse_transform, make_grid, projector, spectral_derivative)

__version__ = "0.1.0"
