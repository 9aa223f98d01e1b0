"""STIRAP in a driven three-level Lambda system under broadband colored
noise, with the Cooper-pair-box realization and its protection strategies."""

from .analysis import (EfficiencyMap, MeritMap, cpb_efficiency_scan,
                       contour_polylines, dephasing_scan, efficiency_diagram,
                       figure_of_merit, lz_classify, merit_map, sigma_delta,
                       two_photon_linewidth)
from .cpb import (CPBModel, CPBSpectrum, calibrated_energy_scale, cpb_spectrum,
                  detuning_fluctuations, rabi_from_drive,
                  synthetic_sensitivities)
from .dynamics import (MarkovRates, Trajectory, propagate_lindblad,
                       propagate_unitary, protocol_grid, reference_rk4)
from .errors import ConfigError, NumericsError, TruncationError
from .model3 import (DetuningParams, PulseParams, ThreeLevelDrive,
                     adiabatic_flow, adiabatic_spectrum, dark_state,
                     pulse_envelopes, rwa_hamiltonian)
from .noise import (SPASpec, gauss_hermite_nodes, gaussian_dephasing_equivalent,
                    markovian_final_populations, spa_average)

__version__ = "0.1.0"
