"""Split-gate DQD / cavity simulation and fitting."""

from .units import energy_to_frequency, frequency_to_energy
from .qubit_cavity import (CavityParams, ComplexTrace, NoResonanceError, QubitParams,
                           SystemParams, detuning_trace, dispersion, effective_coupling,
                           excited_population, resonant_detuning, spectroscopy_linecut,
                           spectroscopy_map, transmission, transmission_map,
                           vacuum_rabi_peaks)
from .scenarios import (DEFAULT_BARRIER, DEFAULT_LEVER_ARMS, BarrierCalibration,
                        LeverArmMatrix, SweepSpec, cp_compensation, detuning_from_voltages,
                        stability_map, tc_from_barrier)
from .electrostatics import (GateLayout, LeverArmMap, coupling_from_beta,
                             differential_lever_arm, solve_lever_arm)
from .fitting import (FitError, FitResult, fit_cavity_lorentzian, fit_detuning_trace,
                      fit_spectroscopy_linewidth, levenberg_marquardt)
from .pipelines import ConfigError, load_config, reproduce

__version__ = "0.1.0"
