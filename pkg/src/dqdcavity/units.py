"""Physical constants and unit conventions.

Conventions used throughout the package:

* frequencies in Hz, except qubit gaps and transition frequencies (GHz)
* energies (detuning) in micro-electronvolts
* rates kappa, gamma_c, g_c stored as rate/2pi in Hz
* gate voltages in mV, lengths in nm
"""

from dataclasses import dataclass
import math


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values (e and h are exact in the revised SI)."""

    e: float = 1.602176634e-19
    h: float = 6.62607015e-34

    @property
    def hbar(self):
        return self.h / (2 * math.pi)

    @property
    def h_ueV_per_GHz(self):
        # J s -> eV s -> ueV/GHz
        return self.h / self.e * 1e6 * 1e9


CONSTANTS = PhysicalConstants()

E_CHARGE = CONSTANTS.e
PLANCK = CONSTANTS.h
HBAR = CONSTANTS.hbar
H_UEV_PER_GHZ = CONSTANTS.h_ueV_per_GHz


def energy_to_frequency(energy):
    """Convert an energy in ueV to a frequency in GHz (works on arrays)."""
    return energy / H_UEV_PER_GHZ


def frequency_to_energy(freq):
    """Convert a frequency in GHz to an energy in ueV (works on arrays)."""
    return freq * H_UEV_PER_GHZ
