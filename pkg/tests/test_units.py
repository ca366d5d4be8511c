import math

from hypothesis import given, strategies as st
import pytest

from dqdcavity.units import (CONSTANTS, E_CHARGE, H_UEV_PER_GHZ, HBAR, PLANCK,
                             energy_to_frequency, frequency_to_energy)


def test_constants_are_exact_si_values():
    assert E_CHARGE == 1.602176634e-19
    assert PLANCK == 6.62607015e-34
    assert HBAR == pytest.approx(PLANCK / (2 * math.pi), rel=1e-15)
    assert CONSTANTS.hbar == HBAR


def test_h_in_ueV_per_GHz():
    assert H_UEV_PER_GHZ == pytest.approx(4.135667696, rel=1e-9)


@pytest.mark.parametrize("e_ueV, f_ghz", [(11.55, 2.79278), (28.1225, 6.8)])
def test_conversion_examples(e_ueV, f_ghz):
    assert energy_to_frequency(e_ueV) == pytest.approx(f_ghz, rel=2e-5)
    assert frequency_to_energy(f_ghz) == pytest.approx(e_ueV, rel=2e-5)


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_round_trip(x):
    assert frequency_to_energy(energy_to_frequency(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)
