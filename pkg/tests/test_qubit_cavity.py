from hypothesis import given, strategies as st
import numpy as np
import pytest

from dqdcavity.fitting.models import _half_max_width
from dqdcavity.qubit_cavity import (CavityParams, ComplexTrace, NoResonanceError, QubitParams,
                                    SystemParams, detuning_trace, dispersion,
                                    effective_coupling, excited_population, find_peaks,
                                    frequency_trace, resonant_detuning, response_at,
                                    spectroscopy_linecut, spectroscopy_map, transmission,
                                    transmission_map, vacuum_rabi_peaks)

F_C = 6.8e9


def system(**q):
    return SystemParams(CavityParams(F_C, 1.2e6, 133.0), (QubitParams(**q),))


def bare():
    return system(g_c=0.0)


# -- energetics ---------------------------------------------------------------

@pytest.mark.parametrize("eps, tc, expected, rel", [
    (0.0, 6.2, 6.2, 1e-15),
    (11.55, 6.2, 6.800, 1e-4),
    (20.0, 6.2, 7.863, 1e-4),
    (413.57, 6.2, 100.19, 1e-4),
])
def test_dispersion_examples(eps, tc, expected, rel):
    assert dispersion(eps, tc) == pytest.approx(expected, rel=rel)


@given(st.floats(-500, 500), st.floats(0.1, 20))
def test_dispersion_even_and_above_gap(eps, tc):
    assert dispersion(eps, tc) == dispersion(-eps, tc)
    assert dispersion(eps, tc) >= tc


def test_dispersion_rejects_nonpositive_gap():
    with pytest.raises(ValueError):
        dispersion(1.0, 0.0)


def test_resonant_detuning_examples():
    lo, hi = resonant_detuning(6.2, F_C)
    assert hi == pytest.approx(11.55, abs=5e-3) and lo == -hi
    assert resonant_detuning(5.275, F_C)[1] == pytest.approx(17.74, abs=1e-2)
    assert dispersion(hi, 6.2) == pytest.approx(6.8, rel=1e-12)
    for tc in (6.8, 7.432):
        with pytest.raises(NoResonanceError):
            resonant_detuning(tc, F_C)


def test_effective_coupling():
    q = QubitParams(0.0, 6.2, 36e6, 58e6)
    assert effective_coupling(q) == 58e6
    q = QubitParams(resonant_detuning(6.2, F_C)[1], 6.2, 36e6, 58e6)
    assert effective_coupling(q) == pytest.approx(58e6 * 6.2 / 6.8, rel=1e-12)
    assert effective_coupling(q) == pytest.approx(52.9e6, rel=1e-3)
    assert effective_coupling(QubitParams(1e6, 6.2, 36e6, 58e6)) < 2e3


@given(st.floats(0, 200), st.floats(0.01, 50))
def test_effective_coupling_decreases_with_detuning(eps, d):
    g = [effective_coupling(QubitParams(e, 6.2, 36e6, 50e6)) for e in (eps, eps + d)]
    assert g[1] < g[0]


def test_parameter_validation():
    with pytest.raises(ValueError):
        QubitParams(tc=0.0)
    with pytest.raises(ValueError):
        QubitParams(gamma_c=-1.0)
    with pytest.raises(ValueError):
        CavityParams(kappa=0.0)
    with pytest.warns(UserWarning, match="kappa"):
        CavityParams(f_c=1e9, kappa=2e7)
    with pytest.raises(ValueError):
        SystemParams(CavityParams(), ())


def test_system_dict_round_trip():
    s = SystemParams(CavityParams(), (QubitParams(), QubitParams(epsilon=3.0, tc=5.0)))
    assert SystemParams.from_dict(s.to_dict()) == s
    one = SystemParams.from_dict({"cavity": {"f_c": 6e9, "kappa": 1e6},
                                  "qubits": {"tc": 5.0}})
    assert one.qubits[0].tc == 5.0 and one.cavity.Z0 == 133.0


# -- transmission -------------------------------------------------------------

def test_bare_cavity_normalisation_and_linewidth():
    assert transmission(F_C, bare()) == 1 + 0j
    for df in (-0.6e6, 0.6e6):
        assert abs(transmission(F_C + df, bare())) ** 2 == pytest.approx(0.5, rel=1e-12)


@given(st.floats(6.7e9, 6.9e9), st.floats(-100, 100), st.floats(0.5, 12),
       st.floats(0, 300e6), st.floats(0, 300e6))
def test_passive(f, eps, tc, g, gamma):
    s = system(epsilon=eps, tc=tc, gamma_c=gamma, g_c=g)
    assert abs(transmission(f, s)) <= 1 + 1e-12


@given(st.floats(6.79e9, 6.81e9), st.floats(-60, 60))
def test_single_qubit_observables_even_in_epsilon(f, eps):
    a = transmission(f, system(epsilon=eps))
    b = transmission(f, system(epsilon=-eps))
    assert a == b


@given(st.floats(6.7e9, 6.9e9))
def test_zero_coupling_is_exact_lorentzian(f):
    hk = np.pi * 1.2e6
    expected = hk / (1j * 2 * np.pi * (F_C - f) + hk)
    assert transmission(f, system(epsilon=5.0, g_c=0.0)) == pytest.approx(expected, rel=1e-14)


def test_far_detuned_qubit_leaves_cavity_bare():
    f = F_C + np.linspace(-3e6, 3e6, 51)
    far = transmission(f, system(epsilon=5000.0))
    np.testing.assert_allclose(far, transmission(f, bare()), atol=1e-4)


def test_map_orientation_and_decoupled_columns():
    f = np.linspace(6.79e9, 6.81e9, 11)
    eps = np.linspace(-30, 30, 7)
    m = transmission_map(f, eps, bare())
    assert m.shape == (7, 11)
    np.testing.assert_array_equal(m, np.broadcast_to(m[0], m.shape))
    with pytest.raises(ValueError):
        transmission_map(f, eps[::-1][[0, 2, 1, 3, 4, 5, 6]], bare())


def test_map_symmetric_and_minima_at_resonance():
    eps = np.linspace(-20, 20, 401)
    f = F_C + np.linspace(-20e6, 20e6, 81)
    m = np.abs(transmission_map(f, eps, system()))
    np.testing.assert_allclose(m, m[::-1], rtol=1e-12)
    col = m[:, 40]
    i = find_peaks(-col)
    hi = resonant_detuning(6.2, F_C)[1]
    assert np.sort(np.abs(eps[i]))[-1] == pytest.approx(hi, abs=0.1)


def test_response_at_matches_map():
    eps = np.array([-3.0, 0.0, 7.0])
    np.testing.assert_allclose(response_at(eps, system()),
                               transmission_map(np.array([F_C]), eps, system())[:, 0])


def test_detuning_trace_morphology():
    eps = np.linspace(-60, 60, 1201)
    dispersive = np.abs(detuning_trace(eps, system(tc=7.432, g_c=58e6)).values)
    dips = find_peaks(-dispersive)
    assert len(dips) == 1 and eps[dips[0]] == 0.0
    crossing = np.abs(detuning_trace(eps, system(tc=5.275, g_c=58e6)).values)
    deep = [i for i in find_peaks(-crossing) if crossing[i] < 0.2]
    assert len(deep) == 2
    np.testing.assert_allclose(np.abs(eps[deep]), 17.74, atol=0.2)
    weak = np.abs(detuning_trace(eps, system(tc=40.0, g_c=58e6, gamma_c=500e6)).values)
    assert weak.min() > 0.95


def test_two_qubit_splitting_enhanced_by_sqrt2():
    q = QubitParams(0.0, 6.8, 1e6, 20e6)
    one = vacuum_rabi_peaks(SystemParams(CavityParams(), (q,)), resolution=2e3)
    two = vacuum_rabi_peaks(SystemParams(CavityParams(), (q, q)), resolution=2e3)
    q2 = QubitParams(0.0, 6.8, 1e6, 20e6 * np.sqrt(2))
    ref = vacuum_rabi_peaks(SystemParams(CavityParams(), (q2,)), resolution=2e3)
    assert len(one) == len(two) == 2
    assert two[1] - two[0] == pytest.approx(ref[1] - ref[0], abs=4e3)
    assert (two[1] - two[0]) / (one[1] - one[0]) == pytest.approx(np.sqrt(2), rel=1e-3)


def test_vacuum_rabi_splitting_monotone_in_coupling():
    hi = resonant_detuning(6.2, F_C)[1]
    split = []
    for g in (30e6, 40e6, 50e6, 60e6):
        s = system(epsilon=hi, g_c=g)
        p = vacuum_rabi_peaks(s, resolution=10e3)
        assert len(p) == 2
        g_eff = effective_coupling(s.qubits[0])
        assert 0.85 * 2 * g_eff <= p[1] - p[0] <= 2 * g_eff
        split.append(p[1] - p[0])
    assert np.all(np.diff(split) >= 0)


# -- traces -------------------------------------------------------------------

def test_trace_csv_round_trip(tmp_path):
    tr = frequency_trace(np.linspace(6.79e9, 6.81e9, 5), system())
    tr.to_csv(tmp_path / "t.csv")
    back = ComplexTrace.from_csv(tmp_path / "t.csv")
    np.testing.assert_array_equal(back.x, tr.x)
    np.testing.assert_array_equal(back.values, tr.values)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "sweep_value,re,im,abs,phase"


def test_trace_validation():
    with pytest.raises(ValueError):
        ComplexTrace("x", "", [0, 2, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        ComplexTrace("x", "", [0, 1], [1, np.nan])
    with pytest.raises(ValueError):
        ComplexTrace("x", "", [0, 1], [1])


# -- spectroscopy -------------------------------------------------------------

def test_population_limits():
    q = QubitParams(0.0, 6.2, 36e6, 50e6)
    assert np.all(excited_population([5e9, 6.2e9], 0.0, q, 0.0) == 0)
    assert excited_population(6.2e9, 0.0, q, 1e12) == pytest.approx(0.5, rel=1e-6)
    with pytest.raises(ValueError):
        excited_population(6.2e9, 0.0, q, -1.0)


def test_undriven_map_is_constant_in_fs():
    eps = np.linspace(-20, 20, 9)
    m = spectroscopy_map(eps, np.linspace(5e9, 9e9, 17), system(), 0.0)
    np.testing.assert_array_equal(m, np.broadcast_to(m[:, :1], m.shape))


def test_ridge_follows_dispersion():
    fs = np.linspace(7.5e9, 8.2e9, 1401)
    m = spectroscopy_map(np.array([20.0]), fs, system(), 1e6)[0]
    assert fs[np.argmax(np.abs(m - m[0]))] == pytest.approx(7.863e9, abs=1e6)


def test_linewidth_narrows_to_gamma_as_drive_falls():
    fs = np.linspace(5.9e9, 6.5e9, 6001)
    widths = []
    for drive in (100e6, 30e6, 10e6, 1e6, 1e3):
        dphi = np.angle(spectroscopy_linecut(fs, system(), drive).values)
        base = np.angle(spectroscopy_linecut(fs, system(), 0.0).values)
        w, _ = _half_max_width(fs, np.abs(dphi - base), 0.0)
        widths.append(w)
    assert np.all(np.diff(widths) < 0)
    assert widths[-1] == pytest.approx(36e6, rel=1e-3)
