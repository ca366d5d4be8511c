"""Charge-qubit energetics and steady-state cavity response.

Input-output model (single cavity mode, qubits in the rotating-wave
approximation, zero temperature)::

    A/A0 = (k/2) / ( i*2pi(f_c - f) + k/2 + sum_q g_q^2 / (i*2pi(W_q - f) + y_q/2) )

with k = 2pi*kappa, y_q = 2pi*gamma_c, g_q = 2pi*g_eff(eps_q) and W_q the
qubit transition frequency. Normalised so a bare cavity gives 1 at f_c.
"""

from dataclasses import dataclass, field, replace
import math
import warnings

import numpy as np

from .units import H_UEV_PER_GHZ, energy_to_frequency

TWO_PI = 2 * math.pi


class NoResonanceError(ValueError):
    """Qubit gap at or above the cavity: no detuning brings them into resonance."""


@dataclass(frozen=True)
class QubitParams:
    """One DQD charge qubit.

    epsilon in ueV, tc is the gap 2t_c/h in GHz, gamma_c and g_c are rate/2pi in Hz.
    """

    epsilon: float = 0.0
    tc: float = 6.2
    gamma_c: float = 36e6
    g_c: float = 50e6

    def __post_init__(self):
        if not self.tc > 0:
            raise ValueError("tc must be positive")
        if self.gamma_c < 0 or self.g_c < 0:
            raise ValueError("gamma_c and g_c must be non-negative")


@dataclass(frozen=True)
class CavityParams:
    """f_c and kappa (= kappa/2pi, total linewidth) in Hz, Z0 in ohm."""

    f_c: float = 6.8e9
    kappa: float = 1.2e6
    Z0: float = 133.0

    def __post_init__(self):
        if not (self.f_c > 0 and self.kappa > 0 and self.Z0 > 0):
            raise ValueError("f_c, kappa and Z0 must be positive")
        if self.kappa > self.f_c / 100:
            warnings.warn(f"kappa ({self.kappa:.3g} Hz) is not small compared to "
                          f"f_c ({self.f_c:.3g} Hz); single-mode model is suspect",
                          stacklevel=3)


@dataclass(frozen=True)
class SystemParams:
    cavity: CavityParams = field(default_factory=CavityParams)
    qubits: tuple = (QubitParams(),)

    def __post_init__(self):
        qs = tuple(self.qubits)
        if not qs:
            raise ValueError("need at least one qubit")
        object.__setattr__(self, "qubits", qs)

    def with_qubit(self, index=0, **changes):
        qs = list(self.qubits)
        qs[index] = replace(qs[index], **changes)
        return replace(self, qubits=tuple(qs))

    def to_dict(self):
        return {
            "cavity": {"f_c": self.cavity.f_c, "kappa": self.cavity.kappa,
                       "Z0": self.cavity.Z0},
            "qubits": [{"epsilon": q.epsilon, "tc": q.tc, "gamma_c": q.gamma_c,
                        "g_c": q.g_c} for q in self.qubits],
        }

    @classmethod
    def from_dict(cls, d):
        cav = CavityParams(**d["cavity"])
        qubits = d["qubits"]
        if isinstance(qubits, dict):
            qubits = [qubits]
        return cls(cav, tuple(QubitParams(**q) for q in qubits))


@dataclass
class ComplexTrace:
    """Complex response sampled along one swept variable."""

    name: str
    unit: str
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.values = np.asarray(self.values, complex)
        if self.x.shape != self.values.shape or self.x.ndim != 1:
            raise ValueError("x and values must be 1-D and the same length")
        dx = np.diff(self.x)
        if len(dx) and not (np.all(dx > 0) or np.all(dx < 0)):
            raise ValueError("sample points must be strictly monotonic")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trace values must be finite")

    def to_csv(self, path):
        from .io import write_csv
        v = self.values
        rows = np.column_stack([self.x, v.real, v.imag, np.abs(v), np.angle(v)])
        write_csv(path, ["sweep_value", "re", "im", "abs", "phase"], rows)

    @classmethod
    def from_csv(cls, path, name="sweep", unit=""):
        from .io import read_csv
        cols = read_csv(path)
        if "re" in cols and "im" in cols:
            vals = cols["re"] + 1j * cols["im"]
        else:
            vals = cols["abs"] * np.exp(1j * cols.get("phase", 0.0))
        return cls(name, unit, cols["sweep_value"], vals)


# -- qubit energetics ---------------------------------------------------------

def dispersion(epsilon, tc):
    """Transition frequency W/h = sqrt(eps^2 + 4 t_c^2)/h in GHz.

    epsilon in ueV, tc = 2t_c/h in GHz.
    """
    if np.any(np.asarray(tc) <= 0):
        raise ValueError("tc must be positive")
    return np.hypot(energy_to_frequency(epsilon), tc)


def resonant_detuning(tc, f_c):
    """Detunings (-eps, +eps) in ueV where the qubit meets the cavity.

    tc in GHz, f_c in Hz.
    """
    f_ghz = f_c / 1e9
    if tc >= f_ghz:
        raise NoResonanceError(f"2t_c/h = {tc} GHz is not below f_c = {f_ghz} GHz; "
                               "the qubit never crosses the cavity")
    eps = H_UEV_PER_GHZ * math.sqrt(f_ghz ** 2 - tc ** 2)
    return -eps, eps


def effective_coupling(q):
    """g_eff/2pi = g_c * (2t_c / W) in Hz."""
    return q.g_c * q.tc / dispersion(q.epsilon, q.tc)


# -- cavity response ----------------------------------------------------------

def _susceptibility_sum(f, qubits, eps_override=None):
    total = 0j
    for n, q in enumerate(qubits):
        eps = q.epsilon
        if eps_override is not None and n == 0:
            eps = eps_override
        w = dispersion(eps, q.tc) * 1e9
        g = TWO_PI * q.g_c * q.tc * 1e9 / w
        total = total + g * g / (1j * TWO_PI * (w - f) + 0.5 * TWO_PI * q.gamma_c)
    return total


def transmission(f, sys):
    """Complex A/A0 at probe frequency ``f`` (Hz, scalar or array)."""
    f = np.asarray(f, float)
    cav = sys.cavity
    half_k = 0.5 * TWO_PI * cav.kappa
    denom = 1j * TWO_PI * (cav.f_c - f) + half_k + _susceptibility_sum(f, sys.qubits)
    out = half_k / denom
    return out if out.ndim else complex(out)


def transmission_map(f, epsilon, sys, qubit=0):
    """A/A0 over a grid; rows follow ``epsilon`` (ueV), columns follow ``f`` (Hz).

    Only the detuning of qubit ``qubit`` is swept.
    """
    f = np.asarray(f, float)
    epsilon = np.asarray(epsilon, float)
    _check_monotonic(f, "f")
    _check_monotonic(epsilon, "epsilon")
    return response_at(epsilon[:, None], sys, f=f[None, :], qubit=qubit)


def response_at(epsilon, sys, f=None, qubit=0):
    """A/A0 with qubit ``qubit`` at detuning ``epsilon`` (any shape, broadcast with f)."""
    f = sys.cavity.f_c if f is None else f
    qs = list(sys.qubits)
    if qubit:
        qs.insert(0, qs.pop(qubit))
    half_k = 0.5 * TWO_PI * sys.cavity.kappa
    denom = (1j * TWO_PI * (sys.cavity.f_c - np.asarray(f, float)) + half_k
             + _susceptibility_sum(f, qs, eps_override=np.asarray(epsilon, float)))
    return half_k / denom


def _check_monotonic(x, name):
    if x.ndim != 1 or len(x) == 0:
        raise ValueError(f"{name} must be a non-empty 1-D range")
    d = np.diff(x)
    if len(d) and not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError(f"{name} must be strictly monotonic")


def detuning_trace(epsilon, sys, f=None, qubit=0):
    """Transmission at fixed probe frequency (default f_c) versus detuning."""
    f = sys.cavity.f_c if f is None else f
    vals = transmission_map(np.array([f]), epsilon, sys, qubit=qubit)[:, 0]
    return ComplexTrace("epsilon", "ueV", epsilon, vals)


def frequency_trace(f, sys):
    return ComplexTrace("f", "Hz", f, transmission(np.asarray(f, float), sys))


def excited_population(fs, epsilon, q, drive):
    """Steady-state P_e of a qubit driven at ``fs`` (Hz) with Rabi rate ``drive``/2pi (Hz)."""
    if drive < 0:
        raise ValueError("drive must be non-negative")
    w = dispersion(epsilon, q.tc) * 1e9
    delta = TWO_PI * (np.asarray(fs, float) - w)
    rabi = TWO_PI * drive
    y = TWO_PI * q.gamma_c
    return (rabi ** 2 / 4) / (delta ** 2 + y ** 2 / 4 + rabi ** 2 / 2)


def spectroscopy_map(epsilon, fs, sys, drive, qubit=0):
    """Two-tone phase map dphi(eps, f_s) in radians; rows eps, columns f_s.

    dphi = arg A(f_c) * (1 - 2 P_e): a saturated qubit stops pulling the cavity.
    """
    epsilon = np.asarray(epsilon, float)
    fs = np.asarray(fs, float)
    _check_monotonic(epsilon, "epsilon")
    _check_monotonic(fs, "fs")
    base = np.angle(transmission_map(np.array([sys.cavity.f_c]), epsilon, sys,
                                     qubit=qubit)[:, 0])
    q = sys.qubits[qubit]
    pe = excited_population(fs[None, :], epsilon[:, None], q, drive)
    return base[:, None] * (1 - 2 * pe)


def spectroscopy_linecut(fs, sys, drive, qubit=0):
    """f_s linecut at the qubit's own detuning, as |A(f_c)| e^{i dphi}."""
    q = sys.qubits[qubit]
    dphi = spectroscopy_map(np.array([q.epsilon]), fs, sys, drive, qubit=qubit)[0]
    amp = abs(transmission(sys.cavity.f_c, sys))
    return ComplexTrace("f_s", "Hz", fs, amp * np.exp(1j * dphi))


def find_peaks(y):
    """Indices of strict interior local maxima (plateaus count once)."""
    y = np.asarray(y)
    idx = []
    i, n = 1, len(y)
    while i < n - 1:
        if y[i] > y[i - 1]:
            j = i
            while j < n - 1 and y[j + 1] == y[i]:
                j += 1
            if j < n - 1 and y[j + 1] < y[i]:
                idx.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return np.array(idx, int)


def vacuum_rabi_peaks(sys, span=None, resolution=10e3):
    """Peak frequencies (Hz) of |A/A0| from a dense scan around f_c."""
    cav = sys.cavity
    if span is None:
        g = max(effective_coupling(q) for q in sys.qubits)
        span = 4 * g + 20 * cav.kappa
    n = int(round(2 * span / resolution)) + 1
    f = cav.f_c + np.linspace(-span, span, n)
    a = np.abs(transmission(f, sys))
    return f[find_peaks(a)]
