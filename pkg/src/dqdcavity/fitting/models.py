"""Model fits for cavity line, detuning traces and spectroscopy linecuts."""

import itertools
import warnings

import numpy as np

from ..qubit_cavity import CavityParams, QubitParams, SystemParams, detuning_trace
from .lm import FitError, FitProblem, FitOptions, levenberg_marquardt

TWO_PI = 2 * np.pi


def lorentzian_power(p, f):
    """a * (k/2)^2 / ((2pi (f - f_c))^2 + (k/2)^2); p = (f_c, kappa, a)."""
    f_c, kappa, a = p
    hk = 0.5 * TWO_PI * kappa
    return a * hk ** 2 / ((TWO_PI * (f - f_c)) ** 2 + hk ** 2)


def _half_max_width(x, y, base=0.0):
    """FWHM of the single peak in y (above ``base``) by linear interpolation."""
    i = int(np.argmax(y))
    half = base + 0.5 * (y[i] - base)
    left = i
    while left > 0 and y[left] > half:
        left -= 1
    right = i
    while right < len(y) - 1 and y[right] > half:
        right += 1

    def cross(j0, j1):
        y0, y1 = y[j0], y[j1]
        if y1 == y0:
            return x[j0]
        return x[j0] + (half - y0) * (x[j1] - x[j0]) / (y1 - y0)

    return abs(cross(right - 1, right) - cross(left + 1, left)), i


def fit_cavity_lorentzian(f, power, options=None):
    """Fit |A/A0|^2 versus f (Hz). Returns the FitResult (f_c, kappa, a).

    kappa is the FWHM in Hz, i.e. kappa/2pi.
    """
    f = np.asarray(f, float)
    power = np.asarray(power, float)
    if len(f) < 4 or np.ptp(power) <= 1e-12 * max(np.max(np.abs(power)), 1e-300):
        raise FitError("trace has no variation to fit")
    i = int(np.argmax(power))
    if i == 0 or i == len(f) - 1:
        raise FitError("peak is not inside the frequency range",
                       f_peak=float(f[i]))
    base = float(np.min(power))
    fwhm, _ = _half_max_width(f, power, base)
    if fwhm <= 0:
        raise FitError("could not estimate the linewidth")
    if np.ptp(f) < 3 * fwhm:
        warnings.warn("trace spans fewer than 3 linewidths; kappa is poorly constrained",
                      stacklevel=2)
    p0 = [f[i], fwhm, power[i]]
    prob = FitProblem(lorentzian_power, f, power, p0,
                      lower=[f.min(), 0.0, 0.0], upper=[f.max(), np.inf, np.inf],
                      names=["f_c", "kappa", "amplitude"],
                      scale=[fwhm, fwhm, power[i]],
                      options=options or FitOptions())
    return levenberg_marquardt(prob)


def _detuning_model(f_c, kappa):
    cav = CavityParams(f_c, kappa)

    def model(p, eps):
        tc, g_c, gamma_c = p
        q = QubitParams(0.0, tc, gamma_c, g_c)
        return np.abs(detuning_trace(eps, SystemParams(cav, (q,))).values)

    return model


def fit_detuning_trace(epsilon, amplitude, f_c, kappa, p0=None, fix_gamma=None,
                       options=None):
    """Fit |A/A0| at f = f_c versus detuning (ueV) for (tc [GHz], g_c, gamma_c [Hz]).

    ``f_c`` and ``kappa`` come from the bare-cavity fit. Pass ``fix_gamma``
    (Hz) to hold gamma_c at a spectroscopy value instead of floating it.
    Without ``p0`` the start point is the best of a coarse grid search.
    """
    eps = np.asarray(epsilon, float)
    amp = np.asarray(amplitude, float)
    if not (eps.min() <= 0 <= eps.max()):
        raise FitError("detuning trace must cover epsilon = 0")
    model = _detuning_model(f_c, kappa)
    f_ghz = f_c / 1e9
    if p0 is None:
        p0 = _grid_start(model, eps, amp, f_ghz, fix_gamma)
    p0 = np.array(p0, float)
    lower = np.array([1e-3, 0.0, 0.0])
    upper = np.array([10 * f_ghz, 2e9, 5e9])
    if fix_gamma is not None:
        p0[2] = lower[2] = upper[2] = fix_gamma
    prob = FitProblem(model, eps, amp, p0, lower=lower, upper=upper,
                      names=["tc", "g_c", "gamma_c"],
                      scale=[1.0, 1e7, 1e7], options=options or FitOptions())
    res = levenberg_marquardt(prob)
    if res.at_bound:
        warnings.warn(f"parameters at bound: {res.at_bound}", stacklevel=2)
    return res


def _grid_start(model, eps, amp, f_ghz, fix_gamma):
    tcs = f_ghz * np.linspace(0.5, 1.5, 51)
    gs = [10e6, 30e6, 60e6, 100e6, 200e6]
    gammas = [fix_gamma] if fix_gamma is not None else [10e6, 30e6, 60e6, 150e6]
    best, best_p = np.inf, None
    for p in itertools.product(tcs, gs, gammas):
        r = model(p, eps) - amp
        s = float(r @ r)
        if s < best:
            best, best_p = s, p
    return best_p


def dip_lorentzian(p, f):
    """base - depth / (1 + ((f - center)/(fwhm/2))^2)."""
    center, fwhm, depth, base = p
    return base - depth / (1 + ((f - center) / (0.5 * fwhm)) ** 2)


def fit_spectroscopy_linewidth(fs, dphi, options=None):
    """Lorentzian fit of a two-tone phase linecut dphi(f_s).

    Returns (result, summary). ``summary['fwhm']`` is the fitted linewidth in
    Hz. The saturated fraction 2 P_e = depth/base measured from the line
    itself gives the power-broadening correction
    gamma_c = fwhm * sqrt(1 - 2 P_e); ``power_broadened`` is set when that
    correction exceeds 1 %.
    """
    fs = np.asarray(fs, float)
    y = np.asarray(dphi, float)
    if len(fs) < 5:
        raise FitError("linecut too short")
    # orient so the resonance is a dip below the baseline
    base0 = float(np.median(np.concatenate([y[:len(y) // 10 + 1], y[-(len(y) // 10 + 1):]])))
    sign = 1.0 if base0 >= 0 else -1.0
    ys = sign * y
    b = sign * base0
    dev = b - ys
    i = int(np.argmax(dev))
    if dev[i] <= 1e-9 * max(abs(b), 1e-300) or i == 0 or i == len(fs) - 1:
        raise FitError("no resonance found in the linecut")
    fwhm0, _ = _half_max_width(fs, dev)
    p0 = [fs[i], max(fwhm0, abs(fs[1] - fs[0])), dev[i], b]
    prob = FitProblem(dip_lorentzian, fs, ys, p0,
                      lower=[fs.min(), 0.0, 0.0, -np.inf], upper=[fs.max(), np.inf, np.inf, np.inf],
                      names=["center", "fwhm", "depth", "base"],
                      scale=[p0[1], p0[1], p0[2], abs(b) or 1.0],
                      options=options or FitOptions())
    res = levenberg_marquardt(prob)
    fwhm = res.params["fwhm"]
    sat = res.params["depth"] / res.params["base"] if res.params["base"] else np.nan
    sat = float(np.clip(sat, 0.0, 1.0 - 1e-12))
    gamma = fwhm * np.sqrt(1.0 - sat)
    broadened = bool(1.0 - np.sqrt(1.0 - sat) > 0.01)
    if broadened:
        warnings.warn(f"line is power broadened (saturation {sat:.3f}); FWHM "
                      f"{fwhm / 1e6:.2f} MHz exceeds gamma_c {gamma / 1e6:.2f} MHz",
                      stacklevel=2)
    summary = {"center": res.params["center"], "fwhm": fwhm,
               "fwhm_stderr": res.stderr["fwhm"], "saturation": sat,
               "gamma_c": float(gamma), "power_broadened": broadened}
    return res, summary
