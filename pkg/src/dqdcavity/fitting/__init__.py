"""Least-squares engine and the figure-specific fits built on it."""

from .lm import FitError, FitOptions, FitProblem, FitResult, jacobian, levenberg_marquardt
from .models import (dip_lorentzian, fit_cavity_lorentzian, fit_detuning_trace,
                     fit_spectroscopy_linewidth, lorentzian_power)

__all__ = [
    "FitError", "FitOptions", "FitProblem", "FitResult", "dip_lorentzian",
    "fit_cavity_lorentzian", "fit_detuning_trace", "fit_spectroscopy_linewidth",
    "jacobian", "levenberg_marquardt", "lorentzian_power",
]
