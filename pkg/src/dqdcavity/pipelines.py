"""Figure-reproduction pipelines driven by one JSON config.

Every pipeline writes CSV data plus a ``<figure>.json`` sidecar with the
parameters used, model conventions and derived numbers.
"""

from importlib import resources
import json
import math
import os

import numpy as np

from . import electrostatics as es
from .fitting import fit_cavity_lorentzian, fit_detuning_trace, fit_spectroscopy_linewidth
from .io import write_csv, write_json
from .qubit_cavity import (NoResonanceError, SystemParams, detuning_trace, dispersion,
                           effective_coupling, find_peaks, resonant_detuning,
                           spectroscopy_map, transmission, transmission_map,
                           vacuum_rabi_peaks)
from .scenarios import (BarrierCalibration, LeverArmMatrix, SweepSpec, cp_compensation,
                        stability_map, tc_from_barrier, transition_slope)

FIGURES = ("fig1c", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c")

CONVENTIONS = {
    "frequency": "Hz (qubit gaps 2t_c/h and transition frequencies in GHz)",
    "rates": "kappa, gamma_c, g_c reported as rate/2pi in Hz",
    "energy": "detuning epsilon in ueV",
    "voltage": "mV",
    "length": "nm",
    "transmission": "A/A0 = (k/2)/(i 2pi(f_c-f) + k/2 + sum g_eff^2/(i 2pi(W-f) + y/2))",
    "coupling_vs_detuning": "g_eff = g_c * 2t_c / W",
    "spectroscopy": "dphi = arg A(f_c) * (1 - 2 P_e), steady-state saturation",
}


class ConfigError(ValueError):
    def __init__(self, msg, missing=()):
        super().__init__(msg)
        self.missing = list(missing)


def default_config():
    text = resources.files("dqdcavity").joinpath("data/default_config.json").read_text()
    return json.loads(text)


def load_config(path=None):
    if path is None:
        return default_config()
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


def _get(cfg, path):
    node = cfg
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise KeyError(path)
        node = node[key]
    return node


def require(cfg, *paths):
    missing = []
    for p in paths:
        try:
            _get(cfg, p)
        except KeyError:
            missing.append(p)
    if missing:
        raise ConfigError("config is missing: " + ", ".join(missing), missing)


def lin(spec):
    a, b, n = spec
    return np.linspace(float(a), float(b), int(n))


SYSTEM_KEYS = ("cavity.f_c", "cavity.kappa", "qubits")


def system_from(cfg):
    require(cfg, *SYSTEM_KEYS)
    try:
        return SystemParams.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad cavity/qubit parameters: {exc}") from None


def barrier_from(cfg):
    require(cfg, "barrier")
    b = cfg["barrier"]
    if "anchors" in b:
        (v1, g1), (v2, g2) = b["anchors"]
        return BarrierCalibration.from_anchors(v1, g1, v2, g2)
    try:
        return BarrierCalibration(b["v_ref"], b["gap_ref"], b["v_scale"])
    except KeyError as exc:
        raise ConfigError(f"barrier needs anchors or v_ref/gap_ref/v_scale; missing "
                          f"{exc.args[0]}", [f"barrier.{exc.args[0]}"]) from None


def lever_arms_from(cfg):
    require(cfg, "lever_arms.gates", "lever_arms.alpha")
    return LeverArmMatrix.from_dict(cfg["lever_arms"])


def layout_from(cfg):
    require(cfg, "layout")
    lay = cfg["layout"]
    if "preset" in lay:
        presets = {"split_gate": es.split_gate, "parallel_plate": es.parallel_plate,
                   "square_box": es.square_box}
        try:
            fn = presets[lay["preset"]]
        except KeyError:
            raise ConfigError(f"unknown layout preset {lay['preset']!r}") from None
        kw = {"spacing": lay["spacing"]} if "spacing" in lay else {}
        return fn(**kw)
    if "path" in lay:
        return es.GateLayout.from_json(lay["path"])
    return es.GateLayout.from_dict(lay)


def _trace_rows(x, values):
    return np.column_stack([x, values.real, values.imag, np.abs(values), np.angle(values)])


TRACE_HEADER = ["sweep_value", "re", "im", "abs", "phase"]


# -- figure 1 -----------------------------------------------------------------

def fig1c(cfg, out, rng):
    require(cfg, "figures.fig1c.gates", "figures.fig1c.center", "figures.fig1c.dot_separation",
            "figures.fig1c.slice_length", "figures.fig1c.slices", "figures.fig1c.n_samples",
            "layout", "cavity.f_c", "cavity.Z0")
    fc = cfg["figures"]["fig1c"]
    layout = layout_from(cfg)
    tol = cfg.get("solver", {}).get("tol", 1e-6)
    center = np.array(fc["center"], float)
    sep = float(fc["dot_separation"])
    length = float(fc["slice_length"])
    n = int(fc["n_samples"])
    f_c, Z0 = cfg["cavity"]["f_c"], cfg["cavity"]["Z0"]

    files, derived = [], {"beta": {}, "g_c_hz": {}, "residual": {}}
    maps = {}
    for gate in fc["gates"]:
        lm = es.solve_lever_arm(layout, gate, tol=tol)
        maps[gate] = lm
        derived["residual"][gate] = lm.residual
        name = f"fig1b_alpha_{gate}.csv"
        lm.to_csv(os.path.join(out, name))
        files.append(name)

    def dots(angle):
        u = np.array([math.cos(math.radians(angle)), math.sin(math.radians(angle))])
        return center - 0.5 * sep * u, center + 0.5 * sep * u, u

    cols, header = [], ["distance_nm"]
    for label, angle in fc["slices"].items():
        d1, d2, u = dots(angle)
        start, end = center - 0.5 * length * u, center + 0.5 * length * u
        for gate, lm in maps.items():
            dist, alpha = es.lever_arm_slice(lm, start, end, n)
            if not cols:
                cols.append(dist)
            cols.append(alpha)
            header.append(f"alpha_{gate}_{label}")
            beta = es.differential_lever_arm(lm, d2, d1)
            derived["beta"][f"{gate}_{label}"] = beta
            derived["g_c_hz"][f"{gate}_{label}"] = es.coupling_from_beta(beta, f_c, Z0)
    write_csv(os.path.join(out, "fig1c_slices.csv"), header, np.column_stack(cols))
    files.append("fig1c_slices.csv")

    angles = fc.get("orientation_scan_deg", [])
    if angles:
        rows = []
        for angle in angles:
            d1, d2, _ = dots(angle)
            row = [angle]
            for gate, lm in maps.items():
                beta = es.differential_lever_arm(lm, d2, d1)
                row += [beta, es.coupling_from_beta(beta, f_c, Z0)]
            rows.append(row)
        hdr = ["angle_deg"] + [c for g in maps for c in (f"beta_{g}", f"g_c_{g}_hz")]
        write_csv(os.path.join(out, "fig1c_orientation.csv"), hdr, rows)
        files.append("fig1c_orientation.csv")
    derived["note"] = "illustrative geometry, not a measured device"
    return ({"fig1c": fc, "layout": layout.to_dict(),
            "cavity": cfg["cavity"], "tol": tol}, derived, files)


# -- figure 2 -----------------------------------------------------------------

def _sweep_spec(fc):
    return SweepSpec(lin(fc["p1"]), lin(fc["p2"]), dict(fc.get("fixed", {})),
                     dict(fc.get("reference", {})))


def _stability(cfg, fc, spec):
    sys = system_from(cfg)
    if "g_c" in fc:
        sys = sys.with_qubit(0, g_c=fc["g_c"])
    M = lever_arms_from(cfg)
    cal = barrier_from(cfg)
    eps, A = stability_map(spec, M, cal, sys)
    return M, cal, sys, eps, A


def _map_rows(spec, eps, A):
    V1, V2 = np.meshgrid(spec.p1, spec.p2, indexing="ij")
    return np.column_stack([V1.ravel(), V2.ravel(), eps.ravel(), np.abs(A).ravel(),
                            np.angle(A).ravel()])


MAP_HEADER = ["v_p1_mV", "v_p2_mV", "epsilon_ueV", "abs", "phase"]


def _measured_slope(spec, A):
    """Least-squares slope of the min-|A| locus, one point per P1 column."""
    a = np.abs(A)
    idx = a.argmin(axis=1)
    inside = (idx > 0) & (idx < len(spec.p2) - 1)
    if inside.sum() < 2:
        return None
    return float(np.polyfit(spec.p1[inside], spec.p2[idx[inside]], 1)[0])


def fig2a(cfg, out, rng):
    require(cfg, "figures.fig2a.p1", "figures.fig2a.p2", "lever_arms", "barrier",
            *SYSTEM_KEYS)
    fc = cfg["figures"]["fig2a"]
    spec = _sweep_spec(fc)
    M, cal, sys, eps, A = _stability(cfg, fc, spec)
    write_csv(os.path.join(out, "fig2a_map.csv"), MAP_HEADER, _map_rows(spec, eps, A))
    derived = {"tc_GHz": float(tc_from_barrier(spec.fixed.get("B2", cal.v_ref), cal)),
               "slope_expected": transition_slope(M),
               "slope_measured": _measured_slope(spec, A),
               "min_abs": float(np.abs(A).min()),
               "lever_arms_note": "illustrative, from the reference split-gate layout"}
    return ({"fig2a": fc, "lever_arms": M.to_dict(),
            "system": sys.to_dict()}, derived, ["fig2a_map.csv"])


def fig2b(cfg, out, rng):
    require(cfg, "figures.fig2b.p1", "figures.fig2b.p2", "figures.fig2b.cp_step",
            "lever_arms", "barrier", *SYSTEM_KEYS)
    fc = cfg["figures"]["fig2b"]
    base = _sweep_spec(fc)
    M = lever_arms_from(cfg)
    step = float(fc["cp_step"])
    dP1, dP2 = cp_compensation(step, M)
    cp0 = base.fixed.get("CP", base.reference.get("CP", 0.0))
    spec = base.shifted(dP1, dP2, CP=cp0 + step)
    _, cal, sys, eps, A = _stability(cfg, fc, spec)
    _, _, _, eps0, A0 = _stability(cfg, fc, base)
    write_csv(os.path.join(out, "fig2b_map.csv"), MAP_HEADER, _map_rows(spec, eps, A))
    derived = {"compensation_mV": {"P1": dP1, "P2": dP2},
               "v_cp_mV": cp0 + step,
               "p2_more_affected": abs(dP2) > abs(dP1),
               "max_window_epsilon_change_ueV": float(np.abs(eps - eps0).max()),
               "max_window_abs_change": float(np.abs(np.abs(A) - np.abs(A0)).max()),
               "slope_expected": transition_slope(M),
               "slope_measured": _measured_slope(spec, A)}
    return ({"fig2b": fc, "lever_arms": M.to_dict(),
            "system": sys.to_dict()}, derived, ["fig2b_map.csv"])


def fig2c(cfg, out, rng):
    require(cfg, "figures.fig2c.epsilon", "figures.fig2c.vb2", "barrier", *SYSTEM_KEYS)
    fc = cfg["figures"]["fig2c"]
    eps = lin(fc["epsilon"])
    vb2 = lin(fc["vb2"])
    cal = barrier_from(cfg)
    sys = system_from(cfg)
    if "g_c" in fc:
        sys = sys.with_qubit(0, g_c=fc["g_c"])
    rows, regimes = [], []
    for v in vb2:
        tc = float(tc_from_barrier(v, cal))
        A = detuning_trace(eps, sys.with_qubit(0, tc=tc)).values
        a = np.abs(A)
        dips = find_peaks(-a)
        regimes.append({"vb2_mV": float(v), "tc_GHz": tc, "n_dips": len(dips),
                        "dip_epsilon_ueV": eps[dips].tolist(),
                        "regime": "crossing" if tc < sys.cavity.f_c / 1e9 else "dispersive",
                        "min_abs": float(a.min())})
        for e, val in zip(eps, A):
            rows.append([e, v, tc, abs(val), np.angle(val)])
    write_csv(os.path.join(out, "fig2c_map.csv"),
              ["epsilon_ueV", "vb2_mV", "tc_GHz", "abs", "phase"], rows)
    return ({"fig2c": fc, "system": sys.to_dict(),
            "barrier": cal.__dict__}, {"rows": regimes}, ["fig2c_map.csv"])


def fig2d(cfg, out, rng):
    require(cfg, "figures.fig2d.epsilon", "figures.fig2d.vb2", "barrier", *SYSTEM_KEYS)
    fc = cfg["figures"]["fig2d"]
    eps = lin(fc["epsilon"])
    cal = barrier_from(cfg)
    sys = system_from(cfg)
    if "g_c" in fc:
        sys = sys.with_qubit(0, g_c=fc["g_c"])
    noise = float(fc.get("noise", 0.0))
    files, fits = [], []
    for v in fc["vb2"]:
        tc = float(tc_from_barrier(v, cal))
        s = sys.with_qubit(0, tc=tc)
        A = detuning_trace(eps, s).values
        amp = np.abs(A) + noise * rng.standard_normal(len(eps))
        noisy = amp * np.exp(1j * np.angle(A))
        name = f"fig2d_trace_{v:g}mV.csv"
        write_csv(os.path.join(out, name), TRACE_HEADER, _trace_rows(eps, noisy))
        files.append(name)
        res = fit_detuning_trace(eps, amp, s.cavity.f_c, s.cavity.kappa)
        truth = {"tc": tc, "g_c": s.qubits[0].g_c, "gamma_c": s.qubits[0].gamma_c}
        fits.append({"vb2_mV": v, "truth": truth, "fit": res.to_dict(),
                     "within_3_sigma": {k: bool(abs(res.params[k] - truth[k])
                                                <= 3 * res.stderr[k]) for k in truth}})
    return ({"fig2d": fc, "system": sys.to_dict(),
            "barrier": cal.__dict__}, {"fits": fits}, files)


# -- figure 3 -----------------------------------------------------------------

def fig3a(cfg, out, rng):
    require(cfg, "figures.fig3a.f", *SYSTEM_KEYS)
    fc = cfg["figures"]["fig3a"]
    sys = system_from(cfg).with_qubit(0, g_c=0.0)
    f = lin(fc["f"])
    noise = float(fc.get("noise", 0.0))
    power = np.abs(transmission(f, sys)) ** 2 + noise * rng.standard_normal(len(f))
    write_csv(os.path.join(out, "fig3a_power.csv"), ["f_hz", "power"],
              np.column_stack([f, power]))
    res = fit_cavity_lorentzian(f, power)
    kappa = sys.cavity.kappa
    derived = {"fit": res.to_dict(), "kappa_true_hz": kappa,
               "kappa_rel_error": abs(res.params["kappa"] - kappa) / kappa}
    return ({"fig3a": fc, "cavity": cfg["cavity"]}, derived,
            ["fig3a_power.csv"])


def fig3b(cfg, out, rng):
    require(cfg, "figures.fig3b.epsilon", "figures.fig3b.fs", "figures.fig3b.drive",
            *SYSTEM_KEYS)
    fc = cfg["figures"]["fig3b"]
    sys = system_from(cfg).with_qubit(0, epsilon=0.0)
    eps, fs = lin(fc["epsilon"]), lin(fc["fs"])
    drive = float(fc["drive"])
    dphi = spectroscopy_map(eps, fs, sys, drive)
    E, F = np.meshgrid(eps, fs, indexing="ij")
    write_csv(os.path.join(out, "fig3b_map.csv"), ["epsilon_ueV", "fs_hz", "dphi"],
              np.column_stack([E.ravel(), F.ravel(), dphi.ravel()]))
    files = ["fig3b_map.csv"]
    # ridge = strongest departure from the undriven phase, where it lies in the window
    expected = dispersion(eps, sys.qubits[0].tc) * 1e9
    seen = (expected > fs.min()) & (expected < fs.max())
    ridge = fs[np.abs(dphi - dphi[:, :1]).argmax(axis=1)]
    derived = {"ridge_max_deviation_hz": float(np.abs(ridge - expected)[seen].max())
               if seen.any() else None,
               "fs_step_hz": float(fs[1] - fs[0])}
    if "linecut_fs" in fc:
        fl = lin(fc["linecut_fs"])
        cut = spectroscopy_map(np.array([0.0]), fl, sys, drive)[0]
        cut = cut + float(fc.get("noise", 0.0)) * rng.standard_normal(len(fl))
        write_csv(os.path.join(out, "fig3b_linecut.csv"), ["fs_hz", "dphi"],
                  np.column_stack([fl, cut]))
        files.append("fig3b_linecut.csv")
        res, summary = fit_spectroscopy_linewidth(fl, cut)
        derived.update({"linecut_fit": res.to_dict(), "linewidth": summary,
                        "gamma_c_true_hz": sys.qubits[0].gamma_c,
                        "center_expected_hz": float(dispersion(0.0, sys.qubits[0].tc) * 1e9)})
    return ({"fig3b": fc, "system": sys.to_dict()}, derived, files)


# reference value for the resonant detuning at 2t_c/h = 6.2 GHz, f_c = 6.8 GHz
REFERENCE_RESONANT_DETUNING_UEV = 11.7


def fig3c(cfg, out, rng):
    require(cfg, "figures.fig3c.f", "figures.fig3c.epsilon", *SYSTEM_KEYS)
    fc = cfg["figures"]["fig3c"]
    sys = system_from(cfg)
    if "g_c" in fc:
        sys = sys.with_qubit(0, g_c=fc["g_c"])
    f, eps = lin(fc["f"]), lin(fc["epsilon"])
    A = transmission_map(f, eps, sys)
    E, F = np.meshgrid(eps, f, indexing="ij")
    write_csv(os.path.join(out, "fig3c_map.csv"), ["f_hz", "epsilon_ueV", "abs", "phase"],
              np.column_stack([F.ravel(), E.ravel(), np.abs(A).ravel(), np.angle(A).ravel()]))
    q = sys.qubits[0]
    derived = {}
    try:
        lo, hi = resonant_detuning(q.tc, sys.cavity.f_c)
        at_res = sys.with_qubit(0, epsilon=hi)
        peaks = vacuum_rabi_peaks(at_res, resolution=float(fc.get("peak_resolution", 10e3)))
        g_eff = effective_coupling(at_res.qubits[0])
        derived = {
            "resonant_detuning_ueV": [lo, hi],
            "reference_value_ueV": REFERENCE_RESONANT_DETUNING_UEV,
            "relative_difference": abs(hi - REFERENCE_RESONANT_DETUNING_UEV) / REFERENCE_RESONANT_DETUNING_UEV,
            "peaks_hz": peaks.tolist(),
            "splitting_hz": float(peaks[-1] - peaks[0]) if len(peaks) >= 2 else None,
            "g_eff_hz": g_eff,
        }
    except NoResonanceError as exc:
        derived = {"resonant_detuning_ueV": None, "note": str(exc)}
    return ({"fig3c": fc, "system": sys.to_dict()}, derived,
            ["fig3c_map.csv"])


PIPELINES = {"fig1c": fig1c, "fig2a": fig2a, "fig2b": fig2b, "fig2c": fig2c,
             "fig2d": fig2d, "fig3a": fig3a, "fig3b": fig3b, "fig3c": fig3c}


def reproduce(figure_id, cfg, out, seed=0):
    """Run one figure pipeline; returns its sidecar dict."""
    if figure_id not in PIPELINES:
        raise ConfigError(f"unknown figure {figure_id!r}; choose from {FIGURES}")
    os.makedirs(out, exist_ok=True)
    rng = np.random.default_rng(seed)
    used, derived, files = PIPELINES[figure_id](cfg, out, rng)
    side = {"figure": figure_id, "seed": seed, "conventions": CONVENTIONS,
            "parameters": used, "derived": derived, "files": sorted(files)}
    write_json(os.path.join(out, f"{figure_id}.json"), side)
    return side
