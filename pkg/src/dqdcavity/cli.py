"""Command-line entry point: ``dqdcavity <verb> [--config PATH] [--out DIR] [--seed N]``.

Exit codes: 0 success, 2 configuration error, 3 solver or fit non-convergence.
"""

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import electrostatics as es
from .fitting import (FitError, fit_cavity_lorentzian, fit_detuning_trace,
                      fit_spectroscopy_linewidth)
from .io import read_csv, write_csv, write_json
from .pipelines import (CONVENTIONS, FIGURES, MAP_HEADER, SYSTEM_KEYS, TRACE_HEADER,
                        ConfigError, _map_rows, _trace_rows, barrier_from, layout_from,
                        lever_arms_from, lin, load_config, reproduce, require, system_from)
from .qubit_cavity import (detuning_trace, spectroscopy_map, transmission,
                           transmission_map)
from .scenarios import SweepSpec, stability_map, tc_from_barrier

log = logging.getLogger("dqdcavity")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 2, 3


class NotConverged(RuntimeError):
    pass


def _sidecar(out, verb, args, params, derived, files):
    side = {"command": verb, "seed": args.seed, "conventions": CONVENTIONS,
            "parameters": params, "derived": derived, "files": sorted(files)}
    write_json(os.path.join(out, f"{verb}.json"), side)
    return side


def cmd_levermap(cfg, args):
    layout = layout_from(cfg)
    gates = cfg.get("levermap", {}).get("gates") or [e.name for e in layout.electrodes
                                                     if e.role == "gate"]
    tol = cfg.get("solver", {}).get("tol", 1e-6)
    files, derived = [], {"residual": {}}
    for gate in gates:
        lm = es.solve_lever_arm(layout, gate, tol=tol)
        name = f"levermap_{gate}.csv"
        lm.to_csv(os.path.join(args.out, name))
        files.append(name)
        derived["residual"][gate] = lm.residual
    _sidecar(args.out, "levermap", args, {"layout": layout.to_dict(), "gates": gates,
                                          "tol": tol}, derived, files)


def cmd_transmit(cfg, args):
    require(cfg, "transmit.f", *SYSTEM_KEYS)
    sys_ = system_from(cfg)
    f = lin(cfg["transmit"]["f"])
    A = transmission(f, sys_)
    write_csv(os.path.join(args.out, "transmit.csv"), TRACE_HEADER, _trace_rows(f, A))
    _sidecar(args.out, "transmit", args, {"system": sys_.to_dict(), "f": cfg["transmit"]["f"]},
             {"min_abs": float(np.abs(A).min())}, ["transmit.csv"])


def cmd_sweep(cfg, args):
    require(cfg, "sweep", *SYSTEM_KEYS)
    sw = cfg["sweep"]
    kind = args.kind or sw.get("kind", "map")
    sys_ = system_from(cfg)
    out = args.out
    if kind == "map":
        require(cfg, "sweep.f", "sweep.epsilon")
        f, eps = lin(sw["f"]), lin(sw["epsilon"])
        A = transmission_map(f, eps, sys_)
        E, F = np.meshgrid(eps, f, indexing="ij")
        rows = np.column_stack([F.ravel(), E.ravel(), np.abs(A).ravel(), np.angle(A).ravel()])
        write_csv(os.path.join(out, "sweep_map.csv"), ["f_hz", "epsilon_ueV", "abs", "phase"], rows)
        files = ["sweep_map.csv"]
    elif kind == "detuning":
        require(cfg, "sweep.epsilon")
        eps = lin(sw["epsilon"])
        tr = detuning_trace(eps, sys_, f=sw.get("probe_f"))
        tr.to_csv(os.path.join(out, "sweep_detuning.csv"))
        files = ["sweep_detuning.csv"]
    elif kind == "stability":
        require(cfg, "sweep.p1", "sweep.p2")
        spec = SweepSpec(lin(sw["p1"]), lin(sw["p2"]), dict(sw.get("fixed", {})),
                         dict(sw.get("reference", {})))
        M, cal = lever_arms_from(cfg), barrier_from(cfg)
        missing = [g for g in list(spec.fixed) + list(spec.reference)
                   if g not in M.gates and g != "B2"]
        if missing:
            raise ConfigError(f"sweep refers to gates without lever arms: {missing}", missing)
        eps, A = stability_map(spec, M, cal, sys_)
        write_csv(os.path.join(out, "sweep_stability.csv"), MAP_HEADER, _map_rows(spec, eps, A))
        files = ["sweep_stability.csv"]
    elif kind == "barrier":
        require(cfg, "sweep.epsilon", "sweep.vb2")
        cal = barrier_from(cfg)
        eps, vb2 = lin(sw["epsilon"]), lin(sw["vb2"])
        rows = []
        for v in vb2:
            tc = float(tc_from_barrier(v, cal))
            A = detuning_trace(eps, sys_.with_qubit(0, tc=tc)).values
            rows += [[e, v, tc, abs(a), np.angle(a)] for e, a in zip(eps, A)]
        write_csv(os.path.join(out, "sweep_barrier.csv"),
                  ["epsilon_ueV", "vb2_mV", "tc_GHz", "abs", "phase"], rows)
        files = ["sweep_barrier.csv"]
    else:
        raise ConfigError(f"unknown sweep kind {kind!r}")
    _sidecar(out, "sweep", args, {"system": sys_.to_dict(), "sweep": sw, "kind": kind},
             {}, files)


def cmd_spectroscopy(cfg, args):
    require(cfg, "spectroscopy.epsilon", "spectroscopy.fs", "spectroscopy.drive", *SYSTEM_KEYS)
    sp = cfg["spectroscopy"]
    sys_ = system_from(cfg)
    eps, fs = lin(sp["epsilon"]), lin(sp["fs"])
    dphi = spectroscopy_map(eps, fs, sys_, float(sp["drive"]))
    E, F = np.meshgrid(eps, fs, indexing="ij")
    write_csv(os.path.join(args.out, "spectroscopy_map.csv"), ["epsilon_ueV", "fs_hz", "dphi"],
              np.column_stack([E.ravel(), F.ravel(), dphi.ravel()]))
    _sidecar(args.out, "spectroscopy", args, {"system": sys_.to_dict(), "spectroscopy": sp},
             {}, ["spectroscopy_map.csv"])


def _column(cols, *names):
    for n in names:
        if n in cols:
            return cols[n]
    return None


def cmd_fit(cfg, args):
    if not args.trace:
        raise ConfigError("fit needs --trace CSV", ["--trace"])
    try:
        cols = read_csv(args.trace)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read trace {args.trace}: {exc}") from None
    if not cols:
        raise ConfigError(f"trace {args.trace} has no columns")
    x = next(iter(cols.values()))
    model = args.model
    summary = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if model == "lorentzian":
            y = _column(cols, "power")
            if y is None:
                amp = _column(cols, "abs")
                if amp is None:
                    raise ConfigError("lorentzian fit needs a 'power' or 'abs' column")
                y = amp ** 2
            res = fit_cavity_lorentzian(x, y)
        elif model == "detuning":
            require(cfg, "cavity.f_c", "cavity.kappa")
            y = _column(cols, "abs")
            if y is None:
                raise ConfigError("detuning fit needs an 'abs' column")
            res = fit_detuning_trace(x, y, cfg["cavity"]["f_c"], cfg["cavity"]["kappa"],
                                     fix_gamma=cfg.get("fit", {}).get("fix_gamma"))
        else:
            y = _column(cols, "dphi", "phase")
            if y is None:
                raise ConfigError("spectroscopy fit needs a 'dphi' or 'phase' column")
            res, summary = fit_spectroscopy_linewidth(x, y)
    out = res.to_dict()
    out.update({"model": model, "trace": os.path.basename(args.trace),
                "warnings": [str(w.message) for w in caught]})
    if summary:
        out["linewidth"] = summary
    write_json(os.path.join(args.out, "fit.json"), out)
    if not res.converged:
        raise NotConverged(f"fit did not converge: {res.reason}")


def _unconverged(node):
    if isinstance(node, dict):
        if node.get("converged") is False:
            return True
        return any(_unconverged(v) for v in node.values())
    if isinstance(node, list):
        return any(_unconverged(v) for v in node)
    return False


def cmd_reproduce(cfg, args):
    figs = FIGURES if args.figure == "all" else [args.figure]
    if args.figure != "all" and args.figure not in FIGURES:
        raise ConfigError(f"unknown figure {args.figure!r}; choose from {', '.join(FIGURES)}")
    bad = []
    for fig in figs:
        side = reproduce(fig, cfg, args.out, seed=args.seed)
        if _unconverged(side["derived"]):
            bad.append(fig)
    if bad:
        raise NotConverged(f"fits did not converge in: {', '.join(bad)}")


COMMANDS = {"levermap": cmd_levermap, "transmit": cmd_transmit, "sweep": cmd_sweep,
            "spectroscopy": cmd_spectroscopy, "fit": cmd_fit, "reproduce": cmd_reproduce}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config (default: the packaged reference config)")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic noise")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dqdcavity", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("levermap", parents=[common], help="solve lever-arm maps")
    sub.add_parser("transmit", parents=[common], help="cavity transmission vs frequency")
    sw = sub.add_parser("sweep", parents=[common], help="transmission over a parameter sweep")
    sw.add_argument("--kind", choices=["map", "detuning", "stability", "barrier"])
    sub.add_parser("spectroscopy", parents=[common], help="two-tone phase map")
    fit = sub.add_parser("fit", parents=[common], help="fit a CSV trace")
    fit.add_argument("--trace", metavar="CSV")
    fit.add_argument("--model", choices=["lorentzian", "detuning", "spectroscopy"],
                     default="lorentzian")
    rep = sub.add_parser("reproduce", parents=[common], help="regenerate a figure dataset")
    rep.add_argument("figure", help=f"one of {', '.join(FIGURES)} or 'all'")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.verb](cfg, args)
    except (ConfigError, es.LayoutError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except es.SolverError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (FitError, NotConverged) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
