"""Compare the compiled and numpy SOR kernels on the split-gate layout.

    python benchmarks/bench_sor.py [--spacing 10] [--sweeps 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from dqdcavity.electrostatics import split_gate
from dqdcavity.electrostatics.kernels import BACKENDS
from dqdcavity.electrostatics.solver import dirichlet_data, optimal_omega


def time_backend(kern, phi0, fixed, omega, sweeps, repeat):
    best = np.inf
    for _ in range(repeat):
        phi = phi0.copy()
        t0 = time.perf_counter()
        kern.rb_sweeps(phi, fixed, omega, sweeps)
        best = min(best, time.perf_counter() - t0)
    return best, phi


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spacing", type=float, default=10.0)
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    layout = split_gate(spacing=args.spacing)
    fixed, vals = dirichlet_data(layout, "CP")
    fixed = np.ascontiguousarray(fixed.astype(np.uint8))
    phi0 = np.ascontiguousarray(vals)
    omega = optimal_omega(layout.shape)
    nodes = int(np.prod(layout.shape))
    print(f"grid {layout.shape} ({nodes} nodes), {args.sweeps} sweeps, best of {args.repeat}")

    results = {}
    for name, kern in sorted(BACKENDS.items()):
        t, phi = time_backend(kern, phi0, fixed, omega, args.sweeps, args.repeat)
        results[name] = (t, phi)
        rate = nodes * args.sweeps / t / 1e6
        print(f"  {name:9s} {t:8.4f} s   {rate:8.1f} Mnode-updates/s")
    if "compiled" in results:
        t_c, phi_c = results["compiled"]
        t_p, phi_p = results["python"]
        print(f"  speedup   {t_p / t_c:8.1f}x   max |diff| {np.abs(phi_c - phi_p).max():.2e}")
    else:
        print("  compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
