"""Laplace solves for unit-voltage gate responses and what follows from them."""

from dataclasses import dataclass
import logging
import math

import numpy as np

from ..units import E_CHARGE, HBAR
from .kernels import get_backend
from .layout import LayoutError

log = logging.getLogger(__name__)

OUTER_BOUNDARY = "<boundary>"


class SolverError(RuntimeError):
    """SOR did not reach the requested tolerance."""

    def __init__(self, msg, residual, iterations):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


@dataclass
class PotentialGrid:
    """Dimensionless potential on the full grid, with its Dirichlet data."""

    shape: tuple
    spacing: float
    values: np.ndarray     # shape == self.shape
    fixed: np.ndarray      # bool mask of Dirichlet nodes
    boundary_values: np.ndarray  # Dirichlet values where fixed, 0 elsewhere
    residual: float
    iterations: int
    history: list


@dataclass(frozen=True)
class LeverArmMap:
    """alpha_g(x, y) on the well plane for one gate."""

    gate: str
    x: np.ndarray          # nm
    y: np.ndarray          # nm
    alpha: np.ndarray      # shape (len(x), len(y))
    residual: float

    def __post_init__(self):
        self.alpha.setflags(write=False)

    def _locate(self, coord, axis_vals, name):
        n = len(axis_vals)
        if n == 1:
            if abs(coord - axis_vals[0]) > 1e-9:
                raise ValueError(f"{name}={coord} nm is off the (degenerate) plane")
            return 0, 0, 0.0
        lo, hi = axis_vals[0], axis_vals[-1]
        if not lo - 1e-9 <= coord <= hi + 1e-9:
            raise ValueError(f"{name}={coord} nm outside the plane [{lo}, {hi}]")
        h = axis_vals[1] - axis_vals[0]
        t = (min(max(coord, lo), hi) - lo) / h
        i = min(int(math.floor(t)), n - 2)
        return i, i + 1, t - i

    def at(self, r):
        """Bilinear interpolation of alpha at r = (x, y) in nm."""
        i0, i1, tx = self._locate(float(r[0]), self.x, "x")
        j0, j1, ty = self._locate(float(r[1]), self.y, "y")
        a = self.alpha
        return float((1 - tx) * (1 - ty) * a[i0, j0] + tx * (1 - ty) * a[i1, j0]
                     + (1 - tx) * ty * a[i0, j1] + tx * ty * a[i1, j1])

    def to_csv(self, path):
        from ..io import write_csv
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        rows = np.column_stack([xx.ravel(), yy.ravel(), self.alpha.ravel()])
        write_csv(path, ["x_nm", "y_nm", "alpha"], rows)


def optimal_omega(shape):
    """Over-relaxation factor from the Jacobi spectral radius of a box."""
    active = [n for n in shape if n > 1]
    if not active:
        return 1.0
    rho = sum(math.cos(math.pi / (n - 1)) for n in active) / len(active)
    return 2.0 / (1.0 + math.sqrt(max(1.0 - rho * rho, 0.0)))


def error_bound_factor(shape):
    """Max-principle bound: |alpha - alpha_exact| <= factor * max defect."""
    active = [n - 1 for n in shape if n > 1]
    if not active:
        return 1.0
    return len(active) * max(active) ** 2 / 4.0


def dirichlet_data(layout, hot):
    """Fixed-node mask and values: 1 on ``hot``, 0 on everything else."""
    fixed = layout.boundary_mask()
    values = np.zeros(layout.shape)
    if hot == OUTER_BOUNDARY:
        values[fixed] = 1.0
    for e in layout.electrodes:
        m = layout.electrode_mask(e.name)
        fixed |= m
        values[m] = 1.0 if e.name == hot else 0.0
    if hot != OUTER_BOUNDARY:
        layout.electrode(hot)  # raises on unknown gate
    return fixed, values


def solve_potential(layout, hot, tol=1e-6, max_iter=None, omega=None,
                    check_every=10, backend=None):
    """Solve Laplace with 1 V on ``hot`` and every other conductor grounded.

    ``hot`` is an electrode name or ``OUTER_BOUNDARY``. Convergence is
    judged on the max-norm stencil defect scaled by the discrete
    maximum-principle bound, so the reported residual bounds the max
    pointwise error against the exact discrete solution.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    kern = get_backend(backend)
    shape = layout.shape
    fixed, bvals = dirichlet_data(layout, hot)
    if max_iter is None:
        max_iter = 200 * max(shape)
    if omega is None:
        omega = optimal_omega(shape)
    scale = error_bound_factor(shape)

    phi = np.ascontiguousarray(bvals.copy())
    fixed_u8 = np.ascontiguousarray(fixed.astype(np.uint8))
    history = []
    it = 0
    residual = scale * kern.max_defect(phi, fixed_u8)
    history.append(residual)
    while residual > tol and it < max_iter:
        n = min(check_every, max_iter - it)
        kern.rb_sweeps(phi, fixed_u8, omega, n)
        it += n
        residual = scale * kern.max_defect(phi, fixed_u8)
        history.append(residual)
    if residual > tol:
        raise SolverError(f"SOR stalled at residual {residual:.3e} after {it} "
                          f"sweeps (tol {tol:.1e})", residual, it)
    log.debug("solved %s on %s grid: %d sweeps, residual %.2e", hot, shape, it, residual)
    return PotentialGrid(shape, layout.spacing, phi, fixed, bvals, residual, it, history)


def plane_of(layout, grid):
    """Slice the well plane out of a full-grid potential."""
    k = layout.plane_index if layout.shape[2] > 1 else 0
    return grid.values[:, :, k].copy()


def solve_lever_arm(layout, gate, tol=1e-6, max_iter=None, backend=None):
    """Lever-arm map of ``gate`` on the well plane."""
    grid = solve_potential(layout, gate, tol=tol, max_iter=max_iter, backend=backend)
    return LeverArmMap(gate, layout.axis(0), layout.axis(1),
                       plane_of(layout, grid), grid.residual)


def differential_lever_arm(lmap, r1, r2):
    """beta = alpha(r1) - alpha(r2), dimensionless."""
    return lmap.at(r1) - lmap.at(r2)


def lever_arm_slice(lmap, start, end, n):
    """n equally spaced interpolated samples from ``start`` to ``end``.

    Returns (distance_nm, alpha).
    """
    if n < 2:
        raise ValueError("need n >= 2 samples")
    start = np.asarray(start, float)
    end = np.asarray(end, float)
    t = np.linspace(0.0, 1.0, n)
    pts = start + t[:, None] * (end - start)
    alpha = np.array([lmap.at(p) for p in pts])
    return t * np.linalg.norm(end - start), alpha


def coupling_from_beta(beta, f_c, Z0):
    """g_c/2pi in Hz for a differential lever arm beta.

    g_c/2pi = (e beta / 2) f_c sqrt(Z0 / (pi hbar)), f_c in Hz, Z0 in ohm.
    """
    if f_c <= 0 or Z0 <= 0:
        raise ValueError("f_c and Z0 must be positive")
    return E_CHARGE * beta / 2.0 * f_c * math.sqrt(Z0 / (math.pi * HBAR))


def lever_arm_at(layout, gate, points, tol=1e-6, backend=None):
    """alpha of ``gate`` at several well-plane points (one solve)."""
    lmap = solve_lever_arm(layout, gate, tol=tol, backend=backend)
    return [lmap.at(p) for p in points]


__all__ = [
    "LayoutError", "LeverArmMap", "OUTER_BOUNDARY", "PotentialGrid", "SolverError",
    "coupling_from_beta", "differential_lever_arm", "lever_arm_slice",
    "solve_lever_arm", "solve_potential",
]
