"""Lever arms from linear electrostatics on a gate layout."""

from .layout import (Electrode, GateLayout, LayoutError, SPLIT_GATE_DOTS,
                     parallel_plate, split_gate, square_box)
from .solver import (LeverArmMap, OUTER_BOUNDARY, PotentialGrid, SolverError,
                     coupling_from_beta, differential_lever_arm, lever_arm_slice,
                     solve_lever_arm, solve_potential)
from .kernels import DEFAULT_BACKEND, BACKENDS

__all__ = [
    "BACKENDS", "DEFAULT_BACKEND", "Electrode", "GateLayout", "LayoutError",
    "LeverArmMap", "OUTER_BOUNDARY", "PotentialGrid", "SPLIT_GATE_DOTS",
    "SolverError", "coupling_from_beta", "differential_lever_arm",
    "lever_arm_slice", "parallel_plate", "solve_lever_arm", "solve_potential",
    "split_gate", "square_box",
]
