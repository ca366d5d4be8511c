"""Gate-voltage space: barrier tuning of t_c, plunger/CP lever arms, stability maps."""

from dataclasses import dataclass, field
import math

import numpy as np

from .qubit_cavity import response_at

# e * 1 mV = 1000 ueV
UEV_PER_MV = 1000.0


@dataclass(frozen=True)
class BarrierCalibration:
    """2t_c/h = gap_ref * exp((V_B2 - v_ref) / v_scale); voltages in mV, gap in GHz."""

    v_ref: float
    gap_ref: float
    v_scale: float

    def __post_init__(self):
        if not (math.isfinite(self.v_scale) and self.v_scale != 0):
            raise ValueError("v_scale must be finite and non-zero")
        if not self.gap_ref > 0:
            raise ValueError("gap_ref must be positive")

    @classmethod
    def from_anchors(cls, v1, gap1, v2, gap2):
        """Exponential through two (voltage, gap) points."""
        return cls(v1, gap1, (v2 - v1) / math.log(gap2 / gap1))


# 2t_c/h = 5.275 GHz at V_B2 = 335 mV and 7.432 GHz at 340 mV
DEFAULT_BARRIER = BarrierCalibration.from_anchors(335.0, 5.275, 340.0, 7.432)


def tc_from_barrier(v_b2, cal=DEFAULT_BARRIER):
    """Qubit gap 2t_c/h in GHz at barrier voltage ``v_b2`` (mV)."""
    return cal.gap_ref * np.exp((np.asarray(v_b2, float) - cal.v_ref) / cal.v_scale)


@dataclass
class LeverArmMatrix:
    """alpha[dot, gate] for dots (1, 2); columns named by ``gates``."""

    gates: tuple
    alpha: np.ndarray

    def __post_init__(self):
        self.gates = tuple(self.gates)
        self.alpha = np.asarray(self.alpha, float)
        if self.alpha.shape != (2, len(self.gates)):
            raise ValueError(f"alpha must be 2 x {len(self.gates)}")
        if np.any(self.alpha < 0) or np.any(self.alpha > 1):
            raise ValueError("lever arms must lie in [0, 1]")

    def col(self, gate):
        try:
            return self.alpha[:, self.gates.index(gate)]
        except ValueError:
            raise KeyError(f"no lever arms for gate {gate!r}") from None

    def to_dict(self):
        return {"gates": list(self.gates), "alpha": self.alpha.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["gates"], d["alpha"])


# Evaluated at the dot positions of the reference split-gate layout (5 nm grid).
# Illustrative: the measured device's lever arms are not known.
DEFAULT_LEVER_ARMS = LeverArmMatrix(
    ("P1", "P2", "CP"),
    [[0.1397, 0.0122, 0.0214],
     [0.0122, 0.1397, 0.1795]],
)


def dot_potentials(dV, M):
    """Shift of each dot level (ueV) for gate changes ``dV`` {gate: mV}."""
    out = np.zeros(2)
    for gate, v in dV.items():
        out = out + M.col(gate) * v
    return UEV_PER_MV * out


def detuning_from_voltages(dV_P1, dV_P2, M, **other):
    """Detuning in ueV from plunger changes in mV (and any other gates as kwargs).

    eps = e * sum_g (alpha_1g - alpha_2g) dV_g.
    """
    eps = (M.col("P1")[0] - M.col("P1")[1]) * np.asarray(dV_P1, float)
    eps = eps + (M.col("P2")[0] - M.col("P2")[1]) * np.asarray(dV_P2, float)
    for gate, v in other.items():
        a = M.col(gate)
        eps = eps + (a[0] - a[1]) * np.asarray(v, float)
    return UEV_PER_MV * eps


def cp_compensation(dV_CP, M):
    """Plunger shifts (dV_P1, dV_P2) in mV that hold both dot levels fixed."""
    P = np.column_stack([M.col("P1"), M.col("P2")])
    det = np.linalg.det(P)
    if abs(det) < 1e-12 * np.abs(P).max() ** 2:
        raise np.linalg.LinAlgError("plunger lever-arm sub-matrix is singular")
    dP = np.linalg.solve(P, -M.col("CP") * dV_CP)
    return float(dP[0]), float(dP[1])


def transition_slope(M):
    """dV_P2/dV_P1 along the eps = 0 line."""
    d1 = M.col("P1")[0] - M.col("P1")[1]
    d2 = M.col("P2")[0] - M.col("P2")[1]
    return -d1 / d2


@dataclass
class SweepSpec:
    """Plunger window (mV, absolute) plus fixed voltages.

    ``reference`` holds the gate voltages at which eps = 0; any gate missing
    from ``fixed`` sits at its reference value.
    """

    p1: np.ndarray
    p2: np.ndarray
    fixed: dict = field(default_factory=dict)
    reference: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p1 = np.asarray(self.p1, float)
        self.p2 = np.asarray(self.p2, float)
        for name, v in (("P1", self.p1), ("P2", self.p2)):
            d = np.diff(v)
            if len(v) == 0 or (len(d) and not (np.all(d > 0) or np.all(d < 0))):
                raise ValueError(f"{name} range must be non-empty and monotonic")

    def shifted(self, dP1, dP2, **fixed):
        f = dict(self.fixed)
        f.update(fixed)
        return SweepSpec(self.p1 + dP1, self.p2 + dP2, f, dict(self.reference))


def sweep_detuning(spec, M):
    """eps (ueV) on the (P1, P2) grid, shape (len(p1), len(p2))."""
    ref = spec.reference
    V1, V2 = np.meshgrid(spec.p1, spec.p2, indexing="ij")
    others = {g: spec.fixed.get(g, ref.get(g, 0.0)) - ref.get(g, 0.0)
              for g in M.gates if g not in ("P1", "P2")}
    others = {g: v for g, v in others.items() if v}
    return detuning_from_voltages(V1 - ref.get("P1", 0.0), V2 - ref.get("P2", 0.0),
                                  M, **others)


def stability_map(spec, M, cal, sys_template, qubit=0):
    """Complex A/A0 at f_c over the plunger window; returns (eps, A)."""
    eps = sweep_detuning(spec, M)
    tc = float(tc_from_barrier(spec.fixed.get("B2", cal.v_ref), cal))
    sys = sys_template.with_qubit(qubit, tc=tc)
    return eps, response_at(eps, sys, qubit=qubit)
