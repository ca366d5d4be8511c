"""Gate geometry: electrodes as axis-aligned boxes on a uniform grid."""

from dataclasses import dataclass, field
import json
import math

import numpy as np

ROLES = ("gate", "ground-screen")
_SNAP = 1e-9


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Electrode:
    name: str
    box: tuple  # (x0, y0, z0, x1, y1, z1) in nm
    role: str = "gate"

    def __post_init__(self):
        if len(self.box) != 6:
            raise LayoutError(f"electrode {self.name!r}: box needs 6 numbers")
        object.__setattr__(self, "box", tuple(float(v) for v in self.box))
        lo, hi = self.box[:3], self.box[3:]
        if any(h < l for l, h in zip(lo, hi)):
            raise LayoutError(f"electrode {self.name!r}: box has negative extent")
        if self.role not in ROLES:
            raise LayoutError(f"electrode {self.name!r}: role must be one of {ROLES}")


@dataclass
class GateLayout:
    """Device geometry.

    ``domain`` is the (x, y, z) extent in nm; an extent of 0 makes that axis
    a single node, i.e. the problem is invariant along it (2D / 1D modes).
    The outer faces of every non-degenerate axis are grounded. ``well_depth``
    is the z coordinate of the evaluation plane (the quantum well).

    ``eps_r`` is carried for bookkeeping only: with a uniform dielectric it
    cancels out of every lever arm.
    """

    domain: tuple
    spacing: float
    well_depth: float
    electrodes: list = field(default_factory=list)
    eps_r: float = 11.7

    def __post_init__(self):
        self.domain = tuple(float(v) for v in self.domain)
        self.electrodes = [e if isinstance(e, Electrode) else Electrode(**e)
                           for e in self.electrodes]
        self.validate()

    # -- grid -------------------------------------------------------------
    @property
    def shape(self):
        return tuple(int(round(L / self.spacing)) + 1 for L in self.domain)

    def axis(self, a):
        return np.arange(self.shape[a]) * self.spacing

    @property
    def plane_index(self):
        return int(round(self.well_depth / self.spacing))

    def electrode(self, name):
        for e in self.electrodes:
            if e.name == name:
                return e
        raise LayoutError(f"unknown electrode {name!r}; have "
                          f"{[e.name for e in self.electrodes]}")

    def _index_range(self, lo, hi, a):
        # nodes on a face belong to the electrode
        tol = _SNAP * self.spacing + 1e-12
        i0 = math.ceil((lo - tol) / self.spacing)
        i1 = math.floor((hi + tol) / self.spacing)
        return max(i0, 0), min(i1, self.shape[a] - 1)

    def electrode_mask(self, name):
        e = self.electrode(name)
        mask = np.zeros(self.shape, dtype=bool)
        sl = []
        for a in range(3):
            i0, i1 = self._index_range(e.box[a], e.box[a + 3], a)
            sl.append(slice(i0, i1 + 1))
        mask[tuple(sl)] = True
        return mask

    def boundary_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        for a, n in enumerate(self.shape):
            if n > 1:
                idx = [slice(None)] * 3
                idx[a] = 0
                mask[tuple(idx)] = True
                idx[a] = n - 1
                mask[tuple(idx)] = True
        return mask

    # -- checks -----------------------------------------------------------
    def validate(self):
        if self.spacing <= 0:
            raise LayoutError("spacing must be positive")
        for a, L in enumerate(self.domain):
            if L < 0:
                raise LayoutError("domain extents must be non-negative")
            if abs(L / self.spacing - round(L / self.spacing)) > 1e-6:
                raise LayoutError(f"domain extent {L} nm on axis {'xyz'[a]} is not "
                                  f"a multiple of the spacing {self.spacing} nm")
        names = [e.name for e in self.electrodes]
        if len(set(names)) != len(names):
            raise LayoutError("electrode names must be unique")
        for e in self.electrodes:
            for a, L in enumerate(self.domain):
                if e.box[a] < -_SNAP or e.box[a + 3] > L + _SNAP:
                    raise LayoutError(f"electrode {e.name!r} leaves the domain")
        nz = self.shape[2]
        if nz > 1:
            if not 0 < self.well_depth < self.domain[2]:
                raise LayoutError("well plane must lie strictly inside the domain")
            if abs(self.well_depth / self.spacing - self.plane_index) > 1e-6:
                raise LayoutError("well_depth must sit on a grid node")
        owner = np.zeros(self.shape, dtype=np.int32)
        for k, e in enumerate(self.electrodes, start=1):
            m = self.electrode_mask(e.name)
            if not m.any():
                raise LayoutError(f"electrode {e.name!r} covers no grid node")
            clash = m & (owner > 0)
            if clash.any():
                other = self.electrodes[owner[clash][0] - 1].name
                raise LayoutError(f"electrodes {other!r} and {e.name!r} overlap")
            owner[m] = k

    # -- io ---------------------------------------------------------------
    def refined(self, factor=2):
        """Same geometry at ``spacing / factor``."""
        return GateLayout(self.domain, self.spacing / factor, self.well_depth,
                          list(self.electrodes), self.eps_r)

    def to_dict(self):
        return {
            "domain": list(self.domain),
            "spacing": self.spacing,
            "well_depth": self.well_depth,
            "eps_r": self.eps_r,
            "electrodes": [{"name": e.name, "box": list(e.box), "role": e.role}
                           for e in self.electrodes],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(domain=d["domain"], spacing=d["spacing"],
                       well_depth=d["well_depth"], electrodes=d["electrodes"],
                       eps_r=d.get("eps_r", 11.7))
        except KeyError as exc:
            raise LayoutError(f"layout is missing key {exc.args[0]!r}") from None
        except TypeError as exc:
            raise LayoutError(f"malformed layout: {exc}") from None

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# -- reference layouts -----------------------------------------------------

def parallel_plate(d=100.0, spacing=1.0):
    """Hot plate at z=0, grounded plate at z=d, invariant in x and y."""
    return GateLayout(
        domain=(0, 0, d), spacing=spacing, well_depth=d / 2,
        electrodes=[Electrode("hot", (0, 0, 0, 0, 0, 0)),
                    Electrode("ground", (0, 0, d, 0, 0, d), "ground-screen")])


def square_box(L=100.0, spacing=2.0):
    """2D square in the x-y plane; the x=0 wall is electrode 'hot'.

    The other three walls are the grounded outer boundary. The corner nodes
    are left to the boundary; they never enter the 5-point stencil.
    """
    return GateLayout(
        domain=(L, L, 0), spacing=spacing, well_depth=0.0,
        electrodes=[Electrode("hot", (0, spacing, 0, 0, L - spacing, 0))])


SPLIT_GATE_DOTS = {"dot1": (160.0, 200.0), "dot2": (240.0, 200.0)}


def split_gate(spacing=10.0):
    """Illustrative accumulation-mode DQD with an asymmetric split-gate coupler.

    The DQD channel runs along x at y = 200 nm between layer-1 screening
    gates: S1 below the channel, S2 above its left half and the cavity gate
    CP above its right half, so CP sits closer to dot 2. Plungers, barriers
    and reservoir gates are stacked above. Source/drain 2DEG reservoirs are
    grounded sheets in the well plane. All box edges are multiples of 10 nm
    so the geometry is exact for spacing 10, 5, 2.5 ...
    """
    layer1 = (60.0, 70.0)
    layer2 = (80.0, 90.0)
    layer3 = (100.0, 110.0)

    def box(x0, x1, y0, y1, zz):
        return (x0, y0, zz[0], x1, y1, zz[1])

    electrodes = [
        Electrode("S1", box(20, 380, 20, 170, layer1), "ground-screen"),
        Electrode("S2", box(20, 190, 230, 380, layer1), "ground-screen"),
        Electrode("CP", box(210, 380, 230, 380, layer1)),
        Electrode("S", box(30, 90, 180, 220, layer2)),
        Electrode("P1", box(140, 180, 180, 220, layer2)),
        Electrode("P2", box(220, 260, 180, 220, layer2)),
        Electrode("D", box(310, 370, 180, 220, layer2)),
        Electrode("B1", box(100, 130, 180, 220, layer3)),
        Electrode("B2", box(180, 220, 180, 220, layer3)),
        Electrode("B3", box(270, 300, 180, 220, layer3)),
        Electrode("2DEG_S", box(30, 80, 190, 210, (40.0, 40.0)), "ground-screen"),
        Electrode("2DEG_D", box(320, 370, 190, 210, (40.0, 40.0)), "ground-screen"),
    ]
    return GateLayout(domain=(400.0, 400.0, 120.0), spacing=spacing,
                      well_depth=40.0, electrodes=electrodes)
