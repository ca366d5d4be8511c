"""Numpy red-black SOR kernels, used when the compiled extension is missing.

Same contract and arithmetic order as ``_sor_ext``.
"""

import numpy as np


def _interior(shape):
    return tuple(slice(1, -1) if n > 1 else slice(None) for n in shape)


def _neighbour_avg(phi):
    shape = phi.shape
    active = [a for a, n in enumerate(shape) if n > 1]
    inner = _interior(shape)
    s = None
    for a in active:
        lo = list(inner)
        hi = list(inner)
        lo[a] = slice(0, -2)
        hi[a] = slice(2, None)
        pair = phi[tuple(lo)] + phi[tuple(hi)]
        s = pair if s is None else s + pair
    return s / (2.0 * len(active))


def _colour_masks(fixed):
    inner = _interior(fixed.shape)
    idx = np.indices(fixed.shape).sum(axis=0)[inner]
    free = ~fixed[inner].astype(bool)
    return [free & (idx % 2 == c) for c in (0, 1)]


def rb_sweeps(phi, fixed, omega, nsweeps, _masks=None):
    if all(n == 1 for n in phi.shape):
        return
    inner = _interior(phi.shape)
    masks = _masks if _masks is not None else _colour_masks(fixed)
    view = phi[inner]
    for _ in range(nsweeps):
        for m in masks:
            avg = _neighbour_avg(phi)
            view[m] = view[m] + omega * (avg[m] - view[m])


def max_defect(phi, fixed):
    if all(n == 1 for n in phi.shape):
        return 0.0
    inner = _interior(phi.shape)
    free = ~fixed[inner].astype(bool)
    if not free.any():
        return 0.0
    d = np.abs(_neighbour_avg(phi) - phi[inner])
    return float(d[free].max())
