# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled red-black SOR kernels for the 7-point Laplace stencil.

Axes of length 1 are treated as invariant directions (no neighbours).
Nodes on the outer faces of the remaining axes must be marked fixed.
"""

from libc.math cimport fabs


cdef inline double _nbr_avg(double[:, :, ::1] phi, Py_ssize_t i, Py_ssize_t j,
                            Py_ssize_t k, int ax, int ay, int az, double inv) nogil:
    cdef double s = 0.0
    if ax:
        s = s + (phi[i - 1, j, k] + phi[i + 1, j, k])
    if ay:
        s = s + (phi[i, j - 1, k] + phi[i, j + 1, k])
    if az:
        s = s + (phi[i, j, k - 1] + phi[i, j, k + 1])
    return s / inv


def rb_sweeps(double[:, :, ::1] phi, const unsigned char[:, :, ::1] fixed,
              double omega, int nsweeps):
    """Run `nsweeps` full red-black SOR sweeps in place."""
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1], nz = phi.shape[2]
    cdef int ax = nx > 1, ay = ny > 1, az = nz > 1
    cdef double inv = 2.0 * (ax + ay + az)
    cdef Py_ssize_t i, j, k, k0
    cdef Py_ssize_t i_lo = ax, i_hi = nx - ax
    cdef Py_ssize_t j_lo = ay, j_hi = ny - ay
    cdef Py_ssize_t k_lo = az, k_hi = nz - az
    cdef int sweep, color
    cdef double avg
    if ax + ay + az == 0:
        return
    with nogil:
        for sweep in range(nsweeps):
            for color in range(2):
                for i in range(i_lo, i_hi):
                    for j in range(j_lo, j_hi):
                        k0 = k_lo + ((i + j + k_lo + color) & 1)
                        for k in range(k0, k_hi, 2):
                            if fixed[i, j, k]:
                                continue
                            avg = _nbr_avg(phi, i, j, k, ax, ay, az, inv)
                            phi[i, j, k] = phi[i, j, k] + omega * (avg - phi[i, j, k])


def max_defect(double[:, :, ::1] phi, const unsigned char[:, :, ::1] fixed):
    """Max-norm of (neighbour average - value) over free nodes."""
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1], nz = phi.shape[2]
    cdef int ax = nx > 1, ay = ny > 1, az = nz > 1
    cdef double inv = 2.0 * (ax + ay + az)
    cdef Py_ssize_t i, j, k
    cdef double d, dmax = 0.0
    if ax + ay + az == 0:
        return 0.0
    with nogil:
        for i in range(ax, nx - ax):
            for j in range(ay, ny - ay):
                for k in range(az, nz - az):
                    if fixed[i, j, k]:
                        continue
                    d = fabs(_nbr_avg(phi, i, j, k, ax, ay, az, inv) - phi[i, j, k])
                    if d > dmax:
                        dmax = d
    return dmax
