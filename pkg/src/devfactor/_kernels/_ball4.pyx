# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: fused evaluation and angular reduction of the built-in
rational integrands on a radial x angular product grid."""

import numpy as np

from libc.math cimport isfinite

KIND_ONE = 0
KIND_INV_SQUARE = 1
KIND_AXIAL_COMPONENT = 2


def reduce_axial(int kind, double p, double ell,
                 double[::1] r, double[::1] x,
                 double[::1] w_fine, double[::1] w_coarse):
    """Same contract as the NumPy fallback: angular sums per radius against the
    fine and coarse weight sets, or the (r, x) location of the first
    non-finite value."""
    cdef Py_ssize_t nr = r.shape[0]
    cdef Py_ssize_t nx = x.shape[0]
    cdef Py_ssize_t i, j
    if kind not in (0, 1, 2):
        raise ValueError(f"unknown integrand kind {kind}")
    fine = np.empty(nr, dtype=np.float64)
    coarse = np.empty(nr, dtype=np.float64)
    cdef double[::1] fv = fine
    cdef double[::1] cv = coarse
    cdef double ri, r2, d, f, sf, sc, two_p
    two_p = 2.0 * p
    for i in range(nr):
        ri = r[i]
        r2 = ri * ri
        sf = 0.0
        sc = 0.0
        for j in range(nx):
            if kind == 0:
                f = 1.0
            else:
                d = r2 - two_p * ri * x[j] + ell
                f = 1.0 / (d * d)
                if kind == 2:
                    f = ri * x[j] * f
            if not isfinite(f):
                return None, None, (ri, x[j])
            sf += w_fine[j] * f
            sc += w_coarse[j] * f
        fv[i] = sf
        cv[i] = sc
    return fine, coarse, None
