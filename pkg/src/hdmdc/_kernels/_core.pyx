# Compiled hot kernels: multi-step rollout of the fitted linear map and
# Gaussian kernel density evaluation.  Semantics match `pure.py`.

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, M_PI
from libc.string cimport memmove
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


def rollout_batch(A, B, xhat0, uhat0, u_future, int q, int horizon, int n_keep):
    """Advance ``k`` augmented trajectories ``horizon`` steps.

    Same contract as the pure-NumPy fallback: per step
    ``x <- A @ x + B @ u`` followed by shifting the next forcing block
    into the top of ``u``.  Returns a ``(horizon, n_keep, k)`` array.
    """
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] Af = \
        np.asfortranarray(A, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] Bf = \
        np.asfortranarray(B, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] xa = \
        np.array(xhat0, dtype=np.float64, order="F", copy=True)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] xb = \
        np.empty_like(xa, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] ub = \
        np.array(uhat0, dtype=np.float64, order="F", copy=True)
    cdef cnp.ndarray[double, ndim=3, mode="c"] uf = \
        np.ascontiguousarray(u_future, dtype=np.float64)

    cdef int p = xa.shape[0]
    cdef int k = xa.shape[1]
    cdef int r = ub.shape[0]
    cdef cnp.ndarray[double, ndim=3, mode="c"] out = \
        np.empty((horizon, n_keep, k), dtype=np.float64)

    cdef double one = 1.0, zero = 0.0
    cdef double *ap = &Af[0, 0] if p > 0 else NULL
    cdef double *bp = &Bf[0, 0] if p > 0 else NULL
    cdef double *xap = &xa[0, 0] if p > 0 and k > 0 else NULL
    cdef double *xbp = &xb[0, 0] if p > 0 and k > 0 else NULL
    cdef double *up = &ub[0, 0] if r > 0 and k > 0 else NULL
    cdef double *ufp = &uf[0, 0, 0] if uf.size > 0 else NULL
    cdef double *op = &out[0, 0, 0] if out.size > 0 else NULL
    cdef double *swp
    cdef Py_ssize_t h, i, j, iq

    if horizon == 0 or k == 0:
        return out

    with nogil:
        for h in range(horizon):
            # xb = A @ xa + B @ ub  (all Fortran-ordered)
            dgemm("N", "N", &p, &k, &p, &one, ap, &p, xap, &p, &zero, xbp, &p)
            dgemm("N", "N", &p, &k, &r, &one, bp, &p, up, &r, &one, xbp, &p)
            for i in range(n_keep):
                for j in range(k):
                    op[(h * n_keep + i) * k + j] = xbp[j * p + i]
            if h + 1 < horizon:
                for j in range(k):
                    if r > q:
                        memmove(up + j * r + q, up + j * r,
                                (r - q) * sizeof(double))
                    for iq in range(q):
                        up[j * r + iq] = ufp[(h * q + iq) * k + j]
            swp = xap
            xap = xbp
            xbp = swp
    return out


def kde_eval(samples, grid, double h):
    """Gaussian kernel density of ``samples`` on ``grid`` with bandwidth ``h``."""
    cdef cnp.ndarray[double, ndim=1, mode="c"] s = \
        np.ascontiguousarray(samples, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] g = \
        np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t m = g.shape[0]
    cdef cnp.ndarray[double, ndim=1, mode="c"] out = \
        np.empty(m, dtype=np.float64)
    cdef double scale = 1.0 / (n * h * sqrt(2.0 * M_PI))
    cdef double inv_h = 1.0 / h
    cdef double acc, z
    cdef Py_ssize_t i, j
    with nogil:
        for j in range(m):
            acc = 0.0
            for i in range(n):
                z = (g[j] - s[i]) * inv_h
                acc += exp(-0.5 * z * z)
            out[j] = acc * scale
    return out
