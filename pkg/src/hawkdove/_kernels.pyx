# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled residual-tracking adjustment. Mirrors ``_kernels_py`` op for op."""

cimport cython


def adjust_into(const double[:, ::1] proposed,
                double[::1] surplus,
                double[::1] deficit,
                const Py_ssize_t[::1] sellers,
                const Py_ssize_t[::1] buyers,
                double thv,
                double[:, ::1] out):
    """Write feasible transfers into ``out``; ``surplus``/``deficit`` are consumed."""
    cdef Py_ssize_t a, b, i, j
    cdef Py_ssize_t ns = sellers.shape[0]
    cdef Py_ssize_t nb = buyers.shape[0]
    cdef double s, d, p, m
    for a in range(ns):
        i = sellers[a]
        s = surplus[i]
        for b in range(nb):
            j = buyers[b]
            p = proposed[i, j]
            # same selection order as Python's min(s, d, p, thv) after max(p, 0.0)
            if p < 0.0:
                p = 0.0
            m = s
            d = deficit[j]
            if d < m:
                m = d
            if p < m:
                m = p
            if thv < m:
                m = thv
            out[i, j] = m
            s = s - m
            deficit[j] = d - m
        surplus[i] = s
