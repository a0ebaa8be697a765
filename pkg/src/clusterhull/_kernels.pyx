# cython: language_level=3
"""Compiled kernel backend: Pauli-term application to dense state vectors.

Contract matches _kernels_py: for each term t,
    out[i ^ mx[t]] += w[t] * (-1)**popcount(i & mz[t]) * v[i]
"""

from libc.stdint cimport uint64_t


cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define CH_POPCOUNT(x) __builtin_popcountll(x)
    #else
    static int CH_POPCOUNT(unsigned long long x)
    {
        int c = 0;
        while (x) { x &= x - 1; ++c; }
        return c;
    }
    #endif
    """
    int CH_POPCOUNT(uint64_t x) nogil


def apply_real(const uint64_t[::1] mx, const uint64_t[::1] mz, const double[::1] w,
               const double[::1] v, double[::1] out):
    cdef Py_ssize_t nt = mx.shape[0]
    cdef Py_ssize_t dim = v.shape[0]
    cdef Py_ssize_t t
    cdef uint64_t i, mxt, mzt
    cdef double wt
    with nogil:
        for t in range(nt):
            mxt = mx[t]
            mzt = mz[t]
            wt = w[t]
            for i in range(<uint64_t> dim):
                if CH_POPCOUNT(i & mzt) & 1:
                    out[<Py_ssize_t> (i ^ mxt)] -= wt * v[<Py_ssize_t> i]
                else:
                    out[<Py_ssize_t> (i ^ mxt)] += wt * v[<Py_ssize_t> i]
    return out


def apply_complex(const uint64_t[::1] mx, const uint64_t[::1] mz,
                  const double complex[::1] w, const double complex[::1] v,
                  double complex[::1] out):
    cdef Py_ssize_t nt = mx.shape[0]
    cdef Py_ssize_t dim = v.shape[0]
    cdef Py_ssize_t t
    cdef uint64_t i, mxt, mzt
    cdef double complex wt
    with nogil:
        for t in range(nt):
            mxt = mx[t]
            mzt = mz[t]
            wt = w[t]
            for i in range(<uint64_t> dim):
                if CH_POPCOUNT(i & mzt) & 1:
                    out[<Py_ssize_t> (i ^ mxt)] -= wt * v[<Py_ssize_t> i]
                else:
                    out[<Py_ssize_t> (i ^ mxt)] += wt * v[<Py_ssize_t> i]
    return out
