# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: circuit truth tables, GF(2^k) products, generator seed scoring.

Signatures and results are identical to :mod:`circapprox._fallback`.
"""
import numpy as np

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, calloc, free


cdef inline Py_ssize_t _nwords(int width) nogil:
    if width <= 6:
        return 1
    return (<Py_ssize_t> 1) << (width - 6)


cdef uint64_t* _input_table(int width) nogil:
    # variable that is the most significant bit of a suffix of `width` variables
    cdef Py_ssize_t nw = _nwords(width)
    cdef uint64_t* buf = <uint64_t*> malloc(<size_t> nw * sizeof(uint64_t))
    cdef uint64_t w = 0
    cdef Py_ssize_t u
    if width <= 6:
        for u in range(64):
            if (u >> (width - 1)) & 1:
                w |= (<uint64_t> 1) << u
        buf[0] = w
    else:
        for u in range(nw):
            buf[u] = 0 if u < nw // 2 else <uint64_t> 0xFFFFFFFFFFFFFFFF
    return buf


def eval_circuit_words(int n, const unsigned char[:] ops, const int64_t[:] left,
                       const int64_t[:] right, int64_t output):
    """Packed truth table (LSB-first words) of a circuit over ``n`` inputs."""
    cdef Py_ssize_t ngates = ops.shape[0]
    cdef Py_ssize_t nrefs = n + 2 + ngates
    cdef Py_ssize_t i, r, g
    cdef int* width = <int*> malloc(nrefs * sizeof(int))
    cdef Py_ssize_t* last = <Py_ssize_t*> malloc(nrefs * sizeof(Py_ssize_t))
    cdef uint64_t** tab = <uint64_t**> calloc(nrefs, sizeof(uint64_t*))
    cdef uint64_t c0 = 0, c1 = 0xFFFFFFFFFFFFFFFF
    cdef uint64_t m0, m1, m2, m3, a, b
    cdef uint64_t* A
    cdef uint64_t* B
    cdef uint64_t* O
    cdef int wa, wb, wo, op
    cdef Py_ssize_t na, nb, no, full
    cdef Py_ssize_t la, lb

    if width == NULL or last == NULL or tab == NULL:
        free(width); free(last); free(tab)
        raise MemoryError()

    width[0] = 0
    width[1] = 0
    tab[0] = &c0
    tab[1] = &c1
    for i in range(n):
        width[2 + i] = n - i
        tab[2 + i] = _input_table(n - i)
    for r in range(nrefs):
        last[r] = -1
    for g in range(ngates):
        last[left[g]] = g
        last[right[g]] = g
    last[output] = ngates

    with nogil:
        for g in range(ngates):
            la = left[g]
            lb = right[g]
            wa = width[la]
            wb = width[lb]
            wo = wa if wa > wb else wb
            na = _nwords(wa)
            nb = _nwords(wb)
            no = _nwords(wo)
            op = ops[g]
            m0 = c1 if op & 1 else 0
            m1 = c1 if op & 2 else 0
            m2 = c1 if op & 4 else 0
            m3 = c1 if op & 8 else 0
            O = <uint64_t*> malloc(<size_t> no * sizeof(uint64_t))
            A = tab[la]
            B = tab[lb]
            for i in range(no):
                a = A[i & (na - 1)]
                b = B[i & (nb - 1)]
                O[i] = (m0 & ~a & ~b) | (m1 & ~a & b) | (m2 & a & ~b) | (m3 & a & b)
            r = n + 2 + g
            tab[r] = O
            width[r] = wo
            if last[la] == g and la >= 2:
                free(tab[la])
                tab[la] = NULL
            if lb != la and last[lb] == g and lb >= 2:
                free(tab[lb])
                tab[lb] = NULL

    wo = width[output]
    no = _nwords(wo)
    full = _nwords(n)
    res = np.empty(full, dtype=np.uint64)
    cdef uint64_t[:] rv = res
    O = tab[output]
    for i in range(full):
        rv[i] = O[i & (no - 1)]

    for r in range(2, nrefs):
        if tab[r] != NULL:
            free(tab[r])
    free(tab)
    free(width)
    free(last)
    return res


def gf_mul_array(const uint64_t[:] a, const uint64_t[:] b, int k, uint64_t modulus):
    """Elementwise product in GF(2^k) = GF(2)[x]/(modulus)."""
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t i
    cdef int j
    cdef uint64_t x, y, acc, top = (<uint64_t> 1) << k
    res = np.empty(m, dtype=np.uint64)
    cdef uint64_t[:] rv = res
    with nogil:
        for i in range(m):
            x = a[i]
            y = b[i]
            acc = 0
            for j in range(k):
                if (y >> j) & 1:
                    acc ^= x
                x <<= 1
                if x & top:
                    x ^= modulus
            rv[i] = acc
    return res


cdef extern from *:
    int __builtin_parity(unsigned int) nogil


def quad_block_sums(const unsigned char[:] f, const double[:] w, const unsigned int[:] x2,
                    const unsigned int[:] x3, unsigned int c, unsigned int m2,
                    unsigned int m3, unsigned int m4, int ell):
    """Per-block sums of w(x) (-1)^(f(x) + G(x)), G(x) = c + <x,m2> + <x^2,m3> + <x^3,m4>."""
    cdef Py_ssize_t size = f.shape[0]
    cdef Py_ssize_t block = (<Py_ssize_t> 1) << ell
    cdef Py_ssize_t nb = size >> ell
    cdef Py_ssize_t b, i, x
    cdef int bit
    cdef double acc
    res = np.empty(nb, dtype=np.float64)
    cdef double[:] rv = res
    with nogil:
        for b in range(nb):
            acc = 0.0
            for i in range(block):
                x = b * block + i
                bit = f[x] ^ c ^ __builtin_parity(<unsigned int> x & m2) \
                    ^ __builtin_parity(x2[x] & m3) ^ __builtin_parity(x3[x] & m4)
                if bit:
                    acc -= w[x]
                else:
                    acc += w[x]
            rv[b] = acc
    return res
