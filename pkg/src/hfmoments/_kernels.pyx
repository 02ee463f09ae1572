# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled kernels for bitmask-encoded fermion and Pauli terms.

Term keys are packed into one unsigned 64-bit integer: the low 32 bits hold
the first mask (creation modes, or the X part of a Pauli word) and the high
32 bits the second (annihilation modes, or the Z part).  Every kernel returns
``(keys, coeffs)`` with duplicate keys already summed; ordering and the drop
tolerance are applied by the caller.
"""

import numpy as np

from libc.stdint cimport uint64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

cdef extern from *:
    """
    static inline int hfm_popcount(unsigned long long x) { return __builtin_popcountll(x); }
    static inline int hfm_ctz(unsigned long long x) { return __builtin_ctzll(x); }
    static inline unsigned long long hfm_below(int j) { return (1ULL << j) - 1ULL; }
    static inline unsigned long long hfm_above(int j) { return ~((2ULL << j) - 1ULL); }
    """
    int popcount "hfm_popcount"(unsigned long long) nogil
    int ctz "hfm_ctz"(unsigned long long) nogil
    unsigned long long below "hfm_below"(int) nogil
    unsigned long long above "hfm_above"(int) nogil

cdef uint64_t LOW = 0xFFFFFFFFULL


cdef inline void _acc(unordered_map[uint64_t, size_t]& index, vector[uint64_t]& keys,
                      vector[double complex]& vals, uint64_t key, double complex v) nogil:
    cdef unordered_map[uint64_t, size_t].iterator it = index.find(key)
    if it == index.end():
        index[key] = keys.size()
        keys.push_back(key)
        vals.push_back(v)
    else:
        vals[index[key]] += v


cdef _to_arrays(vector[uint64_t]& keys, vector[double complex]& vals):
    cdef size_t n = keys.size()
    out_k = np.empty(n, dtype=np.uint64)
    out_v = np.empty(n, dtype=np.complex128)
    cdef uint64_t[:] ok = out_k
    cdef double complex[:] ov = out_v
    cdef size_t t
    for t in range(n):
        ok[t] = keys[t]
        ov[t] = vals[t]
    return out_k, out_v


def wick_product(const uint64_t[:] k1, const double complex[:] v1,
                 const uint64_t[:] k2, const double complex[:] v2,
                 int max_annihilators=-1):
    """Normal-ordered product of two operators in canonical bitmask form."""
    cdef unordered_map[uint64_t, size_t] index
    cdef vector[uint64_t] keys
    cdef vector[double complex] vals
    cdef Py_ssize_t s, t
    cdef uint64_t c1, a1, c2, a2, S, K, c2r, a1r, m
    cdef int par, pc_c2, j
    cdef double complex v
    with nogil:
        for s in range(k1.shape[0]):
            c1 = k1[s] & LOW
            a1 = k1[s] >> 32
            for t in range(k2.shape[0]):
                c2 = k2[t] & LOW
                a2 = k2[t] >> 32
                S = a1 & c2
                pc_c2 = popcount(c2)
                K = S
                while True:
                    c2r = c2 & ~K
                    a1r = a1 & ~K
                    if (c1 & c2r) == 0 and (a1r & a2) == 0 and (
                        max_annihilators < 0 or popcount(a1r | a2) <= max_annihilators
                    ):
                        # contraction sign of a(A1) c(C2)
                        par = popcount(a1r) * pc_c2
                        m = a1
                        while m:
                            j = ctz(m)
                            m &= m - 1
                            par += popcount(K & below(j))
                            if (K >> j) & 1:
                                par += popcount(c2 & below(j))
                        # merge c(C1) c(C2\K) into ascending order
                        m = c2r
                        while m:
                            j = ctz(m)
                            m &= m - 1
                            par += popcount(c1 & above(j))
                        # merge a(A1\K) a(A2) into descending order
                        m = a1r
                        while m:
                            j = ctz(m)
                            m &= m - 1
                            par += popcount(a2 & above(j))
                        v = v1[s] * v2[t]
                        if par & 1:
                            v = -v
                        _acc(index, keys, vals, (c1 | c2r) | ((a1r | a2) << 32), v)
                    if K == 0:
                        break
                    K = (K - 1) & S
    return _to_arrays(keys, vals)


def jordan_wigner_terms(const uint64_t[:] fkeys, const double complex[:] coeffs):
    """Jordan-Wigner images of normal-ordered terms as packed Pauli words."""
    cdef unordered_map[uint64_t, size_t] index
    cdef vector[uint64_t] keys
    cdef vector[double complex] vals
    cdef Py_ssize_t t
    cdef uint64_t C, A, P, Mi, N, XY, z0, Y, Ns, both
    cdef int m, top, par, e
    cdef double complex base, v
    cdef double complex phases[4]
    phases[0] = 1
    phases[1] = 1j
    phases[2] = -1
    phases[3] = -1j
    with nogil:
        for t in range(fkeys.shape[0]):
            C = fkeys[t] & LOW
            A = fkeys[t] >> 32
            P = C & ~A
            Mi = A & ~C
            N = C & A
            XY = P | Mi
            both = C | A
            # Z on every uninvolved mode below an odd number of ladder operators
            z0 = 0
            par = 0
            top = 63 - __builtin_clzll(both) if both else -1
            m = top
            while m >= 0:
                if (both >> m) & 1:
                    par += ((C >> m) & 1) + ((A >> m) & 1)
                elif par & 1:
                    z0 |= (<uint64_t>1) << m
                m -= 1
            base = coeffs[t]
            for m in range(popcount(XY | N)):
                base = base * 0.5
            Y = XY
            while True:
                # (X - iY)/2 for creation, (X + iY)/2 for annihilation
                e = (popcount(Y & Mi) - popcount(Y & P)) & 3
                Ns = N
                while True:
                    v = base * phases[e]
                    if popcount(Ns) & 1:
                        v = -v
                    _acc(index, keys, vals, XY | ((z0 | Y | Ns) << 32), v)
                    if Ns == 0:
                        break
                    Ns = (Ns - 1) & N
                if Y == 0:
                    break
                Y = (Y - 1) & XY
    return _to_arrays(keys, vals)


cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil


def pauli_product(const uint64_t[:] k1, const double complex[:] v1,
                  const uint64_t[:] k2, const double complex[:] v2):
    """Product of two Pauli sums with exact phase tracking."""
    cdef unordered_map[uint64_t, size_t] index
    cdef vector[uint64_t] keys
    cdef vector[double complex] vals
    cdef Py_ssize_t s, t
    cdef uint64_t x1, z1, x2, z2, x, z
    cdef int e
    cdef double complex phases[4]
    phases[0] = 1
    phases[1] = 1j
    phases[2] = -1
    phases[3] = -1j
    with nogil:
        for s in range(k1.shape[0]):
            x1 = k1[s] & LOW
            z1 = k1[s] >> 32
            for t in range(k2.shape[0]):
                x2 = k2[t] & LOW
                z2 = k2[t] >> 32
                x = x1 ^ x2
                z = z1 ^ z2
                e = (popcount(x1 & z1) + popcount(x2 & z2) - popcount(x & z)
                     + 2 * popcount(z1 & x2)) & 3
                _acc(index, keys, vals, x | (z << 32), v1[s] * v2[t] * phases[e])
    return _to_arrays(keys, vals)


def pauli_apply(const uint64_t[:] pkeys, const double complex[:] coeffs,
                const double complex[:] psi):
    """Return ``sum_w c_w P_w |psi>`` without forming a matrix."""
    cdef Py_ssize_t dim = psi.shape[0]
    out_arr = np.zeros(dim, dtype=np.complex128)
    cdef double complex[:] out = out_arr
    cdef Py_ssize_t t, i
    cdef uint64_t x, z
    cdef double complex c
    cdef double complex phases[4]
    phases[0] = 1
    phases[1] = 1j
    phases[2] = -1
    phases[3] = -1j
    with nogil:
        for t in range(pkeys.shape[0]):
            x = pkeys[t] & LOW
            z = pkeys[t] >> 32
            c = coeffs[t] * phases[popcount(x & z) & 3]
            for i in range(dim):
                if popcount(z & <uint64_t>i) & 1:
                    out[<Py_ssize_t>(<uint64_t>i ^ x)] -= c * psi[i]
                else:
                    out[<Py_ssize_t>(<uint64_t>i ^ x)] += c * psi[i]
    return out_arr
