"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same signatures and the same packed-key conventions; used when the extension
is not built or when ``HFMOMENTS_PURE_PYTHON`` is set.
"""

import numpy as np

LOW = 0xFFFFFFFF
_PHASES = (1.0, 1j, -1.0, -1j)


def _popcount(x):
    return bin(x).count("1")


def _bits(m):
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def _submasks(mask):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _to_arrays(acc):
    keys = np.fromiter(acc.keys(), dtype=np.uint64, count=len(acc))
    vals = np.fromiter(acc.values(), dtype=np.complex128, count=len(acc))
    return keys, vals


def wick_product(k1, v1, k2, v2, max_annihilators=-1):
    acc = {}
    left = [(int(k) & LOW, int(k) >> 32, complex(v)) for k, v in zip(k1, v1)]
    right = [(int(k) & LOW, int(k) >> 32, complex(v)) for k, v in zip(k2, v2)]
    for c1, a1, w1 in left:
        a1_bits = list(_bits(a1))
        for c2, a2, w2 in right:
            S = a1 & c2
            pc_c2 = _popcount(c2)
            for K in _submasks(S):
                c2r = c2 & ~K
                a1r = a1 & ~K
                if c1 & c2r or a1r & a2:
                    continue
                if max_annihilators >= 0 and _popcount(a1r | a2) > max_annihilators:
                    continue
                par = _popcount(a1r) * pc_c2
                for j in a1_bits:
                    below = (1 << j) - 1
                    par += _popcount(K & below)
                    if (K >> j) & 1:
                        par += _popcount(c2 & below)
                for j in _bits(c2r):
                    par += _popcount(c1 >> (j + 1))
                for j in _bits(a1r):
                    par += _popcount(a2 >> (j + 1))
                key = (c1 | c2r) | ((a1r | a2) << 32)
                v = w1 * w2
                acc[key] = acc.get(key, 0.0) + (-v if par & 1 else v)
    return _to_arrays(acc)


def jordan_wigner_terms(fkeys, coeffs):
    acc = {}
    for k, coeff in zip(fkeys, coeffs):
        k = int(k)
        C, A = k & LOW, k >> 32
        P, Mi, N = C & ~A, A & ~C, C & A
        XY = P | Mi
        both = C | A
        z0 = 0
        par = 0
        for m in range(both.bit_length() - 1, -1, -1):
            if (both >> m) & 1:
                par += ((C >> m) & 1) + ((A >> m) & 1)
            elif par & 1:
                z0 |= 1 << m
        base = complex(coeff) * 0.5 ** _popcount(XY | N)
        for Y in _submasks(XY):
            e = (_popcount(Y & Mi) - _popcount(Y & P)) & 3
            for Ns in _submasks(N):
                v = base * _PHASES[e]
                if _popcount(Ns) & 1:
                    v = -v
                key = XY | ((z0 | Y | Ns) << 32)
                acc[key] = acc.get(key, 0.0) + v
    return _to_arrays(acc)


def pauli_product(k1, v1, k2, v2):
    k1 = np.asarray(k1, dtype=np.uint64)
    k2 = np.asarray(k2, dtype=np.uint64)
    if len(k1) == 0 or len(k2) == 0:
        return np.zeros(0, np.uint64), np.zeros(0, np.complex128)
    low = np.uint64(LOW)
    x1, z1 = (k1 & low)[:, None], (k1 >> np.uint64(32))[:, None]
    x2, z2 = (k2 & low)[None, :], (k2 >> np.uint64(32))[None, :]
    x, z = x1 ^ x2, z1 ^ z2
    pc = np.bitwise_count
    e = (pc(x1 & z1).astype(np.int64) + pc(x2 & z2) - pc(x & z) + 2 * pc(z1 & x2)) & 3
    vals = np.asarray(v1)[:, None] * np.asarray(v2)[None, :] * np.array(_PHASES)[e]
    keys = (x | (z << np.uint64(32))).ravel()
    uniq, inv = np.unique(keys, return_inverse=True)
    out = np.zeros(len(uniq), dtype=np.complex128)
    np.add.at(out, inv, vals.ravel())
    return uniq, out


def pauli_apply(pkeys, coeffs, psi):
    psi = np.asarray(psi, dtype=np.complex128)
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.uint64)
    out = np.zeros(dim, dtype=np.complex128)
    for k, c in zip(np.asarray(pkeys, dtype=np.uint64), coeffs):
        x, z = k & np.uint64(LOW), k >> np.uint64(32)
        phase = _PHASES[int(np.bitwise_count(x & z)) & 3]
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
        np.add.at(out, (idx ^ x).astype(np.intp), c * phase * signs * psi)
    return out
