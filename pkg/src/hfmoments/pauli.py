"""Qubit operators as sums of packed Pauli words.

A word on ``n`` qubits is a pair of bitmasks ``(x, z)``; qubit ``j`` carries
``I, X, Z, Y`` for ``(x_j, z_j) = (0,0), (1,0), (0,1), (1,1)`` and the word is
``i^{|x & z|} X^x Z^z`` so that the letter ``Y`` is the usual Pauli-Y.  Keys are
packed as ``x | (z << 32)``.  In string form qubit 0 is the leftmost letter.

Basis-state convention: amplitude index ``sum_j n_j 2^j``; mode ``j`` of a
fermionic operator is qubit ``j``.
"""

from __future__ import annotations

from numbers import Number

import numpy as np
import scipy.sparse as sp

from . import kernels
from .fermion import FermionOperator

DROP_TOL = 1e-12
MAX_QUBITS = 32

_LOW = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)
_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}


def word_to_key(word: str) -> int:
    x = z = 0
    for j, letter in enumerate(word.upper()):
        if letter not in _BITS:
            raise ValueError(f"bad Pauli letter {letter!r} in {word!r}")
        bx, bz = _BITS[letter]
        x |= bx << j
        z |= bz << j
    return x | (z << 32)


def key_to_word(key: int, n_qubits: int) -> str:
    key = int(key)
    x, z = key & 0xFFFFFFFF, key >> 32
    return "".join(_LETTERS[((x >> j) & 1, (z >> j) & 1)] for j in range(n_qubits))


def _canonical(keys, coeffs, tol=DROP_TOL):
    keys = np.asarray(keys, dtype=np.uint64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if len(keys) and len(np.unique(keys)) != len(keys):
        keys, inv = np.unique(keys, return_inverse=True)
        summed = np.zeros(len(keys), dtype=np.complex128)
        np.add.at(summed, inv, coeffs)
        coeffs = summed
    keep = np.abs(coeffs) >= tol
    keys, coeffs = keys[keep], coeffs[keep]
    order = np.argsort(keys, kind="stable")
    return keys[order], coeffs[order]


class PauliSum:
    """Immutable sum of Pauli words with complex coefficients."""

    __slots__ = ("n_qubits", "_keys", "_coeffs", "_sparse")

    def __init__(self, n_qubits, keys=(), coeffs=(), *, tol=DROP_TOL, _trusted=False):
        if not 0 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [0, {MAX_QUBITS}]")
        self.n_qubits = int(n_qubits)
        if not _trusted:
            keys, coeffs = _canonical(keys, coeffs, tol)
            limit = np.uint64((1 << n_qubits) - 1)
            if len(keys) and (np.any((keys & _LOW) & ~limit) or np.any((keys >> _SHIFT) & ~limit)):
                raise ValueError("word longer than n_qubits")
        self._keys, self._coeffs = keys, coeffs
        self._keys.setflags(write=False)
        self._coeffs.setflags(write=False)
        self._sparse = None

    @classmethod
    def from_words(cls, n_qubits, terms: dict):
        """Build from ``{"XIZY": coeff}``; every word must have length n_qubits."""
        keys, coeffs = [], []
        for word, c in terms.items():
            if len(word) != n_qubits:
                raise ValueError(f"word {word!r} does not have length {n_qubits}")
            keys.append(word_to_key(word))
            coeffs.append(c)
        return cls(n_qubits, np.array(keys, dtype=np.uint64), coeffs)

    @classmethod
    def identity(cls, n_qubits, value=1.0):
        return cls(n_qubits, [0], [value])

    @classmethod
    def from_matrix(cls, matrix, tol=DROP_TOL):
        """Pauli decomposition of a dense ``2^n x 2^n`` matrix.

        Uses ``c(x, z) = (-i)^{|x&z|} / 2^n * sum_i (-1)^{z.i} M[i^x, i]``; for
        every ``x`` the sum over ``z`` is a Walsh-Hadamard transform.
        """
        matrix = np.asarray(matrix, dtype=np.complex128)
        dim = matrix.shape[0]
        n = dim.bit_length() - 1
        if matrix.shape != (dim, dim) or 1 << n != dim:
            raise ValueError("matrix must be square with a power-of-two dimension")
        idx = np.arange(dim)
        table = matrix[idx[None, :] ^ idx[:, None], idx[None, :]]  # table[x, i]
        table = fwht(table, axis=1)
        xs = np.repeat(idx.astype(np.uint64), dim)
        zs = np.tile(idx.astype(np.uint64), dim)
        phase = np.array([1, -1j, -1, 1j])[np.bitwise_count(xs & zs) & 3]
        coeffs = table.ravel() * phase / dim
        keep = np.abs(coeffs) >= tol
        return cls(n, xs[keep] | (zs[keep] << _SHIFT), coeffs[keep], tol=tol)

    # -- inspection -------------------------------------------------------- #
    @property
    def keys(self):
        return self._keys

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def x_masks(self):
        return self._keys & _LOW

    @property
    def z_masks(self):
        return self._keys >> _SHIFT

    @property
    def terms(self):
        return {key_to_word(k, self.n_qubits): complex(c) for k, c in zip(self._keys, self._coeffs)}

    def words(self):
        return [key_to_word(k, self.n_qubits) for k in self._keys]

    def __len__(self):
        return len(self._keys)

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self)})"

    def is_hermitian(self, atol=1e-12):
        return len(self) == 0 or float(np.abs(self._coeffs.imag).max()) <= atol

    def allclose(self, other, atol=1e-10):
        diff = self - other
        return len(diff) == 0 or float(np.abs(diff.coeffs).max()) <= atol

    # -- algebra ----------------------------------------------------------- #
    def _check(self, other):
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other):
        if isinstance(other, Number):
            other = PauliSum.identity(self.n_qubits, other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum(self.n_qubits, np.concatenate([self._keys, other._keys]),
                        np.concatenate([self._coeffs, other._coeffs]))

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self.n_qubits, self._keys.copy(), -self._coeffs, _trusted=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Number):
            return PauliSum(self.n_qubits, self._keys.copy(), self._coeffs * other)
        if isinstance(other, PauliSum):
            self._check(other)
            if not len(self) or not len(other):
                return PauliSum(self.n_qubits)
            keys, coeffs = kernels.pauli_product(self._keys, self._coeffs, other._keys, other._coeffs)
            return PauliSum(self.n_qubits, keys, coeffs)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    # -- action on states -------------------------------------------------- #
    def apply(self, psi):
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        if psi.shape != (1 << self.n_qubits,):
            raise ValueError(f"state of length {psi.shape} does not match {self.n_qubits} qubits")
        if not len(self):
            return np.zeros_like(psi)
        return kernels.pauli_apply(self._keys, self._coeffs, psi)

    def expectation(self, psi):
        if np.shape(psi) != (1 << self.n_qubits,):
            raise ValueError(f"state of length {np.shape(psi)} does not match {self.n_qubits} qubits")
        nz = np.flatnonzero(psi)
        if len(nz) == 1:
            # basis state: only Z-type words contribute
            b = np.uint64(nz[0])
            diag = (self._keys & _LOW) == 0
            z = self._keys[diag] >> _SHIFT
            sign = 1.0 - 2.0 * (np.bitwise_count(z & b) & 1)
            return complex(abs(psi[nz[0]]) ** 2 * (self._coeffs[diag] @ sign))
        return complex(np.vdot(psi, self.apply(psi)))

    def to_sparse(self):
        """CSR matrix (cached); built from all terms with vectorized numpy."""
        if self._sparse is None:
            dim = 1 << self.n_qubits
            idx = np.arange(dim, dtype=np.uint64)
            rows, cols, vals = [], [], []
            chunk = max(1, (1 << 22) // dim)
            for start in range(0, len(self), chunk):
                k = self._keys[start:start + chunk]
                c = self._coeffs[start:start + chunk]
                x, z = (k & _LOW)[:, None], (k >> _SHIFT)[:, None]
                phase = np.array([1, 1j, -1, -1j])[np.bitwise_count(x & z) & 3]
                sign = 1.0 - 2.0 * (np.bitwise_count(idx[None, :] & z) & 1)
                rows.append((idx[None, :] ^ x).ravel().astype(np.int64))
                cols.append(np.broadcast_to(idx[None, :], (len(k), dim)).ravel().astype(np.int64))
                vals.append((c[:, None] * phase * sign).ravel())
            if rows:
                mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                    shape=(dim, dim)).tocsr()
            else:
                mat = sp.csr_matrix((dim, dim), dtype=np.complex128)
            mat.sum_duplicates()
            self._sparse = mat
        return self._sparse

    def to_dense(self):
        return self.to_sparse().toarray()


def fwht(a, axis=-1):
    """Unnormalized Walsh-Hadamard transform along ``axis``: ``out[z] = sum_i (-1)^{z.i} a[i]``."""
    a = np.moveaxis(np.array(a, copy=True), axis, -1)
    n = a.shape[-1]
    h = 1
    shape = a.shape
    while h < n:
        a = a.reshape(shape[:-1] + (n // (2 * h), 2, h))
        lo = a[..., 0, :].copy()
        hi = a[..., 1, :]
        a[..., 0, :] += hi
        a[..., 1, :] = lo - hi
        a = a.reshape(shape)
        h *= 2
    return np.moveaxis(a, -1, axis)


def jordan_wigner(op: FermionOperator) -> PauliSum:
    """Jordan-Wigner image: ``a+_j -> Z_0 ... Z_{j-1} (X_j - i Y_j) / 2``."""
    if not len(op):
        return PauliSum(op.n_modes)
    keys, coeffs = kernels.jordan_wigner_terms(op.keys, op.coeffs)
    return PauliSum(op.n_modes, keys, coeffs)


def identity_component(ps: PauliSum) -> float:
    """Coefficient of the identity word, i.e. ``Tr(ps) / 2^n``: the value of
    the operator in the maximally mixed state."""
    if len(ps) and ps.keys[0] == 0:
        return float(ps.coeffs[0].real)
    return 0.0


# --------------------------------------------------------------------------- #
# measurement grouping

def group_qubitwise_commuting(words, n_qubits=None):
    """Greedy largest-first partition into qubit-wise commuting groups.

    ``words`` are Pauli strings or packed keys.  Words are visited by
    decreasing weight (ties broken by packed key, i.e. lexicographic on the
    packed form) and placed in the first group they are compatible with.
    Returns a list of groups, each a list of indices into ``words``.
    """
    keys = np.array([word_to_key(w) if isinstance(w, str) else int(w) for w in words], dtype=np.uint64)
    if not len(keys):
        return []
    x, z = keys & _LOW, keys >> _SHIFT
    support = x | z
    weight = np.bitwise_count(support)
    order = np.lexsort((keys, -weight.astype(np.int64)))
    gx = np.zeros(len(keys), dtype=np.uint64)
    gz = np.zeros(len(keys), dtype=np.uint64)
    gs = np.zeros(len(keys), dtype=np.uint64)
    members = []
    for i in order:
        n_groups = len(members)
        if n_groups:
            clash = ((gx[:n_groups] ^ x[i]) | (gz[:n_groups] ^ z[i])) & gs[:n_groups] & support[i]
            hits = np.flatnonzero(clash == 0)
        else:
            hits = ()
        if len(hits):
            g = hits[0]
            members[g].append(int(i))
        else:
            g = n_groups
            members.append([int(i)])
        gx[g] |= x[i]
        gz[g] |= z[i]
        gs[g] |= support[i]
    return members


def is_qubitwise_commuting(words):
    keys = [word_to_key(w) if isinstance(w, str) else int(w) for w in words]
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            xa, za, xb, zb = keys[a] & 0xFFFFFFFF, keys[a] >> 32, keys[b] & 0xFFFFFFFF, keys[b] >> 32
            if ((xa ^ xb) | (za ^ zb)) & (xa | za) & (xb | zb):
                return False
    return True
