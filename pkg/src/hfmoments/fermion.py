"""Second-quantized operators in canonical normal-ordered form.

A term is identified by two bitmasks, the set of creation modes ``C`` and the
set of annihilation modes ``A``; it stands for

    a+_{c1} a+_{c2} ... a+_{ck}  a_{al} ... a_{a2} a_{a1}

with ``c1 < c2 < ... < ck`` and ``a1 < ... < al``, i.e. creation indices
increasing and annihilation indices decreasing.  Because each block is a set,
the canonical sign is fixed and repeated modes cannot occur.  Keys are packed
as ``C | (A << 32)`` so at most 32 modes are supported.

Spin-orbitals are interleaved: spatial orbital ``p`` gives mode ``2p`` (alpha)
and ``2p + 1`` (beta).
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np

from . import kernels
from .integrals import DipoleIntegrals, MolecularIntegrals

#: Coefficients below this magnitude are dropped after every operation.
DROP_TOL = 1e-12
MAX_MODES = 32

_LOW = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


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


def _mask_to_modes(mask):
    mask = int(mask)
    return tuple(j for j in range(mask.bit_length()) if (mask >> j) & 1)


def normal_order_sign(creations, annihilations):
    """Sign of bringing ``a+_{c...} a_{a...}`` (as written) to canonical order.

    Returns 0 if a mode repeats inside either block.
    """
    def parity(seq, descending):
        if len(set(seq)) != len(seq):
            return None
        inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq))
                  if (seq[i] > seq[j]) != descending)
        return inv & 1

    pc = parity(list(creations), False)
    pa = parity(list(annihilations), True)
    if pc is None or pa is None:
        return 0
    return -1 if (pc + pa) & 1 else 1


class FermionOperator:
    """Immutable linear combination of canonical normal-ordered terms."""

    __slots__ = ("n_modes", "_keys", "_coeffs")

    def __init__(self, n_modes, keys=(), coeffs=(), *, _trusted=False):
        if not 0 <= n_modes <= MAX_MODES:
            raise ValueError(f"n_modes must be in [0, {MAX_MODES}]")
        self.n_modes = int(n_modes)
        if _trusted:
            self._keys, self._coeffs = keys, coeffs
        else:
            keys, coeffs = _canonical(keys, coeffs)
            limit = np.uint64((1 << n_modes) - 1)
            if len(keys) and (np.any((keys & _LOW) & ~limit) or np.any((keys >> _SHIFT) & ~limit)):
                raise ValueError("term refers to a mode outside the operator's range")
            self._keys, self._coeffs = keys, coeffs
        self._keys.setflags(write=False)
        self._coeffs.setflags(write=False)

    # -- construction ------------------------------------------------------ #
    @classmethod
    def zero(cls, n_modes):
        return cls(n_modes)

    @classmethod
    def constant(cls, n_modes, value):
        return cls(n_modes, [0], [value])

    @classmethod
    def from_terms(cls, n_modes, terms):
        """Build from ``{term: coeff}`` where a term is a sequence of
        ``(mode, is_creation)`` pairs.

        Sequences already of the form "creations then annihilations" are
        canonicalized directly; anything else is normal ordered with Wick's
        theorem.
        """
        result = cls.zero(n_modes)
        direct_keys, direct_coeffs = [], []
        for term, coeff in terms.items():
            ops = [(int(m), bool(c)) for m, c in term]
            for m, _ in ops:
                if not 0 <= m < n_modes:
                    raise ValueError(f"mode {m} outside [0, {n_modes})")
            flags = [c for _, c in ops]
            if all(flags[i] >= flags[i + 1] for i in range(len(flags) - 1)):
                cre = [m for m, c in ops if c]
                ann = [m for m, c in ops if not c]
                sign = normal_order_sign(cre, ann)
                if sign:
                    key = sum(1 << m for m in cre) | (sum(1 << m for m in ann) << 32)
                    direct_keys.append(key)
                    direct_coeffs.append(sign * coeff)
            else:
                prod = cls.constant(n_modes, coeff)
                for m, c in ops:
                    prod = wick_multiply(prod, ladder(n_modes, m, c))
                result = result + prod
        return result + cls(n_modes, np.array(direct_keys, dtype=np.uint64), direct_coeffs)

    # -- inspection -------------------------------------------------------- #
    @property
    def keys(self):
        return self._keys

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def terms(self):
        """``{(creation modes ascending, annihilation modes descending): coeff}``."""
        out = {}
        for k, c in zip(self._keys, self._coeffs):
            cre = _mask_to_modes(int(k) & 0xFFFFFFFF)
            ann = _mask_to_modes(int(k) >> 32)[::-1]
            out[(cre, ann)] = complex(c)
        return out

    def constant_term(self):
        if len(self._keys) and self._keys[0] == 0:
            return complex(self._coeffs[0])
        return 0.0

    def max_body(self):
        if not len(self._keys):
            return 0
        return int(np.bitwise_count(self._keys >> _SHIFT).max())

    def __len__(self):
        return len(self._keys)

    def __repr__(self):
        return f"FermionOperator(n_modes={self.n_modes}, n_terms={len(self)})"

    # -- algebra ----------------------------------------------------------- #
    def _check(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        if other.n_modes != self.n_modes:
            raise ValueError(f"mode count mismatch: {self.n_modes} vs {other.n_modes}")
        return other

    def __add__(self, other):
        if isinstance(other, Number):
            other = FermionOperator.constant(self.n_modes, other)
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FermionOperator(self.n_modes,
                               np.concatenate([self._keys, other._keys]),
                               np.concatenate([self._coeffs, other._coeffs]))

    __radd__ = __add__

    def __neg__(self):
        return FermionOperator(self.n_modes, self._keys.copy(), -self._coeffs, _trusted=True)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return FermionOperator(self.n_modes, self._keys.copy(), self._coeffs * other)
        if isinstance(other, FermionOperator):
            return wick_multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        return (self.n_modes == other.n_modes and np.array_equal(self._keys, other._keys)
                and np.array_equal(self._coeffs, other._coeffs))

    __hash__ = None

    def adjoint(self):
        """Hermitian conjugate: (c(C) a(A))^dagger = c(A) a(C)."""
        swapped = (self._keys >> _SHIFT) | ((self._keys & _LOW) << _SHIFT)
        return FermionOperator(self.n_modes, swapped, np.conj(self._coeffs))

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return len(diff) == 0 or float(np.abs(diff.coeffs).max()) <= atol

    def is_hermitian(self, atol=1e-12):
        return self.allclose(self.adjoint(), atol=atol)


def ladder(n_modes, mode, creation):
    """Single creation (``creation=True``) or annihilation operator."""
    key = (1 << mode) if creation else ((1 << mode) << 32)
    return FermionOperator(n_modes, [key], [1.0])


def number_operator(n_modes, modes=None):
    modes = range(n_modes) if modes is None else modes
    return FermionOperator(n_modes, [(1 << m) | ((1 << m) << 32) for m in modes],
                           np.ones(len(list(modes))))


def wick_multiply(a: FermionOperator, b: FermionOperator, max_annihilators=None):
    """Normal-ordered product ``a b``.

    With ``max_annihilators`` set, terms with more annihilators than that are
    discarded; such terms vanish on any sector with that many particles.
    """
    if a.n_modes != b.n_modes:
        raise ValueError(f"mode count mismatch: {a.n_modes} vs {b.n_modes}")
    if len(a) == 0 or len(b) == 0:
        return FermionOperator.zero(a.n_modes)
    limit = -1 if max_annihilators is None else int(max_annihilators)
    keys, coeffs = kernels.wick_product(a.keys, a.coeffs, b.keys, b.coeffs, limit)
    keys, coeffs = _canonical(keys, coeffs)
    return FermionOperator(a.n_modes, keys, coeffs, _trusted=True)


# --------------------------------------------------------------------------- #
# physical operators

def build_hamiltonian(mi: MolecularIntegrals) -> FermionOperator:
    """Spin-orbital Hamiltonian from spatial integrals in chemists' notation.

    H = sum h_pq a+_{p s} a_{q s}
        + 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s} + e_core
    """
    n = mi.n_orb
    n_modes = 2 * n
    acc = {}

    def add(cre, ann, value):
        sign = normal_order_sign(cre, ann)
        if not sign:
            return
        key = sum(1 << m for m in cre) | (sum(1 << m for m in ann) << 32)
        acc[key] = acc.get(key, 0.0) + sign * value

    add((), (), mi.e_core)
    for p in range(n):
        for q in range(n):
            if mi.h[p, q] != 0.0:
                for s in (0, 1):
                    add((2 * p + s,), (2 * q + s,), mi.h[p, q])
    nz = np.argwhere(mi.g != 0.0)
    for p, q, r, s in nz:
        v = 0.5 * mi.g[p, q, r, s]
        for sig in (0, 1):
            for tau in (0, 1):
                add((2 * p + sig, 2 * r + tau), (2 * s + tau, 2 * q + sig), v)
    keys = np.fromiter(acc.keys(), dtype=np.uint64, count=len(acc))
    return FermionOperator(n_modes, keys, np.fromiter(acc.values(), dtype=float, count=len(acc)))


def build_dipole(di: DipoleIntegrals) -> FermionOperator:
    """One-body operator ``sum f_jk a+_j a_k`` (both spins) plus ``d_core``."""
    n = di.n_orb
    keys, vals = [0], [di.d_core]
    for p in range(n):
        for q in range(n):
            if di.f[p, q] != 0.0:
                for s in (0, 1):
                    keys.append((1 << (2 * p + s)) | ((1 << (2 * q + s)) << 32))
                    vals.append(di.f[p, q])
    return FermionOperator(2 * n, np.array(keys, dtype=np.uint64), vals)


# --------------------------------------------------------------------------- #
# lambda polynomials

@dataclass(frozen=True)
class LambdaPolyOperator:
    """Coefficients ``C[k]`` with ``(H + lam mu)^p = sum_k lam^k C[k]``."""

    degree: int
    coeffs: tuple

    def evaluate(self, lam):
        out = FermionOperator.zero(self.coeffs[0].n_modes)
        for k, c in enumerate(self.coeffs):
            out = out + c * (lam ** k)
        return out


def lambda_powers(h, mu, p_max=4, max_annihilators=None):
    """All ``LambdaPolyOperator`` for degrees 1..p_max, built by the recursion
    ``C[p, k] = C[p-1, k] H + C[p-1, k-1] mu``."""
    if h.n_modes != mu.n_modes:
        raise ValueError("mode count mismatch between H and mu")
    n = h.n_modes
    prev = [FermionOperator.constant(n, 1.0)]
    out = []
    for p in range(1, p_max + 1):
        cur = []
        for k in range(p + 1):
            term = FermionOperator.zero(n)
            if k < p:
                term = term + wick_multiply(prev[k], h, max_annihilators)
            if k > 0:
                term = term + wick_multiply(prev[k - 1], mu, max_annihilators)
            cur.append(term)
        out.append(LambdaPolyOperator(p, tuple(cur)))
        prev = cur
    return out


def lambda_power(h, mu, p, max_annihilators=None) -> LambdaPolyOperator:
    if not 1 <= p <= 4:
        raise ValueError("p must be in 1..4")
    return lambda_powers(h, mu, p, max_annihilators)[-1]


# --------------------------------------------------------------------------- #
# frozen modes

def freeze_modes(op: FermionOperator, frozen: dict):
    """Contract frozen modes against a product occupation state.

    ``frozen`` maps mode -> occupation (0 or 1).  The result acts on the
    remaining modes, relabeled contiguously in increasing order (see
    :func:`active_modes`), and its matrix equals the block of ``op`` between
    occupation-basis states carrying the given frozen occupations.

    A canonical term survives only if each frozen mode appears either in both
    blocks (it is then a number operator, requiring occupation 1) or in
    neither.  The remaining sign is the parity of (occupied frozen modes not in
    the term) lying below each active ladder operator.
    """
    n = op.n_modes
    F = 0
    O = 0
    for mode, occ in frozen.items():
        mode = int(mode)
        if not 0 <= mode < n:
            raise ValueError(f"frozen mode {mode} outside [0, {n})")
        if occ not in (0, 1):
            raise ValueError(f"occupation of mode {mode} must be 0 or 1, got {occ!r}")
        F |= 1 << mode
        O |= occ << mode
    active = [m for m in range(n) if not (F >> m) & 1]
    n_active = len(active)
    keys = op.keys
    cre = keys & _LOW
    ann = keys >> _SHIFT
    Fu, Ou = np.uint64(F), np.uint64(O)
    gc, ga = cre & Fu, ann & Fu
    keep = (gc == ga) & ((gc & ~Ou) == 0)
    cre, ann, gc = cre[keep], ann[keep], gc[keep]
    coeffs = op.coeffs[keep].copy()
    ca, aa = cre & ~Fu, ann & ~Fu
    rest = Ou & ~gc
    parity = np.zeros(len(cre), dtype=np.int64)
    for f in range(n):
        if (O >> f) & 1:
            above = np.uint64(~((2 << f) - 1) & 0xFFFFFFFF)
            in_rest = ((rest >> np.uint64(f)) & np.uint64(1)).astype(np.int64)
            parity += in_rest * (np.bitwise_count(ca & above) + np.bitwise_count(aa & above))
    coeffs[parity & 1 == 1] *= -1
    new_c = np.zeros(len(cre), dtype=np.uint64)
    new_a = np.zeros(len(cre), dtype=np.uint64)
    for new, old in enumerate(active):
        bit = np.uint64(1 << old)
        new_c |= ((ca & bit) >> np.uint64(old)) << np.uint64(new)
        new_a |= ((aa & bit) >> np.uint64(old)) << np.uint64(new)
    return FermionOperator(n_active, new_c | (new_a << _SHIFT), coeffs)


def active_modes(n_modes, frozen):
    """Old mode indices of the active modes, in their new order."""
    return [m for m in range(n_modes) if m not in frozen]


def spatial_to_mode_occupations(orbitals, occupation=1):
    """Frozen-mode map for whole spatial orbitals (both spin-orbitals)."""
    out = {}
    for p in orbitals:
        out[2 * p] = occupation
        out[2 * p + 1] = occupation
    return out


def format_operator(op: FermionOperator) -> str:
    """Text dump, one term per line: ``re im  modes`` with ``^`` for creation."""
    lines = []
    for (cre, ann), c in op.terms.items():
        ops = " ".join([f"{m}^" for m in cre] + [str(m) for m in ann])
        lines.append(f"{c.real: .16e} {c.imag: .16e} {ops}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


def parse_operator(text: str, n_modes: int) -> FermionOperator:
    terms = {}
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        coeff = complex(float(parts[0]), float(parts[1]))
        seq = tuple((int(t.rstrip("^")), t.endswith("^")) for t in parts[2:])
        terms[seq] = terms.get(seq, 0.0) + coeff
    return FermionOperator.from_terms(n_modes, terms)
