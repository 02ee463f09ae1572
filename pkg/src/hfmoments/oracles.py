"""Brute-force reference implementations.

Everything here works directly on occupation-number basis states and shares
no code with the operator algebra it is used to check.  Dimensions are
``2^n``, so keep ``n`` small.
"""

from __future__ import annotations

import itertools

import numpy as np


def apply_ladder_sequence(ops, occ):
    """Apply ``ops`` (list of (mode, is_creation), leftmost first) to the basis
    state with occupation bitmask ``occ``.  Returns (sign, new_occ) or None."""
    sign = 1
    for mode, creation in reversed(ops):
        bit = 1 << mode
        if creation == bool(occ & bit):
            return None
        if bin(occ & (bit - 1)).count("1") % 2:
            sign = -sign
        occ ^= bit
    return sign, occ


def fermion_matrix(op):
    """Dense matrix of a FermionOperator by acting term-by-term on every
    occupation basis state."""
    n = op.n_modes
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    for (cre, ann), coeff in op.terms.items():
        seq = [(m, True) for m in cre] + [(m, False) for m in ann]
        for occ in range(dim):
            res = apply_ladder_sequence(seq, occ)
            if res is not None:
                sign, new = res
                mat[new, occ] += sign * coeff
    return mat


def ladder_matrix(n, mode, creation):
    dim = 1 << n
    mat = np.zeros((dim, dim))
    for occ in range(dim):
        res = apply_ladder_sequence([(mode, creation)], occ)
        if res is not None:
            mat[res[1], occ] = res[0]
    return mat


def pauli_matrix(word):
    """Kronecker-product matrix of a Pauli string (qubit 0 = least significant bit)."""
    single = {
        "I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1]),
    }
    mat = np.ones((1, 1))
    for letter in word:
        mat = np.kron(single[letter], mat)
    return mat


def pauli_sum_matrix(ps):
    dim = 1 << ps.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for word, c in ps.terms.items():
        mat += c * pauli_matrix(word)
    return mat


def _spin_integrals(mi):
    """Antisymmetrized spin-orbital integrals <pq||rs> and one-body h."""
    n = mi.n_orb
    ns = 2 * n
    h = np.zeros((ns, ns))
    for p in range(ns):
        for q in range(ns):
            if p % 2 == q % 2:
                h[p, q] = mi.h[p // 2, q // 2]
    # physicists' <pq|rs> = (pr|qs) with spin deltas
    phys = np.zeros((ns,) * 4)
    for p, q, r, s in itertools.product(range(ns), repeat=4):
        if p % 2 == r % 2 and q % 2 == s % 2:
            phys[p, q, r, s] = mi.g[p // 2, r // 2, q // 2, s // 2]
    return h, phys - phys.transpose(0, 1, 3, 2)


def _excitation_sign(occ, removed, added):
    """Sign of |occ> -> a+_added ... a_removed ... |occ> in canonical ordering."""
    ops = [(m, True) for m in added] + [(m, False) for m in removed]
    res = apply_ladder_sequence(ops, occ)
    return res[0]


def slater_condon_matrix(mi):
    """Full Fock-space Hamiltonian from Slater-Condon rules on determinant pairs."""
    n = 2 * mi.n_orb
    dim = 1 << n
    h, anti = _spin_integrals(mi)
    mat = np.zeros((dim, dim))
    for I in range(dim):
        occ_i = [m for m in range(n) if (I >> m) & 1]
        for J in range(dim):
            if bin(I).count("1") != bin(J).count("1"):
                continue
            diff_out = [m for m in range(n) if (J >> m) & 1 and not (I >> m) & 1]
            diff_in = [m for m in range(n) if (I >> m) & 1 and not (J >> m) & 1]
            k = len(diff_out)
            if k == 0:
                val = mi.e_core + sum(h[a, a] for a in occ_i)
                val += 0.5 * sum(anti[a, b, a, b] for a in occ_i for b in occ_i)
            elif k == 1:
                (m,), (p,) = diff_out, diff_in
                common = [b for b in occ_i if b != p]
                val = h[p, m] + sum(anti[p, b, m, b] for b in common)
                val *= _excitation_sign(J, [m], [p])
            elif k == 2:
                m, n_ = diff_out
                p, q = diff_in
                # a+_p a+_q a_n a_m with canonical ordering p<q, m<n
                val = anti[p, q, m, n_] * _excitation_sign(J, [n_, m], [p, q])
            else:
                continue
            mat[I, J] = val
    return mat


def project_occupation(matrix, n_modes, frozen):
    """Block of ``matrix`` between basis states carrying the frozen occupations,
    indexed by the remaining modes in increasing order."""
    active = [m for m in range(n_modes) if m not in frozen]
    base = sum(occ << m for m, occ in frozen.items())
    idx = []
    for sub in range(1 << len(active)):
        occ = base
        for j, m in enumerate(active):
            if (sub >> j) & 1:
                occ |= 1 << m
        idx.append(occ)
    idx = np.array(idx)
    return matrix[np.ix_(idx, idx)]


def central_moment_cumulants(values, weights):
    """Cumulants 1..4 of a discrete distribution via central moments."""
    values = np.asarray(values, float)
    weights = np.asarray(weights, float) / np.sum(weights)
    mean = float(weights @ values)
    mu2 = float(weights @ (values - mean) ** 2)
    mu3 = float(weights @ (values - mean) ** 3)
    mu4 = float(weights @ (values - mean) ** 4)
    return mean, mu2, mu3, mu4 - 3 * mu2 ** 2


def minimum_qwc_groups(words):
    """Smallest number of qubit-wise commuting groups by exhaustive search."""
    from .pauli import is_qubitwise_commuting

    n = len(words)
    best = n
    assign = [0] * n

    def compatible(i, g):
        return all(is_qubitwise_commuting([words[i], words[j]]) for j in range(i) if assign[j] == g)

    def search(i, used):
        nonlocal best
        if used >= best:
            return
        if i == n:
            best = used
            return
        for g in range(used):
            if compatible(i, g):
                assign[i] = g
                search(i + 1, used)
        assign[i] = used
        search(i + 1, used + 1)

    search(0, 0)
    return best


def random_fermion_operator(n_modes, rng, n_terms=6, max_body=2, hermitian=False, real=False):
    """Random operator built from random ladder strings (not necessarily canonical)."""
    from .fermion import FermionOperator

    terms = {}
    for _ in range(n_terms):
        body = int(rng.integers(0, max_body + 1))
        cre = rng.choice(n_modes, size=body, replace=False) if body else []
        ann = rng.choice(n_modes, size=body, replace=False) if body else []
        seq = tuple((int(m), True) for m in cre) + tuple((int(m), False) for m in ann)
        c = rng.normal() + (0 if real else 1j * rng.normal())
        terms[seq] = terms.get(seq, 0) + c
    op = FermionOperator.from_terms(n_modes, terms)
    if hermitian:
        op = op + op.adjoint()
    return op
