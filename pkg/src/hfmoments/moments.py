"""Coefficient tables <C_{p,k}> of (H + lam mu)^p and numeric moments.

``(H + lam mu)^p = sum_k lam^k C_{p,k}`` where ``C_{p,k}`` is the sum of all
operator words of length ``p`` over {H, mu} containing ``k`` factors of mu.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import __version__
from .fermion import FermionOperator, freeze_modes, lambda_powers
from .pauli import PauliSum, jordan_wigner
from .states import krylov_vectors

P_MAX = 4
ENTRIES = tuple((p, k) for p in range(1, P_MAX + 1) for k in range(p + 1))


@dataclass
class CoefficientTable:
    """``values[p, k] = <C_{p,k}>`` for 1 <= p <= 4, 0 <= k <= p.

    ``values[0, 0]`` holds the state norm (1 for normalized states); other
    unused slots are zero.
    """

    values: np.ndarray
    state: str = "trial"
    provenance: str = "exact"
    max_imag: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (P_MAX + 1, P_MAX + 1):
            raise ValueError(f"table shape {self.values.shape}, expected (5, 5)")

    def __getitem__(self, pk):
        return self.values[pk]

    def moments(self, lam, truncate=False):
        return assemble_moments(self, lam, truncate)

    def to_tsv(self):
        lines = [f"# hfmoments {__version__} coefficient table", "p\tk\tvalue\tstate\tprovenance"]
        for p, k in ENTRIES:
            lines.append(f"{p}\t{k}\t{float(self.values[p, k])!r}\t{self.state}\t{self.provenance}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text):
        values = np.zeros((P_MAX + 1, P_MAX + 1))
        values[0, 0] = 1.0
        state = provenance = None
        rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows or rows[0].split("\t")[:3] != ["p", "k", "value"]:
            raise ValueError("missing coefficient table header")
        for ln in rows[1:]:
            p, k, v, state, provenance = ln.split("\t")
            values[int(p), int(k)] = float(v)
        return cls(values, state or "trial", provenance or "exact")


@dataclass(frozen=True)
class MomentSet:
    m: tuple
    lam: float
    truncated: bool = False

    def __getitem__(self, p):
        return self.m[p - 1]


def assemble_moments(table: CoefficientTable, lam, truncate=False) -> MomentSet:
    """``m_p = sum_k lam^k T[p, k]``; ``truncate`` keeps only k <= 1."""
    lam = float(lam)
    if not np.isfinite(lam):
        raise ValueError("lambda must be finite")
    m = []
    for p in range(1, P_MAX + 1):
        kmax = min(p, 1) if truncate else p
        m.append(float(sum(lam ** k * table.values[p, k] for k in range(kmax + 1))))
    return MomentSet(tuple(m), lam, truncate)


def truncation_bound(table: CoefficientTable, lam):
    """``sum_{k>=2} |lam|^k |T[p, k]|`` for each p."""
    return [float(sum(abs(lam) ** k * abs(table.values[p, k]) for k in range(2, p + 1)))
            for p in range(1, P_MAX + 1)]


# --------------------------------------------------------------------------- #
# Krylov route


def word_expectation(vecs, word):
    """<psi| O_1 ... O_p |psi> from Krylov vectors for words up to length 4.

    Length 3 splits 1+2, length 4 splits 2+2 (bra word is reversed).
    """
    p = len(word)
    if p == 0:
        return np.vdot(vecs[""], vecs[""])
    if p == 1:
        return np.vdot(vecs[""], vecs[word])
    if p == 2:
        return np.vdot(vecs[word[0]], vecs[word[1]])
    if p == 3:
        return np.vdot(vecs[word[0]], vecs[word[1:]])
    return np.vdot(vecs[word[1] + word[0]], vecs[word[2:]])


def krylov_coefficient_table(h, mu, psi, state="trial") -> CoefficientTable:
    vecs = krylov_vectors(h, mu, psi)
    values = np.zeros((P_MAX + 1, P_MAX + 1))
    values[0, 0] = np.vdot(psi, psi).real
    max_imag = 0.0
    for p in range(1, P_MAX + 1):
        sums = np.zeros(p + 1, dtype=complex)
        for word in itertools.product("HM", repeat=p):
            sums[word.count("M")] += word_expectation(vecs, "".join(word))
        values[p, :p + 1] = sums.real
        max_imag = max(max_imag, float(np.abs(sums.imag).max()))
    return CoefficientTable(values, state, "exact", max_imag)


def dense_coefficient_matrices(h, mu):
    """Dense ``C_{p,k}`` from ``C[p,k] = C[p-1,k] H + C[p-1,k-1] mu``."""
    hm = h.to_dense() if isinstance(h, PauliSum) else np.asarray(h)
    mm = mu.to_dense() if isinstance(mu, PauliSum) else np.asarray(mu)
    prev = [np.eye(hm.shape[0], dtype=complex)]
    out = {}
    for p in range(1, P_MAX + 1):
        cur = []
        for k in range(p + 1):
            c = np.zeros_like(hm, dtype=complex)
            if k < p:
                c = c + prev[k] @ hm
            if k > 0:
                c = c + prev[k - 1] @ mm
            cur.append(c)
            out[p, k] = c
        prev = cur
    return out


def coefficient_operators(h: PauliSum, mu: PauliSum):
    """Pauli decompositions of every ``C_{p,k}`` (dense route, <= 10 qubits)."""
    if h.n_qubits > 10:
        raise ValueError("dense coefficient operators are limited to 10 qubits")
    return {pk: PauliSum.from_matrix(m) for pk, m in dense_coefficient_matrices(h, mu).items()}


def operator_table(ops, psi, state="trial", provenance="exact") -> CoefficientTable:
    """Table from explicit ``{(p, k): PauliSum}`` operators."""
    values = np.zeros((P_MAX + 1, P_MAX + 1))
    values[0, 0] = np.vdot(psi, psi).real
    max_imag = 0.0
    for pk, op in ops.items():
        e = op.expectation(psi)
        values[pk] = e.real
        max_imag = max(max_imag, abs(e.imag))
    return CoefficientTable(values, state, provenance, max_imag)


# --------------------------------------------------------------------------- #
# fermionic pipeline with moment-level freezing


def frozen_coefficient_operators(h: FermionOperator, mu: FermionOperator, frozen: dict,
                                 max_annihilators=None):
    """``{(p, k): PauliSum}``: fermionic ``C_{p,k}`` built in the larger space,
    then frozen and Jordan-Wigner encoded."""
    polys = lambda_powers(h, mu, P_MAX, max_annihilators)
    return {(poly.degree, k): jordan_wigner(freeze_modes(c, frozen))
            for poly in polys for k, c in enumerate(poly.coeffs)}


def frozen_pipeline_table(h, mu, frozen, psi, max_annihilators=None, state="trial"):
    ops = frozen_coefficient_operators(h, mu, frozen, max_annihilators)
    n_active = h.n_modes - len(frozen)
    if len(psi) != 1 << n_active:
        raise ValueError(f"state has {len(psi)} amplitudes, expected 2^{n_active}")
    return operator_table(ops, psi, state)


def embed_state(psi_active, n_modes, frozen):
    """Full-space vector with the frozen modes at their fixed occupations and
    the active modes (in increasing order) carrying ``psi_active``."""
    active = [m for m in range(n_modes) if m not in frozen]
    base = sum(int(occ) << int(m) for m, occ in frozen.items())
    sub = np.arange(len(psi_active))
    full_idx = np.full(len(psi_active), base, dtype=np.int64)
    for j, m in enumerate(active):
        full_idx |= ((sub >> j) & 1) << m
    out = np.zeros(1 << n_modes, dtype=np.complex128)
    out[full_idx] = psi_active
    return out
