"""Statevector simulation: reference and UCCD trial states, Krylov vectors,
sector-restricted exact diagonalization and variational optimization.

States are plain complex numpy arrays of length ``2^n``.  Basis index
``i = sum_j n_j 2^j``, so mode/qubit 0 is the least significant bit; written
as an occupation string, mode 0 is the leftmost character.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .pauli import PauliSum

# --------------------------------------------------------------------------- #
# basis helpers


def basis_index(occupied):
    return sum(1 << int(m) for m in set(occupied))


def occupation_string(index, n_qubits):
    """Occupation string with mode 0 leftmost, e.g. index 3 on 4 qubits -> '1100'."""
    return "".join("1" if (index >> j) & 1 else "0" for j in range(n_qubits))


def hf_state(n_qubits, occupied):
    """Computational basis state with exactly the ``occupied`` modes filled."""
    for m in occupied:
        if not 0 <= int(m) < n_qubits:
            raise ValueError(f"occupied mode {m} outside [0, {n_qubits})")
    psi = np.zeros(1 << n_qubits, dtype=np.complex128)
    psi[basis_index(occupied)] = 1.0
    return psi


def sector_indices(n_qubits, n_elec, ms2=None):
    """Basis indices with ``n_elec`` particles (and ``n_alpha - n_beta = ms2``;
    alpha modes are the even ones)."""
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    keep = np.bitwise_count(idx) == n_elec
    if ms2 is not None:
        even = np.uint64(int("01" * 16, 2) & ((1 << n_qubits) - 1))
        na = np.bitwise_count(idx & even).astype(np.int64)
        nb = np.bitwise_count(idx & ~even).astype(np.int64)
        keep &= (na - nb) == ms2
    return np.flatnonzero(keep)


def _as_sparse(op):
    if isinstance(op, PauliSum):
        return op.to_sparse()
    if sp.issparse(op):
        return op.tocsr()
    return sp.csr_matrix(np.asarray(op))


# --------------------------------------------------------------------------- #
# UCCD ansatz


def _spin(mode):
    return 1 if mode % 2 == 0 else -1


def _parse_excitation(text):
    m = re.fullmatch(r"\s*(\d+)\s*,\s*(\d+)\s*->\s*(\d+)\s*,\s*(\d+)\s*", text)
    if not m:
        raise ValueError(f"cannot parse excitation {text!r}; expected 'i,j->a,b'")
    return tuple(int(v) for v in m.groups())


@dataclass(frozen=True)
class AnsatzSpec:
    """Reference occupation plus an ordered list of doubles ``(i, j, a, b)``
    meaning ``i, j -> a, b``, applied in list order."""

    n_qubits: int
    occupied: tuple
    excitations: tuple = ()
    thetas: tuple = field(default=None)

    def __post_init__(self):
        occ = tuple(sorted(int(m) for m in self.occupied))
        object.__setattr__(self, "occupied", occ)
        if len(set(occ)) != len(occ) or any(not 0 <= m < self.n_qubits for m in occ):
            raise ValueError("occupied modes must be distinct and in range")
        exc = tuple(tuple(int(v) for v in e) for e in self.excitations)
        object.__setattr__(self, "excitations", exc)
        thetas = (0.0,) * len(exc) if self.thetas is None else tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", thetas)
        if len(thetas) != len(exc):
            raise ValueError(f"{len(thetas)} thetas for {len(exc)} excitations")
        occ_set = set(occ)
        if len(set(exc)) != len(exc):
            raise ValueError("duplicate excitation")
        for i, j, a, b in exc:
            if not (i < j and a < b):
                raise ValueError(f"excitation {(i, j, a, b)} must have i<j and a<b")
            if i not in occ_set or j not in occ_set:
                raise ValueError(f"excitation {(i, j, a, b)}: {i},{j} must be occupied")
            if a in occ_set or b in occ_set or b >= self.n_qubits:
                raise ValueError(f"excitation {(i, j, a, b)}: {a},{b} must be virtual modes")

    def with_thetas(self, thetas):
        return replace(self, thetas=tuple(float(t) for t in thetas))

    def to_config(self):
        """Flat string mapping suitable for a configparser section."""
        return {
            "n_qubits": str(self.n_qubits),
            "occupied": " ".join(map(str, self.occupied)),
            "excitations": "; ".join(f"{i},{j}->{a},{b}" for i, j, a, b in self.excitations),
            "thetas": " ".join(repr(t) for t in self.thetas),
        }

    @classmethod
    def from_config(cls, section):
        exc_text = section.get("excitations", "").strip()
        excitations = [_parse_excitation(t) for t in exc_text.split(";") if t.strip()]
        theta_text = section.get("thetas", "").strip()
        thetas = [float(t) for t in theta_text.split()] if theta_text else None
        return cls(int(section["n_qubits"]), tuple(int(m) for m in section.get("occupied", "").split()),
                   tuple(excitations), thetas)


def default_doubles(n_qubits, occupied, orbsym=None):
    """All S_z-conserving doubles from ``occupied`` into the virtual modes.

    With ``orbsym`` (1-based abelian irrep labels per spatial orbital, as in
    FCIDUMP) only symmetry-allowed excitations are kept.
    """
    occ = sorted(occupied)
    virt = [m for m in range(n_qubits) if m not in set(occ)]
    out = []
    for ii, i in enumerate(occ):
        for j in occ[ii + 1:]:
            for aa, a in enumerate(virt):
                for b in virt[aa + 1:]:
                    if _spin(i) + _spin(j) != _spin(a) + _spin(b):
                        continue
                    if orbsym is not None:
                        sym = [int(orbsym[m // 2]) - 1 for m in (i, j, a, b)]
                        if sym[0] ^ sym[1] ^ sym[2] ^ sym[3]:
                            continue
                    out.append((i, j, a, b))
    return out


def _excitation_tables(n_qubits, exc):
    """Basis indices carrying (i, j occupied, a, b empty), their partners and
    the sign of ``a+_a a+_b a_j a_i`` on them."""
    i, j, a, b = exc
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    need = (1 << i) | (1 << j)
    empty = (1 << a) | (1 << b)
    src = idx[((idx & need) == need) & ((idx & empty) == 0)]
    occ = src.copy()
    parity = np.zeros(len(src), dtype=np.int64)
    for mode in (i, j, b, a):  # rightmost operator acts first
        parity += np.bitwise_count(occ & ((1 << mode) - 1))
        occ ^= 1 << mode
    sign = 1.0 - 2.0 * (parity & 1)
    return src, occ, sign


class UCCDCircuit:
    """Exact product of excitation rotations ``exp(theta_t (T_t - T_t^+))``.

    For one double, ``T - T^+`` couples each determinant pair ``(D, D')`` as a
    real 2x2 rotation, so the exponential is applied exactly in place.
    """

    def __init__(self, spec: AnsatzSpec):
        self.spec = spec
        self.tables = [_excitation_tables(spec.n_qubits, e) for e in spec.excitations]

    def reference(self):
        return hf_state(self.spec.n_qubits, self.spec.occupied)

    def rotate(self, psi, t, theta):
        src, dst, sign = self.tables[t]
        c, s = np.cos(theta), np.sin(theta) * sign
        out = psi.copy()
        out[src] = c * psi[src] - s * psi[dst]
        out[dst] = c * psi[dst] + s * psi[src]
        return out

    def generator(self, psi, t):
        src, dst, sign = self.tables[t]
        out = np.zeros_like(psi)
        out[dst] = sign * psi[src]
        out[src] = -sign * psi[dst]
        return out

    def state(self, thetas=None):
        thetas = self.spec.thetas if thetas is None else thetas
        psi = self.reference()
        for t, theta in enumerate(thetas):
            psi = self.rotate(psi, t, theta)
        return psi

    def energy_and_gradient(self, thetas, hmat):
        """Energy and its gradient by one forward and one backward sweep."""
        psi = self.state(thetas)
        phi = hmat @ psi
        energy = float(np.vdot(psi, phi).real)
        grad = np.zeros(len(thetas))
        for t in range(len(thetas) - 1, -1, -1):
            grad[t] = 2.0 * np.vdot(phi, self.generator(psi, t)).real
            psi = self.rotate(psi, t, -thetas[t])
            phi = self.rotate(phi, t, -thetas[t])
        return energy, grad


def uccd_state(spec: AnsatzSpec):
    return UCCDCircuit(spec).state()


class VQEConvergenceError(RuntimeError):
    """Raised when no start reaches the gradient tolerance; ``best`` holds the
    lowest-energy spec found."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


def vqe_optimize(spec: AnsatzSpec, h, seed=0, n_starts=3, gtol=1e-6, maxiter=2000, spread=0.1):
    """Minimize <psi(theta)|H|psi(theta)> with BFGS on adjoint gradients.

    The first start is ``spec.thetas``; the others add seeded normal
    perturbations of width ``spread``.  Returns the lowest-energy converged
    result (gradient norm below ``gtol``).
    """
    circuit = UCCDCircuit(spec)
    hmat = _as_sparse(h)
    n = len(spec.excitations)
    if n == 0:
        return spec
    rng = np.random.default_rng(seed)
    x0 = np.array(spec.thetas)
    starts = [x0] + [x0 + spread * rng.standard_normal(n) for _ in range(n_starts - 1)]
    fun = lambda x: circuit.energy_and_gradient(x, hmat)  # noqa: E731
    best, best_conv = None, None
    for x in starts:
        res = scipy.optimize.minimize(fun, x, jac=True, method="BFGS",
                                      options={"gtol": gtol * 1e-2, "maxiter": maxiter})
        e, g = fun(res.x)
        # BFGS can stop on a failed line search short of gtol; restart it
        for _ in range(3):
            if np.linalg.norm(g) < gtol:
                break
            res = scipy.optimize.minimize(fun, res.x, jac=True, method="BFGS",
                                          options={"gtol": gtol * 1e-2, "maxiter": maxiter})
            e, g = fun(res.x)
        cand = (e, res.x)
        if best is None or e < best[0] - 1e-12:
            best = cand
        if np.linalg.norm(g) < gtol and (best_conv is None or e < best_conv[0] - 1e-12):
            best_conv = cand
    if best_conv is None:
        raise VQEConvergenceError(f"no start reached gradient norm < {gtol}", spec.with_thetas(best[1]))
    return spec.with_thetas(best_conv[1])


def ansatz_energy(spec: AnsatzSpec, h):
    psi = uccd_state(spec)
    return float(np.vdot(psi, _as_sparse(h) @ psi).real)


# --------------------------------------------------------------------------- #
# Krylov vectors and exact diagonalization

KRYLOV_WORDS = ("", "H", "M", "HH", "HM", "MH", "MM")


def krylov_vectors(h, mu, psi):
    """``{"": psi, "H": H psi, "M": mu psi, "HH": H H psi, "HM": H mu psi, ...}``.

    A word is read as an operator product, so ``"HM"`` is ``H (mu psi)``.
    """
    hm, mm = _as_sparse(h), _as_sparse(mu)
    if hm.shape != mm.shape or hm.shape[1] != len(psi):
        raise ValueError("dimension mismatch between operators and state")
    psi = np.asarray(psi, dtype=np.complex128)
    ops = {"H": hm, "M": mm}
    vecs = {"": psi}
    for word in KRYLOV_WORDS[1:]:
        vecs[word] = ops[word[0]] @ vecs[word[1:]]
    return vecs


def fci_solve(op, n_elec, ms2=None, dense_limit=4096, tol=1e-12):
    """Lowest eigenpair of ``op`` in the particle-number (and S_z) sector.

    ``op`` is a PauliSum or a (sparse) matrix.  Returns ``(energy, state)`` with
    the state embedded in the full space and phased so that its
    largest-magnitude amplitude is real positive.
    """
    mat = _as_sparse(op)
    dim = mat.shape[0]
    n_qubits = dim.bit_length() - 1
    if mat.nnz and abs(mat - mat.getH()).max() > 1e-10:
        raise ValueError("operator is not Hermitian")
    idx = sector_indices(n_qubits, n_elec, ms2)
    if not len(idx):
        raise ValueError(f"empty sector n_elec={n_elec} ms2={ms2}")
    block = mat[idx][:, idx]
    if len(idx) <= dense_limit:
        w, v = np.linalg.eigh(block.toarray())
        energy, vec = w[0], v[:, 0]
    else:
        rng = np.random.default_rng(0)
        v0 = rng.standard_normal(len(idx))
        w, v = spla.eigsh(block, k=1, which="SA", tol=tol, v0=v0)
        energy, vec = w[0], v[:, 0]
    vec = vec / np.linalg.norm(vec)
    big = np.argmax(np.abs(vec))
    vec = vec * (abs(vec[big]) / vec[big])
    psi = np.zeros(dim, dtype=np.complex128)
    psi[idx] = vec
    return float(energy), psi
