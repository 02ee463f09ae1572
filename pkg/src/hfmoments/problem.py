"""From integrals to everything an estimation run needs.

Integral-level frozen core is applied first; optional moment-level frozen
orbitals are contracted out of each coefficient operator after the powers are
formed in the larger space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dipole import Estimator, references
from .fermion import FermionOperator, build_dipole, build_hamiltonian, spatial_to_mode_occupations
from .integrals import DipoleIntegrals, MolecularIntegrals, freeze_core_dipole, freeze_core_integrals
from .moments import coefficient_operators, frozen_coefficient_operators
from .noise import MeasurementPlan, NoiseSpec, dense_numeric_power
from .pauli import PauliSum, jordan_wigner
from .states import AnsatzSpec, default_doubles, hf_state, uccd_state, vqe_optimize

DENSE_LIMIT = 10


def _hf_modes(n_elec, ms2):
    """Lowest spin-orbitals for ``n_elec`` electrons with spin projection ``ms2/2``."""
    n_a = (n_elec + ms2) // 2
    return sorted([2 * i for i in range(n_a)] + [2 * i + 1 for i in range(n_elec - n_a)])


def combination_power(ops):
    """Method A builder for precomputed coefficient operators:
    ``sum_k lam^k C_{p,k}`` formed as an operator before any expectation."""

    def build(p, lam):
        # no drop tolerance: lam^k scales terms far below it at small lam
        terms = [ops[p, k] for k in range(p + 1)]
        keys = np.concatenate([t.keys for t in terms])
        coeffs = np.concatenate([t.coeffs * lam ** k for k, t in enumerate(terms)])
        return PauliSum(ops[1, 0].n_qubits, keys, coeffs, tol=0.0)

    return build


@dataclass
class Problem:
    """Active-space operators and states for one system.

    ``h``/``mu`` are the fermionic operators after integral-level freezing;
    ``moment_frozen`` maps their modes to fixed occupations.
    """

    mi: MolecularIntegrals
    di: DipoleIntegrals
    h: FermionOperator
    mu: FermionOperator
    moment_frozen: dict = field(default_factory=dict)
    max_annihilators: int = None
    orbsym: tuple = None
    energy_shift: float = 0.0

    @cached_property
    def h_shifted(self):
        """``h - energy_shift``; all moment operators are powers of this one."""
        return self.h - self.energy_shift if self.energy_shift else self.h

    @property
    def n_qubits(self):
        return self.h.n_modes - len(self.moment_frozen)

    @property
    def n_elec(self):
        return self.mi.n_elec - sum(self.moment_frozen.values())

    @property
    def ms2(self):
        frozen_spin = sum(occ * (1 if m % 2 == 0 else -1) for m, occ in self.moment_frozen.items())
        return self.mi.ms2 - frozen_spin

    @cached_property
    def ops(self):
        """``{(p, k): PauliSum}`` on the active qubits."""
        if self.moment_frozen or self.h.n_modes > DENSE_LIMIT:
            return frozen_coefficient_operators(self.h_shifted, self.mu, self.moment_frozen, self.max_annihilators)
        return coefficient_operators(jordan_wigner(self.h_shifted), jordan_wigner(self.mu))

    @property
    def H(self):
        return self.ops[1, 0]

    @property
    def M(self):
        return self.ops[1, 1]

    @cached_property
    def plan(self):
        if self.moment_frozen or self.h.n_modes > DENSE_LIMIT:
            return MeasurementPlan(self.ops, combination_power(self.ops))
        return MeasurementPlan(self.ops, dense_numeric_power(self.H, self.M))

    def hf_occupied(self):
        return _hf_modes(self.n_elec, self.ms2)

    def hf_state(self):
        return hf_state(self.n_qubits, self.hf_occupied())

    def default_ansatz(self):
        occ = self.hf_occupied()
        return AnsatzSpec(self.n_qubits, occ, default_doubles(self.n_qubits, occ, self.orbsym))

    def optimize(self, spec=None, seed=0, n_starts=3):
        """VQE on the shifted Hamiltonian (the optimum does not depend on the shift)."""
        return vqe_optimize(spec or self.default_ansatz(), self.H, seed=seed, n_starts=n_starts)

    def trial_state(self, spec):
        return uccd_state(spec)

    def estimator(self, trial_state, noise: NoiseSpec = None, reference_state=None):
        ref = self.hf_state() if reference_state is None else reference_state
        return Estimator.prepare(self.plan, trial_state, ref, noise, energy_offset=self.energy_shift)

    def references(self, deltas=(1e-2, 5e-3, 2.5e-3)):
        """FCI and HF baselines in the integral-level (not moment-frozen) space."""
        H, M = jordan_wigner(self.h), jordan_wigner(self.mu)
        hf = hf_state(self.h.n_modes, _hf_modes(self.mi.n_elec, self.mi.ms2))
        return references(H, M, self.mi.n_elec, self.mi.ms2, hf, deltas)

    def embed(self, psi_active):
        from .moments import embed_state

        return embed_state(psi_active, self.h.n_modes, self.moment_frozen)


def determinant_energy(mi: MolecularIntegrals, modes) -> float:
    """Energy of the determinant occupying spin-orbitals ``modes`` (interleaved spin)."""
    modes = sorted(modes)
    e = mi.e_core + sum(mi.h[m // 2, m // 2] for m in modes)
    for a in modes:
        for b in modes:
            p, q = a // 2, b // 2
            e += 0.5 * mi.g[p, p, q, q]
            if a % 2 == b % 2:
                e -= 0.5 * mi.g[p, q, q, p]
    return float(e)


def build_problem(mi: MolecularIntegrals, di: DipoleIntegrals, frozen_core=(), moment_frozen=(),
                  moment_occupation=1, max_annihilators="auto", energy_shift="hf"):
    """Assemble a :class:`Problem`.

    ``frozen_core`` lists spatial orbitals folded into the integrals.
    ``moment_frozen`` lists spatial orbitals (indices after core freezing)
    frozen in the moment operators with ``moment_occupation`` electrons per
    spin-orbital (0 or 1, or a sequence of them per orbital).
    ``max_annihilators="auto"`` truncates Wick products at the electron count
    of the core-frozen space; ``None`` disables truncation.
    """
    frozen_core = list(frozen_core)
    moment_frozen = list(moment_frozen)
    if len(set(frozen_core)) != len(frozen_core):
        raise ValueError("frozen core orbitals repeat")
    if len(set(moment_frozen)) != len(moment_frozen):
        raise ValueError("moment-level frozen orbitals repeat")
    mi2 = freeze_core_integrals(mi, frozen_core)
    di2 = freeze_core_dipole(di, frozen_core)
    for p in moment_frozen:
        if not 0 <= p < mi2.n_orb:
            raise ValueError(f"moment-level frozen orbital {p} outside [0, {mi2.n_orb})")
    occs = ([moment_occupation] * len(moment_frozen) if np.isscalar(moment_occupation)
            else list(moment_occupation))
    frozen = {}
    for p, occ in zip(moment_frozen, occs):
        frozen.update(spatial_to_mode_occupations([p], int(occ)))
    if max_annihilators == "auto":
        max_annihilators = mi2.n_elec
    orbsym = None
    if mi2.orbsym is not None:
        orbsym = tuple(s for i, s in enumerate(mi2.orbsym) if i not in set(moment_frozen))
    problem = Problem(mi2, di2, build_hamiltonian(mi2), build_dipole(di2), frozen, max_annihilators, orbsym)
    if energy_shift == "hf":
        energy_shift = determinant_energy(mi2, _hf_modes(mi2.n_elec, mi2.ms2))
    problem.energy_shift = float(energy_shift)
    return problem
