"""Oracle-equivalence checks run by ``hfmoments validate``.

Every check returns a worst-case error that is compared with its tolerance.
The operator suites use small random instances with a fixed seed; the system
suite runs on the configured Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracles
from .fermion import freeze_modes, lambda_power, wick_multiply
from .lanczos import lanczos_from_moments
from .moments import coefficient_operators, krylov_coefficient_table, operator_table
from .noise import calibrate, inject, mitigate
from .pauli import PauliSum, group_qubitwise_commuting, is_qubitwise_commuting, jordan_wigner
from .states import fci_solve


@dataclass
class CheckResult:
    suite: str
    name: str
    error: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.error) and self.error <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}.{self.name} error={self.error:.2e} tol={self.tol:.0e}"


def _random_ops(rng, n_modes, count, **kw):
    return [oracles.random_fermion_operator(n_modes, rng, **kw) for _ in range(count)]


def _max(values):
    return float(max(values, default=0.0))


def fermion_checks(rng, n_cases=8):
    ops = _random_ops(rng, 4, 2 * n_cases)
    err = _max(np.abs(oracles.fermion_matrix(wick_multiply(a, b))
                      - oracles.fermion_matrix(a) @ oracles.fermion_matrix(b)).max()
               for a, b in zip(ops[::2], ops[1::2]))
    yield CheckResult("fermion", "wick_multiply", err, 1e-10)

    errs = []
    for op in _random_ops(rng, 3, n_cases):
        frozen = {int(rng.integers(3)): int(rng.integers(2))}
        want = oracles.project_occupation(oracles.fermion_matrix(op), 3, frozen)
        errs.append(np.abs(oracles.fermion_matrix(freeze_modes(op, frozen)) - want).max())
    yield CheckResult("fermion", "freeze_modes", _max(errs), 1e-10)

    errs = []
    ops = _random_ops(rng, 4, n_cases, hermitian=True)
    for h, mu in zip(ops[::2], ops[1::2]):
        lam, p = 0.3, int(rng.integers(1, 5))
        got = oracles.fermion_matrix(lambda_power(h, mu, p).evaluate(lam))
        want = np.linalg.matrix_power(oracles.fermion_matrix(h) + lam * oracles.fermion_matrix(mu), p)
        errs.append(np.abs(got - want).max() / max(1.0, np.abs(want).max()))
    yield CheckResult("fermion", "lambda_power", _max(errs), 1e-10)


def pauli_checks(rng, n_cases=8):
    ops = _random_ops(rng, 4, n_cases)
    err = _max(np.abs(oracles.pauli_sum_matrix(jordan_wigner(op)) - oracles.fermion_matrix(op)).max() for op in ops)
    yield CheckResult("pauli", "jordan_wigner", err, 1e-10)

    err = _max(np.abs((jordan_wigner(a) * jordan_wigner(b)).to_dense()
                      - jordan_wigner(wick_multiply(a, b)).to_dense()).max()
               for a, b in zip(ops[::2], ops[1::2]))
    yield CheckResult("pauli", "homomorphism", err, 1e-10)

    errs = []
    for _ in range(n_cases):
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        errs.append(np.abs(PauliSum.from_matrix(m).to_dense() - m).max())
    yield CheckResult("pauli", "from_matrix", _max(errs), 1e-12)

    bad = 0
    for op in ops:
        keys = jordan_wigner(op).keys
        keys = keys[keys != 0]
        groups = group_qubitwise_commuting(keys)
        covered = sorted(int(k) for g in groups for k in keys[np.asarray(g, dtype=int)])
        bad += covered != sorted(int(k) for k in keys)
        bad += sum(not is_qubitwise_commuting(keys[np.asarray(g, dtype=int)]) for g in groups)
    yield CheckResult("pauli", "qwc_grouping", float(bad), 0.0)


def moment_checks(rng, n_cases=4):
    errs = []
    for _ in range(n_cases):
        h, mu = _random_ops(rng, 3, 2, hermitian=True)
        H, M = jordan_wigner(h), jordan_wigner(mu)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi /= np.linalg.norm(psi)
        a = krylov_coefficient_table(H, M, psi).values
        b = operator_table(coefficient_operators(H, M), psi).values
        errs.append(np.abs(a - b).max() / max(1.0, np.abs(b).max()))
    yield CheckResult("moments", "krylov_vs_operators", _max(errs), 1e-10)

    errs = []
    for _ in range(n_cases):
        e0 = rng.normal()
        m = [e0 ** p for p in range(1, 5)]
        errs.append(abs(lanczos_from_moments(*m).value - e0))
    yield CheckResult("lanczos", "eigenstate", _max(errs), 1e-10)

    errs = []
    for _ in range(n_cases):
        values, weights, s = rng.normal(size=3), rng.random(3), rng.normal()
        weights /= weights.sum()
        m = [weights @ values ** p for p in range(1, 5)]
        ms = [weights @ (values + s) ** p for p in range(1, 5)]
        errs.append(abs(lanczos_from_moments(*ms).value - lanczos_from_moments(*m).value - s))
    yield CheckResult("lanczos", "shift_covariance", _max(errs), 1e-8)

    errs = []
    for _ in range(n_cases):
        exact, mixed, q = rng.normal(), rng.normal(), 0.9 * rng.random()
        q_est, _ = calibrate(inject(exact, mixed, q), exact, mixed)
        errs.append(abs(mitigate(inject(exact, mixed, q), mixed, q_est) - exact))
    yield CheckResult("noise", "mitigation_round_trip", _max(errs), 1e-10)


def system_checks(problem):
    """Checks on the configured system (dense ones only up to 12 qubits)."""
    from .problem import determinant_energy, _hf_modes

    mi = problem.mi
    H = jordan_wigner(problem.h)
    M = jordan_wigner(problem.mu)
    occ = _hf_modes(mi.n_elec, mi.ms2)
    psi = np.zeros(1 << H.n_qubits)
    psi[sum(1 << m for m in occ)] = 1.0
    e_det = determinant_energy(mi, occ)
    yield CheckResult("system", "determinant_energy", abs(H.expectation(psi).real - e_det), 1e-10)
    if H.n_qubits <= 12:
        hd = H.to_dense()
        yield CheckResult("system", "hermitian", float(np.abs(hd - hd.conj().T).max()), 1e-12)
        number = np.diag([bin(i).count("1") for i in range(1 << H.n_qubits)]).astype(float)
        yield CheckResult("system", "number_conserving", float(np.abs(hd @ number - number @ hd).max()), 1e-10)
    e0, phi = fci_solve(H, mi.n_elec, mi.ms2)
    resid = float(np.linalg.norm(H.apply(phi) - e0 * phi))
    yield CheckResult("system", "fci_residual", resid, 1e-8)
    yield CheckResult("system", "fci_below_hf", max(0.0, e0 - e_det), 1e-12)
    table = operator_table(problem.ops, problem.hf_state())
    err = 0.0
    for d in (1e-4, 1e-2, 1.0):
        mp, mm = table.moments(d)[1], table.moments(-d)[1]
        err = max(err, abs((mp - mm) / (2 * d) - table[1, 1]))
    yield CheckResult("system", "linear_coefficient_identity", err, 1e-12)
    if not problem.moment_frozen and problem.n_qubits <= 12:
        hs = jordan_wigner(problem.h_shifted)
        kt = krylov_coefficient_table(hs, M, problem.hf_state()).values
        yield CheckResult("system", "krylov_vs_operators", float(np.abs(kt - table.values).max()), 1e-9)


def run_checks(problem=None, seed=0):
    rng = np.random.default_rng(seed)
    results = []
    for suite in (fermion_checks, pauli_checks, moment_checks):
        results.extend(suite(rng))
    if problem is not None:
        results.extend(system_checks(problem))
    return results
