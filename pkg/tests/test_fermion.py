import numpy as np
import pytest

from hfmoments import oracles
from hfmoments.fermion import (
    FermionOperator,
    build_dipole,
    build_hamiltonian,
    format_operator,
    freeze_modes,
    lambda_power,
    lambda_powers,
    ladder,
    number_operator,
    parse_operator,
    wick_multiply,
)
from hfmoments.fixtures import load_fixture
from hfmoments.integrals import DipoleIntegrals, MolecularIntegrals, random_integrals


def _mat(op):
    return oracles.fermion_matrix(op)


def _number_matrix(n):
    return np.diag([bin(i).count("1") for i in range(1 << n)]).astype(float)


def _sz_matrix(n):
    return np.diag([sum((1 if m % 2 == 0 else -1) for m in range(n) if (i >> m) & 1)
                    for i in range(1 << n)]).astype(float)


def test_anticommutation(backend):
    n = 3
    got = wick_multiply(ladder(n, 1, False), ladder(n, 1, True))
    want = FermionOperator.constant(n, 1.0) - number_operator(n, [1])
    assert got == want


def test_number_idempotent(backend):
    n0 = number_operator(2, [0])
    assert wick_multiply(n0, n0) == n0


def test_canonical_form():
    # a+_2 a+_0 a_1 a_3 as written -> canonical a+_0 a+_2 a_3 a_1 with one swap per block
    op = FermionOperator.from_terms(4, {((2, True), (0, True), (1, False), (3, False)): 1.0})
    assert op.terms == {((0, 2), (3, 1)): 1.0}
    assert len(FermionOperator.from_terms(3, {((1, True), (1, True)): 1.0})) == 0


def test_mode_checks():
    with pytest.raises(ValueError):
        FermionOperator.from_terms(2, {((2, True),): 1.0})
    with pytest.raises(ValueError):
        wick_multiply(ladder(2, 0, True), ladder(3, 0, True))
    with pytest.raises(ValueError):
        freeze_modes(number_operator(2), {5: 1})
    with pytest.raises(ValueError):
        freeze_modes(number_operator(2), {0: 2})


def test_single_orbital_hamiltonian():
    eps = -0.6
    mi = MolecularIntegrals(1, 0.0, [[eps]], np.zeros((1, 1, 1, 1)), 2)
    assert build_hamiltonian(mi).allclose(eps * number_operator(2))


def test_hamiltonian_matches_slater_condon(rng):
    for _ in range(3):
        mi = random_integrals(2, 2, rng)
        h = build_hamiltonian(mi)
        assert h.is_hermitian()
        np.testing.assert_allclose(_mat(h), oracles.slater_condon_matrix(mi), atol=1e-10)


def test_hamiltonian_symmetries(rng):
    mi = random_integrals(2, 2, rng)
    hm = _mat(build_hamiltonian(mi))
    for q in (_number_matrix(4), _sz_matrix(4)):
        assert np.abs(hm @ q - q @ hm).max() < 1e-10


def test_dipole_operator(rng):
    assert build_dipole(DipoleIntegrals("z", 0.0, np.eye(2))).allclose(number_operator(4))
    const = build_dipole(DipoleIntegrals("z", 1.25, np.zeros((2, 2))))
    assert const == FermionOperator.constant(4, 1.25)
    f = rng.normal(size=(2, 2))
    f = f + f.T
    di = DipoleIntegrals("x", 0.3, f)
    mi = MolecularIntegrals(2, 0.3, f, np.zeros((2,) * 4), 2)
    np.testing.assert_allclose(_mat(build_dipole(di)), oracles.slater_condon_matrix(mi), atol=1e-12)


def test_wick_random_dense(backend, rng):
    for _ in range(10):
        a = oracles.random_fermion_operator(4, rng)
        b = oracles.random_fermion_operator(4, rng)
        np.testing.assert_allclose(_mat(wick_multiply(a, b)), _mat(a) @ _mat(b), atol=1e-10)


def test_associativity_and_hermitian_closure(backend, rng):
    a, b, c = (oracles.random_fermion_operator(4, rng) for _ in range(3))
    left = wick_multiply(a, wick_multiply(b, c))
    right = wick_multiply(wick_multiply(a, b), c)
    np.testing.assert_allclose(_mat(left), _mat(right), atol=1e-9)
    assert wick_multiply(a, a.adjoint()).is_hermitian()


def test_truncation_is_sound_on_sector(backend, rng):
    n, n_elec = 4, 2
    idx = [i for i in range(16) if bin(i).count("1") == n_elec]
    for _ in range(5):
        a = oracles.random_fermion_operator(n, rng, hermitian=True)
        b = oracles.random_fermion_operator(n, rng, hermitian=True)
        full = _mat(wick_multiply(a, b))
        cut = _mat(wick_multiply(a, b, max_annihilators=n_elec))
        np.testing.assert_allclose(cut[np.ix_(idx, idx)], full[np.ix_(idx, idx)], atol=1e-10)


def test_lambda_power_linear_case(rng):
    h = oracles.random_fermion_operator(3, rng, hermitian=True)
    mu = oracles.random_fermion_operator(3, rng, hermitian=True)
    poly = lambda_power(h, mu, 1)
    assert poly.coeffs[0].allclose(h) and poly.coeffs[1].allclose(mu)


def test_lambda_power_zero_dipole(rng):
    h = oracles.random_fermion_operator(3, rng, hermitian=True)
    poly = lambda_power(h, FermionOperator.zero(3), 3)
    assert poly.coeffs[0].allclose(wick_multiply(wick_multiply(h, h), h))
    assert all(len(c) == 0 for c in poly.coeffs[1:])


def test_lambda_power_dense(backend, rng):
    h = oracles.random_fermion_operator(4, rng, hermitian=True)
    mu = oracles.random_fermion_operator(4, rng, hermitian=True)
    want = np.linalg.matrix_power(_mat(h) + 0.3 * _mat(mu), 2)
    np.testing.assert_allclose(_mat(lambda_power(h, mu, 2).evaluate(0.3)), want, atol=1e-10)


def test_lambda_coefficients_hermitian_and_extremes(rng):
    h = oracles.random_fermion_operator(4, rng, hermitian=True)
    mu = oracles.random_fermion_operator(4, rng, hermitian=True)
    for poly in lambda_powers(h, mu, 4):
        p = poly.degree
        for c in poly.coeffs:
            assert c.is_hermitian(atol=1e-12 * max(1.0, float(np.abs(c.coeffs).max(initial=0))))
        np.testing.assert_allclose(_mat(poly.coeffs[0]), np.linalg.matrix_power(_mat(h), p), atol=1e-9)
        np.testing.assert_allclose(_mat(poly.coeffs[p]), np.linalg.matrix_power(_mat(mu), p), atol=1e-9)
    anti = wick_multiply(h, mu) + wick_multiply(mu, h)
    assert lambda_power(h, mu, 2).coeffs[1].allclose(anti, atol=1e-12)


def test_lambda_power_range():
    with pytest.raises(ValueError):
        lambda_power(number_operator(2), number_operator(2), 5)


def test_freeze_examples():
    n = 3
    assert freeze_modes(number_operator(n, [1]), {1: 1}) == FermionOperator.constant(2, 1.0)
    hop = FermionOperator.from_terms(n, {((1, True), (0, False)): 1.0})
    assert len(freeze_modes(hop, {1: 1})) == 0
    assert len(freeze_modes(number_operator(n, [1]), {1: 0})) == 0


def test_freeze_matches_dense_projection(backend, rng):
    for _ in range(10):
        op = oracles.random_fermion_operator(3, rng)
        frozen = {int(rng.integers(3)): int(rng.integers(2))}
        want = oracles.project_occupation(_mat(op), 3, frozen)
        np.testing.assert_allclose(_mat(freeze_modes(op, frozen)), want, atol=1e-10)
    op = oracles.random_fermion_operator(5, rng, n_terms=12)
    frozen = {0: 1, 3: 1, 4: 0}
    want = oracles.project_occupation(_mat(op), 5, frozen)
    np.testing.assert_allclose(_mat(freeze_modes(op, frozen)), want, atol=1e-10)


def test_freeze_is_linear(rng):
    a = oracles.random_fermion_operator(4, rng)
    b = oracles.random_fermion_operator(4, rng)
    frozen = {1: 1, 2: 0}
    lhs = freeze_modes(2.0 * a - 0.5j * b, frozen)
    rhs = 2.0 * freeze_modes(a, frozen) - 0.5j * freeze_modes(b, frozen)
    assert lhs.allclose(rhs, atol=1e-14)


def test_moment_level_freezing_differs():
    mi = load_fixture("h2")[0]
    h = build_hamiltonian(mi)
    frozen = {0: 1, 1: 1}
    moment_level = _mat(freeze_modes(wick_multiply(h, h), frozen))
    hamiltonian_level = np.linalg.matrix_power(_mat(freeze_modes(h, frozen)), 2)
    assert np.abs(moment_level - hamiltonian_level).max() > 1e-6


def test_format_round_trip(rng):
    op = oracles.random_fermion_operator(4, rng)
    back = parse_operator(format_operator(op), 4)
    assert back.allclose(op, atol=1e-15)
    assert format_operator(FermionOperator.zero(2)) == ""
