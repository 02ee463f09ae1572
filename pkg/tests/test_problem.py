import numpy as np
import pytest

from hfmoments.fixtures import load_fixture
from hfmoments.integrals import rhf_energy
from hfmoments.noise import NoiseSpec
from hfmoments.pauli import jordan_wigner
from hfmoments.problem import build_problem, determinant_energy
from hfmoments.states import hf_state
from hfmoments.validation import run_checks


@pytest.mark.parametrize("name", ["h2", "h2_field", "h4", "water"])
def test_determinant_energy(name):
    mi = load_fixture(name)[0]
    assert determinant_energy(mi, range(mi.n_elec)) == pytest.approx(rhf_energy(mi), abs=1e-10)


@pytest.mark.parametrize("name", ["h2", "h4"])
def test_open_shell_determinant_energy(name):
    mi, di, _ = load_fixture(name)
    H = jordan_wigner(build_problem(mi, di, energy_shift=0.0).h)
    psi = hf_state(2 * mi.n_orb, [0, 1, 3])
    assert H.expectation(psi).real == pytest.approx(determinant_energy(mi, [0, 1, 3]), abs=1e-10)


def test_energy_shift_is_invisible(h4, h4_unshifted, h4_vqe):
    psi = h4.trial_state(h4_vqe)
    assert h4_unshifted.energy_shift == 0.0
    assert h4.energy_shift == pytest.approx(rhf_energy(h4.mi), abs=1e-10)
    shifted, raw = h4.estimator(psi), h4_unshifted.estimator(psi)
    for method in "ABCDE":
        for d in (1e-3, 3e-2):
            a, b = shifted.mu_L(method, d), raw.mu_L(method, d)
            assert a.EL_plus == pytest.approx(b.EL_plus, abs=1e-8)
            assert a.mu_L == pytest.approx(b.mu_L, abs=1e-6)
            assert a.mu_expect == pytest.approx(b.mu_expect, abs=1e-10)


def test_problem_shapes(h4, water):
    assert (h4.n_qubits, h4.n_elec, h4.ms2) == (8, 4, 0)
    assert (water.n_qubits, water.n_elec, water.ms2) == (8, 4, 0)
    assert water.energy_shift == pytest.approx(determinant_energy(water.mi, range(water.mi.n_elec)), abs=1e-10)
    assert np.flatnonzero(water.hf_state()).tolist() == [0b1111]
    full = water.embed(water.hf_state())
    assert len(full) == 1 << 12 and np.flatnonzero(full).tolist() == [(1 << 8) - 1]


def test_moment_frozen_hf_energy(water):
    # the frozen orbitals are doubly occupied in HF, so the determinant moment is unchanged
    assert water.H.expectation(water.hf_state()).real == pytest.approx(0.0, abs=1e-9)


def test_build_problem_errors():
    mi, di, _ = load_fixture("h4")
    with pytest.raises(ValueError):
        build_problem(mi, di, frozen_core=[0, 0])
    with pytest.raises(ValueError):
        build_problem(mi, di, moment_frozen=[1, 1])
    with pytest.raises(ValueError):
        build_problem(mi, di, frozen_core=[0], moment_frozen=[3])


def test_estimator_defaults_to_hf_reference(h2_field):
    est = h2_field.estimator(h2_field.hf_state(), NoiseSpec(q=0.1))
    np.testing.assert_array_equal(est.inputs.reference_state, h2_field.hf_state())
    assert est.energy_offset == h2_field.energy_shift


@pytest.mark.parametrize("name", ["toy", "h2", "h4"])
def test_validation_checks_pass(name):
    mi, di, _ = load_fixture(name)
    results = run_checks(build_problem(mi, di), seed=0)
    assert len(results) >= 15
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed


def test_validation_reports_failure():
    from hfmoments.validation import CheckResult

    assert not CheckResult("s", "n", float("nan"), 1.0).passed
    assert CheckResult("s", "n", 2.0, 1.0).line().startswith("FAIL")
