"""Dipole moments from the field dependence of the corrected energy.

``mu_L(delta) = (E_L(+delta) - E_L(-delta)) / (2 delta)`` where ``E_L(lam)`` is
the Lanczos estimate from the (mitigated) moments of ``H + lam mu``, all
derived from one set of measurements.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial

import numpy as np

from .lanczos import Branch, lanczos_from_moments
from .moments import CoefficientTable, assemble_moments, krylov_coefficient_table, operator_table
from .noise import (
    MeasurementPlan,
    MethodInputs,
    NoiseSpec,
    SampledTable,
    method_moments,
    resample_counts,
    sample_table,
)
from .states import _as_sparse, fci_solve

AU_TO_DEBYE = 2.5417464

CSV_HEADER = ("method,delta,mu_L_au,mu_L_debye,mu_L_std,mu_expect_au,mu_expect_std,"
              "EL_plus,EL_minus,branch_plus,branch_minus")


def default_grid(n=24, lo=1e-4, hi=1e-1):
    return np.logspace(np.log10(lo), np.log10(hi), n)


@dataclass
class ScanRow:
    method: str
    delta: float
    mu_L: float
    mu_expect: float
    EL_plus: float
    EL_minus: float
    branch_plus: Branch
    branch_minus: Branch
    mu_L_std: float = float("nan")
    mu_expect_std: float = float("nan")

    @property
    def mu_L_debye(self):
        return self.mu_L * AU_TO_DEBYE

    @property
    def flagged(self):
        return Branch.NEGATIVE_DISCRIMINANT in (self.branch_plus, self.branch_minus)

    def csv_fields(self):
        numbers = (self.delta, self.mu_L, self.mu_L_debye, self.mu_L_std, self.mu_expect, self.mu_expect_std,
                   self.EL_plus, self.EL_minus)
        return [self.method, *(repr(float(v)) for v in numbers), self.branch_plus.value, self.branch_minus.value]


def rows_to_csv(rows, comments=()):
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def rows_from_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(lines):
        out.append(ScanRow(rec["method"], float(rec["delta"]), float(rec["mu_L_au"]), float(rec["mu_expect_au"]),
                           float(rec["EL_plus"]), float(rec["EL_minus"]), Branch(rec["branch_plus"]),
                           Branch(rec["branch_minus"]), float(rec["mu_L_std"]), float(rec["mu_expect_std"])))
    return out


class Estimator:
    """Moments-based energy and dipole estimates for one trial state.

    Built from a :class:`MethodInputs` bundle (trial and reference tables,
    the exact reference table and the mixed-state table).  All rows reuse
    these tables; changing ``delta`` never resamples.  ``energy_offset`` is
    added to every reported energy when the tables hold moments of a shifted
    Hamiltonian.
    """

    def __init__(self, inputs: MethodInputs, energy_offset=0.0):
        self.inputs = inputs
        self.energy_offset = float(energy_offset)

    @classmethod
    def prepare(cls, plan: MeasurementPlan, trial_state, reference_state, noise: NoiseSpec = None,
                energy_offset=0.0):
        """Sample (or evaluate analytically) trial and reference states; the
        exact reference table comes from the plan's operators."""
        noise = noise or NoiseSpec()
        trial = sample_table(plan, trial_state, noise, "trial", stream=0)
        ref = sample_table(plan, reference_state, noise, "reference", stream=1)
        ref_exact = operator_table(plan.ops, reference_state, "reference")
        return cls(MethodInputs(trial, ref, ref_exact, plan.mixed_table(), np.asarray(reference_state)),
                   energy_offset)

    @property
    def sampled(self):
        return self.inputs.trial.sampled

    def moments(self, method, lam):
        return method_moments(method, self.inputs, lam)[0]

    def energy(self, method, lam):
        est = lanczos_from_moments(*self.moments(method, lam).m)
        if self.energy_offset:
            est = replace(est, value=est.value + self.energy_offset)
        return est

    def energy_curve(self, method, lams):
        """``[(lam, E_L, branch), ...]``."""
        out = []
        for lam in lams:
            est = self.energy(method, lam)
            out.append((float(lam), est.value, est.branch))
        return out

    def mu_expect(self, method, delta):
        """First-moment central difference, which equals the (mitigated)
        linear coefficient ``<mu>`` up to calibration differences between
        ``+delta`` and ``-delta``."""
        mp = self.moments(method, delta)[1]
        mm = self.moments(method, -delta)[1]
        return (mp - mm) / (2 * delta)

    def mu_L(self, method, delta) -> ScanRow:
        if not delta > 0:
            raise ValueError("delta must be positive")
        ep = self.energy(method, delta)
        em = self.energy(method, -delta)
        mu_l = (ep.value - em.value) / (2 * delta)
        return ScanRow(method, float(delta), mu_l, self.mu_expect(method, delta), ep.value, em.value,
                       ep.branch, em.branch)

    def _point_values(self, methods, deltas):
        vals = []
        for m in methods:
            for d in deltas:
                row = self.mu_L(m, d)
                vals.append((row.mu_L, row.mu_expect))
        return np.array(vals)

    def _resample_values(self, methods, deltas, seed, r):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), r]))
        tc = resample_counts(self.inputs.trial.counts, rng)
        rc = resample_counts(self.inputs.reference.counts, rng)
        return Estimator(self.inputs.resampled(tc, rc), self.energy_offset)._point_values(methods, deltas)

    def bootstrap_std(self, methods, deltas, n_resamples=100, seed=0, threads=1):
        """Bootstrap std of (mu_L, mu_expect) per (method, delta); shape
        ``(len(methods) * len(deltas), 2)``.  Resample ``r`` uses the stream
        ``(seed, r)``, so the result does not depend on ``threads``."""
        if not self.sampled:
            raise ValueError("bootstrap requires sampled data")
        if n_resamples < 2:
            raise ValueError("n_resamples must be >= 2")
        work = partial(self._resample_values, list(methods), list(deltas), seed)
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                samples = list(pool.map(work, range(n_resamples)))
        else:
            samples = [work(r) for r in range(n_resamples)]
        return np.std(np.array(samples), axis=0, ddof=1)

    def scan(self, methods, deltas, bootstrap=0, seed=0, threads=1):
        """Rows ordered by (method, delta); ``bootstrap`` resamples fill the
        std columns when the tables carry counts."""
        deltas = [float(d) for d in deltas]
        if any(d <= 0 for d in deltas) or deltas != sorted(deltas):
            raise ValueError("delta grid must be positive and increasing")
        rows = [self.mu_L(m, d) for m in methods for d in deltas]
        if bootstrap and self.sampled:
            std = self.bootstrap_std(methods, deltas, bootstrap, seed, threads)
            for row, (s_l, s_e) in zip(rows, std):
                row.mu_L_std, row.mu_expect_std = float(s_l), float(s_e)
        return rows


def exact_estimator(h, mu, trial_state, reference_state=None):
    """Noiseless estimator straight from Krylov tables (Methods B-E; Method A
    needs a measurement plan)."""
    ref_state = trial_state if reference_state is None else reference_state
    t = krylov_coefficient_table(h, mu, trial_state, "trial")
    r = krylov_coefficient_table(h, mu, ref_state, "reference")
    mixed = CoefficientTable(np.diag([1.0, 0, 0, 0, 0]), "mixed")
    trial = SampledTable(t, None, NoiseSpec(), None, None, "trial")
    ref = SampledTable(r, None, NoiseSpec(), None, None, "reference")
    return Estimator(MethodInputs(trial, ref, r, mixed, np.asarray(ref_state)))


# --------------------------------------------------------------------------- #
# exact references


@dataclass
class ReferenceValues:
    e_fci: float
    mu_fci: float
    e_hf: float = float("nan")
    mu_hf: float = float("nan")
    finite_difference: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def fci_energy_curve(h, mu, n_elec, lams, ms2=None):
    hm, mm = _as_sparse(h), _as_sparse(mu)
    return np.array([fci_solve(hm + lam * mm, n_elec, ms2)[0] for lam in lams])


def fci_mu_L(h, mu, n_elec, delta, ms2=None):
    """Hellmann-Feynman central difference on exact eigenvalues."""
    ep, em = fci_energy_curve(h, mu, n_elec, [delta, -delta], ms2)
    return (ep - em) / (2 * delta)


def references(h, mu, n_elec, ms2=None, hf_state=None, deltas=(1e-2, 5e-3, 2.5e-3)) -> ReferenceValues:
    """FCI energy and dipole (the constant term of ``mu`` is included), the
    HF values if a reference determinant is given, and the exact finite
    difference ``(E(+d) - E(-d)) / 2d`` at each ``d`` in ``deltas``."""
    hm, mm = _as_sparse(h), _as_sparse(mu)
    e0, phi = fci_solve(hm, n_elec, ms2)
    mu0 = float(np.vdot(phi, mm @ phi).real)
    ref = ReferenceValues(e0, mu0)
    if hf_state is not None:
        ref.e_hf = float(np.vdot(hf_state, hm @ hf_state).real)
        ref.mu_hf = float(np.vdot(hf_state, mm @ hf_state).real)
    for d in deltas:
        ref.finite_difference.append((float(d), fci_mu_L(hm, mm, n_elec, d, ms2)))
    return ref


def linear_coefficient_residual(table: CoefficientTable, delta):
    """``(m1(d) - m1(-d)) / 2d - T[1, 1]`` for an unmitigated table."""
    m_plus = assemble_moments(table, delta)[1]
    m_minus = assemble_moments(table, -delta)[1]
    return (m_plus - m_minus) / (2 * delta) - table[1, 1]
