"""Synthetic noisy backend, reference-state calibration and mitigation.

Noise model: a global white-noise channel (each shot replaced by a uniform
random bitstring with probability ``q``) plus multinomial shot noise, measured
group-by-group over qubit-wise commuting Pauli groups.  Within a group every
word is estimated from the same bitstrings.

Calibration and injection share one convention::

    noisy = (1 - q) * exact + q * mixed
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .moments import ENTRIES, P_MAX, CoefficientTable, MomentSet, assemble_moments
from .pauli import PauliSum, fwht, group_qubitwise_commuting, key_to_word, word_to_key

EPS = 1e-10
METHODS = ("A", "B", "C", "D", "E")

_LOW = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)

_H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
_HSDG = _H @ np.diag([1, -1j])
_ROT = {"X": _H, "Y": _HSDG}


@dataclass(frozen=True)
class NoiseSpec:
    q: float = 0.0
    shots_per_group: int = 0
    seed: int = 0
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.q < 1.0:
            raise ValueError(f"q must lie in [0, 1), got {self.q}")
        if self.shots_per_group < 0:
            raise ValueError("shots_per_group must be >= 0")

    @property
    def effective_q(self):
        return self.q if self.enabled else 0.0

    @property
    def sampled(self):
        return self.enabled and self.shots_per_group > 0


# --------------------------------------------------------------------------- #
# measurement plan


class MeasurementPlan:
    """Pauli words needed for every ``C_{p,k}``, their grouping, and the
    coefficient matrix mapping word expectations to table entries.

    ``ops`` maps (p, k) to a Hermitian PauliSum.  Optional ``numeric_power``
    is a callable ``(p, lam) -> PauliSum`` for ``(H + lam mu)^p`` built with
    ``lam`` substituted first (Method A).
    """

    def __init__(self, ops: dict, numeric_power=None):
        self.ops = dict(ops)
        self.n_qubits = next(iter(ops.values())).n_qubits
        self.numeric_power = numeric_power
        keys = np.unique(np.concatenate([op.keys for op in ops.values()]))
        self.keys = keys[keys != 0]
        self.identity = np.zeros((P_MAX + 1, P_MAX + 1))
        self.coeffs = np.zeros((len(ENTRIES), len(self.keys)))
        for row, pk in enumerate(ENTRIES):
            op = self.ops[pk]
            if np.abs(op.coeffs.imag).max(initial=0) > 1e-9:
                raise ValueError(f"operator {pk} is not Hermitian")
            sel = op.keys != 0
            self.identity[pk] = op.coeffs[~sel].real.sum()
            self.coeffs[row, np.searchsorted(self.keys, op.keys[sel])] = op.coeffs[sel].real
        self.groups = [np.array(g) for g in group_qubitwise_commuting(self.keys)]
        self.group_of = np.empty(len(self.keys), dtype=np.int64)
        for g, members in enumerate(self.groups):
            self.group_of[members] = g
        x, z = self.keys & _LOW, self.keys >> _SHIFT
        self.support = (x | z).astype(np.int64)
        self._bases = []
        for members in self.groups:
            gx = np.bitwise_or.reduce(x[members])
            gz = np.bitwise_or.reduce(z[members])
            self._bases.append(key_to_word(int(gx | (gz << _SHIFT)), self.n_qubits))
        self._power_cache = {}

    @property
    def n_groups(self):
        return len(self.groups)

    def basis(self, g):
        """Measurement basis of group ``g`` as a word (``I`` = any)."""
        return self._bases[g]

    def mixed_table(self):
        values = self.identity.copy()
        values[0, 0] = 1.0
        return CoefficientTable(values, "mixed", "exact")

    def table_from_words(self, w, state, provenance):
        values = self.identity.copy()
        values[0, 0] = 1.0
        for row, pk in enumerate(ENTRIES):
            # compensated sums keep Methods A and B consistent under cancellation
            values[pk] = math.fsum(np.append(self.coeffs[row] * w, values[pk]))
        return CoefficientTable(values, state, provenance)

    def group_probabilities(self, psi):
        """Exact outcome distribution of every group, shape (n_groups, 2^n)."""
        n = self.n_qubits
        out = np.empty((self.n_groups, 1 << n))
        for g in range(self.n_groups):
            t = np.asarray(psi, dtype=complex).reshape((2,) * n)
            for j, letter in enumerate(self.basis(g)):
                if letter in _ROT:
                    t = np.moveaxis(np.tensordot(_ROT[letter], t, axes=([1], [n - 1 - j])), 0, n - 1 - j)
            out[g] = np.abs(t.reshape(-1)) ** 2
        return out

    def word_values(self, dists):
        """Word expectations from per-group outcome distributions
        (probabilities or normalized counts)."""
        spectrum = fwht(np.asarray(dists, dtype=float), axis=1)
        return spectrum[self.group_of, self.support]

    def numeric_operator(self, p, lam):
        key = (p, float(lam))
        if key not in self._power_cache:
            if self.numeric_power is None:
                raise ValueError("plan has no numeric power builder (Method A unavailable)")
            self._power_cache[key] = self.numeric_power(p, lam)
        return self._power_cache[key]

    def contract(self, op: PauliSum, w, tol=1e-9):
        """``<op>`` from word expectations ``w`` (identity part exact).

        Words outside the plan are allowed only with coefficients below
        ``tol`` (roundoff from a dense decomposition) and are skipped.
        """
        sel = op.keys != 0
        pos = np.minimum(np.searchsorted(self.keys, op.keys[sel]), len(self.keys) - 1)
        inside = self.keys[pos] == op.keys[sel]
        coeffs = op.coeffs[sel]
        if np.abs(coeffs[~inside]).max(initial=0) > tol:
            raise ValueError("operator contains words outside the measurement plan")
        return math.fsum(np.append(coeffs[inside].real * w[pos[inside]], op.coeffs[~sel].real))


def dense_numeric_power(h: PauliSum, mu: PauliSum):
    """Method A builder: substitute lam into H + lam mu, then take powers."""
    hm, mm = h.to_dense(), mu.to_dense()

    def build(p, lam):
        return PauliSum.from_matrix(np.linalg.matrix_power(hm + lam * mm, p), tol=0.0)

    return build


# --------------------------------------------------------------------------- #
# sampled tables


@dataclass
class SampledTable:
    """Coefficient table of one state under the noisy backend.

    ``counts`` has shape (n_groups, 2^n) (``None`` in analytic mode) and
    ``words`` the estimated word expectations the table was built from.
    """

    table: CoefficientTable
    plan: MeasurementPlan = field(repr=False)
    spec: NoiseSpec
    words: np.ndarray = field(repr=False)
    counts: np.ndarray = field(default=None, repr=False)
    label: str = "trial"

    @property
    def sampled(self):
        return self.counts is not None

    def rederive(self):
        if self.counts is None:
            return self.table
        dists = self.counts / self.counts.sum(axis=1, keepdims=True)
        return self.plan.table_from_words(self.plan.word_values(dists), self.label, self.table.provenance)

    def with_counts(self, counts):
        """Same plan and spec, new counts (bootstrap resample)."""
        dists = counts / counts.sum(axis=1, keepdims=True)
        w = self.plan.word_values(dists)
        table = self.plan.table_from_words(w, self.label, "sampled")
        return replace(self, table=table, words=w, counts=counts)

    def save(self, path):
        """Directory of tab-separated files: spec, words/groups, counts, table."""
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        s = self.spec
        (path / "spec.tsv").write_text(
            "key\tvalue\n"
            f"q\t{float(s.q)!r}\nshots_per_group\t{s.shots_per_group}\nseed\t{s.seed}\n"
            f"enabled\t{int(s.enabled)}\nlabel\t{self.label}\nn_qubits\t{self.plan.n_qubits}\n")
        lines = ["index\tgroup\tword\testimate"]
        for i, key in enumerate(self.plan.keys):
            lines.append(f"{i}\t{self.plan.group_of[i]}\t{key_to_word(int(key), self.plan.n_qubits)}\t{float(self.words[i])!r}")
        (path / "words.tsv").write_text("\n".join(lines) + "\n")
        lines = ["group\toutcome\tcount"]
        if self.counts is not None:
            for g, row in enumerate(self.counts):
                for b in np.flatnonzero(row):
                    lines.append(f"{g}\t{b}\t{row[b]}")
        (path / "counts.tsv").write_text("\n".join(lines) + "\n")
        (path / "table.tsv").write_text(self.table.to_tsv())


def load_sampled_table(path, plan: MeasurementPlan) -> SampledTable:
    """Reload a saved table; the plan (rebuilt from the operators) must match."""
    path = Path(path)
    kv = dict(ln.split("\t") for ln in (path / "spec.tsv").read_text().splitlines()[1:] if ln)
    spec = NoiseSpec(float(kv["q"]), int(kv["shots_per_group"]), int(kv["seed"]), bool(int(kv["enabled"])))
    rows = [ln.split("\t") for ln in (path / "words.tsv").read_text().splitlines()[1:] if ln]
    keys = np.array([word_to_key(r[2]) for r in rows], dtype=np.uint64)
    if not np.array_equal(keys, plan.keys) or [int(r[1]) for r in rows] != plan.group_of.tolist():
        raise ValueError(f"{path}: measurement plan does not match the operators")
    words = np.array([float(r[3]) for r in rows])
    counts = None
    if spec.shots_per_group > 0 and spec.enabled:
        counts = np.zeros((plan.n_groups, 1 << plan.n_qubits), dtype=np.int64)
        for ln in (path / "counts.tsv").read_text().splitlines()[1:]:
            if ln:
                g, b, c = (int(v) for v in ln.split("\t"))
                counts[g, b] = c
    table = CoefficientTable.from_tsv((path / "table.tsv").read_text())
    return SampledTable(table, plan, spec, words, counts, kv["label"])


def _group_rng(seed, stream, g):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(g)]))


def sample_table(plan: MeasurementPlan, psi, spec: NoiseSpec, label="trial", stream=0) -> SampledTable:
    """Measure every group of ``plan`` on ``psi`` under the noise model.

    Group ``g`` draws from its own generator seeded by ``(seed, stream, g)``,
    so results do not depend on evaluation order.  With zero shots the channel
    is applied exactly: non-identity words are scaled by ``1 - q``.
    """
    q = spec.effective_q
    probs = plan.group_probabilities(psi)
    if not spec.sampled:
        w = (1.0 - q) * plan.word_values(probs)
        table = plan.table_from_words(w, label, "analytic" if q == 0 else "analytic-noisy")
        return SampledTable(table, plan, spec, w, None, label)
    dim = probs.shape[1]
    noisy = (1.0 - q) * probs + q / dim
    noisy /= noisy.sum(axis=1, keepdims=True)
    counts = np.stack([_group_rng(spec.seed, stream, g).multinomial(spec.shots_per_group, noisy[g])
                       for g in range(plan.n_groups)])
    dists = counts / spec.shots_per_group
    w = plan.word_values(dists)
    table = plan.table_from_words(w, label, "sampled")
    return SampledTable(table, plan, spec, w, counts, label)


# --------------------------------------------------------------------------- #
# calibration and mitigation


@dataclass
class CalibrationRecord:
    """``q`` estimates keyed by ``p`` (Methods A/B/D) or ``(p, k)`` (C/E)."""

    q: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def add(self, key, q, flags):
        self.q[key] = q
        if flags:
            self.flags[key] = tuple(flags)

    @property
    def degenerate(self):
        return [k for k, f in self.flags.items() if "degenerate" in f]


def calibrate(noisy_ref, exact_ref, mixed, eps=EPS):
    """Invert ``noisy = (1-q) exact + q mixed`` for ``q``.

    Returns ``(q, flags)``.  A vanishing ``exact - mixed`` (relative to the
    magnitude of the inputs) gives ``q = 0`` flagged ``degenerate``; ``q`` is
    clamped to at most ``1 - eps`` (flagged ``clamped``).
    """
    for v in (noisy_ref, exact_ref, mixed):
        if not math.isfinite(v):
            raise ValueError(f"non-finite calibration input {v!r}")
    scale = max(1.0, abs(exact_ref), abs(mixed))
    gap = exact_ref - mixed
    if abs(gap) < eps * scale:
        return 0.0, ("degenerate",)
    q = (exact_ref - noisy_ref) / gap
    if q > 1.0 - eps:
        return 1.0 - eps, ("clamped",)
    return q, ()


def mitigate(noisy, mixed, q):
    if not q < 1.0:
        raise ValueError(f"cannot mitigate with q = {q} >= 1")
    return (noisy - q * mixed) / (1.0 - q)


def inject(exact, mixed, q):
    return (1.0 - q) * exact + q * mixed


# --------------------------------------------------------------------------- #
# Methods A-E


@dataclass
class MethodInputs:
    """Everything the mitigation methods consume."""

    trial: SampledTable
    reference: SampledTable
    reference_exact: CoefficientTable
    mixed: CoefficientTable
    reference_state: np.ndarray = field(default=None, repr=False)

    def resampled(self, trial_counts, reference_counts):
        return replace(self, trial=self.trial.with_counts(trial_counts),
                       reference=self.reference.with_counts(reference_counts))


def _post_mitigated(inputs, lam, truncate):
    tm = assemble_moments(inputs.trial.table, lam, truncate)
    rn = assemble_moments(inputs.reference.table, lam, truncate)
    re = assemble_moments(inputs.reference_exact, lam, truncate)
    mx = assemble_moments(inputs.mixed, lam, truncate)
    rec = CalibrationRecord()
    out = []
    for p in range(1, P_MAX + 1):
        q, flags = calibrate(rn[p], re[p], mx[p])
        rec.add(p, q, flags)
        out.append(mitigate(tm[p], mx[p], q))
    return MomentSet(tuple(out), float(lam), truncate), rec


def _pre_mitigated(inputs, lam, truncate):
    values = np.zeros_like(inputs.mixed.values)
    values[0, 0] = 1.0
    rec = CalibrationRecord()
    for p, k in ENTRIES:
        if truncate and k > 1:
            continue
        q, flags = calibrate(inputs.reference.table[p, k], inputs.reference_exact[p, k], inputs.mixed[p, k])
        rec.add((p, k), q, flags)
        values[p, k] = mitigate(inputs.trial.table[p, k], inputs.mixed[p, k], q)
    return assemble_moments(CoefficientTable(values, "trial", "mitigated"), lam, truncate), rec


def _numeric_first(inputs, lam):
    plan = inputs.trial.plan
    rec = CalibrationRecord()
    out = []
    for p in range(1, P_MAX + 1):
        op = plan.numeric_operator(p, lam)
        tm = plan.contract(op, inputs.trial.words)
        rn = plan.contract(op, inputs.reference.words)
        mx = plan.contract(op, np.zeros(len(plan.keys)))
        if inputs.reference_state is not None:
            re = float(op.expectation(inputs.reference_state).real)
        else:
            re = assemble_moments(inputs.reference_exact, lam)[p]
        q, flags = calibrate(rn, re, mx)
        rec.add(p, q, flags)
        out.append(mitigate(tm, mx, q))
    return MomentSet(tuple(out), float(lam), False), rec


def method_moments(method, inputs: MethodInputs, lam):
    """Mitigated moments of ``H + lam mu`` at numeric ``lam``.

    A: substitute ``lam`` into the operator, take powers, estimate, mitigate
       per moment.
    B: assemble moments from the table at ``lam``, mitigate per moment.
    C: mitigate each table coefficient, then assemble.
    D, E: B and C with the table truncated at first order in ``lam``.

    Returns ``(MomentSet, CalibrationRecord)``.
    """
    if method == "A":
        return _numeric_first(inputs, lam)
    if method in ("B", "D"):
        return _post_mitigated(inputs, lam, method == "D")
    if method in ("C", "E"):
        return _pre_mitigated(inputs, lam, method == "E")
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


# --------------------------------------------------------------------------- #
# bootstrap


def resample_counts(counts, rng):
    shots = counts.sum(axis=1)
    if np.any(shots != shots[0]):
        return np.stack([rng.multinomial(s, c / s) for s, c in zip(shots, counts)])
    return rng.multinomial(int(shots[0]), counts / shots[:, None])


def bootstrap(run, tables, n_resamples=100, seed=0):
    """Bootstrap spread of ``run(*tables)``.

    Each resample redraws every group's counts of every table from its
    empirical distribution (generator seeded by ``(seed, resample index)``)
    and reruns ``run``.  Returns ``(mean, std)`` over resamples (arrays if
    ``run`` returns arrays).
    """
    tables = list(tables)
    if n_resamples < 2:
        raise ValueError("n_resamples must be >= 2")
    if any(not t.sampled for t in tables):
        raise ValueError("bootstrap requires sampled data")
    values = []
    for r in range(n_resamples):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), r]))
        values.append(np.asarray(run(*[t.with_counts(resample_counts(t.counts, rng)) for t in tables]), float))
    values = np.array(values)
    return values.mean(axis=0), values.std(axis=0, ddof=1)
