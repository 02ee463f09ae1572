"""Command-line entry point.

    hfmoments validate [--config FILE] [--print-defaults]
    hfmoments scan      --config FILE [--seed N] [--threads N] [--out DIR]
    hfmoments calibrate --config FILE [--seed N] [--out DIR]
    hfmoments fci       --config FILE [--out DIR]
    hfmoments moments   --config FILE [--seed N] [--out DIR]

Exit codes: 0 ok, 1 validation failure (bad config or failed check),
2 runtime error (the failing stage is named on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULTS, ConfigError, load_config
from .dipole import AU_TO_DEBYE, fci_energy_curve, rows_to_csv
from .lanczos import Branch
from .moments import ENTRIES, operator_table
from .noise import NoiseSpec, calibrate, mitigate
from .pauli import jordan_wigner
from .states import AnsatzSpec, VQEConvergenceError, _parse_excitation, uccd_state

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {type(exc).__name__}: {exc}")
        self.stage = stage


@contextmanager
def stage(name):
    try:
        yield
    except (ConfigError, StageError):
        raise
    except Exception as exc:  # noqa: BLE001 - reported with the stage name
        raise StageError(name, exc) from exc


def _log(msg):
    print(msg, file=sys.stderr)


def _comments(cfg, extra=()):
    return [f"hfmoments {__version__}", f"config_hash {cfg.config_hash()}", f"config {cfg.source}",
            f"mode {cfg.mode}", *extra]


def _ansatz(cfg, problem):
    """Trial state and the ansatz spec that produced it (``None`` for the HF determinant)."""
    if cfg.ansatz_mode == "hf":
        return problem.hf_state(), None
    if cfg.excitations.lower() == "default":
        spec = problem.default_ansatz()
    else:
        exc = [_parse_excitation(t) for t in cfg.excitations.split(";") if t.strip()]
        spec = AnsatzSpec(problem.n_qubits, problem.hf_occupied(), exc)
    if cfg.thetas is not None:
        spec = spec.with_thetas(cfg.thetas)
    if cfg.ansatz_mode == "optimize":
        try:
            spec = problem.optimize(spec, seed=cfg.ansatz_seed, n_starts=cfg.starts)
        except VQEConvergenceError as exc:
            _log(f"warning: {exc}; using the lowest-energy parameters found")
            spec = exc.best
    return uccd_state(spec), spec


def _noise(cfg):
    return NoiseSpec(cfg.q, cfg.shots, cfg.noise_seed, cfg.noise_enabled)


def _out_dir(cfg, args):
    out = Path(args.out or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    overrides = {}
    if args.seed is not None:
        overrides["noise.seed"] = args.seed
    return load_config(args.config, overrides=overrides)


def _write(path, text):
    Path(path).write_text(text)
    _log(f"wrote {path}")


# --------------------------------------------------------------------------- #
# subcommands


def cmd_validate(args):
    if args.print_defaults:
        print(DEFAULTS, end="")
        return EXIT_OK
    from .validation import run_checks

    problem = None
    if args.config:
        cfg = _load(args)
        print(f"PASS config {cfg.source} hash={cfg.config_hash()}")
        with stage("system"):
            problem = cfg.build_problem()
    with stage("checks"):
        results = run_checks(problem, seed=0 if args.seed is None else args.seed)
    for r in results:
        print(r.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return EXIT_INVALID if n_fail else EXIT_OK


def cmd_fci(args):
    cfg = _load(args)
    with stage("system"):
        problem = cfg.build_problem()
    with stage("references"):
        ref = problem.references()
    out = ref.to_dict()
    out["mu_fci_debye"] = ref.mu_fci * AU_TO_DEBYE
    text = json.dumps(out, indent=2) + "\n"
    print(text, end="")
    if args.out:
        _write(_out_dir(cfg, args) / "references.json", text)
    return EXIT_OK


def cmd_moments(args):
    cfg = _load(args)
    with stage("system"):
        problem = cfg.build_problem()
    with stage("ansatz"):
        psi, _ = _ansatz(cfg, problem)
    with stage("moments"):
        exact = operator_table(problem.ops, psi, "trial")
        tables = {"exact": exact}
        if cfg.noise_enabled:
            tables[cfg.mode] = problem.estimator(psi, _noise(cfg)).inputs.trial.table
    header = f"# energy_shift {problem.energy_shift!r}\n# config_hash {cfg.config_hash()}\n"
    for name, table in tables.items():
        print(f"# {name}")
        print(table.to_tsv(), end="")
        if args.out:
            _write(_out_dir(cfg, args) / f"table_{name}.tsv", header + table.to_tsv())
    return EXIT_OK


def calibration_rows(est, trial_exact):
    """Normalized errors ``|x - exact| / |exact - mixed|`` per (p, k) before
    and after reference-state mitigation; the maximally mixed state scores 1."""
    inp = est.inputs
    rows = []
    for p, k in ENTRIES:
        mixed = inp.mixed[p, k]
        q, flags = calibrate(inp.reference.table[p, k], inp.reference_exact[p, k], mixed)
        for state, noisy, exact in (("reference", inp.reference.table[p, k], inp.reference_exact[p, k]),
                                    ("trial", inp.trial.table[p, k], trial_exact[p, k])):
            scale = abs(exact - mixed)
            fixed = mitigate(noisy, mixed, q)
            if scale < 1e-10 * max(1.0, abs(exact)):
                before = after = float("nan")
            else:
                before, after = abs(noisy - exact) / scale, abs(fixed - exact) / scale
            rows.append({"state": state, "p": p, "k": k, "q": float(q), "before": float(before), "after": float(after),
                         "flags": ",".join(flags) or "-"})
    return rows


def cmd_calibrate(args):
    cfg = _load(args)
    with stage("system"):
        problem = cfg.build_problem()
    with stage("ansatz"):
        psi, _ = _ansatz(cfg, problem)
    with stage("sampling"):
        est = problem.estimator(psi, _noise(cfg))
    with stage("calibration"):
        rows = calibration_rows(est, operator_table(problem.ops, psi, "trial"))
    lines = [f"# {c}" for c in _comments(cfg)]
    lines.append("state\tp\tk\tq\terror_before\terror_after\tflags")
    for r in rows:
        lines.append(f"{r['state']}\t{r['p']}\t{r['k']}\t{r['q']!r}\t{r['before']!r}\t{r['after']!r}\t{r['flags']}")
    text = "\n".join(lines) + "\n"
    print(text, end="")
    print("# summary by order in mu (trial state, mean normalized error)")
    print("order\tn\tbefore\tafter\tspread_after")
    for k in range(5):
        sel = [r for r in rows if r["state"] == "trial" and r["k"] == k and np.isfinite(r["before"])]
        if sel:
            b = np.array([r["before"] for r in sel])
            a = np.array([r["after"] for r in sel])
            print(f"{k}\t{len(sel)}\t{b.mean():.3e}\t{a.mean():.3e}\t{a.std():.3e}")
    if args.out:
        _write(_out_dir(cfg, args) / "calibration.tsv", text)
    return EXIT_OK


def energy_curve_csv(est, methods, lams, e_fci, comments):
    lines = [f"# {c}" for c in comments] + ["method,lam,E_L,branch,E_fci"]
    for m in methods:
        for (lam, e, branch), ef in zip(est.energy_curve(m, lams), e_fci):
            lines.append(f"{m},{float(lam)!r},{float(e)!r},{branch.value},{float(ef)!r}")
    return "\n".join(lines) + "\n"


def summary_text(cfg, problem, rows, ref, spec):
    lines = [f"hfmoments {__version__}  config_hash {cfg.config_hash()}  mode {cfg.mode}",
             f"qubits {problem.n_qubits}  electrons {problem.n_elec}  energy_shift {problem.energy_shift:.10f}",
             f"E_FCI {ref.e_fci:.10f}  mu_FCI {ref.mu_fci:.8f} a.u. ({ref.mu_fci * AU_TO_DEBYE:.6f} D)",
             f"E_HF  {ref.e_hf:.10f}  mu_HF  {ref.mu_hf:.8f} a.u."]
    if spec is not None:
        lines.append(f"ansatz {len(spec.excitations)} doubles")
    lines.append("")
    lines.append("method  delta       mu_L_au       std          mu_L_debye  mu_expect_au  std          "
                 "flagged  negative_discriminant")
    for m in cfg.methods:
        mrows = [r for r in rows if r.method == m]
        r0 = mrows[0]
        n_flag = sum(r.flagged for r in mrows)
        n_neg = sum((r.branch_plus is Branch.NEGATIVE_DISCRIMINANT) + (r.branch_minus is Branch.NEGATIVE_DISCRIMINANT)
                    for r in mrows)
        lines.append(f"{m:<7} {r0.delta:<11.4g} {r0.mu_L:<13.8f} {r0.mu_L_std:<12.3g} {r0.mu_L_debye:<11.6f} "
                     f"{r0.mu_expect:<13.8f} {r0.mu_expect_std:<12.3g} {n_flag:<8d} {n_neg}")
    return "\n".join(lines) + "\n"


def cmd_scan(args):
    cfg = _load(args)
    out = _out_dir(cfg, args)
    with stage("system"):
        problem = cfg.build_problem()
    with stage("ansatz"):
        psi, spec = _ansatz(cfg, problem)
        if spec is not None:
            _write(out / "ansatz.tsv", "key\tvalue\n" + "".join(f"{k}\t{v}\n" for k, v in spec.to_config().items()))
    with stage("sampling"):
        est = problem.estimator(psi, _noise(cfg))
        if est.sampled:
            est.inputs.trial.save(out / "tables" / "trial")
            est.inputs.reference.save(out / "tables" / "reference")
    with stage("references"):
        ref = problem.references()
        _write(out / "references.json", json.dumps(ref.to_dict(), indent=2) + "\n")
    with stage("scan"):
        rows = est.scan(cfg.methods, cfg.grid, cfg.resamples if est.sampled else 0, cfg.noise_seed, args.threads)
        comments = _comments(cfg, [f"energy_shift {problem.energy_shift!r}"])
        for m in cfg.methods:
            _write(out / f"scan_{cfg.mode}_{m}.csv", rows_to_csv([r for r in rows if r.method == m], comments))
    with stage("energy_curve"):
        lams = np.concatenate([-cfg.grid[::-1], [0.0], cfg.grid])
        e_fci = fci_energy_curve(jordan_wigner(problem.h), jordan_wigner(problem.mu), problem.mi.n_elec, lams,
                                 problem.mi.ms2)
        _write(out / "energy_curve.csv", energy_curve_csv(est, cfg.methods, lams, e_fci, comments))
    text = summary_text(cfg, problem, rows, ref, spec)
    _write(out / "summary.txt", text)
    print(text, end="")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "scan": cmd_scan, "calibrate": cmd_calibrate, "fci": cmd_fci,
            "moments": cmd_moments}


def build_parser():
    ap = argparse.ArgumentParser(prog="hfmoments", description="Moments-corrected energies and dipoles.")
    ap.add_argument("--version", action="version", version=f"hfmoments {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "validate", help="run configuration (INI)")
        p.add_argument("--seed", type=int, help="override [noise] seed")
        p.add_argument("--threads", type=int, default=1, help="bootstrap worker threads")
        p.add_argument("--out", help="output directory (overrides [scan] output)")
        if name == "validate":
            p.add_argument("--print-defaults", action="store_true", help="print the default configuration")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"FAIL config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StageError as exc:
        print(f"error in stage {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
