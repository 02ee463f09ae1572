"""Run configuration: a sectioned key-value file read with configparser.

Paths are resolved relative to the config file; ``fixture:NAME`` selects a
bundled fixture.  Orbital indices in ``[system]`` refer to the spatial
orbitals of the FCIDUMP file (before any freezing).
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fixtures import NAMES, data_path

METHODS = "ABCDE"

DEFAULTS = """\
[system]
# FCIDUMP integrals and dipole file: a path (relative to this file) or fixture:NAME
fcidump = fixture:h2
dipole = fixture:h2
# spatial orbitals folded into the integrals (doubly occupied)
frozen_core =
# spatial orbitals frozen only in the moment operators
moment_frozen =
# electrons per spin-orbital of each moment-frozen orbital (one value or one per orbital)
moment_frozen_occupation = 1
# Wick-product truncation: auto (electron count), none, or an integer
max_annihilators = auto
# constant subtracted from H before forming moments: hf, none, or a number (hartree)
energy_shift = hf

[ansatz]
# optimize (UCCD VQE), fixed (use thetas as given) or hf (reference determinant)
mode = optimize
# default (all spin-conserving doubles) or "i,j->a,b; ..." on active spin-orbitals
excitations = default
# initial/fixed amplitudes, blank for zeros
thetas =
seed = 0
starts = 3

[noise]
enabled = false
# global depolarizing probability, 0 <= q < 1
q = 0.0
# shots per measurement group, 0 for the exact channel
shots = 25000
seed = 0
resamples = 100

[scan]
methods = B C D E
# "log LO HI N" or an explicit increasing list of positive values
grid = log 1e-4 1e-1 24
output = results
"""


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    fcidump: str
    dipole: str
    frozen_core: tuple = ()
    moment_frozen: tuple = ()
    moment_occupation: tuple = ()
    max_annihilators: object = "auto"
    energy_shift: object = "hf"
    ansatz_mode: str = "optimize"
    excitations: str = "default"
    thetas: tuple = None
    ansatz_seed: int = 0
    starts: int = 3
    noise_enabled: bool = False
    q: float = 0.0
    shots: int = 25000
    noise_seed: int = 0
    resamples: int = 100
    methods: tuple = ("B", "C", "D", "E")
    grid: np.ndarray = field(default_factory=lambda: np.logspace(-4, -1, 24))
    output: str = "results"
    source: str = "<defaults>"
    text: str = field(default="", repr=False)

    @property
    def sampled(self):
        return self.noise_enabled and self.shots > 0

    @property
    def mode(self):
        return "sampled" if self.sampled else "analytic"

    def config_hash(self):
        """sha256 of the normalized settings (comments and layout ignored)."""
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]

    def load_integrals(self):
        from .integrals import parse_dipole_file, parse_fcidump

        return (parse_fcidump(_read(self.fcidump, "fcidump")),
                parse_dipole_file(_read(self.dipole, "dipole")))

    def build_problem(self):
        from .problem import build_problem

        mi, di = self.load_integrals()
        for p in self.frozen_core + self.moment_frozen:
            if not 0 <= p < mi.n_orb:
                raise ConfigError(f"orbital {p} outside [0, {mi.n_orb})")
        core = sorted(self.frozen_core)
        # moment-level indices are given before core freezing
        moment = [p - sum(c < p for c in core) for p in self.moment_frozen]
        return build_problem(mi, di, core, moment, list(self.moment_occupation), self.max_annihilators,
                             self.energy_shift)


def _read(ref, suffix):
    if ref.startswith("fixture:"):
        return data_path(f"{ref.split(':', 1)[1]}.{suffix}").read_text()
    return Path(ref).read_text()


def _ints(text, key):
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{key}: expected integers, got {text!r}") from None


def _number(section, key, kind):
    try:
        return kind(section[key])
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: cannot read {section[key]!r} as {kind.__name__}") from None


def _bool(section, key):
    try:
        return section.getboolean(key)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected true/false") from None


def parse_grid(text):
    """``log LO HI N`` or a whitespace/comma separated list."""
    parts = text.replace(",", " ").split()
    try:
        if parts and parts[0] == "log":
            if len(parts) != 4:
                raise ConfigError("grid: expected 'log LO HI N'")
            lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
            if lo <= 0 or hi <= 0:
                raise ConfigError("grid must be strictly positive")
            grid = np.logspace(np.log10(lo), np.log10(hi), n)
        else:
            grid = np.array([float(v) for v in parts])
    except ValueError:
        raise ConfigError(f"grid: cannot parse {text!r}") from None
    if len(grid) == 0:
        raise ConfigError("grid is empty")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ConfigError("grid must be strictly positive")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be strictly increasing")
    return grid


def _resolve(ref, base):
    ref = ref.strip()
    if ref.startswith("fixture:"):
        name = ref.split(":", 1)[1]
        if name not in NAMES:
            raise ConfigError(f"unknown fixture {name!r}; available: {', '.join(NAMES)}")
        return ref
    path = Path(ref)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise ConfigError(f"file not found: {path}")
    return str(path)


def _normalized(parser):
    lines = []
    for name in parser.sections():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {' '.join(v.split())}" for k, v in sorted(parser[name].items()))
    return "\n".join(lines) + "\n"


def load_config(path=None, text=None, overrides=None) -> RunConfig:
    """Read and validate a configuration.

    ``overrides`` maps ``"section.key"`` to a string value (command-line
    flags).  Unknown sections or keys are rejected.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";",))
    parser.read_string(DEFAULTS)
    known = {s: set(parser[s]) for s in parser.sections()}
    base = Path.cwd()
    source = "<defaults>"
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text()
        base = path.resolve().parent
        source = str(path)
    if text is not None:
        user = configparser.ConfigParser(inline_comment_prefixes=(";",))
        try:
            user.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None
        for name in user.sections():
            if name not in known:
                raise ConfigError(f"unknown section [{name}]")
            for key, value in user[name].items():
                if key not in known[name]:
                    raise ConfigError(f"unknown key [{name}] {key}")
                parser[name][key] = value
    for dotted, value in (overrides or {}).items():
        name, key = dotted.split(".")
        parser[name][key] = str(value)

    sy, an, no, sc = parser["system"], parser["ansatz"], parser["noise"], parser["scan"]
    frozen_core = _ints(sy["frozen_core"], "frozen_core")
    moment_frozen = _ints(sy["moment_frozen"], "moment_frozen")
    for label, orbs in (("frozen_core", frozen_core), ("moment_frozen", moment_frozen)):
        if len(set(orbs)) != len(orbs):
            raise ConfigError(f"{label} lists an orbital twice")
        if any(p < 0 for p in orbs):
            raise ConfigError(f"{label}: negative orbital index")
    overlap = set(frozen_core) & set(moment_frozen)
    if overlap:
        raise ConfigError(f"orbitals {sorted(overlap)} are frozen both in the core and in the moments")
    occ = _ints(sy["moment_frozen_occupation"], "moment_frozen_occupation")
    if len(occ) == 1:
        occ = occ * len(moment_frozen)
    if len(occ) != len(moment_frozen) or any(o not in (0, 1) for o in occ):
        raise ConfigError("moment_frozen_occupation: one value (0 or 1) or one per moment-frozen orbital")

    max_ann = sy["max_annihilators"].strip().lower()
    if max_ann == "none":
        max_ann = None
    elif max_ann != "auto":
        max_ann = _number(sy, "max_annihilators", int)
    shift = sy["energy_shift"].strip().lower()
    if shift == "none":
        shift = 0.0
    elif shift != "hf":
        shift = _number(sy, "energy_shift", float)

    mode = an["mode"].strip().lower()
    if mode not in ("optimize", "fixed", "hf"):
        raise ConfigError("[ansatz] mode must be optimize, fixed or hf")
    thetas = tuple(float(t) for t in an["thetas"].replace(",", " ").split()) or None
    if mode == "fixed" and thetas is None:
        raise ConfigError("[ansatz] mode = fixed needs thetas")
    starts = _number(an, "starts", int)
    if starts < 1:
        raise ConfigError("[ansatz] starts must be >= 1")

    q = _number(no, "q", float)
    if not 0.0 <= q < 1.0:
        raise ConfigError(f"[noise] q = {q} outside [0, 1)")
    shots = _number(no, "shots", int)
    if shots < 0:
        raise ConfigError("[noise] shots must be >= 0")
    resamples = _number(no, "resamples", int)
    if resamples != 0 and resamples < 2:
        raise ConfigError("[noise] resamples must be 0 or >= 2")

    methods = tuple(m.upper() for m in sc["methods"].replace(",", " ").split())
    if not methods or any(m not in METHODS for m in methods) or len(set(methods)) != len(methods):
        raise ConfigError(f"[scan] methods must be distinct letters from {METHODS}")

    return RunConfig(
        fcidump=_resolve(sy["fcidump"], base),
        dipole=_resolve(sy["dipole"], base),
        frozen_core=frozen_core,
        moment_frozen=moment_frozen,
        moment_occupation=occ,
        max_annihilators=max_ann,
        energy_shift=shift,
        ansatz_mode=mode,
        excitations=an["excitations"].strip(),
        thetas=thetas,
        ansatz_seed=_number(an, "seed", int),
        starts=starts,
        noise_enabled=_bool(no, "enabled"),
        q=q,
        shots=shots,
        noise_seed=_number(no, "seed", int),
        resamples=resamples,
        methods=methods,
        grid=parse_grid(sc["grid"]),
        output=sc["output"].strip(),
        source=source,
        text=_normalized(parser),
    )
