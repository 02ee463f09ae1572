"""Integral files: FCIDUMP and its one-body dipole analogue.

Integrals are kept over spatial orbitals in chemists' notation, ``g[p, q, r, s]
= (pq|rs)``, exactly as they appear on disk.  Expansion to spin-orbitals
happens in :mod:`hfmoments.fermion`.

The dipole file reuses the FCIDUMP namelist grammar with an extra ``AXIS`` key;
body lines are ``value i j 0 0`` and the all-zero line carries the constant
(nuclear) part of the dipole::

    &DIPOLE NORB=2, AXIS=Z,
    &END
      0.3  1  2  0  0
      1.5  0  0  0  0
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

#: Magnitudes below this are stored as exact zeros.
ZERO_CUTOFF = 1e-14
#: Duplicate entries that differ by more than this are rejected.
DUPLICATE_TOL = 1e-12


class IntegralFormatError(ValueError):
    """Malformed integral file; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, message, line=0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _frozen_array(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MolecularIntegrals:
    n_orb: int
    e_core: float
    h: np.ndarray
    g: np.ndarray
    n_elec: int
    ms2: int = 0
    orbsym: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "h", _frozen_array(self.h))
        object.__setattr__(self, "g", _frozen_array(self.g))
        n = self.n_orb
        if self.h.shape != (n, n) or self.g.shape != (n, n, n, n):
            raise ValueError("integral tensor shapes do not match n_orb")
        if not 0 <= self.n_elec <= 2 * n:
            raise ValueError(f"n_elec={self.n_elec} outside [0, {2 * n}]")
        if self.orbsym is not None and len(self.orbsym) != n:
            raise ValueError("orbsym length does not match n_orb")


@dataclass(frozen=True)
class DipoleIntegrals:
    axis: str
    d_core: float
    f: np.ndarray
    n_orb: int = field(init=False)

    def __post_init__(self):
        if self.axis not in ("x", "y", "z"):
            raise ValueError(f"axis must be one of x, y, z, got {self.axis!r}")
        object.__setattr__(self, "f", _frozen_array(self.f))
        if self.f.ndim != 2 or self.f.shape[0] != self.f.shape[1]:
            raise ValueError("dipole integrals must be a square matrix")
        if not np.allclose(self.f, self.f.T, atol=1e-12):
            raise ValueError("dipole integrals must be symmetric")
        object.__setattr__(self, "n_orb", self.f.shape[0])


# --------------------------------------------------------------------------- #
# parsing

_HEADER_START = re.compile(r"^\s*&(\w+)", re.IGNORECASE)
_HEADER_END = re.compile(r"(&END\b|/\s*$|/\s*!)", re.IGNORECASE)
_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _split_header(text):
    """Return (header dict, header line count, body lines with line numbers)."""
    lines = text.splitlines()
    if not lines or not _HEADER_START.match(lines[0]):
        raise IntegralFormatError("expected a namelist header starting with '&'", 1)
    header_parts = []
    end = None
    for i, line in enumerate(lines):
        body = line if i else _HEADER_START.sub("", line, count=1)
        m = _HEADER_END.search(body)
        if m:
            header_parts.append(body[: m.start()])
            end = i
            break
        header_parts.append(body)
    if end is None:
        raise IntegralFormatError("namelist header is not terminated by '/' or '&END'", len(lines))
    raw = " ".join(header_parts)
    keys = list(_KEY.finditer(raw))
    header = {}
    for idx, m in enumerate(keys):
        stop = keys[idx + 1].start() if idx + 1 < len(keys) else len(raw)
        value = raw[m.end():stop].strip().rstrip(",").strip()
        header[m.group(1).upper()] = value
    body = [(i + 1, ln) for i, ln in enumerate(lines[end + 1:], start=end + 1)]
    return header, end + 1, body


def _int_key(header, key, line, required=True, default=None):
    if key not in header:
        if required:
            raise IntegralFormatError(f"header is missing {key}", line)
        return default
    try:
        return int(header[key].split(",")[0])
    except ValueError:
        raise IntegralFormatError(f"header value {key}={header[key]!r} is not an integer", line)


def _body_entries(body, n_orb):
    for lineno, line in body:
        stripped = line.split("!")[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if len(parts) != 5:
            raise IntegralFormatError(f"expected 'value i j k l', got {stripped!r}", lineno)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            idx = [int(p) for p in parts[1:]]
        except ValueError:
            raise IntegralFormatError(f"cannot parse {stripped!r}", lineno)
        if any(i < 0 or i > n_orb for i in idx):
            raise IntegralFormatError(f"index out of range [0, {n_orb}] in {stripped!r}", lineno)
        if abs(value) < ZERO_CUTOFF:
            value = 0.0
        yield lineno, value, idx


class _Assigner:
    """Fill a tensor through a set of symmetric images, rejecting conflicts."""

    def __init__(self):
        self.seen = {}

    def set(self, key, value, lineno):
        old = self.seen.get(key)
        if old is not None and abs(old - value) > DUPLICATE_TOL:
            raise IntegralFormatError(f"entry {key} conflicts with an earlier value {old!r}", lineno)
        self.seen[key] = value


def _g_images(p, q, r, s):
    return {(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
            (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)}


def parse_fcidump(text: str) -> MolecularIntegrals:
    """Parse FCIDUMP text into :class:`MolecularIntegrals`.

    Two-electron lines populate all eight permutational images of ``(ij|kl)``;
    ``k = l = 0`` lines populate ``h`` symmetrically and the all-zero line sets
    the core energy.  Entries never mentioned are zero.
    """
    header, hlines, body = _split_header(text)
    n_orb = _int_key(header, "NORB", 1)
    n_elec = _int_key(header, "NELEC", 1)
    ms2 = _int_key(header, "MS2", 1, required=False, default=0)
    orbsym = None
    if "ORBSYM" in header:
        labels = [s for s in re.split(r"[,\s]+", header["ORBSYM"]) if s]
        try:
            orbsym = tuple(int(s) for s in labels)
        except ValueError:
            raise IntegralFormatError(f"bad ORBSYM {header['ORBSYM']!r}", 1)
        if len(orbsym) != n_orb:
            raise IntegralFormatError("ORBSYM length does not match NORB", 1)
    if n_orb <= 0:
        raise IntegralFormatError("NORB must be positive", 1)

    h = np.zeros((n_orb, n_orb))
    g = np.zeros((n_orb,) * 4)
    e_core = 0.0
    seen = _Assigner()
    for lineno, value, (i, j, k, l) in _body_entries(body, n_orb):
        if i and j and k and l:
            seen.set(("g",) + tuple(sorted([tuple(sorted((i, j))), tuple(sorted((k, l)))])), value, lineno)
            for p, q, r, s in _g_images(i - 1, j - 1, k - 1, l - 1):
                g[p, q, r, s] = value
        elif i and j and not k and not l:
            seen.set(("h", min(i, j), max(i, j)), value, lineno)
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        elif not (i or j or k or l):
            seen.set(("e",), value, lineno)
            e_core = value
        elif i and not j and not k and not l:
            # orbital energies, carried by some writers; not needed here
            continue
        else:
            raise IntegralFormatError(f"unsupported index pattern {(i, j, k, l)}", lineno)
    try:
        return MolecularIntegrals(n_orb=n_orb, e_core=e_core, h=h, g=g, n_elec=n_elec,
                                  ms2=ms2, orbsym=orbsym)
    except ValueError as exc:
        raise IntegralFormatError(str(exc), 1) from exc


def parse_dipole_file(text: str) -> DipoleIntegrals:
    """Parse a one-body dipole file (FCIDUMP grammar plus an ``AXIS`` key)."""
    header, _, body = _split_header(text)
    n_orb = _int_key(header, "NORB", 1)
    if "AXIS" not in header:
        raise IntegralFormatError("header is missing AXIS", 1)
    axis = header["AXIS"].strip().strip("'\"").lower()
    if axis not in ("x", "y", "z"):
        raise IntegralFormatError(f"AXIS must be X, Y or Z, got {header['AXIS']!r}", 1)
    f = np.zeros((n_orb, n_orb))
    d_core = 0.0
    seen = _Assigner()
    for lineno, value, (i, j, k, l) in _body_entries(body, n_orb):
        if k or l:
            raise IntegralFormatError("dipole files carry one-body entries only (k = l = 0)", lineno)
        if i and j:
            seen.set((min(i, j), max(i, j)), value, lineno)
            f[i - 1, j - 1] = f[j - 1, i - 1] = value
        elif not i and not j:
            seen.set(("core",), value, lineno)
            d_core = value
        else:
            raise IntegralFormatError(f"unsupported index pattern {(i, j, k, l)}", lineno)
    return DipoleIntegrals(axis=axis, d_core=d_core, f=f)


def read_fcidump(path) -> MolecularIntegrals:
    with open(path) as fh:
        return parse_fcidump(fh.read())


def read_dipole_file(path) -> DipoleIntegrals:
    with open(path) as fh:
        return parse_dipole_file(fh.read())


# --------------------------------------------------------------------------- #
# writing

def _fmt(value):
    return f"{value: .17e}"


def format_fcidump(mi: MolecularIntegrals) -> str:
    """Serialize with one line per symmetry-unique entry."""
    n = mi.n_orb
    lines = [f"&FCI NORB={n},NELEC={mi.n_elec},MS2={mi.ms2},"]
    orbsym = mi.orbsym or (1,) * n
    lines.append("  ORBSYM=" + ",".join(str(s) for s in orbsym) + ",")
    lines.append("  ISYM=1,")
    lines.append("&END")
    for i, j in product(range(n), repeat=2):
        if i < j:
            continue
        for k, l in product(range(n), repeat=2):
            if k < l or (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                continue
            v = mi.g[i, j, k, l]
            if v != 0.0:
                lines.append(f"{_fmt(v)} {i + 1:4d} {j + 1:4d} {k + 1:4d} {l + 1:4d}")
    for i in range(n):
        for j in range(i + 1):
            if mi.h[i, j] != 0.0:
                lines.append(f"{_fmt(mi.h[i, j])} {i + 1:4d} {j + 1:4d}    0    0")
    lines.append(f"{_fmt(mi.e_core)}    0    0    0    0")
    return "\n".join(lines) + "\n"


def format_dipole_file(di: DipoleIntegrals) -> str:
    n = di.n_orb
    lines = [f"&DIPOLE NORB={n}, AXIS={di.axis.upper()},", "&END"]
    for i in range(n):
        for j in range(i + 1):
            if di.f[i, j] != 0.0:
                lines.append(f"{_fmt(di.f[i, j])} {i + 1:4d} {j + 1:4d}    0    0")
    lines.append(f"{_fmt(di.d_core)}    0    0    0    0")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- #
# frozen core

def _check_frozen(n_orb, frozen):
    frozen = [int(i) for i in frozen]
    if len(set(frozen)) != len(frozen):
        raise ValueError(f"frozen orbitals repeat: {frozen}")
    for i in frozen:
        if not 0 <= i < n_orb:
            raise ValueError(f"frozen orbital {i} outside [0, {n_orb})")
    return frozen


def freeze_core_integrals(mi: MolecularIntegrals, frozen) -> MolecularIntegrals:
    """Fold doubly occupied orbitals into the core energy and one-body term."""
    frozen = _check_frozen(mi.n_orb, frozen)
    if 2 * len(frozen) > mi.n_elec:
        raise ValueError("more frozen electrons than electrons")
    if not frozen:
        return mi
    active = [p for p in range(mi.n_orb) if p not in frozen]
    h, g = mi.h, mi.g
    e_core = mi.e_core
    for i in frozen:
        e_core += 2.0 * h[i, i]
        for j in frozen:
            e_core += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    h_new = h.copy()
    for i in frozen:
        h_new += 2.0 * g[:, :, i, i] - g[:, i, i, :]
    ix = np.ix_(active, active)
    orbsym = None if mi.orbsym is None else tuple(mi.orbsym[p] for p in active)
    return MolecularIntegrals(
        n_orb=len(active),
        e_core=float(e_core),
        h=h_new[ix],
        g=g[np.ix_(active, active, active, active)],
        n_elec=mi.n_elec - 2 * len(frozen),
        ms2=mi.ms2,
        orbsym=orbsym,
    )


def freeze_core_dipole(di: DipoleIntegrals, frozen) -> DipoleIntegrals:
    """Integral-level frozen core for a one-body operator: ``d_core += 2 f_ii``."""
    frozen = _check_frozen(di.n_orb, frozen)
    active = [p for p in range(di.n_orb) if p not in frozen]
    d_core = di.d_core + 2.0 * sum(di.f[i, i] for i in frozen)
    return replace(di, d_core=float(d_core), f=di.f[np.ix_(active, active)])


def rhf_energy(mi: MolecularIntegrals, occupied=None) -> float:
    """Closed-shell determinant energy straight from the spatial integrals."""
    occ = list(range(mi.n_elec // 2)) if occupied is None else list(occupied)
    e = mi.e_core + 2.0 * sum(mi.h[i, i] for i in occ)
    for i in occ:
        for j in occ:
            e += 2.0 * mi.g[i, i, j, j] - mi.g[i, j, j, i]
    return float(e)


def rhf_dipole(di: DipoleIntegrals, n_occ: int) -> float:
    """Closed-shell determinant dipole, including the constant part."""
    return float(di.d_core + 2.0 * np.trace(di.f[:n_occ, :n_occ]))


def random_integrals(n_orb, n_elec, rng, scale=0.5) -> MolecularIntegrals:
    """Random real integrals with full 8-fold symmetry (test fixtures)."""
    h = rng.normal(scale=scale, size=(n_orb, n_orb))
    h = 0.5 * (h + h.T)
    g = rng.normal(scale=scale * 0.2, size=(n_orb,) * 4)
    g = sum(np.transpose(g, perm) for perm in
            [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
             (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)]) / 8.0
    return MolecularIntegrals(n_orb=n_orb, e_core=float(rng.normal()), h=h, g=g, n_elec=n_elec)
