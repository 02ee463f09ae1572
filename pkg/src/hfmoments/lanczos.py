"""Cumulant recursion and the fourth-order Lanczos energy estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

EPS = 1e-10


class Branch(str, Enum):
    REGULAR = "regular"
    NEGATIVE_DISCRIMINANT = "negative_discriminant"
    DEGENERATE_C2 = "degenerate_c2"
    DEGENERATE_DENOMINATOR = "degenerate_denominator"


@dataclass(frozen=True)
class Cumulants:
    c1: float
    c2: float
    c3: float
    c4: float

    def scale(self):
        """Energy scale used to nondimensionalize the degeneracy tests."""
        return max(1.0, abs(self.c2), abs(self.c3) ** (2 / 3), abs(self.c4) ** 0.5)


@dataclass(frozen=True)
class LanczosEstimate:
    value: float
    branch: Branch
    discriminant: float
    denominator: float

    @property
    def regular(self):
        return self.branch is Branch.REGULAR


def _finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite input {v!r}")


def cumulants(m1, m2, m3, m4) -> Cumulants:
    """Cumulants from raw moments <H>, <H^2>, <H^3>, <H^4>."""
    m1, m2, m3, m4 = (float(m) for m in (m1, m2, m3, m4))
    _finite(m1, m2, m3, m4)
    c1 = m1
    c2 = m2 - c1 * m1
    c3 = m3 - c1 * m2 - 2 * c2 * m1
    c4 = m4 - c1 * m3 - 3 * c2 * m2 - 3 * c3 * m1
    return Cumulants(c1, c2, c3, c4)


def lanczos_energy(c: Cumulants, eps=EPS) -> LanczosEstimate:
    """Corrected energy

        E_L = c1 - c2^2 / (c3^2 - c2 c4) * (sqrt(3 c3^2 - 2 c2 c4) - c3)

    A non-positive discriminant keeps the real part of the square root
    (zero), so the correction becomes ``+c2^2 c3 / (c3^2 - c2 c4)``; the branch
    is flagged.  When ``c2`` or the denominator vanish the estimate falls back
    to ``c1``.

    Degeneracy tests are relative to ``s = max(1, |c2|, |c3|^(2/3), |c4|^(1/2))``,
    which carries units of energy^2.  ``c2`` is compared with ``eps * s`` and
    the discriminant and denominator (energy^6) with ``eps * s^3``.
    """
    _finite(c.c1, c.c2, c.c3, c.c4)
    s = c.scale()
    disc = 3 * c.c3 ** 2 - 2 * c.c2 * c.c4
    den = c.c3 ** 2 - c.c2 * c.c4
    if c.c2 <= eps * s:
        return LanczosEstimate(c.c1, Branch.DEGENERATE_C2, disc, den)
    if abs(den) <= eps * s ** 3:
        return LanczosEstimate(c.c1, Branch.DEGENERATE_DENOMINATOR, disc, den)
    if disc <= eps * s ** 3:
        return LanczosEstimate(c.c1 + c.c2 ** 2 * c.c3 / den, Branch.NEGATIVE_DISCRIMINANT, disc, den)
    value = c.c1 - c.c2 ** 2 / den * (math.sqrt(disc) - c.c3)
    return LanczosEstimate(value, Branch.REGULAR, disc, den)


def lanczos_from_moments(m1, m2, m3, m4, eps=EPS) -> LanczosEstimate:
    return lanczos_energy(cumulants(m1, m2, m3, m4), eps)
