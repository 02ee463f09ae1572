"""Bundled integral fixtures (see scripts/make_fixtures.py for their origin)."""

import json
from importlib import resources

from .integrals import parse_dipole_file, parse_fcidump

NAMES = ("toy", "h2", "h2_field", "h4", "water")


def data_path(filename):
    return resources.files("hfmoments") / "data" / filename


def load_fixture(name):
    """``(MolecularIntegrals, DipoleIntegrals, metadata)`` for a bundled fixture."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(NAMES)}")
    mi = parse_fcidump(data_path(f"{name}.fcidump").read_text())
    di = parse_dipole_file(data_path(f"{name}.dipole").read_text())
    return mi, di, metadata()[name]


def metadata():
    return json.loads(data_path("fixtures.json").read_text())
