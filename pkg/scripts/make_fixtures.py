"""Regenerate the bundled integral fixtures (requires pyscf).

    python scripts/make_fixtures.py [outdir]

Writes ``<name>.fcidump``, ``<name>.dipole`` and ``fixtures.json`` (reference
energies and dipoles computed by pyscf) for:

* ``toy``      two-site Hubbard dimer (t=1, U=4), closed-form spectrum
* ``h2``       H2/STO-3G at 0.7414 A along z
* ``h2_field`` the same molecule with a static field of 0.02 a.u. along z
               folded into the one-body integrals (breaks inversion symmetry,
               so the dipole is nonzero)
* ``h4``       linear H4/STO-3G chain with unequal spacings along z
* ``water``    H2O/STO-3G at the experimental geometry in the xy plane with
               the C2 axis along x (dipole along x); used with the O 1s
               orbital frozen in the integrals and the 2a1 and 1b1 orbitals
               frozen in the moment operators (see scripts/water_recipe.py)

Geometries are shifted so the nuclear charge centre sits at the origin, which
makes the constant (nuclear) dipole term zero.  Dipole integrals follow the
convention mu = -sum_electrons r + sum_nuclei Z R.
"""

import json
import sys
from pathlib import Path

import numpy as np
import pyscf
from pyscf import ao2mo, fci, gto, scf

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hfmoments.integrals import (  # noqa: E402
    DipoleIntegrals,
    MolecularIntegrals,
    format_dipole_file,
    format_fcidump,
)

AXES = {"x": 0, "y": 1, "z": 2}


def centered(atoms):
    """Shift an atom list [(sym, (x, y, z))] so the nuclear charge centre is at 0."""
    mol = gto.M(atom=atoms, basis="sto-3g", unit="angstrom")
    charges = mol.atom_charges()
    centre = charges @ mol.atom_coords(unit="angstrom") / charges.sum()
    return [(sym, tuple(np.array(xyz) - centre)) for sym, xyz in atoms]


def molecular_fixture(name, atoms, axis="z", field=0.0):
    mol = gto.M(atom=centered(atoms), basis="sto-3g", unit="angstrom", symmetry=False, verbose=0)
    ax = AXES[axis]
    r_ao = mol.intor("int1e_r")[ax]
    nuc = float(mol.atom_charges() @ mol.atom_coords()[:, ax])
    mf = scf.RHF(mol)
    hcore0 = mf.get_hcore()
    if field:
        mf.get_hcore = lambda *args: hcore0 + field * r_ao
        mf.energy_nuc = lambda *args: mol.energy_nuc() - field * nuc
    mf.conv_tol = 1e-12
    mf.kernel()
    C = mf.mo_coeff
    n = C.shape[1]
    h = C.T @ mf.get_hcore() @ C
    g = ao2mo.restore(1, ao2mo.kernel(mol, C), n)
    mi = MolecularIntegrals(n_orb=n, e_core=float(mf.energy_nuc()), h=h, g=g,
                            n_elec=mol.nelectron, ms2=0)
    f = -(C.T @ r_ao @ C)
    di = DipoleIntegrals(axis=axis, d_core=nuc, f=0.5 * (f + f.T))

    e_fci, civec = fci.direct_spin1.kernel(h, g, n, mol.nelectron, ecore=mf.energy_nuc(),
                                           conv_tol=1e-14)
    rdm1 = fci.direct_spin1.make_rdm1(civec, n, mol.nelectron)
    dm_ao = mf.make_rdm1()
    mu_hf = nuc - float(np.einsum("ij,ji->", r_ao, dm_ao))
    mu_fci = nuc + float(np.einsum("ij,ji->", di.f, rdm1))
    meta = {
        "description": f"{' '.join(a for a, _ in atoms)} STO-3G" + (f", field {field} a.u." if field else ""),
        "atoms": [[a, list(map(float, xyz))] for a, xyz in centered(atoms)],
        "units": "angstrom",
        "field_au": field,
        "axis": axis,
        "e_hf": float(mf.e_tot),
        "e_fci": float(e_fci),
        "mu_hf": mu_hf,
        "mu_fci": mu_fci,
        "generator": f"pyscf {pyscf.__version__}",
    }
    return mi, di, meta


def toy_fixture(t=1.0, u=4.0):
    h = np.array([[0.0, -t], [-t, 0.0]])
    g = np.zeros((2, 2, 2, 2))
    g[0, 0, 0, 0] = g[1, 1, 1, 1] = u
    mi = MolecularIntegrals(n_orb=2, e_core=0.0, h=h, g=g, n_elec=2, ms2=0)
    di = DipoleIntegrals(axis="z", d_core=0.0, f=np.diag([0.5, -0.5]))
    meta = {
        "description": f"two-site Hubbard dimer t={t} U={u} (site basis)",
        "e_fci": u / 2 - float(np.sqrt(u * u / 4 + 4 * t * t)),
        "mu_fci": 0.0,
        "t": t,
        "u": u,
    }
    return mi, di, meta


def water_atoms(r_oh=0.9578, angle_deg=104.4776):
    half = np.deg2rad(angle_deg) / 2
    return [("O", (0.0, 0.0, 0.0)),
            ("H", (r_oh * np.cos(half), r_oh * np.sin(half), 0.0)),
            ("H", (r_oh * np.cos(half), -r_oh * np.sin(half), 0.0))]


def main(outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fixtures = {
        "toy": toy_fixture(),
        "h2": molecular_fixture("h2", [("H", (0, 0, 0)), ("H", (0, 0, 0.7414))]),
        "h2_field": molecular_fixture("h2_field", [("H", (0, 0, 0)), ("H", (0, 0, 0.7414))], field=0.02),
        "h4": molecular_fixture("h4", [("H", (0, 0, 0.0)), ("H", (0, 0, 0.8)),
                                       ("H", (0, 0, 1.75)), ("H", (0, 0, 2.5))]),
        "water": molecular_fixture("water", water_atoms(), axis="x"),
    }
    meta_all = {}
    for name, (mi, di, meta) in fixtures.items():
        (outdir / f"{name}.fcidump").write_text(format_fcidump(mi))
        (outdir / f"{name}.dipole").write_text(format_dipole_file(di))
        meta_all[name] = meta
        print(name, {k: v for k, v in meta.items() if k.startswith(("e_", "mu_"))})
    (outdir / "fixtures.json").write_text(json.dumps(meta_all, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/hfmoments/data")
