"""Generate the committed integral fixtures (FCIDUMP + dipole files).

Requires pyscf, which is only needed here and is not a runtime dependency
of the package. Run from the repository root:

    python scripts/make_fixtures.py
"""
import json
import os
import sys

import numpy as np
from pyscf import ao2mo, gto, mcscf, scf, symm
from pyscf.tools import fcidump

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")

# molpro ORBSYM numbering
MOLPRO = {
    "D2h": {"Ag": 1, "B3u": 2, "B2u": 3, "B1g": 4, "B1u": 5, "B2g": 6, "B3g": 7, "Au": 8},
    "C2v": {"A1": 1, "B1": 2, "B2": 3, "A2": 4},
}

RECT_GRID = [0.7, 0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2, 1.3, 1.44, 1.6, 1.8, 2.0]
LINEAR_GRID = [0.6, 0.7, 0.75, 0.8, 0.88, 0.92, 1.0, 1.07, 1.15, 1.3, 1.5, 1.8, 2.0]
BEH2_GRID = [0.8, 1.0, 1.1, 1.2, 1.23, 1.3, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4]


def center_of_mass(mol):
    m = mol.atom_mass_list()
    return (m[:, None] * mol.atom_coords()).sum(0) / m.sum()


def write_dipoles(mol, mo, stem):
    com = center_of_mass(mol)
    with mol.with_common_orig(com):
        ints = mol.intor("int1e_r", comp=3)
    nuc = (mol.atom_charges()[:, None] * (mol.atom_coords() - com)).sum(0)
    n = mo.shape[1]
    for k, axis in enumerate("xyz"):
        mu = mo.T @ ints[k] @ mo
        with open(f"{stem}.dip{axis}", "w") as f:
            f.write(f" &FCI NORB={n},NELEC=0,MS2=0,\n  ORBSYM={','.join(['1'] * n)},\n  ISYM=1,\n &END\n")
            for i in range(n):
                for j in range(i + 1):
                    if abs(mu[i, j]) > 1e-15:
                        f.write(f" {mu[i, j]:.16e} {i + 1} {j + 1} 0 0\n")
            f.write(f" {nuc[k]:.16e} 0 0 0 0\n")


def write_fcidump(mol, mo, orbsym, stem):
    n = mo.shape[1]
    h1 = mo.T @ mol.intor("int1e_kin") @ mo + mo.T @ mol.intor("int1e_nuc") @ mo
    eri = ao2mo.restore(8, ao2mo.full(mol, mo, compact=True), n)
    fcidump.from_integrals(
        f"{stem}.fcidump", h1, eri, n, mol.nelectron, nuc=mol.energy_nuc(),
        ms=0, orbsym=orbsym, tol=1e-15, float_format=" %.16e",
    )
    write_dipoles(mol, mo, stem)


def salc_orbitals(mol, signs):
    """Symmetry-adapted combinations of H 1s functions, Loewdin-free (each irrep occurs once)."""
    s = mol.intor("int1e_ovlp")
    cols = []
    for sg in signs:
        c = np.array(sg, dtype=float)
        c /= np.sqrt(c @ s @ c)
        cols.append(c)
    return np.array(cols).T


def rect_h4():
    # 1 A H2 bonds along y, separated by r along x; orbitals fixed by symmetry
    out = os.path.join(ROOT, "h4_rect")
    os.makedirs(out, exist_ok=True)
    geoms = []
    labels = ["Ag", "B2u", "B3u", "B1g"]
    # atom order: (-x,-y), (-x,+y), (+x,-y), (+x,+y)
    signs = [(1, 1, 1, 1), (-1, 1, -1, 1), (-1, -1, 1, 1), (1, -1, -1, 1)]
    for r in RECT_GRID:
        atoms = [("H", (-r / 2, -0.5, 0)), ("H", (-r / 2, 0.5, 0)),
                 ("H", (r / 2, -0.5, 0)), ("H", (r / 2, 0.5, 0))]
        mol = gto.M(atom=atoms, basis="sto-6g", verbose=0)
        mo = salc_orbitals(mol, signs)
        gid = f"r{r:.2f}"
        write_fcidump(mol, mo, [MOLPRO["D2h"][l] for l in labels], os.path.join(out, gid))
        geoms.append({"id": gid, "r_angstrom": r})
    meta = {
        "system": "rectangular H4 (two H2 at 1.0 A bond length, separation r)",
        "basis": "STO-6G",
        "orbitals": "symmetry-adapted H 1s combinations (exact canonical RHF orbitals in this basis)",
        "orbital_labels": ["1ag", "1b2u", "1b3u", "1b1g"],
        "point_group": "D2h",
        "frozen_core": "none; core_energy is nuclear repulsion only",
        "dipole_origin": "center of mass",
        "geometries": geoms,
    }
    with open(os.path.join(out, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2)


def ordered_by_irrep(mol, mo, energies, order):
    """Reorder MOs to a fixed (irrep, within-irrep rank) sequence."""
    lab = list(symm.label_orb_symm(mol, mol.irrep_name, mol.symm_orb, mo))
    ranks = {}
    pos = {}
    for idx in np.argsort(energies, kind="stable"):
        l = lab[idx]
        ranks[l] = ranks.get(l, 0) + 1
        pos[(l, ranks[l])] = idx
    return mo[:, [pos[o] for o in order]], [o[0] for o in order]


def linear_h4():
    out = os.path.join(ROOT, "h4_linear")
    os.makedirs(out, exist_ok=True)
    geoms = []
    order = [("Ag", 1), ("B1u", 1), ("Ag", 2), ("B1u", 2)]
    for r in LINEAR_GRID:
        atoms = [("H", (0, 0, (i - 1.5) * r)) for i in range(4)]
        mol = gto.M(atom=atoms, basis="sto-6g", symmetry="D2h", verbose=0)
        mf = scf.RHF(mol)
        mf.conv_tol, mf.conv_tol_grad = 1e-13, 1e-10
        mf.run()
        assert mf.converged
        mo, labels = ordered_by_irrep(mol, mf.mo_coeff, mf.mo_energy, order)
        gid = f"r{r:.2f}"
        write_fcidump(mol, mo, [MOLPRO["D2h"][l] for l in labels], os.path.join(out, gid))
        geoms.append({"id": gid, "r_angstrom": r, "e_rhf": mf.e_tot})
    meta = {
        "system": "linear equally spaced H4 chain, spacing r",
        "basis": "STO-6G",
        "orbitals": "canonical RHF, ordered 1ag, 1b1u, 2ag, 2b1u (chain along z)",
        "orbital_labels": ["1ag", "1b1u", "2ag", "2b1u"],
        "point_group": "D2h",
        "frozen_core": "none; core_energy is nuclear repulsion only",
        "dipole_origin": "center of mass",
        "geometries": geoms,
    }
    with open(os.path.join(out, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2)


def beh2():
    out = os.path.join(ROOT, "beh2")
    os.makedirs(out, exist_ok=True)
    geoms = []
    order = [("A1", 1), ("A1", 2), ("B2", 1), ("A1", 3), ("A1", 4), ("B1", 1), ("B2", 2)]
    for y in BEH2_GRID:
        z = (127 - 50 * y) / 23
        atoms = [("Be", (0, 0, 0)), ("H", (0, y, z)), ("H", (0, -y, z))]
        mol = gto.M(atom=atoms, basis="sto-6g", unit="bohr", symmetry="C2v", verbose=0)
        mf = scf.RHF(mol)
        mf.conv_tol, mf.conv_tol_grad = 1e-13, 1e-10
        mf.run()
        mc = mcscf.CASSCF(mf, 2, 2)
        mc.fix_spin_(ss=0)
        mc.wfnsym = "A1"
        mo0 = mc.sort_mo_by_irrep({"A1": 1, "B2": 1}, {"A1": 2})
        mc.kernel(mo0)
        assert mc.converged
        # rank within irrep by space (core < active < virtual), then energy
        lab = list(symm.label_orb_symm(mol, mol.irrep_name, mol.symm_orb, mc.mo_coeff))
        key = np.arange(mc.mo_coeff.shape[1], dtype=float)
        mo, labels = ordered_by_irrep(mol, mc.mo_coeff, key, order)
        gid = f"y{y:.2f}"
        write_fcidump(mol, mo, [MOLPRO["C2v"][l] for l in labels], os.path.join(out, gid))
        geoms.append({"id": gid, "y_bohr": y, "z_bohr": z, "e_casscf": mc.e_tot})
    meta = {
        "system": "Be insertion into H2, Be at origin, H at (0, +-y, z), z = (127 - 50 y) / 23 bohr",
        "basis": "STO-6G",
        "orbitals": "state-specific CASSCF(2,2) over 1b2 and 3a1 at each geometry; all 7 orbitals correlated",
        "orbital_labels": ["1a1", "2a1", "1b2", "3a1", "4a1", "1b1", "2b2"],
        "point_group": "C2v",
        "frozen_core": "none; core_energy is nuclear repulsion only",
        "dipole_origin": "center of mass",
        "geometries": geoms,
    }
    with open(os.path.join(out, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2)


def h2():
    out = os.path.join(ROOT, "h2")
    os.makedirs(out, exist_ok=True)
    mol = gto.M(atom=[("H", (0, 0, -0.5)), ("H", (0, 0, 0.5))], basis="sto-6g", verbose=0)
    mo = salc_orbitals(mol, [(1, 1), (1, -1)])
    write_fcidump(mol, mo, [MOLPRO["D2h"]["Ag"], MOLPRO["D2h"]["B1u"]], os.path.join(out, "r1.00"))
    meta = {
        "system": "H2 at 1.0 A", "basis": "STO-6G",
        "orbitals": "sigma_g / sigma_u (exact canonical RHF orbitals in this basis)",
        "orbital_labels": ["1ag", "1b1u"], "point_group": "D2h",
        "frozen_core": "none", "dipole_origin": "center of mass",
        "geometries": [{"id": "r1.00", "r_angstrom": 1.0}],
    }
    with open(os.path.join(out, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2)


if __name__ == "__main__":
    builders = {"h2": h2, "h4_rect": rect_h4, "h4_linear": linear_h4, "beh2": beh2}
    for name in sys.argv[1:] or builders:
        builders[name]()
