"""Generate qubit Hamiltonian files for the benchmark molecules.

Runs pyscf (RHF + FCI/CASCI in STO-3G), maps the second-quantized Hamiltonian
to qubits with the parity encoding, and removes the two parity qubits fixed
by the alpha/beta electron counts. Output is the JSON Hamiltonian format read
by ``chemclifford.io.load_hamiltonian``.

This is an out-of-band tool: the library itself never imports pyscf.

    python tools/make_hamiltonians.py --out data/
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np
from pyscf import fci, gto, mcscf, scf


# Pauli algebra on packed ints in the P = i^k Z^z X^x convention.
def _mul(a, b):
    (xa, za), (xb, zb) = a, b
    sign = -1 if bin(xa & zb).count("1") % 2 else 1
    return (xa ^ xb, za ^ zb), sign


def _op_mul(p, q):
    out = {}
    for ka, ca in p.items():
        for kb, cb in q.items():
            k, s = _mul(ka, kb)
            out[k] = out.get(k, 0.0) + s * ca * cb
    return out


def _op_add(acc, p, scale=1.0):
    for k, c in p.items():
        acc[k] = acc.get(k, 0.0) + scale * c


def parity_creation(j, n):
    """a_j^dagger = 1/2 (Z_{j-1} X_j - i Y_j) X_{j+1} ... X_{n-1}."""
    upper = 0
    for i in range(j + 1, n):
        upper |= 1 << i
    xj = 1 << j
    zprev = (1 << (j - 1)) if j > 0 else 0
    # Z_{j-1} X_j  (Z before X, disjoint qubits): x = xj|upper, z = zprev
    # -i Y_j = -i * (-i Z_j X_j) = - Z_j X_j
    return {(xj | upper, zprev): 0.5, (xj | upper, xj): -0.5}


def dagger(p):
    out = {}
    for (x, z), c in p.items():
        # (Z^z X^x)^dagger = X^x Z^z = (-1)^{x.z} Z^z X^x
        s = -1 if bin(x & z).count("1") % 2 else 1
        out[(x, z)] = out.get((x, z), 0.0) + s * np.conj(c)
    return out


def qubit_hamiltonian(h1, h2, ecore, nmo):
    """Spin-orbital Hamiltonian in parity encoding; alpha orbitals first."""
    n = 2 * nmo
    cre = [parity_creation(j, n) for j in range(n)]
    ann = [dagger(c) for c in cre]
    ham = {(0, 0): complex(ecore)}
    excit = {}

    def e_pq(p, q):
        key = (p, q)
        if key not in excit:
            excit[key] = _op_mul(cre[p], ann[q])
        return excit[key]

    for s in (0, 1):
        for p in range(nmo):
            for q in range(nmo):
                if abs(h1[p, q]) > 1e-14:
                    _op_add(ham, e_pq(p + s * nmo, q + s * nmo), h1[p, q])
    # 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}
    for s in (0, 1):
        for t in (0, 1):
            for p in range(nmo):
                for q in range(nmo):
                    for r in range(nmo):
                        for u in range(nmo):
                            v = h2[p, q, r, u]
                            if abs(v) < 1e-14:
                                continue
                            P, Q = p + s * nmo, q + s * nmo
                            R, U = r + t * nmo, u + t * nmo
                            if P == R or Q == U:
                                continue
                            term = _op_mul(_op_mul(cre[P], cre[R]), _op_mul(ann[U], ann[Q]))
                            _op_add(ham, term, 0.5 * v)
    return ham, n


def taper(ham, n, n_alpha, n_beta):
    """Drop parity qubits nmo-1 and n-1 by substituting their Z eigenvalues."""
    nmo = n // 2
    qa, qt = nmo - 1, n - 1
    va = (-1) ** n_alpha
    vt = (-1) ** (n_alpha + n_beta)
    keep = [i for i in range(n) if i not in (qa, qt)]
    out = {}
    for (x, z), c in ham.items():
        if (x >> qa) & 1 or (x >> qt) & 1:
            if abs(c) > 1e-12:
                raise RuntimeError("Hamiltonian flips a conserved parity qubit")
            continue
        if (z >> qa) & 1:
            c = c * va
        if (z >> qt) & 1:
            c = c * vt
        nx = nz = 0
        for new, old in enumerate(keep):
            nx |= ((x >> old) & 1) << new
            nz |= ((z >> old) & 1) << new
        out[(nx, nz)] = out.get((nx, nz), 0.0) + c
    return out, len(keep), keep


def hf_bits(nmo, n_alpha, n_beta, keep):
    occ = [0] * (2 * nmo)
    for i in range(n_alpha):
        occ[i] = 1
    for i in range(n_beta):
        occ[nmo + i] = 1
    par = np.cumsum(occ) % 2
    return "".join(str(int(par[i])) for i in keep)


def to_letters(x, z, n):
    letters = []
    n_y = 0
    for i in range(n):
        xi, zi = (x >> i) & 1, (z >> i) & 1
        if xi and zi:
            letters.append("Y")
            n_y += 1
        elif xi:
            letters.append("X")
        elif zi:
            letters.append("Z")
        else:
            letters.append("I")
    # Z^z X^x = i^{#Y} * letters
    return "".join(letters), 1j ** n_y


MOLECULES = {
    "h4": dict(atom="H 0 0 0; H 0 0 0.8; H 0 0 1.6; H 0 0 2.4", symmetry=True),
    "lih": dict(atom="Li 0 0 0; H 0 0 1.6", symmetry=True),
    "beh2": dict(atom="H 0 0 -1.0; Be 0 0 0; H 0 0 1.0", symmetry=True),
    "h2o": dict(
        atom=(
            "O 0 0 0; "
            f"H 0 {0.9584 * np.sin(np.radians(104.45 / 2)):.10f} {0.9584 * np.cos(np.radians(104.45 / 2)):.10f}; "
            f"H 0 {-0.9584 * np.sin(np.radians(104.45 / 2)):.10f} {0.9584 * np.cos(np.radians(104.45 / 2)):.10f}"
        ),
        symmetry=True,
    ),
}

# (molecule, active electrons, active orbital labels by irrep or None for full space)
SYSTEMS = {
    "h4_2e3o": ("h4", 2, {"A1u": 1, "A1g": 1}, [1, 2, 3]),
    "h4_full": ("h4", None, None, None),
    "lih_2e3o": ("lih", 2, None, "a1:2,3,4"),
    "lih_full": ("lih", None, None, None),
    "beh2_4e4o": ("beh2", 4, None, "a1g:2,3;a1u:1,2"),
    "beh2_full": ("beh2", None, None, None),
    "h2o_4e4o": ("h2o", 4, None, "a1:3,4;b1:1;b2:2"),
}


def _labelled_indices(mol, mf, selection):
    """Pick MOs by irrep label counts, e.g. 'a1:2,3,4' = 2nd..4th a1 orbitals."""
    from pyscf import symm

    labels = symm.label_orb_symm(mol, mol.irrep_name, mol.symm_orb, mf.mo_coeff)
    labels = [lab.lower() for lab in labels]
    wanted = []
    for chunk in selection.split(";"):
        irrep, nums = chunk.split(":")
        idx = [i for i, lab in enumerate(labels) if lab == irrep]
        wanted += [idx[int(k) - 1] for k in nums.split(",")]
    return sorted(wanted), labels


def build(name):
    molname, nelecas, _, active = SYSTEMS[name]
    mol = gto.M(basis="sto-3g", unit="Angstrom", verbose=0, **MOLECULES[molname])
    mf = scf.RHF(mol).run()
    e_hf = mf.e_tot
    nmo_total = mf.mo_coeff.shape[1]
    if nelecas is None:
        ncas, nelec = nmo_total, mol.nelectron
        active_idx = list(range(nmo_total))
    else:
        if isinstance(active, str):
            active_idx, labels = _labelled_indices(mol, mf, active)
        else:
            active_idx = active
        ncas, nelec = len(active_idx), nelecas
    cas = mcscf.CASCI(mf, ncas, nelec)
    mo = cas.sort_mo(active_idx, base=0)
    cas.mo_coeff = mo
    h1, ecore = cas.get_h1eff(mo)
    from pyscf import ao2mo

    h2 = ao2mo.restore(1, cas.get_h2eff(mo), ncas)
    e_fci = fci.direct_spin1.kernel(h1, h2, ncas, nelec, ecore=ecore)[0]

    n_alpha = n_beta = nelec // 2
    ham, n = qubit_hamiltonian(h1, h2, ecore, ncas)
    tapered, nq, keep = taper(ham, n, n_alpha, n_beta)
    constant = 0.0
    terms = []
    for (x, z), c in sorted(tapered.items()):
        letters, ph = to_letters(x, z, nq)
        val = c / ph
        if abs(val.imag) > 1e-10:
            raise RuntimeError(f"non-real coefficient on {letters}: {val}")
        if abs(val.real) < 1e-12:
            continue
        if x == 0 and z == 0:
            constant += val.real
        else:
            terms.append({"pauli": letters, "coeff": float(val.real)})
    doc = {
        "n_qubits": nq,
        "terms": terms,
        "hf_occupation": hf_bits(ncas, n_alpha, n_beta, keep),
        "constant": float(constant),
        "metadata": {
            "name": name,
            "e_hf": float(e_hf),
            "e_fci": float(e_fci),
            "basis": "sto-3g",
            "mapping": "parity, two-qubit reduction",
            "active_orbitals": [int(i) for i in active_idx],
            "active_electrons": int(nelec),
        },
    }
    return doc


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("systems", nargs="*", default=list(SYSTEMS))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.systems:
        doc = build(name)
        md = doc["metadata"]
        print(
            f"{name}: {doc['n_qubits']} qubits, {len(doc['terms'])} terms, "
            f"HF error {(md['e_hf'] - md['e_fci']) * 1e3:.4f} mH"
        )
        (out / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
