"""Regenerate the bundled chemistry Hamiltonians in ``src/wecans/data``.

Not part of the installed package. Needs pyscf (``pip install pyscf``)::

    python3 tools/make_chemistry_fixtures.py

Recipe
------
* Geometry: linear chains with 0.74 angstrom spacing; STO-3G basis; RHF orbitals.
* ``h2``: 2 electrons, Jordan-Wigner mapping, interleaved spin orbitals
  (alpha0, beta0, alpha1, beta1), no qubit reduction: 4 qubits.
* ``h3plus``: charge +1 (2 electrons), block spin ordering (all alpha then all
  beta), parity mapping, then the two qubits that store the alpha-electron
  parity and the total parity are replaced by their eigenvalues in the
  (1 alpha, 1 beta) sector: 6 - 2 = 4 qubits.

The second-quantized Hamiltonian is assembled as a dense matrix in the
occupation basis, the parity mapping is applied as the basis permutation
``occupations -> prefix parities``, and Pauli coefficients are read off as
``tr(P H) / 2^n``. Each file stores the FCI energy of the sector it encodes
so the ground energy of the qubit Hamiltonian can be checked against it.
"""

from __future__ import annotations

import itertools
import json
from functools import reduce
from pathlib import Path

import numpy as np
from pyscf import fci, gto, scf

OUT = Path(__file__).resolve().parents[1] / "src" / "wecans" / "data"
BOND = 0.74
PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


def integrals(atoms: str, charge: int):
    mol = gto.M(atom=atoms, basis="sto-3g", charge=charge, spin=0, unit="Angstrom", verbose=0)
    mf = scf.RHF(mol).run()
    C = mf.mo_coeff
    h1 = C.T @ mf.get_hcore() @ C
    eri = mol.ao2mo(C, aosym=1).reshape((C.shape[1],) * 4)  # chemist order (pq|rs)
    e_fci = fci.FCI(mf).kernel()[0]
    return mol.energy_nuc(), h1, eri, e_fci


def annihilators(n_modes: int) -> list[np.ndarray]:
    """Jordan-Wigner lowering operators; mode 0 is the most significant bit."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    ops = []
    for j in range(n_modes):
        factors = [PAULI["Z"]] * j + [lower] + [PAULI["I"]] * (n_modes - j - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def fermion_matrix(e_nuc, h1, eri, spin_of, orb_of) -> np.ndarray:
    n = len(spin_of)
    a = annihilators(n)
    ad = [op.conj().T for op in a]
    H = e_nuc * np.eye(2**n, dtype=complex)
    for p, q in itertools.product(range(n), repeat=2):
        if spin_of[p] == spin_of[q]:
            H += h1[orb_of[p], orb_of[q]] * ad[p] @ a[q]
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if spin_of[p] == spin_of[q] and spin_of[r] == spin_of[s]:
            g = eri[orb_of[p], orb_of[q], orb_of[r], orb_of[s]]
            if g:
                H += 0.5 * g * ad[p] @ ad[r] @ a[s] @ a[q]
    return H


def parity_permutation(n: int) -> np.ndarray:
    """Index map taking an occupation-basis state to its parity-basis label."""
    perm = np.empty(2**n, dtype=int)
    for idx in range(2**n):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        parity = np.cumsum(bits) % 2
        perm[idx] = int("".join(map(str, parity)), 2)
    return perm


def pauli_terms(H: np.ndarray, tol: float = 1e-10) -> list[tuple[str, float]]:
    n = int(np.log2(H.shape[0]))
    terms = []
    for letters in itertools.product("IXYZ", repeat=n):
        P = reduce(np.kron, [PAULI[c] for c in letters])
        c = np.trace(P @ H) / 2**n
        if abs(c.imag) > 1e-9:
            raise RuntimeError("Hamiltonian is not Hermitian")
        if abs(c.real) > tol:
            terms.append(("".join(letters), float(c.real)))
    return terms


def reduce_qubits(terms, fixed: dict[int, int]):
    """Replace Z (or I) on the qubits in ``fixed`` by the given +-1 eigenvalues."""
    merged: dict[str, float] = {}
    for pauli, c in terms:
        for q, eig in fixed.items():
            if pauli[q] in "XY":
                raise RuntimeError(f"term {pauli} does not commute with Z{q}")
            if pauli[q] == "Z":
                c *= eig
        kept = "".join(ch for k, ch in enumerate(pauli) if k not in fixed)
        merged[kept] = merged.get(kept, 0.0) + c
    return [(p, c) for p, c in merged.items() if abs(c) > 1e-10]


def ground(terms) -> float:
    H = sum(c * reduce(np.kron, [PAULI[ch] for ch in p]) for p, c in terms)
    return float(np.linalg.eigvalsh(H)[0])


def write(name: str, terms, meta: dict) -> None:
    doc = {
        "n_qubits": len(terms[0][0]),
        "terms": [{"pauli": p, "coeff": c} for p, c in sorted(terms)],
        "metadata": meta,
    }
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"{path}: {len(terms)} terms, ground {ground(terms):.10f}, fci {meta['fci_energy']:.10f}")


def h2() -> None:
    e_nuc, h1, eri, e_fci = integrals(f"H 0 0 0; H 0 0 {BOND}", 0)
    norb = h1.shape[0]
    spin_of = [k % 2 for k in range(2 * norb)]
    orb_of = [k // 2 for k in range(2 * norb)]
    H = fermion_matrix(e_nuc, h1, eri, spin_of, orb_of)
    terms = pauli_terms(H)
    write("h2", terms, {
        "molecule": "H2", "bond_angstrom": BOND, "basis": "sto-3g",
        "mapping": "jordan-wigner, interleaved spin orbitals", "fci_energy": e_fci,
    })


def h3plus() -> None:
    e_nuc, h1, eri, e_fci = integrals(f"H 0 0 0; H 0 0 {BOND}; H 0 0 {2 * BOND}", 1)
    norb = h1.shape[0]
    spin_of = [0] * norb + [1] * norb
    orb_of = list(range(norb)) * 2
    H = fermion_matrix(e_nuc, h1, eri, spin_of, orb_of)
    perm = parity_permutation(2 * norb)
    Hp = np.empty_like(H)
    Hp[np.ix_(perm, perm)] = H
    terms = pauli_terms(Hp)
    # qubit norb-1 holds the alpha parity (1 electron -> Z = -1),
    # qubit 2 norb-1 holds the total parity (2 electrons -> Z = +1)
    terms = reduce_qubits(terms, {norb - 1: -1, 2 * norb - 1: +1})
    write("h3plus", terms, {
        "molecule": "H3+ (linear chain)", "bond_angstrom": BOND, "basis": "sto-3g",
        "mapping": "parity, block spin ordering, two-qubit Z2 reduction",
        "fci_energy": e_fci,
    })


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    h2()
    h3plus()
