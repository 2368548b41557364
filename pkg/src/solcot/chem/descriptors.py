"""Ten physicochemical descriptors computed from a parsed molecule.

The definitions follow the conventions used by common cheminformatics
toolkits, so values are directly comparable to published tables:

* molecular weight uses average atomic masses, hydrogens included;
* logP is the Wildman-Crippen atom-contribution estimate;
* TPSA sums Ertl's nitrogen and oxygen fragment contributions;
* donor, acceptor and rotatable-bond counts are SMARTS definitions
  (the rotatable definition excludes amide-like C-N and CX3 rotors);
* ring counts use the symmetrized smallest set of smallest rings.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .crippen_table import CRIPPEN_TYPES
from .elements import ELEMENTS
from .molecule import BondOrder, Molecule
from .smarts import MatchGraph, compile_smarts
from .smiles import parse_smiles

__all__ = [
    "DESCRIPTOR_NAMES",
    "DescriptorVector",
    "compute_descriptors",
    "crippen_logp",
    "tpsa",
]

_H_WEIGHT = ELEMENTS["H"].weight

_DONOR = "[$([N;!H0;v3]),$([N;!H0;+1;v4]),$([O,S;H1;+0]),$([n;H1;+0])]"
_ACCEPTOR = (
    "[$([O,S;H1;v2]-[!$(*=[O,N,P,S])]),$([O,S;H0;v2]),$([O,S;-]),"
    "$([N;v3;!$(N-*=!@[O,N,P,S])]),$([n;H0;+0;X2]),$([o,s;+0])]"
)
_ROTOR_END = (
    "!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&!$(C([CH3])([CH3])[CH3])"
)
_ROTATABLE = (
    f"[{_ROTOR_END}&!$([CD3](=[N,O,S])-!@[#7,O,S!D1])&!$([#7,O,S!D1]-!@[CD3]=[N,O,S])"
    "&!$([CD3](=[N+])-!@[#7!D1])&!$([#7!D1]-!@[CD3]=[N+])]"
    f"-,:;!@[{_ROTOR_END}]"
)


@dataclass(frozen=True)
class DescriptorVector:
    """Descriptor values for a single molecule, in a fixed order."""

    mw: float
    logp: float
    tpsa: float
    num_h_acceptors: int
    num_h_donors: int
    num_rotatable_bonds: int
    heavy_atom_count: int
    num_aromatic_rings: int
    fraction_csp3: float
    ring_count: int

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DESCRIPTOR_NAMES: tuple[str, ...] = tuple(f.name for f in fields(DescriptorVector))


def molecular_weight(mol: Molecule) -> float:
    return sum(ELEMENTS[a.element].weight + a.h_count * _H_WEIGHT for a in mol.atoms)


def crippen_logp(mol: Molecule) -> float:
    """Wildman-Crippen logP: each atom, hydrogens included, takes its first matching type."""
    g = MatchGraph(mol, explicit_hydrogens=True)
    total = 0.0
    for atom in range(len(g)):
        for _, smarts, logp, _mr in CRIPPEN_TYPES:
            if compile_smarts(smarts).matches_atom(g, atom):
                total += logp
                break
    return total


def _nitrogen_psa(n_nbrs: int, h: int, chg: int, sing: int, doub: int, trip: int,
                  arom: int, in3: bool) -> float:
    value = -1.0
    if n_nbrs == 1:
        if h == 0 and chg == 0 and trip == 1:
            value = 23.79
        elif h == 1 and chg == 0 and doub == 1:
            value = 23.85
        elif h == 2 and chg == 0 and sing == 1:
            value = 26.02
        elif h == 2 and chg == 1 and doub == 1:
            value = 25.59
        elif h == 3 and chg == 1 and sing == 1:
            value = 27.64
    elif n_nbrs == 2:
        if h == 0 and chg == 0 and sing == 1 and doub == 1:
            value = 12.36
        elif h == 0 and chg == 0 and doub == 2:
            value = 13.60
        elif h == 1 and chg == 0 and sing == 2:
            value = 21.94 if in3 else 12.03
        elif h == 0 and chg == 1 and trip == 1 and sing == 1:
            value = 4.36
        elif h == 1 and chg == 1 and doub == 1 and sing == 1:
            value = 13.97
        elif h == 2 and chg == 1 and sing == 2:
            value = 16.61
        elif h == 0 and chg == 0 and arom == 2:
            value = 12.89
        elif h == 1 and chg == 0 and arom == 2:
            value = 15.79
        elif h == 1 and chg == 1 and arom == 2:
            value = 14.14
    elif n_nbrs == 3:
        if h == 0 and chg == 0 and sing == 3:
            value = 3.01 if in3 else 3.24
        elif h == 0 and chg == 0 and sing == 1 and doub == 2:
            value = 11.68
        elif h == 0 and chg == 1 and sing == 2 and doub == 1:
            value = 3.01
        elif h == 1 and chg == 1 and sing == 3:
            value = 4.44
        elif h == 0 and chg == 0 and arom == 3:
            value = 4.41
        elif h == 0 and chg == 0 and sing == 1 and arom == 2:
            value = 4.93
        elif h == 0 and chg == 0 and doub == 1 and arom == 2:
            value = 8.39
        elif h == 0 and chg == 1 and arom == 3:
            value = 4.10
        elif h == 0 and chg == 1 and sing == 1 and arom == 2:
            value = 3.88
    elif n_nbrs == 4:
        if h == 0 and chg == 1 and sing == 4:
            value = 0.00
    if value < 0:
        value = max(30.5 - 8.2 * n_nbrs + 1.5 * h, 0.0)
    return value


def _oxygen_psa(n_nbrs: int, h: int, chg: int, sing: int, doub: int, arom: int,
                in3: bool) -> float:
    value = -1.0
    if n_nbrs == 1:
        if h == 0 and chg == 0 and doub == 1:
            value = 17.07
        elif h == 1 and chg == 0 and sing == 1:
            value = 20.23
        elif h == 0 and chg == -1 and sing == 1:
            value = 23.06
    elif n_nbrs == 2:
        if h == 0 and chg == 0 and sing == 2:
            value = 12.53 if in3 else 9.23
        elif h == 0 and chg == 0 and arom == 2:
            value = 13.14
    if value < 0:
        value = max(28.5 - 8.6 * n_nbrs + 1.5 * h, 0.0)
    return value


def tpsa(mol: Molecule) -> float:
    """Topological polar surface area from N and O fragment contributions."""
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        if atom.element not in ("N", "O"):
            continue
        counts = dict.fromkeys(BondOrder, 0)
        for b in mol.atom_bonds(i):
            counts[b.order] += 1
        in3 = mol.in_ring_of_size(i, 3)
        args = (mol.degree(i), atom.h_count, atom.charge, counts[BondOrder.SINGLE],
                counts[BondOrder.DOUBLE])
        if atom.element == "N":
            total += _nitrogen_psa(*args, counts[BondOrder.TRIPLE], counts[BondOrder.AROMATIC], in3)
        else:
            total += _oxygen_psa(*args, counts[BondOrder.AROMATIC], in3)
    return total


def _count_matches(smarts: str, g: MatchGraph) -> int:
    return len(compile_smarts(smarts).find_matches(g))


def _fraction_csp3(mol: Molecule) -> float:
    carbons = [i for i, a in enumerate(mol.atoms) if a.element == "C"]
    if not carbons:
        return 0.0
    sp3 = 0
    for i in carbons:
        atom = mol.atoms[i]
        saturated = all(b.order is BondOrder.SINGLE for b in mol.atom_bonds(i))
        lone_pairs = max(-atom.charge, 0)
        if saturated and mol.degree(i) + atom.h_count + lone_pairs == 4:
            sp3 += 1
    return sp3 / len(carbons)


def _aromatic_ring_count(mol: Molecule) -> int:
    count = 0
    for ring in mol.rings:
        bonds = [mol.bond_between(a, ring[(k + 1) % len(ring)]) for k, a in enumerate(ring)]
        if all(b is not None and b.order is BondOrder.AROMATIC for b in bonds):
            count += 1
    return count


def compute_descriptors(mol: Molecule | str) -> DescriptorVector:
    """Compute all ten descriptors for a molecule or a SMILES string.

    Examples
    --------
    >>> d = compute_descriptors("c1ccccc1O")
    >>> round(d.tpsa, 2), d.num_h_donors, d.num_aromatic_rings
    (20.23, 1, 1)
    """
    if isinstance(mol, str):
        mol = parse_smiles(mol)
    g = MatchGraph(mol)
    return DescriptorVector(
        mw=molecular_weight(mol),
        logp=crippen_logp(mol),
        tpsa=tpsa(mol),
        num_h_acceptors=_count_matches(_ACCEPTOR, g),
        num_h_donors=_count_matches(_DONOR, g),
        num_rotatable_bonds=_count_matches(_ROTATABLE, g),
        heavy_atom_count=sum(1 for a in mol.atoms if a.is_heavy),
        num_aromatic_rings=_aromatic_ring_count(mol),
        fraction_csp3=_fraction_csp3(mol),
        ring_count=len(mol.rings),
    )
