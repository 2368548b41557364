"""Circular (Morgan-style) fingerprints and Tanimoto similarity.

Each atom starts from an invariant built from its element, heavy degree,
formal charge, hydrogen count, ring flag and aromatic flag. Every
iteration rehashes an atom's identifier together with the sorted
(bond order, neighbour identifier) pairs around it, so the identifier at
iteration ``r`` summarises the atom's radius-``r`` neighbourhood. All
identifiers from iterations ``0..radius`` are folded onto ``n_bits``.

Hashing uses BLAKE2b over a fixed little-endian encoding, which makes
bit positions identical across runs, platforms and Python versions
(unlike the salted built-in ``hash``).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .elements import ELEMENTS
from .molecule import Molecule

__all__ = ["Fingerprint", "WidthMismatch", "morgan_fingerprint", "tanimoto"]


class WidthMismatch(ValueError):
    """Raised when comparing fingerprints of different widths."""


@dataclass(frozen=True)
class Fingerprint:
    bits: frozenset[int]
    n_bits: int = 2048
    radius: int = 2

    @property
    def popcount(self) -> int:
        return len(self.bits)

    def to_array(self) -> np.ndarray:
        arr = np.zeros(self.n_bits, dtype=np.uint8)
        if self.bits:
            arr[sorted(self.bits)] = 1
        return arr


def _hash(values: list[int]) -> int:
    payload = struct.pack(f"<{len(values)}q", *values)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little", signed=True)


def _atom_invariant(mol: Molecule, idx: int) -> int:
    atom = mol.atoms[idx]
    return _hash([
        ELEMENTS[atom.element].number,
        mol.degree(idx),
        atom.charge,
        atom.h_count,
        int(atom.in_ring),
        int(atom.aromatic),
    ])


def morgan_fingerprint(mol: Molecule, radius: int = 2, n_bits: int = 2048) -> Fingerprint:
    """Fold circular atom environments up to ``radius`` into ``n_bits`` bits.

    Parameters
    ----------
    mol
        Parsed molecule.
    radius
        Number of neighbourhood-expansion iterations (0 keeps atom identities only).
    n_bits
        Fingerprint width; must be a power of two and at least 64.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if n_bits < 64 or n_bits & (n_bits - 1):
        raise ValueError(f"n_bits must be a power of two >= 64, got {n_bits}")
    ids = [_atom_invariant(mol, i) for i in range(len(mol.atoms))]
    on = {i % n_bits for i in ids}
    for iteration in range(1, radius + 1):
        updated = []
        for i in range(len(mol.atoms)):
            env = sorted((int(mol.bonds[b].order), ids[n]) for n, b in mol.neighbor_bonds(i))
            flat = [iteration, ids[i]]
            for order, nid in env:
                flat.extend((order, nid))
            updated.append(_hash(flat))
        ids = updated
        on.update(i % n_bits for i in ids)
    return Fingerprint(bits=frozenset(on), n_bits=n_bits, radius=radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a ∧ b| / |a ∨ b|, with two empty fingerprints counted as identical."""
    if a.n_bits != b.n_bits:
        raise WidthMismatch(f"cannot compare {a.n_bits}-bit and {b.n_bits}-bit fingerprints")
    union = len(a.bits | b.bits)
    if union == 0:
        return 1.0
    return len(a.bits & b.bits) / union
