"""Immutable molecular graph produced by :func:`solcot.chem.parse_smiles`."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)

    @property
    def symbol(self) -> str:
        return {1: "-", 2: "=", 3: "#", 4: ":"}[self.value]


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    h_count: int = 0  # explicit + implicit hydrogens
    aromatic: bool = False
    in_ring: bool = False
    isotope: int | None = None

    @property
    def is_heavy(self) -> bool:
        return self.element != "H"


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder
    in_ring: bool = False

    def other(self, idx: int) -> int:
        return self.end if idx == self.begin else self.begin


@dataclass(frozen=True)
class Molecule:
    """Heavy-atom graph with hydrogens folded into ``Atom.h_count``.

    Hydrogens written as explicit atoms (``[H]``) are absorbed into their
    neighbour during parsing, so every atom here is a heavy atom unless
    the molecule is H2 itself.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    rings: tuple[tuple[int, ...], ...]
    source_smiles: str = ""
    kekule_orders: tuple[int, ...] = ()  # 1/2/3 per bond, aromatic bonds resolved
    _adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for b_idx, bond in enumerate(self.bonds):
            adj[bond.begin].append((bond.end, b_idx))
            adj[bond.end].append((bond.begin, b_idx))
        object.__setattr__(self, "_adjacency", tuple(tuple(a) for a in adj))

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, idx: int) -> list[int]:
        return [n for n, _ in self._adjacency[idx]]

    def atom_bonds(self, idx: int) -> list[Bond]:
        return [self.bonds[b] for _, b in self._adjacency[idx]]

    def neighbor_bonds(self, idx: int) -> tuple[tuple[int, int], ...]:
        """``(neighbor atom index, bond index)`` pairs for atom ``idx``."""
        return self._adjacency[idx]

    def bond_between(self, i: int, j: int) -> Bond | None:
        for n, b in self._adjacency[i]:
            if n == j:
                return self.bonds[b]
        return None

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def valence(self, idx: int) -> int:
        """Total valence (bond orders of the Kekulé form plus hydrogens)."""
        if self.kekule_orders:
            bonded = sum(self.kekule_orders[b] for _, b in self._adjacency[idx])
        else:
            bonded = round(sum(self.bonds[b].order.valence for _, b in self._adjacency[idx]))
        return bonded + self.atoms[idx].h_count

    def ring_bond_sets(self) -> list[frozenset[tuple[int, int]]]:
        out = []
        for ring in self.rings:
            edges = set()
            for k, a in enumerate(ring):
                b = ring[(k + 1) % len(ring)]
                edges.add((min(a, b), max(a, b)))
            out.append(frozenset(edges))
        return out

    def in_ring_of_size(self, idx: int, size: int) -> bool:
        return any(len(r) == size and idx in r for r in self.rings)
