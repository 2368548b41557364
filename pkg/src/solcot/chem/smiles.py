"""SMILES reader.

Covers the organic subset (B, C, N, O, P, S, F, Cl, Br, I and their
aromatic forms), bracket atoms with isotope/H-count/charge, branches,
ring closures (``1``..``9`` and ``%nn``), dot-disconnected components
and the bond symbols ``- = # :``. Stereo marks are read and dropped.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

from .aromaticity import kekulize, perceive_aromaticity
from .elements import AROMATIC_SYMBOLS, ELEMENTS, ORGANIC_SUBSET, allowed_valences
from .molecule import Atom, Bond, BondOrder, Molecule
from .rings import find_rings


class SmilesError(ValueError):
    """Base class for SMILES problems; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int | None = None, smiles: str = ""):
        self.position = position
        self.smiles = smiles
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}" + (f" in {smiles!r}" if smiles else ""))


class UnclosedRing(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnknownAtomSymbol(SmilesError):
    pass


class ValenceViolation(SmilesError):
    pass


class KekulizationError(SmilesError):
    """Aromatic atoms that cannot be given a consistent Kekulé structure."""


class SmilesSyntaxError(SmilesError):
    pass


class StereochemistryIgnored(UserWarning):
    pass


_BRACKET = re.compile(
    r"\[(?P<isotope>\d+)?"
    r"(?P<symbol>[A-Z][a-z]?|se|as|te|[bcnops]|\*)"
    r"(?P<chiral>@(?:@|TH[12]|AL[12]|SP[1-3]|TB\d\d?|OH\d\d?)?)?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>[+-](?:\d+|[+-]*))?"
    r"(?::\d+)?\]"
)

_BOND_SYMBOLS = {"-": 1, "=": 2, "#": 3, ":": 4, "/": 1, "\\": 1}


@dataclass
class _WorkAtom:
    element: str
    aromatic: bool
    position: int
    bracket: bool = False
    charge: int = 0
    h_count: int = 0  # bracket H count, or absorbed explicit [H] neighbours
    isotope: int | None = None


@dataclass
class _WorkBond:
    begin: int
    end: int
    order: int | None  # None = implicit (single, or aromatic between aromatic atoms)
    position: int


@dataclass
class _Graph:
    atoms: list[_WorkAtom] = field(default_factory=list)
    bonds: list[_WorkBond] = field(default_factory=list)


def _parse_charge(text: str | None) -> int:
    if not text:
        return 0
    sign = 1 if text[0] == "+" else -1
    rest = text[1:]
    if rest.isdigit():
        return sign * int(rest)
    return sign * (1 + len(rest))


def _read_graph(smiles: str) -> _Graph:
    g = _Graph()
    prev: int | None = None
    pending_bond: tuple[int, int] | None = None  # (order, position)
    branch_stack: list[tuple[int | None, int]] = []
    open_rings: dict[int, tuple[int, int | None, int]] = {}
    seen_pairs: set[tuple[int, int]] = set()
    warned_stereo = False
    i = 0
    n = len(smiles)

    def add_bond(a: int, b: int, order: int | None, pos: int) -> None:
        if a == b:
            raise SmilesSyntaxError("atom bonded to itself", pos, smiles)
        key = (min(a, b), max(a, b))
        if key in seen_pairs:
            raise SmilesSyntaxError("duplicate bond", pos, smiles)
        seen_pairs.add(key)
        g.bonds.append(_WorkBond(a, b, order, pos))

    def add_atom(atom: _WorkAtom) -> None:
        nonlocal prev, pending_bond
        g.atoms.append(atom)
        idx = len(g.atoms) - 1
        if prev is not None:
            order, pos = pending_bond if pending_bond else (None, atom.position)
            add_bond(prev, idx, order, pos)
        elif pending_bond is not None:
            raise SmilesSyntaxError("bond symbol without a preceding atom", pending_bond[1], smiles)
        prev = idx
        pending_bond = None

    while i < n:
        ch = smiles[i]
        if ch == "[":
            m = _BRACKET.match(smiles, i)
            if m is None:
                close = smiles.find("]", i)
                if close == -1:
                    raise SmilesSyntaxError("unterminated bracket atom", i, smiles)
                raise UnknownAtomSymbol(f"unrecognised bracket atom {smiles[i:close + 1]!r}", i, smiles)
            symbol = m.group("symbol")
            if symbol == "*":
                raise UnknownAtomSymbol("wildcard atoms are not supported", i, smiles)
            aromatic = symbol.islower()
            element = AROMATIC_SYMBOLS.get(symbol, symbol) if aromatic else symbol
            if element not in ELEMENTS:
                raise UnknownAtomSymbol(f"unknown element {symbol!r}", i, smiles)
            if m.group("chiral") and not warned_stereo:
                warnings.warn(f"stereochemistry ignored in {smiles!r}", StereochemistryIgnored, stacklevel=3)
                warned_stereo = True
            hc = m.group("hcount")
            h = 0 if not hc else (int(hc[1:]) if len(hc) > 1 else 1)
            add_atom(_WorkAtom(
                element=element, aromatic=aromatic, position=i, bracket=True,
                charge=_parse_charge(m.group("charge")), h_count=h,
                isotope=int(m.group("isotope")) if m.group("isotope") else None,
            ))
            i = m.end()
        elif ch.isalpha() or ch == "*":
            two = smiles[i:i + 2]
            if two in ("Cl", "Br"):
                add_atom(_WorkAtom(two, False, i))
                i += 2
            elif ch in ORGANIC_SUBSET:
                add_atom(_WorkAtom(ch, False, i))
                i += 1
            elif ch in "bcnops":
                add_atom(_WorkAtom(AROMATIC_SYMBOLS[ch], True, i))
                i += 1
            else:
                raise UnknownAtomSymbol(f"unknown atom symbol {ch!r}", i, smiles)
        elif ch in _BOND_SYMBOLS:
            if pending_bond is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", i, smiles)
            if ch in "/\\" and not warned_stereo:
                warnings.warn(f"stereochemistry ignored in {smiles!r}", StereochemistryIgnored, stacklevel=3)
                warned_stereo = True
            pending_bond = (_BOND_SYMBOLS[ch], i)
            i += 1
        elif ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch opened before any atom", i, smiles)
            if i + 1 < n and smiles[i + 1] == ")":
                raise SmilesSyntaxError("empty branch", i, smiles)
            branch_stack.append((prev, i))
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise UnbalancedParenthesis("unmatched ')'", i, smiles)
            if pending_bond is not None:
                raise SmilesSyntaxError("dangling bond symbol", pending_bond[1], smiles)
            prev = branch_stack.pop()[0]
            i += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                digits = smiles[i + 1:i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesSyntaxError("'%' must be followed by two digits", i, smiles)
                label, width = int(digits), 3
            else:
                label, width = int(ch), 1
            if prev is None:
                raise SmilesSyntaxError("ring closure before any atom", i, smiles)
            order = pending_bond[0] if pending_bond else None
            if label in open_rings:
                other, other_order, _ = open_rings.pop(label)
                if order is not None and other_order is not None and order != other_order:
                    raise SmilesSyntaxError("conflicting ring-closure bond orders", i, smiles)
                add_bond(other, prev, order if order is not None else other_order, i)
            else:
                open_rings[label] = (prev, order, i)
            pending_bond = None
            i += width
        elif ch == ".":
            if pending_bond is not None:
                raise SmilesSyntaxError("bond symbol before '.'", pending_bond[1], smiles)
            prev = None
            i += 1
        else:
            raise SmilesSyntaxError(f"unexpected character {ch!r}", i, smiles)

    if branch_stack:
        raise UnbalancedParenthesis("unclosed '('", branch_stack[-1][1], smiles)
    if open_rings:
        label, (_, _, pos) = min(open_rings.items(), key=lambda kv: kv[1][2])
        raise UnclosedRing(f"ring bond {label} never closed", pos, smiles)
    if pending_bond is not None:
        raise SmilesSyntaxError("dangling bond symbol", pending_bond[1], smiles)
    if not g.atoms:
        raise SmilesSyntaxError("no atoms", 0, smiles)
    return g


def _absorb_hydrogens(g: _Graph) -> _Graph:
    """Fold explicit ``[H]`` atoms into the hydrogen count of their neighbour."""
    degree = [0] * len(g.atoms)
    for b in g.bonds:
        degree[b.begin] += 1
        degree[b.end] += 1
    drop = set()
    for b in g.bonds:
        for h, heavy in ((b.begin, b.end), (b.end, b.begin)):
            ha = g.atoms[h]
            if (ha.element == "H" and ha.charge == 0 and ha.h_count == 0 and degree[h] == 1
                    and g.atoms[heavy].element != "H" and (b.order in (None, 1))):
                g.atoms[heavy].h_count += 1
                drop.add(h)
    if not drop:
        return g
    remap = {}
    atoms = []
    for k, a in enumerate(g.atoms):
        if k not in drop:
            remap[k] = len(atoms)
            atoms.append(a)
    bonds = [
        _WorkBond(remap[b.begin], remap[b.end], b.order, b.position)
        for b in g.bonds if b.begin not in drop and b.end not in drop
    ]
    return _Graph(atoms, bonds)


def _charge_separate_n_oxides(g: _Graph) -> None:
    """Rewrite hypervalent N=O as N+-O-, e.g. ``N(=O)=O`` -> ``[N+](=O)[O-]``.

    Also covers aromatic N-oxides written as ``n=O``. Atoms touched here
    get their hydrogen counts frozen, as if they had been bracketed.
    """
    for k, atom in enumerate(g.atoms):
        if atom.element != "N" or atom.charge != 0:
            continue
        incident = [b for b in g.bonds if k in (b.begin, b.end)]
        used = atom.h_count + sum(1 if b.order in (None, 4) else b.order for b in incident)
        if used <= 3:
            continue
        terminal_oxo = []
        for b in incident:
            o = b.end if b.begin == k else b.begin
            o_degree = sum(1 for c in g.bonds if o in (c.begin, c.end))
            if b.order == 2 and g.atoms[o].element == "O" and o_degree == 1:
                terminal_oxo.append(b)
        if not terminal_oxo:
            continue
        bond = terminal_oxo[0]
        oxygen = g.atoms[bond.end if bond.begin == k else bond.begin]
        bond.order = 1
        atom.charge, oxygen.charge = 1, -1
        atom.bracket = oxygen.bracket = True


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a :class:`Molecule`.

    Aromatic input is kekulized and aromaticity is then perceived again
    on the whole graph, so ``C1=CC=CC=C1`` and ``c1ccccc1`` give the same
    molecule. Text after the first whitespace is treated as a title.

    Raises
    ------
    UnclosedRing, UnbalancedParenthesis, UnknownAtomSymbol, ValenceViolation
        With ``position`` set to the offending token.
    SmilesSyntaxError, KekulizationError
        For other malformed input.
    """
    if not isinstance(text, str):
        raise TypeError(f"SMILES must be str, not {type(text).__name__}")
    stripped = text.strip()
    if not stripped:
        raise SmilesSyntaxError("empty SMILES", 0, text)
    smiles = stripped.split()[0]

    g = _absorb_hydrogens(_read_graph(smiles))
    _charge_separate_n_oxides(g)

    n = len(g.atoms)
    edges = [(b.begin, b.end) for b in g.bonds]
    _, rings = find_rings(n, edges)
    ring_bonds = set()
    ring_atoms = set()
    for ring in rings:
        ring_atoms.update(ring)
        for k, a in enumerate(ring):
            b = ring[(k + 1) % len(ring)]
            ring_bonds.add((min(a, b), max(a, b)))

    for k, a in enumerate(g.atoms):
        if a.aromatic and k not in ring_atoms:
            raise KekulizationError("aromatic atom outside any ring", a.position, smiles)

    orders: list[int] = []
    for b in g.bonds:
        key = (min(b.begin, b.end), max(b.begin, b.end))
        both_aromatic = g.atoms[b.begin].aromatic and g.atoms[b.end].aromatic
        order = b.order
        if order is None:
            order = 4 if both_aromatic else 1
        if order == 4 and (key not in ring_bonds or not both_aromatic):
            order = 1
        orders.append(order)

    kekule = kekulize(
        [(a.element, a.charge, a.h_count, a.aromatic, a.bracket) for a in g.atoms],
        [(b.begin, b.end) for b in g.bonds],
        orders,
    )
    if kekule is None:
        first = next(a.position for a in g.atoms if a.aromatic)
        raise KekulizationError("cannot assign alternating bonds to aromatic system", first, smiles)

    bond_sum = [0] * n
    for b, order in zip(g.bonds, kekule):
        bond_sum[b.begin] += order
        bond_sum[b.end] += order

    h_counts = []
    for k, a in enumerate(g.atoms):
        used = bond_sum[k] + a.h_count
        allowed = allowed_valences(a.element, a.charge)
        if a.bracket:
            if allowed and used > max(allowed):
                raise ValenceViolation(
                    f"valence {used} exceeds maximum {max(allowed)} for {a.element}", a.position, smiles)
            h_counts.append(a.h_count)
            continue
        fits = [v for v in ORGANIC_SUBSET[a.element] if v >= used]
        if not fits:
            raise ValenceViolation(
                f"valence {used} exceeds maximum {max(ORGANIC_SUBSET[a.element])} for {a.element}",
                a.position, smiles)
        h_counts.append(a.h_count + fits[0] - used)

    arom_atoms, arom_bonds = perceive_aromaticity(
        [(a.element, a.charge, h) for a, h in zip(g.atoms, h_counts)],
        [(b.begin, b.end) for b in g.bonds],
        kekule,
        rings,
    )

    atoms = tuple(
        Atom(element=a.element, charge=a.charge, h_count=h_counts[k], aromatic=k in arom_atoms,
             in_ring=k in ring_atoms, isotope=a.isotope)
        for k, a in enumerate(g.atoms)
    )
    bonds = tuple(
        Bond(b.begin, b.end,
             BondOrder.AROMATIC if k in arom_bonds else BondOrder(kekule[k]),
             in_ring=(min(b.begin, b.end), max(b.begin, b.end)) in ring_bonds)
        for k, b in enumerate(g.bonds)
    )
    return Molecule(atoms=atoms, bonds=bonds, rings=tuple(rings), source_smiles=text,
                    kekule_orders=tuple(kekule))
