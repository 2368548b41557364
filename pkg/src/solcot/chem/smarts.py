"""A small SMARTS matcher, sufficient for the descriptor atom-typing tables.

Supported: bracket and organic-subset atoms, ``*``, ``a``, ``A``, ``#n``,
``H``/``D``/``X``/``v``/``R``/``r`` counts, charges, recursive ``$(...)``,
the logical operators ``!``, ``&``, ``,`` and ``;`` with their usual
precedence, bond primitives ``- = # : ~ @`` and branches/ring closures.
Components (``.``), chirality and atom maps are rejected.

Patterns run against a :class:`MatchGraph`, a flat view of a
:class:`~solcot.chem.Molecule` that can optionally carry hydrogens as
explicit atoms (needed for per-hydrogen contributions).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from .elements import ELEMENTS
from .molecule import BondOrder, Molecule

__all__ = ["MatchGraph", "SmartsPattern", "SmartsParseError", "compile_smarts"]


class SmartsParseError(ValueError):
    """Raised for SMARTS the matcher does not understand."""


class MatchGraph:
    """Per-atom properties precomputed for pattern matching.

    Parameters
    ----------
    mol
        Parsed molecule.
    explicit_hydrogens
        Append one ``H`` atom per implicit hydrogen, bonded to its parent.
        Heavy atoms then report their hydrogens both via ``H`` (total)
        and via explicit degree ``D``.
    """

    def __init__(self, mol: Molecule, explicit_hydrogens: bool = False) -> None:
        self.molecule = mol
        n_heavy = len(mol.atoms)
        self.symbol: list[str] = [a.element for a in mol.atoms]
        self.aromatic: list[bool] = [a.aromatic for a in mol.atoms]
        self.charge: list[int] = [a.charge for a in mol.atoms]
        self.total_h: list[int] = [a.h_count for a in mol.atoms]
        self.total_degree: list[int] = [mol.degree(i) + a.h_count for i, a in enumerate(mol.atoms)]
        self.valence: list[int] = [mol.valence(i) for i in range(n_heavy)]
        self.in_ring: list[bool] = [a.in_ring for a in mol.atoms]
        self.ring_sizes: list[tuple[int, ...]] = [
            tuple(sorted(len(r) for r in mol.rings if i in r)) for i in range(n_heavy)
        ]
        # adjacency: list of (neighbour, BondOrder, in_ring)
        self.adj: list[list[tuple[int, BondOrder, bool]]] = [[] for _ in range(n_heavy)]
        for b in mol.bonds:
            self.adj[b.begin].append((b.end, b.order, b.in_ring))
            self.adj[b.end].append((b.begin, b.order, b.in_ring))
        if explicit_hydrogens:
            for parent in range(n_heavy):
                for _ in range(mol.atoms[parent].h_count):
                    h = len(self.symbol)
                    self.symbol.append("H")
                    self.aromatic.append(False)
                    self.charge.append(0)
                    self.total_h.append(0)
                    self.total_degree.append(1)
                    self.valence.append(1)
                    self.in_ring.append(False)
                    self.ring_sizes.append(())
                    self.adj.append([(parent, BondOrder.SINGLE, False)])
                    self.adj[parent].append((h, BondOrder.SINGLE, False))
        self.number: list[int] = [ELEMENTS[s].number for s in self.symbol]
        self._recursive_cache: dict[tuple[int, int], bool] = {}

    def __len__(self) -> int:
        return len(self.symbol)

    def degree(self, i: int) -> int:
        return len(self.adj[i])


AtomTest = Callable[[MatchGraph, int], bool]
BondTest = Callable[[BondOrder, bool], bool]


@dataclass
class SmartsPattern:
    """Compiled pattern; atom 0 is the root used by :meth:`matches_atom`."""

    text: str
    atom_tests: list[AtomTest] = field(default_factory=list)
    # bonds[k] lists (earlier atom, test) constraints attached to atom k
    bonds: list[list[tuple[int, BondTest]]] = field(default_factory=list)

    def _search(self, g: MatchGraph, root: int | None) -> list[tuple[int, ...]]:
        n = len(self.atom_tests)
        found: list[tuple[int, ...]] = []
        mapping: list[int] = []
        used: set[int] = set()

        def extend(k: int) -> bool:
            if k == n:
                found.append(tuple(mapping))
                return root is not None  # a single hit suffices for root queries
            constraints = self.bonds[k]
            if constraints:
                anchor, _ = constraints[0]
                pool = [nb for nb, _, _ in g.adj[mapping[anchor]]]
            else:
                pool = list(range(len(g)))
            for cand in pool:
                if cand in used or not self.atom_tests[k](g, cand):
                    continue
                if not all(_bond_ok(g, mapping[p], cand, test) for p, test in constraints):
                    continue
                mapping.append(cand)
                used.add(cand)
                if extend(k + 1):
                    return True
                mapping.pop()
                used.discard(cand)
            return False

        if root is not None:
            if self.atom_tests[0](g, root):
                mapping.append(root)
                used.add(root)
                extend(1)
            return found
        extend(0)
        return found

    def matches_atom(self, g: MatchGraph, atom: int) -> bool:
        """True when some embedding maps the pattern's first atom onto ``atom``."""
        return bool(self._search(g, atom))

    def find_matches(self, g: MatchGraph, unique: bool = True) -> list[tuple[int, ...]]:
        """All embeddings; with ``unique`` those covering the same atom set collapse."""
        hits = self._search(g, None)
        if not unique:
            return hits
        seen: set[frozenset[int]] = set()
        out = []
        for h in hits:
            key = frozenset(h)
            if key not in seen:
                seen.add(key)
                out.append(h)
        return out


def _bond_ok(g: MatchGraph, a: int, b: int, test: BondTest) -> bool:
    for nb, order, ring in g.adj[a]:
        if nb == b:
            return test(order, ring)
    return False


# ---------------------------------------------------------------- parsing

_TWO_LETTER = sorted((s for s in ELEMENTS if len(s) == 2), reverse=True)
_AROMATIC_LOWER = ("se", "as", "te", "b", "c", "n", "o", "p", "s")
_ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")


def _element_test(symbol: str, aromatic: bool | None) -> AtomTest:
    if aromatic is None:
        return lambda g, i: g.symbol[i] == symbol
    return lambda g, i: g.symbol[i] == symbol and g.aromatic[i] == aromatic


class _Reader:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def peek(self, k: int = 0) -> str:
        j = self.pos + k
        return self.text[j] if j < len(self.text) else ""

    def startswith(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def number(self) -> int | None:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        return int(self.text[start:self.pos]) if self.pos > start else None

    def fail(self, msg: str) -> SmartsParseError:
        return SmartsParseError(f"{msg} at position {self.pos} in {self.text!r}")


def _parse_atom_primitive(r: _Reader) -> AtomTest:
    c = r.peek()
    if r.startswith("$("):
        r.pos += 2
        depth, start = 1, r.pos
        while depth:
            ch = r.peek()
            if not ch:
                raise r.fail("unterminated recursive SMARTS")
            depth += {"(": 1, ")": -1}.get(ch, 0)
            r.pos += 1
        inner = compile_smarts(r.text[start:r.pos - 1])
        key = id(inner)

        def recursive(g: MatchGraph, i: int) -> bool:
            cached = g._recursive_cache.get((key, i))
            if cached is None:
                cached = inner.matches_atom(g, i)
                g._recursive_cache[(key, i)] = cached
            return cached

        return recursive
    if c == "#":
        r.pos += 1
        num = r.number()
        if num is None:
            raise r.fail("atomic number expected")
        return lambda g, i: g.number[i] == num
    if c == "*":
        r.pos += 1
        return lambda g, i: True
    if c in "+-":
        sign = 1 if c == "+" else -1
        r.pos += 1
        num = r.number()
        if num is None:
            num = 1
            while r.peek() == c:
                num += 1
                r.pos += 1
        value = sign * num
        return lambda g, i: g.charge[i] == value
    for sym in _TWO_LETTER:
        if r.startswith(sym):
            r.pos += len(sym)
            return _element_test(sym, False)
    for sym in _AROMATIC_LOWER:
        if r.startswith(sym):
            r.pos += len(sym)
            return _element_test(sym.capitalize(), True)
    if c == "a":
        r.pos += 1
        return lambda g, i: g.aromatic[i]
    if c == "A":
        r.pos += 1
        return lambda g, i: not g.aromatic[i]
    if c in "HDXvRr":
        r.pos += 1
        num = r.number()
        if c == "H":
            want = 1 if num is None else num
            return lambda g, i: g.total_h[i] == want
        if c == "D":
            want = 1 if num is None else num
            return lambda g, i: g.degree(i) == want
        if c == "X":
            want = 1 if num is None else num
            return lambda g, i: g.total_degree[i] == want
        if c == "v":
            want = 1 if num is None else num
            return lambda g, i: g.valence[i] == want
        if c == "R":
            if num is None:
                return lambda g, i: g.in_ring[i]
            want = num
            return lambda g, i: len(g.ring_sizes[i]) == want
        if num is None:
            return lambda g, i: g.in_ring[i]
        want = num
        return lambda g, i: bool(g.ring_sizes[i]) and g.ring_sizes[i][0] == want
    if c.isupper() and c in ELEMENTS:
        r.pos += 1
        return _element_test(c, False)
    raise r.fail(f"unsupported atom primitive {c!r}")


def _combine_and(parts: list[Callable]) -> Callable:
    if len(parts) == 1:
        return parts[0]
    return lambda *args: all(p(*args) for p in parts)


def _combine_or(parts: list[Callable]) -> Callable:
    if len(parts) == 1:
        return parts[0]
    return lambda *args: any(p(*args) for p in parts)


def _parse_expression(
    r: _Reader, primitive: Callable[[_Reader], Callable], more: Callable[[str], bool]
) -> Callable:
    """Parse ``!``/``&``/``,``/``;`` expressions while ``more(next_char)`` holds."""

    def unary() -> Callable:
        if r.peek() == "!":
            r.pos += 1
            inner = unary()
            return lambda *args: not inner(*args)
        return primitive(r)

    def high() -> Callable:
        parts = [unary()]
        while r.peek() and r.peek() not in ",;" and more(r.peek()):
            if r.peek() == "&":
                r.pos += 1
            parts.append(unary())
        return _combine_and(parts)

    def mid() -> Callable:
        parts = [high()]
        while r.peek() == ",":
            r.pos += 1
            parts.append(high())
        return _combine_or(parts)

    parts = [mid()]
    while r.peek() == ";":
        r.pos += 1
        parts.append(mid())
    return _combine_and(parts)


_BOND_CHARS = "-=#:~@!&,;"


def _parse_bond_primitive(r: _Reader) -> BondTest:
    c = r.peek()
    r.pos += 1
    if c == "-":
        return lambda o, ring: o is BondOrder.SINGLE
    if c == "=":
        return lambda o, ring: o is BondOrder.DOUBLE
    if c == "#":
        return lambda o, ring: o is BondOrder.TRIPLE
    if c == ":":
        return lambda o, ring: o is BondOrder.AROMATIC
    if c == "~":
        return lambda o, ring: True
    if c == "@":
        return lambda o, ring: ring
    r.pos -= 1
    raise r.fail(f"unsupported bond primitive {c!r}")


def _default_bond(order: BondOrder, ring: bool) -> bool:
    return order in (BondOrder.SINGLE, BondOrder.AROMATIC)


@lru_cache(maxsize=None)
def compile_smarts(text: str) -> SmartsPattern:
    """Compile ``text`` into a reusable :class:`SmartsPattern` (cached)."""
    r = _Reader(text)
    pat = SmartsPattern(text=text)
    stack: list[int] = []
    prev: int | None = None
    pending_bond: BondTest | None = None
    open_rings: dict[int, tuple[int, BondTest | None]] = {}

    while r.peek():
        c = r.peek()
        if c == "(":
            if prev is None:
                raise r.fail("branch before first atom")
            stack.append(prev)
            r.pos += 1
            continue
        if c == ")":
            if not stack:
                raise r.fail("unbalanced ')'")
            prev = stack.pop()
            r.pos += 1
            continue
        if c in _BOND_CHARS:
            pending_bond = _parse_expression(r, _parse_bond_primitive, lambda ch: ch in _BOND_CHARS)
            continue
        if c.isdigit() or c == "%":
            if prev is None:
                raise r.fail("ring closure before first atom")
            if c == "%":
                r.pos += 1
                digits = r.text[r.pos:r.pos + 2]
                if len(digits) != 2 or not digits.isdigit():
                    raise r.fail("two digits expected after '%'")
                label = int(digits)
                r.pos += 2
            else:
                label = int(c)
                r.pos += 1
            if label in open_rings:
                other, bond = open_rings.pop(label)
                test = pending_bond or bond or _default_bond
                pat.bonds[prev].append((other, test))
            else:
                open_rings[label] = (prev, pending_bond)
            pending_bond = None
            continue
        if c == ".":
            raise r.fail("disconnected SMARTS are not supported")
        # atom
        if c == "[":
            r.pos += 1
            test = _parse_expression(r, _parse_atom_primitive, lambda ch: ch != "]")
            if r.peek() != "]":
                raise r.fail("expected ']'")
            r.pos += 1
        else:
            test = _parse_organic(r)
        idx = len(pat.atom_tests)
        pat.atom_tests.append(test)
        pat.bonds.append([])
        if prev is not None:
            pat.bonds[idx].append((prev, pending_bond or _default_bond))
        pending_bond = None
        prev = idx

    if stack:
        raise r.fail("unbalanced '('")
    if open_rings:
        raise r.fail("unclosed ring bond")
    if not pat.atom_tests:
        raise r.fail("empty pattern")
    return pat


def _parse_organic(r: _Reader) -> AtomTest:
    c = r.peek()
    if c == "*":
        r.pos += 1
        return lambda g, i: True
    if c == "a":
        r.pos += 1
        return lambda g, i: g.aromatic[i]
    if c == "A":
        r.pos += 1
        return lambda g, i: not g.aromatic[i]
    for sym in _ORGANIC:
        if r.startswith(sym):
            r.pos += len(sym)
            return _element_test(sym, False)
    for sym in ("b", "c", "n", "o", "p", "s"):
        if c == sym:
            r.pos += 1
            return _element_test(sym.upper(), True)
    raise r.fail(f"unexpected character {c!r}")
