"""Kekulization of aromatic input and Hückel aromaticity perception.

Perception counts the pi electrons each ring atom can donate (0, 1 or 2)
from its Kekulé form, then applies the 4n+2 rule to every candidate ring
and to fused combinations of candidate rings, so that systems such as
azulene are recognised even though neither ring qualifies alone.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from itertools import combinations

from .elements import AROMATIC_CAPABLE, ELEMENTS, allowed_valences, more_electronegative

_MAX_EXHAUSTIVE_RINGS = 12


def _needs_pi_bond(element: str, charge: int, h: int, bracket: bool, used: int) -> bool:
    allowed = allowed_valences(element, charge)
    fits = [v for v in allowed if v >= used]
    if not fits:
        return False
    return fits[0] - used >= 1


def kekulize(
    atoms: Sequence[tuple[str, int, int, bool, bool]],
    edges: Sequence[tuple[int, int]],
    orders: Sequence[int],
) -> list[int] | None:
    """Replace aromatic bond orders (4) with an alternating 1/2 pattern.

    ``atoms`` holds ``(element, charge, hydrogens, aromatic, bracket)``.
    For unbracketed atoms ``hydrogens`` counts only explicit ``[H]``
    neighbours. Returns ``None`` when no consistent assignment exists.
    """
    n = len(atoms)
    used = [atoms[k][2] for k in range(n)]
    arom_bonds: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for b, ((i, j), order) in enumerate(zip(edges, orders)):
        if order == 4:
            used[i] += 1
            used[j] += 1
            arom_bonds[i].append((j, b))
            arom_bonds[j].append((i, b))
        else:
            used[i] += order
            used[j] += order

    need = {
        k for k, (el, chg, h, arom, bracket) in enumerate(atoms)
        if arom and arom_bonds[k] and _needs_pi_bond(el, chg, h, bracket, used[k])
    }
    result = [1 if o == 4 else o for o in orders]
    matched: dict[int, int] = {}

    def options(k: int) -> list[tuple[int, int]]:
        return [(j, b) for j, b in arom_bonds[k] if j in need and j not in matched]

    def solve() -> bool:
        free = [k for k in need if k not in matched]
        if not free:
            return True
        k = min(free, key=lambda a: (len(options(a)), a))
        for j, b in options(k):
            matched[k], matched[j] = b, b
            if solve():
                return True
            del matched[k], matched[j]
        return False

    if not solve():
        return None
    for b in set(matched.values()):
        result[b] = 2
    return result


def _electron_donation(
    k: int,
    atoms: Sequence[tuple[str, int, int]],
    nbrs: list[list[tuple[int, int]]],
    orders: Sequence[int],
    ring_bonds: set[int],
) -> int | None:
    """Pi electrons atom ``k`` can offer a ring, or ``None`` if it cannot take part."""
    element, charge, h = atoms[k]
    info = ELEMENTS[element]
    if not info.valences or element not in AROMATIC_CAPABLE:
        return None
    default_valence = info.valences[0]
    degree = len(nbrs[k])
    total_degree = degree + h
    if default_valence <= 1 or total_degree > 3:
        return None
    bond_orders = [orders[b] for _, b in nbrs[k]]
    explicit_valence = sum(bond_orders)
    multiple = [o for o in bond_orders if o >= 2]
    if explicit_valence - degree > 1 and len(multiple) > 1:
        return None

    lone_pair_electrons = max(info.outer_electrons - default_valence - charge, 0)
    nelec = (default_valence - total_degree) + lone_pair_electrons
    if nelec > 1 and explicit_valence - degree > 1:
        nelec = 1

    exo_partner = None
    for j, b in nbrs[k]:
        if orders[b] >= 2 and b not in ring_bonds:
            exo_partner = j
            break
    has_multiple = bool(multiple)
    has_ring_multiple = any(orders[b] >= 2 and b in ring_bonds for _, b in nbrs[k])

    if nelec < 0:
        return None
    if nelec == 0:
        if exo_partner is not None:
            return 0
        if has_ring_multiple:
            return 1
        return None
    if nelec == 1:
        if exo_partner is not None:
            return 0 if more_electronegative(atoms[exo_partner][0], element) else 1
        if has_multiple:
            return 1
        if charge == 1:
            return 0
        return None
    if exo_partner is not None and more_electronegative(atoms[exo_partner][0], element):
        nelec -= 1
    return 1 if nelec % 2 == 1 else 2


def perceive_aromaticity(
    atoms: Sequence[tuple[str, int, int]],
    edges: Sequence[tuple[int, int]],
    orders: Sequence[int],
    rings: Sequence[tuple[int, ...]],
) -> tuple[set[int], set[int]]:
    """Return ``(aromatic atom indices, aromatic bond indices)``.

    ``atoms`` holds ``(element, charge, total hydrogens)``; ``orders`` is
    a Kekulé assignment (1, 2 or 3 for every bond).
    """
    n = len(atoms)
    nbrs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    bond_index: dict[tuple[int, int], int] = {}
    for b, (i, j) in enumerate(edges):
        nbrs[i].append((j, b))
        nbrs[j].append((i, b))
        bond_index[(min(i, j), max(i, j))] = b

    ring_bond_lists: list[list[int]] = []
    for ring in rings:
        ring_bond_lists.append([
            bond_index[(min(a, ring[(k + 1) % len(ring)]), max(a, ring[(k + 1) % len(ring)]))]
            for k, a in enumerate(ring)
        ])
    ring_bonds = {b for bl in ring_bond_lists for b in bl}

    electrons = [_electron_donation(k, atoms, nbrs, orders, ring_bonds) for k in range(n)]
    candidates = [r for r, ring in enumerate(rings) if all(electrons[a] is not None for a in ring)]

    # group candidate rings into fused systems (rings sharing a bond)
    bond_sets = {r: set(ring_bond_lists[r]) for r in candidates}
    systems: list[list[int]] = []
    unassigned = list(candidates)
    while unassigned:
        system = [unassigned.pop(0)]
        grew = True
        while grew:
            grew = False
            for r in list(unassigned):
                if any(bond_sets[r] & bond_sets[s] for s in system):
                    system.append(r)
                    unassigned.remove(r)
                    grew = True
        systems.append(sorted(system))

    arom_atoms: set[int] = set()
    arom_bonds: set[int] = set()

    def huckel(ring_ids: Sequence[int]) -> bool:
        members = set()
        for r in ring_ids:
            members.update(rings[r])
        total = sum(electrons[a] for a in members)
        return total % 4 == 2

    def connected(ring_ids: Sequence[int]) -> bool:
        seen = {ring_ids[0]}
        stack = [ring_ids[0]]
        while stack:
            r = stack.pop()
            for s in ring_ids:
                if s not in seen and bond_sets[r] & bond_sets[s]:
                    seen.add(s)
                    stack.append(s)
        return len(seen) == len(ring_ids)

    for system in systems:
        system_bonds = set().union(*(bond_sets[r] for r in system))
        max_size = len(system) if len(system) <= _MAX_EXHAUSTIVE_RINGS else 2
        for size in range(1, max_size + 1):
            if system_bonds <= arom_bonds:
                break
            for combo in combinations(system, size):
                combo_bonds = set().union(*(bond_sets[r] for r in combo))
                if combo_bonds <= arom_bonds:
                    continue
                if size > 1 and not connected(combo):
                    continue
                if huckel(combo):
                    # a bond shared by two rings of the combination is interior
                    # to the delocalised perimeter and stays non-aromatic,
                    # unless some other ring or combination marks it
                    shared = Counter(b for r in combo for b in bond_sets[r])
                    arom_bonds |= {b for b, c in shared.items() if c == 1}
                    for r in combo:
                        arom_atoms.update(rings[r])
    return arom_atoms, arom_bonds
