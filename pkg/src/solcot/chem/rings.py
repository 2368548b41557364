"""Ring perception on a bare graph.

Candidate cycles come from Horton's construction (one shortest-path tree
per root vertex); a GF(2) elimination over edge bit-sets picks a
smallest set of smallest rings. Rings that are equally short alternatives
to an SSSR member (the three bridges of bicyclo[2.2.2]octane, say) are
added back so the ring set does not depend on atom ordering.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence


def _canonical(cycle: Sequence[int]) -> tuple[int, ...]:
    k = min(range(len(cycle)), key=cycle.__getitem__)
    rotated = list(cycle[k:]) + list(cycle[:k])
    if len(rotated) > 2 and rotated[-1] < rotated[1]:
        rotated = [rotated[0]] + rotated[:0:-1]
    return tuple(rotated)


class _XorBasis:
    def __init__(self) -> None:
        self._rows: dict[int, int] = {}

    def reduce(self, vec: int) -> int:
        while vec:
            pivot = vec.bit_length() - 1
            row = self._rows.get(pivot)
            if row is None:
                return vec
            vec ^= row
        return 0

    def add(self, vec: int) -> bool:
        vec = self.reduce(vec)
        if not vec:
            return False
        self._rows[vec.bit_length() - 1] = vec
        return True


def _components(n: int, adj: list[list[int]]) -> int:
    seen = [False] * n
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
    return count


def _candidates(n: int, adj: list[list[int]], edges: list[tuple[int, int]]) -> set[tuple[int, ...]]:
    found: set[tuple[int, ...]] = set()
    for root in range(n):
        if not adj[root]:
            continue
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent:
                    parent[v] = u
                    queue.append(v)

        def path(v: int) -> list[int]:
            out = []
            while v != -1:
                out.append(v)
                v = parent[v]
            return out  # v ... root

        for x, y in edges:
            if x not in parent or y not in parent:
                continue
            px, py = path(x), path(y)
            if set(px) & set(py) != {root}:
                continue
            cycle = px[::-1] + py[:-1]  # root ... x, y ... (root excluded)
            if len(cycle) >= 3:
                found.add(_canonical(cycle))
    return found


def find_rings(n_atoms: int, edges: Sequence[tuple[int, int]]) -> tuple[
    list[tuple[int, ...]], list[tuple[int, ...]]
]:
    """Return ``(sssr, symmetrized)`` ring lists for an undirected graph.

    Both lists are sorted by ring size, then by atom indices, so the
    result is deterministic for a given atom numbering.
    """
    edges = [(min(a, b), max(a, b)) for a, b in edges]
    adj: list[list[int]] = [[] for _ in range(n_atoms)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for nbrs in adj:
        nbrs.sort()
    n_cycles = len(edges) - n_atoms + _components(n_atoms, adj)
    if n_cycles <= 0:
        return [], []

    bit = {e: k for k, e in enumerate(sorted(edges))}

    def edge_vector(cycle: tuple[int, ...]) -> int:
        vec = 0
        for k, a in enumerate(cycle):
            b = cycle[(k + 1) % len(cycle)]
            vec |= 1 << bit[(min(a, b), max(a, b))]
        return vec

    cands = sorted(_candidates(n_atoms, adj, edges), key=lambda c: (len(c), c))
    vectors = {c: edge_vector(c) for c in cands}

    sssr: list[tuple[int, ...]] = []
    basis = _XorBasis()
    for c in cands:
        if basis.add(vectors[c]):
            sssr.append(c)
            if len(sssr) == n_cycles:
                break

    max_size = max(len(c) for c in sssr)
    symmetrized: list[tuple[int, ...]] = []
    shorter = _XorBasis()
    k = 0
    while k < len(cands) and len(cands[k]) <= max_size:
        size = len(cands[k])
        group = []
        while k < len(cands) and len(cands[k]) == size:
            group.append(cands[k])
            k += 1
        for c in group:
            if shorter.reduce(vectors[c]):
                symmetrized.append(c)
        for c in group:
            shorter.add(vectors[c])
    return sssr, symmetrized
