"""Chordal extension and clique tree of the grid graph.

The maximal cliques of a chordal extension index the blocks of the lifted
voltage-product matrix that must be positive semidefinite; principal-minor
index sets enumerated per clique drive the determinant cuts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .netmodel import Network

SUPPORTED_LEVELS = (2, 3)


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class CliqueTree:
    cliques: tuple[tuple[int, ...], ...]  # sorted bus ids per maximal clique
    tree_edges: tuple[tuple[int, int], ...]  # pairs of clique indices
    fill_edges: tuple[tuple[int, int], ...]  # bus pairs added by the extension

    def pairs(self) -> list[tuple[int, int]]:
        """All within-clique bus pairs, globally deduplicated and sorted."""
        seen = set()
        for c in self.cliques:
            seen.update(itertools.combinations(c, 2))
        return sorted(seen)

    def max_clique_size(self) -> int:
        return max(len(c) for c in self.cliques)

    def to_dot(self) -> str:
        lines = ["graph cliquetree {"]
        for i, c in enumerate(self.cliques):
            label = "{" + ",".join(map(str, c)) + "}"
            lines.append(f'  c{i} [label="{label}"];')
        for i, j in self.tree_edges:
            common = set(self.cliques[i]) & set(self.cliques[j])
            lines.append(f'  c{i} -- c{j} [label="{len(common)}"];')
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class MinorSet:
    clique_index: int
    nodes: tuple[int, ...]  # sorted bus ids, 2 <= len <= level


def _adjacency(net: Network) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {b.id: set() for b in net.buses}
    for br in net.branches:
        if br.from_bus != br.to_bus:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
    return adj


def clique_tree(net: Network, order: list[int] | None = None) -> CliqueTree:
    """Chordal extension by minimum-degree elimination plus clique tree.

    ``order`` overrides the elimination ordering (must be a permutation of
    the bus ids); by default vertices are eliminated by minimum current
    degree with ties broken on the smaller bus id.
    """
    adj = _adjacency(net)
    comps = _connected_components(adj)
    if len(comps) > 1:
        raise DecompositionError(
            f"grid graph is disconnected: components {[sorted(c) for c in comps]}"
        )
    if order is not None and sorted(order) != sorted(adj):
        raise DecompositionError("elimination order must be a permutation of the bus ids")

    work = {u: set(vs) for u, vs in adj.items()}
    fill: set[tuple[int, int]] = set()
    candidates: list[tuple[int, ...]] = []
    position = 0
    remaining = set(work)
    while remaining:
        if order is not None:
            v = order[position]
            position += 1
        else:
            v = min(remaining, key=lambda u: (len(work[u]), u))
        neigh = sorted(work[v])
        for a, b in itertools.combinations(neigh, 2):
            if b not in work[a]:
                fill.add((min(a, b), max(a, b)))
                work[a].add(b)
                work[b].add(a)
        candidates.append(tuple(sorted([v] + neigh)))
        for u in neigh:
            work[u].discard(v)
        del work[v]
        remaining.discard(v)

    cliques = _maximal(candidates)
    edges = _max_weight_spanning_tree(cliques)
    ct = CliqueTree(cliques=tuple(cliques), tree_edges=tuple(edges), fill_edges=tuple(sorted(fill)))
    _check_running_intersection(ct)
    _check_edge_coverage(ct, net)
    return ct


def _connected_components(adj: dict[int, set[int]]) -> list[set[int]]:
    seen: set[int] = set()
    comps = []
    for start in adj:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        comps.append(comp)
    return comps


def _maximal(candidates: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    sets = [frozenset(c) for c in candidates]
    keep = []
    for i, c in enumerate(sets):
        if any(c < other or (c == other and j < i) for j, other in enumerate(sets) if j != i):
            continue
        keep.append(tuple(sorted(c)))
    # dedup while preserving deterministic order
    out = []
    seen = set()
    for c in keep:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return sorted(out)


def _max_weight_spanning_tree(cliques: list[tuple[int, ...]]) -> list[tuple[int, int]]:
    n = len(cliques)
    if n <= 1:
        return []
    sets = [set(c) for c in cliques]
    in_tree = {0}
    edges = []
    while len(in_tree) < n:
        best = None
        for i in sorted(in_tree):
            for j in range(n):
                if j in in_tree:
                    continue
                w = len(sets[i] & sets[j])
                cand = (w, -min(i, j), -max(i, j), i, j)
                if best is None or cand > best:
                    best = cand
        _, _, _, i, j = best
        edges.append((min(i, j), max(i, j)))
        in_tree.add(j)
    return edges


def _check_running_intersection(ct: CliqueTree) -> None:
    tree: dict[int, set[int]] = {i: set() for i in range(len(ct.cliques))}
    for i, j in ct.tree_edges:
        tree[i].add(j)
        tree[j].add(i)
    buses = {b for c in ct.cliques for b in c}
    for bus in buses:
        holding = [i for i, c in enumerate(ct.cliques) if bus in c]
        if len(holding) <= 1:
            continue
        # the cliques containing `bus` must induce a connected subtree
        allowed = set(holding)
        seen = {holding[0]}
        stack = [holding[0]]
        while stack:
            u = stack.pop()
            for v in tree[u]:
                if v in allowed and v not in seen:
                    seen.add(v)
                    stack.append(v)
        if seen != allowed:
            raise DecompositionError(f"running-intersection property violated at bus {bus}")


def _check_edge_coverage(ct: CliqueTree, net: Network) -> None:
    pairs = set(ct.pairs())
    for br in net.branches:
        e = (min(br.from_bus, br.to_bus), max(br.from_bus, br.to_bus))
        if e not in pairs:
            raise DecompositionError(f"grid edge {e} not covered by any clique")


def enumerate_minors(ct: CliqueTree, level: int) -> list[MinorSet]:
    """All principal-minor index sets of size 2..level within each clique.

    A node subset shared by several cliques is reported once, attributed to
    the lowest-index clique containing it.
    """
    if level not in SUPPORTED_LEVELS:
        raise DecompositionError(f"unsupported determinant level {level}; supported: {SUPPORTED_LEVELS}")
    found: dict[tuple[int, ...], int] = {}
    for ci, clique in enumerate(ct.cliques):
        for size in range(2, min(level, len(clique)) + 1):
            for nodes in itertools.combinations(clique, size):
                if nodes not in found:
                    found[nodes] = ci
    minors = [MinorSet(clique_index=ci, nodes=nodes) for nodes, ci in found.items()]
    minors.sort(key=lambda m: (len(m.nodes), m.nodes))
    return minors
