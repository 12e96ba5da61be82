import itertools

import pytest

from acopf_tighten import netmodel
from acopf_tighten.decomp import (
    CliqueTree,
    DecompositionError,
    MinorSet,
    clique_tree,
    enumerate_minors,
)

from conftest import TOY3_TEXT


def graph_of(net):
    adj = {b.id: set() for b in net.buses}
    for br in net.branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    return adj


def extended_graph(net, ct):
    adj = graph_of(net)
    for a, b in ct.fill_edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def is_chordal(adj):
    """Oracle: a graph is chordal iff it admits a perfect elimination
    ordering, found by repeatedly removing a simplicial vertex."""
    work = {u: set(vs) for u, vs in adj.items()}
    while work:
        simplicial = None
        for u in sorted(work):
            neigh = work[u]
            if all(b in work[a] for a, b in itertools.combinations(sorted(neigh), 2)):
                simplicial = u
                break
        if simplicial is None:
            return False
        for v in work[simplicial]:
            work[v].discard(simplicial)
        del work[simplicial]
    return True


def cliques_are_maximal(adj, ct):
    for c in ct.cliques:
        cset = set(c)
        for a, b in itertools.combinations(c, 2):
            if b not in adj[a]:
                return False
        for extra in adj:
            if extra in cset:
                continue
            if cset <= adj[extra]:
                return False  # c is not maximal
    return True


def test_case9_cycle_extension(case9):
    ct = clique_tree(case9)
    assert len(ct.fill_edges) >= 1
    assert ct.max_clique_size() == 3
    adj = extended_graph(case9, ct)
    assert is_chordal(adj)
    assert cliques_are_maximal(adj, ct)


def test_tree_network_no_fill(case9_tree):
    ct = clique_tree(case9_tree)
    assert ct.fill_edges == ()
    assert all(len(c) == 2 for c in ct.cliques)
    edges = {(min(e), max(e)) for e in case9_tree.edges()}
    assert set(ct.cliques) == edges


def test_triangle_single_clique(toy3):
    ct = clique_tree(toy3)
    assert ct.cliques == ((1, 2, 3),)
    assert ct.tree_edges == ()


def test_minors_level2_pairs():
    ct = CliqueTree(cliques=((1, 2, 3),), tree_edges=(), fill_edges=())
    minors = enumerate_minors(ct, 2)
    assert [m.nodes for m in minors] == [(1, 2), (1, 3), (2, 3)]


def test_minors_level3_adds_triple():
    ct = CliqueTree(cliques=((1, 2, 3),), tree_edges=(), fill_edges=())
    minors = enumerate_minors(ct, 3)
    assert [m.nodes for m in minors] == [(1, 2), (1, 3), (2, 3), (1, 2, 3)]


def test_minors_dedup_across_cliques():
    ct = CliqueTree(cliques=((1, 2, 3), (2, 3, 4)), tree_edges=((0, 1),), fill_edges=())
    minors = enumerate_minors(ct, 2)
    # brute-force union of pair subsets
    expect = sorted({p for c in ct.cliques for p in itertools.combinations(c, 2)})
    assert [m.nodes for m in minors] == expect
    assert len(minors) == 5


def test_level_nesting(case9):
    ct = clique_tree(case9)
    two = {m.nodes for m in enumerate_minors(ct, 2)}
    three = {m.nodes for m in enumerate_minors(ct, 3)}
    assert two <= three


def test_unsupported_level(case9):
    ct = clique_tree(case9)
    with pytest.raises(DecompositionError):
        enumerate_minors(ct, 4)
    with pytest.raises(DecompositionError):
        enumerate_minors(ct, 1)


def test_coverage_invariants(case9):
    ct = clique_tree(case9)
    assert {b for c in ct.cliques for b in c} == set(case9.bus_ids())
    pairs = set(ct.pairs())
    for e in case9.edges():
        assert (min(e), max(e)) in pairs


def test_disconnected_graph_errors():
    text = TOY3_TEXT.replace(
        "    2 3 0.03  0.08 0.02 40  0 0 0 0 1 -30 30;\n", ""
    ).replace(
        "    1 3 0.015 0.09 0.02 120 0 0 0 0 1 -30 30;\n", ""
    )
    net = netmodel.parse_case(text)
    with pytest.raises(DecompositionError) as err:
        clique_tree(net)
    assert "components" in str(err.value)


def test_custom_order_still_valid(case9):
    order = sorted(case9.bus_ids(), reverse=True)
    ct = clique_tree(case9, order=order)
    adj = extended_graph(case9, ct)
    assert is_chordal(adj)


def test_dot_export_smoke(case9):
    dot = clique_tree(case9).to_dot()
    assert dot.startswith("graph cliquetree {")
    assert dot.rstrip().endswith("}")
