"""Brute-force display oracle: enumerate reticulation switchings.

Every switching keeps exactly one incoming edge per reticulation; pruning
dead branches and suppressing the resulting degree-two vertices turns the
network into one displayed tree.  Containment holds exactly when some
switching displays a tree isomorphic to the query tree.  Cost is 2^alpha
switchings by design; the oracle refuses networks with more than
MAX_ORACLE_RETICULATIONS reticulations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graphs import (DirectedGraph, GraphError, PhyloNetwork, PhyloTree,
                     clusters, cluster_set, live_subgraph, suppress_degree_two,
                     tree_isomorphic, validate)

MAX_ORACLE_RETICULATIONS = 20


class OracleTooLarge(Exception):
    """The switching enumeration would exceed the hard reticulation cap."""


@dataclass(frozen=True)
class Switching:
    """One kept incoming edge per reticulation: reticulation -> kept parent."""

    kept_parent: dict[int, int] = field(default_factory=dict)

    def cut_edges(self, network: PhyloNetwork) -> set[tuple[int, int]]:
        cut = set()
        for h, keep in self.kept_parent.items():
            for p in network.parents(h):
                if p != keep:
                    cut.add((p, h))
        return cut


@dataclass
class DisplayWitness:
    """An explicit embedding of the tree into the network.

    ``path_of`` maps each tree vertex id to the directed path of network
    vertices it occupies; ``connecting_edge`` maps each tree edge to the
    unique network edge that joins the two paths.  ``deleted_vertices``
    complements ``kept_vertices`` in V(N).
    """

    kept_vertices: frozenset[int]
    deleted_vertices: frozenset[int]
    path_of: dict[int, tuple[int, ...]]
    connecting_edge: dict[tuple[int, int], tuple[int, int]]
    switching: Switching | None = None


def all_switchings(network: PhyloNetwork):
    """Deterministic enumeration of all 2^alpha switchings."""
    retics = network.reticulations()
    if len(retics) > MAX_ORACLE_RETICULATIONS:
        raise OracleTooLarge(
            f"{len(retics)} reticulations exceed the oracle cap of "
            f"{MAX_ORACLE_RETICULATIONS}")
    choice_lists = [sorted(network.parents(h)) for h in retics]
    for combo in itertools.product(*choice_lists):
        yield Switching(dict(zip(retics, combo)))


def _kept_graph(network: PhyloNetwork, s: Switching,
                keep_labels) -> DirectedGraph:
    cut = s.cut_edges(network)
    edges = [e for e in network.graph.edges if e not in cut]
    labels = {v: lab for v, lab in network.graph.leaf_labels.items()
              if lab in keep_labels}
    pruned = DirectedGraph(edges, labels, vertices=network.graph.vertices)
    return live_subgraph(pruned, frozenset(keep_labels))


def extract_tree(network: PhyloNetwork, s: Switching,
                 keep_labels=None) -> PhyloTree:
    """The tree displayed by one switching (restricted to ``keep_labels``)."""
    if keep_labels is None:
        keep_labels = network.labels
    kept = _kept_graph(network, s, keep_labels)
    return validate(suppress_degree_two(kept), expect="tree")


def displayed_trees(network: PhyloNetwork) -> list[PhyloTree]:
    """All distinct trees over all switchings, deduplicated by cluster sets."""
    seen = {}
    for s in all_switchings(network):
        t = extract_tree(network, s)
        seen.setdefault(cluster_set(t), t)
    return list(seen.values())


def displays(network: PhyloNetwork,
             tree: PhyloTree) -> tuple[bool, DisplayWitness | None]:
    """Decide containment; on success return a zero-defect witness.

    The returned witness always satisfies the tight embedding conditions
    (induced paths, one connecting edge per tree edge, leaving the path
    terminal); one always exists for a displayed tree.
    """
    if not tree.labels <= network.labels:
        raise GraphError(
            f"tree labels {sorted(tree.labels - network.labels)} "
            "do not occur in the network")
    first_hit = None
    for s in all_switchings(network):
        t = extract_tree(network, s, keep_labels=tree.labels)
        if tree_isomorphic(t, tree):
            first_hit = first_hit or s
            w = _build_witness(network, tree, s)
            if _is_tight(network, tree, w):
                return True, w
    if first_hit is not None:
        raise RuntimeError("displayed tree without a tight witness; "
                           "this contradicts the embedding construction")
    return False, None


def witness_embedding(network: PhyloNetwork, tree: PhyloTree,
                      s: Switching) -> DisplayWitness:
    """Embedding witness for a switching that displays the tree.

    Paths come from matching descendant-label sets between the tree and the
    kept subdivision; shortcut edges inside a path are cut out to keep the
    deleted set maximal.  If the given switching cannot meet the witness
    invariants (a cut reticulation edge re-enters between adjacent paths),
    the embedding is rebuilt from an equivalent switching that can.
    """
    t = extract_tree(network, s, keep_labels=tree.labels)
    if not tree_isomorphic(t, tree):
        raise GraphError("switching does not display the tree")
    w = _build_witness(network, tree, s)
    if _is_tight(network, tree, w):
        return w
    ok, w = displays(network, tree)
    assert ok
    return w


def _build_witness(network: PhyloNetwork, tree: PhyloTree,
                   s: Switching) -> DisplayWitness:
    kept = _kept_graph(network, s, tree.labels)
    sub = suppress_degree_two(kept)
    tree_s = validate(sub, expect="tree")

    by_cluster = {c: v for v, c in clusters(tree_s).items()}
    image = {u: by_cluster[c] for u, c in clusters(tree).items()}

    paths: dict[int, tuple[int, ...]] = {tree.root: (image[tree.root],)}
    for u, v in tree.graph.edges:
        chain = sub.edge_chains.get((image[u], image[v]), ())
        paths[v] = chain + (image[v],)

    for u, path in paths.items():
        paths[u] = _cut_shortcuts(network, path)

    kept_ids = frozenset(v for path in paths.values() for v in path)
    connecting = {}
    for u, v in sorted(tree.graph.edges):
        connecting[(u, v)] = (paths[u][-1], paths[v][0])
    return DisplayWitness(
        kept_vertices=kept_ids,
        deleted_vertices=frozenset(network.graph.vertices) - kept_ids,
        path_of=paths,
        connecting_edge=connecting,
        switching=s,
    )


def _cut_shortcuts(network: PhyloNetwork, path: tuple[int, ...]) -> tuple[int, ...]:
    """Drop detours bypassed by a network edge inside the path.

    A path that contains both endpoints of a non-consecutive network edge
    also contains a vertex together with both of its children (or a
    reticulation with both parents); splicing the edge in removes the
    detour and only grows the deleted set.
    """
    path = list(path)
    changed = True
    while changed:
        changed = False
        pos = {v: k for k, v in enumerate(path)}
        for a, b in network.graph.edges:
            if a in pos and b in pos and pos[b] > pos[a] + 1:
                path = path[:pos[a] + 1] + path[pos[b]:]
                changed = True
                break
    return tuple(path)


def _is_tight(network: PhyloNetwork, tree: PhyloTree,
              w: DisplayWitness) -> bool:
    """Check the zero-defect embedding conditions on a witness."""
    edges = network.graph.edges
    for path in w.path_of.values():
        members = set(path)
        induced = sum(1 for a, b in edges if a in members and b in members)
        if induced != len(path) - 1:
            return False
        if any((path[k], path[k + 1]) not in edges for k in range(len(path) - 1)):
            return False
    for u, v in tree.graph.edges:
        src, dst = w.path_of[u], w.path_of[v]
        src_set, dst_set = set(src), set(dst)
        cross = [(a, b) for a, b in edges if a in src_set and b in dst_set]
        if len(cross) != 1 or cross[0] != (src[-1], dst[0]):
            return False
    return True
