"""Rooted binary phylogenetic networks and trees as leaf-labeled DAGs.

Vertices are the integer ids carried by the input; they need not be
contiguous.  A validated network orders its vertices by id; a validated
tree puts the root first (the QUBO compiler relies on the root sitting at
position 0).  All objects are treated as immutable after construction and
all operations here are pure functions.
"""

from __future__ import annotations

from typing import Iterable, Mapping

ROOT = "root"
TREE = "tree"
RETICULATION = "reticulation"
LEAF = "leaf"


class GraphError(ValueError):
    """Malformed graph input."""


class ValidationError(GraphError):
    """A graph violates one of the phylogenetic-network axioms.

    ``code`` is a stable identifier for the violated axiom: one of
    ``cyclic``, ``bad-root-degree``, ``bad-vertex-degree``,
    ``unlabeled-sink``, ``unreachable-vertex``, ``labeled-non-sink``,
    ``duplicate-label``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class DirectedGraph:
    """A finite directed graph with labels on some sink vertices.

    Rejects self-loops, parallel edges (duplicate ordered pairs) and labels
    on non-sink vertices.
    """

    def __init__(self, edges: Iterable[tuple[int, int]],
                 leaf_labels: Mapping[int, str] | Iterable[tuple[int, str]] = (),
                 vertices: Iterable[int] = ()):
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if (u, v) in seen:
                raise GraphError(f"parallel edge {u} -> {v}")
            seen.add((u, v))
        self.edges = frozenset(seen)
        if isinstance(leaf_labels, Mapping):
            leaf_labels = leaf_labels.items()
        self.leaf_labels = {int(v): str(s) for v, s in leaf_labels}
        verts = set(vertices)
        verts.update(self.leaf_labels)
        for u, v in seen:
            verts.add(u)
            verts.add(v)
        self.vertices = tuple(sorted(verts))
        self.children = {v: [] for v in self.vertices}
        self.parents = {v: [] for v in self.vertices}
        for u, v in sorted(seen):
            self.children[u].append(v)
            self.parents[v].append(u)
        for v, lab in self.leaf_labels.items():
            if self.children[v]:
                raise ValidationError(
                    "labeled-non-sink",
                    f"labeled vertex {v} ({lab!r}) has outgoing edges")
        # provenance of suppress_degree_two; empty on freshly built graphs
        self.edge_chains: dict[tuple[int, int], tuple[int, ...]] = {}
        self.dropped_root_chain: tuple[int, ...] = ()

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def out_degree(self, v) -> int:
        return len(self.children[v])

    def in_degree(self, v) -> int:
        return len(self.parents[v])

    def __repr__(self):
        return (f"DirectedGraph({self.vertex_count} vertices, "
                f"{len(self.edges)} edges, {len(self.leaf_labels)} leaves)")


def _toposort(graph: DirectedGraph) -> list[int]:
    """Kahn topological order; raises ValidationError('cyclic') on a cycle."""
    indeg = {v: graph.in_degree(v) for v in graph.vertices}
    queue = sorted(v for v in graph.vertices if indeg[v] == 0)
    order = []
    while queue:
        v = queue.pop()
        order.append(v)
        for c in graph.children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
        queue.sort()
    if len(order) != graph.vertex_count:
        raise ValidationError("cyclic", "graph contains a directed cycle")
    return order


class PhyloNetwork:
    """A validated rooted binary phylogenetic network.

    Build through :func:`validate`.  ``kind[v]`` is one of ``root``,
    ``tree``, ``reticulation``, ``leaf``; ``alpha`` counts reticulations and
    ``beta`` counts out-degree-2 vertices (the root included), so that
    ``n == len(labels) + alpha + beta``.
    """

    _root_first = False

    def __init__(self, graph: DirectedGraph, root: int, kind: dict[int, str]):
        self.graph = graph
        self.root = root
        self.kind = kind
        rest = sorted(v for v in graph.vertices if v != root)
        if self._root_first:
            self.order = (root, *rest)
        else:
            self.order = tuple(sorted(graph.vertices))
        self.position = {v: i for i, v in enumerate(self.order)}
        self.leaf_of_label = {lab: v for v, lab in graph.leaf_labels.items()}
        self.label_of_leaf = dict(graph.leaf_labels)
        self.alpha = sum(1 for k in kind.values() if k == RETICULATION)
        self.beta = sum(1 for v in graph.vertices if graph.out_degree(v) == 2)
        assert self.n == len(self.leaf_of_label) + self.alpha + self.beta

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(self.leaf_of_label)

    def children(self, v):
        return self.graph.children[v]

    def parents(self, v):
        return self.graph.parents[v]

    def reticulations(self) -> list[int]:
        return [v for v in self.order if self.kind[v] == RETICULATION]

    def __repr__(self):
        return (f"{type(self).__name__}(n={self.n}, alpha={self.alpha}, "
                f"beta={self.beta}, X={sorted(self.labels)})")


class PhyloTree(PhyloNetwork):
    """A phylogenetic network without reticulations; root is at position 0."""

    _root_first = True

    def __init__(self, graph, root, kind):
        super().__init__(graph, root, kind)
        if self.alpha:
            raise ValidationError("bad-vertex-degree",
                                  "tree contains a reticulation vertex")


def validate(graph: DirectedGraph, expect: str = "network") -> PhyloNetwork:
    """Classify every vertex and reject any violation of the network axioms.

    ``expect`` is ``"network"`` or ``"tree"``.  The single labeled vertex
    with no edges is accepted as the one-taxon network.
    """
    if expect not in ("network", "tree"):
        raise ValueError(f"expect must be 'network' or 'tree', got {expect!r}")
    cls = PhyloTree if expect == "tree" else PhyloNetwork

    labels = list(graph.leaf_labels.values())
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        raise ValidationError("duplicate-label",
                              f"leaf labels used more than once: {dupes}")

    if graph.vertex_count == 1 and not graph.edges:
        v = graph.vertices[0]
        if v not in graph.leaf_labels:
            raise ValidationError("unlabeled-sink",
                                  f"single vertex {v} carries no label")
        return cls(graph, v, {v: LEAF})
    if graph.vertex_count == 0:
        raise ValidationError("unreachable-vertex", "graph is empty")

    order = _toposort(graph)  # raises on cycles
    sources = [v for v in graph.vertices if graph.in_degree(v) == 0]
    if not sources:
        raise ValidationError("cyclic", "graph contains a directed cycle")
    root = sources[0]
    if len(sources) > 1:
        raise ValidationError(
            "unreachable-vertex",
            f"vertices {sorted(sources[1:])} are not reachable from the root")
    if graph.out_degree(root) != 2:
        raise ValidationError(
            "bad-root-degree",
            f"root {root} has out-degree {graph.out_degree(root)}, expected 2")

    kind = {root: ROOT}
    for v in graph.vertices:
        if v == root:
            continue
        deg = (graph.in_degree(v), graph.out_degree(v))
        if deg == (1, 0):
            if v not in graph.leaf_labels:
                raise ValidationError("unlabeled-sink",
                                      f"sink vertex {v} carries no label")
            kind[v] = LEAF
        elif deg == (1, 2):
            kind[v] = TREE
        elif deg == (2, 1):
            kind[v] = RETICULATION
        else:
            raise ValidationError(
                "bad-vertex-degree",
                f"vertex {v} has (in, out) degree {deg}; "
                "allowed: (1,0), (1,2), (2,1)")

    reachable = {root}
    stack = [root]
    while stack:
        for c in graph.children[stack.pop()]:
            if c not in reachable:
                reachable.add(c)
                stack.append(c)
    if len(reachable) != graph.vertex_count:
        missing = sorted(set(graph.vertices) - reachable)
        raise ValidationError("unreachable-vertex",
                              f"vertices {missing} are not reachable from the root")
    del order
    return cls(graph, root, kind)


def clusters(graph: DirectedGraph | PhyloNetwork) -> dict[int, frozenset[str]]:
    """Leaf-label descendant set of every vertex of a rooted tree.

    The input must be a rooted tree: acyclic, one source, every other
    vertex of in-degree 1.
    """
    if isinstance(graph, PhyloNetwork):
        graph = graph.graph
    for v in graph.vertices:
        if graph.in_degree(v) > 1:
            raise GraphError(f"not a tree: vertex {v} has in-degree "
                             f"{graph.in_degree(v)}")
    order = _toposort(graph)
    sources = [v for v in graph.vertices if graph.in_degree(v) == 0]
    if len(sources) != 1:
        raise GraphError(f"not a tree: {len(sources)} source vertices")
    table: dict[int, frozenset[str]] = {}
    for v in reversed(order):
        if not graph.children[v]:
            if v not in graph.leaf_labels:
                raise GraphError(f"not a leaf-labeled tree: unlabeled sink {v}")
            table[v] = frozenset([graph.leaf_labels[v]])
        else:
            acc: set[str] = set()
            for c in graph.children[v]:
                acc |= table[c]
            table[v] = frozenset(acc)
    return table


def cluster_set(tree: PhyloTree | DirectedGraph) -> frozenset[frozenset[str]]:
    """The set of clusters of a rooted tree; determines the tree shape."""
    return frozenset(clusters(tree).values())


def tree_isomorphic(t1: PhyloTree, t2: PhyloTree) -> bool:
    """Leaf-label-preserving isomorphism of rooted trees.

    Two rooted leaf-labeled trees are isomorphic exactly when they have the
    same cluster sets, since clusters determine a rooted tree.
    """
    if t1.labels != t2.labels:
        return False
    return cluster_set(t1) == cluster_set(t2)


def suppress_degree_two(graph: DirectedGraph) -> DirectedGraph:
    """Remove every in-degree-1/out-degree-1 vertex by splicing its edges.

    A source of out-degree 1 (a root left with one child by deletions) is
    contracted onto its child.  The result records provenance: for each
    surviving edge, ``edge_chains`` lists the suppressed vertices that used
    to lie on it (top to bottom), and ``dropped_root_chain`` lists contracted
    root vertices.
    """
    edges = set(graph.edges)
    children = {v: set(graph.children[v]) for v in graph.vertices}
    parents = {v: set(graph.parents[v]) for v in graph.vertices}
    alive = set(graph.vertices)
    chains: dict[tuple[int, int], tuple[int, ...]] = {}
    root_chain: list[int] = []

    def chain(u, v):
        return chains.get((u, v), ())

    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            if len(parents[v]) == 1 and len(children[v]) == 1:
                (p,) = parents[v]
                (c,) = children[v]
                new_chain = chain(p, v) + (v,) + chain(v, c)
                for e in ((p, v), (v, c)):
                    edges.discard(e)
                    chains.pop(e, None)
                children[p].discard(v)
                parents[c].discard(v)
                alive.discard(v)
                if (p, c) not in edges:
                    edges.add((p, c))
                    children[p].add(c)
                    parents[c].add(p)
                    chains[(p, c)] = new_chain
                changed = True
            elif len(parents[v]) == 0 and len(children[v]) == 1:
                (c,) = children[v]
                root_chain.append(v)
                root_chain.extend(chain(v, c))
                edges.discard((v, c))
                chains.pop((v, c), None)
                parents[c].discard(v)
                alive.discard(v)
                changed = True

    labels = {v: s for v, s in graph.leaf_labels.items() if v in alive}
    out = DirectedGraph(edges, labels, vertices=alive)
    out.edge_chains = chains
    out.dropped_root_chain = tuple(root_chain)
    return out


def live_subgraph(graph: DirectedGraph, keep_labels: frozenset[str] | set[str]) -> DirectedGraph:
    """Restrict to vertices that reach a leaf whose label is kept.

    Equivalent to iteratively deleting sinks that are unlabeled or carry a
    foreign label, together with their incident edges.
    """
    live = {v for v, s in graph.leaf_labels.items() if s in keep_labels}
    rev_adj = graph.parents
    stack = list(live)
    while stack:
        for p in rev_adj[stack.pop()]:
            if p not in live:
                live.add(p)
                stack.append(p)
    edges = [(u, v) for u, v in graph.edges if u in live and v in live]
    labels = {v: s for v, s in graph.leaf_labels.items() if v in live}
    return DirectedGraph(edges, labels, vertices=live)


def restrict_to_labels(tree: PhyloTree, keep_labels) -> PhyloTree:
    """The rooted subtree induced by a subset of the leaf labels."""
    keep = frozenset(keep_labels)
    if not keep <= tree.labels:
        raise GraphError(f"labels {sorted(keep - tree.labels)} not in the tree")
    pruned = suppress_degree_two(live_subgraph(tree.graph, keep))
    return validate(pruned, expect="tree")
