"""Random instances: coalescent trees plus random reticulation insertions.

A network with r reticulations over |X| leaves is grown from a random
binary tree by r times subdividing two comparable-free edges and joining
them; every insertion adds one tree vertex and one reticulation, so the
vertex counts always match the closed-form sizes 2|X|-1 and 2|X|+2r-1.
"""

from __future__ import annotations

import random
import string

from .graphs import DirectedGraph, PhyloNetwork, PhyloTree, validate


def default_labels(count: int) -> list[str]:
    if count <= 26:
        return list(string.ascii_lowercase[:count])
    return [f"t{i}" for i in range(count)]


def random_tree(labels, rng: random.Random) -> PhyloTree:
    """Random rooted binary tree by repeatedly joining two subtree roots."""
    labels = list(labels)
    if len(labels) == 1:
        return validate(DirectedGraph((), {0: labels[0]}), expect="tree")
    next_id = len(labels)
    roots = list(range(len(labels)))
    edges = []
    while len(roots) > 1:
        a, b = rng.sample(range(len(roots)), 2)
        u, v = roots[a], roots[b]
        roots = [r for k, r in enumerate(roots) if k not in (a, b)]
        edges += [(next_id, u), (next_id, v)]
        roots.append(next_id)
        next_id += 1
    labs = {i: lab for i, lab in enumerate(labels)}
    return validate(DirectedGraph(edges, labs), expect="tree")


def random_network(labels, reticulations: int, rng: random.Random,
                   max_tries: int = 10000) -> PhyloNetwork:
    """Random network built over a random base tree."""
    base = random_tree(labels, rng)
    if reticulations == 0:
        return base
    if len(list(labels)) < 2:
        raise ValueError("reticulations require at least two leaves")
    edges = set(base.graph.edges)
    labs = dict(base.graph.leaf_labels)
    next_id = max(base.graph.vertices) + 1
    for _ in range(reticulations):
        for _ in range(max_tries):
            e1, e2 = rng.sample(sorted(edges), 2)
            if not _reaches(edges, e2[1], e1[0]) and e2[1] != e1[0]:
                break
        else:
            raise RuntimeError("could not place a reticulation acyclically")
        u, w = next_id, next_id + 1
        next_id += 2
        edges -= {e1, e2}
        edges |= {(e1[0], u), (u, e1[1]), (e2[0], w), (w, e2[1]), (u, w)}
    return validate(DirectedGraph(sorted(edges), labs), expect="network")


def _reaches(edges, start, goal) -> bool:
    """Is there a directed path from start to goal (start == goal counts)?"""
    if start == goal:
        return True
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
    stack = [start]
    seen = {start}
    while stack:
        for nxt in adj.get(stack.pop(), ()):
            if nxt == goal:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def random_instance(num_leaves: int, reticulations: int,
                    seed: int = 0) -> tuple[PhyloNetwork, PhyloTree]:
    """An independent random network and tree over the same label set."""
    rng = random.Random(seed)
    labels = default_labels(num_leaves)
    network = random_network(labels, reticulations, rng)
    tree = random_tree(labels, rng)
    return network, tree
