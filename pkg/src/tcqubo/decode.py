"""Translate between assignments and display embeddings.

``decode`` reads the mapping rows off the x-block of an assignment;
``verify_display`` re-derives the embedding semantics from a decoded
mapping and rebuilds the displayed tree; ``encode_witness`` goes the other
way, turning an oracle witness into a zero-energy assignment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import (GraphError, DirectedGraph, PhyloTree, LEAF,
                     suppress_degree_two, tree_isomorphic, validate)
from .oracle import DisplayWitness
from .qubo import CompiledInstance
from .solver import complete_slacks


@dataclass
class Violation:
    category: str  # P1, P2, P4, P6, P10, P11, P12 or ISO
    message: str

    def to_obj(self):
        return {"category": self.category, "message": self.message}


@dataclass
class DecodedMapping:
    """Per tree-vertex image sets, dummy row last; network vertex ids."""

    sets: tuple[frozenset[int], ...]


@dataclass
class VerificationReport:
    verdict: bool
    violations: list[Violation]
    reconstructed_tree: PhyloTree | None
    dangling_removed: tuple[int, ...] = ()

    def to_obj(self):
        from .formats import graph_to_obj

        return {
            "verdict": self.verdict,
            "violations": [v.to_obj() for v in self.violations],
            "reconstructed_tree": (graph_to_obj(self.reconstructed_tree)
                                   if self.reconstructed_tree else None),
            "dangling_removed": sorted(self.dangling_removed),
        }


def decode(assignment, inst: CompiledInstance) -> DecodedMapping:
    """The literal image sets d(x, u_i) of the x-block; slack bits ignored."""
    lay = inst.layout
    bits = np.asarray(assignment, dtype=np.int8)
    if bits.shape != (lay.m,):
        raise ValueError(f"assignment has shape {bits.shape}, expected ({lay.m},)")
    order = inst.network.order
    sets = []
    for i in range(lay.n_T + 1):
        sets.append(frozenset(order[j] for j in range(lay.n_N)
                              if bits[lay.x(i, j)]))
    return DecodedMapping(tuple(sets))


def _order_path(network, members: frozenset[int]):
    """Order an image set into a directed induced path, or explain why not.

    Returns (path, None) or (None, Violation).
    """
    kids = {v: [c for c in network.children(v) if c in members] for v in members}
    pars = {v: [p for p in network.parents(v) if p in members] for v in members}
    for v in sorted(members):
        if len(kids[v]) > 1:
            return None, Violation(
                "P4", f"vertex {v} and both of its children are in one image set")
        if len(pars[v]) > 1:
            return None, Violation(
                "P6", f"reticulation {v} and both of its parents are in one image set")
    sources = [v for v in sorted(members) if not pars[v]]
    if len(sources) != 1:
        return None, Violation(
            "P11", f"image set {sorted(members)} is not a single directed path")
    path = [sources[0]]
    while kids[path[-1]]:
        path.append(kids[path[-1]][0])
    if len(path) != len(members):
        return None, Violation(
            "P11", f"image set {sorted(members)} is not a single directed path")
    return tuple(path), None


def verify_display(mapping: DecodedMapping,
                   inst: CompiledInstance) -> VerificationReport:
    """Check the embedding semantics of a decoded mapping, category by
    category, then rebuild the displayed tree and compare it to the target.
    """
    network, tree = inst.network, inst.tree
    lay = inst.layout
    violations: list[Violation] = []
    rows = mapping.sets
    if len(rows) != lay.n_T + 1:
        raise ValueError("mapping size does not match the instance")

    tid = tree.order  # position -> tree vertex id

    if len(rows[0]) != 1:
        violations.append(Violation(
            "P1", f"root row maps to {len(rows[0])} vertices, expected exactly 1"))
    for i in range(1, lay.n_T):
        if not rows[i]:
            violations.append(Violation(
                "P1", f"tree vertex {tid[i]} is mapped to no network vertex"))

    paths: dict[int, tuple[int, ...]] = {}
    for i in range(lay.n_T):
        if not rows[i]:
            continue
        path, bad = _order_path(network, rows[i])
        if bad is not None:
            bad.message = f"row of tree vertex {tid[i]}: {bad.message}"
            violations.append(bad)
        else:
            paths[i] = path

    counts = {v: 0 for v in network.graph.vertices}
    for row in rows:
        for v in row:
            counts[v] += 1
    off = {v: c for v, c in counts.items() if c != 1}
    if off:
        violations.append(Violation(
            "P2", "network vertices not covered exactly once: "
                  + ", ".join(f"{v} (x{c})" for v, c in sorted(off.items()))))

    for i in lay.leaf_rows:
        leaf_id = network.order[inst.leaf_col[i]]
        if leaf_id not in rows[i]:
            violations.append(Violation(
                "P10", f"leaf {tid[i]} does not cover the equally "
                       f"labeled network leaf {leaf_id}"))

    structure_ok = not violations
    entry: dict[int, int] = {}
    if structure_ok:
        for i, l in inst.tree_edges:
            src, dst = paths[i], paths[l]
            dst_set = set(dst)
            cross = sorted((a, b) for a, b in network.graph.edges
                           if a in set(src) and b in dst_set)
            if len(cross) != 1:
                violations.append(Violation(
                    "P12", f"tree edge ({tid[i]}, {tid[l]}) has {len(cross)} "
                           "connecting network edges, expected exactly 1"))
            elif cross[0][0] != src[-1]:
                violations.append(Violation(
                    "P12", f"connecting edge for tree edge ({tid[i]}, {tid[l]}) "
                           "does not leave the terminal path vertex"))
            else:
                entry[l] = cross[0][1]

    if violations:
        return VerificationReport(False, violations, None)

    # rebuild the kept subdivision: trim the dangling prefix above each
    # entry vertex, wire consecutive path vertices and connecting edges
    dangling: list[int] = []
    trimmed: dict[int, tuple[int, ...]] = {0: paths[0]}
    for i, l in inst.tree_edges:
        path = paths[l]
        k = path.index(entry[l])
        dangling.extend(path[:k])
        trimmed[l] = path[k:]
    edges = []
    labels = {}
    for i, path in trimmed.items():
        edges.extend((path[k], path[k + 1]) for k in range(len(path) - 1))
        for v in path:
            if v in network.label_of_leaf:
                labels[v] = network.label_of_leaf[v]
    for i, l in inst.tree_edges:
        edges.append((trimmed[i][-1], trimmed[l][0]))
    try:
        subdivision = DirectedGraph(edges, labels,
                                    vertices={v for p in trimmed.values() for v in p})
        rebuilt = validate(suppress_degree_two(subdivision), expect="tree")
    except GraphError as exc:
        violations.append(Violation("ISO", f"reconstruction failed: {exc}"))
        return VerificationReport(False, violations, None, tuple(dangling))
    if not tree_isomorphic(rebuilt, tree):
        violations.append(Violation(
            "ISO", "reconstructed tree is not isomorphic to the target tree"))
        return VerificationReport(False, violations, rebuilt, tuple(dangling))
    return VerificationReport(True, [], rebuilt, tuple(dangling))


def encode_witness(w: DisplayWitness, inst: CompiledInstance) -> np.ndarray:
    """Zero-energy assignment for an oracle witness."""
    check_witness(w, inst.network, inst.tree)
    lay = inst.layout
    grid = np.zeros((lay.n_T + 1, lay.n_N), dtype=np.int8)
    tpos, npos = inst.tree.position, inst.network.position
    for u, path in w.path_of.items():
        for v in path:
            grid[tpos[u], npos[v]] = 1
    for v in w.deleted_vertices:
        grid[lay.n_T, npos[v]] = 1
    return complete_slacks(grid, inst)


def check_witness(w: DisplayWitness, network, tree) -> bool:
    """Assert the DisplayWitness invariants; raise ValueError on failure."""
    if set(w.path_of) != set(tree.graph.vertices):
        raise ValueError("witness paths do not cover the tree vertices")
    seen: set[int] = set()
    for u, path in w.path_of.items():
        if not path:
            raise ValueError(f"empty path for tree vertex {u}")
        if seen & set(path):
            raise ValueError("witness paths are not vertex-disjoint")
        seen |= set(path)
        for a, b in zip(path, path[1:]):
            if (a, b) not in network.graph.edges:
                raise ValueError(f"path step ({a}, {b}) is not a network edge")
    if seen != set(w.kept_vertices):
        raise ValueError("kept_vertices differ from the union of the paths")
    if w.kept_vertices & w.deleted_vertices:
        raise ValueError("kept and deleted vertex sets overlap")
    if w.kept_vertices | w.deleted_vertices != set(network.graph.vertices):
        raise ValueError("kept and deleted sets do not cover the network")
    for (u, v), (a, b) in w.connecting_edge.items():
        if (u, v) not in tree.graph.edges:
            raise ValueError(f"connecting edge given for non tree edge ({u}, {v})")
        if (a, b) not in network.graph.edges:
            raise ValueError(f"connecting edge ({a}, {b}) is not a network edge")
        if a != w.path_of[u][-1]:
            raise ValueError(f"connecting edge for ({u}, {v}) does not leave "
                             "the path terminal")
        if b not in w.path_of[v]:
            raise ValueError(f"connecting edge for ({u}, {v}) does not enter "
                             "the target path")
    for u, v in tree.graph.edges:
        if (u, v) not in w.connecting_edge:
            raise ValueError(f"tree edge ({u}, {v}) has no connecting edge")
        src, dst = set(w.path_of[u]), set(w.path_of[v])
        cross = [(a, b) for a, b in network.graph.edges
                 if a in src and b in dst]
        if len(cross) != 1:
            raise ValueError(f"tree edge ({u}, {v}) crossed by {len(cross)} "
                             "network edges, expected exactly 1")
    return True
