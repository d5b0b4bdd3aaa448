"""File formats: instances, QUBO matrices, variable maps, assignments.

Instance formats
----------------
json      one object ``{"network": G, "tree": G}`` where each ``G`` is
          ``{"edges": [[u, v], ...], "leaves": {"<vertex>": "<label>"}}``.
edgelist  two plain-text graph blocks separated by a line ``---``; comment
          lines start with ``#``, edge lines are ``u v`` (parent child),
          leaf lines are ``L v label``.

QUBO text format (``.qubo``)
----------------------------
    c tc-qubo v1
    p qubo 0 <m> <nDiag> <nOffDiag>
    <i> <i> <value>          # diagonal entries
    <i> <j> <value>          # off-diagonal entries, i < j
    c offset <value>

Variable map sidecar: one line per variable,
``<flatIndex> <kind:x|y|z|zhat> <i> <j-or-r>`` (for zhat the last field is
``2*j`` or ``2*j+1``).  Assignment files are a single line of ``m``
characters '0'/'1' in flat-index order.
"""

from __future__ import annotations

import json

import numpy as np

from .graphs import DirectedGraph, PhyloNetwork, PhyloTree, validate


class ParseError(ValueError):
    """Malformed input text; carries line number context where known."""


def parse_graph(text: str, format: str = "edgelist") -> DirectedGraph:
    """Parse a single graph object in the given format."""
    if format == "edgelist":
        return _parse_edgelist(text)
    if format == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
        return graph_from_obj(obj)
    raise ValueError(f"unknown format {format!r}")


def _parse_edgelist(text: str) -> DirectedGraph:
    edges = []
    leaves = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "L":
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: leaf line must be 'L v label'")
            try:
                v = int(parts[1])
            except ValueError:
                raise ParseError(f"line {lineno}: bad vertex id {parts[1]!r}") from None
            leaves.append((v, parts[2]))
        else:
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: edge line must be 'u v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"line {lineno}: bad vertex id in {line!r}") from None
            if (u, v) in set(edges):
                raise ParseError(f"line {lineno}: parallel edge {u} -> {v}")
            edges.append((u, v))
    seen = set()
    for v, lab in leaves:
        if v in seen:
            raise ParseError(f"vertex {v} labeled twice")
        seen.add(v)
    return DirectedGraph(edges, dict(leaves))


def graph_from_obj(obj: dict) -> DirectedGraph:
    if not isinstance(obj, dict):
        raise ParseError("graph object must be a JSON object")
    edges = obj.get("edges", [])
    leaves = obj.get("leaves", {})
    try:
        pairs = [(int(u), int(v)) for u, v in edges]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad edge entry in {edges!r}") from exc
    if len(pairs) != len(set(pairs)):
        raise ParseError("parallel edge in edge list")
    try:
        labels = {int(v): str(s) for v, s in leaves.items()}
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"bad leaves mapping {leaves!r}") from exc
    return DirectedGraph(pairs, labels)


def graph_to_obj(g: DirectedGraph | PhyloNetwork) -> dict:
    if isinstance(g, PhyloNetwork):
        g = g.graph
    return {
        "edges": [list(e) for e in sorted(g.edges)],
        "leaves": {str(v): s for v, s in sorted(g.leaf_labels.items())},
    }


def graph_to_edgelist(g: DirectedGraph | PhyloNetwork) -> str:
    if isinstance(g, PhyloNetwork):
        g = g.graph
    lines = [f"{u} {v}" for u, v in sorted(g.edges)]
    lines += [f"L {v} {s}" for v, s in sorted(g.leaf_labels.items())]
    return "\n".join(lines) + "\n"


def parse_instance(text: str, format: str = "json") -> tuple[PhyloNetwork, PhyloTree]:
    """Parse and validate a (network, tree) instance."""
    if format == "json":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
        if not isinstance(obj, dict) or "network" not in obj or "tree" not in obj:
            raise ParseError("instance JSON needs 'network' and 'tree' fields")
        net_graph = graph_from_obj(obj["network"])
        tree_graph = graph_from_obj(obj["tree"])
    elif format == "edgelist":
        parts = _split_edgelist_instance(text)
        net_graph = _parse_edgelist(parts[0])
        tree_graph = _parse_edgelist(parts[1])
    else:
        raise ValueError(f"unknown format {format!r}")
    network = validate(net_graph, expect="network")
    tree = validate(tree_graph, expect="tree")
    return network, tree


def _split_edgelist_instance(text: str) -> tuple[str, str]:
    parts = []
    current: list[str] = []
    for raw in text.splitlines():
        if raw.strip() == "---":
            parts.append("\n".join(current))
            current = []
        else:
            current.append(raw)
    parts.append("\n".join(current))
    if len(parts) != 2:
        raise ParseError("edgelist instance must hold network and tree "
                         "separated by a '---' line")
    return parts[0], parts[1]


def instance_to_obj(network, tree) -> dict:
    return {"network": graph_to_obj(network), "tree": graph_to_obj(tree)}


# ---------------------------------------------------------------------------
# QUBO text format


def write_qubo_text(q) -> str:
    diag = sorted(q.diag.items())
    off = sorted(q.offdiag.items())
    lines = ["c tc-qubo v1",
             f"p qubo 0 {q.n} {len(diag)} {len(off)}"]
    lines += [f"{i} {i} {c}" for i, c in diag]
    lines += [f"{i} {j} {c}" for (i, j), c in off]
    lines.append(f"c offset {q.offset}")
    return "\n".join(lines) + "\n"


def read_qubo_text(text: str):
    from .qubo import QuboMatrix

    n = None
    n_diag = n_off = 0
    offset = 0
    diag: dict[int, int] = {}
    off: dict[tuple[int, int], int] = {}
    entries = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 3 and parts[1] == "offset":
                offset = int(parts[2])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 6 or parts[1] != "qubo":
                raise ParseError(f"line {lineno}: bad problem line {line!r}")
            n, n_diag, n_off = int(parts[3]), int(parts[4]), int(parts[5])
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: bad entry line {line!r}")
        i, j, c = int(parts[0]), int(parts[1]), int(parts[2])
        if i == j:
            diag[i] = c
        elif i < j:
            off[(i, j)] = c
        else:
            raise ParseError(f"line {lineno}: lower-triangular entry {i} {j}")
        entries += 1
    if n is None:
        raise ParseError("missing 'p qubo' line")
    if entries != n_diag + n_off:
        raise ParseError(f"entry count {entries} does not match header "
                         f"{n_diag}+{n_off}")
    return QuboMatrix(n, diag, off, offset)


def write_varmap(layout) -> str:
    lines = [f"{flat} {kind} {i} {jr}" for flat, kind, i, jr in layout.describe()]
    return "\n".join(lines) + "\n"


def write_assignment(bits) -> str:
    return "".join("1" if int(b) else "0" for b in bits) + "\n"


def read_assignment(text: str, m: int | None = None) -> np.ndarray:
    line = text.strip()
    if not set(line) <= {"0", "1"}:
        raise ParseError("assignment must be a line of '0'/'1' characters")
    bits = np.fromiter((1 if ch == "1" else 0 for ch in line), dtype=np.int8,
                       count=len(line))
    if m is not None and len(bits) != m:
        raise ParseError(f"assignment has {len(bits)} bits, expected {m}")
    return bits
