"""Compile a (network, tree) instance into an exact integer QUBO.

The objective is a weighted sum of twelve penalty polynomials over binary
variables.  There is one mapping bit x[i,j] per pair of a tree vertex
(plus one dummy row that absorbs unused network vertices) and a network
vertex, binary-counter slacks y[i,r] that turn the at-least-one-image
constraint into an equality, and product slacks z / zhat that linearize
the cubic terms arising from path and branching constraints.  Weighted by
constants A and B, the minimum of the assembled polynomial is 0 exactly
when the network displays the tree.

All coefficients are Python integers; nothing here ever rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import LEAF, RETICULATION, PhyloNetwork, PhyloTree

PENALTY_IDS = tuple(range(1, 13))

#: weight layout of the objective: B * (P1 + ... + P10) + A * P11 + P12
GROUP_B = tuple(range(1, 11))


class NotDisplayable(Exception):
    """The instance admits an immediate 'not displayed' answer.

    Raised when the tree has more vertices than the network or when the
    leaf-label sets rule containment out before any compilation.
    """


class LabelMismatch(NotDisplayable):
    pass


class VariableLayout:
    """Bijection between the structured variables and flat indices 0..m-1.

    Rows are tree-vertex positions (the dummy row is position ``n_T``),
    columns are network-vertex positions.  ``k_y`` is the width of the
    binary surplus counter, 0 when the two vertex counts coincide.
    """

    def __init__(self, n_T: int, n_N: int, tree_vertex_cols: tuple[int, ...],
                 retic_cols: tuple[int, ...], leaf_rows: tuple[int, ...]):
        if n_N < n_T:
            raise NotDisplayable(
                f"network has {n_N} vertices, tree has {n_T}: not displayable")
        self.n_T = n_T
        self.n_N = n_N
        self.alpha = len(retic_cols)
        self.beta = len(tree_vertex_cols)
        self.gamma = n_T - len(leaf_rows)
        # 1 + floor(lg(n_N - n_T)) surplus bits; 0 when the counts coincide
        self.k_y = (n_N - n_T).bit_length()
        self.tree_vertex_cols = tuple(sorted(tree_vertex_cols))
        self.retic_cols = tuple(sorted(retic_cols))
        self.leaf_rows = tuple(sorted(leaf_rows))
        self.nonleaf_rows = tuple(i for i in range(n_T) if i not in set(leaf_rows))

        self._zrank = {j: k for k, j in
                       enumerate(sorted(self.tree_vertex_cols + self.retic_cols))}
        self._hrank = {j: k for k, j in enumerate(self.tree_vertex_cols)}
        self._nlrank = {i: k for k, i in enumerate(self.nonleaf_rows)}

        self._x0 = 0
        self._y0 = self._x0 + n_N * (n_T + 1)
        self._z0 = self._y0 + (n_T - 1) * self.k_y
        self._h0 = self._z0 + n_T * (self.alpha + self.beta)
        self.m = self._h0 + 2 * self.beta * self.gamma

    def x(self, i: int, j: int) -> int:
        if not (0 <= i <= self.n_T and 0 <= j < self.n_N):
            raise IndexError(f"x[{i},{j}] out of range")
        return self._x0 + i * self.n_N + j

    def y(self, i: int, r: int) -> int:
        if not (1 <= i <= self.n_T - 1 and 0 <= r < self.k_y):
            raise IndexError(f"y[{i},{r}] out of range")
        return self._y0 + (i - 1) * self.k_y + r

    def z(self, i: int, j: int) -> int:
        if not 0 <= i < self.n_T:
            raise IndexError(f"z[{i},{j}] out of range")
        return self._z0 + i * (self.alpha + self.beta) + self._zrank[j]

    def zhat(self, i: int, j: int, side: int) -> int:
        return self._h0 + self._nlrank[i] * 2 * self.beta + 2 * self._hrank[j] + side

    def describe(self):
        """Yield (flat, kind, i, j-or-r) for every variable, in flat order."""
        for i in range(self.n_T + 1):
            for j in range(self.n_N):
                yield self.x(i, j), "x", i, j
        for i in range(1, self.n_T):
            for r in range(self.k_y):
                yield self.y(i, r), "y", i, r
        for i in range(self.n_T):
            for j in sorted(self._zrank):
                yield self.z(i, j), "z", i, j
        for i in self.nonleaf_rows:
            for j in self.tree_vertex_cols:
                for side in (0, 1):
                    yield self.zhat(i, j, side), "zhat", i, 2 * j + side


class QuadraticPolynomial:
    """Integer polynomial of degree <= 2 over binary variables.

    Squares are folded with b*b == b, so self-pairs never appear; zero
    coefficients are dropped on the fly.
    """

    __slots__ = ("constant", "linear", "quadratic")

    def __init__(self):
        self.constant = 0
        self.linear: dict[int, int] = {}
        self.quadratic: dict[tuple[int, int], int] = {}

    def add_constant(self, c: int):
        self.constant += c

    def add_linear(self, v: int, c: int):
        if not c:
            return
        new = self.linear.get(v, 0) + c
        if new:
            self.linear[v] = new
        else:
            self.linear.pop(v, None)

    def add_pair(self, u: int, v: int, c: int):
        if u == v:
            self.add_linear(u, c)
            return
        if not c:
            return
        key = (u, v) if u < v else (v, u)
        new = self.quadratic.get(key, 0) + c
        if new:
            self.quadratic[key] = new
        else:
            self.quadratic.pop(key, None)

    def add_square(self, terms: list[tuple[int, int]], c0: int):
        """Add (c0 + sum coef*var)^2 expanded over binary variables."""
        self.add_constant(c0 * c0)
        for k, (coef, var) in enumerate(terms):
            self.add_linear(var, coef * coef + 2 * c0 * coef)
            for coef2, var2 in terms[k + 1:]:
                self.add_pair(var, var2, 2 * coef * coef2)

    def add_scaled(self, other: "QuadraticPolynomial", k: int):
        self.add_constant(k * other.constant)
        for v, c in other.linear.items():
            self.add_linear(v, k * c)
        for (u, v), c in other.quadratic.items():
            self.add_pair(u, v, k * c)

    def evaluate(self, bits) -> int:
        total = self.constant
        for v, c in self.linear.items():
            if bits[v]:
                total += c
        for (u, v), c in self.quadratic.items():
            if bits[u] and bits[v]:
                total += c
        return total

    def evaluate_batch(self, batch: np.ndarray) -> np.ndarray:
        """Evaluate on a (B, m) 0/1 array; exact within int64."""
        batch = np.asarray(batch, dtype=np.int64)
        out = np.full(batch.shape[0], self.constant, dtype=np.int64)
        if self.linear:
            idx = np.fromiter(self.linear.keys(), dtype=np.int64)
            coef = np.fromiter(self.linear.values(), dtype=np.int64)
            out += batch[:, idx] @ coef
        if self.quadratic:
            keys = np.array(list(self.quadratic.keys()), dtype=np.int64)
            coef = np.fromiter(self.quadratic.values(), dtype=np.int64)
            out += (batch[:, keys[:, 0]] * batch[:, keys[:, 1]]) @ coef
        return out

    def max_abs_coefficient(self) -> int:
        cands = [abs(self.constant)]
        cands += [abs(c) for c in self.linear.values()]
        cands += [abs(c) for c in self.quadratic.values()]
        return max(cands)


@dataclass
class QuboMatrix:
    """Upper-triangular integer QUBO plus the scalar offset.

    ``evaluate(bits) == x^T Q x + offset`` equals the source polynomial at
    every binary point; the diagonal carries the former linear terms.
    """

    n: int
    diag: dict[int, int]
    offdiag: dict[tuple[int, int], int]
    offset: int

    def evaluate(self, bits) -> int:
        d, s = self.dense()
        x = np.asarray(bits, dtype=np.int64)
        return int(d @ x + (x @ np.triu(s, 1) @ x) + self.offset)

    def dense(self):
        """(diag vector, symmetric off-diagonal matrix) as int64 arrays."""
        if not hasattr(self, "_dense"):
            d = np.zeros(self.n, dtype=np.int64)
            for i, c in self.diag.items():
                d[i] = c
            s = np.zeros((self.n, self.n), dtype=np.int64)
            for (i, j), c in self.offdiag.items():
                s[i, j] = c
                s[j, i] = c
            self._dense = (d, s)
        return self._dense

    def max_abs_entry(self) -> int:
        cands = [abs(c) for c in self.diag.values()]
        cands += [abs(c) for c in self.offdiag.values()]
        return max(cands, default=0)


@dataclass
class QuboStats:
    logical_qubits: int
    density: Fraction
    max_abs_coefficient: int

    def to_obj(self) -> dict:
        return {
            "logical_qubits": self.logical_qubits,
            "density": float(self.density),
            "density_exact": [self.density.numerator, self.density.denominator],
            "max_abs_coefficient": self.max_abs_coefficient,
        }


class CompiledInstance:
    """A validated instance with all position tables the penalties need."""

    def __init__(self, network: PhyloNetwork, tree: PhyloTree,
                 subset_leaves: bool = False):
        if subset_leaves:
            if not tree.labels <= network.labels:
                raise LabelMismatch(
                    f"tree labels {sorted(tree.labels - network.labels)} "
                    "missing from the network")
        elif tree.labels != network.labels:
            raise LabelMismatch(
                "leaf-label sets differ "
                f"(tree only: {sorted(tree.labels - network.labels)}, "
                f"network only: {sorted(network.labels - tree.labels)}); "
                "pass subset_leaves to allow a tree on a label subset")
        self.network = network
        self.tree = tree
        self.subset_leaves = subset_leaves

        npos = network.position
        tpos = tree.position
        self.network_edges = tuple(sorted((npos[u], npos[v])
                                          for u, v in network.graph.edges))
        self.tree_edges = tuple(sorted((tpos[u], tpos[v])
                                       for u, v in tree.graph.edges))
        tree_vertex_cols = []
        retic_cols = []
        self.children_cols = {}
        self.parent_cols = {}
        for v in network.order:
            j = npos[v]
            if network.graph.out_degree(v) == 2:
                tree_vertex_cols.append(j)
                c1, c2 = sorted(npos[c] for c in network.children(v))
                self.children_cols[j] = (c1, c2)
            elif network.kind[v] == RETICULATION:
                retic_cols.append(j)
                p1, p2 = sorted(npos[p] for p in network.parents(v))
                self.parent_cols[j] = (p1, p2)
        leaf_rows = tuple(tpos[v] for v in tree.order if tree.kind[v] == LEAF)
        self.layout = VariableLayout(tree.n, network.n,
                                     tuple(tree_vertex_cols),
                                     tuple(retic_cols), leaf_rows)
        # leaf row -> column of the equally-labeled network leaf
        self.leaf_col = {
            tpos[v]: npos[network.leaf_of_label[lab]]
            for v, lab in tree.label_of_leaf.items()
        }
        self.weight_a = 2 * network.n
        self.weight_b = 4 * network.n ** 2 * tree.n ** 2
        self._penalties: tuple[QuadraticPolynomial, ...] | None = None

    # weights named after their role: B multiplies the hard constraints,
    # A the path penalty whose negative part B must dominate.

    def penalties(self) -> tuple["QuadraticPolynomial", ...]:
        if self._penalties is None:
            self._penalties = tuple(build_penalty(self, k) for k in PENALTY_IDS)
        return self._penalties


def compile_instance(network, tree, subset_leaves=False) -> CompiledInstance:
    return CompiledInstance(network, tree, subset_leaves=subset_leaves)


def layout(network: PhyloNetwork, tree: PhyloTree,
           subset_leaves: bool = False) -> VariableLayout:
    """Variable layout for an instance; rejects undisplayable size/labels."""
    return compile_instance(network, tree, subset_leaves).layout


def _lemma_block(poly, x1, x2, yv):
    """x1*x2 - 2*x1*y - 2*x2*y + 3*y: zero exactly when y == x1*x2."""
    poly.add_pair(x1, x2, 1)
    poly.add_pair(x1, yv, -2)
    poly.add_pair(x2, yv, -2)
    poly.add_linear(yv, 3)


def build_penalty(inst: CompiledInstance, which: int) -> QuadraticPolynomial:
    """The exact expansion of one of the twelve penalty polynomials."""
    lay = inst.layout
    p = QuadraticPolynomial()
    if which == 1:
        # root row picks exactly one image; every other row at least one,
        # with the surplus held by the binary counter y
        p.add_square([(-1, lay.x(0, j)) for j in range(lay.n_N)], 1)
        for i in range(1, lay.n_T):
            terms = [(-1, lay.x(i, j)) for j in range(lay.n_N)]
            terms += [(2 ** r, lay.y(i, r)) for r in range(lay.k_y)]
            p.add_square(terms, 1)
    elif which == 2:
        # every network vertex used exactly once, dummy row included
        for j in range(lay.n_N):
            p.add_square([(1, lay.x(i, j)) for i in range(lay.n_T + 1)], -1)
    elif which == 3:
        for i in range(lay.n_T):
            for j in lay.tree_vertex_cols:
                c1, c2 = inst.children_cols[j]
                _lemma_block(p, lay.x(i, c1), lay.x(i, c2), lay.z(i, j))
    elif which == 4:
        for i in range(lay.n_T):
            for j in lay.tree_vertex_cols:
                p.add_pair(lay.x(i, j), lay.z(i, j), 1)
    elif which == 5:
        for i in range(lay.n_T):
            for j in lay.retic_cols:
                p1_, p2_ = inst.parent_cols[j]
                _lemma_block(p, lay.x(i, p1_), lay.x(i, p2_), lay.z(i, j))
    elif which == 6:
        for i in range(lay.n_T):
            for j in lay.retic_cols:
                p.add_pair(lay.x(i, j), lay.z(i, j), 1)
    elif which == 7:
        for i, l in inst.tree_edges:
            for j in lay.tree_vertex_cols:
                p.add_pair(lay.x(i, j), lay.z(l, j), 1)
    elif which == 8:
        for i in lay.nonleaf_rows:
            for j in lay.tree_vertex_cols:
                c1, c2 = inst.children_cols[j]
                _lemma_block(p, lay.x(i, j), lay.x(i, c1), lay.zhat(i, j, 0))
                _lemma_block(p, lay.x(i, j), lay.x(i, c2), lay.zhat(i, j, 1))
    elif which == 9:
        for i, l in inst.tree_edges:
            for j in lay.tree_vertex_cols:
                c1, c2 = inst.children_cols[j]
                p.add_pair(lay.zhat(i, j, 0), lay.x(l, c2), 1)
                p.add_pair(lay.zhat(i, j, 1), lay.x(l, c1), 1)
    elif which == 10:
        for i in lay.leaf_rows:
            p.add_square([(-1, lay.x(i, inst.leaf_col[i]))], 1)
    elif which == 11:
        # one penalty unit per maximal path end inside each row; subtracting
        # n_T makes a single directed path per row cost exactly zero
        for i in range(lay.n_T):
            for j in range(lay.n_N):
                p.add_linear(lay.x(i, j), 1)
            for j, k in inst.network_edges:
                p.add_pair(lay.x(i, j), lay.x(i, k), -1)
        p.add_constant(-lay.n_T)
    elif which == 12:
        for i, l in inst.tree_edges:
            p.add_constant(1)
            for j, k in inst.network_edges:
                p.add_pair(lay.x(i, j), lay.x(l, k), -1)
    else:
        raise ValueError(f"penalty index must be 1..12, got {which}")
    return p


def assemble(inst: CompiledInstance) -> QuadraticPolynomial:
    """The full objective with exact integer weights."""
    total = QuadraticPolynomial()
    for which, poly in zip(PENALTY_IDS, inst.penalties()):
        weight = (inst.weight_b if which in GROUP_B
                  else inst.weight_a if which == 11 else 1)
        total.add_scaled(poly, weight)
    # every evaluation path squeezes through int64; keep a wide margin
    bound = total.max_abs_coefficient()
    terms = 1 + len(total.linear) + len(total.quadratic)
    if bound * terms >= 2 ** 62:
        raise OverflowError("QUBO coefficients too large for 64-bit evaluation")
    return total


def to_qubo(p: QuadraticPolynomial, n: int | None = None) -> QuboMatrix:
    """Fold linear terms onto the diagonal and split off the constant."""
    if n is None:
        used = list(p.linear) + [v for pair in p.quadratic for v in pair]
        n = 1 + max(used) if used else 0
    return QuboMatrix(n, dict(p.linear), dict(p.quadratic), p.constant)


def build_qubo(inst: CompiledInstance) -> QuboMatrix:
    return to_qubo(assemble(inst), inst.layout.m)


def stats(q: QuboMatrix) -> QuboStats:
    """Size, off-diagonal density, and largest coefficient of the matrix."""
    pairs = q.n * (q.n - 1) // 2
    density = Fraction(len(q.offdiag), pairs) if pairs else Fraction(0)
    return QuboStats(q.n, density, q.max_abs_entry())
