"""Tree containment on rooted binary phylogenetic networks via exact
integer QUBOs, with a brute-force display oracle for cross-validation."""

from .graphs import (DirectedGraph, GraphError, PhyloNetwork, PhyloTree,
                     ValidationError, clusters, cluster_set, restrict_to_labels,
                     suppress_degree_two, tree_isomorphic, validate)
from .formats import ParseError, parse_graph, parse_instance
from .oracle import (DisplayWitness, OracleTooLarge, Switching, all_switchings,
                     displayed_trees, displays, extract_tree, witness_embedding)
from .qubo import (CompiledInstance, LabelMismatch, NotDisplayable,
                   QuadraticPolynomial, QuboMatrix, QuboStats, VariableLayout,
                   assemble, build_penalty, build_qubo, compile_instance,
                   layout, stats, to_qubo)
from .solver import (AnnealParams, SolveResult, complete_slacks, evaluate,
                     penalty_breakdown, solve_anneal, solve_exhaustive)
from .decode import (DecodedMapping, VerificationReport, Violation,
                     check_witness, decode, encode_witness, verify_display)
from .generate import random_instance, random_network, random_tree

__version__ = "0.1.0"
