"""Spectral clustering by maximum eigenvector gaps, with baselines, benchmark
graphs, agreement scores and a perturbation-based recovery bound."""

__version__ = "0.1.0"

from .benchgen import BenchmarkSpec, LabeledGraph, generate, read_lfr, realized_mixing, write_lfr
from .clustering import agglomerative, gap_cut, kmeans, sp_g1, sp_kmeans, sp_mgm
from .eigen import EigenPairs, full_spectrum, smallest_eigenpairs, spectral_radius
from .errors import AlgorithmError, InputError, SpmgmError
from .graph import (
    Clustering,
    SimilarityMatrix,
    clique_ring,
    complete_graph,
    connected_components,
    degree_matrix,
    disjoint_union,
    edge_split,
    laplacian,
)
from .metrics import ars, mean_score, nmi, scores
from .similarity import FeatureMatrix, gaussian_similarity, precision_similarity
from .theory import BoundReport, perturb_first_order, perturbation_order_check, recovery_bound
