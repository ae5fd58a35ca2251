"""Weighted graphs, degrees, Laplacians and the intra/inter-cluster edge split.

Everything is dense ``float64``. Arrays stored on the frozen dataclasses are
marked read-only so values can be shared between threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
from scipy.sparse.csgraph import connected_components as _cc

from .errors import (
    IndexOutOfRange,
    InvalidSimilarity,
    IsolatedNode,
    LabelSizeMismatch,
    ParseError,
)

LaplacianKind = Literal["unnormalized", "normalized"]
LAPLACIAN_KINDS = ("unnormalized", "normalized")


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric, nonnegative weight matrix with an empty diagonal."""

    w: np.ndarray

    def __post_init__(self):
        w = _frozen(self.w)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InvalidSimilarity(f"similarity matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidSimilarity("similarity matrix has non-finite entries")
        if np.any(w < 0):
            raise InvalidSimilarity("similarity matrix has negative entries")
        if np.any(np.diag(w) != 0):
            raise InvalidSimilarity("similarity matrix must have a zero diagonal")
        if not np.array_equal(w, w.T):
            raise InvalidSimilarity("similarity matrix is not symmetric")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_array(cls, w, symmetrize: bool = False) -> "SimilarityMatrix":
        """Build from any array; ``symmetrize`` averages with the transpose and clears the diagonal."""
        w = np.array(w, dtype=np.float64, copy=True)
        if symmetrize:
            w = (w + w.T) / 2.0
            np.fill_diagonal(w, 0.0)
        return cls(w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash(self.w.tobytes())

    def permuted(self, perm) -> "SimilarityMatrix":
        perm = np.asarray(perm)
        return SimilarityMatrix(self.w[np.ix_(perm, perm)])


@dataclass(frozen=True, eq=False)
class Clustering:
    """Node-to-cluster assignment with labels ``0..k-1``, each label used."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        if labels.ndim != 1:
            raise LabelSizeMismatch("labels must be one-dimensional")
        if labels.size:
            k = int(labels.max()) + 1
            if labels.min() < 0 or np.unique(labels).size != k:
                raise LabelSizeMismatch("labels must be consecutive integers starting at 0")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels: Iterable) -> "Clustering":
        """Relabel arbitrary hashable ids to ``0..k-1`` in order of first appearance."""
        mapping: dict = {}
        out = []
        for lab in labels:
            key = lab.item() if isinstance(lab, np.generic) else lab
            if key not in mapping:
                mapping[key] = len(mapping)
            out.append(mapping[key])
        return cls(np.array(out, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def tolist(self) -> list[int]:
        return [int(x) for x in self.labels]


@dataclass(frozen=True, eq=False)
class DegreeMatrix:
    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen(self.d))

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.d)


@dataclass(frozen=True, eq=False)
class Laplacian:
    kind: str
    m: np.ndarray

    def __post_init__(self):
        if self.kind not in LAPLACIAN_KINDS:
            raise ValueError(f"unknown Laplacian kind {self.kind!r}")
        object.__setattr__(self, "m", _frozen(self.m))

    @property
    def n(self) -> int:
        return self.m.shape[0]


@dataclass(frozen=True)
class EdgeSplit:
    intra: SimilarityMatrix
    inter: SimilarityMatrix


def degree_matrix(a: SimilarityMatrix) -> DegreeMatrix:
    return DegreeMatrix(a.w.sum(axis=1))


def laplacian(a: SimilarityMatrix, kind: LaplacianKind = "unnormalized") -> Laplacian:
    """Return ``D - A`` or ``I - D^-1/2 A D^-1/2``, symmetrized after construction.

    Raises
    ------
    IsolatedNode
        For the normalized kind when some vertex has zero degree.
    """
    d = degree_matrix(a).d
    if kind == "unnormalized":
        m = np.diag(d) - a.w
    elif kind == "normalized":
        zero = np.flatnonzero(d <= 0)
        if zero.size:
            raise IsolatedNode(
                f"normalized Laplacian undefined: node(s) {zero[:10].tolist()} have zero degree"
            )
        s = 1.0 / np.sqrt(d)
        m = np.eye(a.n) - s[:, None] * a.w * s[None, :]
    else:
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    return Laplacian(kind, (m + m.T) / 2.0)


def connected_components(a: SimilarityMatrix) -> Clustering:
    """Component labels over edges with strictly positive weight."""
    if a.n == 0:
        return Clustering(np.zeros(0, dtype=np.int64))
    _, labels = _cc(a.w > 0, directed=False)
    return Clustering.from_labels(labels)


def is_connected(a: SimilarityMatrix) -> bool:
    return a.n > 0 and connected_components(a).k == 1


def edge_split(a: SimilarityMatrix, labels: Clustering) -> EdgeSplit:
    """Split ``a`` into intra-cluster and inter-cluster edge sets."""
    if labels.n != a.n:
        raise LabelSizeMismatch(f"labels cover {labels.n} nodes, graph has {a.n}")
    same = labels.labels[:, None] == labels.labels[None, :]
    intra = np.where(same, a.w, 0.0)
    inter = np.where(same, 0.0, a.w)
    return EdgeSplit(SimilarityMatrix(intra), SimilarityMatrix(inter))


def subgraph(a: SimilarityMatrix, nodes) -> SimilarityMatrix:
    nodes = np.asarray(nodes)
    return SimilarityMatrix(a.w[np.ix_(nodes, nodes)])


def disjoint_union(*graphs: SimilarityMatrix) -> SimilarityMatrix:
    n = sum(g.n for g in graphs)
    w = np.zeros((n, n))
    off = 0
    for g in graphs:
        w[off : off + g.n, off : off + g.n] = g.w
        off += g.n
    return SimilarityMatrix(w)


def complete_graph(n: int, weight: float = 1.0) -> SimilarityMatrix:
    w = np.full((n, n), float(weight))
    np.fill_diagonal(w, 0.0)
    return SimilarityMatrix(w)


def clique_ring(n_cliques: int = 3, size: int = 4, bridge: float = 1.0, weight: float = 1.0):
    """Cliques joined in a ring by single bridges.

    The last node of clique ``c`` is bridged to the first node of clique ``c+1``
    (cyclically), so no node carries two bridges. ``clique_ring()`` is the
    three-K4 graph whose Laplacian has spectrum
    ``{0, l, l, 4 x6, 6-l, 6-l, 6}`` with ``l = 3 - sqrt(6)``.

    Returns ``(graph, truth)``.
    """
    n = n_cliques * size
    w = np.zeros((n, n))
    for c in range(n_cliques):
        block = slice(c * size, (c + 1) * size)
        w[block, block] = weight
    np.fill_diagonal(w, 0.0)
    if n_cliques > 1:
        pairs = [(c * size + size - 1, ((c + 1) % n_cliques) * size) for c in range(n_cliques)]
        if n_cliques == 2:
            pairs = pairs[:1]
        for u, v in pairs:
            w[u, v] = w[v, u] = bridge
    truth = Clustering(np.repeat(np.arange(n_cliques), size))
    return SimilarityMatrix(w), truth


# ---------------------------------------------------------------------------
# file formats


def read_matrix_csv(path) -> SimilarityMatrix:
    """Dense CSV, ``n`` rows of ``n`` comma-separated floats, no header."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
            if len(rows[-1]) != len(rows[0]):
                raise ParseError(
                    f"expected {len(rows[0])} columns, found {len(rows[-1])}", path, lineno
                )
    if not rows:
        raise ParseError("empty matrix file", path)
    if len(rows) != len(rows[0]):
        raise ParseError(f"matrix is {len(rows)}x{len(rows[0])}, not square", path)
    try:
        return SimilarityMatrix(np.array(rows))
    except InvalidSimilarity as exc:
        raise ParseError(str(exc), path) from None


def write_matrix_csv(a: SimilarityMatrix | np.ndarray, path) -> None:
    w = a.w if isinstance(a, SimilarityMatrix) else np.asarray(a)
    with open(path, "w", encoding="utf-8") as fh:
        for row in w:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_edge_list(path, n: int | None = None) -> SimilarityMatrix:
    """Read ``u<TAB>v[<TAB>w]`` lines with 1-indexed node ids.

    Any whitespace separates fields. Missing weights default to 1. Both
    directions are optional; duplicates are merged by taking the maximum.
    """
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 'u v [w]', got {s!r}", path, lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
                wt = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
            if u < 1 or v < 1 or (n is not None and (u > n or v > n)):
                raise IndexOutOfRange(f"{path}:{lineno}: node id out of range in {s!r}")
            if u == v:
                raise ParseError("self-loops are not supported", path, lineno)
            if not np.isfinite(wt) or wt < 0:
                raise ParseError(f"invalid weight {wt}", path, lineno)
            edges.append((u - 1, v - 1, wt))
    size = n if n is not None else max((max(u, v) for u, v, _ in edges), default=-1) + 1
    w = np.zeros((size, size))
    for u, v, wt in edges:
        w[u, v] = max(w[u, v], wt)
        w[v, u] = max(w[v, u], wt)
    return SimilarityMatrix(w)


def write_edge_list(a: SimilarityMatrix, path) -> None:
    """Write every positive-weight edge in both directions, 1-indexed."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in zip(*np.nonzero(a.w)):
            fh.write(f"{u + 1}\t{v + 1}\t{float(a.w[u, v])!r}\n")


def read_labels(path) -> Clustering:
    """One integer label per line; ids are remapped by first appearance."""
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                labels.append(int(s))
            except ValueError:
                raise ParseError(f"not an integer label: {s!r}", path, lineno) from None
    return Clustering.from_labels(labels)


def write_labels(c: Clustering, path) -> None:
    Path(path).write_text("".join(f"{x}\n" for x in c.tolist()), encoding="utf-8")
