"""Spectral clustering (maximum-gap, Fiedler threshold, spectral k-means) and
the two point-cloud baselines (k-means, agglomerative).

All spectral routines read their eigenvectors from :func:`spectral_modes`.
On a connected graph that is simply the eigenvectors of the smallest positive
eigenvalues. On a disconnected graph only the trivial constant direction of
the kernel is dropped; the remaining kernel is spanned by a fixed basis of
component indicators, so the result does not depend on which kernel basis the
eigensolver happens to return.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.cluster.hierarchy import linkage as _linkage

from .eigen import ZERO_TOL, full_spectrum
from .errors import (
    DegenerateSplit,
    DisconnectedGraphWarning,
    TooFewEigenvalues,
    TooManyModes,
    ZeroRow,
)
from .graph import Clustering, SimilarityMatrix, connected_components, degree_matrix, laplacian

GAP_TIE_TOL = 1e-12
ZERO_ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GapCut:
    mode_index: int
    sorted_entries: np.ndarray
    cut_index: int
    cut_value: float
    gap_size: float


def component_basis(components: Clustering, weights=None) -> np.ndarray:
    """Orthonormal basis of the non-constant part of a Laplacian kernel.

    Column ``j`` (``j = 1..c-1``) is positive on component ``j``, negative on
    components ``0..j-1`` and zero on later ones, so it separates component
    ``j`` from every earlier component. ``weights`` are node degrees for the
    normalized Laplacian (kernel ``D^1/2 * indicators``) or ``None``.
    """
    labels = components.labels
    c = components.k
    w = np.ones(labels.size) if weights is None else np.asarray(weights, dtype=np.float64)
    vol = np.bincount(labels, weights=w, minlength=c)
    scale = np.sqrt(w)
    basis = np.zeros((labels.size, max(c - 1, 0)))
    for j in range(1, c):
        before = vol[:j].sum()
        g = np.where(labels == j, before, 0.0)
        g = np.where(labels < j, -vol[j], g)
        col = scale * g
        basis[:, j - 1] = col / np.linalg.norm(col)
    return basis


def spectral_modes(
    a: SimilarityMatrix,
    count: int,
    kind: str = "unnormalized",
    zero_tol: float = ZERO_TOL,
    keep_trivial: bool = False,
):
    """Return ``(values, vectors)`` for the ``count`` lowest informative modes.

    Warns with :class:`DisconnectedGraphWarning` on disconnected input. With
    ``keep_trivial`` a disconnected graph contributes its whole kernel
    (including the constant direction) ahead of the positive modes.
    """
    lap = laplacian(a, kind)
    full = full_spectrum(lap, zero_tol)
    comps = connected_components(a)
    c = comps.k
    if c > 1:
        warnings.warn(
            DisconnectedGraphWarning(
                f"graph has {c} connected components; using the component "
                "indicator modes in place of the trivial kernel",
                n_components=c,
            ),
            stacklevel=3,
        )
        weights = degree_matrix(a).d if kind == "normalized" else None
        extra = component_basis(comps, weights)
        if keep_trivial:
            trivial = np.ones(a.n) if weights is None else np.sqrt(weights)
            extra = np.hstack([(trivial / np.linalg.norm(trivial))[:, None], extra])
        start = max(full.kernel_dim, c)
    else:
        extra = np.zeros((a.n, 0))
        start = full.kernel_dim
    n_avail = extra.shape[1] + (a.n - start)
    if count > n_avail:
        raise TooFewEigenvalues(
            f"requested {count} modes, only {n_avail} available "
            f"(n={a.n}, kernel_dim={full.kernel_dim})"
        )
    vectors = np.hstack([extra, full.vectors[:, start:]])[:, :count]
    values = np.concatenate([np.zeros(extra.shape[1]), full.values[start:]])[:count]
    return values, vectors


# ---------------------------------------------------------------------------
# maximum-gap method


def gap_cut(v, mode_index: int = 0) -> GapCut:
    """Locate the largest gap between consecutive sorted entries of ``v``.

    Ties within ``GAP_TIE_TOL`` go to the smallest cut index.
    """
    u = np.sort(np.asarray(v, dtype=np.float64))
    if u.size < 2:
        raise ValueError("need at least two entries to cut")
    diffs = np.diff(u)
    best = diffs.max()
    ell = int(np.flatnonzero(diffs >= best - GAP_TIE_TOL)[0])
    return GapCut(mode_index, u, ell, float(u[ell]), float(diffs[ell]))


def mgm_cuts(
    a: SimilarityMatrix, m: int, kind: str = "unnormalized", zero_tol: float = ZERO_TOL
) -> tuple[list[GapCut], np.ndarray]:
    """Gap cuts of the ``m`` lowest modes, plus the ``n x m`` mode matrix."""
    if not 1 <= m <= a.n - 2:
        raise TooManyModes(f"number of modes must lie in [1, {a.n - 2}], got {m}")
    _, vectors = spectral_modes(a, m, kind, zero_tol)
    return [gap_cut(vectors[:, j], j) for j in range(m)], vectors


def sp_mgm(
    a: SimilarityMatrix, m: int, kind: str = "unnormalized", zero_tol: float = ZERO_TOL
) -> Clustering:
    """Spectral maximum-gap clustering with ``m`` eigenmodes.

    Each mode splits the nodes at its largest sorted gap into a low side
    (``v <= cut_value``) and a high side. Nodes sharing the same side in every
    mode form one cluster; empty combinations never appear, so between 2 and
    ``min(2**m, n)`` clusters result.
    """
    cuts, vectors = mgm_cuts(a, m, kind, zero_tol)
    high = np.column_stack([vectors[:, c.mode_index] > c.cut_value for c in cuts])
    codes = high.astype(np.int64) @ (1 << np.arange(m, dtype=np.int64))
    return Clustering.from_labels(codes)


# ---------------------------------------------------------------------------
# Fiedler threshold and spectral k-means

Threshold = Union[str, float, Callable[[np.ndarray], float]]


def _threshold_value(v: np.ndarray, rule: Threshold) -> float:
    if callable(rule):
        return float(rule(v))
    if rule == "mean":
        return float(v.mean())
    if rule == "median":
        return float(np.median(v))
    if rule == "zero":
        return 0.0
    if isinstance(rule, str):
        raise ValueError(f"unknown threshold rule {rule!r}")
    return float(rule)


def sp_g1(
    a: SimilarityMatrix,
    threshold: Threshold = "mean",
    kind: str = "normalized",
    zero_tol: float = ZERO_TOL,
) -> Clustering:
    """Two-way split on the first nontrivial eigenvector.

    Nodes with entry below the threshold form one side. ``threshold`` may be
    ``"mean"`` (default), ``"median"``, ``"zero"``, a number or a callable on
    the vector.
    """
    if a.n < 2:
        raise TooManyModes("need at least two nodes")
    _, vectors = spectral_modes(a, 1, kind, zero_tol)
    v = vectors[:, 0]
    r = _threshold_value(v, threshold)
    low = v < r
    if low.all() or not low.any():
        raise DegenerateSplit(
            f"threshold {r:g} puts every node on one side (entries span "
            f"[{v.min():g}, {v.max():g}])"
        )
    return Clustering.from_labels(np.where(low, 0, 1))


def sp_kmeans(
    a: SimilarityMatrix,
    k: int,
    seed: int = 0,
    kind: str = "normalized",
    zero_tol: float = ZERO_TOL,
    **kmeans_opts,
) -> Clustering:
    """k-means on the row-normalized matrix of the ``k`` lowest modes.

    On a disconnected graph the whole kernel is used, so each component's
    rows start out identical.
    """
    if not 2 <= k <= a.n:
        raise TooManyModes(f"cluster count must lie in [2, {a.n}], got {k}")
    _, v = spectral_modes(a, k, kind, zero_tol, keep_trivial=True)
    norms = np.linalg.norm(v, axis=1)
    bad = np.flatnonzero(norms < ZERO_ROW_TOL)
    if bad.size:
        raise ZeroRow(f"rows {bad[:10].tolist()} of the mode matrix have near-zero norm")
    return kmeans(v / norms[:, None], k, seed=seed, **kmeans_opts)


# ---------------------------------------------------------------------------
# point-cloud baselines


def _sqdist(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sqdist(x, x[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # every point coincides with a chosen center
            rest = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(rest)) if rest.size else int(rng.integers(n))
        chosen.append(idx)
        closest = np.minimum(closest, _sqdist(x, x[idx : idx + 1])[:, 0])
    return x[chosen].copy()


def lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int = 300, tol: float = 1e-6):
    """Lloyd iterations from ``centers``.

    Returns ``(labels, centers, inertia_history)``. An emptied cluster is
    reseeded at the point farthest from its current centroid.
    """
    centers = np.array(centers, dtype=np.float64, copy=True)
    k = centers.shape[0]
    history: list[float] = []
    for _ in range(max_iter):
        d2 = _sqdist(x, centers)
        labels = np.argmin(d2, axis=1)
        dist = d2[np.arange(x.shape[0]), labels]
        history.append(float(dist.sum()))
        if len(history) > 1 and history[-2] - history[-1] <= tol * history[-2]:
            break
        counts = np.bincount(labels, minlength=k)
        new = np.zeros_like(centers)
        np.add.at(new, labels, x)
        filled = counts > 0
        new[filled] /= counts[filled, None]
        for c in np.flatnonzero(~filled):
            far = int(np.argmax(dist))
            new[c] = x[far]
            dist[far] = -1.0
        centers = new
    return labels, centers, history


def kmeans(
    points,
    k: int,
    seed: int = 0,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> Clustering:
    """Best-of-``n_init`` k-means++ / Lloyd clustering of the rows of ``points``."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise TooManyModes(f"cluster count must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        labels, _, history = lloyd(x, kmeans_plusplus(x, k, rng), max_iter, tol)
        if history[-1] < best_inertia:
            best_labels, best_inertia = labels, history[-1]
    return Clustering.from_labels(best_labels)


LINKAGES = ("average", "single", "complete", "ward")


def agglomerative(points, k: int, linkage: str = "average") -> Clustering:
    """Bottom-up merging on Euclidean distances until ``k`` clusters remain."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k <= n:
        raise TooManyModes(f"cluster count must lie in [1, {n}], got {k}")
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    if k == n:
        return Clustering(np.arange(n))
    z = _linkage(x, method=linkage, metric="euclidean")
    parent = np.arange(2 * n - 1)
    for step in range(n - k):
        a, b = int(z[step, 0]), int(z[step, 1])
        parent[a] = parent[b] = n + step

    def root(i):
        while parent[i] != i:
            i = parent[i]
        return i

    return Clustering.from_labels(root(i) for i in range(n))
