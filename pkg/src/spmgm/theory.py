"""First-order eigenpair perturbation and the maximum-gap recovery bound.

For symmetric ``T = T0 + eps*T1`` with orthonormal eigenpairs ``(l_j, u_j)``
of ``T0``::

    v_i  ~ u_i + sum_{j: l_j != l_i} eps <u_j, T1 u_i> / (l_i - l_j) u_j
    l_i' ~ l_i + eps <u_i, T1 u_i>

with an O(eps**2) remainder. Eigenvalues closer than the kernel threshold
count as equal, so degenerate ``T0`` (e.g. a disconnected graph Laplacian)
is handled by simply dropping those terms.

:func:`recovery_bound` evaluates the sufficient condition under which the
maximum-gap method separates a given set of clusters::

    max_{i != m} (n_i - 1) * rho1 / lambda_{i,2}  <  1 / (4 sqrt(n_m))   for every m

where ``rho1`` is the spectral radius of the inter-cluster Laplacian and
``lambda_{i,2}`` the algebraic connectivity of cluster ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import ZERO_TOL, full_spectrum, kernel_threshold, spectral_radius
from .errors import DegenerateTracking, DimensionMismatch, DisconnectedCluster, LabelSizeMismatch
from .graph import Clustering, SimilarityMatrix, edge_split, laplacian, subgraph


@dataclass(frozen=True, eq=False)
class PerturbedPair:
    index: int
    approx_vector: np.ndarray
    approx_value: float
    epsilon: float


def _check_pair(t0, t1) -> tuple[np.ndarray, np.ndarray]:
    t0 = np.asarray(t0, dtype=np.float64)
    t1 = np.asarray(t1, dtype=np.float64)
    if t0.ndim != 2 or t0.shape[0] != t0.shape[1] or t0.shape != t1.shape:
        raise DimensionMismatch(f"need two square matrices of equal size, got {t0.shape} and {t1.shape}")
    for name, t in (("t0", t0), ("t1", t1)):
        if not np.allclose(t, t.T, rtol=0, atol=1e-12 * max(1.0, np.abs(t).max(initial=0))):
            raise DimensionMismatch(f"{name} is not symmetric")
    return t0, t1


def perturb_first_order(t0, t1, eps: float, i: int, zero_tol: float = ZERO_TOL) -> PerturbedPair:
    """Linear estimate of the ``i``-th (ascending) eigenpair of ``t0 + eps*t1``."""
    t0, t1 = _check_pair(t0, t1)
    spec = full_spectrum(t0, zero_tol)
    lam, u = spec.values, spec.vectors
    if not 0 <= i < lam.size:
        raise DimensionMismatch(f"eigen index {i} out of range for size {lam.size}")
    rho = float(np.max(np.abs(lam))) if lam.size else 0.0
    ui = u[:, i]
    couplings = u.T @ (t1 @ ui)
    apart = np.abs(lam - lam[i]) > kernel_threshold(rho, zero_tol)
    coeffs = eps * couplings[apart] / (lam[i] - lam[apart])
    vec = ui + u[:, apart] @ coeffs
    value = float(lam[i] + eps * couplings[i])
    return PerturbedPair(i, vec, value, float(eps))


def perturbation_order_check(t0, t1, eps_sequence, i: int, zero_tol: float = ZERO_TOL):
    """``[(eps, error)]`` comparing the first-order vector with the exact one.

    The exact eigenvector is the one of ``t0 + eps*t1`` whose eigenvalue is
    nearest the first-order eigenvalue; the error is the smaller of
    ``||approx - exact||`` and ``||approx + exact||``.
    """
    t0, t1 = _check_pair(t0, t1)
    out = []
    for eps in eps_sequence:
        approx = perturb_first_order(t0, t1, eps, i, zero_tol)
        exact = full_spectrum(t0 + eps * t1, zero_tol)
        dist = np.abs(exact.values - approx.approx_value)
        order = np.argsort(dist, kind="stable")
        rho = float(np.max(np.abs(exact.values)))
        if dist.size > 1 and dist[order[1]] - dist[order[0]] <= kernel_threshold(rho, zero_tol):
            raise DegenerateTracking(
                f"eps={eps}: exact eigenvalues {exact.values[order[0]]!r} and "
                f"{exact.values[order[1]]!r} are equally close to the estimate"
            )
        v = exact.vectors[:, order[0]]
        err = min(np.linalg.norm(approx.approx_vector - v), np.linalg.norm(approx.approx_vector + v))
        out.append((float(eps), float(err)))
    return out


def loglog_slope(pairs) -> float:
    """Least-squares slope of ``log(error)`` against ``log(eps)``."""
    eps = np.array([p[0] for p in pairs], dtype=np.float64)
    err = np.array([p[1] for p in pairs], dtype=np.float64)
    return float(np.polyfit(np.log(eps), np.log(err), 1)[0])


# ---------------------------------------------------------------------------
# recovery bound


@dataclass(frozen=True)
class BoundReport:
    rho1: float
    rho0: float
    epsilon: float
    lambda2: list[float]
    sizes: list[int]
    lhs_per_m: list[float]
    rhs_per_m: list[float]
    guaranteed: bool
    deviation_2: list[float] = field(default_factory=list)
    deviation_inf: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(x):
            return float(x) if math.isfinite(x) else None

        return {
            "rho1": num(self.rho1),
            "rho0": num(self.rho0),
            "epsilon": num(self.epsilon),
            "lambda2": [num(x) for x in self.lambda2],
            "sizes": list(self.sizes),
            "lhs_per_m": [num(x) for x in self.lhs_per_m],
            "rhs_per_m": [num(x) for x in self.rhs_per_m],
            "guaranteed": bool(self.guaranteed),
            "diagnostics": {
                "deviation_2": [num(x) for x in self.deviation_2],
                "deviation_inf": [num(x) for x in self.deviation_inf],
            },
        }


def cluster_indicators(truth: Clustering) -> np.ndarray:
    """Columns ``f_m = 1_{C_m} / sqrt(n_m)``."""
    f = np.zeros((truth.n, truth.k))
    for m in range(truth.k):
        idx = truth.members(m)
        f[idx, m] = 1.0 / math.sqrt(idx.size)
    return f


def indicator_deviation(a: SimilarityMatrix, truth: Clustering) -> tuple[np.ndarray, np.ndarray]:
    """2-norm and max-norm distance of each ``f_m`` from its perturbed counterpart.

    The counterpart is ``f_m`` projected onto the span of the ``k`` lowest
    Laplacian eigenvectors of the full graph, renormalized.
    """
    k = truth.k
    spec = full_spectrum(laplacian(a, "unnormalized"))
    low = spec.vectors[:, :k]
    f = cluster_indicators(truth)
    proj = low @ (low.T @ f)
    norms = np.linalg.norm(proj, axis=0)
    proj = proj / np.where(norms > 0, norms, 1.0)
    diff = proj - f
    return np.linalg.norm(diff, axis=0), np.abs(diff).max(axis=0)


def recovery_bound(a: SimilarityMatrix, truth: Clustering, zero_tol: float = ZERO_TOL) -> BoundReport:
    """Evaluate the sufficient recovery condition for ``truth`` on ``a``.

    Raises
    ------
    DisconnectedCluster
        If some cluster's own subgraph is disconnected.
    """
    if truth.n != a.n:
        raise LabelSizeMismatch(f"labels cover {truth.n} nodes, graph has {a.n}")
    split = edge_split(a, truth)
    rho1 = spectral_radius(laplacian(split.inter))
    rho0 = spectral_radius(laplacian(split.intra))
    sizes = truth.sizes().tolist()
    lam2 = []
    for c in range(truth.k):
        members = truth.members(c)
        if members.size == 1:
            lam2.append(math.inf)
            continue
        vals = full_spectrum(laplacian(subgraph(a, members)), zero_tol).values
        if vals[1] <= kernel_threshold(float(vals[-1]), zero_tol):
            raise DisconnectedCluster(
                f"cluster {c} ({members.size} nodes) is not connected: algebraic connectivity {vals[1]:.3g}"
            )
        lam2.append(float(vals[1]))

    terms = [(n_i - 1) * rho1 / l2 if math.isfinite(l2) else 0.0 for n_i, l2 in zip(sizes, lam2)]
    lhs = [max((t for i, t in enumerate(terms) if i != m), default=0.0) for m in range(truth.k)]
    rhs = [1.0 / (4.0 * math.sqrt(n_m)) for n_m in sizes]
    eps = rho1 / rho0 if rho0 > 0 else math.inf
    guaranteed = rho0 > 0 and all(l < r for l, r in zip(lhs, rhs))
    dev2, devinf = indicator_deviation(a, truth)
    return BoundReport(
        rho1=rho1,
        rho0=rho0,
        epsilon=eps,
        lambda2=lam2,
        sizes=sizes,
        lhs_per_m=lhs,
        rhs_per_m=rhs,
        guaranteed=guaranteed,
        deviation_2=dev2.tolist(),
        deviation_inf=devinf.tolist(),
    )
