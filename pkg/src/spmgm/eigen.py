"""Dense symmetric eigendecomposition with kernel bookkeeping.

All routines go through LAPACK's symmetric driver (``numpy.linalg.eigh``:
tridiagonal reduction followed by an implicit QL/QR iteration). Output is a
deterministic function of the input bits: eigenvectors are sign-normalized so
that their largest-magnitude entry (first one on ties) is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotConverged, TooFewEigenvalues
from .graph import Laplacian

#: Relative threshold below which an eigenvalue counts as zero.
ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EigenPairs:
    values: np.ndarray
    vectors: np.ndarray  # columns
    kernel_dim: int

    def __len__(self):
        return self.values.size


def _matrix(l) -> np.ndarray:
    return l.m if isinstance(l, Laplacian) else np.asarray(l, dtype=np.float64)


def _eigh(m: np.ndarray):
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NotConverged(f"symmetric eigensolver did not converge: {exc}") from None
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return values, vectors * signs


def kernel_threshold(rho: float, zero_tol: float = ZERO_TOL) -> float:
    return zero_tol * max(1.0, rho)


def full_spectrum(l, zero_tol: float = ZERO_TOL) -> EigenPairs:
    """All eigenpairs in ascending order.

    ``l`` may be a :class:`Laplacian` or any symmetric array.
    """
    values, vectors = _eigh(_matrix(l))
    rho = float(np.max(np.abs(values))) if values.size else 0.0
    kernel_dim = int(np.sum(values < kernel_threshold(rho, zero_tol)))
    return EigenPairs(values, vectors, kernel_dim)


def spectral_radius(l) -> float:
    m = _matrix(l)
    if m.size == 0:
        return 0.0
    try:
        values = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise NotConverged(f"symmetric eigensolver did not converge: {exc}") from None
    return float(np.max(np.abs(values)))


def smallest_eigenpairs(
    l, k: int, skip_kernel: bool = True, zero_tol: float = ZERO_TOL
) -> EigenPairs:
    """The ``k`` smallest eigenpairs, optionally starting above the kernel.

    Eigenvalues below ``zero_tol * max(1, spectral_radius)`` form the kernel.
    With ``skip_kernel`` they are left out and ``kernel_dim`` says how many
    were skipped. Repeated eigenvalues keep their multiplicity.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    full = full_spectrum(l, zero_tol)
    start = full.kernel_dim if skip_kernel else 0
    available = full.values.size - start
    if k > available:
        what = "positive eigenvalues" if skip_kernel else "eigenvalues"
        raise TooFewEigenvalues(
            f"requested {k} {what}, only {available} available "
            f"(n={full.values.size}, kernel_dim={full.kernel_dim})"
        )
    sl = slice(start, start + k)
    return EigenPairs(full.values[sl].copy(), full.vectors[:, sl].copy(), full.kernel_dim)
