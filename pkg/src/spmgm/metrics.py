"""Partition agreement scores: NMI, adjusted Rand, and their average."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import SizeMismatch
from .graph import Clustering


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray  # int64, rows index ``a`` labels, columns ``b`` labels

    @property
    def rows(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cols(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _labels(c) -> np.ndarray:
    if isinstance(c, Clustering):
        return c.labels
    return Clustering.from_labels(c).labels


def contingency(a, b) -> ContingencyTable:
    la, lb = _labels(a), _labels(b)
    if la.size != lb.size:
        raise SizeMismatch(f"partitions have different sizes: {la.size} vs {lb.size}")
    ka = int(la.max()) + 1 if la.size else 0
    kb = int(lb.max()) + 1 if lb.size else 0
    counts = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(counts, (la, lb), 1)
    return ContingencyTable(counts)


def _same_partition(t: ContingencyTable) -> bool:
    """True when every row and every column of the table has one nonzero cell."""
    nz = t.counts > 0
    if t.counts.shape[0] != t.counts.shape[1]:
        return False
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(a, b) -> float:
    """Mutual information normalized by the arithmetic mean of the two entropies.

    Identical partitions (including two single-cluster ones) score exactly 1.
    """
    t = contingency(a, b)
    n = t.n
    if n == 0:
        raise SizeMismatch("empty partitions")
    if _same_partition(t):
        return 1.0
    ha, hb = _entropy(t.rows, n), _entropy(t.cols, n)
    i, j = np.nonzero(t.counts)
    nij = t.counts[i, j].astype(np.float64)
    mi = float(np.sum(nij / n * (np.log(nij * n) - np.log(t.rows[i] * t.cols[j].astype(np.float64)))))
    mi = max(mi, 0.0)
    return float(min(mi / ((ha + hb) / 2.0), 1.0))


def ars(a, b) -> float:
    """Adjusted Rand score from pair counts, exact up to the final division.

    Not clamped: anti-correlated partitions score below zero. When the
    chance-corrected denominator vanishes (both partitions trivial) the
    result is 1.0 for identical partitions and 0.0 otherwise.
    """
    t = contingency(a, b)
    n = t.n
    if n == 0:
        raise SizeMismatch("empty partitions")
    pairs = comb(n, 2)
    s_ij = sum(comb(int(x), 2) for x in t.counts.ravel())
    s_a = sum(comb(int(x), 2) for x in t.rows)
    s_b = sum(comb(int(x), 2) for x in t.cols)
    num = 2 * (s_ij * pairs - s_a * s_b)
    den = (s_a + s_b) * pairs - 2 * s_a * s_b
    if den == 0:
        return 1.0 if _same_partition(t) else 0.0
    return num / den


def mean_score(a, b) -> float:
    return (nmi(a, b) + ars(a, b)) / 2.0


def scores(a, b) -> dict[str, float]:
    n_, r_ = nmi(a, b), ars(a, b)
    return {"nmi": n_, "ars": r_, "mean": (n_ + r_) / 2.0}
