import numpy as np
import pytest

from spmgm.graph import Clustering, SimilarityMatrix, clique_ring

ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def three_cliques():
    return clique_ring()


def random_graph(rng, n, p=0.5, weighted=True):
    upper = np.triu(rng.random((n, n)) < p, 1)
    w = upper * (rng.uniform(0.5, 2.0, (n, n)) if weighted else 1.0)
    return SimilarityMatrix(w + w.T)


def connected_random_graph(rng, n, p=0.5):
    """Random weighted graph made connected by a random spanning path."""
    w = np.triu(rng.random((n, n)) < p, 1) * rng.uniform(0.5, 2.0, (n, n))
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        i, j = min(a, b), max(a, b)
        if w[i, j] == 0:
            w[i, j] = rng.uniform(0.5, 2.0)
    return SimilarityMatrix(w + w.T)


def bridged(size, bridge, weight=1.0):
    """Two ``size``-cliques joined by one edge between node size-1 and node size."""
    w = np.zeros((2 * size, 2 * size))
    w[:size, :size] = weight
    w[size:, size:] = weight
    np.fill_diagonal(w, 0.0)
    w[size - 1, size] = w[size, size - 1] = bridge
    return SimilarityMatrix(w), Clustering(np.repeat([0, 1], size))


def strongly_clustered(rng, k=None, intra_scale=100.0, inter=(1e-4, 1e-3)):
    """Heavy random clusters chained (and sprinkled) with weak inter edges."""
    from spmgm.graph import disjoint_union

    k = int(rng.integers(2, 6)) if k is None else k
    sizes = rng.integers(3, 9, k)
    blocks = [SimilarityMatrix(connected_random_graph(rng, int(s), 0.7).w * intra_scale) for s in sizes]
    w = disjoint_union(*blocks).w.copy()
    labels = np.repeat(np.arange(k), sizes)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    pairs = [(c, c + 1) for c in range(k - 1)]
    pairs += [tuple(rng.choice(k, 2, replace=False)) for _ in range(int(rng.integers(0, k + 1)))]
    for c, d in pairs:
        i = int(rng.integers(starts[c], starts[c + 1]))
        j = int(rng.integers(starts[d], starts[d + 1]))
        w[i, j] = w[j, i] = rng.uniform(*inter)
    return SimilarityMatrix(w), Clustering(labels)
