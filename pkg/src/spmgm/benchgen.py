"""Planted-community benchmark graphs in the style of LFR.

``generate`` is an "LFR-lite": power-law degrees and community sizes, a
per-node split of each degree into intra- and inter-community stubs according
to the mixing parameter, and configuration-model wiring of both stub sets.
It reproduces the realized statistics of LFR graphs (mean/max degree, mixing)
rather than the original rewiring procedure. Files written by the reference
LFR tool (``network.dat`` / ``community.dat``) are read by :func:`read_lfr`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import EmptyGraph, IndexOutOfRange, InfeasibleSpec, MissingCommunity, ParseError
from .graph import Clustering, SimilarityMatrix, connected_components, read_edge_list, write_edge_list

MAX_ATTEMPTS = 20


@dataclass(frozen=True)
class BenchmarkSpec:
    n: int
    d_avg: float
    d_max: int
    mu: float
    tau1: float = 2.0
    tau2: float = 1.0
    seed: int = 0
    intra_weight: float = 1.0
    inter_weight: float = 1.0
    weight_jitter: float = 0.0
    min_community: int | None = None
    max_community: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise InfeasibleSpec(f"mixing parameter must lie in [0, 1], got {self.mu}")
        if not 1 <= self.d_avg <= self.d_max < self.n:
            raise InfeasibleSpec(
                f"need 1 <= d_avg <= d_max < n, got d_avg={self.d_avg}, "
                f"d_max={self.d_max}, n={self.n}"
            )
        if self.intra_weight <= 0 or self.inter_weight <= 0:
            raise InfeasibleSpec("edge weight scales must be positive")
        if not 0.0 <= self.weight_jitter < 1.0:
            raise InfeasibleSpec("weight_jitter must lie in [0, 1)")
        lo, hi = self.min_community, self.max_community
        if lo is not None and lo < 2:
            raise InfeasibleSpec("communities need at least 2 nodes")
        if lo is not None and hi is not None and lo > hi:
            raise InfeasibleSpec("min_community exceeds max_community")
        if hi is not None and hi > self.n:
            raise InfeasibleSpec("max_community exceeds n")

    def with_(self, **changes) -> "BenchmarkSpec":
        return BenchmarkSpec(**{**asdict(self), **changes})


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    graph: SimilarityMatrix
    truth: Clustering
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.truth.n != self.graph.n:
            raise MissingCommunity(
                f"truth covers {self.truth.n} nodes but the graph has {self.graph.n}"
            )


# ---------------------------------------------------------------------------
# power laws


def power_law_mean(lo: float, hi: float, tau: float) -> float:
    """Mean of the continuous density ``x**-tau`` truncated to ``[lo, hi]``."""
    if hi <= lo:
        return float(lo)
    if math.isclose(tau, 1.0):
        return (hi - lo) / math.log(hi / lo)
    if math.isclose(tau, 2.0):
        return math.log(hi / lo) / (1.0 / lo - 1.0 / hi)
    e1, e2 = 1.0 - tau, 2.0 - tau
    return (e1 / e2) * (hi**e2 - lo**e2) / (hi**e1 - lo**e1)


def solve_min_degree(d_avg: float, d_max: float, tau: float) -> float:
    """Lower cutoff ``x_min >= 1`` giving the truncated power law mean ``d_avg``."""
    if d_avg >= d_max:
        return float(d_max)
    if power_law_mean(1.0, d_max, tau) > d_avg:
        raise InfeasibleSpec(
            f"no power law with exponent {tau} on [1, {d_max}] has mean {d_avg}; "
            f"smallest attainable mean is {power_law_mean(1.0, d_max, tau):.3f}"
        )
    return brentq(lambda lo: power_law_mean(lo, d_max, tau) - d_avg, 1.0, float(d_max))


def sample_power_law(rng: np.random.Generator, lo: float, hi: float, tau: float, size: int):
    u = rng.random(size)
    if hi <= lo:
        return np.full(size, float(lo))
    if math.isclose(tau, 1.0):
        return lo * (hi / lo) ** u
    e = 1.0 - tau
    return (lo**e + u * (hi**e - lo**e)) ** (1.0 / e)


def _community_sizes(rng, n: int, lo: int, hi: int, tau: float) -> list[int]:
    sizes: list[int] = []
    while sum(sizes) < n:
        s = int(np.floor(sample_power_law(rng, lo, hi + 1, tau, 1)[0]))
        sizes.append(min(max(s, lo), hi))
    excess = sum(sizes) - n
    while excess > 0:
        shrinkable = [i for i, s in enumerate(sizes) if s > lo]
        if shrinkable:
            i = max(shrinkable, key=lambda j: (sizes[j], j))
            sizes[i] -= 1
            excess -= 1
        else:
            excess -= sizes.pop()
            excess = -_grow(sizes, -excess, hi)
    return sizes


def _rebalance(sizes: list[int], n: int, lo: int) -> list[int]:
    """Shrink the smaller communities (dropping any that fall below ``lo``) until sizes sum to ``n``."""
    sizes = sorted(sizes, reverse=True)
    excess = sum(sizes) - n
    while excess > 0:
        if sizes[-1] - excess >= lo:
            sizes[-1] -= excess
            excess = 0
        else:
            excess -= sizes.pop()
    if excess < 0:
        sizes[-1] -= excess
    return sizes


def _grow(sizes: list[int], deficit: int, hi: int) -> int:
    while deficit > 0:
        room = [i for i, s in enumerate(sizes) if s < hi]
        if not room:
            break
        i = min(room, key=lambda j: (sizes[j], j))
        sizes[i] += 1
        deficit -= 1
    return deficit


# ---------------------------------------------------------------------------
# wiring


def _pair_stubs(rng, stubs: list[int], valid, edges: set, max_rounds: int = 50, swaps: int = 200):
    """Configuration-model pairing of ``stubs`` into ``edges``.

    Invalid pairs are reshuffled; when a round makes no progress, leftover
    pairs are placed by swapping against random existing edges. Whatever
    still cannot be placed is returned.
    """
    own: list[tuple[int, int]] = []
    pending = list(stubs)
    for _ in range(max_rounds):
        if len(pending) < 2:
            break
        rng.shuffle(pending)
        left = []
        for i in range(0, len(pending) - 1, 2):
            u, v = pending[i], pending[i + 1]
            e = (min(u, v), max(u, v))
            if valid(u, v) and e not in edges:
                edges.add(e)
                own.append(e)
            else:
                left += [u, v]
        if len(pending) % 2:
            left.append(pending[-1])
        stalled = len(left) == len(pending)
        pending = left
        if stalled:
            break
    # swap repair: (u, v) + existing (x, y) -> (u, x) + (v, y)
    left = []
    while len(pending) >= 2:
        u = pending.pop()
        partner = next(
            (
                i
                for i in range(len(pending) - 1, -1, -1)
                if valid(u, pending[i]) and (min(u, pending[i]), max(u, pending[i])) not in edges
            ),
            None,
        )
        if partner is not None:
            v = pending.pop(partner)
            e = (min(u, v), max(u, v))
            edges.add(e)
            own.append(e)
            continue
        v = pending.pop()
        placed = False
        for _ in range(swaps if own else 0):
            idx = int(rng.integers(len(own)))
            x, y = own[idx]
            if rng.random() < 0.5:
                x, y = y, x
            e1, e2 = (min(u, x), max(u, x)), (min(v, y), max(v, y))
            if e1 == e2 or not (valid(u, x) and valid(v, y)) or e1 in edges or e2 in edges:
                continue
            edges.discard(own[idx])
            own[idx] = e1
            own.append(e2)
            edges.add(e1)
            edges.add(e2)
            placed = True
            break
        if not placed:
            left += [u, v]
    return left + pending


def _assign_communities(rng, k_in: np.ndarray, sizes: list[int]) -> np.ndarray:
    n = k_in.size
    order = np.lexsort((rng.random(n), -k_in))
    free = np.array(sizes, dtype=np.int64)
    sizes_arr = np.array(sizes, dtype=np.int64)
    comm = np.empty(n, dtype=np.int64)
    for node in order:
        fits = np.flatnonzero((free > 0) & (sizes_arr - 1 >= k_in[node]))
        if fits.size == 0:
            fits = np.flatnonzero(free > 0)
            fits = fits[sizes_arr[fits] == sizes_arr[fits].max()]
        c = int(rng.choice(fits, p=free[fits] / free[fits].sum()))
        comm[node] = c
        free[c] -= 1
    return comm


def _components_of(nodes: np.ndarray, edges: set) -> list[list[int]]:
    parent = {int(v): int(v) for v in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        if u in parent and v in parent:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for v in nodes:
        groups.setdefault(find(int(v)), []).append(int(v))
    return [groups[r] for r in sorted(groups)]


def _wire(spec: BenchmarkSpec, rng: np.random.Generator):
    n, mu = spec.n, spec.mu
    x_min = solve_min_degree(spec.d_avg, spec.d_max, spec.tau1)
    deg = np.clip(np.rint(sample_power_law(rng, x_min, spec.d_max, spec.tau1, n)), 1, spec.d_max)
    deg = deg.astype(np.int64)
    if deg.sum() % 2:
        cand = np.flatnonzero(deg < spec.d_max)
        if cand.size:
            deg[cand[int(rng.integers(cand.size))]] += 1
        else:
            deg[0] -= 1

    k_in = np.floor((1.0 - mu) * deg + rng.random(n)).astype(np.int64)
    k_in = np.clip(k_in, 0, deg)

    lo = spec.min_community if spec.min_community is not None else max(2, int(round(x_min)))
    hi = spec.max_community if spec.max_community is not None else max(spec.d_max, lo)
    lo, hi = min(lo, n), min(max(hi, lo), n)
    sizes = _community_sizes(rng, n, lo, hi, spec.tau2)
    # the largest community must be able to host the largest internal degree
    need = min(int(k_in.max()) + 1, n)
    if max(sizes) < need:
        sizes[int(np.argmax(sizes))] = need
        sizes = _rebalance(sizes, n, lo)
    comm = _assign_communities(rng, k_in, sizes)
    sizes_arr = np.bincount(comm, minlength=len(sizes))
    # stubs that do not fit inside a node's community are dropped, not
    # turned into inter-community stubs, so the mixing target is kept
    cap = sizes_arr[comm] - 1
    capped = k_in > cap
    deg[capped] -= k_in[capped] - cap[capped]
    k_in = np.minimum(k_in, cap)

    # each community needs an even number of intra stubs; the odd one out is
    # dropped rather than moved to the inter side
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        if k_in[members].sum() % 2:
            j = members[np.argmax(k_in[members])]
            k_in[j] -= 1
            deg[j] -= 1
    k_out = deg - k_in
    if k_out.sum() % 2:
        j = int(np.argmax(k_out))
        k_out[j] -= 1

    intra_edges: set = set()
    lost = 0
    for c in range(len(sizes)):
        members = np.flatnonzero(comm == c)
        stubs = [int(v) for v in members for _ in range(k_in[v])]
        lost += len(_pair_stubs(rng, stubs, lambda u, v: u != v, intra_edges))

    # join split communities with single intra edges; at mu = 1 no intra
    # edges are wanted at all
    repair = 0
    for c in range(len(sizes) if mu < 1.0 else 0):
        members = np.flatnonzero(comm == c)
        parts = _components_of(members, intra_edges)
        for a_part, b_part in zip(parts, parts[1:]):
            u, v = int(rng.choice(a_part)), int(rng.choice(b_part))
            intra_edges.add((min(u, v), max(u, v)))
            repair += 1

    inter_edges: set = set(intra_edges)
    stubs = [int(v) for v in range(n) for _ in range(k_out[v])]
    lost += len(
        _pair_stubs(rng, stubs, lambda u, v: comm[u] != comm[v], inter_edges)
    )
    inter_edges -= intra_edges

    w = np.zeros((n, n))
    jit = spec.weight_jitter
    for edges, scale in ((intra_edges, spec.intra_weight), (inter_edges, spec.inter_weight)):
        for u, v in sorted(edges):
            wt = scale * (1.0 + jit * (2.0 * rng.random() - 1.0)) if jit else scale
            w[u, v] = w[v, u] = wt
    return w, comm, {"lost_stubs": int(lost), "repair_edges": int(repair)}


def generate(spec: BenchmarkSpec, retain_largest: bool = True) -> LabeledGraph:
    """Draw a labeled benchmark graph; deterministic in ``spec.seed``.

    With ``retain_largest`` (default) only the largest connected component is
    kept, nodes are renumbered in their original order and the number of
    dropped nodes is recorded in ``metadata``. If that leaves a community with
    fewer than two nodes the draw is repeated from the same generator.
    """
    rng = np.random.default_rng(spec.seed)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        w, comm, info = _wire(spec, rng)
        keep = np.arange(spec.n)
        if retain_largest:
            comps = connected_components(SimilarityMatrix(w))
            sizes = comps.sizes()
            keep = comps.members(int(np.argmax(sizes)))
        truth = Clustering.from_labels(comm[keep])
        if truth.sizes().min() >= 2:
            break
    else:
        raise InfeasibleSpec(
            f"could not draw a graph whose retained communities all have >= 2 nodes "
            f"in {MAX_ATTEMPTS} attempts"
        )
    graph = SimilarityMatrix(w[np.ix_(keep, keep)])
    g = LabeledGraph(graph, truth)
    meta = {
        "spec": asdict(spec),
        "n_realized": int(graph.n),
        "dropped_nodes": int(spec.n - graph.n),
        "n_communities": int(truth.k),
        "realized_d_avg": float(np.count_nonzero(graph.w) / graph.n) if graph.n else 0.0,
        "realized_d_max": int(np.count_nonzero(graph.w, axis=1).max()) if graph.n else 0,
        "realized_mu": realized_mixing(g) if graph.w.any() else None,
        "attempts": attempt,
        **info,
    }
    return LabeledGraph(graph, truth, meta)


# ---------------------------------------------------------------------------
# statistics


def realized_mixing(g: LabeledGraph) -> float:
    """Fraction of total edge weight running between communities."""
    w = g.graph.w
    total = np.triu(w, 1).sum()
    if total <= 0:
        raise EmptyGraph("graph has no edges")
    lab = g.truth.labels
    inter = np.triu(np.where(lab[:, None] != lab[None, :], w, 0.0), 1).sum()
    return float(inter / total)


def node_mixing(g: LabeledGraph) -> np.ndarray:
    """Per-node inter-community weight fraction (``nan`` for isolated nodes)."""
    w = g.graph.w
    lab = g.truth.labels
    strength = w.sum(axis=1)
    inter = np.where(lab[:, None] != lab[None, :], w, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(strength > 0, inter / np.where(strength > 0, strength, 1.0), np.nan)


# ---------------------------------------------------------------------------
# LFR files


def read_community_file(path) -> dict[int, int]:
    out: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                msg = "overlapping memberships are not supported" if len(parts) > 2 else (
                    f"expected 'node community', got {s!r}")
                raise ParseError(msg, path, lineno)
            try:
                node, c = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ParseError(str(exc), path, lineno) from None
            if node < 1:
                raise IndexOutOfRange(f"{path}:{lineno}: node ids are 1-indexed, got {node}")
            if node in out:
                raise ParseError(f"node {node} listed twice", path, lineno)
            out[node] = c
    return out


def read_lfr(network_path, community_path) -> LabeledGraph:
    """Load an LFR ``network.dat`` / ``community.dat`` pair.

    Community ids are mapped to ``0..k-1`` in ascending order.
    """
    members = read_community_file(community_path)
    scan = read_edge_list(network_path)
    n = max(max(members, default=0), scan.n)
    graph = scan if scan.n == n else read_edge_list(network_path, n=n)
    missing = [v for v in range(1, n + 1) if v not in members]
    if missing:
        raise MissingCommunity(
            f"{community_path}: no community for node(s) {missing[:10]}"
        )
    ids = sorted(set(members.values()))
    rank = {c: i for i, c in enumerate(ids)}
    truth = Clustering(np.array([rank[members[v]] for v in range(1, n + 1)], dtype=np.int64))
    return LabeledGraph(graph, truth)


def write_lfr(g: LabeledGraph, network_path, community_path, metadata_path=None) -> None:
    write_edge_list(g.graph, network_path)
    Path(community_path).write_text(
        "".join(f"{i + 1}\t{c + 1}\n" for i, c in enumerate(g.truth.tolist())), encoding="utf-8"
    )
    if metadata_path is not None:
        Path(metadata_path).write_text(
            json.dumps(g.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
