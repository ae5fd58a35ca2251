import json

import numpy as np
import pytest

from conftest import bridged
from spmgm.benchgen import (
    BenchmarkSpec,
    LabeledGraph,
    generate,
    node_mixing,
    power_law_mean,
    read_lfr,
    realized_mixing,
    sample_power_law,
    solve_min_degree,
    write_lfr,
)
from spmgm.errors import EmptyGraph, IndexOutOfRange, InfeasibleSpec, MissingCommunity, ParseError
from spmgm.graph import Clustering, SimilarityMatrix, connected_components, is_connected
from spmgm.metrics import ars

BASE_SPEC = BenchmarkSpec(n=50, d_avg=5, d_max=20, mu=0.1, seed=0)


def test_spec_validation():
    for bad in (dict(mu=-0.1), dict(mu=1.5), dict(d_avg=0.5), dict(d_max=50), dict(d_avg=30)):
        with pytest.raises(InfeasibleSpec):
            BASE_SPEC.with_(**bad)


def test_power_law_helpers():
    x = solve_min_degree(5, 20, 2.0)
    assert power_law_mean(x, 20, 2.0) == pytest.approx(5.0, rel=1e-10)
    # tau = 2: mean = ln(hi/lo) / (1/lo - 1/hi)
    assert power_law_mean(2.0, 8.0, 2.0) == pytest.approx(np.log(4.0) / (0.5 - 0.125))
    s = sample_power_law(np.random.default_rng(0), x, 20, 2.0, 200000)
    assert s.min() >= x and s.max() <= 20
    assert s.mean() == pytest.approx(5.0, rel=0.02)


def test_generate_is_deterministic():
    a, b = generate(BASE_SPEC), generate(BASE_SPEC)
    assert a.graph == b.graph and a.truth == b.truth and a.metadata == b.metadata
    assert generate(BASE_SPEC.with_(seed=1)).graph != a.graph


def test_generate_reference_setting():
    g = generate(BASE_SPEC)
    assert is_connected(g.graph)
    assert g.truth.sizes().min() >= 2
    assert abs(g.metadata["realized_d_avg"] - 5) <= 0.5
    assert abs(realized_mixing(g) - 0.1) <= 0.05
    assert g.metadata["n_realized"] + g.metadata["dropped_nodes"] == 50
    assert g.metadata["realized_d_max"] <= 20


@pytest.mark.parametrize("mu", [0.05, 0.1, 0.2, 0.3, 0.4, 0.5])
def test_mixing_on_average(mu):
    ms = [realized_mixing(generate(BASE_SPEC.with_(mu=mu, seed=s))) for s in range(50)]
    assert abs(np.mean(ms) - mu) <= 0.05


def test_mean_degree_on_average():
    ds = [generate(BASE_SPEC.with_(seed=s)).metadata["realized_d_avg"] for s in range(50)]
    assert abs(np.mean(ds) - 5) <= 0.5


def test_mu_zero_components_are_communities():
    for s in range(5):
        g = generate(BASE_SPEC.with_(mu=0.0, seed=s), retain_largest=False)
        assert realized_mixing(g) == 0.0
        assert ars(connected_components(g.graph), g.truth) == 1.0


def test_mu_one_two_communities():
    spec = BenchmarkSpec(n=20, d_avg=3, d_max=8, mu=1.0, seed=1, min_community=10, max_community=10)
    g = generate(spec, retain_largest=False)
    assert g.truth.k == 2
    assert realized_mixing(g) == 1.0
    nm = node_mixing(g)
    assert np.all(nm[~np.isnan(nm)] == 1.0)


def test_weights_and_jitter():
    g = generate(BASE_SPEC.with_(intra_weight=2.0, inter_weight=0.5))
    lab = g.truth.labels
    same = lab[:, None] == lab[None, :]
    assert set(np.unique(g.graph.w[same & (g.graph.w > 0)])) == {2.0}
    assert set(np.unique(g.graph.w[~same & (g.graph.w > 0)])) == {0.5}
    j = generate(BASE_SPEC.with_(weight_jitter=0.2))
    nz = j.graph.w[j.graph.w > 0]
    assert nz.min() >= 0.8 and nz.max() <= 1.2 and np.unique(nz).size > 1


def test_realized_mixing_examples(three_cliques):
    g, truth = three_cliques
    assert realized_mixing(LabeledGraph(g, truth)) == pytest.approx(1 / 7, abs=1e-15)
    assert realized_mixing(LabeledGraph(g, Clustering(np.arange(12)))) == 1.0
    with pytest.raises(EmptyGraph):
        realized_mixing(LabeledGraph(SimilarityMatrix(np.zeros((2, 2))), Clustering(np.array([0, 1]))))


def test_read_lfr_single_edge(tmp_path):
    net, com = tmp_path / "network.dat", tmp_path / "community.dat"
    net.write_text("1 2 1.0\n2 1 1.0\n")
    com.write_text("1 1\n2 1\n")
    g = read_lfr(net, com)
    assert g.graph.w.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert g.truth.tolist() == [0, 0]


def test_read_lfr_two_triangles(tmp_path):
    net, com = tmp_path / "network.dat", tmp_path / "community.dat"
    net.write_text("1\t2\t1\n1\t3\t1\n2\t3\t1\n4\t5\t1\n4\t6\t1\n5\t6\t1\n3\t4\t0.1\n")
    com.write_text("1\t7\n2\t7\n3\t7\n4\t9\n5\t9\n6\t9\n")
    g = read_lfr(net, com)
    a, truth = bridged(3, 0.1)
    assert g.graph == a and g.truth == truth


def test_lfr_round_trip(tmp_path):
    g = generate(BASE_SPEC.with_(weight_jitter=0.3))
    paths = [tmp_path / f for f in ("network.dat", "community.dat", "meta.json")]
    write_lfr(g, *paths)
    back = read_lfr(paths[0], paths[1])
    assert back.graph == g.graph and back.truth == g.truth
    assert json.loads(paths[2].read_text())["n_realized"] == g.graph.n


def test_lfr_errors(tmp_path):
    net, com = tmp_path / "network.dat", tmp_path / "community.dat"
    net.write_text("1 2\n2 3\n")
    com.write_text("1 1\n2 1\n")
    with pytest.raises(MissingCommunity):
        read_lfr(net, com)
    com.write_text("1 1\n2 1 2\n3 1\n")
    with pytest.raises(ParseError, match=":2"):
        read_lfr(net, com)
    com.write_text("0 1\n")
    with pytest.raises(IndexOutOfRange):
        read_lfr(net, com)
    com.write_text("1 1\n2 1\n3 2\n")
    net.write_text("1 2\nfoo 3\n")
    with pytest.raises(ParseError, match=":2"):
        read_lfr(net, com)
