import math

import numpy as np
import pytest

from conftest import connected_random_graph, strongly_clustered
from spmgm.eigen import full_spectrum
from spmgm.errors import DegenerateTracking, DimensionMismatch, DisconnectedCluster
from spmgm.graph import Clustering, SimilarityMatrix, complete_graph, disjoint_union, is_connected, laplacian
from spmgm.theory import (
    loglog_slope,
    perturb_first_order,
    perturbation_order_check,
    recovery_bound,
)

T0 = np.diag([1.0, 2.0])
T1 = np.array([[0.0, 1.0], [1.0, 0.0]])
EPS = [0.1, 0.05, 0.025, 0.0125]


def exact_2x2(eps):
    """Lower eigenpair of [[1, e], [e, 2]] in closed form."""
    lam = 1.5 - math.sqrt(0.25 + eps**2)
    v = np.array([eps, lam - 1.0])
    v = v / np.linalg.norm(v)
    return lam, v if v[0] > 0 else -v


def well_gapped(rng, n=10):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    t0 = q @ np.diag(np.arange(1.0, n + 1)) @ q.T
    t0 = (t0 + t0.T) / 2
    b = rng.normal(size=(n, n))
    t1 = (b + b.T) / 2
    return t0, t1 / np.linalg.norm(t1, 2)


def test_diag_example():
    p = perturb_first_order(T0, T1, 0.01, 0)
    assert np.allclose(p.approx_vector, [1.0, -0.01], atol=1e-15)
    assert p.approx_value == pytest.approx(1.0, abs=1e-15)
    lam, v = exact_2x2(0.01)
    assert lam == pytest.approx(1 - 0.01**2, abs=1e-8)
    # closed form eigenvector is (1, -eps) up to O(eps^2)
    assert np.linalg.norm(p.approx_vector / np.linalg.norm(p.approx_vector) - v) < 1e-4


def test_eps_zero_is_exact():
    rng = np.random.default_rng(0)
    t0, t1 = well_gapped(rng)
    spec = full_spectrum(t0)
    for i in range(10):
        p = perturb_first_order(t0, t1, 0.0, i)
        assert np.array_equal(p.approx_vector, spec.vectors[:, i])
        assert p.approx_value == spec.values[i]


def test_commuting_perturbation():
    t0 = np.diag([1.0, 3.0, 7.0])
    t1 = np.diag([2.0, -1.0, 5.0])
    for i in range(3):
        p = perturb_first_order(t0, t1, 0.1, i)
        assert np.allclose(p.approx_vector, np.eye(3)[i], atol=1e-15)
        assert p.approx_value == pytest.approx(t0[i, i] + 0.1 * t1[i, i], abs=1e-14)


def test_degenerate_terms_excluded():
    # a repeated eigenvalue must not produce a division by zero
    t0 = np.diag([1.0, 1.0, 3.0])
    t1 = np.ones((3, 3))
    p = perturb_first_order(t0, t1, 0.01, 0)
    assert np.all(np.isfinite(p.approx_vector))


def test_norm_close_to_one():
    rng = np.random.default_rng(3)
    t0, t1 = well_gapped(rng)
    for eps in EPS:
        for i in range(10):
            nrm = np.linalg.norm(perturb_first_order(t0, t1, eps, i).approx_vector)
            assert 1 - eps <= nrm <= 1 + 2 * eps


def test_dimension_errors():
    with pytest.raises(DimensionMismatch):
        perturb_first_order(np.eye(2), np.eye(3), 0.1, 0)
    with pytest.raises(DimensionMismatch):
        perturb_first_order(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), 0.1, 0)
    with pytest.raises(DimensionMismatch):
        perturb_first_order(np.eye(2), np.eye(2), 0.1, 2)


def test_order_check_diag_ratio_four():
    errs = [e for _, e in perturbation_order_check(T0, T1, [0.1, 0.05, 0.025], 0)]
    for a, b in zip(errs, errs[1:]):
        assert 3.5 <= a / b <= 4.5
    # cross-check the first entry against the closed form
    _, v = exact_2x2(0.1)
    approx = perturb_first_order(T0, T1, 0.1, 0).approx_vector
    assert errs[0] == pytest.approx(min(np.linalg.norm(approx - v), np.linalg.norm(approx + v)), rel=1e-8)


def test_order_check_zero_eps():
    assert perturbation_order_check(T0, T1, [0.0, 0.0], 0) == [(0.0, 0.0), (0.0, 0.0)]


def test_order_check_random_slope():
    rng = np.random.default_rng(11)
    t0, t1 = well_gapped(rng)
    assert loglog_slope(perturbation_order_check(t0, t1, EPS, 4)) >= 1.8


def test_order_check_degenerate_tracking():
    with pytest.raises(DegenerateTracking):
        perturbation_order_check(np.eye(2), np.zeros((2, 2)), [0.1], 0)


# --- recovery bound ---------------------------------------------------------

def test_bound_three_cliques(three_cliques):
    g, truth = three_cliques
    r = recovery_bound(g, truth)
    assert r.rho1 == pytest.approx(2.0, rel=1e-12)
    assert np.allclose(r.lambda2, 4.0, rtol=1e-12)
    assert np.allclose(r.lhs_per_m, 1.5, rtol=1e-12)
    assert np.allclose(r.rhs_per_m, 0.125, rtol=1e-15)
    assert not r.guaranteed


def heavy_pair():
    w = disjoint_union(complete_graph(4, 100.0), complete_graph(4, 100.0)).w.copy()
    w[3, 4] = w[4, 3] = 0.01
    return SimilarityMatrix(w), Clustering(np.repeat([0, 1], 4))


def test_bound_heavy_pair():
    a, truth = heavy_pair()
    r = recovery_bound(a, truth)
    assert r.rho1 == pytest.approx(0.02, rel=1e-12)
    assert np.allclose(r.lambda2, 400.0, rtol=1e-12)
    assert np.allclose(r.lhs_per_m, 1.5e-4, rtol=1e-10)
    assert r.guaranteed
    assert r.epsilon == pytest.approx(0.02 / r.rho0)


def test_bound_single_cluster(three_cliques):
    g, _ = three_cliques
    r = recovery_bound(g, Clustering(np.zeros(12, dtype=np.int64)))
    assert r.rho1 == 0.0 and r.lhs_per_m == [0.0] and r.guaranteed


def test_bound_no_intra_edges():
    a = complete_graph(2)
    r = recovery_bound(a, Clustering(np.array([0, 1])))
    assert r.rho0 == 0.0 and math.isinf(r.epsilon) and not r.guaranteed
    assert r.to_dict()["epsilon"] is None


def test_bound_disconnected_cluster():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = w[2, 3] = w[3, 2] = 1.0
    w[1, 2] = w[2, 1] = 1.0
    with pytest.raises(DisconnectedCluster):
        recovery_bound(SimilarityMatrix(w), Clustering(np.array([0, 1, 1, 0])))


def test_bound_guarantee_flag_matches_inequality():
    rng = np.random.default_rng(21)
    for _ in range(30):
        a, truth = strongly_clustered(rng, intra_scale=float(rng.choice([1.0, 10.0, 1000.0])),
                                      inter=(0.01, 1.0))
        r = recovery_bound(a, truth)
        assert r.guaranteed == all(l < h for l, h in zip(r.lhs_per_m, r.rhs_per_m))
        assert r.rho1 >= 0 and r.rho0 > 0 and min(r.lambda2) > 0


def test_bound_scale_invariance():
    rng = np.random.default_rng(8)
    for _ in range(10):
        a, truth = strongly_clustered(rng, intra_scale=5.0, inter=(0.1, 1.0))
        r = recovery_bound(a, truth)
        for s in (0.001, 7.0, 1e4):
            rs = recovery_bound(SimilarityMatrix(a.w * s), truth)
            assert np.allclose(rs.lhs_per_m, r.lhs_per_m, rtol=1e-8, atol=1e-15)
            assert rs.guaranteed == r.guaranteed


def test_indicator_deviation_tracks_bound():
    # max-norm distance of the cluster indicators from the low eigenspace
    # stays within the bound's left-hand side plus a second-order term
    rng = np.random.default_rng(13)
    excess = []
    for _ in range(30):
        a, truth = strongly_clustered(rng, intra_scale=50.0, inter=(1e-3, 1e-2))
        assert is_connected(a)
        r = recovery_bound(a, truth)
        for dev, lhs in zip(r.deviation_inf, r.lhs_per_m):
            excess.append((dev - lhs) / r.epsilon**2)
    c_fit = max(excess)
    assert c_fit <= 1.0


def test_bound_report_json_shape():
    a, truth = heavy_pair()
    d = recovery_bound(a, truth).to_dict()
    assert set(d) == {"rho1", "rho0", "epsilon", "lambda2", "sizes", "lhs_per_m", "rhs_per_m",
                      "guaranteed", "diagnostics"}
    assert d["sizes"] == [4, 4]
