import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tvdual import graphs
from tvdual.graphs import GraphSchedule


def test_full_probability_gives_complete_graph():
    e = graphs.sample_edges(GraphSchedule(n=3, pi=1.0, seed=77), 0)
    assert e.tolist() == [[0, 1], [0, 2], [1, 2]]


def test_zero_probability_gives_empty_graph():
    assert graphs.sample_edges(GraphSchedule(n=3, pi=0.0, seed=5), 0).shape == (0, 2)


def test_mean_edge_count_matches_binomial():
    sch = GraphSchedule(n=10, pi=0.1, seed=3)
    counts = np.array([len(graphs.sample_edges(sch, k)) for k in range(10_000)])
    sigma = np.sqrt(45 * 0.1 * 0.9)
    assert abs(counts.mean() - 4.5) <= 3 * sigma / 100


def test_edges_independent_across_iterations():
    sch = GraphSchedule(n=6, pi=0.5, seed=1)
    sets = {tuple(map(tuple, graphs.sample_edges(sch, k))) for k in range(50)}
    assert len(sets) > 40


def test_schedule_is_stateless_in_k():
    sch = GraphSchedule(n=8, pi=0.4, seed=9)
    forward = [graphs.sample_edges(sch, k) for k in range(20)]
    for k in reversed(range(20)):
        np.testing.assert_array_equal(graphs.sample_edges(sch, k), forward[k])


def test_schedule_rejects_bad_probability():
    with pytest.raises(ValueError):
        GraphSchedule(n=3, pi=1.5)
    with pytest.raises(ValueError):
        GraphSchedule(n=1)


def test_negative_iteration_rejected():
    with pytest.raises(ValueError):
        graphs.sample_edges(GraphSchedule(n=3), -1)


def test_scripted_schedule_repeats():
    sch = GraphSchedule.scripted(3, [[(0, 1)], [(2, 1)]])
    assert graphs.sample_edges(sch, 0).tolist() == [[0, 1]]
    assert graphs.sample_edges(sch, 3).tolist() == [[1, 2]]


def test_scripted_schedule_from_json(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps([[[0, 1]], [[1, 2]]]))
    sch = GraphSchedule.from_json(f)
    assert sch.n == 3 and len(sch.edge_sets) == 2
    f.write_text(json.dumps({"n": 5, "edge_sets": [[[0, 4]]]}))
    assert GraphSchedule.from_json(f).n == 5


def test_canonical_edges_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        graphs.canonical_edges([(1, 1)])


def test_canonical_edges_normalises():
    assert graphs.canonical_edges([(2, 0), (0, 2), (1, 0)]).tolist() == [[0, 1], [0, 2]]


# Metropolis-Hastings

def test_mh_empty_graph_is_identity():
    np.testing.assert_array_equal(graphs.metropolis_weights([], 3), np.eye(3))


def test_mh_path_hand_values():
    # degrees (1, 2, 1): every edge weight 1/2, middle node keeps nothing
    W = graphs.metropolis_weights([(0, 1), (1, 2)], 3)
    expected = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])
    np.testing.assert_allclose(W, expected, atol=1e-15)


def test_mh_single_edge_self_weighted_variant():
    W = graphs.metropolis_weights([(0, 1)], 2, variant="max+1")
    np.testing.assert_allclose(W, np.full((2, 2), 0.5), atol=1e-15)


def test_mh_single_edge_plain_variant_swaps():
    W = graphs.metropolis_weights([(0, 1)], 2, variant="max")
    np.testing.assert_allclose(W, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)


def test_mh_complete_graph_self_weighted_is_averaging():
    n = 6
    W = graphs.metropolis_weights(graphs.sample_edges(GraphSchedule(n, 1.0), 0), n, "max+1")
    np.testing.assert_allclose(W, np.full((n, n), 1 / n), atol=1e-15)


def test_mh_unknown_variant():
    with pytest.raises(ValueError):
        graphs.metropolis_weights([(0, 1)], 2, variant="min")


@given(n=st.integers(2, 15), pi=st.floats(0, 1), seed=st.integers(0, 2**32), k=st.integers(0, 1000),
       variant=st.sampled_from(["max", "max+1"]))
def test_mh_properties(n, pi, seed, k, variant):
    e = graphs.sample_edges(GraphSchedule(n, pi, seed), k)
    W = graphs.metropolis_weights(e, n, variant)
    np.testing.assert_allclose(W.sum(0), 1.0, atol=1e-12)
    np.testing.assert_allclose(W.sum(1), 1.0, atol=1e-12)
    np.testing.assert_array_equal(W, W.T)
    assert W.min() >= 0.0 and W.max() <= 1.0
    graphs.check_mixing(W, e)


def test_check_mixing_rejects():
    with pytest.raises(graphs.InvalidMixingMatrixError, match="invalid mixing matrix"):
        graphs.check_mixing(np.array([[0.6, 0.5], [0.4, 0.5]]))
    with pytest.raises(graphs.InvalidMixingMatrixError, match="edge set"):
        graphs.check_mixing(np.full((3, 3), 1 / 3), edges=[(0, 1)])


# Laplacian

def test_laplacian_empty_graph():
    np.testing.assert_array_equal(graphs.laplacian([], 4), np.zeros((4, 4)))


def test_laplacian_path():
    np.testing.assert_array_equal(graphs.laplacian([(0, 1), (1, 2)], 3),
                                  [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_laplacian_complete_three():
    Lap = graphs.laplacian([(0, 1), (0, 2), (1, 2)], 3)
    np.testing.assert_array_equal(Lap, 3 * np.eye(3) - np.ones((3, 3)))


def test_laplacian_kernel_on_connected_graph():
    Lap = graphs.laplacian([(0, 1), (1, 2), (2, 3)], 4)
    ev = np.linalg.eigvalsh(Lap)
    assert abs(ev[0]) < 1e-12 and ev[1] > 1e-6
    np.testing.assert_allclose(Lap @ np.ones(4), 0.0)


# contraction

def test_delta_complete_graph():
    W = graphs.averaging_matrix(5)
    assert graphs.contraction_delta([W], 1).delta <= 1e-12


def test_delta_empty_graph():
    assert abs(graphs.contraction_delta([np.eye(4)], 1).delta - 1.0) <= 1e-12


def test_delta_path_matches_eigen_oracle():
    W = graphs.metropolis_weights([(0, 1), (1, 2)], 3)
    ev = np.sort(np.linalg.eigvalsh(W))
    np.testing.assert_allclose(ev, [-0.5, 0.5, 1.0], atol=1e-14)
    # symmetric W: sigma_max of the centred matrix is the second largest |eigenvalue|
    assert abs(graphs.contraction_delta([W], 1).delta - 0.5) <= 1e-10


def test_delta_insufficient_history():
    with pytest.raises(ValueError, match="insufficient history"):
        graphs.contraction_delta([np.eye(3)], 2)


def test_window_product_order():
    A = graphs.metropolis_weights([(0, 1)], 3, "max+1")
    C = graphs.metropolis_weights([(1, 2)], 3, "max+1")
    np.testing.assert_allclose(graphs.window_product([A, C], 1, 2), C @ A)


@given(seed=st.integers(0, 10_000), B=st.integers(1, 4), pi=st.floats(0, 1))
def test_delta_in_unit_interval(seed, B, pi):
    sch = GraphSchedule(6, pi, seed)
    mats = [graphs.metropolis_weights(graphs.sample_edges(sch, k), 6) for k in range(8)]
    d = graphs.contraction_delta(mats, B).delta
    assert -1e-12 <= d <= 1 + 1e-12


@given(seed=st.integers(0, 10_000), B=st.integers(1, 3))
def test_consensus_contraction(seed, B):
    n = 7
    sch = GraphSchedule(n, 0.4, seed)
    mats = [graphs.metropolis_weights(graphs.sample_edges(sch, k), n) for k in range(B + 5)]
    est = graphs.contraction_delta(mats, B)
    P = np.eye(n) - graphs.averaging_matrix(n)
    rng = np.random.default_rng(seed)
    for idx, k in enumerate(range(B - 1, len(mats))):
        WB = graphs.window_product(mats, k, B)
        for b in rng.normal(size=(100, n)):
            assert np.linalg.norm(P @ WB @ b) <= est.per_k[idx] * np.linalg.norm(P @ b) + 1e-12


# connectivity

def test_alternating_edges_connected_over_two_steps():
    sch = GraphSchedule.scripted(3, [[(0, 1)], [(1, 2)]])
    assert graphs.window_connected(sch, 1, 2)
    assert not any(graphs.window_connected(sch, k, 1) for k in range(6))
    assert graphs.smallest_connected_window(sch, 10) == 2


def test_complete_graph_connected_each_step():
    sch = GraphSchedule(5, 1.0)
    assert all(graphs.window_connected(sch, k, 1) for k in range(5))


def test_window_precondition():
    with pytest.raises(ValueError):
        graphs.window_connected(GraphSchedule(3), 0, 2)
