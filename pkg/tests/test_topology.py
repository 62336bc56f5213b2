import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fxc.errors import (
    DimensionMismatch,
    IsolatedNetwork,
    NegativeWeight,
    NonSquare,
    NonzeroDiagonal,
    ZeroCoupling,
)
from fxc.topology import build_topology, consensus_error

A_BENCH = [[0, 0, 0, 0], [1, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
T_BENCH = [1, 0, 0, 1]


def test_benchmark_coupling():
    topo = build_topology(A_BENCH, T_BENCH)
    np.testing.assert_array_equal(topo.coupling, [1, 2, 1, 2])


def test_benchmark_laplacian():
    topo = build_topology(A_BENCH, T_BENCH)
    expected = [[0, 0, 0, 0], [-1, 2, 0, -1], [-1, 0, 1, 0], [0, -1, 0, 1]]
    np.testing.assert_array_equal(topo.laplacian, expected)


def test_empty_graph():
    topo = build_topology(np.zeros((2, 2)), [1, 1])
    np.testing.assert_array_equal(topo.laplacian, np.zeros((2, 2)))
    np.testing.assert_array_equal(topo.coupling, [1, 1])


def test_neighbors():
    topo = build_topology(A_BENCH, T_BENCH)
    assert list(topo.neighbors(1)) == [0, 3]
    assert list(topo.neighbors(0)) == []


def test_arrays_read_only():
    topo = build_topology(A_BENCH, T_BENCH)
    with pytest.raises(ValueError):
        topo.laplacian[0, 0] = 1.0


@pytest.mark.parametrize(
    "adj, gains, err",
    [
        ([[0, 1, 0], [1, 0, 0]], [1, 1], NonSquare),
        ([[0, -1], [1, 0]], [1, 1], NegativeWeight),
        ([[1, 0], [1, 0]], [1, 1], NonzeroDiagonal),
        ([[0, 0], [1, 0]], [0, 0], IsolatedNetwork),
        ([[0, 0], [1, 0]], [0, 1], ZeroCoupling),
        ([[0, 1], [1, 0]], [1, 1, 1], DimensionMismatch),
        ([[0, 1], [1, 0]], [-1, 1], NegativeWeight),
    ],
)
def test_rejects_invalid(adj, gains, err):
    with pytest.raises(err):
        build_topology(adj, gains)


def test_consensus_examples():
    topo = build_topology(A_BENCH, T_BENCH)
    np.testing.assert_allclose(consensus_error([1.0] * 4, 0.0, topo), [1, 0, 0, 1])
    np.testing.assert_allclose(consensus_error([0.3] * 4, 0.3, topo), np.zeros(4))
    single = build_topology([[0]], [1])
    np.testing.assert_allclose(consensus_error([2.0], 0.5, single), [1.5])


def test_consensus_dimension_mismatch():
    topo = build_topology(A_BENCH, T_BENCH)
    with pytest.raises(DimensionMismatch):
        consensus_error([1.0, 2.0], 0.0, topo)


def _loop_error(adj, gains, y, y0):
    # per-agent summation oracle
    N = len(y)
    out = []
    for i in range(N):
        acc = sum(adj[i][j] * (y[i] - y[j]) for j in range(N))
        out.append(acc + gains[i] * (y[i] - y0))
    return np.array(out)


@st.composite
def graphs(draw):
    N = draw(st.integers(1, 6))
    weights = st.floats(0, 5, allow_nan=False)
    adj = draw(arrays(float, (N, N), elements=weights))
    np.fill_diagonal(adj, 0.0)
    gains = draw(arrays(float, N, elements=weights))
    gains[draw(st.integers(0, N - 1))] += 1.0
    # every follower needs a positive coupling strength
    gains[adj.sum(axis=1) + gains == 0] = 1.0
    return adj, gains


finite = st.floats(-100, 100, allow_nan=False)


@given(graphs(), st.data())
def test_matrix_form_matches_loop(g, data):
    adj, gains = g
    N = adj.shape[0]
    topo = build_topology(adj, gains)
    y = data.draw(arrays(float, N, elements=finite))
    y0 = data.draw(finite)
    np.testing.assert_allclose(consensus_error(y, y0, topo), _loop_error(adj, gains, y, y0), rtol=1e-12, atol=1e-9)
    matrix = (topo.laplacian + np.diag(gains)) @ y - gains * y0
    np.testing.assert_allclose(consensus_error(y, y0, topo), matrix, atol=1e-9)


@given(graphs())
def test_laplacian_rows_sum_to_zero(g):
    topo = build_topology(*g)
    np.testing.assert_allclose(topo.laplacian @ np.ones(topo.n_agents), 0.0, atol=1e-12)


@given(graphs(), st.data(), st.floats(-10, 10, allow_nan=False))
def test_consensus_error_homogeneous(g, data, scale):
    topo = build_topology(*g)
    y = data.draw(arrays(float, topo.n_agents, elements=finite))
    y0 = data.draw(finite)
    np.testing.assert_allclose(
        consensus_error(scale * y, scale * y0, topo), scale * consensus_error(y, y0, topo), atol=1e-8
    )
