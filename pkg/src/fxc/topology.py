"""Directed leader-follower communication graph."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IsolatedNetwork,
    NegativeWeight,
    NonSquare,
    NonzeroDiagonal,
    ZeroCoupling,
)


@dataclass(frozen=True, eq=False)
class Topology:
    """Follower graph plus leader pinning.

    ``adjacency[i, j]`` is the weight of the edge carrying information from
    follower ``j`` to follower ``i``. ``leader_gains[i]`` is the pinning gain
    from the leader to follower ``i`` (zero when ``i`` cannot see the leader).

    Attributes
    ----------
    adjacency, leader_gains : ndarray
        Construction inputs.
    in_degree : ndarray
        Row sums of ``adjacency``.
    laplacian : ndarray
        ``diag(in_degree) - adjacency``.
    coupling : ndarray
        Per-follower coupling strength, row sum of ``adjacency`` plus the
        leader gain. Used as a divisor by the first backstepping stage.
    """

    adjacency: np.ndarray
    leader_gains: np.ndarray
    in_degree: np.ndarray
    laplacian: np.ndarray
    coupling: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        """Indices ``j`` with a nonzero edge ``j -> i``."""
        return np.flatnonzero(self.adjacency[i])


def build_topology(adjacency, leader_gains) -> Topology:
    """Validate the graph and derive Laplacian and coupling strengths."""
    adj = np.array(adjacency, dtype=float)
    gains = np.array(leader_gains, dtype=float).reshape(-1)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise NonSquare(f"adjacency must be square, got shape {adj.shape}")
    n = adj.shape[0]
    if gains.shape != (n,):
        raise DimensionMismatch(f"leader_gains must have length {n}, got {gains.shape[0]}")
    if np.any(adj < 0):
        raise NegativeWeight("adjacency entries must be nonnegative")
    if np.any(gains < 0):
        raise NegativeWeight("leader gains must be nonnegative")
    if np.any(np.diag(adj) != 0):
        raise NonzeroDiagonal("adjacency diagonal must be zero (no self loops)")
    if not np.any(gains > 0):
        raise IsolatedNetwork("no follower is pinned to the leader")

    in_degree = adj.sum(axis=1)
    laplacian = np.diag(in_degree) - adj
    coupling = in_degree + gains
    zero = np.flatnonzero(coupling == 0)
    if zero.size:
        raise ZeroCoupling(f"followers {zero.tolist()} have zero coupling strength")

    for arr in (adj, gains, in_degree, laplacian, coupling):
        arr.setflags(write=False)
    return Topology(adj, gains, in_degree, laplacian, coupling)


def consensus_error(outputs, leader_output: float, topo: Topology) -> np.ndarray:
    """Local neighborhood tracking error of every follower.

    For follower ``i`` this is
    ``sum_j adjacency[i, j] * (y_i - y_j) + leader_gains[i] * (y_i - y0)``.
    """
    y = np.asarray(outputs, dtype=float)
    if y.shape != (topo.n_agents,):
        raise DimensionMismatch(f"expected {topo.n_agents} outputs, got shape {y.shape}")
    return topo.laplacian @ y + topo.leader_gains * (y - leader_output)
