"""Gaussian radial-basis-function networks.

The controller never trains weights. It only needs the basis-norm gain
``1 + ||basis(Z)||`` that scales the adaptive norm-bound estimate, so
:func:`evaluate` exists for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch


@dataclass(frozen=True, eq=False)
class RbfNetwork:
    centers: np.ndarray  # (m, d)
    widths: np.ndarray  # (m,)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        widths = np.asarray(self.widths, dtype=float).reshape(-1)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        m = centers.shape[0]
        if m < 1 or centers.shape[1] < 1:
            raise ConfigInvalid("an RBF network needs at least one center of dimension >= 1")
        if widths.shape != (m,):
            raise DimensionMismatch(f"expected {m} widths, got {widths.shape[0]}")
        if weights.shape != (m,):
            raise DimensionMismatch(f"expected {m} weights, got {weights.shape[0]}")
        if np.any(widths <= 0):
            raise ConfigInvalid("RBF widths must be strictly positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "weights", weights)
        # cached for the hot path in the simulator
        object.__setattr__(self, "_inv_w2", 1.0 / widths**2)

    @property
    def n_nodes(self) -> int:
        return self.centers.shape[0]

    @property
    def input_dim(self) -> int:
        return self.centers.shape[1]


def basis(net: RbfNetwork, z) -> np.ndarray:
    """Gaussian activations ``exp(-|z - c_i|^2 / w_i^2)``, each in (0, 1]."""
    z = np.asarray(z, dtype=float)
    if z.shape != (net.input_dim,):
        raise DimensionMismatch(f"input must have dimension {net.input_dim}, got shape {z.shape}")
    diff = net.centers - z
    return np.exp(-np.einsum("ij,ij->i", diff, diff) * net._inv_w2)


def gain_magnitude(net: RbfNetwork, z) -> float:
    """``1 + ||basis(net, z)||``, bounded in (1, 1 + sqrt(m)]."""
    return 1.0 + math.sqrt(float(np.dot(b := basis(net, z), b)))


def evaluate(net: RbfNetwork, z) -> float:
    return float(net.weights @ basis(net, z))


def lattice_network(
    dim: int,
    nodes: int = 16,
    low: float = -0.5,
    high: float = 0.5,
    width: float | None = None,
    seed: int = 0,
) -> RbfNetwork:
    """Network with centers drawn from an even lattice over ``[low, high]^dim``.

    The lattice has ``k = ceil(nodes ** (1/dim))`` points per axis. When
    ``k**dim`` exceeds ``nodes`` a seeded subset of lattice points is kept.
    The default width is twice the lattice spacing; weights are zero.
    """
    if dim < 1 or nodes < 1:
        raise ConfigInvalid("dim and nodes must be >= 1")
    if not high > low:
        raise ConfigInvalid("lattice range must satisfy high > low")
    k = max(2, math.ceil(round(nodes ** (1.0 / dim), 9))) if nodes > 1 else 1
    axis = np.linspace(low, high, k) if k > 1 else np.array([(low + high) / 2])
    grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    if grid.shape[0] > nodes:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(grid.shape[0], size=nodes, replace=False))
        grid = grid[keep]
    if width is None:
        spacing = (high - low) / (k - 1) if k > 1 else high - low
        width = 2.0 * spacing
    m = grid.shape[0]
    return RbfNetwork(grid, np.full(m, float(width)), np.zeros(m))
