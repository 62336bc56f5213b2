"""Output-feedback state observer and its Lyapunov certificate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGains,
    IllConditioned,
    NonFiniteState,
    NonSquare,
    NotHurwitz,
)

RESIDUAL_TOL = 1e-8


def companion_matrix(gains) -> np.ndarray:
    """Shift matrix with ones on the superdiagonal and ``gains`` in column 0."""
    mu = np.asarray(gains, dtype=float).reshape(-1)
    n = mu.size
    if n == 0:
        raise EmptyGains("observer needs at least one gain")
    chi = np.eye(n, k=1)
    chi[:, 0] += mu
    return chi


def is_hurwitz(matrix, tol_margin: float = 1e-9) -> bool:
    """True iff every eigenvalue has real part below ``-tol_margin``."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    return bool(np.all(np.linalg.eigvals(m).real < -tol_margin))


@dataclass(frozen=True, eq=False)
class ObserverGains:
    gains: np.ndarray
    companion: np.ndarray

    @classmethod
    def from_gains(cls, gains) -> "ObserverGains":
        mu = np.asarray(gains, dtype=float).reshape(-1)
        return cls(mu, companion_matrix(mu))

    @property
    def order(self) -> int:
        return self.gains.size


@dataclass(frozen=True, eq=False)
class LyapunovCertificate:
    h_matrix: np.ndarray
    rho: float
    residual: float

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.h_matrix).min())


def observer_derivative(estimate, control: float, measured_output: float, gains: ObserverGains) -> np.ndarray:
    """Time derivative of the state estimate.

    Stage ``m < n`` integrates the next estimate, the last stage integrates
    the applied control; every stage subtracts ``mu_m * (y - y_hat)``.
    """
    xh = np.asarray(estimate, dtype=float)
    if xh.shape != (gains.order,):
        raise DimensionMismatch(f"estimate must have length {gains.order}, got shape {xh.shape}")
    if not np.all(np.isfinite(xh)):
        raise NonFiniteState("observer estimate is not finite")
    innovation = measured_output - xh[0]
    out = np.empty_like(xh)
    out[:-1] = xh[1:]
    out[-1] = control
    return out - gains.gains * innovation


def _sym_basis(n):
    """Index pairs (i, j), i <= j, for the independent entries of a symmetric matrix."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def solve_lyapunov(chi, rho: float) -> LyapunovCertificate:
    """Solve ``chi.T @ H + H @ chi = -rho * I`` for symmetric ``H``.

    The unknowns are the ``n(n+1)/2`` upper-triangular entries of ``H``; each
    equation is one upper-triangular entry of the left-hand side.
    """
    chi = np.asarray(chi, dtype=float)
    if chi.ndim != 2 or chi.shape[0] != chi.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {chi.shape}")
    if not rho > 0:
        raise ValueError("rho must be positive")
    if not is_hurwitz(chi):
        raise NotHurwitz("matrix is not Hurwitz; no positive-definite solution exists")

    n = chi.shape[0]
    pairs = _sym_basis(n)
    col = {p: k for k, p in enumerate(pairs)}

    def idx(i, j):
        return col[(i, j) if i <= j else (j, i)]

    # (chi^T H + H chi)[i, j] = sum_k chi[k, i] H[k, j] + H[i, k] chi[k, j]
    system = np.zeros((len(pairs), len(pairs)))
    rhs = np.zeros(len(pairs))
    for row, (i, j) in enumerate(pairs):
        for k in range(n):
            system[row, idx(k, j)] += chi[k, i]
            system[row, idx(i, k)] += chi[k, j]
        rhs[row] = -rho if i == j else 0.0
    sol = np.linalg.solve(system, rhs)

    h = np.empty((n, n))
    for k, (i, j) in enumerate(pairs):
        h[i, j] = h[j, i] = sol[k]
    residual = float(np.linalg.norm(chi.T @ h + h @ chi + rho * np.eye(n), np.inf))
    if residual > RESIDUAL_TOL:
        raise IllConditioned(f"Lyapunov residual {residual:.3e} exceeds tolerance")
    if np.linalg.eigvalsh(h).min() <= 0:
        raise IllConditioned("Lyapunov solution is not positive definite")
    return LyapunovCertificate(h, float(rho), residual)


def assumption_margin(chi, h_matrix) -> float:
    """Largest eigenvalue of ``H chi + chi^T H + (2 + n) I``.

    The analysis-side requirement adds an unspecified nonnegative constant to
    ``2 + n``; a negative margin is the headroom available for it.
    """
    chi = np.asarray(chi, dtype=float)
    n = chi.shape[0]
    m = h_matrix @ chi + chi.T @ h_matrix + (2 + n) * np.eye(n)
    return float(np.linalg.eigvalsh((m + m.T) / 2).max())
