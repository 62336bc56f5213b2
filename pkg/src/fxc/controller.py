"""Backstepping virtual controls, adaptive laws and the event-triggered output.

Notation follows the code rather than any textbook: stage ``m`` of follower
``i`` has error ``gamma_m``, dead-zone radius ``kappa_m``, switched error
``A_m = switched_error(gamma_m, kappa_m)``, basis-norm gain ``g_m`` and
adaptive norm-bound estimate ``phi_hat_m``.

Dead-zone handling
------------------
With ``zone_gating=True`` (the default) every term that contains a power of
``|gamma| - kappa`` or the smooth sign is multiplied by the zone indicator, so
each virtual control is identically zero inside its zone. With
``zone_gating=False`` the terms are used as written, the indicator appearing
only through ``A``; the smooth sign then acts inside the zone and the control
is continuous across the zone boundary. The ungated form evaluates powers of
a negative base and therefore needs integer exponents (``q = 0.5`` and
``2p`` integer).

All stage functions broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigInvalid, NonFiniteResult, StageOrderViolation, ZeroCoupling
from .switching import dead_zone_indicator, sg, switched_error
from .topology import Topology, consensus_error

TANH_GAP_BOUND = 0.2785


def tanh_gap(a, lam):
    """``|a| - a * tanh(a / lam)``; lies in ``[0, TANH_GAP_BOUND * lam]``."""
    a = np.asarray(a, dtype=float)
    return np.abs(a) - a * np.tanh(a / lam)


def _is_int(x: float) -> bool:
    return abs(x - round(x)) < 1e-12


@dataclass(frozen=True, eq=False)
class ControllerParams:
    """Design constants of one follower.

    ``a, b, kappa, r, rho`` are per-stage vectors of length ``n``.
    """

    a: np.ndarray
    b: np.ndarray
    kappa: np.ndarray
    r: np.ndarray
    rho: np.ndarray
    p_exp: float
    q_exp: float
    xi: float
    xi_star: float
    epsilon: float
    m_bar: float = 1.0
    zone_gating: bool = True

    def __post_init__(self):
        vecs = {}
        for name in ("a", "b", "kappa", "r", "rho"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if np.any(~(v > 0)):
                raise ConfigInvalid(f"all entries of {name} must be positive")
            vecs[name] = v
            object.__setattr__(self, name, v)
        n = vecs["a"].size
        if n < 2 or any(v.size != n for v in vecs.values()):
            raise ConfigInvalid("a, b, kappa, r, rho must share one length n >= 2")
        if not self.p_exp > 1:
            raise ConfigInvalid("p_exp > 1 required")
        if not 0 < self.q_exp < 1:
            raise ConfigInvalid("0 < q_exp < 1 required")
        for name in ("xi", "xi_star", "epsilon", "m_bar"):
            if not getattr(self, name) > 0:
                raise ConfigInvalid(f"{name} must be positive")
        if not self.xi > self.xi_star:
            raise ConfigInvalid("xi > xi_star required")
        if not self.zone_gating and not (_is_int(2 * self.p_exp - 1) and _is_int(2 * self.q_exp - 1)):
            raise ConfigInvalid("zone_gating=False needs integer exponents 2p-1 and 2q-1")

    @property
    def order(self) -> int:
        return self.a.size


@dataclass
class AdaptiveState:
    phi_hat: np.ndarray


@dataclass
class TriggerState:
    """Zero-order hold of the transmitted control."""

    held_control: float = 0.0
    last_event_time: float | None = None
    event_times: list[float] = field(default_factory=list)

    def record(self, t: float, w: float) -> None:
        if self.event_times and t <= self.event_times[-1]:
            raise ValueError("event times must be strictly increasing")
        self.held_control = float(w)
        self.last_event_time = float(t)
        self.event_times.append(float(t))


# ---------------------------------------------------------------------------
# stage terms


def _terms(gamma, kappa, a, b, p, q, gating):
    """Shared pieces of every stage law.

    Returns ``(d, sgv, gate, A, power_sum)`` where ``power_sum`` is
    ``(a * d**(2p-1) + b * d**(2q-1)) * sg * gate``.
    """
    gamma = np.asarray(gamma, dtype=float)
    d = np.abs(gamma) - kappa
    f = dead_zone_indicator(gamma, kappa)
    sgv = np.asarray(sg(gamma, kappa))
    gate = np.where(gating, f, 1.0)
    # gated terms are multiplied by f = 0 inside the zone; feed a harmless base there
    base = np.where(np.logical_and(gating, f == 0), 1.0, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        power_sum = (a * np.power(base, 2 * p - 1) + b * np.power(base, 2 * q - 1)) * sgv * gate
    A = np.asarray(switched_error(gamma, kappa))
    return d, sgv, gate, A, power_sum


def _finite(x, what):
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise NonFiniteResult(f"{what} is not finite")
    return float(x) if x.ndim == 0 else x


def _alpha_first(gamma, phi_hat, g, s, kappa, kappa_next, a, b, p, q, m_bar, gating):
    s = np.asarray(s, dtype=float)
    if np.any(s == 0):
        raise ZeroCoupling("coupling strength must be nonzero")
    d, sgv, gate, A, power_sum = _terms(gamma, kappa, a, b, p, q, gating)
    bracket = (
        power_sum
        + 0.25 * A * s * s
        + phi_hat * g * np.tanh(A * g / m_bar)
        + 0.5 * d * sgv * s * gate
        + (kappa_next + 1.0) * sgv * s * gate
    )
    return _finite(-bracket / s, "first-stage virtual control"), A


def _alpha_mid(gamma, phi_hat, g, kappa, kappa_next, a, b, p, q, m_bar, gating):
    d, sgv, gate, A, power_sum = _terms(gamma, kappa, a, b, p, q, gating)
    bracket = (
        power_sum
        + phi_hat * g * np.tanh(A * g / m_bar)
        + d * sgv * gate
        + (kappa_next + 1.0) * sgv * gate
    )
    return _finite(-bracket, "virtual control"), A


def _alpha_final(gamma, phi_hat, g, kappa, a, b, p, q, m_bar, gating):
    d, sgv, gate, A, power_sum = _terms(gamma, kappa, a, b, p, q, gating)
    bracket = power_sum + 0.5 * d * sgv * gate + phi_hat * g * np.tanh(A * g / m_bar)
    return _finite(-bracket, "final control law"), A


# ---------------------------------------------------------------------------
# single-follower API


def virtual_control_first(gamma1, phi_hat1, g1, s_i, params: ControllerParams):
    """First-stage virtual control; divides by the coupling strength ``s_i``."""
    P = params
    alpha, _ = _alpha_first(
        gamma1, phi_hat1, g1, s_i, P.kappa[0], P.kappa[1], P.a[0], P.b[0],
        P.p_exp, P.q_exp, P.m_bar, P.zone_gating,
    )
    return alpha


def virtual_control_mid(gamma_m, phi_hat_m, g_m, stage: int, params: ControllerParams):
    """Virtual control of intermediate stage ``stage`` (1-based, ``2 <= stage <= n-1``)."""
    n = params.order
    if not 2 <= stage <= n - 1:
        raise ValueError(f"intermediate stage must lie in [2, {n - 1}], got {stage}")
    k = stage - 1
    P = params
    alpha, _ = _alpha_mid(
        gamma_m, phi_hat_m, g_m, P.kappa[k], P.kappa[k + 1], P.a[k], P.b[k],
        P.p_exp, P.q_exp, P.m_bar, P.zone_gating,
    )
    return alpha


def control_law_final(gamma_n, phi_hat_n, g_n, params: ControllerParams):
    """Last-stage law, the continuous part of the transmitted control."""
    P = params
    alpha, _ = _alpha_final(
        gamma_n, phi_hat_n, g_n, P.kappa[-1], P.a[-1], P.b[-1],
        P.p_exp, P.q_exp, P.m_bar, P.zone_gating,
    )
    return alpha


def adaptive_law(A, g, phi_hat, r, rho, m_bar):
    """Rate of the norm-bound estimate: ``r*A*g*tanh(A*g/m_bar) - rho*phi_hat``."""
    Ag = np.asarray(A, dtype=float) * g
    out = r * Ag * np.tanh(Ag / m_bar) - rho * np.asarray(phi_hat, dtype=float)
    return float(out) if np.ndim(out) == 0 else out


def event_output(alpha_n, A_n, xi, epsilon=None):
    """Candidate control ``alpha_n - xi * tanh(A_n * xi / epsilon)``.

    ``xi`` and ``epsilon`` may also be supplied as a :class:`ControllerParams`
    in place of ``xi`` (``event_output(alpha, A, params)``).
    """
    if isinstance(xi, ControllerParams):
        xi, epsilon = xi.xi, xi.epsilon
    out = np.asarray(alpha_n, dtype=float) - xi * np.tanh(np.asarray(A_n, dtype=float) * xi / epsilon)
    return float(out) if out.ndim == 0 else out


def should_trigger(w_now: float, state: TriggerState, params: ControllerParams) -> bool:
    """Fire when the hold error ``|w - held|`` reaches ``xi_star``."""
    return abs(w_now - state.held_control) >= params.xi_star


def error_coordinates(
    agent_index: int,
    plant_outputs,
    leader_output: float,
    observer_estimates,
    virtual_controls: Sequence[float | None],
    topo: Topology,
) -> np.ndarray:
    """Backstepping errors of one follower.

    ``observer_estimates`` is the ``(N, n)`` estimate matrix;
    ``virtual_controls`` holds ``alpha_1 .. alpha_{n-1}`` of this follower.
    """
    xh = np.asarray(observer_estimates, dtype=float)
    n = xh.shape[1]
    out = np.empty(n)
    out[0] = consensus_error(plant_outputs, leader_output, topo)[agent_index]
    for m in range(1, n):
        if m - 1 >= len(virtual_controls) or virtual_controls[m - 1] is None:
            raise StageOrderViolation(f"alpha_{m} is needed for gamma_{m + 1} but was not evaluated")
        out[m] = xh[agent_index, m] - virtual_controls[m - 1]
    return out


# ---------------------------------------------------------------------------
# batched pipeline used by the simulator


class ParamStack(NamedTuple):
    """Parameters of ``N`` followers stacked into arrays.

    Stage vectors have shape ``(N, n)``, scalars shape ``(N,)``.
    """

    a: np.ndarray
    b: np.ndarray
    kappa: np.ndarray
    r: np.ndarray
    rho: np.ndarray
    p: np.ndarray
    q: np.ndarray
    m_bar: np.ndarray
    xi: np.ndarray
    xi_star: np.ndarray
    epsilon: np.ndarray
    gating: np.ndarray

    @classmethod
    def from_params(cls, params: Sequence[ControllerParams]) -> "ParamStack":
        if len({p.order for p in params}) != 1:
            raise ConfigInvalid("all followers must share the same order n")
        return cls(
            a=np.stack([p.a for p in params]),
            b=np.stack([p.b for p in params]),
            kappa=np.stack([p.kappa for p in params]),
            r=np.stack([p.r for p in params]),
            rho=np.stack([p.rho for p in params]),
            p=np.array([p.p_exp for p in params]),
            q=np.array([p.q_exp for p in params]),
            m_bar=np.array([p.m_bar for p in params]),
            xi=np.array([p.xi for p in params]),
            xi_star=np.array([p.xi_star for p in params]),
            epsilon=np.array([p.epsilon for p in params]),
            gating=np.array([p.zone_gating for p in params]),
        )


class StageResult(NamedTuple):
    gamma: np.ndarray  # (N, n)
    A: np.ndarray  # (N, n)
    alpha: np.ndarray  # (N, n); column n-1 is the final law
    w: np.ndarray  # (N,)
    phi_rate: np.ndarray  # (N, n)


def backstep(gamma1, xhat, phi_hat, g, coupling, P: ParamStack) -> StageResult:
    """Run the full stage chain for every follower at once."""
    N, n = xhat.shape
    gamma = np.empty((N, n))
    A = np.empty((N, n))
    alpha = np.empty((N, n))
    gamma[:, 0] = gamma1
    common = dict(p=P.p, q=P.q, m_bar=P.m_bar, gating=P.gating)
    alpha[:, 0], A[:, 0] = _alpha_first(
        gamma[:, 0], phi_hat[:, 0], g[:, 0], coupling, P.kappa[:, 0], P.kappa[:, 1],
        P.a[:, 0], P.b[:, 0], **common,
    )
    for m in range(1, n - 1):
        gamma[:, m] = xhat[:, m] - alpha[:, m - 1]
        alpha[:, m], A[:, m] = _alpha_mid(
            gamma[:, m], phi_hat[:, m], g[:, m], P.kappa[:, m], P.kappa[:, m + 1],
            P.a[:, m], P.b[:, m], **common,
        )
    gamma[:, n - 1] = xhat[:, n - 1] - alpha[:, n - 2]
    alpha[:, n - 1], A[:, n - 1] = _alpha_final(
        gamma[:, n - 1], phi_hat[:, n - 1], g[:, n - 1], P.kappa[:, n - 1],
        P.a[:, n - 1], P.b[:, n - 1], **common,
    )
    w = event_output(alpha[:, n - 1], A[:, n - 1], P.xi, P.epsilon)
    phi_rate = adaptive_law(A, g, phi_hat, P.r, P.rho, P.m_bar[:, None])
    return StageResult(gamma, A, alpha, w, phi_rate)
