"""Closed-loop simulation of the follower network.

Each step of length ``dt``:

1. snapshot plant outputs, estimates and adaptive states;
2. evaluate the stage chain of every follower, giving the candidate control
   ``w``;
3. fire the trigger where ``|w - held| >= xi_star`` (always at ``t = 0``) and
   update the zero-order hold;
4. advance plant, observer and adaptive states with one classical
   fourth-order Runge-Kutta step, holding the transmitted control fixed;
5. record.

Triggers are only checked on the grid, so inter-event times are multiples of
``dt``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .approximator import RbfNetwork, lattice_network
from .bounds import FixedTimeBound
from .controller import ControllerParams, ParamStack, backstep
from .errors import ConfigInvalid, Divergence, EmptyTail, EmptyTrace, NonFiniteResult
from .observer import ObserverGains, is_hurwitz
from .plant import DynamicsSpec, LeaderModel
from .topology import Topology

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e8

Mode = Literal["event", "periodic"]


@dataclass(frozen=True)
class RbfConfig:
    nodes: int = 16
    low: float = -0.5
    high: float = 0.5
    width: float | None = None


@dataclass(eq=False)
class Scenario:
    """Everything needed for one reproducible run.

    Per-follower lists are indexed by follower; initial-condition arrays have
    shape ``(N, n)``.
    """

    topology: Topology
    dynamics: Sequence[DynamicsSpec]
    controllers: Sequence[ControllerParams]
    observers: Sequence[ObserverGains]
    x0: np.ndarray
    xhat0: np.ndarray
    phi0: np.ndarray
    leader: LeaderModel
    dt: float = 1e-3
    t_final: float = 20.0
    mode: Mode = "event"
    seed: int = 0
    rbf: Sequence[RbfConfig] | None = None
    observer_rho: Sequence[float] | None = None
    override_coupling: float | None = None
    bound: FixedTimeBound | None = None
    description: str = ""

    def __post_init__(self):
        self.x0 = np.array(self.x0, dtype=float)
        self.xhat0 = np.array(self.xhat0, dtype=float)
        self.phi0 = np.array(self.phi0, dtype=float)
        if self.rbf is None:
            self.rbf = [RbfConfig() for _ in range(self.n_agents)]
        if self.observer_rho is None:
            self.observer_rho = [1.0] * self.n_agents
        self.validate()

    @property
    def n_agents(self) -> int:
        return self.topology.n_agents

    @property
    def order(self) -> int:
        return self.controllers[0].order

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def coupling(self) -> np.ndarray:
        if self.override_coupling is not None:
            return np.full(self.n_agents, float(self.override_coupling))
        return np.asarray(self.topology.coupling)

    def validate(self) -> None:
        N = self.n_agents
        for name in ("dynamics", "controllers", "observers", "rbf", "observer_rho"):
            if len(getattr(self, name)) != N:
                raise ConfigInvalid(f"{name} must have one entry per follower ({N})")
        n = self.order
        for i in range(N):
            if self.controllers[i].order != n or self.dynamics[i].order != n or self.observers[i].order != n:
                raise ConfigInvalid(f"follower {i}: controller, dynamics and observer orders must all equal {n}")
            if not is_hurwitz(self.observers[i].companion):
                raise ConfigInvalid(f"follower {i}: companion matrix not Hurwitz")
        for name in ("x0", "xhat0", "phi0"):
            if getattr(self, name).shape != (N, n):
                raise ConfigInvalid(f"{name} must have shape ({N}, {n})")
        if not self.dt > 0:
            raise ConfigInvalid("dt > 0 required")
        if not self.t_final > self.dt:
            raise ConfigInvalid("t_final > dt required")
        if self.mode not in ("event", "periodic"):
            raise ConfigInvalid(f"mode must be 'event' or 'periodic', got {self.mode!r}")
        if self.override_coupling is not None and not self.override_coupling > 0:
            raise ConfigInvalid("override_coupling must be positive")


# ---------------------------------------------------------------------------
# network inputs


class _Regressors:
    """Index maps assembling the network input of every (follower, stage).

    All inputs are gathered from one flat signal vector
    ``[y (N), xhat[:, 1:] (N*(n-1)), phi_hat (N*n), leader derivatives (n+1)]``.

    Stage ``m`` (1-based) of follower ``i`` reads its own output and
    estimates ``xhat_2..xhat_m``, each neighbor's output and estimates up to
    index ``min(m+1, n)``, its own ``phi_hat_1..phi_hat_{m-1}`` and leader
    derivatives of order ``0..m``. Outputs are measured; higher neighbor
    states are unmeasured, so estimates stand in for them.
    """

    def __init__(self, topo: Topology, n: int):
        N = topo.n_agents
        self.N, self.n = N, n
        y_off, xh_off = 0, N
        ph_off = N + N * (n - 1)
        ld_off = ph_off + N * n

        def state_idx(j, k):  # 0-based state index k of follower j
            return y_off + j if k == 0 else xh_off + j * (n - 1) + (k - 1)

        self.signal_size = ld_off + n + 1
        self.index = []
        for i in range(N):
            nbrs = topo.neighbors(i)
            per_stage = []
            for m in range(1, n + 1):
                idx = [state_idx(i, k) for k in range(m)]
                top = min(m + 1, n)
                for j in nbrs:
                    idx += [state_idx(j, k) for k in range(top)]
                idx += [ph_off + i * n + k for k in range(m - 1)]
                idx += [ld_off + k for k in range(m + 1)]
                per_stage.append(np.array(idx, dtype=int))
            self.index.append(per_stage)

    def dims(self):
        return [[len(ix) for ix in stages] for stages in self.index]

    def signals(self, x, xh, ph, lead):
        return np.concatenate((x[:, 0], xh[:, 1:].ravel(), ph.ravel(), lead))


def build_networks(scn: Scenario, regs: _Regressors) -> list[list[RbfNetwork]]:
    nets = []
    for i, dims in enumerate(regs.dims()):
        cfg = scn.rbf[i]
        nets.append([
            lattice_network(d, cfg.nodes, cfg.low, cfg.high, cfg.width, seed=scn.seed + 1000 * i + m)
            for m, d in enumerate(dims)
        ])
    return nets


# ---------------------------------------------------------------------------
# trace


@dataclass(eq=False)
class SimTrace:
    """Time series sampled at the start of every step.

    Arrays are indexed ``[step, follower]`` or ``[step, follower, stage]``.
    ``u_held`` is the transmitted control in force during the step (after
    the trigger decision at its start); ``event`` marks steps whose start
    fired the trigger.
    """

    t: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    gamma: np.ndarray
    phi_hat: np.ndarray
    alpha_n: np.ndarray
    w: np.ndarray
    u_held: np.ndarray
    event: np.ndarray
    leader: np.ndarray
    dt: float
    t_final: float
    mode: str
    xi_star: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n_agents(self) -> int:
        return self.x.shape[1]

    @property
    def gamma1(self) -> np.ndarray:
        return self.gamma[:, :, 0]

    def event_times(self, agent: int) -> np.ndarray:
        return self.t[self.event[:, agent]]

    @property
    def trigger_counts(self) -> np.ndarray:
        return self.event.sum(axis=0)


# ---------------------------------------------------------------------------
# simulation


class _ClosedLoop:
    def __init__(self, scn: Scenario):
        self.scn = scn
        self.N, self.n = scn.n_agents, scn.order
        self.topo = scn.topology
        self.P = ParamStack.from_params(scn.controllers)
        self.mu = np.stack([o.gains for o in scn.observers])
        self.coupling = scn.coupling
        self.regs = _Regressors(self.topo, self.n)
        self.nets = build_networks(scn, self.regs)
        self.dyn = list(scn.dynamics)
        self._pack_networks()

    def _pack_networks(self):
        # pad every (follower, stage) network to a common node count and input
        # dimension; padded input slots read a trailing zero and padded nodes
        # are masked out, so the basis values are unchanged
        nets = [net for stages in self.nets for net in stages]
        idx = [ix for stages in self.regs.index for ix in stages]
        M = max(net.n_nodes for net in nets)
        D = max(net.input_dim for net in nets)
        zero_slot = self.regs.signal_size
        self._centers = np.zeros((len(nets), M, D))
        self._inv_w2 = np.zeros((len(nets), M))
        self._mask = np.zeros((len(nets), M))
        self._gather = np.full((len(nets), D), zero_slot, dtype=int)
        for k, (net, ix) in enumerate(zip(nets, idx)):
            m, d = net.centers.shape
            self._centers[k, :m, :d] = net.centers
            self._inv_w2[k, :m] = 1.0 / net.widths**2
            self._mask[k, :m] = 1.0
            self._gather[k, :d] = ix

    def gains(self, x, xh, ph, lead):
        """Basis-norm gains ``1 + ||basis||`` of every (follower, stage)."""
        sig = np.append(self.regs.signals(x, xh, ph, lead), 0.0)
        diff = self._centers - sig[self._gather][:, None, :]
        b = np.exp(-np.einsum("kmd,kmd->km", diff, diff) * self._inv_w2) * self._mask
        return (1.0 + np.sqrt(np.einsum("km,km->k", b, b))).reshape(self.N, self.n)

    def control(self, t, x, xh, ph):
        lead = self.scn.leader.derivatives(t, self.n)
        y = x[:, 0]
        gamma1 = self.topo.laplacian @ y + self.topo.leader_gains * (y - lead[0])
        g = self.gains(x, xh, ph, lead)
        return backstep(gamma1, xh, ph, g, self.coupling, self.P)

    def derivative(self, x, xh, u, phi_rate):
        dx = np.empty_like(x)
        dx[:, :-1] = x[:, 1:]
        dx[:, -1] = u
        for i, spec in enumerate(self.dyn):
            xi = x[i]
            for m, f in enumerate(spec.stage_fns):
                dx[i, m] += f(xi)
        innov = x[:, 0] - xh[:, 0]
        dxh = np.empty_like(xh)
        dxh[:, :-1] = xh[:, 1:]
        dxh[:, -1] = u
        dxh -= self.mu * innov[:, None]
        return dx, dxh, phi_rate

    def rhs(self, t, x, xh, ph, u):
        res = self.control(t, x, xh, ph)
        return self.derivative(x, xh, u, res.phi_rate)


def run(scn: Scenario) -> SimTrace:
    """Simulate the closed loop over ``[0, t_final)``.

    Raises
    ------
    Divergence
        When any state exceeds ``1e8`` in magnitude or becomes non-finite.
    """
    loop = _ClosedLoop(scn)
    N, n, K, dt = loop.N, loop.n, scn.n_steps, scn.dt
    periodic = scn.mode == "periodic"
    xi_star = loop.P.xi_star

    t_grid = np.arange(K) * dt
    rec = dict(
        x=np.empty((K, N, n)), xhat=np.empty((K, N, n)), gamma=np.empty((K, N, n)),
        phi_hat=np.empty((K, N, n)), alpha_n=np.empty((K, N)), w=np.empty((K, N)),
        u_held=np.empty((K, N)), event=np.zeros((K, N), dtype=bool), leader=np.empty(K),
    )
    x, xh, ph = scn.x0.copy(), scn.xhat0.copy(), scn.phi0.copy()
    held = np.zeros(N)
    h2 = 0.5 * dt
    log.info("running %d steps of %g s (%s-triggered, %d followers)", K, dt, scn.mode, N)

    for k in range(K):
        t = t_grid[k]
        try:
            res = loop.control(t, x, xh, ph)
        except NonFiniteResult as exc:
            raise Divergence(f"controller output not finite at t = {t:.6g}: {exc}", t, -1) from None
        w = res.w
        fire = np.ones(N, dtype=bool) if (k == 0 or periodic) else np.abs(w - held) >= xi_star
        held = np.where(fire, w, held)

        rec["x"][k], rec["xhat"][k], rec["phi_hat"][k] = x, xh, ph
        rec["gamma"][k] = res.gamma
        rec["alpha_n"][k] = res.alpha[:, -1]
        rec["w"][k] = w
        rec["u_held"][k] = held
        rec["event"][k] = fire
        rec["leader"][k] = scn.leader.derivatives(t, 0)[0]

        try:
            k1 = loop.derivative(x, xh, held, res.phi_rate)
            k2 = loop.rhs(t + h2, x + h2 * k1[0], xh + h2 * k1[1], ph + h2 * k1[2], held)
            k3 = loop.rhs(t + h2, x + h2 * k2[0], xh + h2 * k2[1], ph + h2 * k2[2], held)
            k4 = loop.rhs(t + dt, x + dt * k3[0], xh + dt * k3[1], ph + dt * k3[2], held)
        except (NonFiniteResult, OverflowError, ValueError) as exc:
            raise Divergence(f"non-finite evaluation during step at t = {t:.6g}: {exc}", t, -1) from None
        x = x + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        xh = xh + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        ph = ph + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])

        bad = ~(np.isfinite(x).all(1) & np.isfinite(xh).all(1) & np.isfinite(ph).all(1))
        bad |= (np.abs(x).max(1) > DIVERGENCE_LIMIT) | (np.abs(xh).max(1) > DIVERGENCE_LIMIT)
        bad |= np.abs(ph).max(1) > DIVERGENCE_LIMIT
        if bad.any():
            agent = int(np.flatnonzero(bad)[0])
            raise Divergence(
                f"follower {agent + 1} diverged during the step starting at t = {t:.6g}", t + dt, agent
            )

    trace = SimTrace(
        t=t_grid, dt=dt, t_final=scn.t_final, mode=scn.mode, xi_star=xi_star.copy(),
        metadata={"n_steps": K, "coupling": loop.coupling.tolist()}, **rec,
    )
    log.info("trigger counts: %s", trace.trigger_counts.tolist())
    return trace


# ---------------------------------------------------------------------------
# metrics


def trigger_stats(trace: SimTrace) -> list[dict]:
    """Per-follower event count and inter-event spacing.

    With fewer than two events the spacing is reported as the horizon.
    """
    if trace.t.size == 0:
        raise EmptyTrace("trace has no samples")
    out = []
    for i in range(trace.n_agents):
        times = trace.event_times(i)
        gaps = np.diff(times)
        out.append({
            "count": int(times.size),
            "min_inter_event": float(gaps.min()) if gaps.size else float(trace.t_final),
            "mean_inter_event": float(gaps.mean()) if gaps.size else float(trace.t_final),
        })
    return out


def event_stats_from_times(times: Sequence[float], horizon: float) -> dict:
    """:func:`trigger_stats` for a bare list of event times."""
    times = np.asarray(sorted(times), dtype=float)
    gaps = np.diff(times)
    return {
        "count": int(times.size),
        "min_inter_event": float(gaps.min()) if gaps.size else float(horizon),
        "mean_inter_event": float(gaps.mean()) if gaps.size else float(horizon),
    }


def hold_violations(trace: SimTrace) -> np.ndarray:
    """Per follower, number of non-event grid nodes with ``|w - u_held| >= xi_star``."""
    err = np.abs(trace.w - trace.u_held)
    return ((err >= trace.xi_star) & ~trace.event).sum(axis=0)


def tracking_metrics(trace: SimTrace, kappa1, tail_start: float, margin: float = 0.1) -> list[dict]:
    """Suprema over ``[tail_start, t_final]`` of tracking and observer errors.

    ``within_bound`` compares ``max_tail_gamma1`` against ``kappa1 + margin``.
    """
    tail = trace.t >= tail_start
    if not tail.any():
        raise EmptyTail(f"no samples at or after t = {tail_start}")
    kappa1 = np.broadcast_to(np.asarray(kappa1, dtype=float), (trace.n_agents,))
    g1 = np.abs(trace.gamma1[tail])
    out_err = np.abs(trace.x[tail, :, 0] - trace.leader[tail, None])
    obs_err = np.linalg.norm(trace.x[tail] - trace.xhat[tail], axis=2)
    out = []
    for i in range(trace.n_agents):
        m = float(g1[:, i].max())
        out.append({
            "max_tail_gamma1": m,
            "max_tail_output_error": float(out_err[:, i].max()),
            "observer_error_sup": float(obs_err[:, i].max()),
            "within_bound": bool(m <= kappa1[i] + margin),
        })
    return out
