import copy

import numpy as np
import pytest

from fxc.approximator import gain_magnitude
from fxc.controller import ControllerParams
from fxc.engine import (
    Scenario,
    SimTrace,
    _ClosedLoop,
    event_stats_from_times,
    hold_violations,
    run,
    tracking_metrics,
    trigger_stats,
)
from fxc.errors import ConfigInvalid, Divergence, EmptyTail, EmptyTrace
from fxc.observer import ObserverGains
from fxc.plant import ConstantLeader, zero_dynamics
from fxc.scenario import scenario_from_dict
from fxc.topology import build_topology


def zero_scenario(x0=None, xhat0=None, t_final=1.0, gating=True):
    topo = build_topology([[0, 0], [1, 0]], [1, 0])
    P = ControllerParams(a=[1, 1], b=[1, 1], kappa=[0.5, 0.5], r=[1, 1], rho=[1, 1], p_exp=2.0, q_exp=0.5,
                         xi=2.0, xi_star=1.0, epsilon=5.0, zone_gating=gating)
    zeros = np.zeros((2, 2))
    return Scenario(
        topology=topo, dynamics=[zero_dynamics(2)] * 2, controllers=[P, P],
        observers=[ObserverGains.from_gains([-15, -80])] * 2,
        x0=zeros if x0 is None else x0, xhat0=zeros if xhat0 is None else xhat0, phi0=zeros,
        leader=ConstantLeader(0.0), dt=1e-3, t_final=t_final,
    )


def test_zero_dynamics_stay_at_rest():
    tr = run(zero_scenario())
    for name in ("x", "xhat", "gamma", "phi_hat", "alpha_n", "w", "u_held"):
        assert not np.any(getattr(tr, name)), name
    np.testing.assert_array_equal(tr.trigger_counts, [1, 1])
    np.testing.assert_array_equal(tr.event_times(0), [0.0])


def test_observer_error_contracts_for_linear_plant():
    x0 = np.array([[0.2, -0.1], [0.1, 0.3]])
    tr = run(zero_scenario(x0=x0, xhat0=np.zeros((2, 2)), t_final=2.0))
    e = np.linalg.norm(tr.x - tr.xhat, axis=2)
    assert np.all(e[-1] < 0.01 * e[0])


def test_trace_shapes():
    tr = run(zero_scenario(t_final=0.05))
    K = 50
    assert tr.t.shape == (K,)
    for name in ("x", "xhat", "gamma", "phi_hat"):
        assert getattr(tr, name).shape == (K, 2, 2)
    for name in ("alpha_n", "w", "u_held", "event"):
        assert getattr(tr, name).shape == (K, 2)
    np.testing.assert_allclose(tr.t, np.arange(K) * 1e-3)


def test_scenario_validation():
    with pytest.raises(ConfigInvalid):
        zero_scenario(t_final=1e-4)
    scn = zero_scenario()
    scn.mode = "sometimes"
    with pytest.raises(ConfigInvalid):
        scn.validate()
    with pytest.raises(ConfigInvalid):
        zero_scenario(x0=np.zeros((2, 3)))


def test_engine_gains_match_network_gain(bench_scenario):
    loop = _ClosedLoop(bench_scenario)
    rng = np.random.default_rng(4)
    x = rng.normal(scale=0.4, size=(4, 2))
    xh = rng.normal(scale=0.4, size=(4, 2))
    ph = rng.uniform(0, 1, (4, 2))
    lead = bench_scenario.leader.derivatives(0.3, 2)
    batched = loop.gains(x, xh, ph, lead)
    sig = loop.regs.signals(x, xh, ph, lead)
    for i in range(4):
        for m in range(2):
            z = sig[loop.regs.index[i][m]]
            assert batched[i, m] == pytest.approx(gain_magnitude(loop.nets[i][m], z), rel=1e-13)


def test_regressor_dimensions(bench_scenario):
    loop = _ClosedLoop(bench_scenario)
    # follower 2 has neighbors 1 and 4: stage 1 reads y2, two neighbors' (y, xhat2), yd0, yd1
    assert loop.regs.dims()[1] == [1 + 4 + 2, 2 + 4 + 1 + 3]
    assert loop.regs.dims()[0] == [1 + 2, 2 + 1 + 3]


def _short(bench_doc, **sim):
    doc = copy.deepcopy(bench_doc)
    doc["sim"].update(sim)
    return scenario_from_dict(doc)


def test_periodic_baseline_fires_every_step(bench_doc):
    periodic = run(_short(bench_doc, t_final=1.0, mode="periodic"))
    event = run(_short(bench_doc, t_final=1.0))
    np.testing.assert_array_equal(periodic.trigger_counts, [1000] * 4)
    assert np.all(event.trigger_counts < periodic.trigger_counts)
    np.testing.assert_array_equal(periodic.u_held, periodic.w)


def test_short_runs_repeat_exactly(bench_doc):
    a = run(_short(bench_doc, t_final=0.5))
    b = run(_short(bench_doc, t_final=0.5))
    for name in ("x", "xhat", "gamma", "phi_hat", "w", "u_held", "event"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_gated_controller_diverges_on_benchmark(bench_doc):
    # with every term gated, the first-stage law jumps by about b + (kappa_2 + 1) s
    # at the zone edge and the sampled loop blows up within a fraction of a second
    doc = copy.deepcopy(bench_doc)
    for agent in doc["agents"]:
        agent["controller"]["zone_gating"] = True
    doc["sim"]["t_final"] = 1.0
    with pytest.raises(Divergence) as info:
        run(scenario_from_dict(doc))
    assert 0 < info.value.time < 1.0
    assert info.value.agent in range(4)


def test_trigger_stats_examples():
    s = event_stats_from_times([0.0, 0.1, 0.3], 20.0)
    assert s["count"] == 3 and s["min_inter_event"] == pytest.approx(0.1)
    none = event_stats_from_times([], 20.0)
    assert none["count"] == 0 and none["min_inter_event"] == 20.0


def _synthetic(K=10, N=2, n=2):
    t = np.arange(K) * 0.1
    lead = np.sin(t)
    x = np.zeros((K, N, n))
    x[:, :, 0] = lead[:, None]
    return SimTrace(
        t=t, x=x, xhat=x.copy(), gamma=np.zeros((K, N, n)), phi_hat=np.zeros((K, N, n)),
        alpha_n=np.zeros((K, N)), w=np.zeros((K, N)), u_held=np.zeros((K, N)),
        event=np.zeros((K, N), dtype=bool), leader=lead, dt=0.1, t_final=K * 0.1, mode="event",
        xi_star=np.ones(N),
    )


def test_tracking_metrics_perfect_tracking():
    for m in tracking_metrics(_synthetic(), [0.6, 0.6], 0.0):
        assert m["max_tail_gamma1"] == 0 and m["max_tail_output_error"] == 0 and m["observer_error_sup"] == 0
        assert m["within_bound"]
    with pytest.raises(EmptyTail):
        tracking_metrics(_synthetic(), [0.6, 0.6], 5.0)


def test_trigger_stats_empty():
    tr = _synthetic(K=0)
    with pytest.raises(EmptyTrace):
        trigger_stats(tr)
    stats = trigger_stats(_synthetic())
    assert stats[0]["count"] == 0 and stats[0]["min_inter_event"] == pytest.approx(1.0)


def test_benchmark_hold_is_piecewise_constant(bench_trace):
    changed = np.diff(bench_trace.u_held, axis=0) != 0
    assert not np.any(changed & ~bench_trace.event[1:])
    np.testing.assert_array_equal(bench_trace.trigger_counts, [bench_trace.event_times(i).size for i in range(4)])
    assert not hold_violations(bench_trace).any()


def test_benchmark_observer_error_bounded(bench_trace):
    # supremum of |x - xhat| over consecutive 5 s windows: it settles to a
    # steady oscillation rather than decaying (the drift terms keep exciting it)
    e = np.linalg.norm(bench_trace.x - bench_trace.xhat, axis=2)
    sups = np.array([e[(bench_trace.t >= lo) & (bench_trace.t < lo + 5)].max(axis=0) for lo in (5, 10, 15)])
    assert np.all(np.isfinite(sups))
    assert np.all(sups < 2.0)
    assert np.all(np.abs(sups[2] - sups[1]) <= 0.05 * sups[1])


def test_benchmark_adaptive_estimates_bounded(bench_trace):
    assert np.all(np.isfinite(bench_trace.phi_hat))
    assert np.abs(bench_trace.phi_hat).max() < 1e3
