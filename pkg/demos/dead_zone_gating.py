"""Why the benchmark scenario runs the stage laws without zone gating.

With ``zone_gating=True`` every term of a virtual control is switched off
inside its dead zone, so the first-stage law drops from roughly
``-(b + (kappa_2 + 1) s)`` to 0 as the error crosses the zone edge. Sampled at
dt = 1e-3 with a zero-order hold, that jump excites the second stage and the
loop diverges within a fraction of a second. Without gating the laws are
continuous across the edge (with q = 0.5 the ``d**(2q-1)`` factor is 1) and the
same constants track the leader.

    python3 demos/dead_zone_gating.py
"""

import json
from dataclasses import replace

from fxc import run, virtual_control_first
from fxc.errors import Divergence
from fxc.scenario import bundled_path, scenario_from_dict

doc = json.loads(bundled_path().read_text())
ungated = scenario_from_dict(doc).controllers[0]
gated = replace(ungated, zone_gating=True)

print("first-stage law near the zone edge |gamma| = 0.6 (s = 1, phi_hat = 0.1, g = 1.5)")
print(f"{'gamma':>8}  {'gated':>9}  {'ungated':>9}")
for gamma in (0.5, 0.59, 0.5999, 0.6, 0.6001, 0.61):
    a_g = virtual_control_first(gamma, 0.1, 1.5, 1.0, gated) + 0.0  # drop the sign of zero
    a_u = virtual_control_first(gamma, 0.1, 1.5, 1.0, ungated)
    print(f"{gamma:8.4f}  {a_g:9.3f}  {a_u:9.3f}")

for gating in (True, False):
    d = json.loads(json.dumps(doc))
    d["sim"]["t_final"] = 3.0
    for agent in d["agents"]:
        agent["controller"]["zone_gating"] = gating
    label = "gated  " if gating else "ungated"
    try:
        trace = run(scenario_from_dict(d))
    except Divergence as exc:
        print(f"{label}: diverged ({exc})")
        continue
    tail = abs(trace.gamma1[trace.t >= 2.0]).max(axis=0)
    print(f"{label}: ran 3 s, max |gamma_1| over [2, 3) = {tail.round(3).tolist()}")
