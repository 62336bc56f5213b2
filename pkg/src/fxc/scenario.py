"""Scenario files: JSON documents describing a full simulation.

Layout::

    {
      "description": "...",                      # optional
      "topology": {"adjacency": [[...]], "leader_gains": [...],
                   "override_coupling": null},   # optional override
      "agents": [
        {"dynamics": {"kind": "example", "o": 0.15}
                   | {"kind": "expr", "f": ["...", "..."]}
                   | {"kind": "zero", "n": 2},
         "controller": {"a": [...], "b": [...], "kappa": [...], "r": [...],
                        "rho": [...], "p": 2, "q": 0.5, "xi": 5.5,
                        "xi_star": 5, "epsilon": 25, "m_bar": 1,
                        "zone_gating": true},
         "observer": {"gains": [...], "lyapunov_rho": 3},
         "rbf": {"nodes": 16, "low": -0.5, "high": 0.5, "width": null},
         "initial": {"x": [...], "x_hat": [...], "phi_hat": [...]}}
      ],
      "leader": {"kind": "sine", "amplitude": 3, "frequency": 2}
              | {"kind": "constant", "value": 0},
      "sim": {"dt": 0.001, "t_final": 20, "mode": "event", "seed": 0},
      "bound": {"a_bar": 1, "b_bar": 1, "alpha_exp": 0.5, "beta_exp": 2,
                "c_bar": 0.1, "fraction": 0.5}   # optional
    }
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .bounds import FixedTimeBound
from .controller import ControllerParams
from .engine import RbfConfig, Scenario
from .errors import ConfigError, ParseError, SchemaError, ValidationError
from .observer import ObserverGains, is_hurwitz
from .plant import ConstantLeader, SineLeader, example_dynamics, expression_dynamics, zero_dynamics
from .topology import build_topology

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": _num, "minItems": 1}
_mat = {"type": "array", "items": _vec, "minItems": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj(
    {
        "description": {"type": "string"},
        "topology": _obj(
            {
                "adjacency": _mat,
                "leader_gains": _vec,
                "override_coupling": {"type": ["number", "null"]},
            },
            ["adjacency", "leader_gains"],
        ),
        "agents": {
            "type": "array",
            "minItems": 1,
            "items": _obj(
                {
                    "dynamics": {
                        "oneOf": [
                            _obj({"kind": {"const": "example"}, "o": _num}, ["kind"]),
                            _obj(
                                {"kind": {"const": "expr"}, "f": {"type": "array", "items": {"type": "string"}, "minItems": 1}},
                                ["kind", "f"],
                            ),
                            _obj({"kind": {"const": "zero"}, "n": {"type": "integer", "minimum": 1}}, ["kind", "n"]),
                        ]
                    },
                    "controller": _obj(
                        {
                            "a": _vec, "b": _vec, "kappa": _vec, "r": _vec, "rho": _vec,
                            "p": _num, "q": _num, "xi": _num, "xi_star": _num, "epsilon": _num,
                            "m_bar": _num, "zone_gating": {"type": "boolean"},
                        },
                        ["a", "b", "kappa", "r", "rho", "p", "q", "xi", "xi_star", "epsilon"],
                    ),
                    "observer": _obj({"gains": _vec, "lyapunov_rho": _pos}, ["gains"]),
                    "rbf": _obj(
                        {
                            "nodes": {"type": "integer", "minimum": 1},
                            "low": _num,
                            "high": _num,
                            "width": {"type": ["number", "null"]},
                        }
                    ),
                    "initial": _obj({"x": _vec, "x_hat": _vec, "phi_hat": _vec}, ["x", "x_hat", "phi_hat"]),
                },
                ["dynamics", "controller", "observer", "initial"],
            ),
        },
        "leader": {
            "oneOf": [
                _obj({"kind": {"const": "sine"}, "amplitude": _num, "frequency": _num}, ["kind", "amplitude", "frequency"]),
                _obj({"kind": {"const": "constant"}, "value": _num}, ["kind", "value"]),
            ]
        },
        "sim": _obj(
            {
                "dt": _pos,
                "t_final": _pos,
                "mode": {"enum": ["event", "periodic"]},
                "seed": {"type": "integer"},
            },
            ["dt", "t_final"],
        ),
        "bound": _obj(
            {"a_bar": _num, "b_bar": _num, "alpha_exp": _num, "beta_exp": _num, "c_bar": _num, "fraction": _num},
            ["a_bar", "b_bar", "alpha_exp", "beta_exp"],
        ),
    },
    ["topology", "agents", "leader", "sim"],
)


def _path(err) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def _best_error(err):
    # oneOf failures nest the useful message one level down
    if err.context:
        return min(err.context, key=lambda e: (len(e.context), -len(e.absolute_path)))
    return err


def validate_document(doc: dict) -> None:
    """Schema check; raises :class:`SchemaError` naming the offending path."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = _best_error(errors[0])
        raise SchemaError(f"{_path(err)}: {err.message}")


def _dynamics(d):
    kind = d["kind"]
    if kind == "example":
        return example_dynamics(d.get("o", 0.15))
    if kind == "expr":
        return expression_dynamics(d["f"])
    return zero_dynamics(d["n"])


def _leader(d):
    if d["kind"] == "sine":
        return SineLeader(float(d["amplitude"]), float(d["frequency"]))
    return ConstantLeader(float(d["value"]))


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a :class:`Scenario` from a parsed document.

    Raises
    ------
    SchemaError
        Missing, mistyped or unknown keys.
    ValidationError
        A model invariant does not hold; the message names it.
    """
    validate_document(doc)
    try:
        topo_d = doc["topology"]
        topo = build_topology(topo_d["adjacency"], topo_d["leader_gains"])
        agents = doc["agents"]
        if len(agents) != topo.n_agents:
            raise ValidationError(f"topology has {topo.n_agents} followers but {len(agents)} agents are listed")
        controllers, observers, dyn, rbf, rhos = [], [], [], [], []
        x0, xh0, ph0 = [], [], []
        for i, a in enumerate(agents):
            c = a["controller"]
            if not c["xi"] > c["xi_star"]:
                raise ValidationError(f"agents/{i}/controller: invariant xi > xi_star violated")
            controllers.append(
                ControllerParams(
                    a=c["a"], b=c["b"], kappa=c["kappa"], r=c["r"], rho=c["rho"],
                    p_exp=float(c["p"]), q_exp=float(c["q"]), xi=float(c["xi"]),
                    xi_star=float(c["xi_star"]), epsilon=float(c["epsilon"]),
                    m_bar=float(c.get("m_bar", 1.0)), zone_gating=bool(c.get("zone_gating", True)),
                )
            )
            og = ObserverGains.from_gains(a["observer"]["gains"])
            if not is_hurwitz(og.companion):
                raise ValidationError(f"agents/{i}/observer: companion matrix not Hurwitz")
            observers.append(og)
            rhos.append(float(a["observer"].get("lyapunov_rho", 1.0)))
            dyn.append(_dynamics(a["dynamics"]))
            r = a.get("rbf", {})
            rbf.append(RbfConfig(int(r.get("nodes", 16)), float(r.get("low", -0.5)), float(r.get("high", 0.5)),
                                 None if r.get("width") is None else float(r["width"])))
            init = a["initial"]
            x0.append(init["x"])
            xh0.append(init["x_hat"])
            ph0.append(init["phi_hat"])
        sim = doc["sim"]
        bound = FixedTimeBound(**doc["bound"]) if "bound" in doc else None
        shapes = {len(v) for v in x0 + xh0 + ph0}
        if len(shapes) != 1:
            raise ValidationError("initial x, x_hat and phi_hat must all have length n")
        return Scenario(
            topology=topo,
            dynamics=dyn,
            controllers=controllers,
            observers=observers,
            x0=np.array(x0, dtype=float),
            xhat0=np.array(xh0, dtype=float),
            phi0=np.array(ph0, dtype=float),
            leader=_leader(doc["leader"]),
            dt=float(sim["dt"]),
            t_final=float(sim["t_final"]),
            mode=sim.get("mode", "event"),
            seed=int(sim.get("seed", 0)),
            rbf=rbf,
            observer_rho=rhos,
            override_coupling=topo_d.get("override_coupling"),
            bound=bound,
            description=doc.get("description", ""),
        )
    except ValidationError:
        raise
    except ConfigError as exc:
        raise ValidationError(str(exc)) from exc


def scenario_to_dict(scn: Scenario) -> dict:
    """Inverse of :func:`scenario_from_dict` (effective configuration)."""
    agents = []
    for i in range(scn.n_agents):
        c = scn.controllers[i]
        r = scn.rbf[i]
        agents.append({
            "dynamics": dict(scn.dynamics[i].description),
            "controller": {
                "a": c.a.tolist(), "b": c.b.tolist(), "kappa": c.kappa.tolist(),
                "r": c.r.tolist(), "rho": c.rho.tolist(), "p": c.p_exp, "q": c.q_exp,
                "xi": c.xi, "xi_star": c.xi_star, "epsilon": c.epsilon, "m_bar": c.m_bar,
                "zone_gating": c.zone_gating,
            },
            "observer": {"gains": scn.observers[i].gains.tolist(), "lyapunov_rho": scn.observer_rho[i]},
            "rbf": {"nodes": r.nodes, "low": r.low, "high": r.high, "width": r.width},
            "initial": {"x": scn.x0[i].tolist(), "x_hat": scn.xhat0[i].tolist(), "phi_hat": scn.phi0[i].tolist()},
        })
    doc = {
        "description": scn.description,
        "topology": {
            "adjacency": scn.topology.adjacency.tolist(),
            "leader_gains": scn.topology.leader_gains.tolist(),
            "override_coupling": scn.override_coupling,
        },
        "agents": agents,
        "leader": scn.leader.to_dict(),
        "sim": {"dt": scn.dt, "t_final": scn.t_final, "mode": scn.mode, "seed": scn.seed},
    }
    if scn.bound is not None:
        b = scn.bound
        doc["bound"] = {"a_bar": b.a_bar, "b_bar": b.b_bar, "alpha_exp": b.alpha_exp,
                        "beta_exp": b.beta_exp, "c_bar": b.c_bar, "fraction": b.fraction}
    return doc


def parse_document(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                         exc.lineno, exc.colno) from None


def load_scenario(path) -> Scenario:
    """Read, schema-check and validate a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    return scenario_from_dict(parse_document(text))


def dump_scenario(scn: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scn), indent=2) + "\n", encoding="utf-8")


def bundled_path(name: str = "paper_example.json") -> Path:
    """Filesystem path of a scenario shipped with the package."""
    return Path(str(resources.files("fxc") / "data" / name))


def load_bundled(name: str = "paper_example.json") -> Scenario:
    return load_scenario(bundled_path(name))
