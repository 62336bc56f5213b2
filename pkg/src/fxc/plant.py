"""Follower dynamics in cascade form and analytic leader signals."""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch, NonFiniteState

StageFn = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class DynamicsSpec:
    """Per-stage drift terms ``f_m(x)`` of one follower.

    ``stage_fns[m]`` receives the full state vector. ``depends_on[m]`` lists
    the 0-based state indices it reads; the dynamics are strict-feedback when stage
    ``m`` reads only indices ``<= m``.
    """

    stage_fns: tuple[StageFn, ...]
    depends_on: tuple[frozenset[int], ...]
    description: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.stage_fns)

    @property
    def strict_feedback(self) -> bool:
        return all(max(dep, default=-1) <= m for m, dep in enumerate(self.depends_on))


def example_dynamics(o: float = 0.15) -> DynamicsSpec:
    """Second-order benchmark follower.

    ``f_1 = x1 / (1 + x2**2)`` and
    ``f_2 = o * sin(x1 - x2) * exp(-(x1**2 + x2**4))``. Note ``f_1`` reads
    ``x2``, so these dynamics are not strict-feedback.
    """

    def f1(x):
        return x[0] / (1.0 + x[1] * x[1])

    def f2(x):
        return o * math.sin(x[0] - x[1]) * math.exp(-(x[0] ** 2 + x[1] ** 4))

    return DynamicsSpec((f1, f2), (frozenset({0, 1}), frozenset({0, 1})), {"kind": "example", "o": o})


def zero_dynamics(n: int) -> DynamicsSpec:
    def zero(x):
        return 0.0

    return DynamicsSpec(tuple(zero for _ in range(n)), tuple(frozenset() for _ in range(n)), {"kind": "zero", "n": n})


# ---------------------------------------------------------------------------
# closed-form expressions

_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "tanh": math.tanh, "sqrt": math.sqrt}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _check_expr(node, n, used):
    if isinstance(node, ast.Expression):
        return _check_expr(node.body, n, used)
    if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
        _check_expr(node.left, n, used)
        _check_expr(node.right, n, used)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        _check_expr(node.operand, n, used)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        pass
    elif isinstance(node, ast.Name):
        name = node.id
        if name.startswith("x") and name[1:].isdigit() and 1 <= int(name[1:]) <= n:
            used.add(int(name[1:]) - 1)
        else:
            raise ConfigInvalid(f"unknown name {name!r}; use x1..x{n}")
    elif (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        _check_expr(node.args[0], n, used)
    else:
        raise ConfigInvalid(f"unsupported construct in expression: {ast.dump(node)[:60]}")


def parse_expression(text: str, n: int) -> tuple[StageFn, frozenset[int]]:
    """Compile an arithmetic expression over ``x1..xn``.

    Allowed: numbers, ``+ - * / **``, unary minus, ``sin cos exp tanh sqrt``.
    The expression ``'^'`` is accepted as a synonym for ``'**'``.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigInvalid(f"cannot parse expression {text!r}: {exc.msg}") from None
    used: set[int] = set()
    _check_expr(tree, n, used)
    code = compile(tree, "<dynamics>", "eval")
    names = [f"x{k + 1}" for k in range(n)]

    def fn(x, _code=code):
        env = dict(zip(names, (float(v) for v in x)))
        return float(eval(_code, {"__builtins__": {}, **_FUNCS}, env))

    return fn, frozenset(used)


def expression_dynamics(exprs: Sequence[str]) -> DynamicsSpec:
    n = len(exprs)
    parsed = [parse_expression(e, n) for e in exprs]
    return DynamicsSpec(
        tuple(p[0] for p in parsed),
        tuple(p[1] for p in parsed),
        {"kind": "expr", "f": list(exprs)},
    )


def follower_derivative(state, control: float, spec: DynamicsSpec) -> np.ndarray:
    """``dx_m = x_{m+1} + f_m(x)`` for ``m < n`` and ``dx_n = u + f_n(x)``."""
    x = np.asarray(state, dtype=float)
    if x.shape != (spec.order,):
        raise DimensionMismatch(f"state must have length {spec.order}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("plant state is not finite")
    out = np.empty_like(x)
    out[:-1] = x[1:]
    out[-1] = control
    for m, f in enumerate(spec.stage_fns):
        out[m] += f(x)
    return out


# ---------------------------------------------------------------------------
# leader


class LeaderModel:
    """Analytic reference signal with derivatives."""

    def derivatives(self, t: float, order: int) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class SineLeader(LeaderModel):
    """``amplitude * sin(frequency * t)``."""

    amplitude: float = 3.0
    frequency: float = 2.0

    def derivatives(self, t, order):
        # derivatives cycle through sin, cos, -sin, -cos
        s, c = math.sin(self.frequency * t), math.cos(self.frequency * t)
        cycle = (s, c, -s, -c)
        return np.array([self.amplitude * self.frequency**k * cycle[k % 4] for k in range(order + 1)])

    def to_dict(self):
        return {"kind": "sine", "amplitude": self.amplitude, "frequency": self.frequency}


@dataclass(frozen=True)
class ConstantLeader(LeaderModel):
    value: float = 0.0

    def derivatives(self, t, order):
        out = np.zeros(order + 1)
        out[0] = self.value
        return out

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


def leader_eval(model: LeaderModel, t: float, order: int = 2) -> np.ndarray:
    """Value and first ``order`` derivatives of the leader output at ``t``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return model.derivatives(float(t), order)
