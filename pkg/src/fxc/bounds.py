"""Fixed-time settling bound and a scalar comparison-ODE check.

For a Lyapunov-like function obeying

    dV/dt <= -a_bar * V**alpha_exp - b_bar * V**beta_exp + c_bar,

with ``0 < alpha_exp < 1 < beta_exp``, the trajectory reaches the residual
set ``{V : a_bar V**alpha_exp + b_bar V**beta_exp <= c_bar / (1 - fraction)}``
no later than :func:`settling_bound`, whatever ``V(0)`` is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConditionViolated, ConfigInvalid, StepTooCoarse

MAX_HALVINGS = 10


@dataclass(frozen=True)
class FixedTimeBound:
    a_bar: float
    b_bar: float
    alpha_exp: float
    beta_exp: float
    c_bar: float = 0.0
    fraction: float = 0.5

    def __post_init__(self):
        if not (self.a_bar > 0 and self.b_bar > 0):
            raise ConfigInvalid("a_bar and b_bar must be positive")
        if not 0 < self.alpha_exp < 1:
            raise ConfigInvalid("alpha_exp must lie in (0, 1)")
        if not self.beta_exp > 1:
            raise ConfigInvalid("beta_exp must exceed 1")
        if not self.c_bar >= 0:
            raise ConfigInvalid("c_bar must be nonnegative")
        if not 0 < self.fraction < 1:
            raise ConfigInvalid("fraction must lie in (0, 1)")

    def check(self) -> None:
        limit = min((1 - self.fraction) * self.a_bar, (1 - self.fraction) * self.b_bar)
        if not self.c_bar < limit:
            raise ConditionViolated(
                f"c_bar = {self.c_bar:g} must be below (1 - fraction) * min(a_bar, b_bar) = {limit:g}"
            )

    def rate(self, v: float) -> float:
        """Right-hand side of the comparison ODE."""
        return -self.a_bar * v**self.alpha_exp - self.b_bar * v**self.beta_exp + self.c_bar

    def dissipation(self, v: float) -> float:
        return self.a_bar * v**self.alpha_exp + self.b_bar * v**self.beta_exp

    def residual_level(self) -> float:
        """Largest ``V`` inside the residual set (the dissipation is increasing in ``V``)."""
        target = self.c_bar / (1 - self.fraction)
        if target == 0:
            return 0.0
        lo, hi = 0.0, 1.0
        while self.dissipation(hi) < target:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.dissipation(mid) < target:
                lo = mid
            else:
                hi = mid
        return lo


def settling_bound(bound: FixedTimeBound) -> float:
    """Upper bound on the time to reach the residual set."""
    bound.check()
    f = bound.fraction
    return 1.0 / (f * bound.a_bar * (1 - bound.alpha_exp)) + 1.0 / (f * bound.b_bar * (bound.beta_exp - 1))


@dataclass(frozen=True)
class FixedTimeCheck:
    entered: bool
    t_enter: float  # inf when not entered within the bound
    t_max: float
    level: float
    steps: int


def _rk4(bound, v, h):
    k1 = bound.rate(v)
    v2 = v + 0.5 * h * k1
    if not v2 >= 0:
        return None
    k2 = bound.rate(v2)
    v3 = v + 0.5 * h * k2
    if not v3 >= 0:
        return None
    k3 = bound.rate(v3)
    v4 = v + h * k3
    if not v4 >= 0:
        return None
    k4 = bound.rate(v4)
    out = v + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return out if out >= 0 and math.isfinite(out) else None


def verify_fixed_time(bound: FixedTimeBound, v0: float, dt: float = 1e-4, delta: float = 0.0) -> FixedTimeCheck:
    """Integrate the comparison ODE from ``v0`` until it enters the residual set.

    Entry means ``V <= max(residual_level, delta)``; pass ``delta > 0`` when
    ``c_bar == 0``. Each step starts at ``dt`` and is halved (up to ten times)
    while it would overshoot, i.e. produce a negative ``V`` or leave the
    stability region ``h * |dRate/dV| <= 1`` of the fixed-step scheme.

    Raises
    ------
    StepTooCoarse
        If ten halvings do not give an admissible step.
    """
    if not v0 > 0:
        raise ValueError("v0 must be positive")
    if not dt > 0:
        raise ValueError("dt must be positive")
    t_max = settling_bound(bound)
    level = max(bound.residual_level(), delta)
    if level <= 0:
        raise ValueError("c_bar == 0 needs a positive entry level delta")

    a, b, al, be = bound.a_bar, bound.b_bar, bound.alpha_exp, bound.beta_exp
    t, v, steps = 0.0, float(v0), 0
    while v > level:
        if t > t_max:
            return FixedTimeCheck(False, math.inf, t_max, level, steps)
        slope = a * al * v ** (al - 1) + b * be * v ** (be - 1)
        h = dt
        for _ in range(MAX_HALVINGS + 1):
            nxt = _rk4(bound, v, h) if h * slope <= 1.0 else None
            if nxt is not None:
                break
            h *= 0.5
        else:
            raise StepTooCoarse(f"no admissible step at t = {t:.6g}, V = {v:.6g} after {MAX_HALVINGS} halvings")
        t += h
        v = nxt
        steps += 1
    return FixedTimeCheck(t <= t_max, t if t <= t_max else math.inf, t_max, level, steps)
