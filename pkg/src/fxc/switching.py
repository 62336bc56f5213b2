"""Dead-zone smooth sign, zone indicator and switched error.

All functions accept scalars or arrays (broadcast elementwise) so the
simulator can evaluate every follower at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid


@dataclass(frozen=True)
class DeadZone:
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigInvalid(f"dead-zone radius must be positive, got {self.kappa}")


def _radius(dz):
    return dz.kappa if isinstance(dz, DeadZone) else dz


def sg(gamma, dz):
    """Smooth sign with dead zone.

    Outside the zone (``|gamma| >= kappa``) this is ``sign(gamma)``; inside it
    is ``gamma / ((kappa**2 - gamma**2) + |gamma|)``, which is 0 at the origin
    and reaches +-1 continuously at the boundary.
    """
    k = _radius(dz)
    g = np.asarray(gamma, dtype=float)
    mag = np.abs(g)
    inside = mag < k
    # inside the zone the denominator is >= |gamma| > 0 except at gamma == 0,
    # where kappa**2 > 0 keeps it nonzero
    denom = np.where(inside, (k * k - g * g) + mag, np.where(mag > 0, mag, 1.0))
    out = g / denom
    return float(out) if out.ndim == 0 else out


def dead_zone_indicator(gamma, dz):
    """1 where ``|gamma| >= kappa``, else 0."""
    out = (np.abs(np.asarray(gamma, dtype=float)) >= _radius(dz)).astype(float)
    return float(out) if out.ndim == 0 else out


def switched_error(gamma, dz):
    """``(|gamma| - kappa) * sg(gamma) * indicator(gamma)``; zero inside the zone."""
    k = _radius(dz)
    g = np.asarray(gamma, dtype=float)
    out = np.asarray((np.abs(g) - k) * sg(g, k) * dead_zone_indicator(g, k))
    return float(out) if out.ndim == 0 else out
