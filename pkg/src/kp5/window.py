"""Smooth time cutoff used to localize solutions in time."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def bump(t):
    """Plateau bump: 1 on [-1, 1], 0 for |t| >= 2, C-infinity in between.

    On 1 < |t| < 2 the value is ``exp(1 - 1/(1 - (|t|-1)**2))``.
    """
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    out[t <= 1.0] = 1.0
    ramp = (t > 1.0) & (t < 2.0)
    s = t[ramp] - 1.0
    out[ramp] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


@dataclass(frozen=True)
class TimeWindow:
    """Half-width ``big_t`` of the solve window and the cutoff psi_T(t) = psi(t/T).

    ``scale`` stretches the plateau: psi_T is 1 on [-scale*T, scale*T] and
    vanishes outside [-2*scale*T, 2*scale*T]. The default scale is 1.
    """

    big_t: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.big_t > 0:
            raise ValueError(f"big_t must be positive, got {self.big_t}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def support(self) -> float:
        return 2.0 * self.scale * self.big_t

    def psi(self, t):
        return bump(np.asarray(t, dtype=float) / (self.scale * self.big_t))
