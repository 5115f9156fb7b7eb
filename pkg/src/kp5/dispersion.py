"""Closed-form dispersion algebra of the fifth-order KP equation.

    u_t + alpha*u_xxx + beta*u_xxxxx + d_x^{-1} u_yy + u*u_x = 0

has dispersion relation ``omega = beta*xi**5 - alpha*xi**3 + mu**2/xi``.
All functions accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lattice import FrequencyLattice

#: Ratio below which ``a << b`` (and above whose inverse ``a ~ b`` fails).
MUCH_LESS = 1.0 / 100.0


class SingularFrequency(ValueError):
    """A formula was evaluated at xi = 0 (or xi1 + xi2 = 0)."""


class DomainError(ValueError):
    """Arguments fall outside the region where a bound is defined."""


@dataclass(frozen=True)
class DispersionParams:
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def fifth_order(self) -> bool:
        return self.beta != 0.0

    @property
    def name(self) -> str:
        if self.beta > 0:
            return "KP-I (5th)"
        if self.beta < 0:
            return "KP-II (5th)"
        return "KP-II (3rd)" if self.alpha > 0 else "KP-I (3rd)"


def _nonzero(*arrays):
    for a in arrays:
        if np.any(np.asarray(a) == 0):
            raise SingularFrequency("frequency argument is zero")


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def omega(xi, mu, p: DispersionParams):
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _nonzero(xi)
    return _out(p.beta * xi**5 - p.alpha * xi**3 + mu * mu / xi)


def omega_lattice(lattice: FrequencyLattice, p: DispersionParams) -> np.ndarray:
    """omega on every lattice mode; 0 on the xi = 0 column and the x-Nyquist column."""
    xi, mu = lattice.XI, lattice.MU
    inv = lattice.safe_inv_xi()
    w = p.beta * xi**5 - p.alpha * xi**3 + mu * mu * inv
    w = np.where(lattice.zero_xi, 0.0, w)
    return lattice.odd_symbol(w)


def grad_omega(xi, mu, p: DispersionParams):
    """(d omega/d xi, d omega/d mu) = (5b xi^4 - 3a xi^2 - mu^2/xi^2, 2 mu/xi)."""
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    _nonzero(xi)
    q = mu / xi
    return _out(5 * p.beta * xi**4 - 3 * p.alpha * xi**2 - q * q), _out(2 * q)


def smoothing_ratio(xi, mu, p: DispersionParams):
    """|grad omega| / xi^2, defined where xi^2 > |alpha|."""
    xi = np.asarray(xi, dtype=float)
    _nonzero(xi)
    if np.any(xi * xi <= abs(p.alpha)):
        raise DomainError("smoothing_ratio needs xi^2 > |alpha|")
    gx, gm = grad_omega(xi, mu, p)
    return _out(np.hypot(gx, gm) / (xi * xi))


def resonance(xi1, mu1, xi2, mu2, p: DispersionParams):
    """omega(xi1+xi2, mu1+mu2) - omega(xi1, mu1) - omega(xi2, mu2), factored form.

        R = xi1*xi2/s * ( s^2 * (5*beta*(xi1^2 + xi1*xi2 + xi2^2) - 3*alpha)
                          - (mu1/xi1 - mu2/xi2)^2 ),   s = xi1 + xi2
    """
    xi1, mu1, xi2, mu2 = (np.asarray(a, dtype=float) for a in (xi1, mu1, xi2, mu2))
    s = xi1 + xi2
    _nonzero(xi1, xi2, s)
    d = mu1 / xi1 - mu2 / xi2
    # grouped so that swapping (xi1, mu1) <-> (xi2, mu2) is bitwise symmetric
    quartic = 5 * p.beta * ((xi1 * xi1 + xi2 * xi2) + xi1 * xi2) - 3 * p.alpha
    return _out(xi1 * xi2 / s * (s * s * quartic - d * d))


def resonance_definitional(xi1, mu1, xi2, mu2, p: DispersionParams):
    """Direct difference of three omegas (reference form, cancellation-prone)."""
    xi1, mu1, xi2, mu2 = (np.asarray(a, dtype=float) for a in (xi1, mu1, xi2, mu2))
    _nonzero(xi1 + xi2)
    return _out(omega(xi1 + xi2, mu1 + mu2, p) - omega(xi1, mu1, p) - omega(xi2, mu2, p))


def resonance_third_kp2_bound(xi1, mu1, xi2, mu2):
    """|R| / (|xi1||xi2||xi1+xi2|) for third-order KP-II (beta=0, alpha=1); always >= 3."""
    r = resonance(xi1, mu1, xi2, mu2, DispersionParams(alpha=1.0, beta=0.0))
    xi1, xi2 = np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float)
    return _out(np.abs(r) / np.abs(xi1 * xi2 * (xi1 + xi2)))


def jacobian_mu(xi1, mu1, xi2, mu2, p: DispersionParams):
    """Jacobian of (xi1, xi2, mu1, mu2) -> (xi1+xi2, mu1+mu2, omega1+omega2, mu2).

    Equals ``5b(xi1^4 - xi2^4) - 3a(xi1^2 - xi2^2) - [(mu1/xi1)^2 - (mu2/xi2)^2]``.
    """
    xi1, mu1, xi2, mu2 = (np.asarray(a, dtype=float) for a in (xi1, mu1, xi2, mu2))
    _nonzero(xi1, xi2)
    q1, q2 = mu1 / xi1, mu2 / xi2
    return _out(
        5 * p.beta * (xi1**4 - xi2**4) - 3 * p.alpha * (xi1**2 - xi2**2) - (q1 * q1 - q2 * q2)
    )


def jacobian_xi(xi1, mu1, xi2, mu2):
    """Jacobian of (xi1, xi2, mu1, mu2) -> (xi1+xi2, mu1+mu2, omega1+omega2, xi1): 2(mu1/xi1 - mu2/xi2)."""
    xi1, mu1, xi2, mu2 = (np.asarray(a, dtype=float) for a in (xi1, mu1, xi2, mu2))
    _nonzero(xi1, xi2)
    return _out(2 * (mu1 / xi1 - mu2 / xi2))


class Interaction(str, Enum):
    LOW_LOW = "LowLow"
    HIGH_HIGH = "HighHigh"
    HIGH_LOW = "HighLow"


@dataclass(frozen=True)
class InteractionClass:
    tag: Interaction
    resonant: bool | None = None


def high_threshold(p: DispersionParams) -> float:
    return 100.0 * max(1.0, np.sqrt(abs(p.alpha)))


def classify_interaction(xi1, xi2, p: DispersionParams, mu1=None, mu2=None) -> InteractionClass:
    """Assign the frequency pair to the low-low, high-high or high-low domain.

    The pair is ordered so that ``|xi1| >= |xi2|``. When both ``mu`` values
    are given, ``resonant`` reports whether
    ``(mu1/xi1 - mu2/xi2)^2 >= (1/2)(xi1+xi2)^2 |5b(xi1^2+xi1 xi2+xi2^2) - 3a|``,
    i.e. whether the resonance function can vanish nearby.
    """
    xi1, xi2 = float(xi1), float(xi2)
    if abs(xi2) > abs(xi1):
        xi1, xi2 = xi2, xi1
        mu1, mu2 = mu2, mu1
    if xi1 == 0:
        raise SingularFrequency("classify_interaction needs a nonzero frequency")
    theta = high_threshold(p)
    a1 = abs(xi1)
    if a1 <= theta:
        tag = Interaction.LOW_LOW
    elif abs(xi2) / a1 >= MUCH_LESS:
        tag = Interaction.HIGH_HIGH
    else:
        tag = Interaction.HIGH_LOW
    resonant = None
    if mu1 is not None and mu2 is not None:
        if xi2 == 0:
            raise SingularFrequency("resonance test needs xi2 != 0")
        d = float(mu1) / xi1 - float(mu2) / xi2
        s = xi1 + xi2
        quartic = 5 * p.beta * (xi1 * xi1 + xi1 * xi2 + xi2 * xi2) - 3 * p.alpha
        resonant = bool(d * d >= 0.5 * s * s * abs(quartic))
    return InteractionClass(tag, resonant)
