"""Conserved quantities and function-space norms.

All norms use the quadrature weights fixed in :mod:`kp5.lattice`:
``||u||_{L2}^2 = lx*ly*sum|c|^2`` in space and ``2*t_ext*lx*ly*sum|c_hat|^2``
in space-time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _fft
from .dispersion import DispersionParams, omega_lattice
from .lattice import (
    FrequencyLattice,
    RejectedInput,
    SpaceTimeField,
    SpectralField,
    dealias,
    to_physical,
)
from .window import TimeWindow, bump  # noqa: F401  (re-exported)

#: Concrete values standing in for "1/2+" and "-1/2+".
B_PLUS = 0.51
B_MINUS = B_PLUS - 1.0


@dataclass(frozen=True)
class NormSpec:
    s: float
    b: float = B_PLUS


class ShellKind(str, Enum):
    MODULATION = "modulation_j"
    XI = "xi_shell_m"
    MU = "mu_shell_n"


@dataclass(frozen=True)
class DyadicIndex:
    kind: ShellKind
    level: int

    def __post_init__(self):
        object.__setattr__(self, "kind", ShellKind(self.kind))
        if self.level < 0:
            raise ValueError(f"dyadic level must be >= 0, got {self.level}")


def shell_level(x) -> np.ndarray:
    """Dyadic level of ``|x|``: 0 on [0, 1), k on [2^(k-1), 2^k)."""
    a = np.abs(np.asarray(x, dtype=float))
    _, e = np.frexp(a)
    return np.where(a < 1.0, 0, e).astype(np.int64)


def _sum_sq(c: np.ndarray, weight2=None) -> float:
    a2 = c.real * c.real + c.imag * c.imag
    if weight2 is not None:
        a2 = weight2 * a2
    return float(np.sum(a2))


def _require_zero_xi(coeffs: np.ndarray, what: str):
    if np.any(coeffs[..., 0, :] != 0):
        raise RejectedInput(f"{what} needs zero coefficients on xi = 0")


def es_weight(lattice: FrequencyLattice) -> np.ndarray:
    """``1 + xi^2 + |mu|/|xi|``, set to 1 on the xi = 0 column."""
    w = 1.0 + lattice.XI**2 + np.abs(lattice.MU) * np.abs(lattice.safe_inv_xi())
    return np.where(lattice.zero_xi, 1.0, w)


def mass(f: SpectralField) -> float:
    """L2 norm of u over the box."""
    return float(np.sqrt(f.lattice.area * _sum_sq(f.coeffs)))


def es_norm(f: SpectralField, s: float) -> float:
    """Energy-type norm with weight ``(1 + xi^2 + |mu|/|xi|)^s``; s=1 is the E(5th) norm."""
    _require_zero_xi(f.coeffs, "es_norm")
    w2 = es_weight(f.lattice) ** (2.0 * s)
    return float(np.sqrt(f.lattice.area * _sum_sq(f.coeffs, w2)))


def aniso_sobolev_norm(f: SpectralField, s1: float, s2: float) -> float:
    lat = f.lattice
    w2 = ((1.0 + np.abs(lat.XI)) ** s1 * (1.0 + np.abs(lat.MU)) ** s2) ** 2
    return float(np.sqrt(lat.area * _sum_sq(f.coeffs, w2)))


def hamiltonian(f: SpectralField, p: DispersionParams) -> float:
    """(b/2)|u_xx|^2 - (a/2)|u_x|^2 + (1/2)|d_x^{-1} u_y|^2 + (1/6) int u^3.

    Quadratic parts are spectral sums; the cubic part is grid quadrature of
    the dealiased field, which is exact for band-limited data.
    """
    if not f.real_symmetric:
        raise RejectedInput("hamiltonian needs a real field")
    _require_zero_xi(f.coeffs, "hamiltonian")
    lat = f.lattice
    xi2 = lat.XI**2
    inv = lat.safe_inv_xi()
    q2 = (lat.MU * inv) ** 2
    a = lat.area
    quad = (
        0.5 * p.beta * a * _sum_sq(f.coeffs, xi2 * xi2)
        - 0.5 * p.alpha * a * _sum_sq(f.coeffs, xi2)
        + 0.5 * a * _sum_sq(f.coeffs, q2)
    )
    u = to_physical(dealias(f))
    cubic = float(np.sum(u * u * u)) * lat.dx * lat.dy / 6.0
    return quad + cubic


def lp_project(f: SpectralField, d: DyadicIndex) -> SpectralField:
    """Keep only modes whose |xi| (or |mu|) lies in dyadic shell ``d.level``."""
    if d.kind is ShellKind.MODULATION:
        raise RejectedInput("modulation shells act on space-time fields; use modulation_project")
    var = f.lattice.XI if d.kind is ShellKind.XI else f.lattice.MU
    keep = shell_level(var) == d.level
    return f.with_coeffs(np.where(keep, f.coeffs, 0))


# ---------------------------------------------------------------------------
# space-time norms

def modulation_levels(F: SpaceTimeField, p: DispersionParams) -> np.ndarray:
    """Dyadic level of ``|tau - omega(xi, mu)|`` on the (tau, xi, mu) lattice."""
    w = omega_lattice(F.lattice, p)
    return shell_level(F.tau_values[:, None, None] - w[None, :, :])


def modulation_project(F: SpaceTimeField, j: int, p: DispersionParams, levels=None) -> SpaceTimeField:
    spec = F.time_spectrum()
    if levels is None:
        levels = modulation_levels(F, p)
    return F.from_time_spectrum(np.where(levels == j, spec, 0))


def spacetime_l2(F: SpaceTimeField) -> float:
    return float(np.sqrt(F.dt * F.lattice.area * _sum_sq(F.coeffs)))


def shell_energies(F: SpaceTimeField, spec: NormSpec, p: DispersionParams, levels=None) -> np.ndarray:
    """Squared norms ``||chi_j w^s F_hat||^2`` for j = 0..j_max."""
    _require_zero_xi(F.coeffs, "xsb_norm")
    if levels is None:
        levels = modulation_levels(F, p)
    a = F.time_spectrum()
    a2 = a.real * a.real + a.imag * a.imag
    if spec.s != 0:
        a2 = a2 * (es_weight(F.lattice) ** (2.0 * spec.s))[None, :, :]
    e = np.bincount(levels.ravel(), weights=a2.ravel())
    return 2.0 * F.t_ext * F.lattice.area * e


def xsb_norm(F: SpaceTimeField, spec: NormSpec, p: DispersionParams, variant: str = "l1", levels=None) -> float:
    """Discrete Bourgain norm ``sum_j 2^(j b) ||chi_j(tau - omega) w^s F_hat||``.

    ``variant="l2"`` gives the square-summed alternative
    ``(sum_j 2^(2 j b) ||...||^2)^(1/2)``.
    """
    return xsb_from_energies(shell_energies(F, spec, p, levels), spec.b, variant)


def xsb_from_energies(e: np.ndarray, b: float, variant: str = "l1") -> float:
    """Combine per-shell squared norms into the X_{s,b} norm for a given b."""
    j = np.arange(e.size)
    if variant == "l1":
        return float(np.sum(2.0 ** (j * b) * np.sqrt(e)))
    if variant == "l2":
        return float(np.sqrt(np.sum(2.0 ** (2 * j * b) * e)))
    raise ValueError(f"unknown variant {variant!r}")


def apply_time_window(F: SpaceTimeField, w: TimeWindow) -> SpaceTimeField:
    """Multiply each time slice by psi_T(t_n)."""
    return F.with_coeffs(F.coeffs * w.psi(F.times)[:, None, None])


def spacetime_dx(F: SpaceTimeField) -> SpaceTimeField:
    lat = F.lattice
    return F.with_coeffs(F.coeffs * (1j * lat.odd_symbol(lat.XI))[None])


def spacetime_product(u: SpaceTimeField, v: SpaceTimeField) -> SpaceTimeField:
    """Pointwise product per time slice on the dealiased grid (truncated to the mask)."""
    lat = u.lattice
    n = lat.size
    a = _fft.ifft2(u.coeffs) * n
    b = _fft.ifft2(v.coeffs) * n
    prod = a * b
    if u.real and v.real:
        prod = prod.real
    c = _fft.fft2(prod) / n
    c = np.where(lat.dealias_mask[None], c, 0)
    return u.with_coeffs(c, u.real and v.real)
