"""Periodic spectral discretization of the (x, y) plane.

Conventions
-----------
* Arrays are indexed ``[ix, iy]`` (shape ``(nx, ny)``); spectral arrays use
  FFT ordering, so index ``k`` holds wavenumber ``xi = 2*pi*k/lx`` with ``k``
  taken in ``[-nx/2, nx/2 - 1]``.
* The forward transform divides by ``nx*ny``: ``u(x, y) = sum_kl c_kl
  exp(i(x*xi_k + y*mu_l))``, so a unit plane wave has unit coefficient.
  Parseval then reads ``int |u|^2 dx dy = lx*ly*sum |c|^2``.
* Space-time arrays are stored as ``(nt, nx, ny)``. The time-frequency axis
  uses plane waves ``exp(-i*tau*t)``, so a free wave ``S(t)u0`` sits on the
  surface ``tau = omega(xi, mu)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _fft
from .window import TimeWindow


class RejectedInput(ValueError):
    """Input violates a precondition of a field operation."""


def _is_pow2(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrequencyLattice:
    nx: int
    ny: int
    lx: float = 32 * np.pi
    ly: float = 32 * np.pi

    def __post_init__(self):
        if not (_is_pow2(self.nx) and _is_pow2(self.ny)):
            raise RejectedInput(f"nx, ny must be powers of two >= 2, got {self.nx}, {self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise RejectedInput(f"box lengths must be positive, got {self.lx}, {self.ly}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "lx", float(self.lx))
        object.__setattr__(self, "ly", float(self.ly))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @cached_property
    def k(self) -> np.ndarray:
        return np.fft.fftfreq(self.nx, 1.0 / self.nx).astype(np.int64)

    @cached_property
    def l(self) -> np.ndarray:  # noqa: E743
        return np.fft.fftfreq(self.ny, 1.0 / self.ny).astype(np.int64)

    @cached_property
    def xi(self) -> np.ndarray:
        return 2 * np.pi * self.k / self.lx

    @cached_property
    def mu(self) -> np.ndarray:
        return 2 * np.pi * self.l / self.ly

    @cached_property
    def XI(self) -> np.ndarray:
        return np.broadcast_to(self.xi[:, None], self.shape)

    @cached_property
    def MU(self) -> np.ndarray:
        return np.broadcast_to(self.mu[None, :], self.shape)

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep ``|k| <= nx/3`` and ``|l| <= ny/3``."""
        keep_x = 3 * np.abs(self.k) <= self.nx
        keep_y = 3 * np.abs(self.l) <= self.ny
        return keep_x[:, None] & keep_y[None, :]

    @cached_property
    def zero_xi(self) -> np.ndarray:
        """Column mask of the ``xi = 0`` modes."""
        return np.broadcast_to((self.k == 0)[:, None], self.shape)

    @cached_property
    def x_nyquist(self) -> np.ndarray:
        """Modes at ``k = -nx/2``; odd symbols in xi are zeroed there."""
        return np.broadcast_to((self.k == -self.nx // 2)[:, None], self.shape)

    def odd_symbol(self, values: np.ndarray) -> np.ndarray:
        """Return a copy of an xi-odd symbol with the x-Nyquist column zeroed.

        The x-Nyquist mode is its own Hermitian partner, so an odd symbol
        there cannot map real fields to real fields.
        """
        out = np.array(values, dtype=float, copy=True)
        out[self.x_nyquist] = 0.0
        return out

    def safe_inv_xi(self) -> np.ndarray:
        """``1/xi`` with 0 substituted on the ``xi = 0`` column."""
        out = np.zeros(self.shape)
        nz = ~self.zero_xi
        out[nz] = 1.0 / self.XI[nz]
        return out

    def refined(self, factor: int = 2) -> "FrequencyLattice":
        """Same box, ``factor`` times more points per direction."""
        return FrequencyLattice(self.nx * factor, self.ny * factor, self.lx, self.ly)


def hermitian_partner(c: np.ndarray, axes=(-2, -1)) -> np.ndarray:
    """Array whose entry at index ``n`` is ``c[-n mod N]`` along ``axes``."""
    return np.roll(np.flip(c, axis=axes), 1, axis=axes)


def hermitian_part(c: np.ndarray, axes=(-2, -1)) -> np.ndarray:
    """Symmetrize so that ``c[-n] == conj(c[n])`` holds bit-exactly."""
    return 0.5 * (c + np.conj(hermitian_partner(c, axes)))


def is_hermitian(c: np.ndarray, axes=(-2, -1)) -> bool:
    return bool(np.array_equal(c, np.conj(hermitian_partner(c, axes))))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a field on a :class:`FrequencyLattice`.

    The coefficient array is copied and frozen on construction. Flags are
    claims about the data and are checked exactly.
    """

    lattice: FrequencyLattice
    coeffs: np.ndarray
    real_symmetric: bool = True
    zero_x_mean: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.shape != self.lattice.shape:
            raise RejectedInput(f"coefficient shape {c.shape} != lattice shape {self.lattice.shape}")
        if self.real_symmetric and not is_hermitian(c):
            raise RejectedInput("real_symmetric=True but coefficients are not Hermitian")
        if self.zero_x_mean and np.any(c[0, :] != 0):
            raise RejectedInput("zero_x_mean=True but xi=0 column is nonzero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, lattice: FrequencyLattice) -> "SpectralField":
        return cls(lattice, np.zeros(lattice.shape, complex), True, True)

    @classmethod
    def single_mode(cls, lattice: FrequencyLattice, k: int, l: int, amplitude: complex = 1.0) -> "SpectralField":  # noqa: E741
        """Real field ``amp*e^{i(k,l).x} + conj``; pure ``(k, l)`` if self-conjugate."""
        c = np.zeros(lattice.shape, complex)
        c[k % lattice.nx, l % lattice.ny] += amplitude
        c[-k % lattice.nx, -l % lattice.ny] += np.conj(amplitude)
        return cls(lattice, c, True, bool(np.all(c[0, :] == 0)))

    def with_coeffs(self, coeffs: np.ndarray, *, real_symmetric=None, zero_x_mean=None) -> "SpectralField":
        return SpectralField(
            self.lattice,
            coeffs,
            self.real_symmetric if real_symmetric is None else real_symmetric,
            self.zero_x_mean if zero_x_mean is None else zero_x_mean,
        )

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _same_lattice(self, other)
        return SpectralField(
            self.lattice,
            self.coeffs + other.coeffs,
            self.real_symmetric and other.real_symmetric,
            self.zero_x_mean and other.zero_x_mean,
        )

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _same_lattice(self, other)
        return SpectralField(
            self.lattice,
            self.coeffs - other.coeffs,
            self.real_symmetric and other.real_symmetric,
            self.zero_x_mean and other.zero_x_mean,
        )

    def scaled(self, factor: float) -> "SpectralField":
        return self.with_coeffs(self.coeffs * float(factor))


def _same_lattice(a, b):
    if a.lattice != b.lattice:
        raise RejectedInput("fields live on different lattices")


def to_spectral(samples, lattice: FrequencyLattice) -> SpectralField:
    """Forward transform of real samples ``u[ix, iy]`` (divides by ``nx*ny``)."""
    u = np.asarray(samples)
    if u.shape != lattice.shape:
        raise RejectedInput(f"samples shape {u.shape} != lattice shape {lattice.shape}")
    if np.iscomplexobj(u):
        raise RejectedInput("samples must be real")
    c = hermitian_part(_fft.fft2(u.astype(float)) / lattice.size)
    return SpectralField(lattice, c, True, bool(np.all(c[0, :] == 0)))


def to_physical(f: SpectralField) -> np.ndarray:
    """Inverse transform; real array when the field is Hermitian."""
    u = _fft.ifft2(f.coeffs) * f.lattice.size
    return u.real.copy() if f.real_symmetric else u


def project_zero_mass(f: SpectralField) -> SpectralField:
    """Zero the ``xi = 0`` column, i.e. remove the x-average at every y."""
    c = np.array(f.coeffs)
    c[0, :] = 0
    return f.with_coeffs(c, zero_x_mean=True)


def dealias(f: SpectralField) -> SpectralField:
    return f.with_coeffs(np.where(f.lattice.dealias_mask, f.coeffs, 0))


def nonlinear_term(f: SpectralField) -> SpectralField:
    """Coefficients of ``u*u_x = (1/2) d/dx (u^2)``, dealiased and zero-mass."""
    if not f.real_symmetric:
        raise RejectedInput("nonlinear_term needs a real field")
    lat = f.lattice
    c = nonlinear_half(half_spectrum(f.coeffs), lat)
    return SpectralField(lat, hermitian_part(full_spectrum(c, lat)), True, True)


# ---------------------------------------------------------------------------
# half-spectrum (rfft layout) kernels used by the time stepper

def half_spectrum(c: np.ndarray) -> np.ndarray:
    """Slice a full Hermitian array to the ``l >= 0`` half kept by rfft2."""
    ny = c.shape[-1]
    return np.array(c[..., : ny // 2 + 1])


def full_spectrum(h: np.ndarray, lattice: FrequencyLattice) -> np.ndarray:
    """Rebuild the full array from the rfft half using Hermitian symmetry."""
    nx, ny = lattice.shape
    nh = ny // 2 + 1
    full = np.empty(h.shape[:-2] + (nx, ny), dtype=np.complex128)
    full[..., :nh] = h
    # l = -1 .. -(ny/2 - 1) are conjugate partners of l = 1 .. ny/2 - 1
    pos = h[..., 1 : ny - nh + 1]
    partner = np.roll(np.flip(pos, axis=-2), 1, axis=-2)
    full[..., nh:] = np.conj(partner[..., ::-1])
    return full


@dataclass(frozen=True, eq=False)
class _HalfOps:
    """Precomputed rfft-layout multipliers for one lattice."""

    lattice: FrequencyLattice
    mask: np.ndarray = field(init=False)
    dx_half: np.ndarray = field(init=False)

    def __post_init__(self):
        lat = self.lattice
        nh = lat.ny // 2 + 1
        mask = np.array(lat.dealias_mask[:, :nh])
        mask[0, :] = False
        object.__setattr__(self, "mask", mask)
        ik = 1j * lat.odd_symbol(lat.XI)[:, :nh]
        object.__setattr__(self, "dx_half", np.where(mask, 0.5 * ik, 0))


_HALF_CACHE: dict = {}


def half_ops(lattice: FrequencyLattice) -> _HalfOps:
    ops = _HALF_CACHE.get(lattice)
    if ops is None:
        ops = _HALF_CACHE[lattice] = _HalfOps(lattice)
    return ops


def nonlinear_half(h: np.ndarray, lattice: FrequencyLattice) -> np.ndarray:
    """``(1/2) d/dx (u^2)`` on rfft-layout coefficients, masked and zero-mass."""
    ops = half_ops(lattice)
    n = lattice.size
    u = _fft.irfft2(h * n, s=lattice.shape)
    w = _fft.rfft2(u * u) / n
    return ops.dx_half * w


# ---------------------------------------------------------------------------
# space-time fields

@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Stack of spatial coefficient arrays on a uniform periodic time grid.

    Time nodes are ``t_n = -t_ext + n*2*t_ext/nt`` for ``n = 0..nt-1`` (so
    ``t = 0`` is node ``nt/2``). ``t_ext`` defaults to ``2*window.big_t``
    scaled by the window plateau, which holds the whole support of psi_T.
    """

    lattice: FrequencyLattice
    window: TimeWindow
    coeffs: np.ndarray
    t_ext: float | None = None
    real: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.ndim != 3 or c.shape[1:] != self.lattice.shape:
            raise RejectedInput(f"space-time array shape {c.shape} incompatible with lattice {self.lattice.shape}")
        if not _is_pow2(c.shape[0]):
            raise RejectedInput(f"nt must be a power of two, got {c.shape[0]}")
        t_ext = self.window.support if self.t_ext is None else float(self.t_ext)
        if t_ext < self.window.support * (1 - 1e-12):
            raise RejectedInput(f"t_ext={t_ext} does not contain the window support {self.window.support}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "t_ext", t_ext)

    @property
    def nt(self) -> int:
        return self.coeffs.shape[0]

    @property
    def dt(self) -> float:
        return 2 * self.t_ext / self.nt

    @cached_property
    def times(self) -> np.ndarray:
        return -self.t_ext + self.dt * np.arange(self.nt)

    @cached_property
    def tau_values(self) -> np.ndarray:
        """``2*pi*m/(2*t_ext)`` in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.nt, self.dt)

    @property
    def zero_index(self) -> int:
        return self.nt // 2

    def slice(self, n: int) -> SpectralField:
        c = self.coeffs[n]
        real = self.real and is_hermitian(c)
        return SpectralField(self.lattice, c, real, bool(np.all(c[0, :] == 0)))

    def with_coeffs(self, coeffs, real=None) -> "SpaceTimeField":
        return SpaceTimeField(self.lattice, self.window, coeffs, self.t_ext, self.real if real is None else real)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        _same_lattice(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs, self.real and other.real)

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        _same_lattice(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs, self.real and other.real)

    @classmethod
    def from_function(cls, lattice, window, nt, fn, t_ext=None, real=True) -> "SpaceTimeField":
        """Sample ``fn(t) -> coefficient array`` at every time node."""
        probe = cls(lattice, window, np.zeros((nt,) + lattice.shape, complex), t_ext, real)
        data = np.stack([np.asarray(fn(t)) for t in probe.times])
        return probe.with_coeffs(data)

    @cached_property
    def _origin_phase(self) -> np.ndarray:
        # exp(i*tau*t_ext) = (-1)^m moves the phase origin from -t_ext to t = 0
        m = np.rint(np.fft.fftfreq(self.nt) * self.nt).astype(np.int64)
        return np.where(m % 2 == 0, 1.0, -1.0)[:, None, None]

    def time_spectrum(self) -> np.ndarray:
        """Coefficients over (tau, xi, mu) in the ``exp(-i*tau*t)`` convention.

        Normalized so a unit free wave has unit weight, with the phase
        origin at t = 0: ``coeffs[n] = sum_m spec[m] exp(-i*tau_m*t_n)``.
        """
        return _fft.ifft(self.coeffs, axis=0) * self._origin_phase

    def from_time_spectrum(self, spec: np.ndarray, real=None) -> "SpaceTimeField":
        return self.with_coeffs(_fft.fft(spec * self._origin_phase, axis=0), real)
