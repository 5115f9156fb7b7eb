"""Seeded random data and built-in initial conditions.

Random streams come from a counter-based Philox generator keyed by
``(seed, sample index)``, so draws do not depend on execution order or
platform. Random coefficients are drawn on a band of integer modes
``|k| <= kmax, |l| <= lmax`` and embedded into the lattice, so two lattices
on the same box receive the same physical field.
"""

from __future__ import annotations

import numpy as np

from .lattice import (
    FrequencyLattice,
    RejectedInput,
    SpectralField,
    dealias,
    hermitian_part,
    project_zero_mass,
    to_spectral,
)


def rng_for(seed: int, index: int = 0, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def default_band(lattice: FrequencyLattice) -> tuple[int, int]:
    """Largest band inside the two-thirds mask."""
    return lattice.nx // 3, lattice.ny // 3


def _check_band(lattice, kmax, lmax):
    if 3 * kmax > lattice.nx or 3 * lmax > lattice.ny:
        raise RejectedInput(f"band ({kmax}, {lmax}) exceeds the dealias mask of {lattice.shape}")


def embed_band(block: np.ndarray, lattice: FrequencyLattice) -> np.ndarray:
    """Place a ``(2kmax+1, 2lmax+1)`` block indexed from ``-kmax`` into FFT order."""
    kmax = (block.shape[-2] - 1) // 2
    lmax = (block.shape[-1] - 1) // 2
    out = np.zeros(block.shape[:-2] + lattice.shape, dtype=np.complex128)
    ks = np.arange(-kmax, kmax + 1) % lattice.nx
    ls = np.arange(-lmax, lmax + 1) % lattice.ny
    out[..., ks[:, None], ls[None, :]] = block
    return out


def random_coefficients(lattice, rng, band=None, lead_shape=()):
    """Complex Gaussian block on the band, Hermitian-symmetrized over (k, l), xi = 0 removed."""
    kmax, lmax = default_band(lattice) if band is None else band
    _check_band(lattice, kmax, lmax)
    shape = tuple(lead_shape) + (2 * kmax + 1, 2 * lmax + 1)
    block = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    block[..., kmax, :] = 0
    return embed_band(block, lattice)


def random_field(lattice: FrequencyLattice, seed: int, index: int = 0, amplitude: float = 1.0, band=None) -> SpectralField:
    """Real, zero-x-mean, band-limited random field with unit L2 norm times ``amplitude``."""
    c = hermitian_part(random_coefficients(lattice, rng_for(seed, index), band))
    norm = np.sqrt(lattice.area * np.sum(np.abs(c) ** 2))
    if norm > 0:
        c = c * (amplitude / norm)
    return SpectralField(lattice, c, True, True)


def gaussian_bump_dx(lattice: FrequencyLattice, amplitude: float = 0.1, width: float = 6.0) -> SpectralField:
    """x-derivative of a centred Gaussian, scaled so that max|u0| = amplitude."""
    x = lattice.x - lattice.lx / 2
    y = lattice.y - lattice.ly / 2
    X, Y = np.meshgrid(x, y, indexing="ij")
    g = -2 * X / width**2 * np.exp(-(X**2 + Y**2) / width**2)
    g *= amplitude / np.max(np.abs(g))
    return project_zero_mass(dealias(to_spectral(g, lattice)))


def single_mode(lattice: FrequencyLattice, k: int = 1, l: int = 0, amplitude: float = 1.0) -> SpectralField:  # noqa: E741
    """``amplitude*cos(k*2*pi*x/lx + l*2*pi*y/ly)``."""
    return SpectralField.single_mode(lattice, k, l, amplitude / 2)
