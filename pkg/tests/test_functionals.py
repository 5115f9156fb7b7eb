import numpy as np
import pytest

from kp5.dispersion import DispersionParams, omega
from kp5.ensemble import random_field
from kp5.evolution import linear_propagate
from kp5.functionals import (
    DyadicIndex,
    NormSpec,
    ShellKind,
    aniso_sobolev_norm,
    apply_time_window,
    es_norm,
    hamiltonian,
    lp_project,
    mass,
    modulation_levels,
    modulation_project,
    shell_energies,
    shell_level,
    spacetime_l2,
    xsb_norm,
)
from kp5.lattice import (
    FrequencyLattice,
    RejectedInput,
    SpaceTimeField,
    SpectralField,
    project_zero_mass,
    to_spectral,
)
from kp5.probes import windowed_free_wave
from kp5.window import TimeWindow, bump

TWO_PI = FrequencyLattice(16, 16, 2 * np.pi, 2 * np.pi)
KP5 = DispersionParams(0.0, 1.0)
P11 = DispersionParams(1.0, 1.0)


def grid(lat):
    return np.meshgrid(lat.x, lat.y, indexing="ij")


def field(u, lat=TWO_PI):
    """Physical samples to a zero-x-mean field (drops roundoff on xi = 0)."""
    return project_zero_mass(to_spectral(u, lat))


class TestShells:
    def test_boundaries(self):
        x = np.array([0.0, 0.5, 0.999, 1.0, 1.5, 2.0, 3.0, 3.999, 4.0, -3.0, 1024.0])
        assert shell_level(x).tolist() == [0, 0, 0, 1, 1, 2, 2, 2, 3, 2, 11]

    def test_dyadic_index(self):
        with pytest.raises(ValueError):
            DyadicIndex(ShellKind.XI, -1)
        assert DyadicIndex("mu_shell_n", 2).kind is ShellKind.MU


class TestMass:
    def test_zero(self):
        assert mass(SpectralField.zeros(TWO_PI)) == 0.0

    def test_cosine(self):
        X, _ = grid(TWO_PI)
        assert mass(to_spectral(np.cos(X), TWO_PI)) == pytest.approx(np.pi * np.sqrt(2), rel=1e-14)

    def test_matches_physical_quadrature(self, rng):
        lat = FrequencyLattice(32, 16, 3.0, 5.0)
        u = rng.standard_normal(lat.shape)
        assert mass(to_spectral(u, lat)) == pytest.approx(np.sqrt(np.sum(u * u) * lat.dx * lat.dy), rel=1e-13)


class TestHamiltonian:
    def test_zero(self):
        assert hamiltonian(SpectralField.zeros(TWO_PI), P11) == 0.0

    def test_single_mode(self):
        eps = 0.3
        X, _ = grid(TWO_PI)
        f = field(eps * np.cos(X))
        assert hamiltonian(f, KP5) == pytest.approx(eps**2 * np.pi**2, rel=1e-13)

    def test_alpha_term(self):
        X, _ = grid(TWO_PI)
        f = field(np.cos(2 * X))
        # (b/2) 16 * 2pi^2 - (a/2) 4 * 2pi^2 with a = b = 1
        assert hamiltonian(f, P11) == pytest.approx(12 * np.pi**2, rel=1e-13)

    def test_mu_term(self):
        X, Y = grid(TWO_PI)
        f = field(np.cos(X + 3 * Y))
        # (1/2) int (d_x^{-1} d_y u)^2 = (1/2) 9 * 2 pi^2, plus the quartic term 2 pi^2 / 2
        assert hamiltonian(f, KP5) == pytest.approx((9 + 1) * np.pi**2, rel=1e-13)

    def test_cubic_term(self):
        # only 3 cos^2(x) cos(2x) has nonzero mean (3/4), so int u^3 = eps^3 (3/4)(2pi)^2 = 3 pi^2 eps^3
        eps = 0.01
        X, _ = grid(TWO_PI)
        f = field(eps * (np.cos(X) + np.cos(2 * X)))
        quad = 0.5 * eps**2 * (1 + 16) * 2 * np.pi**2
        assert hamiltonian(f, KP5) == pytest.approx(quad + eps**3 * np.pi**2 / 2, rel=1e-13)

    def test_translation_invariant(self, rng):
        lat = FrequencyLattice(32, 32)
        f = random_field(lat, 4, band=(6, 6))
        for sx, sy in [(3, 0), (0, 5), (7, 11)]:
            phase = np.exp(-1j * (lat.XI * sx * lat.dx + lat.MU * sy * lat.dy))
            g = f.with_coeffs(f.coeffs * phase)
            assert hamiltonian(g, P11) == pytest.approx(hamiltonian(f, P11), rel=1e-12)

    def test_rejects_mean(self):
        with pytest.raises(RejectedInput):
            hamiltonian(SpectralField.single_mode(TWO_PI, 0, 1), P11)


class TestEsNorm:
    def test_s_zero_equals_mass(self):
        f = random_field(FrequencyLattice(32, 32), 1)
        assert es_norm(f, 0.0) == mass(f)

    def test_single_mode_weight(self):
        lat = FrequencyLattice(16, 16, 2 * np.pi, np.pi)
        f = SpectralField.single_mode(lat, 1, 1)
        assert lat.MU[1, 1] == 2.0
        for s in (0.5, 1.0, 2.0):
            assert es_norm(f, s) == pytest.approx(4.0**s * mass(f), rel=1e-14)

    def test_rejects_xi_zero(self):
        with pytest.raises(RejectedInput):
            es_norm(SpectralField.single_mode(TWO_PI, 0, 2), 1.0)

    def test_monotone_in_s(self):
        f = random_field(FrequencyLattice(32, 32), 2)
        values = [es_norm(f, s) for s in np.linspace(0, 2, 9)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_linear_flow_isometry(self, rng):
        f = random_field(FrequencyLattice(64, 64), 3)
        for t in rng.uniform(-5, 5, 5):
            g = linear_propagate(f, t, P11)
            assert es_norm(g, 1.0) == pytest.approx(es_norm(f, 1.0), rel=1e-13)
            assert mass(g) == pytest.approx(mass(f), rel=1e-13)


class TestAnisoNorm:
    def test_zero_exponents(self):
        f = random_field(FrequencyLattice(32, 32), 2)
        assert aniso_sobolev_norm(f, 0, 0) == pytest.approx(mass(f), rel=1e-15)

    def test_single_mode(self):
        f = SpectralField.single_mode(TWO_PI, 1, 1)
        assert aniso_sobolev_norm(f, 0.7, 1.3) == pytest.approx(2**0.7 * 2**1.3 * mass(f), rel=1e-14)

    def test_monotone(self):
        f = random_field(FrequencyLattice(32, 32), 5)
        assert aniso_sobolev_norm(f, 1, 0) >= aniso_sobolev_norm(f, 0, 0)


class TestLpProject:
    def test_membership(self):
        f = SpectralField.single_mode(TWO_PI, 3, 1)
        kept = [m for m in range(6) if np.any(lp_project(f, DyadicIndex(ShellKind.XI, m)).coeffs)]
        assert kept == [2]

    def test_partition(self):
        f = random_field(FrequencyLattice(64, 32), 7)
        for kind in (ShellKind.XI, ShellKind.MU):
            total = sum(lp_project(f, DyadicIndex(kind, m)).coeffs for m in range(12))
            assert np.array_equal(total, f.coeffs)

    def test_disjoint(self):
        f = random_field(FrequencyLattice(32, 32), 7)
        g = lp_project(f, DyadicIndex(ShellKind.MU, 2))
        assert not np.any(lp_project(g, DyadicIndex(ShellKind.MU, 3)).coeffs)

    def test_rejects_modulation(self):
        with pytest.raises(RejectedInput):
            lp_project(random_field(TWO_PI, 1), DyadicIndex(ShellKind.MODULATION, 1))


class TestModulation:
    def plane_wave(self, big_t, nt, offset):
        lat = FrequencyLattice(8, 8, 2 * np.pi, 2 * np.pi)
        w = TimeWindow(big_t)
        proto = SpaceTimeField(lat, w, np.zeros((nt,) + lat.shape, complex), real=False)
        tau0 = omega(1.0, 2.0, P11) + offset
        c = np.zeros(proto.coeffs.shape, complex)
        c[:, 1, 2] = w.psi(proto.times) * np.exp(-1j * tau0 * proto.times)
        return proto.with_coeffs(c, real=False)

    def test_plane_wave_lands_in_its_shell(self):
        F = self.plane_wave(8.0, 1024, 3.0)
        kept = spacetime_l2(modulation_project(F, 2, P11)) ** 2
        assert 1 - kept / spacetime_l2(F) ** 2 <= 0.05

    def test_partition(self):
        F = windowed_free_wave(random_field(FrequencyLattice(16, 16), 1), TimeWindow(0.5), P11, 64)
        levels = modulation_levels(F, P11)
        parts = [modulation_project(F, j, P11, levels) for j in range(levels.max() + 1)]
        np.testing.assert_allclose(sum(q.coeffs for q in parts), F.coeffs, atol=1e-14)
        energy = sum(spacetime_l2(q) ** 2 for q in parts)
        assert energy == pytest.approx(spacetime_l2(F) ** 2, rel=1e-12)

    def test_free_wave_is_low_modulation(self):
        # default 32pi box keeps omega well inside the resolved tau range
        lat = FrequencyLattice(16, 16)
        for i in range(10):
            F = windowed_free_wave(random_field(lat, 5, i), TimeWindow(0.5), P11, 128)
            e = shell_energies(F, NormSpec(0.0, 0.0), P11)
            assert e[:3].sum() >= 0.9 * e.sum()


class TestXsb:
    def test_zero(self):
        F = SpaceTimeField(TWO_PI, TimeWindow(0.5), np.zeros((32,) + TWO_PI.shape))
        assert xsb_norm(F, NormSpec(1.0), P11) == 0.0

    def test_l2_variant_at_origin_is_spacetime_l2(self):
        F = windowed_free_wave(random_field(FrequencyLattice(16, 16), 2), TimeWindow(0.5), P11, 64)
        assert xsb_norm(F, NormSpec(0.0, 0.0), P11, "l2") == pytest.approx(spacetime_l2(F), rel=1e-12)

    def test_l1_dominates_l2(self):
        F = windowed_free_wave(random_field(FrequencyLattice(16, 16), 2), TimeWindow(0.5), P11, 64)
        assert xsb_norm(F, NormSpec(0.0, 0.0), P11) >= spacetime_l2(F)

    def test_rejects_xi_zero(self):
        c = np.zeros((16,) + TWO_PI.shape, complex)
        c[:, 0, 1] = c[:, 0, -1] = 1
        with pytest.raises(RejectedInput):
            xsb_norm(SpaceTimeField(TWO_PI, TimeWindow(0.5), c), NormSpec(0.0), P11)

    def test_unknown_variant(self):
        F = SpaceTimeField(TWO_PI, TimeWindow(0.5), np.zeros((16,) + TWO_PI.shape))
        with pytest.raises(ValueError):
            xsb_norm(F, NormSpec(0.0), P11, "sup")

    def test_free_wave_constant_is_bounded(self):
        lat = FrequencyLattice(32, 32)
        values = []
        for i in range(100):
            u0 = random_field(lat, 9, i)
            u0 = u0.with_coeffs(u0.coeffs / es_norm(u0, 1.0))
            values.append(xsb_norm(windowed_free_wave(u0, TimeWindow(0.5), P11, 64), NormSpec(1.0), P11))
        assert np.all(np.isfinite(values))
        assert max(values) <= 1.5 * min(values)


class TestWindow:
    def test_bump(self):
        t = np.array([0.0, 1.0, -1.0, 2.0, -2.0, 3.0])
        assert bump(t).tolist() == [1.0, 1.0, 1.0, 0.0, 0.0, 0.0]
        assert bump(1.5) == bump(-1.5) == pytest.approx(np.exp(1 - 1 / 0.75))

    def test_smooth_at_edges(self):
        s = np.array([1 + 1e-3, 2 - 1e-3])
        v = bump(s)
        assert v[0] == pytest.approx(1.0, abs=1e-5) and v[1] < 1e-100

    def test_apply_time_window(self, rng):
        w = TimeWindow(0.25)
        c = rng.standard_normal((32,) + TWO_PI.shape)
        F = SpaceTimeField(TWO_PI, w, c, real=False)
        G = apply_time_window(F, w)
        assert np.array_equal(G.coeffs[F.zero_index], F.coeffs[F.zero_index])
        assert not np.any(G.coeffs[0])  # t = -2T
        assert w.psi(1.5 * 0.25) == w.psi(-1.5 * 0.25)

    def test_validation(self):
        with pytest.raises(ValueError):
            TimeWindow(0.0)
        with pytest.raises(ValueError):
            TimeWindow(1.0, -1.0)
