import numpy as np
import pytest

from kp5.dispersion import DispersionParams
from kp5.ensemble import gaussian_bump_dx, random_field
from kp5.evolution import (
    BlowUpError,
    SimConfig,
    cumulative_integral,
    duhamel_apply,
    free_solution,
    linear_propagate,
    picard_iterate,
    simulate,
    step,
)
from kp5.functionals import NormSpec, es_norm, mass, xsb_norm
from kp5.lattice import FrequencyLattice, RejectedInput, SpaceTimeField, SpectralField, to_physical, to_spectral
from kp5.window import TimeWindow

P11 = DispersionParams(1.0, 1.0)
KP5 = DispersionParams(0.0, 1.0)


def max_rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


class TestLinearPropagate:
    def test_identity(self):
        f = random_field(FrequencyLattice(32, 32), 1)
        assert np.array_equal(linear_propagate(f, 0.0, P11).coeffs, f.coeffs)

    def test_group_law(self, rng):
        f = random_field(FrequencyLattice(64, 64), 2)
        for t1, t2 in rng.uniform(-3, 3, (5, 2)):
            a = linear_propagate(linear_propagate(f, t1, P11), t2, P11)
            b = linear_propagate(f, t1 + t2, P11)
            assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))

    def test_half_period(self):
        lat = FrequencyLattice(8, 8, 2 * np.pi, 2 * np.pi)
        f = SpectralField.single_mode(lat, 1, 0)
        g = linear_propagate(f, np.pi, KP5)
        np.testing.assert_allclose(g.coeffs, -f.coeffs, atol=1e-15)

    def test_isometries(self, rng):
        f = random_field(FrequencyLattice(64, 64), 3)
        for t in rng.uniform(-10, 10, 5):
            g = linear_propagate(f, t, P11)
            assert mass(g) == pytest.approx(mass(f), rel=1e-13)
            assert es_norm(g, 0.5) == pytest.approx(es_norm(f, 0.5), rel=1e-13)
            assert g.real_symmetric and g.zero_x_mean

    def test_solves_linear_equation(self):
        # u_t = -a u_xxx - b u_xxxxx - d_x^{-1} u_yy, derivatives from numpy's FFT
        lat = FrequencyLattice(32, 32, 2 * np.pi, 2 * np.pi)
        f = random_field(lat, 4, band=(4, 4))
        p = DispersionParams(0.7, 1.3)
        kx = np.fft.fftfreq(lat.nx, 1 / lat.nx)[:, None]
        ky = np.fft.fftfreq(lat.ny, 1 / lat.ny)[None, :]
        u_hat = np.fft.fft2(to_physical(f))
        inv = np.divide(1.0, 1j * kx, out=np.zeros_like(u_hat), where=kx != 0)
        rhs_hat = -p.alpha * (1j * kx) ** 3 * u_hat - p.beta * (1j * kx) ** 5 * u_hat - inv * (1j * ky) ** 2 * u_hat
        rhs = np.real(np.fft.ifft2(rhs_hat))
        h = 1e-6
        du = (to_physical(linear_propagate(f, h, p)) - to_physical(linear_propagate(f, -h, p))) / (2 * h)
        assert max_rel(du, rhs) <= 1e-6

    def test_rejects_mean(self):
        lat = FrequencyLattice(8, 8)
        with pytest.raises(RejectedInput):
            linear_propagate(SpectralField.single_mode(lat, 0, 1), 1.0, P11)


class TestStep:
    def cfg(self, lat, **kw):
        return SimConfig(lat, P11, **kw)

    def test_zero(self):
        lat = FrequencyLattice(16, 16)
        assert not np.any(step(SpectralField.zeros(lat), self.cfg(lat)).coeffs)

    @pytest.mark.parametrize("integrator", ["exponential_rk4", "splitstep2"])
    def test_linear_only_is_exact(self, integrator):
        lat = FrequencyLattice(32, 32)
        f = random_field(lat, 5)
        cfg = self.cfg(lat, dt=1e-2, integrator=integrator, linear_only=True)
        g = step(f, cfg)
        ref = linear_propagate(f, 1e-2, P11)
        assert np.max(np.abs(g.coeffs - ref.coeffs)) <= 1e-12 * np.max(np.abs(f.coeffs))

    def test_output_invariants(self):
        lat = FrequencyLattice(32, 32)
        g = step(random_field(lat, 6, amplitude=0.1), self.cfg(lat))
        assert g.real_symmetric and g.zero_x_mean

    def test_blow_up(self):
        lat = FrequencyLattice(16, 16, 2 * np.pi, 2 * np.pi)
        f = random_field(lat, 1, amplitude=1e200)
        with pytest.raises(BlowUpError) as err:
            step(f, self.cfg(lat, dt=0.1))
        assert err.value.time == 0.1

    def test_rejects_mean(self):
        lat = FrequencyLattice(8, 8)
        with pytest.raises(RejectedInput):
            step(SpectralField.single_mode(lat, 0, 1), self.cfg(lat))


def self_convergence_order(integrator, lat, u0, big_t, dts):
    ends = []
    for dt in dts:
        cfg = SimConfig(lat, P11, dt=dt, big_t=big_t, output_stride=10**9, integrator=integrator)
        ends.append(simulate(u0, cfg).snapshots[-1].coeffs)
    e1 = np.linalg.norm(ends[0] - ends[1])
    e2 = np.linalg.norm(ends[1] - ends[2])
    return np.log2(e1 / e2)


class TestOrder:
    def test_splitstep2_is_second_order(self):
        lat = FrequencyLattice(32, 32)
        u0 = gaussian_bump_dx(lat, amplitude=0.5)
        order = self_convergence_order("splitstep2", lat, u0, 0.5, [0.05, 0.025, 0.0125])
        assert 1.8 <= order <= 2.3

    def test_exponential_rk4_is_fourth_order(self):
        lat = FrequencyLattice(32, 32)
        u0 = gaussian_bump_dx(lat, amplitude=0.5)
        order = self_convergence_order("exponential_rk4", lat, u0, 0.5, [0.05, 0.025, 0.0125])
        assert order >= 3.7


class TestSimulate:
    def test_zero(self):
        lat = FrequencyLattice(16, 16)
        tr = simulate(SpectralField.zeros(lat), SimConfig(lat, dt=0.01, big_t=0.1, output_stride=2))
        assert tr.times.tolist() == pytest.approx([0, 0.02, 0.04, 0.06, 0.08, 0.1])
        for name in ("mass", "hamiltonian", "es_norm"):
            assert not np.any(tr.diagnostics[name])

    def test_linear_only_constant_diagnostics(self):
        lat = FrequencyLattice(32, 32)
        cfg = SimConfig(lat, P11, dt=0.01, big_t=0.2, linear_only=True)
        tr = simulate(random_field(lat, 3), cfg)
        assert tr.drift("mass") <= 1e-13 and tr.drift("es_norm") <= 1e-13

    def test_times_strictly_increasing(self):
        lat = FrequencyLattice(16, 16)
        tr = simulate(gaussian_bump_dx(lat), SimConfig(lat, dt=0.01, big_t=0.1, output_stride=3))
        assert np.all(np.diff(tr.times) > 0) and tr.times[-1] == pytest.approx(0.1)
        assert all(f.real_symmetric and f.zero_x_mean for f in tr.snapshots)

    def test_short_conservation(self):
        lat = FrequencyLattice(32, 32)
        tr = simulate(gaussian_bump_dx(lat, 0.1), SimConfig(lat, dt=2e-3, big_t=0.2, output_stride=10))
        assert tr.drift("mass") <= 1e-10 and tr.drift("hamiltonian") <= 1e-8
        assert tr.e1_sup_ratio() >= 1.0

    def test_lattice_mismatch(self):
        lat = FrequencyLattice(16, 16)
        with pytest.raises(RejectedInput):
            simulate(SpectralField.zeros(lat.refined()), SimConfig(lat, dt=0.01, big_t=0.1))

    def test_mass_growth_detected(self):
        lat = FrequencyLattice(16, 16, 2 * np.pi, 2 * np.pi)
        cfg = SimConfig(lat, P11, dt=0.05, big_t=5.0, integrator="splitstep2")
        with pytest.raises(BlowUpError):
            simulate(random_field(lat, 2, amplitude=1e3), cfg)


class TestSimConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(dt=0.0), dict(dt=-1.0), dict(big_t=0.0), dict(output_stride=0), dict(integrator="euler")],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SimConfig(FrequencyLattice(8, 8), **kw)

    def test_non_multiple_horizon(self):
        with pytest.raises(ValueError):
            SimConfig(FrequencyLattice(8, 8), dt=0.3, big_t=1.0).n_steps


class TestCumulativeIntegral:
    @pytest.mark.parametrize("nt, z", [(16, 8), (32, 16), (17, 5), (9, 0), (8, 7), (2, 1)])
    def test_cubic_exact(self, nt, z):
        t = -1.0 + 0.125 * np.arange(nt)
        t = t - t[z]
        g = 1 + 2 * t - 3 * t**2 + 4 * t**3
        G = cumulative_integral(g, 0.125, z)
        exact = t + t**2 - t**3 + t**4
        if nt == 2:
            # single interval: trapezoid, exact for linear parts only
            exact = 0.5 * 0.125 * (g[0] + g[1]) * np.sign(t)
        np.testing.assert_allclose(G, exact, atol=1e-13)

    def test_vector_valued(self):
        g = np.ones((16, 3, 2))
        G = cumulative_integral(g, 0.5, 8)
        assert G[8].tolist() == np.zeros((3, 2)).tolist()
        np.testing.assert_allclose(G[12], 2.0)
        np.testing.assert_allclose(G[0], -4.0)


class TestDuhamel:
    def proto(self, lat, p, nt=64):
        return SpaceTimeField(lat, TimeWindow(0.5), np.zeros((nt,) + lat.shape, complex))

    def test_zero(self):
        lat = FrequencyLattice(16, 16)
        F = self.proto(lat, P11)
        assert not np.any(duhamel_apply(F, P11).coeffs)

    def test_identity_flow_polynomial(self):
        # alpha = beta = 0 makes omega vanish on mu = 0, so S acts as the identity there
        lat = FrequencyLattice(16, 16)
        p = DispersionParams(0.0, 0.0)
        F = self.proto(lat, p)
        t = F.times
        c = np.zeros(F.coeffs.shape, complex)
        c[:, 1, 0] = 1 - t**2 + 2 * t**3
        c[:, -1, 0] = np.conj(c[:, 1, 0])
        out = duhamel_apply(F.with_coeffs(c), p).coeffs[:, 1, 0]
        np.testing.assert_allclose(out, t - t**3 / 3 + t**4 / 2, atol=1e-13)

    def test_group_law_oracle(self):
        lat = FrequencyLattice(32, 32)
        g = random_field(lat, 8)
        F = self.proto(lat, P11, nt=128)
        h = F.with_coeffs(free_solution(g, F.times, P11))
        out = duhamel_apply(h, P11).coeffs
        expected = F.times[:, None, None] * h.coeffs
        assert max_rel(out, expected) <= 1e-10

    def test_rejects_xi_zero(self):
        lat = FrequencyLattice(8, 8)
        c = np.zeros((16,) + lat.shape, complex)
        c[:, 0, 1] = c[:, 0, -1] = 1
        with pytest.raises(RejectedInput):
            duhamel_apply(SpaceTimeField(lat, TimeWindow(0.5), c), P11)


class TestPicard:
    def test_zero_data(self):
        lat = FrequencyLattice(16, 16)
        cfg = SimConfig(lat, P11, dt=0.01, big_t=0.1)
        its, rep = picard_iterate(SpectralField.zeros(lat), TimeWindow(0.1), 3, cfg, nt=32)
        assert all(not np.any(u.coeffs) for u in its)
        assert not np.any(rep.d)

    def test_quadratic_first_correction(self):
        lat = FrequencyLattice(32, 32)
        cfg = SimConfig(lat, P11, dt=0.01, big_t=0.1)
        u0 = gaussian_bump_dx(lat, amplitude=1e-3)
        its, rep = picard_iterate(u0, TimeWindow(0.1), 1, cfg, nt=64)
        assert rep.d[0] / xsb_norm(its[0], NormSpec(1.0), P11) <= 1e-2

    def test_small_data_contracts(self):
        lat = FrequencyLattice(32, 32)
        cfg = SimConfig(lat, P11, dt=0.01, big_t=0.1)
        _, rep = picard_iterate(gaussian_bump_dx(lat, 0.1), TimeWindow(0.1), 4, cfg, nt=64)
        assert rep.contractive and np.all(rep.ratios <= 0.5)
