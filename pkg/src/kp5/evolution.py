"""Time evolution: exact linear flow, nonlinear steppers, Duhamel map, Picard iteration."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dispersion import DispersionParams, omega_lattice
from .functionals import B_PLUS, NormSpec, es_norm, hamiltonian, mass, xsb_norm
from .lattice import (
    FrequencyLattice,
    RejectedInput,
    SpaceTimeField,
    SpectralField,
    full_spectrum,
    half_spectrum,
    hermitian_part,
    nonlinear_half,
)
from .window import TimeWindow

log = logging.getLogger(__name__)

INTEGRATORS = ("exponential_rk4", "splitstep2")
CONTOUR_POINTS = 32
BLOWUP_MASS_FACTOR = 10.0


class BlowUpError(RuntimeError):
    def __init__(self, time: float, reason: str = "non-finite values"):
        super().__init__(f"blow-up at t={time:.17g}: {reason}")
        self.time = time
        self.reason = reason


@dataclass(frozen=True)
class SimConfig:
    lattice: FrequencyLattice
    p: DispersionParams = DispersionParams()
    dt: float = 2e-4
    big_t: float = 1.0
    output_stride: int = 1
    seed: int = 0
    integrator: str = "exponential_rk4"
    diag_s: float = 1.0
    linear_only: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.big_t > 0:
            raise ValueError(f"big_t must be positive, got {self.big_t}")
        if int(self.output_stride) < 1:
            raise ValueError(f"output_stride must be >= 1, got {self.output_stride}")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")

    @property
    def n_steps(self) -> int:
        n = self.big_t / self.dt
        m = int(round(n))
        if abs(n - m) > 1e-9 * max(1.0, n):
            raise ValueError(f"big_t={self.big_t} is not a multiple of dt={self.dt}")
        return m


@dataclass(frozen=True, eq=False)
class Trajectory:
    config: SimConfig
    times: np.ndarray
    snapshots: list
    diagnostics: dict = field(default_factory=dict)

    def drift(self, name: str) -> float:
        """max_t |q(t) - q(0)| / |q(0)| for a diagnostic column."""
        q = np.asarray(self.diagnostics[name])
        if q[0] == 0:
            return float(np.max(np.abs(q - q[0])))
        return float(np.max(np.abs(q - q[0])) / abs(q[0]))

    def e1_sup_ratio(self) -> float:
        """sup_t ||u(t)||_{E_1} / ||u0||_{E_1}."""
        e = np.array([es_norm(f, 1.0) for f in self.snapshots])
        return float(np.max(e) / e[0]) if e[0] > 0 else 0.0


# ---------------------------------------------------------------------------
# linear flow

def phase_factors(lattice: FrequencyLattice, t: float, p: DispersionParams) -> np.ndarray:
    """``exp(-i t omega)``: the Fourier multiplier of the linear flow."""
    w = omega_lattice(lattice, p)
    return np.exp(-1j * (t * w))


def linear_propagate(f: SpectralField, t: float, p: DispersionParams) -> SpectralField:
    """Exact solution operator S(t) of the linear equation, applied to ``f``."""
    if not f.zero_x_mean:
        raise RejectedInput("linear_propagate needs a zero-x-mean field")
    c = f.coeffs * phase_factors(f.lattice, t, p)
    if f.real_symmetric:
        c = hermitian_part(c)
    return f.with_coeffs(c)


# ---------------------------------------------------------------------------
# steppers on rfft-layout arrays

def phi_coefficients(z: np.ndarray, dt: float, m: int = CONTOUR_POINTS):
    """ETDRK4 weights for ``z = L*dt`` by averaging over a unit circle around each z.

    Returns ``(Q, f1, f2, f3)`` with ``Q = dt*(e^{z/2}-1)/z`` and the three
    fourth-order weights; the contour mean avoids cancellation near z = 0.
    """
    r = np.exp(2j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
    zc = z[..., None] + r
    ez = np.exp(zc)
    z3 = zc**3
    q = dt * np.mean((np.exp(zc / 2) - 1) / zc, axis=-1)
    f1 = dt * np.mean((-4 - zc + ez * (4 - 3 * zc + zc * zc)) / z3, axis=-1)
    f2 = dt * np.mean((2 + zc + ez * (zc - 2)) / z3, axis=-1)
    f3 = dt * np.mean((-4 - 3 * zc - zc * zc + ez * (4 - zc)) / z3, axis=-1)
    return q, f1, f2, f3


class _Stepper:
    """One fixed-dt integrator on rfft-layout coefficient arrays."""

    def __init__(self, lattice, p, dt, integrator="exponential_rk4", linear_only=False):
        self.lattice = lattice
        self.dt = dt
        self.integrator = integrator
        self.linear_only = linear_only
        w = half_spectrum(omega_lattice(lattice, p)).real
        lin = -1j * w
        self.E = np.exp(lin * dt)
        self.E2 = np.exp(lin * dt / 2)
        if integrator == "exponential_rk4":
            self.Q, self.f1, self.f2, self.f3 = phi_coefficients(lin * dt, dt)

    def rhs(self, v):
        if self.linear_only:
            return np.zeros_like(v)
        return -nonlinear_half(v, self.lattice)

    # overflow is reported as BlowUpError by the callers
    @np.errstate(over="ignore", invalid="ignore")
    def __call__(self, v):
        if self.linear_only:
            return self.E * v
        if self.integrator == "exponential_rk4":
            Nv = self.rhs(v)
            a = self.E2 * v + self.Q * Nv
            Na = self.rhs(a)
            b = self.E2 * v + self.Q * Na
            Nb = self.rhs(b)
            c = self.E2 * a + self.Q * (2 * Nb - Nv)
            Nc = self.rhs(c)
            return self.E * v + Nv * self.f1 + 2 * (Na + Nb) * self.f2 + Nc * self.f3
        # Strang: exact half-step, midpoint-RK2 nonlinear step, exact half-step
        v = self.E2 * v
        k1 = self.rhs(v)
        k2 = self.rhs(v + 0.5 * self.dt * k1)
        v = v + self.dt * k2
        return self.E2 * v


_STEPPERS: dict = {}


def _stepper(lattice, p, dt, integrator, linear_only=False) -> _Stepper:
    key = (lattice, p, float(dt), integrator, bool(linear_only))
    s = _STEPPERS.get(key)
    if s is None:
        if len(_STEPPERS) > 32:
            _STEPPERS.clear()
        s = _STEPPERS[key] = _Stepper(lattice, p, dt, integrator, linear_only)
    return s


def _sum_sq(a):
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def _half_sum_sq(h):
    """sum |c|^2 over the full spectrum, from its rfft half."""
    return 2 * _sum_sq(h) - _sum_sq(h[..., 0]) - _sum_sq(h[..., -1])


def _to_field(h, lattice) -> SpectralField:
    c = hermitian_part(full_spectrum(h, lattice))
    c[0, :] = 0
    return SpectralField(lattice, c, True, True)


def _check_input(f: SpectralField):
    if not (f.real_symmetric and f.zero_x_mean):
        raise RejectedInput("evolution needs a real, zero-x-mean field")


def step(f: SpectralField, cfg: SimConfig) -> SpectralField:
    """Advance one ``cfg.dt`` with the configured integrator."""
    _check_input(f)
    st = _stepper(f.lattice, cfg.p, cfg.dt, cfg.integrator, cfg.linear_only)
    h = st(half_spectrum(f.coeffs))
    if not np.all(np.isfinite(h)):
        raise BlowUpError(cfg.dt)
    return _to_field(h, f.lattice)


def integrate_half(h, lattice, p, dt, n_steps, integrator="exponential_rk4", linear_only=False, t0=0.0, record_every=None):
    """Advance rfft-layout ``h`` by ``n_steps`` of signed size ``dt``.

    Returns the final array, or with ``record_every`` the list of arrays at
    every ``record_every``-th step (the initial state included).
    """
    st = _stepper(lattice, p, dt, integrator, linear_only)
    m0 = _half_sum_sq(h)
    out = [h] if record_every else None
    for n in range(1, n_steps + 1):
        h = st(h)
        if not np.all(np.isfinite(h)):
            raise BlowUpError(t0 + n * dt)
        if m0 > 0 and _half_sum_sq(h) > BLOWUP_MASS_FACTOR**2 * m0:
            raise BlowUpError(t0 + n * dt, "mass grew beyond 10x its initial value")
        if record_every and n % record_every == 0:
            out.append(h)
    return out if record_every else h


def simulate(u0: SpectralField, cfg: SimConfig) -> Trajectory:
    """Evolve ``u0`` to ``cfg.big_t`` and record snapshots and diagnostics."""
    _check_input(u0)
    if u0.lattice != cfg.lattice:
        raise RejectedInput("initial field lattice differs from the config lattice")
    lat = cfg.lattice
    n_steps = cfg.n_steps
    stride = int(cfg.output_stride)
    st = _stepper(lat, cfg.p, cfg.dt, cfg.integrator, cfg.linear_only)
    m0 = mass(u0)
    h = half_spectrum(u0.coeffs)
    times, snaps = [0.0], [u0]
    for n in range(1, n_steps + 1):
        h = st(h)
        t = n * cfg.dt
        if not np.all(np.isfinite(h)):
            raise BlowUpError(t)
        if n % stride == 0 or n == n_steps:
            f = _to_field(h, lat)
            if m0 > 0 and mass(f) > BLOWUP_MASS_FACTOR * m0:
                raise BlowUpError(t, "mass grew beyond 10x its initial value")
            times.append(t)
            snaps.append(f)
    diag = {
        "mass": np.array([mass(f) for f in snaps]),
        "hamiltonian": np.array([hamiltonian(f, cfg.p) for f in snaps]),
        "es_norm": np.array([es_norm(f, cfg.diag_s) for f in snaps]),
    }
    log.debug("simulate: %d steps, mass drift %.3e", n_steps, np.ptp(diag["mass"]))
    return Trajectory(cfg, np.array(times), snaps, diag)


# ---------------------------------------------------------------------------
# Duhamel map and Picard iteration

def cumulative_integral(g: np.ndarray, dt: float, zero_index: int) -> np.ndarray:
    """``G_n = int_{t_z}^{t_n} g`` on a uniform grid, for every node n.

    Composite Simpson from the zero node; with an odd number of intervals
    the last three use Simpson's 3/8 rule. The first interval on its own
    uses a one-sided 4-point rule, so every node is exact for cubics when
    at least four nodes lie on that side (fewer fall back to lower order).
    """
    nt = g.shape[0]
    out = np.zeros_like(g)

    def sweep(idx):
        # idx: node indices walking away from zero_index (idx[0] == zero_index)
        even = {0: np.zeros_like(g[0])}
        sign = 1.0 if len(idx) < 2 or idx[1] > idx[0] else -1.0
        for m in range(1, len(idx)):
            if m % 2 == 0:
                even[m] = even[m - 2] + dt / 3 * (g[idx[m - 2]] + 4 * g[idx[m - 1]] + g[idx[m]])
                out[idx[m]] = sign * even[m]
            elif m == 1:
                out[idx[1]] = sign * _first_panel(g, idx, dt)
            else:
                tail = 3 * dt / 8 * (g[idx[m - 3]] + 3 * g[idx[m - 2]] + 3 * g[idx[m - 1]] + g[idx[m]])
                out[idx[m]] = sign * (even[m - 3] + tail)
            even.pop(m - 4, None)

    sweep(list(range(zero_index, nt)))
    sweep(list(range(zero_index, -1, -1)))
    return out


def _first_panel(g, idx, dt):
    """int over [t_idx0, t_idx1] from the nodes ahead of it."""
    if len(idx) >= 4:
        return dt / 24 * (9 * g[idx[0]] + 19 * g[idx[1]] - 5 * g[idx[2]] + g[idx[3]])
    if len(idx) == 3:
        return dt / 12 * (5 * g[idx[0]] + 8 * g[idx[1]] - g[idx[2]])
    return 0.5 * dt * (g[idx[0]] + g[idx[1]])


def _duhamel_array(h: np.ndarray, times: np.ndarray, w: np.ndarray, zero_index: int) -> np.ndarray:
    """int_0^t S(t - t') h(t') dt' via S(t) int_0^t S(-t') h(t') dt'."""
    dt = times[1] - times[0]
    back = np.exp(1j * times[:, None, None] * w[None])
    g = back * h
    G = cumulative_integral(g, dt, zero_index)
    return np.conj(back) * G


def duhamel_apply(h: SpaceTimeField, p: DispersionParams) -> SpaceTimeField:
    """t -> int_0^t S(t - t') h(t') dt' on the nodes of ``h``."""
    if np.any(h.coeffs[:, 0, :] != 0):
        raise RejectedInput("duhamel_apply needs zero coefficients on xi = 0")
    w = omega_lattice(h.lattice, p)
    out = _duhamel_array(h.coeffs, h.times, w, h.zero_index)
    if h.real:
        out = hermitian_part(out)
    return h.with_coeffs(out)


def free_solution(u0: SpectralField, lattice_times, p: DispersionParams) -> np.ndarray:
    """Stack of ``S(t_n) u0`` coefficient arrays."""
    w = omega_lattice(u0.lattice, p)
    t = np.asarray(lattice_times)
    return hermitian_part(np.exp(-1j * t[:, None, None] * w[None]) * u0.coeffs[None])


@dataclass(frozen=True, eq=False)
class PicardReport:
    d: np.ndarray
    ratios: np.ndarray
    s: float
    b: float

    @property
    def contractive(self) -> bool:
        return bool(np.all(self.ratios < 1.0))


def picard_iterate(u0: SpectralField, w: TimeWindow, k_max: int, cfg: SimConfig, nt: int = 256, s: float = 1.0):
    """Successive substitution in the cut-off Duhamel map.

        L(u)(t) = psi_T(t) [ S(t) u0 - int_0^t S(t-t') psi_T(t')^2 (u u_x)(t') dt' ]

    ``u^0 = psi_T S(t) u0`` and ``u^{k+1} = L(u^k)`` for k < k_max. Returns
    the iterates (as :class:`SpaceTimeField`) and a :class:`PicardReport` with
    ``d_k = ||u^{k+1} - u^k||_{X_{s,b}}`` and the ratios ``d_{k+1}/d_k``.
    """
    _check_input(u0)
    lat = u0.lattice
    proto = SpaceTimeField(lat, w, np.zeros((nt,) + lat.shape, complex))
    times = proto.times
    psi = w.psi(times)
    wl = omega_lattice(lat, cfg.p)
    wh = half_spectrum(wl).real
    free = free_solution(u0, times, cfg.p)
    z = proto.zero_index

    u_half = half_spectrum(free) * psi[:, None, None]
    free_half = half_spectrum(free)
    iterates_half = [u_half]
    for k in range(k_max):
        nl = np.stack([nonlinear_half(u_half[n], lat) for n in range(nt)])
        nl *= (psi * psi)[:, None, None]
        duh = _duhamel_array(nl, times, wh, z)
        u_half = psi[:, None, None] * (free_half - duh)
        if not np.all(np.isfinite(u_half)):
            raise BlowUpError(float(k + 1), "non-finite Picard iterate")
        iterates_half.append(u_half)

    def to_st(a):
        c = hermitian_part(full_spectrum(a, lat))
        c[:, 0, :] = 0
        return proto.with_coeffs(c)

    iterates = [to_st(a) for a in iterates_half]
    spec = NormSpec(s, B_PLUS)
    d = np.array([xsb_norm(iterates[k + 1] - iterates[k], spec, cfg.p) for k in range(k_max)])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(d[:-1] > 0, d[1:] / np.where(d[:-1] > 0, d[:-1], 1), 0.0)
    return iterates, PicardReport(d, ratios, s, B_PLUS)


def stepped_on_nodes(u0: SpectralField, times: np.ndarray, cfg: SimConfig, substeps: int) -> dict:
    """Time-stepped solution at the grid nodes with ``|t| <= cfg.big_t``.

    Runs forward and backward from t = 0 with ``substeps`` steps per node
    spacing. Returns ``{node index: SpectralField}``.
    """
    _check_input(u0)
    lat = u0.lattice
    dt_node = times[1] - times[0]
    z = int(np.argmin(np.abs(times)))
    h0 = half_spectrum(u0.coeffs)
    out = {z: u0}
    for direction in (1, -1):
        idx = [n for n in range(len(times)) if direction * (times[n] - times[z]) > 0 and abs(times[n]) <= cfg.big_t * (1 + 1e-12)]
        idx.sort(key=lambda n: abs(times[n]))
        if not idx:
            continue
        hs = integrate_half(h0, lat, cfg.p, direction * dt_node / substeps, len(idx) * substeps,
                            cfg.integrator, cfg.linear_only, record_every=substeps)
        for n, h in zip(idx, hs[1:]):
            out[n] = _to_field(h, lat)
    return out
