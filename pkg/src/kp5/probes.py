"""Empirical-constant probes for the linear and bilinear estimates.

Each probe draws a seeded random ensemble, evaluates the ratio
``left side / right side`` of one inequality per sample, and summarizes the
ratios in a :class:`ProbeReport`. Random data live on a fixed band of
integer modes (see :mod:`kp5.ensemble`), so the refined lattice sees the
same physical data and the refinement trend isolates discretization effects.

Degenerate samples (zero right-hand side) are reported as NaN ratios and
counted, never dropped.
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _fft
from .dispersion import DispersionParams, classify_interaction, omega_lattice
from .ensemble import default_band, embed_band, random_coefficients, random_field, rng_for
from .functionals import (
    B_MINUS,
    B_PLUS,
    NormSpec,
    shell_energies,
    shell_level,
    spacetime_dx,
    spacetime_product,
    xsb_from_energies,
    xsb_norm,
)
from .io import fmt
from .lattice import FrequencyLattice, RejectedInput, SpaceTimeField, SpectralField, hermitian_part
from .window import TimeWindow

PROBES = ("strichartz", "dyadic-strichartz", "maximal", "time-gain", "bilinear")

# distinct PRNG streams per probe, so ensembles of different probes are independent
_STREAM = {name: i + 1 for i, name in enumerate(PROBES)}


def delta(r: float) -> float:
    return 2.0 * (0.5 - 1.0 / r)


@dataclass(frozen=True)
class StrichartzExponents:
    """Admissible pair: ``2 <= r < inf`` and ``2/q = delta(r)``; q may be ``inf`` when r = 2."""

    q: float
    r: float

    def __post_init__(self):
        q, r = float(self.q), float(self.r)
        if not (2.0 <= r < math.inf):
            raise ValueError(f"need 2 <= r < inf, got r={r}")
        if not q >= 2.0 and q != math.inf:
            raise ValueError(f"need q >= 2, got q={q}")
        if abs(2.0 / q - delta(r)) > 1e-12:
            raise ValueError(f"(q, r) = ({q}, {r}) violates 2/q = delta(r) = {delta(r)}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_r(cls, r: float) -> "StrichartzExponents":
        d = delta(r)
        return cls(math.inf if d == 0 else 2.0 / d, r)

    @property
    def derivative(self) -> float:
        """Exponent of |D_x| on the left side: delta(r)/2."""
        return delta(self.r) / 2.0


# ---------------------------------------------------------------------------
# report

@dataclass(frozen=True, eq=False)
class ProbeReport:
    inequality: str
    ensemble: int
    seed: int
    lattices: tuple
    window: dict
    params: dict
    ratios: np.ndarray
    refined_ratios: np.ndarray | None = None
    extra: dict = field(default_factory=dict)
    sample_rows: list | None = None

    @property
    def degenerate(self) -> int:
        return int(np.count_nonzero(np.isnan(self.ratios)))

    @staticmethod
    def _stat(r, fn):
        r = np.asarray(r)
        r = r[~np.isnan(r)]
        return float(fn(r)) if r.size else math.nan

    @property
    def max_ratio(self) -> float:
        return self._stat(self.ratios, np.max)

    @property
    def median_ratio(self) -> float:
        return self._stat(self.ratios, np.median)

    @property
    def refined_max_ratio(self) -> float:
        return math.nan if self.refined_ratios is None else self._stat(self.refined_ratios, np.max)

    @property
    def refinement_trend(self) -> float:
        """max ratio on the refined lattice over max ratio on the base lattice."""
        if self.refined_ratios is None:
            return math.nan
        base = self.max_ratio
        return self.refined_max_ratio / base if base > 0 else math.nan

    def summary(self) -> dict:
        out = {
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "refinement_trend": self.refinement_trend,
            "refined_max_ratio": self.refined_max_ratio,
            "degenerate": self.degenerate,
        }
        out.update(self.extra)
        return out

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["inequality", self.inequality])
        w.writerow(["ensemble", self.ensemble])
        w.writerow(["seed", self.seed])
        for name, lat in zip(("lattice", "refined_lattice"), self.lattices):
            w.writerow([name, f"{lat.nx}x{lat.ny}", fmt(lat.lx), fmt(lat.ly)])
        for k, v in self.window.items():
            w.writerow(["window", k, _cell(v)])
        for k, v in self.params.items():
            w.writerow(["param", k, _cell(v)])
        if self.sample_rows is None:
            w.writerow(["index", "ratio", "refined_ratio"])
            ref = self.refined_ratios if self.refined_ratios is not None else [math.nan] * len(self.ratios)
            for i, (a, b) in enumerate(zip(self.ratios, ref)):
                w.writerow([i, _cell(a), _cell(b)])
        else:
            w.writerow(self.sample_rows[0])
            for row in self.sample_rows[1:]:
                w.writerow([_cell(v) for v in row])
        for k, v in self.summary().items():
            w.writerow([k, _cell(v)])
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "degenerate"
        return fmt(v)
    return str(v)


def _lattices(lattice: FrequencyLattice, refine: bool) -> tuple:
    return (lattice, lattice.refined(2)) if refine else (lattice,)


def _check_t(big_t: float):
    if not 0 < big_t < 1:
        raise RejectedInput(f"need 0 < T < 1, got T={big_t}")


def _sum_sq(a) -> float:
    return float(np.sum(a.real * a.real + a.imag * a.imag))


def _lr_norm(u: np.ndarray, r: float, cell: float) -> np.ndarray:
    """Spatial L^r norms of a stack ``(nt, nx, ny)`` of samples."""
    a = np.abs(u)
    if r == 2.0:
        return np.sqrt(np.sum(a * a, axis=(-2, -1)) * cell)
    return (np.sum(a**r, axis=(-2, -1)) * cell) ** (1.0 / r)


def _lq(values: np.ndarray, q: float, dt: float) -> float:
    """Rectangle-rule L^q in time (grid max for q = inf)."""
    if q == math.inf:
        return float(np.max(values))
    return float((np.sum(values**q) * dt) ** (1.0 / q))


def _physical(c: np.ndarray, lattice: FrequencyLattice) -> np.ndarray:
    return _fft.ifft2(c) * lattice.size


# ---------------------------------------------------------------------------
# Strichartz

def strichartz_ratio(u0: SpectralField, e: StrichartzExponents, p: DispersionParams, big_t: float, nt: int = 64) -> float:
    """``|| |D_x|^{delta/2} S(t) u0 ||_{L^q_T L^r} / ||u0||_{L2}`` on ``[-T, T]``.

    Time quadrature is the midpoint rectangle rule with ``nt`` nodes. The
    data are normalized to unit L2 norm first, which makes the ratio exactly
    invariant under power-of-two rescaling.
    """
    lat = u0.lattice
    m = math.sqrt(lat.area * _sum_sq(u0.coeffs))
    if m == 0:
        return math.nan
    c = u0.coeffs / m
    h = 2.0 * big_t / nt
    t = -big_t + h * (np.arange(nt) + 0.5)
    w = omega_lattice(lat, p)
    d = np.abs(lat.XI) ** e.derivative if e.derivative else np.ones(lat.shape)
    stack = np.exp(-1j * t[:, None, None] * w[None]) * (d * c)[None]
    u = _physical(stack, lat).real
    return _lq(_lr_norm(u, e.r, lat.dx * lat.dy), e.q, h)


def strichartz_probe(e: StrichartzExponents, ensemble: int, seed: int, lattice: FrequencyLattice,
                     p: DispersionParams, w: TimeWindow, nt: int = 64, band=None, refine: bool = True) -> ProbeReport:
    _check_t(w.big_t)
    band = default_band(lattice) if band is None else tuple(band)
    lats = _lattices(lattice, refine)
    per = []
    for lat in lats:
        per.append(np.array([
            strichartz_ratio(random_field(lat, seed, i, band=band), e, p, w.big_t, nt) for i in range(ensemble)
        ]))
    return ProbeReport(
        "strichartz", ensemble, seed, lats,
        {"T": w.big_t, "nt": nt, "rule": "midpoint"},
        {"q": e.q, "r": e.r, "derivative_exponent": e.derivative, "band_k": band[0], "band_l": band[1],
         "alpha": p.alpha, "beta": p.beta},
        per[0], per[1] if refine else None,
    )


# ---------------------------------------------------------------------------
# dyadic Strichartz

def _band_omega(lattice: FrequencyLattice, band, p: DispersionParams):
    kmax, lmax = band
    xi = 2 * np.pi * np.arange(-kmax, kmax + 1) / lattice.lx
    mu = 2 * np.pi * np.arange(-lmax, lmax + 1) / lattice.ly
    XI, MU = np.meshgrid(xi, mu, indexing="ij")
    safe = np.where(XI == 0, 1.0, XI)
    w = p.beta * XI**5 - p.alpha * XI**3 + MU * MU / safe
    return XI, np.where(XI == 0, 0.0, w)


@dataclass(frozen=True)
class _ShellSample:
    ratio: float
    ratio_no_modulus: float


def _dyadic_sample(block, j, e, lattices, xi_b, w_b, big_t, t_ext):
    """Ratios for one random spectrum block ``(nt, 2K+1, 2L+1)`` on each lattice."""
    nt = block.shape[0]
    dt = 2 * t_ext / nt
    tau = 2 * np.pi * np.fft.fftfreq(nt, dt)
    keep = shell_level(tau[:, None, None] - w_b[None]) == j
    keep &= (xi_b != 0)[None]
    if not np.any(keep):
        return None
    times = -t_ext + dt * np.arange(nt)
    inside = np.abs(times) <= big_t * (1 + 1e-12)
    d = np.abs(xi_b) ** e.derivative if e.derivative else np.ones(xi_b.shape)
    m = np.rint(np.fft.fftfreq(nt) * nt).astype(np.int64)
    origin = np.where(m % 2 == 0, 1.0, -1.0)[:, None, None]  # phase origin at t = 0
    out = []
    for spec in (np.abs(block), block):
        fj = np.where(keep, spec, 0)
        l2 = math.sqrt(2 * t_ext * lattices[0].area * _sum_sq(fj))
        if l2 == 0:
            out.append([math.nan] * len(lattices))
            continue
        fj = fj / l2
        slices = _fft.fft(fj * origin, axis=0)[inside] * d[None]
        row = []
        for lat in lattices:
            u = _physical(embed_band(slices, lat), lat)
            num = _lq(_lr_norm(u, e.r, lat.dx * lat.dy), e.q, dt)
            row.append(num / 2.0 ** (j / 2))
        out.append(row)
    return out


def dyadic_strichartz_probe(j: int, e: StrichartzExponents, ensemble: int, seed: int, lattice: FrequencyLattice,
                            p: DispersionParams, w: TimeWindow, nt: int = 128, band=None, refine: bool = True) -> ProbeReport:
    """Ratios ``|| |D_x|^{delta/2} f_j ||_{L^q_T L^r} / (2^{j/2} ||f_j||_{L2})``.

    ``f_j`` is the inverse transform of ``chi_j(tau - omega) |f_hat|`` for a
    random space-time spectrum ``f_hat`` on the time grid of ``[-t_ext, t_ext]``
    with ``t_ext = 2T``. The same ratios without the modulus are reported as
    ``no_modulus_*``; ``modulus_divergence`` flags when the two maxima differ
    by more than a factor 2.
    """
    _check_t(w.big_t)
    if j < 0:
        raise ValueError(f"shell index must be >= 0, got {j}")
    band = default_band(lattice) if band is None else tuple(band)
    lats = _lattices(lattice, refine)
    t_ext = 2.0 * w.big_t
    xi_b, w_b = _band_omega(lattice, band, p)
    mod = [[] for _ in lats]
    nomod = [[] for _ in lats]
    empty = False
    for i in range(ensemble):
        rng = rng_for(seed, i, _STREAM["dyadic-strichartz"])
        shape = (nt, 2 * band[0] + 1, 2 * band[1] + 1)
        block = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        res = _dyadic_sample(block, j, e, lats, xi_b, w_b, w.big_t, t_ext)
        if res is None:
            empty = True
            res = [[math.nan] * len(lats)] * 2
        for k in range(len(lats)):
            mod[k].append(res[0][k])
            nomod[k].append(res[1][k])
    mod = [np.array(m) for m in mod]
    nomod = np.array(nomod[0])
    report = ProbeReport(
        "dyadic-strichartz", ensemble, seed, lats,
        {"T": w.big_t, "t_ext": t_ext, "nt": nt, "rule": "rectangle"},
        {"j": j, "q": e.q, "r": e.r, "derivative_exponent": e.derivative, "band_k": band[0], "band_l": band[1],
         "alpha": p.alpha, "beta": p.beta},
        mod[0], mod[1] if refine else None,
    )
    nm_max = ProbeReport._stat(nomod, np.max)
    report.extra.update({
        "empty_shell": empty,
        "no_modulus_max_ratio": nm_max,
        "no_modulus_median_ratio": ProbeReport._stat(nomod, np.median),
    })
    base = report.max_ratio
    report.extra["modulus_divergence"] = bool(
        not empty and base > 0 and nm_max > 0 and not (0.5 <= nm_max / base <= 2.0)
    )
    return report


# ---------------------------------------------------------------------------
# maximal estimate

@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier descriptor.

    ``kind`` is ``"ones"``, ``"zeros"`` or ``"box"`` (indicator of
    ``|xi| <= xi_max, |mu| <= mu_max``).
    """

    kind: str = "box"
    xi_max: float = 1.0
    mu_max: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ones", "zeros", "box"):
            raise ValueError(f"unknown multiplier kind {self.kind!r}")

    def on(self, lattice: FrequencyLattice) -> np.ndarray:
        if self.kind == "ones":
            return np.ones(lattice.shape)
        if self.kind == "zeros":
            return np.zeros(lattice.shape)
        inside = (np.abs(lattice.XI) <= self.xi_max) & (np.abs(lattice.MU) <= self.mu_max)
        return inside.astype(float)


def multiplier_l2(m: np.ndarray, lattice: FrequencyLattice) -> float:
    """``||m||_{L2}`` with measure ``d xi d mu / (2 pi)^2``.

    With this normalization ``sup |T_m g| <= ||m|| ||g||_{L2}`` holds with
    constant exactly 1 on the lattice (Cauchy-Schwarz).
    """
    cell = (2 * np.pi / lattice.lx) * (2 * np.pi / lattice.ly) / (2 * np.pi) ** 2
    return math.sqrt(float(np.sum(np.abs(m) ** 2)) * cell)


def apply_multiplier(coeffs: np.ndarray, m: np.ndarray) -> np.ndarray:
    return coeffs * m


def maximal_ratio(coeffs: np.ndarray, m: np.ndarray, lattice: FrequencyLattice) -> float:
    """``||T_m f||_{L2_t Linf_xy} / (||m|| ||f||_{L2})`` for a stack ``(nt, nx, ny)``.

    The time step cancels, so a unit spacing is used.
    """
    mn = multiplier_l2(m, lattice)
    fn = math.sqrt(lattice.area * _sum_sq(coeffs))
    if mn == 0 or fn == 0:
        return math.nan
    u = _physical(apply_multiplier(coeffs, m), lattice)
    sup = np.max(np.abs(u), axis=(-2, -1))
    return float(np.sqrt(np.sum(sup * sup)) / (mn * fn))


def maximal_probe(m_spec: Multiplier, ensemble: int, seed: int, lattice: FrequencyLattice,
                  nt: int = 16, band=None, refine: bool = True) -> ProbeReport:
    band = default_band(lattice) if band is None else tuple(band)
    lats = _lattices(lattice, refine)
    per = []
    for lat in lats:
        m = m_spec.on(lat)
        vals = []
        for i in range(ensemble):
            rng = rng_for(seed, i, _STREAM["maximal"])
            c = random_coefficients(lat, rng, band, (nt,))
            vals.append(maximal_ratio(c, m, lat))
        per.append(np.array(vals))
    m0 = m_spec.on(lattice)
    return ProbeReport(
        "maximal", ensemble, seed, lats, {"nt": nt},
        {"multiplier": m_spec.kind, "xi_max": m_spec.xi_max, "mu_max": m_spec.mu_max,
         "m_l2": multiplier_l2(m0, lattice), "band_k": band[0], "band_l": band[1]},
        per[0], per[1] if refine else None,
    )


# ---------------------------------------------------------------------------
# time-localization gain

def windowed_free_wave(u0: SpectralField, w: TimeWindow, p: DispersionParams, nt: int, t_ext: float | None = None) -> SpaceTimeField:
    """``psi_T(t) S(t) u0`` sampled on the space-time grid."""
    proto = SpaceTimeField(u0.lattice, w, np.zeros((nt,) + u0.lattice.shape, complex), t_ext)
    t = proto.times
    om = omega_lattice(u0.lattice, p)
    c = np.exp(-1j * t[:, None, None] * om[None]) * u0.coeffs[None] * w.psi(t)[:, None, None]
    return proto.with_coeffs(hermitian_part(c))


def time_gain_ratios(u0: SpectralField, a: float, b: float, t_list, p: DispersionParams, nt: int, t_ext: float) -> np.ndarray:
    """``||f_T||_{X_{0,b-a}} / ||f_T||_{X_{0,b}}`` for ``f_T = psi(2t/T) S(t) u0`` (support [-T, T])."""
    out = []
    for big_t in t_list:
        f = windowed_free_wave(u0, TimeWindow(big_t, 0.5), p, nt, t_ext)
        e = shell_energies(f, NormSpec(0.0, b), p)
        den = xsb_from_energies(e, b)
        out.append(xsb_from_energies(e, b - a) / den if den > 0 else math.nan)
    return np.array(out)


def fit_power_law(t_list, g) -> tuple[float, float]:
    """Least-squares slope of ``log g`` against ``log T`` and the RMS residual."""
    x = np.log(np.asarray(t_list, dtype=float))
    y = np.log(np.asarray(g, dtype=float))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid * resid)))


def time_gain_probe(a: float, b: float, t_list, ensemble: int, seed: int, lattice: FrequencyLattice,
                    p: DispersionParams, nt: int = 1024, t_ext: float = 1.0, band=None) -> ProbeReport:
    """Fit ``g(T) ~ T^sigma`` where ``g(T)`` is the ensemble max of the X_{0,b-a}/X_{0,b} ratio.

    Samples are windowed free waves ``psi(2t/T) S(t) u0`` supported in
    ``[-T, T]`` on a time grid of ``nt`` nodes over ``[-t_ext, t_ext]``.
    """
    t_list = [float(t) for t in t_list]
    if len(t_list) < 3:
        raise RejectedInput("time_gain_probe needs at least 3 values of T")
    if a < 0 or b < 0:
        raise RejectedInput(f"need a >= 0 and b >= 0, got a={a}, b={b}")
    for t in t_list:
        _check_t(t)
    if t_ext < max(t_list):
        raise RejectedInput(f"t_ext={t_ext} does not contain [-T, T] for T={max(t_list)}")
    band = (min(8, lattice.nx // 3), min(8, lattice.ny // 3)) if band is None else tuple(band)
    table = np.array([
        time_gain_ratios(random_field(lattice, seed, i, band=band), a, b, t_list, p, nt, t_ext)
        for i in range(ensemble)
    ])
    g = np.nanmax(table, axis=0) if np.any(~np.isnan(table)) else np.full(len(t_list), math.nan)
    if a == 0:
        sigma, resid = 0.0, 0.0
    else:
        sigma, resid = fit_power_law(t_list, g)
    rows = [["index", "T", "ratio"]]
    for i in range(ensemble):
        for k, t in enumerate(t_list):
            rows.append([i, t, table[i, k]])
    extra = {f"g(T={t:g})": float(gv) for t, gv in zip(t_list, g)}
    extra.update({"sigma_hat": sigma, "fit_residual": resid})
    return ProbeReport(
        "time-gain", ensemble, seed, (lattice,),
        {"t_ext": t_ext, "nt": nt, "support": "[-T,T]"},
        {"a": a, "b": b, "T_list": " ".join(fmt(t) for t in t_list), "band_k": band[0], "band_l": band[1],
         "alpha": p.alpha, "beta": p.beta},
        table.ravel(), None, extra, rows,
    )


# ---------------------------------------------------------------------------
# bilinear estimate

def bilinear_ratio(u: SpaceTimeField, v: SpaceTimeField, s: float, p: DispersionParams) -> float:
    """``||d_x(u v)||_{X_{s,-1/2+}} / (||u||_{X_{s,1/2+}} ||v||_{X_{s,1/2+}})``."""
    du = xsb_norm(u, NormSpec(s, B_PLUS), p)
    dv = xsb_norm(v, NormSpec(s, B_PLUS), p)
    if du == 0 or dv == 0:
        return math.nan
    num = xsb_norm(spacetime_dx(spacetime_product(u, v)), NormSpec(s, B_MINUS), p)
    return num / (du * dv)


def dominant_frequency(f: SpectralField) -> tuple[float, float]:
    """(xi, mu) of the largest coefficient with xi > 0."""
    lat = f.lattice
    a = np.where(lat.XI > 0, np.abs(f.coeffs), -1.0)
    k, l = np.unravel_index(int(np.argmax(a)), a.shape)  # noqa: E741
    return float(lat.xi[k]), float(lat.mu[l])


def bilinear_probe(s: float, ensemble: int, seed: int, lattice: FrequencyLattice, p: DispersionParams,
                   w: TimeWindow, nt: int = 64, band=None, refine: bool = True) -> ProbeReport:
    """Bilinear ratios for pairs of windowed free waves ``psi_T(t) S(t) u0``.

    The default band ``(nx//6, ny//6)`` keeps the product inside the
    dealias mask, so it is formed without truncation on every lattice.
    """
    if not 0 < s <= 1:
        raise RejectedInput(f"need 0 < s <= 1, got s={s}")
    _check_t(w.big_t)
    band = (lattice.nx // 6, lattice.ny // 6) if band is None else tuple(band)
    lats = _lattices(lattice, refine)
    per = [[] for _ in lats]
    classes = []
    for i in range(ensemble):
        for k, lat in enumerate(lats):
            u0 = random_field(lat, seed, 2 * i, band=band)
            v0 = random_field(lat, seed, 2 * i + 1, band=band)
            u = windowed_free_wave(u0, w, p, nt)
            v = windowed_free_wave(v0, w, p, nt)
            per[k].append(bilinear_ratio(u, v, s, p))
            if k == 0:
                x1, m1 = dominant_frequency(u0)
                x2, m2 = dominant_frequency(v0)
                classes.append(classify_interaction(x1, x2, p, m1, m2))
    per = [np.array(r) for r in per]
    report = ProbeReport(
        "bilinear", ensemble, seed, lats,
        {"T": w.big_t, "scale": w.scale, "t_ext": w.support, "nt": nt},
        {"s": s, "b_plus": B_PLUS, "b_minus": B_MINUS, "band_k": band[0], "band_l": band[1],
         "alpha": p.alpha, "beta": p.beta},
        per[0], per[1] if refine else None,
    )
    tags = np.array([c.tag.value for c in classes])
    for tag in ("LowLow", "HighHigh", "HighLow"):
        sel = per[0][tags == tag]
        report.extra[f"class_{tag}_count"] = int(sel.size)
        if sel.size:
            report.extra[f"class_{tag}_max_ratio"] = ProbeReport._stat(sel, np.max)
    report.extra["resonant_count"] = int(sum(bool(c.resonant) for c in classes))
    return report
