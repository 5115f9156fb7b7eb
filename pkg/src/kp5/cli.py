"""Command-line front end.

    kp5 simulate --init gaussian-bump-x-derivative --nx 128 --ny 128
    kp5 probe strichartz --q 4 --r 4 --seed 7
    kp5 resonance-map --config map.cfg --out results/

Settings come from a flat ``key = value`` file (``--config``, ``#`` starts a
comment) and are overridden by ``--key value`` flags or ``--set key=value``.
Every run writes ``<command>.resolved.cfg`` to the output directory.

Exit statuses: 0 ok, 1 usage/config/I-O error, 2 blow-up, 3 trend assertion
failed, 4 invariant-violating input.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ensemble, evolution, functionals, probes
from .dispersion import DispersionParams, SingularFrequency, classify_interaction, resonance
from .io import (
    Snapshot,
    SnapshotError,
    atomic_write_text,
    diagnostics_csv,
    fmt,
    read_snapshot,
    write_snapshot,
)
from .lattice import FrequencyLattice, RejectedInput, SpectralField, project_zero_mass
from .window import TimeWindow

log = logging.getLogger("kp5")

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_TREND, EXIT_INVARIANT = 0, 1, 2, 3, 4

INIT_KINDS = ("zero", "single-mode", "gaussian-bump-x-derivative", "seeded-random")

#: relative size of x-mean residue treated as round-off in snapshot files
ZERO_MEAN_TOL = 1e-12


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration

def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _pairs(v: str) -> tuple:
    out = []
    for item in v.replace(",", " ").split():
        a, sep, b = item.partition(":")
        if not sep:
            raise ValueError(f"expected s1:s2, got {item!r}")
        out.append((float(a), float(b)))
    return tuple(out)


def _opt_float(v: str):
    return None if v.strip().lower() in ("", "none", "auto") else float(v)


def _opt_int(v: str):
    return None if v.strip().lower() in ("", "none", "auto") else int(v)


_FORMAT = {
    float: fmt,
    _bool: lambda v: str(v).lower(),
    _floats: lambda v: ",".join(fmt(x) for x in v),
    _pairs: lambda v: ",".join(f"{fmt(a)}:{fmt(b)}" for a, b in v),
}


@dataclass(frozen=True)
class Key:
    name: str
    kind: object
    default: object
    help: str = ""

    def parse(self, raw: str):
        try:
            return self.kind(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {self.name!r}: {raw!r} ({exc})") from None

    def show(self, value) -> str:
        if value is None:
            return "auto"
        f = _FORMAT.get(self.kind)
        if f is not None:
            return f(value)
        if isinstance(value, float):
            return fmt(value)
        return str(value)


def _keys(*items) -> dict:
    return {k.name: k for k in items}


BOX = 32 * math.pi

LATTICE_KEYS = (
    Key("nx", int, 128, "grid points in x (power of two)"),
    Key("ny", int, 128, "grid points in y (power of two)"),
    Key("lx", float, BOX, "box period in x"),
    Key("ly", float, BOX, "box period in y"),
)
PARAM_KEYS = (
    Key("alpha", _opt_float, None, "coefficient of u_xxx (default 0, or the snapshot header)"),
    Key("beta", _opt_float, None, "coefficient of u_xxxxx (default 1, or the snapshot header)"),
)

SCHEMAS = {
    "simulate": _keys(
        *LATTICE_KEYS, *PARAM_KEYS,
        Key("init", str, "gaussian-bump-x-derivative", f"one of {', '.join(INIT_KINDS)}, or a KPF1 path"),
        Key("amplitude", float, 0.1, "amplitude of generated data"),
        Key("width", float, 6.0, "Gaussian width for gaussian-bump-x-derivative"),
        Key("mode_k", int, 1, "integer x-wavenumber for single-mode"),
        Key("mode_l", int, 0, "integer y-wavenumber for single-mode"),
        Key("seed", int, 0, "seed for seeded-random"),
        Key("dt", float, 2e-4, "time step"),
        Key("big_t", float, 1.0, "final time"),
        Key("output_stride", int, 500, "steps between outputs"),
        Key("integrator", str, "exponential_rk4", "exponential_rk4 or splitstep2"),
        Key("diag_s", float, 1.0, "s of the es_norm diagnostic column"),
        Key("linear_only", _bool, False, "drop the nonlinearity"),
        Key("snapshots", _bool, True, "write KPF1 snapshots at every output"),
    ),
    "linear": _keys(
        *PARAM_KEYS,
        Key("input", str, "", "KPF1 snapshot to evolve"),
        Key("time", float, 1.0, "evolution time (may be negative)"),
        Key("output", str, "linear.kpf", "output snapshot name (relative to --out)"),
    ),
    "norm": _keys(
        *PARAM_KEYS,
        Key("input", str, "", "KPF1 snapshot"),
        Key("s_list", _floats, (0.0, 1.0), "exponents s of es_norm"),
        Key("aniso", _pairs, (), "s1:s2 pairs for the anisotropic Sobolev norm"),
        Key("project_mean", _bool, False, "remove a nonzero x-mean instead of failing"),
    ),
    "resonance-map": _keys(
        *PARAM_KEYS,
        Key("xi1_min", float, -4.0), Key("xi1_max", float, 4.0), Key("n1", int, 33),
        Key("xi2_min", float, -4.0), Key("xi2_max", float, 4.0), Key("n2", int, 33),
        Key("slope", float, 0.0, "common value of mu2/xi2"),
        Key("d_list", _floats, (0.0,), "values of mu1/xi1 - mu2/xi2; empty means mu1 = mu2 = 0"),
    ),
    "classify": _keys(
        *PARAM_KEYS,
        Key("xi1", float, 1.0), Key("xi2", float, 1.0),
        Key("mu1", _opt_float, None), Key("mu2", _opt_float, None),
    ),
    "probe": _keys(
        *LATTICE_KEYS[2:], *PARAM_KEYS,
        Key("nx", int, 64), Key("ny", int, 64),
        Key("ensemble", int, 100, "number of samples (pairs for bilinear)"),
        Key("seed", int, 0),
        Key("big_t", float, 0.5, "window half-width T"),
        Key("nt", _opt_int, None, "time nodes (auto: per probe)"),
        Key("refine", _bool, True, "repeat on the doubled lattice"),
        Key("q", _opt_float, None, "Strichartz time exponent (auto: from r)"),
        Key("r", float, 4.0, "Strichartz space exponent"),
        Key("j", int, 0, "modulation shell for dyadic-strichartz"),
        Key("multiplier", str, "box", "ones, zeros or box"),
        Key("xi_max", float, 1.0), Key("mu_max", float, 1.0),
        Key("a", float, 0.25, "time-gain exponent loss"),
        Key("b", float, functionals.B_PLUS, "time-gain modulation exponent"),
        Key("t_list", _floats, (0.4, 0.2, 0.1, 0.05), "time-gain window half-widths"),
        Key("t_ext", float, 1.0, "time-gain grid half-length"),
        Key("s", float, 0.5, "bilinear regularity"),
    ),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{source}:{n}: expected 'key = value', got {line.strip()!r}")
        out[key.strip()] = value.strip()
    return out


def resolve(command: str, file_values: dict, overrides: dict) -> tuple[dict, set]:
    """Merge defaults, file values and overrides; reject unknown keys by name."""
    schema = SCHEMAS[command]
    explicit = set()
    values = {name: k.default for name, k in schema.items()}
    for origin, raw in (("config file", file_values), ("command line", overrides)):
        for name, v in raw.items():
            norm = name.replace("-", "_")
            if norm not in schema:
                raise UsageError(f"unknown key {name!r} ({origin}) for command {command!r}")
            values[norm] = schema[norm].parse(v)
            explicit.add(norm)
    return values, explicit


def echo_text(command: str, values: dict, extra=None) -> str:
    schema = SCHEMAS[command]
    lines = [f"# resolved configuration for '{command}'"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {v}")
    for name in sorted(values):
        lines.append(f"{name} = {schema[name].show(values[name])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# helpers

def _params(v: dict, header: DispersionParams | None = None) -> DispersionParams:
    base = header or DispersionParams()
    a = base.alpha if v.get("alpha") is None else v["alpha"]
    b = base.beta if v.get("beta") is None else v["beta"]
    return DispersionParams(a, b)


def _lattice(v: dict) -> FrequencyLattice:
    try:
        return FrequencyLattice(v["nx"], v["ny"], v["lx"], v["ly"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(path: str) -> Snapshot:
    if not path:
        raise UsageError("an input snapshot is required (key 'input')")
    try:
        return read_snapshot(path)
    except SnapshotError as exc:
        raise UsageError(str(exc)) from None


def _zero_mean_field(snap: Snapshot, project: bool = False) -> SpectralField:
    """Field of a snapshot, with x-mean round-off removed; nonzero means raise InvariantError."""
    f = snap.to_field()
    c = f.coeffs
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    resid = float(np.max(np.abs(c[0, :])))
    if resid > ZERO_MEAN_TOL * scale and not project:
        raise InvariantError(
            f"field has nonzero x-mean (max |coeff(xi=0)| = {resid:.3g}); "
            "zero-mass quantities are undefined. Set project_mean = true to remove it."
        )
    return project_zero_mass(f)


def _gnuplot_lines(csv_name: str, title: str, columns, xcol=1, every="") -> str:
    plots = ", ".join(f"'{csv_name}' {every}using {xcol}:{c} with linespoints title '{t}'" for c, t in columns)
    return (
        "set datafile separator ','\n"
        f"set title '{title}'\n"
        "set key outside\n"
        f"plot {plots}\n"
    )


# ---------------------------------------------------------------------------
# commands

def _initial_field(v: dict, lat: FrequencyLattice) -> tuple[SpectralField, DispersionParams | None]:
    init = v["init"]
    if init == "zero":
        return SpectralField.zeros(lat), None
    if init == "single-mode":
        if v["mode_k"] % lat.nx == 0:
            raise InvariantError("single-mode data with k = 0 violate the zero-x-mean condition")
        return ensemble.single_mode(lat, v["mode_k"], v["mode_l"], v["amplitude"]), None
    if init == "gaussian-bump-x-derivative":
        return ensemble.gaussian_bump_dx(lat, v["amplitude"], v["width"]), None
    if init == "seeded-random":
        return ensemble.random_field(lat, v["seed"], 0, v["amplitude"]), None
    snap = _load(init)
    return _zero_mean_field(snap), snap.p


def cmd_simulate(v: dict, explicit: set, out: Path, gnuplot: bool) -> int:
    if v["init"] in INIT_KINDS:
        lat = _lattice(v)
        u0, header = _initial_field(v, lat)
    else:
        u0, header = _initial_field(v, None)
        lat = u0.lattice
        if explicit & {"nx", "ny", "lx", "ly"}:
            log.warning("lattice keys ignored: the lattice comes from %s", v["init"])
    p = _params(v, header)
    try:
        cfg = evolution.SimConfig(lat, p, v["dt"], v["big_t"], v["output_stride"], v.get("seed", 0),
                                  v["integrator"], v["diag_s"], v["linear_only"])
        cfg.n_steps
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write_echo(out, "simulate", v)
    traj = evolution.simulate(u0, cfg)
    d = traj.diagnostics
    atomic_write_text(out / "diagnostics.csv", diagnostics_csv(traj.times, d["mass"], d["hamiltonian"], d["es_norm"], cfg.diag_s))
    if v["snapshots"]:
        for i, (t, f) in enumerate(zip(traj.times, traj.snapshots)):
            write_snapshot(out / "snapshots" / f"snap_{i:06d}.kpf", Snapshot.from_field(f, p, t))
    if gnuplot:
        atomic_write_text(out / "diagnostics.gp", _gnuplot_lines(
            "diagnostics.csv", "conserved quantities", [(2, "mass"), (3, "hamiltonian"), (4, "es_norm")], every="every ::1 "))
    es = np.asarray(d["es_norm"])
    sup_ratio = float(np.max(es) / es[0]) if es[0] > 0 else math.nan
    print(f"simulate: {len(traj.times)} outputs, mass drift {fmt(traj.drift('mass'))}, "
          f"hamiltonian drift {fmt(traj.drift('hamiltonian'))}, sup es_norm ratio {fmt(sup_ratio)}")
    return EXIT_OK


def cmd_linear(v: dict, explicit: set, out: Path, gnuplot: bool) -> int:
    snap = _load(v["input"])
    f = _zero_mean_field(snap)
    p = _params(v, snap.p)
    _write_echo(out, "linear", v)
    g = evolution.linear_propagate(f, v["time"], p)
    write_snapshot(out / v["output"], Snapshot.from_field(g, p, snap.time + v["time"]))
    print(f"linear: wrote {out / v['output']} at t={fmt(snap.time + v['time'])}")
    return EXIT_OK


def cmd_norm(v: dict, explicit: set, out: Path, gnuplot: bool) -> int:
    snap = _load(v["input"])
    f = _zero_mean_field(snap, v["project_mean"])
    p = _params(v, snap.p)
    _write_echo(out, "norm", v)
    head = ["time", "mass", "hamiltonian"] + [f"es_norm_s={fmt(s)}" for s in v["s_list"]]
    head += [f"aniso_s1={fmt(a)}_s2={fmt(b)}" for a, b in v["aniso"]]
    row = [snap.time, functionals.mass(f), functionals.hamiltonian(f, p)]
    row += [functionals.es_norm(f, s) for s in v["s_list"]]
    row += [functionals.aniso_sobolev_norm(f, a, b) for a, b in v["aniso"]]
    text = ",".join(head) + "\n" + ",".join(fmt(x) for x in row) + "\n"
    atomic_write_text(out / "norm.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_resonance_map(v: dict, explicit: set, out: Path, gnuplot: bool) -> int:
    p = _params(v)
    for a in ("1", "2"):
        lo, hi, n = v[f"xi{a}_min"], v[f"xi{a}_max"], v[f"n{a}"]
        if not (lo < hi) or n < 2:
            raise UsageError(f"degenerate rectangle in xi{a}: need xi{a}_min < xi{a}_max and n{a} >= 2")
    _write_echo(out, "resonance-map", v)
    xi1 = np.linspace(v["xi1_min"], v["xi1_max"], v["n1"])
    xi2 = np.linspace(v["xi2_min"], v["xi2_max"], v["n2"])
    d_list = v["d_list"]
    lines = ["xi1,xi2,mu1,mu2,d,R,class,resonant,root_d"]
    skipped = 0
    for x1 in xi1:
        for x2 in xi2:
            if x1 == 0 or x2 == 0 or x1 + x2 == 0:
                skipped += 1
                continue
            rad = 5 * p.beta * (x1 * x1 + x1 * x2 + x2 * x2) - 3 * p.alpha
            root = abs(x1 + x2) * math.sqrt(rad) if rad >= 0 else math.nan
            slices = [(0.0, 0.0, math.nan)] if not d_list else [
                ((v["slope"] + d) * x1, v["slope"] * x2, d) for d in d_list]
            for m1, m2, d in slices:
                r = resonance(x1, m1, x2, m2, p)
                c = classify_interaction(x1, x2, p, m1, m2)
                lines.append(",".join([fmt(x1), fmt(x2), fmt(m1), fmt(m2), "axis" if math.isnan(d) else fmt(d),
                                       fmt(r), c.tag.value, str(c.resonant).lower(),
                                       "none" if math.isnan(root) else fmt(root)]))
    atomic_write_text(out / "resonance_map.csv", "\n".join(lines) + "\n")
    if gnuplot:
        atomic_write_text(out / "resonance_map.gp", (
            "set datafile separator ','\nset title 'resonance function'\n"
            "set xlabel 'xi1'\nset ylabel 'xi2'\nset view map\n"
            "splot 'resonance_map.csv' every ::1 using 1:2:6 with points palette pointtype 5 notitle\n"))
    print(f"resonance-map: {len(lines) - 1} rows, {skipped} singular points skipped")
    return EXIT_OK


def cmd_classify(v: dict, explicit: set, out: Path, gnuplot: bool) -> int:
    p = _params(v)
    if (v["mu1"] is None) != (v["mu2"] is None):
        raise UsageError("give both mu1 and mu2, or neither")
    c = classify_interaction(v["xi1"], v["xi2"], p, v["mu1"], v["mu2"])
    _write_echo(out, "classify", v)
    resonant = "unset" if c.resonant is None else str(c.resonant).lower()
    text = "xi1,xi2,class,resonant\n" + f"{fmt(v['xi1'])},{fmt(v['xi2'])},{c.tag.value},{resonant}\n"
    atomic_write_text(out / "classify.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def prepare_probe(inequality: str, v: dict):
    """Validate probe settings and return a zero-argument callable running the probe."""
    if inequality not in probes.PROBES:
        raise UsageError(f"unknown inequality {inequality!r}; expected one of {', '.join(probes.PROBES)}")
    if v["ensemble"] < 1:
        raise UsageError("ensemble must be >= 1")
    lat = _lattice(v)
    p = _params(v)
    kw = {} if v["nt"] is None else {"nt": v["nt"]}
    if v["nt"] is not None and v["nt"] < 2:
        raise UsageError("nt must be >= 2")

    def window(scale=1.0):
        if not 0 < v["big_t"] < 1:
            raise UsageError(f"big_t must lie in (0, 1), got {fmt(v['big_t'])}")
        return TimeWindow(v["big_t"], scale)

    if inequality in ("strichartz", "dyadic-strichartz"):
        q = v["q"]
        try:
            e = probes.StrichartzExponents.from_r(v["r"]) if q is None else probes.StrichartzExponents(q, v["r"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        w = window()
        if inequality == "strichartz":
            return lambda: probes.strichartz_probe(e, v["ensemble"], v["seed"], lat, p, w, refine=v["refine"], **kw)
        if v["j"] < 0:
            raise UsageError("j must be >= 0")
        return lambda: probes.dyadic_strichartz_probe(v["j"], e, v["ensemble"], v["seed"], lat, p, w,
                                                      refine=v["refine"], **kw)
    if inequality == "maximal":
        try:
            m = probes.Multiplier(v["multiplier"], v["xi_max"], v["mu_max"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return lambda: probes.maximal_probe(m, v["ensemble"], v["seed"], lat, refine=v["refine"], **kw)
    if inequality == "time-gain":
        ts = v["t_list"]
        if len(ts) < 3:
            raise UsageError("t_list needs at least 3 values")
        if not all(0 < t < 1 for t in ts):
            raise UsageError("every T in t_list must lie in (0, 1)")
        if v["a"] < 0 or v["b"] < 0:
            raise UsageError("need a >= 0 and b >= 0")
        if v["t_ext"] < max(ts):
            raise UsageError("t_ext must be >= max(t_list)")
        if v["nt"] is not None and v["nt"] & (v["nt"] - 1):
            raise UsageError("nt must be a power of two for time-gain")
        return lambda: probes.time_gain_probe(v["a"], v["b"], ts, v["ensemble"], v["seed"], lat, p,
                                              t_ext=v["t_ext"], **kw)
    # bilinear
    if not 0 < v["s"] <= 1:
        raise UsageError(f"s must lie in (0, 1], got {fmt(v['s'])}")
    if v["nt"] is not None and v["nt"] & (v["nt"] - 1):
        raise UsageError("nt must be a power of two for bilinear")
    w = window(0.5)
    return lambda: probes.bilinear_probe(v["s"], v["ensemble"], v["seed"], lat, p, w, refine=v["refine"], **kw)


def run_probe(inequality: str, v: dict) -> probes.ProbeReport:
    return prepare_probe(inequality, v)()


def cmd_probe(v: dict, explicit: set, out: Path, gnuplot: bool, inequality: str, assert_trend) -> int:
    job = prepare_probe(inequality, v)
    _write_echo(out, "probe", v, {"inequality": inequality})
    report = job()
    name = f"probe_{inequality}.csv"
    text = report.to_csv()
    atomic_write_text(out / name, text)
    if gnuplot:
        lines = text.splitlines()
        first = next(i for i, line in enumerate(lines) if line.startswith("index,"))
        last = first + (len(lines) - first - 1 - len(report.summary()))
        atomic_write_text(out / f"probe_{inequality}.gp", _gnuplot_lines(
            name, f"{inequality} probe ratios", [(2, "ratio")] if report.sample_rows is None else [(3, "ratio")],
            every=f"every ::{first + 1}::{last} "))
    trend = report.refinement_trend
    print(f"probe {inequality}: max {fmt(report.max_ratio)}, median {fmt(report.median_ratio)}, "
          f"trend {fmt(trend)}, degenerate {report.degenerate}")
    if assert_trend is not None and not math.isnan(trend) and trend > assert_trend:
        print(f"refinement trend {fmt(trend)} exceeds {fmt(assert_trend)}", file=sys.stderr)
        return EXIT_TREND
    return EXIT_OK


def _write_echo(out: Path, command: str, v: dict, extra=None):
    atomic_write_text(out / f"{command}.resolved.cfg", echo_text(command, v, extra))


HELP = {
    "simulate": "evolve initial data; write diagnostics CSV and KPF1 snapshots",
    "linear": "exact linear evolution of a KPF1 snapshot",
    "norm": "mass, Hamiltonian, E_s and H^{s1,s2} norms of a KPF1 snapshot",
    "resonance-map": "CSV grid of the resonance function and interaction classes",
    "classify": "interaction class of one frequency pair",
    "probe": "empirical-constant probe for one inequality",
}

COMMANDS = {
    "simulate": cmd_simulate,
    "linear": cmd_linear,
    "norm": cmd_norm,
    "resonance-map": cmd_resonance_map,
    "classify": cmd_classify,
    "probe": cmd_probe,
}


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kp5", description="Fifth-order KP simulation and dispersive-analysis toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, help=HELP[name])
        if name == "probe":
            sp.add_argument("inequality", help=", ".join(probes.PROBES))
            sp.add_argument("--assert-trend", type=float, default=None, metavar="X",
                            help="exit with status 3 if the refinement trend exceeds X")
        sp.add_argument("--config", type=Path, help="flat key = value file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a key")
        sp.add_argument("--out", type=Path, default=Path("kp5-out"), help="output directory")
        sp.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
        for key in schema.values():
            flag = "--" + key.name.replace("_", "-")
            if key.kind is _bool:
                sp.add_argument(flag, dest=f"key_{key.name}", nargs="?", const="true", default=None, help=key.help)
            else:
                sp.add_argument(flag, dest=f"key_{key.name}", default=None, metavar="V", help=key.help)
    return parser


def main(argv=None) -> int:
    try:
        return _main(argv)
    except UsageError as exc:
        print(f"kp5: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"kp5: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except evolution.BlowUpError as exc:
        print(f"kp5: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except SingularFrequency as exc:
        print(f"kp5: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RejectedInput as exc:
        print(f"kp5: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"kp5: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _main(argv) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    file_values = {}
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise UsageError(f"{args.config}: {exc.strerror or exc}") from None
        file_values = parse_config_text(text, str(args.config))
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    for name, value in vars(args).items():
        if name.startswith("key_") and value is not None:
            overrides[name[4:]] = value
    values, explicit = resolve(args.command, file_values, overrides)
    fn = COMMANDS[args.command]
    if args.command == "probe":
        return fn(values, explicit, args.out, args.gnuplot, args.inequality, args.assert_trend)
    return fn(values, explicit, args.out, args.gnuplot)


if __name__ == "__main__":
    sys.exit(main())
