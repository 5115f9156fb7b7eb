"""File formats: KPF1 field snapshots and CSV tables.

KPF1 layout (little-endian)::

    b"KPF1" | u32 version=1 | u64 nx | u64 ny | f64 lx | f64 ly
    | f64 alpha | f64 beta | f64 time | nx*ny f64 samples (x fastest)
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dispersion import DispersionParams
from .lattice import FrequencyLattice, SpectralField, to_physical, to_spectral

MAGIC = b"KPF1"
VERSION = 1
_HEADER = struct.Struct("<4sIQQddddd")


class SnapshotError(IOError):
    pass


def fmt(x) -> str:
    """17 significant digits: enough for an exact double round trip."""
    return format(float(x), ".17g")


def atomic_write_bytes(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


@dataclass(frozen=True, eq=False)
class Snapshot:
    lattice: FrequencyLattice
    p: DispersionParams
    time: float
    samples: np.ndarray

    @classmethod
    def from_field(cls, f: SpectralField, p: DispersionParams, time: float = 0.0) -> "Snapshot":
        return cls(f.lattice, p, float(time), to_physical(f))

    def to_field(self) -> SpectralField:
        return to_spectral(self.samples, self.lattice)


def encode_snapshot(s: Snapshot) -> bytes:
    lat = s.lattice
    samples = np.asarray(s.samples, dtype=float)
    if samples.shape != lat.shape:
        raise SnapshotError(f"samples shape {samples.shape} != {lat.shape}")
    head = _HEADER.pack(MAGIC, VERSION, lat.nx, lat.ny, lat.lx, lat.ly, s.p.alpha, s.p.beta, s.time)
    body = np.ascontiguousarray(samples.T).astype("<f8").tobytes()
    return head + body


def decode_snapshot(data: bytes, source="<bytes>") -> Snapshot:
    if len(data) < _HEADER.size:
        raise SnapshotError(f"{source}: truncated header")
    magic, version, nx, ny, lx, ly, alpha, beta, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"{source}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{source}: unsupported version {version}")
    n = nx * ny
    if len(data) != _HEADER.size + 8 * n:
        raise SnapshotError(f"{source}: expected {n} samples, file has {(len(data) - _HEADER.size) / 8:g}")
    try:
        lat = FrequencyLattice(int(nx), int(ny), lx, ly)
    except ValueError as exc:
        raise SnapshotError(f"{source}: {exc}") from exc
    flat = np.frombuffer(data, dtype="<f8", count=n, offset=_HEADER.size)
    samples = flat.reshape(int(ny), int(nx)).T.astype(float)
    return Snapshot(lat, DispersionParams(alpha, beta), t, samples)


def write_snapshot(path, s: Snapshot):
    atomic_write_bytes(path, encode_snapshot(s))


def read_snapshot(path) -> Snapshot:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"{path}: {exc.strerror or exc}") from exc
    return decode_snapshot(data, str(path))


def diagnostics_csv(times, mass, hamiltonian, es, s: float) -> str:
    lines = [f"t,mass,hamiltonian,es_norm_s={fmt(s)}"]
    for row in zip(times, mass, hamiltonian, es):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"
