"""On-disk formats: binary field/raster grids with JSON sidecars, CSV tables.

Field snapshots are interleaved real/imaginary float64, little-endian,
row-major, with a ``<name>.json`` sidecar carrying
{shape, dx, dy, k0, n0, z_or_t, units}.  Density/phase rasters use the same
sidecar scheme with a single float64 channel.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fluid import ComplexField


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".json")


def save_field(path, field: ComplexField, z_or_t: float = 0.0,
               units: str = "arbitrary") -> None:
    path = Path(path)
    interleaved = np.empty(field.data.shape + (2,), dtype="<f8")
    interleaved[..., 0] = field.data.real
    interleaved[..., 1] = field.data.imag
    path.write_bytes(interleaved.tobytes(order="C"))
    meta = {
        "shape": list(field.data.shape),
        "dx": field.dx,
        "dy": field.dy,
        "k0": field.k0,
        "n0": field.n0,
        "z_or_t": z_or_t,
        "units": units,
        "kind": "complex_field",
    }
    _sidecar_path(path).write_text(json.dumps(meta, indent=1, sort_keys=True))


def load_field(path) -> tuple[ComplexField, dict]:
    path = Path(path)
    meta = json.loads(_sidecar_path(path).read_text())
    if meta.get("kind") != "complex_field":
        raise ValueError(f"{path} sidecar does not describe a complex field")
    shape = tuple(meta["shape"])
    raw = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(shape + (2,))
    data = raw[..., 0] + 1j * raw[..., 1]
    field = ComplexField(data=data, dx=meta["dx"], dy=meta["dy"],
                         k0=meta["k0"], n0=meta["n0"])
    return field, meta


def save_raster(path, array: np.ndarray, dx: float, dy: float = 0.0,
                z_or_t: float = 0.0, units: str = "arbitrary",
                k0: float = 1.0, n0: float = 1.0) -> None:
    """Single-channel float64 raster (density, phase...) with the same sidecar."""
    path = Path(path)
    arr = np.ascontiguousarray(array, dtype="<f8")
    path.write_bytes(arr.tobytes(order="C"))
    meta = {
        "shape": list(arr.shape),
        "dx": dx,
        "dy": dy,
        "k0": k0,
        "n0": n0,
        "z_or_t": z_or_t,
        "units": units,
        "kind": "raster",
    }
    _sidecar_path(path).write_text(json.dumps(meta, indent=1, sort_keys=True))


def load_raster(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    meta = json.loads(_sidecar_path(path).read_text())
    if meta.get("kind") != "raster":
        raise ValueError(f"{path} sidecar does not describe a raster")
    arr = np.frombuffer(path.read_bytes(), dtype="<f8").reshape(tuple(meta["shape"]))
    return arr.copy(), meta


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    """Plot-ready CSV with 17-significant-digit decimals (deterministic bytes)."""
    path = Path(path)
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("all columns must share one length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(f"{float(c[i]):.17g}" for c in columns))
    path.write_text("\n".join(lines) + "\n")


def write_timeseries_csv(path, t: np.ndarray, e_out: np.ndarray) -> None:
    """GEM output format: t, Re E, Im E, |E|^2."""
    write_csv(path, ["t", "re_e", "im_e", "abs2_e"],
              [t, e_out.real, e_out.imag, np.abs(e_out) ** 2])
