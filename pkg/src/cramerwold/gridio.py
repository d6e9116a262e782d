"""Grid files: a JSON header ``{dim, origin, h, shape, data}`` next to raw little-endian float64 values."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .measures import DiscreteMeasure, GridDensity

__all__ = ["write_grid", "read_grid", "write_report", "load_measure"]


def _stem(path) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in (".json", ".f64") else path


def write_grid(grid: GridDensity, path) -> Path:
    """Write ``<stem>.json`` and ``<stem>.f64``; returns the header path."""
    stem = _stem(path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    data = stem.with_name(stem.name + ".f64")
    np.ascontiguousarray(grid.values, dtype="<f8").tofile(data)
    header = {
        "dim": grid.dim,
        "origin": [float(v) for v in grid.origin],
        "h": grid.h,
        "shape": list(grid.shape),
        "data": data.name,
    }
    head = stem.with_name(stem.name + ".json")
    head.write_text(json.dumps(header, indent=2) + "\n", encoding="utf-8")
    return head


def read_grid(path) -> GridDensity:
    head = _stem(path).with_name(_stem(path).name + ".json")
    header = json.loads(head.read_text(encoding="utf-8"))
    for key in ("dim", "origin", "h", "shape"):
        if key not in header:
            raise ValueError(f"{head}: missing header field {key!r}")
    shape = tuple(int(s) for s in header["shape"])
    if len(shape) != header["dim"] or len(header["origin"]) != header["dim"]:
        raise ValueError(f"{head}: dim, origin and shape disagree")
    data = head.with_name(header.get("data", head.stem + ".f64"))
    values = np.fromfile(data, dtype="<f8")
    if values.size != int(np.prod(shape)):
        raise ValueError(f"{data}: {values.size} values for shape {shape}")
    return GridDensity(header["origin"], header["h"], values.reshape(shape))


def write_report(report, path, extra: dict | None = None) -> Path:
    """Reconstruction grid plus a ``<stem>.meta.json`` sidecar."""
    stem = _stem(path)
    write_grid(report.density, stem)
    meta = report.metadata()
    if extra:
        meta.update(extra)
    side = stem.with_name(stem.name + ".meta.json")
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return side


def load_measure(path):
    """A grid (``.json`` header) or a ``weight,x1,...,xn`` text file."""
    path = Path(path)
    if path.suffix == ".json":
        return read_grid(path)
    return DiscreteMeasure.from_text(path)
