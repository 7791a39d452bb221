"""Deterministic file formats: JSON metadata, 17-digit CSV, raw float64 arrays."""

import hashlib
import json
import platform
from pathlib import Path

import numpy as np
import scipy

from . import __version__

__all__ = [
    "write_json",
    "read_json",
    "write_csv",
    "read_csv",
    "write_raw",
    "read_raw",
    "file_sha256",
    "config_hash",
    "versions",
    "write_manifest",
    "save_field",
    "load_field",
]


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=True) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
    return path


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, columns):
    """Write equal-length columns with a header row; floats use 17 digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0]) if cols else 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")
    return path


def read_csv(path):
    """Return ``(header, dict name -> float array)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, {h: data[:, i] for i, h in enumerate(header)}


def write_raw(path, array):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(array, dtype="<f8").tofile(path)
    return path


def read_raw(path, shape):
    return np.fromfile(path, dtype="<f8").reshape(shape)


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config_dict):
    return hashlib.sha256(dumps(config_dict).encode()).hexdigest()


def versions():
    return {
        "artifact": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_manifest(directory, name, config, files, seeds=None, extra=None):
    """Manifest with config hash, seeds, versions and the hash of each file."""
    directory = Path(directory)
    entry = {
        "name": name,
        "config_hash": config_hash(config),
        "config": config,
        "seeds": list(seeds) if seeds is not None else [],
        "versions": versions(),
        "files": {Path(f).name: file_sha256(f) for f in files},
    }
    if extra:
        entry.update(extra)
    return write_json(directory / f"{name}.manifest.json", entry)


def save_field(realization, directory, name="field", fmt="raw"):
    """Persist a ``FieldRealization`` as JSON metadata plus a data file."""
    directory = Path(directory)
    meta = {
        "dim": realization.grid.dim,
        "order_m": realization.order_m,
        "seed": realization.seed,
        "ir_cutoff": realization.ir_cutoff,
        "grid": realization.grid.to_dict(),
        "profile": realization.profile.to_dict() if realization.profile else None,
        "format": fmt,
        "shape": list(realization.values.shape),
    }
    if fmt == "raw":
        data = write_raw(directory / f"{name}.f64", realization.values)
    elif fmt == "csv":
        data = write_csv(directory / f"{name}.csv", ["value"], [realization.values.ravel()])
    else:
        raise ValueError(f"unknown format {fmt!r}")
    meta["data_file"] = data.name
    meta_path = write_json(directory / f"{name}.json", meta)
    return write_manifest(directory, name, meta, [meta_path, data], seeds=[realization.seed])


def load_field(manifest_path):
    from .randfield import FieldRealization, PeriodicGrid, StrengthProfile

    manifest_path = Path(manifest_path)
    man = read_json(manifest_path)
    meta = man["config"]
    data_path = manifest_path.parent / meta["data_file"]
    shape = tuple(meta["shape"])
    if meta["format"] == "raw":
        values = read_raw(data_path, shape)
    else:
        values = read_csv(data_path)[1]["value"].reshape(shape)
    grid = PeriodicGrid(**meta["grid"])
    prof = StrengthProfile.from_dict(meta["profile"]) if meta["profile"] else None
    return FieldRealization(grid, values, meta["order_m"], meta["seed"], meta["ir_cutoff"], prof)
