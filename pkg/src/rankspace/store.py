"""On-disk sample store: one raw binary file per column plus a text manifest.

Layout of a store directory:

    manifest.json   format/version, dimensions, dtype and per-row shape of
                    every column, plus run settings and diagnostics
    theta.bin, tau0.bin, tau1.bin, tau.bin, r.bin, X.bin, iters.bin
                    little-endian raw arrays, one row per stored draw
    trace_*.bin     optional per-iteration scalar traces

Appending draws is a plain file append; the row count is derived from the
file sizes, so partially written runs remain readable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import ConfigurationError
from .draws import PosteriorDraws

STORE_FORMAT = "rankspace-store"
STORE_VERSION = 1


class StoreError(ConfigurationError):
    """Raised for missing, corrupt or version-mismatched sample stores."""

_COLUMNS = ("theta", "tau0", "tau1", "tau", "r", "X", "iters")


def _column_spec(draws: PosteriorDraws) -> dict[str, dict]:
    T, n, p = draws.T, draws.n, draws.p
    return {
        "theta": {"dtype": "<f8", "row_shape": []},
        "tau0": {"dtype": "<f8", "row_shape": []},
        "tau1": {"dtype": "<f8", "row_shape": []},
        "tau": {"dtype": "<f8", "row_shape": [T - 1]},
        "r": {"dtype": "<f8", "row_shape": [n]},
        "X": {"dtype": "<f8", "row_shape": [T, n, p]},
        "iters": {"dtype": "<i8", "row_shape": []},
    }


def save_store(directory, draws: PosteriorDraws, settings: dict | None = None,
               traces: dict[str, np.ndarray] | None = None,
               diagnostics: dict | None = None) -> Path:
    """Write a complete store; overwrites files already present."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    columns = _column_spec(draws)
    for name, spec in columns.items():
        arr = np.ascontiguousarray(getattr(draws, name)).astype(spec["dtype"])
        arr.tofile(directory / f"{name}.bin")
    trace_names = []
    if traces:
        for name, arr in traces.items():
            arr = np.ascontiguousarray(arr, dtype=np.float64).astype("<f8")
            arr.tofile(directory / f"trace_{name}.bin")
            trace_names.append({"name": name, "shape": list(arr.shape)})
    manifest = {
        "format": STORE_FORMAT,
        "version": STORE_VERSION,
        "n": draws.n,
        "T": draws.T,
        "p": draws.p,
        "draws": draws.size,
        "columns": columns,
        "traces": trace_names,
        "settings": settings or {},
        "diagnostics": diagnostics or {},
    }
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return directory


def append_store(directory, draws: PosteriorDraws) -> None:
    """Append draws to an existing store (columns must match the manifest)."""
    directory = Path(directory)
    manifest = _read_manifest(directory)
    if (draws.n, draws.T, draws.p) != (manifest["n"], manifest["T"], manifest["p"]):
        raise StoreError("appended draws do not match the store dimensions")
    for name, spec in manifest["columns"].items():
        arr = np.ascontiguousarray(getattr(draws, name)).astype(spec["dtype"])
        with open(directory / f"{name}.bin", "ab") as fh:
            arr.tofile(fh)


def _read_manifest(directory: Path) -> dict:
    path = directory / "manifest.json"
    if not path.exists():
        raise StoreError(f"no sample store at {directory} (missing manifest.json)")
    manifest = json.loads(path.read_text())
    if manifest.get("format") != STORE_FORMAT:
        raise StoreError(f"{path} is not a {STORE_FORMAT} manifest")
    if manifest.get("version") != STORE_VERSION:
        raise StoreError(
            f"unsupported store version {manifest.get('version')} "
            f"(this build reads version {STORE_VERSION})"
        )
    return manifest


def load_store(directory) -> tuple[PosteriorDraws, dict]:
    """Read a store back into memory; returns (draws, manifest)."""
    directory = Path(directory)
    manifest = _read_manifest(directory)
    arrays = {}
    counts = set()
    for name, spec in manifest["columns"].items():
        raw = np.fromfile(directory / f"{name}.bin", dtype=spec["dtype"])
        row_elems = int(np.prod(spec["row_shape"])) if spec["row_shape"] else 1
        if raw.size % row_elems:
            raise StoreError(f"column {name!r} is truncated mid-row")
        rows = raw.size // row_elems
        counts.add(rows)
        arrays[name] = raw.reshape([rows] + list(spec["row_shape"]))
    if len(counts) != 1:
        raise StoreError(f"store columns disagree on the row count: {sorted(counts)}")
    draws = PosteriorDraws(**arrays)
    return draws, manifest


def load_traces(directory) -> dict[str, np.ndarray]:
    directory = Path(directory)
    manifest = _read_manifest(directory)
    out = {}
    for entry in manifest.get("traces", []):
        raw = np.fromfile(directory / f"trace_{entry['name']}.bin", dtype="<f8")
        out[entry["name"]] = raw.reshape(entry["shape"])
    return out
