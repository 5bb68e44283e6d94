"""Artifact I/O: experiment configuration files, CSV/JSON reports, run
manifests, and the binary field-snapshot format.

Config files are flat INI sections (params / grid / potential / initial /
evolver / experiment); no programmable configuration.  Numbers in CSV and
JSON artifacts are serialized with 17 significant digits so identical runs
produce byte-identical bodies.  Snapshots are little-endian: a 'PKSF'
magic, a uint32 version, a uint32 axis count, uint32 dims, then row-major
complex values as float64 (re, im) pairs.
"""

from __future__ import annotations

import configparser
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
_SNAP_MAGIC = b"PKSF"


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def fmt(x) -> str:
    """17-significant-digit decimal form (round-trips float64)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass
class ExperimentConfig:
    """Resolved configuration: defaults overlaid with file and CLI values."""

    experiment: str
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    potential: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    evolver: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": dict(self.params),
            "grid": dict(self.grid),
            "potential": dict(self.potential),
            "initial": dict(self.initial),
            "evolver": dict(self.evolver),
            "output": dict(self.output),
        }


_SECTIONS = ("params", "grid", "potential", "initial", "evolver", "output")


def _coerce(text: str):
    low = text.strip().lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if "," in text:
        return [_coerce(part) for part in text.split(",")]
    return text.strip()


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a flat INI experiment file."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if not cp.has_section("experiment") or not cp.has_option("experiment", "name"):
        raise ConfigError("config must declare [experiment] name = ...")
    cfg = ExperimentConfig(experiment=cp.get("experiment", "name").strip())
    for section in _SECTIONS:
        if cp.has_section(section):
            target = getattr(cfg, section if section != "output" else "output")
            for key, raw in cp.items(section):
                target[key] = _coerce(raw)
    return cfg


def write_snapshot(path: str | Path, values: np.ndarray) -> None:
    """Binary field snapshot: header with dims, then complex128 payload."""
    arr = np.ascontiguousarray(values, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(_SNAP_MAGIC)
        fh.write(struct.pack("<II", SCHEMA_VERSION, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        inter = np.empty(arr.size * 2, dtype="<f8")
        inter[0::2] = arr.real.ravel()
        inter[1::2] = arr.imag.ravel()
        fh.write(inter.tobytes())


def read_snapshot(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _SNAP_MAGIC:
            raise ConfigError(f"{path}: not a field snapshot")
        version, ndim = struct.unpack("<II", fh.read(8))
        if version != SCHEMA_VERSION:
            raise ConfigError(f"{path}: unsupported snapshot version {version}")
        shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != 2 * int(np.prod(shape)):
        raise ConfigError(f"{path}: truncated snapshot payload")
    return (payload[0::2] + 1j * payload[1::2]).reshape(shape)


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    """Deterministic CSV body: fixed header, 17-digit numbers, LF endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split(",")
    return header, [line.split(",") for line in text[1:]]


def _json_default(o):
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, (np.floating, float)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialize {type(o)}")


def write_json(path: str | Path, payload: dict) -> None:
    body = dict(payload)
    body.setdefault("schema", SCHEMA_VERSION)
    Path(path).write_text(json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")


@dataclass
class ExperimentResult:
    """What one experiment hands to the report emitter."""

    experiment: str
    tables: dict = field(default_factory=dict)      # name -> (header, rows)
    summary: dict = field(default_factory=dict)     # JSON payload
    snapshots: dict = field(default_factory=dict)   # name -> ndarray


def emit_report(result: ExperimentResult, out_dir: str | Path, config_echo: dict,
                timestamp: str, extra_manifest: dict | None = None) -> dict:
    """Write artifacts with deterministic names and a run manifest.

    An empty result still writes the manifest.  CSV and JSON bodies carry no
    timestamps; only file names and the manifest do.
    """
    from . import __version__

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    base = f"{result.experiment}_{timestamp}"
    for name, (header, rows) in result.tables.items():
        path = out / f"{base}_{name}.csv"
        write_csv(path, header, rows)
        written.append({"kind": "csv", "table": name, "file": path.name})
    if result.summary:
        path = out / f"{base}.json"
        write_json(path, dict(result.summary))
        written.append({"kind": "json", "table": "summary", "file": path.name})
    for name, arr in result.snapshots.items():
        path = out / f"{base}_{name}.pksf"
        write_snapshot(path, arr)
        written.append({"kind": "snapshot", "table": name, "file": path.name})
    manifest = {
        "schema": SCHEMA_VERSION,
        "experiment": result.experiment,
        "created": timestamp,
        "package_version": __version__,
        "config": config_echo,
        "artifacts": written,
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    with open(out / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return manifest
