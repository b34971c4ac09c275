"""File formats: scenario documents, event files, manifests, reports, tables.

Conventions: configuration documents are JSON (seconds and Hz; versioned
with ``schema_version``); event files are per-channel CSV with header
``channel,time_ps,trial,mode,phase_setpoint``, time-sorted, 64-bit integer
picosecond timestamps; reports are JSON with every metric carried as
{value, stderr, unit}; curve tables are plain CSV that parse back through
:func:`read_table`.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .linksim import (
    AnalysisSettings,
    ConfigError,
    RunManifest,
    ScenarioConfig,
    ScheduleModel,
    config_to_dict,
)
from .models import ChannelModel, MemoryModel, SourceModel
from .streams import CHANNELS, EventStream, RecordSet
from .values import ValueWithError

SCHEMA_VERSION = 1

EVENT_HEADER = ["channel", "time_ps", "trial", "mode", "phase_setpoint"]

_NESTED = {
    "source_A": SourceModel,
    "source_B": SourceModel,
    "memory_A": MemoryModel,
    "memory_B": MemoryModel,
    "channel": ChannelModel,
    "schedule": ScheduleModel,
    "analysis": AnalysisSettings,
}


def _build_dataclass(cls, doc: dict, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object, got {type(doc).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Validated scenario from a parsed configuration document."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be an object")
    doc = dict(doc)
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    kwargs = {}
    for key, cls in _NESTED.items():
        if key not in doc:
            raise ConfigError(f"missing section {key!r}")
        kwargs[key] = _build_dataclass(cls, doc.pop(key), key)
    scalar_names = {
        f.name for f in dataclasses.fields(ScenarioConfig)
    } - set(_NESTED)
    unknown = set(doc) - scalar_names
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    for key in doc:
        kwargs[key] = doc[key]
    if "phase_setpoints" in kwargs:
        kwargs["phase_setpoints"] = tuple(kwargs["phase_setpoints"])
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)


def save_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")


# ---------------------------------------------------------------------------
# event files


def _phase_str(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def write_events(records: RecordSet, out_dir: str | Path) -> dict[str, Path]:
    """One CSV per detector channel; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for ch in CHANNELS:
        s = records[ch]
        path = out_dir / f"{ch}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(EVENT_HEADER)
            for i in range(len(s)):
                w.writerow([
                    ch, int(s.time_ps[i]), int(s.trial[i]), int(s.mode[i]),
                    _phase_str(float(s.phase[i])),
                ])
        paths[ch] = path
    return paths


def read_event_file(path: str | Path) -> dict[str, EventStream]:
    """Parse one event CSV; returns streams keyed by channel."""
    path = Path(path)
    cols: dict[str, list[list]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENT_HEADER:
            raise ConfigError(f"{path}: bad header {header}")
        for row in reader:
            if len(row) != len(EVENT_HEADER):
                raise ConfigError(f"{path}: malformed row {row}")
            ch = row[0]
            if ch not in CHANNELS:
                raise ConfigError(f"{path}: unknown channel {ch!r}")
            cols.setdefault(ch, []).append(row)
    out = {}
    for ch, rows in cols.items():
        time_ps = np.array([int(r[1]) for r in rows], dtype=np.int64)
        if np.any(np.diff(time_ps) < 0):
            raise ConfigError(f"{path}: channel {ch} rows are not time-sorted")
        out[ch] = EventStream(
            time_ps,
            np.array([int(r[2]) for r in rows], dtype=np.int64),
            np.array([int(r[3]) for r in rows], dtype=np.int32),
            np.array([float(r[4]) if r[4] else math.nan for r in rows]),
        )
    return out


def read_events(source: str | Path | Sequence[str | Path]) -> RecordSet:
    """RecordSet from a directory of per-channel CSVs or explicit files."""
    if isinstance(source, (str, Path)) and Path(source).is_dir():
        files = sorted(Path(source).glob("*.csv"))
        if not files:
            raise ConfigError(f"{source}: no event files found")
    elif isinstance(source, (str, Path)):
        files = [Path(source)]
    else:
        files = [Path(p) for p in source]
    records = RecordSet()
    for path in files:
        for ch, stream in read_event_file(path).items():
            if len(records[ch]):
                raise ConfigError(f"{path}: duplicate events for channel {ch}")
            records.streams[ch] = stream
    return records


# ---------------------------------------------------------------------------
# manifests and reports


def write_manifest(manifest: RunManifest, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dataclasses.asdict(manifest), indent=2) + "\n")


def read_manifest(path: str | Path) -> RunManifest:
    doc = json.loads(Path(path).read_text())
    return RunManifest(**doc)


class Report:
    """Named metrics, each with a standard error and a unit."""

    def __init__(self, provenance: Optional[Sequence[str]] = None):
        self.metrics: dict[str, dict] = {}
        self.provenance = [str(p) for p in (provenance or [])]

    def add(self, name: str, value, stderr: float = 0.0, unit: str = "") -> None:
        if isinstance(value, ValueWithError):
            value, stderr = value.value, value.stderr
        self.metrics[name] = {
            "value": float(value), "stderr": float(stderr), "unit": unit,
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "metrics": self.metrics,
            "provenance": self.provenance,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def read(cls, path: str | Path) -> "Report":
        doc = json.loads(Path(path).read_text())
        report = cls(doc.get("provenance", []))
        report.metrics = doc["metrics"]
        return report


# ---------------------------------------------------------------------------
# curve tables


def write_table(path: str | Path, header: Sequence[str],
                rows: Sequence[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(c) if isinstance(c, float) else c for c in row])


def read_table(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows
