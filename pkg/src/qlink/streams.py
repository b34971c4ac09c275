"""Detector event streams.

Detection records are held column-wise (one numpy array per field, one
stream per detector channel) for fast coincidence analysis; a row-wise
:class:`DetectionRecord` view is provided for ergonomic access.  Times are
integer picoseconds from run start and every stream is time-sorted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

CHANNELS = ("I1", "I2", "S1", "S2")
HERALD_CHANNELS = ("I1", "I2")
SIGNAL_CHANNELS = ("S1", "S2")

PS_PER_S = 10**12

NO_TRIAL = -1
NO_MODE = -1


@dataclass(frozen=True)
class DetectionRecord:
    """One detector click."""

    channel: str
    time_ps: int
    trial: int = NO_TRIAL
    mode: int = NO_MODE
    phase_setpoint: Optional[float] = None


@dataclass
class EventStream:
    """Clicks of a single detector channel, sorted by time.

    Attributes:
        time_ps: int64 timestamps (picoseconds from run start).
        trial: herald ordinal that produced the click, -1 for background.
        mode: temporal-mode index, -1 when inapplicable.
        phase: commanded interferometer phase during the click (radians),
            NaN outside fringe scans.
    """

    time_ps: np.ndarray
    trial: np.ndarray
    mode: np.ndarray
    phase: np.ndarray

    @classmethod
    def empty(cls) -> "EventStream":
        return cls(
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int32),
            np.empty(0, dtype=np.float64),
        )

    @classmethod
    def build(cls, time_ps, trial=None, mode=None, phase=None) -> "EventStream":
        """Assemble a stream from arrays, sorting by time."""
        t = np.asarray(time_ps, dtype=np.int64)
        n = t.size
        trial = (np.full(n, NO_TRIAL, dtype=np.int64)
                 if trial is None else np.asarray(trial, dtype=np.int64))
        mode = (np.full(n, NO_MODE, dtype=np.int32)
                if mode is None else np.asarray(mode, dtype=np.int32))
        phase = (np.full(n, np.nan)
                 if phase is None else np.asarray(phase, dtype=np.float64))
        order = np.argsort(t, kind="stable")
        return cls(t[order], trial[order], mode[order], phase[order])

    def __len__(self) -> int:
        return int(self.time_ps.size)

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.time_ps) >= 0))

    def records(self, channel: str) -> Iterator[DetectionRecord]:
        for i in range(len(self)):
            ph = self.phase[i]
            yield DetectionRecord(
                channel,
                int(self.time_ps[i]),
                int(self.trial[i]),
                int(self.mode[i]),
                None if np.isnan(ph) else float(ph),
            )

    @staticmethod
    def concatenate(parts: list["EventStream"]) -> "EventStream":
        """Concatenate time-ordered parts (later parts must not precede
        earlier ones)."""
        parts = [p for p in parts if len(p)]
        if not parts:
            return EventStream.empty()
        out = EventStream(
            np.concatenate([p.time_ps for p in parts]),
            np.concatenate([p.trial for p in parts]),
            np.concatenate([p.mode for p in parts]),
            np.concatenate([p.phase for p in parts]),
        )
        if not out.is_sorted():
            raise ValueError("stream parts are not in time order")
        return out


@dataclass
class RecordSet:
    """All four detector streams of one run (or one run segment)."""

    streams: dict[str, EventStream] = field(
        default_factory=lambda: {c: EventStream.empty() for c in CHANNELS}
    )

    def __getitem__(self, channel: str) -> EventStream:
        return self.streams[channel]

    def counts(self) -> dict[str, int]:
        return {c: len(s) for c, s in self.streams.items()}

    def n_heralds(self) -> int:
        return sum(len(self.streams[c]) for c in HERALD_CHANNELS)

    @staticmethod
    def concatenate(parts: list["RecordSet"]) -> "RecordSet":
        return RecordSet(
            {
                c: EventStream.concatenate([p.streams[c] for p in parts])
                for c in CHANNELS
            }
        )
