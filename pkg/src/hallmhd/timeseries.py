"""Sampled scalar diagnostics with JSON-lines persistence."""

from __future__ import annotations

from dataclasses import dataclass, field
import json

import numpy as np


@dataclass
class TimeSeries:
    """Named series of (t, value) samples with strictly increasing t."""

    name: str
    samples: list[tuple[float, float]] = field(default_factory=list)

    def append(self, t: float, value: float) -> None:
        if self.samples and t <= self.samples[-1][0]:
            raise ValueError(f"non-increasing sample time {t}")
        self.samples.append((float(t), float(value)))

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    def __len__(self) -> int:
        return len(self.samples)

    def to_jsonl(self) -> str:
        return "\n".join(
            json.dumps({"name": self.name, "t": t, "value": v})
            for t, v in self.samples)

    @classmethod
    def from_jsonl(cls, text: str, name: str | None = None) -> "TimeSeries":
        samples = []
        series_name = name
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if name is not None and rec.get("name") != name:
                continue
            series_name = rec.get("name", series_name)
            samples.append((float(rec["t"]), float(rec["value"])))
        return cls(series_name or "series", samples)
