"""Detections and their interval view (coalesced timeline bands)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Detection:
    pattern_id: str
    detection_time: int          # max timestamp of contributing events
    consequence_time: int        # >= detection_time; equal unless predictive
    outputs: dict                # projection name -> event ref or aggregate value
    bindings: dict = field(default_factory=dict)  # event var -> event ref

    @property
    def latency(self) -> int:
        return self.consequence_time - self.detection_time

    def to_json(self) -> str:
        return json.dumps({
            "pattern_id": self.pattern_id,
            "detection_time": self.detection_time,
            "consequence_time": self.consequence_time,
            "outputs": self.outputs,
            "bindings": self.bindings,
        }, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(line: str) -> "Detection":
        obj = json.loads(line)
        return Detection(pattern_id=obj["pattern_id"],
                         detection_time=obj["detection_time"],
                         consequence_time=obj["consequence_time"],
                         outputs=obj["outputs"], bindings=obj["bindings"])


@dataclass(frozen=True)
class DetectionInterval:
    pattern_id: str
    start_time: int
    end_time: int
    count: int


def coalesce(detections, gap: int) -> dict[str, list[DetectionInterval]]:
    """Merge consecutive detections <= gap apart into disjoint intervals.

    Detections must be time-ordered per pattern (the append-only log is).
    """
    runs: dict[str, list] = {}
    for d in detections:
        lst = runs.setdefault(d.pattern_id, [])
        if lst and d.detection_time < lst[-1][1]:
            raise ValueError(f"detections for {d.pattern_id!r} not time-ordered")
        if lst and d.detection_time - lst[-1][1] <= gap:
            start, _end, count = lst[-1]
            lst[-1] = (start, d.detection_time, count + 1)
        else:
            lst.append((d.detection_time, d.detection_time, 1))
    return {pid: [DetectionInterval(pid, s, e, c) for s, e, c in lst]
            for pid, lst in runs.items()}


def intervals_to_csv(intervals: dict[str, list[DetectionInterval]]) -> str:
    lines = ["pattern_id,start,end,count"]
    for pid in sorted(intervals):
        for iv in intervals[pid]:
            lines.append(f"{pid},{iv.start_time},{iv.end_time},{iv.count}")
    return "\n".join(lines) + "\n"
