"""Pattern file format: one pattern per block, `#` comments, and metadata
header lines (@id:, @end_use:, @lifecycle:, @schedule:, @spatial:).

Blocks are separated by blank lines; a block's header lines come first,
followed by the pattern text (which may wrap across lines).

Schedule syntax: `daily HH:MM-HH:MM` (comma-separable) and/or
`abs START-END` with epoch seconds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import GridCepError
from .ast import PatternAst
from .parser import parse_pattern
from .validate import ScheduleSpec

_HEADER_RE = re.compile(r"^@([a-z_]+):\s*(.*)$")
_DAILY_RE = re.compile(r"^daily\s+(\d{2}):(\d{2})-(\d{2}):(\d{2})$")
_ABS_RE = re.compile(r"^abs\s+(\d+)-(\d+)$")


@dataclass
class PatternBlock:
    pattern_id: str
    ast: PatternAst
    end_use: str
    lifecycle: str = "persistent"
    schedule: ScheduleSpec | None = None
    spatial: str | None = None
    meta: dict = field(default_factory=dict)


def parse_schedule(text: str) -> ScheduleSpec:
    daily, absolute = [], []
    for part in (p.strip() for p in text.split(",")):
        m = _DAILY_RE.match(part)
        if m:
            h1, m1, h2, m2 = (int(x) for x in m.groups())
            daily.append((h1 * 3600 + m1 * 60, h2 * 3600 + m2 * 60))
            continue
        m = _ABS_RE.match(part)
        if m:
            absolute.append((int(m.group(1)), int(m.group(2))))
            continue
        raise GridCepError(f"bad schedule clause {part!r}")
    return ScheduleSpec(daily=tuple(daily), absolute=tuple(absolute))


def parse_pattern_blocks(text: str) -> list[PatternBlock]:
    blocks: list[PatternBlock] = []
    current_meta: dict = {}
    current_lines: list[str] = []

    def flush():
        nonlocal current_meta, current_lines
        body = " ".join(current_lines).strip()
        if not body and not current_meta:
            return
        if not body:
            raise GridCepError(f"pattern block {current_meta.get('id', '?')!r} has no pattern text")
        meta = current_meta
        if "id" not in meta:
            raise GridCepError("pattern block missing @id header")
        if "end_use" not in meta:
            raise GridCepError(f"pattern {meta['id']!r} missing @end_use header")
        schedule = parse_schedule(meta["schedule"]) if "schedule" in meta else None
        blocks.append(PatternBlock(
            pattern_id=meta["id"], ast=parse_pattern(body), end_use=meta["end_use"],
            lifecycle=meta.get("lifecycle", "persistent"), schedule=schedule,
            spatial=meta.get("spatial"), meta=meta))
        current_meta, current_lines = {}, []

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            if current_lines or current_meta:
                flush()
            continue
        m = _HEADER_RE.match(line.strip())
        if m and not current_lines:
            current_meta[m.group(1)] = m.group(2).strip()
        else:
            current_lines.append(line.strip())
    flush()
    return blocks


def load_pattern_file(path) -> list[PatternBlock]:
    with open(path, encoding="utf-8") as fh:
        return parse_pattern_blocks(fh.read())
