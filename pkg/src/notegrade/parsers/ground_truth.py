"""Reader for ground-truth annotation JSON.

Ground truth is benchmark data, not model output, so every problem here
raises SchemaError: a bad annotation means the evaluation itself cannot
be trusted and must stop.

Document shape:

    {"id": str, "format": "staff"|"jianpu"|"tab", "key": "C",
     "meter": "N/D", "tempo_bpm": 120,
     "events": [{"onset_beats": "0/1", "duration_beats": "1/1",
                 "midi": [60, 64, 67]}]}

``tempo_bpm`` is optional. Onsets and durations are exact "num/den"
strings in quarter-note beats. ``midi`` is a strictly ascending chord
frame; an empty list is a rest.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

from ..errors import ParseError, SchemaError
from ..pitch import MIDI_MAX, MIDI_MIN, KeySignature
from ..score import GroundTruth, GroundTruthEvent, NotationFormat, TimeSignature

_BEATS_RE = re.compile(r"^(\d+)/(\d+)$")

_TOP_LEVEL_KEYS = {"id", "format", "key", "meter", "tempo_bpm", "events"}
_EVENT_KEYS = {"onset_beats", "duration_beats", "midi"}


def _beats(value: object, field: str, index: int) -> Fraction:
    if not isinstance(value, str):
        raise SchemaError(f"events[{index}].{field} must be a num/den string")
    match = _BEATS_RE.match(value)
    if not match or int(match.group(2)) == 0:
        raise SchemaError(
            f"events[{index}].{field} {value!r} is not a valid num/den string")
    return Fraction(int(match.group(1)), int(match.group(2)))


def _event(obj: object, index: int) -> GroundTruthEvent:
    if not isinstance(obj, dict):
        raise SchemaError(f"events[{index}] must be an object")
    unknown = set(obj) - _EVENT_KEYS
    if unknown:
        raise SchemaError(f"events[{index}] has unknown keys {sorted(unknown)}")
    missing = _EVENT_KEYS - set(obj)
    if missing:
        raise SchemaError(f"events[{index}] is missing keys {sorted(missing)}")
    onset = _beats(obj["onset_beats"], "onset_beats", index)
    duration = _beats(obj["duration_beats"], "duration_beats", index)
    if duration <= 0:
        raise SchemaError(f"events[{index}].duration_beats must be positive")
    midi = obj["midi"]
    if not isinstance(midi, list):
        raise SchemaError(f"events[{index}].midi must be a list")
    for value in midi:
        if not isinstance(value, int) or isinstance(value, bool) or \
                not MIDI_MIN <= value <= MIDI_MAX:
            raise SchemaError(
                f"events[{index}].midi contains invalid pitch {value!r}")
    if any(a >= b for a, b in zip(midi, midi[1:])):
        raise SchemaError(
            f"events[{index}].midi must be strictly ascending")
    return GroundTruthEvent(onset, duration, tuple(midi))


def parse_ground_truth(text: str) -> GroundTruth:
    """Parse a ground-truth JSON document, raising SchemaError on any flaw."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"ground truth is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("ground truth must be a JSON object")
    unknown = set(obj) - _TOP_LEVEL_KEYS
    if unknown:
        raise SchemaError(f"ground truth has unknown keys {sorted(unknown)}")
    missing = _TOP_LEVEL_KEYS - {"tempo_bpm"} - set(obj)
    if missing:
        raise SchemaError(f"ground truth is missing keys {sorted(missing)}")

    sample_id = obj["id"]
    if not isinstance(sample_id, str) or not sample_id:
        raise SchemaError("id must be a non-empty string")
    if not isinstance(obj["format"], str):
        raise SchemaError("format must be a string")
    try:
        fmt = NotationFormat.parse(obj["format"])
    except ParseError as exc:
        raise SchemaError(str(exc)) from None
    if not isinstance(obj["key"], str):
        raise SchemaError("key must be a string")
    try:
        key = KeySignature.parse(obj["key"])
    except ParseError as exc:
        raise SchemaError(str(exc)) from None
    if not isinstance(obj["meter"], str):
        raise SchemaError("meter must be a string")
    try:
        meter = TimeSignature.parse(obj["meter"])
    except ParseError as exc:
        raise SchemaError(str(exc)) from None

    tempo = obj.get("tempo_bpm")
    if tempo is not None:
        if not isinstance(tempo, (int, float)) or isinstance(tempo, bool) or \
                tempo <= 0:
            raise SchemaError(f"tempo_bpm must be a positive number, got {tempo!r}")
        tempo = float(tempo)

    if not isinstance(obj["events"], list):
        raise SchemaError("events must be a list")
    events = tuple(_event(e, i) for i, e in enumerate(obj["events"]))
    for i, (a, b) in enumerate(zip(events, events[1:])):
        if a.onset_beats > b.onset_beats:
            raise SchemaError(f"events[{i + 1}] onset precedes events[{i}]")

    return GroundTruth(
        id=sample_id, format=fmt, key=key, meter=meter,
        events=events, tempo_bpm=tempo,
    )


def load_ground_truth(path: str | Path) -> GroundTruth:
    """Load and parse a ground-truth file; unreadable files are SchemaErrors."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot read ground truth {path}: {exc}") from None
    return parse_ground_truth(text)
