"""Parser for six-line ASCII guitar tablature.

Exactly six non-blank lines labeled e| B| G| D| A| E| top to bottom
(string 1, highest, to string 6). Bodies contain only digits, dashes,
and barlines; barlines must sit in the same column on every string.
A maximal digit run is one fret number, its column the run's first.
Runs sharing a start column form one chord frame. Tablature carries no
rhythm, so frames within a measure are spaced one beat apart, and the
key and meter default to C and 4/4.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import ParseError, PitchError
from ..pitch import (
    FRET_MAX,
    STANDARD_TUNING,
    KeySignature,
    TabEvent,
    Tuning,
    sort_chord,
    tab_to_midi,
)
from ..score import Event, Measure, NotationFormat, ScoreDoc, TimeSignature

STRING_LABELS = ("e|", "B|", "G|", "D|", "A|", "E|")

_DIGITS = "0123456789"
_BODY_CHARS = _DIGITS + "-|"


def parse_ascii_tab(text: str, tuning: Tuning = STANDARD_TUNING) -> ScoreDoc:
    """Parse tablature text, raising ParseError on any violation."""
    non_blank = [(no, raw.rstrip()) for no, raw in
                 enumerate(text.splitlines(), start=1) if raw.strip()]
    if len(non_blank) != 6:
        raise ParseError(
            f"tablature needs exactly 6 lines, got {len(non_blank)}",
            rule_id="tab.six_lines")

    bodies: list[str] = []
    for (line_no, line), label in zip(non_blank, STRING_LABELS):
        if not line.startswith(label):
            raise ParseError(
                f"line must begin with {label!r}", line=line_no, column=1,
                rule_id="tab.labels")
        bodies.append(line[len(label):])

    width = len(bodies[0])
    for (line_no, _), body in zip(non_blank, bodies):
        if len(body) != width:
            raise ParseError(
                "string lines have different lengths", line=line_no,
                rule_id="tab.ragged")
    if width == 0:
        raise ParseError("tablature body is empty", rule_id="tab.parse")

    for (line_no, _), body in zip(non_blank, bodies):
        for col, ch in enumerate(body):
            if ch not in _BODY_CHARS:
                raise ParseError(
                    f"character {ch!r} not allowed in tablature", line=line_no,
                    column=col + 3, rule_id="tab.charset")

    bar_cols = [c for c in range(width) if any(b[c] == "|" for b in bodies)]
    for col in bar_cols:
        if not all(b[col] == "|" for b in bodies):
            raise ParseError(
                "barline does not span all six strings",
                line=non_blank[0][0], column=col + 3,
                rule_id="tab.bar_alignment")

    # (start column, string number, fret) for each maximal digit run.
    runs: list[tuple[int, int, int]] = []
    for string_idx, body in enumerate(bodies):
        line_no = non_blank[string_idx][0]
        col = 0
        while col < width:
            if body[col] in _DIGITS:
                start = col
                while col < width and body[col] in _DIGITS:
                    col += 1
                fret = int(body[start:col])
                if fret > FRET_MAX:
                    raise ParseError(
                        f"fret {fret} above {FRET_MAX}", line=line_no,
                        column=start + 3, rule_id="tab.fret_range")
                runs.append((start, string_idx + 1, fret))
            else:
                col += 1

    segments: list[tuple[int, int]] = []
    start = 0
    for col in bar_cols:
        segments.append((start, col))
        start = col + 1
    trailing = (start, width)

    def frames_in(lo: int, hi: int) -> dict[int, list[tuple[int, int]]]:
        frames: dict[int, list[tuple[int, int]]] = {}
        for col, string, fret in runs:
            if lo <= col < hi:
                frames.setdefault(col, []).append((string, fret))
        return frames

    def build_measure(lo: int, hi: int) -> Measure:
        frames = frames_in(lo, hi)
        events = []
        for beat, col in enumerate(sorted(frames)):
            pitches = []
            for string, fret in frames[col]:
                try:
                    pitches.append(tab_to_midi(TabEvent(string, fret, col), tuning))
                except PitchError as exc:
                    raise ParseError(
                        str(exc), column=col + 3,
                        rule_id="tab.pitch_range") from None
            events.append(Event(Fraction(beat), Fraction(1),
                                tuple(sort_chord(pitches))))
        return Measure(tuple(events))

    measures = [build_measure(lo, hi) for lo, hi in segments if hi > lo]
    if trailing[1] > trailing[0] and frames_in(*trailing):
        measures.append(build_measure(*trailing))
        final_barline = False
    else:
        final_barline = bool(bar_cols)

    if not any(m.events for m in measures):
        raise ParseError("tablature contains no notes", rule_id="tab.parse")

    return ScoreDoc(
        format=NotationFormat.ASCII_TAB,
        key=KeySignature.parse("C"),
        meter=TimeSignature(4, 4),
        unit_length=Fraction(1, 4),
        measures=tuple(measures),
        final_barline=final_barline,
    )
