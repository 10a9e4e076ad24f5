"""Pitch arithmetic: MIDI pitch model, scientific pitch names, guitar string/fret
and numbered-notation degree conversion, and chord-frame sorting.

All pitches are carried internally as MIDI note numbers (integers 0-127,
C4 = 60). Every operation here is pure; values are immutable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import ParseError, PitchError

MIDI_MIN = 0
MIDI_MAX = 127

# Sharp-canonical pitch class names; flats are accepted on input only.
SHARP_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
FLAT_NAMES = ("C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B")

LETTER_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# Semitone offsets of major-scale degrees 1..7 above the tonic.
MAJOR_SCALE_SEMITONES = (0, 2, 4, 5, 7, 9, 11)

# Degree 1 of C major sits at middle C; other tonics shift within the same
# octave region (tonic pitch class added to 60).
TONIC_BASE_MIDI = 60

_PITCH_NAME_RE = re.compile(r"^([A-Ga-g])([#b]?)(-?\d+)$")


def check_midi(value: int) -> int:
    """Validate a MIDI note number, returning it unchanged."""
    if not isinstance(value, int) or isinstance(value, bool):
        raise PitchError(f"MIDI pitch must be an integer, got {value!r}")
    if not MIDI_MIN <= value <= MIDI_MAX:
        raise PitchError(f"MIDI pitch {value} outside {MIDI_MIN}..{MIDI_MAX}")
    return value


@dataclass(frozen=True, order=True)
class ScientificPitch:
    """A pitch name with octave, e.g. C4 (middle C) or F#5.

    Canonical spellings use sharps only. Flat names are accepted by
    :func:`scientific_to_midi` and normalized to the enharmonic sharp.
    """

    letter: str
    sharp: bool
    octave: int

    def __post_init__(self) -> None:
        if self.letter not in LETTER_SEMITONES:
            raise PitchError(f"pitch letter must be A-G, got {self.letter!r}")
        if not -1 <= self.octave <= 9:
            raise PitchError(f"octave {self.octave} outside -1..9")

    @property
    def name(self) -> str:
        return f"{self.letter}{'#' if self.sharp else ''}{self.octave}"

    def __str__(self) -> str:
        return self.name


def midi_to_scientific(midi: int) -> ScientificPitch:
    """Name a MIDI pitch in sharp-canonical scientific notation (60 -> C4)."""
    check_midi(midi)
    octave, pc = divmod(midi, 12)
    name = SHARP_NAMES[pc]
    return ScientificPitch(letter=name[0], sharp=name.endswith("#"), octave=octave - 1)


def scientific_to_midi(pitch: ScientificPitch | str) -> int:
    """Convert a pitch name (or ScientificPitch) to its MIDI note number.

    String input accepts flat spellings ("Db4" -> 61); the result is the
    enharmonic MIDI value, so flats normalize to sharps for free.
    """
    if isinstance(pitch, ScientificPitch):
        semis = LETTER_SEMITONES[pitch.letter] + (1 if pitch.sharp else 0)
        return check_midi((pitch.octave + 1) * 12 + semis)
    match = _PITCH_NAME_RE.match(pitch.strip())
    if not match:
        raise ParseError(f"malformed pitch name {pitch!r}")
    letter, accidental, octave_str = match.groups()
    semis = LETTER_SEMITONES[letter.upper()]
    if accidental == "#":
        semis += 1
    elif accidental == "b":
        semis -= 1
    midi = (int(octave_str) + 1) * 12 + semis
    if not MIDI_MIN <= midi <= MIDI_MAX:
        raise PitchError(f"pitch {pitch!r} maps to MIDI {midi}, outside 0..127")
    return midi


def pitch_class_from_name(name: str) -> int:
    """Parse a bare pitch class ("C", "F#", "Bb") into 0..11."""
    cleaned = name.strip()
    if cleaned in SHARP_NAMES:
        return SHARP_NAMES.index(cleaned)
    if cleaned in FLAT_NAMES:
        return FLAT_NAMES.index(cleaned)
    raise ParseError(f"unknown pitch class {name!r}")


@dataclass(frozen=True)
class KeySignature:
    """A major key identified by its tonic pitch class (0..11)."""

    tonic: int
    mode: str = "major"

    def __post_init__(self) -> None:
        if not 0 <= self.tonic <= 11:
            raise PitchError(f"tonic pitch class {self.tonic} outside 0..11")
        if self.mode != "major":
            raise PitchError(f"unsupported mode {self.mode!r} (major only)")

    @classmethod
    def parse(cls, name: str) -> "KeySignature":
        return cls(tonic=pitch_class_from_name(name))

    @property
    def name(self) -> str:
        return SHARP_NAMES[self.tonic]

    @property
    def base_midi(self) -> int:
        """MIDI value of scale degree 1 without octave modifiers."""
        return TONIC_BASE_MIDI + self.tonic


@dataclass(frozen=True)
class Tuning:
    """Open-string MIDI pitches indexed by string number 1 (highest) to 6."""

    base: tuple[int, int, int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.base) != 6:
            raise PitchError("tuning must define exactly 6 strings")
        for value in self.base:
            check_midi(value)
        for higher, lower in zip(self.base, self.base[1:]):
            if higher <= lower:
                raise PitchError("string pitches must strictly decrease from string 1 to 6")

    def open_midi(self, string: int) -> int:
        if not 1 <= string <= 6:
            raise PitchError(f"string number {string} outside 1..6")
        return self.base[string - 1]


STANDARD_TUNING = Tuning((64, 59, 55, 50, 45, 40))

FRET_MIN = 0
FRET_MAX = 24


@dataclass(frozen=True)
class TabEvent:
    """One fretted (or open) note: string 1-6, fret 0-24, temporal column."""

    string: int
    fret: int
    column: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.string <= 6:
            raise PitchError(f"string {self.string} outside 1..6")
        if not FRET_MIN <= self.fret <= FRET_MAX:
            raise PitchError(f"fret {self.fret} outside {FRET_MIN}..{FRET_MAX}")
        if self.column < 0:
            raise PitchError(f"column {self.column} must be >= 0")


@dataclass(frozen=True)
class JianpuNote:
    """A numbered-notation token: scale degree (0 = rest), octave shift, beats."""

    degree: int
    octave_mod: int = 0
    duration: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if not 0 <= self.degree <= 7:
            raise PitchError(f"degree {self.degree} outside 0..7")
        if self.duration <= 0:
            raise PitchError(f"duration {self.duration} must be positive")


def tab_to_midi(event: TabEvent, tuning: Tuning = STANDARD_TUNING) -> int:
    """Resolve a string/fret position to its MIDI pitch under the tuning."""
    midi = tuning.open_midi(event.string) + event.fret
    if midi > MIDI_MAX:
        raise PitchError(
            f"string {event.string} fret {event.fret} exceeds MIDI range ({midi})")
    return midi


def jianpu_to_midi(note: JianpuNote, key: KeySignature) -> int:
    """Resolve a scale degree in a key to its absolute MIDI pitch.

    Degree 0 is a rest and carries no pitch; passing one is a caller bug.
    """
    if note.degree == 0:
        raise PitchError("degree 0 is a rest and has no pitch")
    midi = (key.base_midi
            + MAJOR_SCALE_SEMITONES[note.degree - 1]
            + 12 * note.octave_mod)
    if not MIDI_MIN <= midi <= MIDI_MAX:
        raise PitchError(
            f"degree {note.degree} octave {note.octave_mod:+d} in {key.name} "
            f"maps to MIDI {midi}, outside 0..127")
    return midi


def sort_chord(frame: Iterable[int]) -> list[int]:
    """Order a chord frame ascending by pitch, collapsing duplicates.

    Unison doublings are a rendering detail; the canonical form is set-like.
    """
    pitches = sorted({check_midi(p) for p in frame})
    if not pitches:
        raise PitchError("chord frame must contain at least one pitch")
    return pitches
