"""Acceptance suite.

Each test prints one ``[acceptance] PASS/FAIL criterion N`` line on the
real terminal (bypassing capture) so a plain pytest run doubles as the
acceptance report. Thresholds and tolerances are pinned here; every
numeric expectation is exact rational arithmetic unless a runtime bound
is being asserted.
"""

import itertools
import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction

from melodies import MELODIES

from notegrade.harness import EvalConfig, load_manifest, run_batch, write_report
from notegrade.metrics import alignment_accuracy, edit_distance
from notegrade.parsers import (
    parse_abc,
    parse_ascii_tab,
    parse_ground_truth,
    parse_jianpu,
)
from notegrade.errors import ParseError, SchemaError
from notegrade.pitch import (
    JianpuNote,
    KeySignature,
    TabEvent,
    jianpu_to_midi,
    midi_to_scientific,
    scientific_to_midi,
    tab_to_midi,
)
from notegrade.projection import project, project_ground_truth, sequence_to_json_dict
from notegrade.score import NotationFormat, TimeSignature
from notegrade.tasks import (
    score_ast,
    score_cnc,
    score_smg,
    score_vsu,
    smg_rules,
)

STAFF = NotationFormat.ABC_STAFF
JIANPU = NotationFormat.JIANPU
TAB = NotationFormat.ASCII_TAB


@contextmanager
def _announce(capsys, number, label):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"[acceptance] FAIL criterion {number}: {label}")
        raise
    with capsys.disabled():
        print(f"[acceptance] PASS criterion {number}: {label}")


def _reference_edit_distance(a, b):
    memo = {}

    def go(i, j):
        key = (i, j)
        if key in memo:
            return memo[key]
        if i == len(a):
            out = len(b) - j
        elif j == len(b):
            out = len(a) - i
        else:
            out = min(go(i + 1, j) + 1,
                      go(i, j + 1) + 1,
                      go(i + 1, j + 1) + (a[i] != b[j]))
        memo[key] = out
        return out

    return go(0, 0)


def test_criterion_1_edit_distance_oracle(capsys):
    with _announce(capsys, 1, "edit-distance oracle equivalence"):
        started = time.monotonic()
        alphabet = "xyz"
        short = [""]
        for length in range(1, 5):
            short.extend("".join(chars) for chars in
                         itertools.product(alphabet, repeat=length))
        assert len(short) == 121
        for a, b in itertools.product(short, short):
            assert edit_distance(a, b) == _reference_edit_distance(a, b)

        rng = random.Random(20260815)
        for _ in range(100_000):
            a = "".join(rng.choice(alphabet)
                        for _ in range(rng.randint(0, 6)))
            b = "".join(rng.choice(alphabet)
                        for _ in range(rng.randint(0, 6)))
            assert edit_distance(a, b) == _reference_edit_distance(a, b)
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"oracle sweep took {elapsed:.1f}s"


def test_criterion_2_junk_suffix_penalty(capsys):
    with _announce(capsys, 2, "junk-suffix accuracy penalty"):
        gt = (60, 62, 64, 65)
        for k, expected in ((0, Fraction(1)), (4, Fraction(1, 2)),
                            (36, Fraction(1, 10))):
            pred = gt + tuple(100 + i for i in range(k))
            score = alignment_accuracy(gt, pred)
            assert score.value == expected
            assert score.value == 1 - Fraction(k, 4 + k)
        previous = Fraction(2)
        for k in range(101):
            pred = gt + tuple(100 + i for i in range(k))
            value = alignment_accuracy(gt, pred).value
            assert value <= previous
            previous = value


_CHORD_POOL = ["C", "D", "E", "F", "G", "A", "B",
               "c", "d", "e", "f", "g", "a", "b"]


def _random_measures(rng):
    measures = []
    has_chord = False
    for _ in range(rng.randint(2, 4)):
        beats = []
        for _ in range(4):
            if rng.random() < 0.4:
                beats.append(rng.sample(_CHORD_POOL, rng.randint(2, 4)))
                has_chord = True
            else:
                beats.append(rng.choice(_CHORD_POOL))
        measures.append(beats)
    if not has_chord:
        measures[0][0] = rng.sample(_CHORD_POOL, 3)
    return measures


def _render_abc(measures, rng=None):
    bars = []
    for beats in measures:
        tokens = []
        for beat in beats:
            if isinstance(beat, list):
                members = list(beat)
                if rng is not None:
                    rng.shuffle(members)
                tokens.append("[" + "".join(members) + "]")
            else:
                tokens.append(beat)
        bars.append(" ".join(tokens))
    return "X:1\nM:4/4\nL:1/4\nK:C\n" + "|".join(bars) + "|]\n"


def test_criterion_3_chord_permutation_invariance(capsys):
    with _announce(capsys, 3, "chord permutation invariance"):
        rng = random.Random(3)
        for _ in range(1_000):
            measures = _random_measures(rng)
            base_text = _render_abc(measures)
            base_doc = parse_abc(base_text)
            base_seq = project(base_doc)
            base_bytes = json.dumps(sequence_to_json_dict(base_seq),
                                    sort_keys=True).encode("utf-8")
            gt = parse_ground_truth(json.dumps({
                "id": "perm", "format": "staff", "key": "C", "meter": "4/4",
                "events": [
                    {"onset_beats": f"{i}/1", "duration_beats": "1/1",
                     "midi": list(token)}
                    for i, token in enumerate(base_seq.pitch_tokens)
                ],
            }))
            base_score = score_ast("perm", gt, base_text, STAFF).to_json_dict()
            for _ in range(10):
                text = _render_abc(measures, rng)
                seq = project(parse_abc(text))
                blob = json.dumps(sequence_to_json_dict(seq),
                                  sort_keys=True).encode("utf-8")
                assert blob == base_bytes
                result = score_ast("perm", gt, text, STAFF).to_json_dict()
                assert result == base_score


FRETBOARD = {
    (1, 0): 64, (1, 1): 65, (1, 5): 69, (1, 12): 76, (1, 24): 88,
    (2, 0): 59, (2, 1): 60, (2, 5): 64, (2, 12): 71, (2, 24): 83,
    (3, 0): 55, (3, 1): 56, (3, 5): 60, (3, 12): 67, (3, 24): 79,
    (4, 0): 50, (4, 1): 51, (4, 5): 55, (4, 12): 62, (4, 24): 74,
    (5, 0): 45, (5, 1): 46, (5, 5): 50, (5, 12): 57, (5, 24): 69,
    (6, 0): 40, (6, 1): 41, (6, 5): 45, (6, 12): 52, (6, 24): 64,
}

_TWELVE_KEYS = ["C", "C#", "D", "Eb", "E", "F",
                "F#", "G", "Ab", "A", "Bb", "B"]


def test_criterion_4_pitch_arithmetic_charts(capsys):
    with _announce(capsys, 4, "pitch arithmetic charts"):
        assert len(FRETBOARD) == 30
        for (string, fret), midi in FRETBOARD.items():
            assert tab_to_midi(TabEvent(string, fret, 0)) == midi

        for midi in range(128):
            assert scientific_to_midi(midi_to_scientific(midi)) == midi

        beat = Fraction(1)
        c_major = KeySignature.parse("C")
        for name in _TWELVE_KEYS:
            key = KeySignature.parse(name)
            shift = key.base_midi - c_major.base_midi
            for degree in range(1, 8):
                center = jianpu_to_midi(JianpuNote(degree, 0, beat), key)
                assert center - jianpu_to_midi(
                    JianpuNote(degree, 0, beat), c_major) == shift
                for octave in range(-2, 3):
                    shifted = jianpu_to_midi(
                        JianpuNote(degree, octave, beat), key)
                    assert shifted == center + 12 * octave


def test_criterion_5_cross_format_agreement(capsys):
    with _announce(capsys, 5, "cross-format agreement fixtures"):
        assert len(MELODIES) >= 10
        for melody in MELODIES:
            staff_seq = project(parse_abc(melody.abc))
            jianpu_seq = project(parse_jianpu(melody.jianpu))
            tab_seq = project(parse_ascii_tab(melody.tab))
            expected = tuple((pitch,) for pitch in melody.midi)
            assert staff_seq.pitch_tokens == expected, melody.name
            assert jianpu_seq.pitch_tokens == expected, melody.name
            assert tab_seq.pitch_tokens == expected, melody.name

            for fmt, prediction in ((STAFF, melody.abc),
                                    (JIANPU, melody.jianpu),
                                    (TAB, melody.tab)):
                gt = parse_ground_truth(melody.ground_truth_json(fmt.value))
                result = score_cnc(melody.name, gt, prediction, fmt)
                assert result.hybrid == Fraction(1), (melody.name, fmt)
                assert result.normalized() == Fraction(1)


_ARITH_VALID = [
    "X:1\nM:4/4\nL:1/4\nK:C\nC D E F|G A B c|]\n",
    "X:1\nM:3/4\nL:1/4\nK:G\nG A B|c B A|]\n",
    "X:1\nM:2/4\nL:1/8\nK:C\nC D E F|G A B c|]\n",
    "X:1\nM:C\nL:1/4\nK:F\nF2 G2|A B c A|]\n",
    "X:1\nM:C|\nL:1/2\nK:C\nC G|E C|]\n",
    "X:1\nM:6/8\nL:1/8\nK:D\nD E F G A B|d c B A G F|]\n",
    "X:1\nM:4/4\nL:1/8\nK:C\nC3 D C2 D2|C4 D4|]\n",
    "X:1\nM:3/4\nL:1/8\nK:A\nA2 B2 c2|e3 d2 c|]\n",
    "X:1\nM:4/4\nL:1/4\nK:C\nz C z C|C z C z|]\n",
    "X:1\nM:4/4\nL:1/4\nK:C\n[CEG]2 [DFA]2|[CEG]4|]\n",
]

_ARITH_OFF_BY_EIGHTH = [
    "X:1\nM:4/4\nL:1/4\nK:C\nC D E F7/8|G A B c|]\n",
    "X:1\nM:4/4\nL:1/4\nK:C\nC D E F|G A B c9/8|]\n",
    "X:1\nM:3/4\nL:1/4\nK:G\nG A B|c B A7/8|]\n",
    "X:1\nM:2/4\nL:1/8\nK:C\nC D E F5/4|G A B c|]\n",
    "X:1\nM:C\nL:1/4\nK:F\nF2 G2|A B c A7/8|]\n",
    "X:1\nM:C|\nL:1/2\nK:C\nC G|E C15/16|]\n",
    "X:1\nM:6/8\nL:1/8\nK:D\nD E F G A B5/4|d c B A G F|]\n",
    "X:1\nM:4/4\nL:1/8\nK:C\nC3 D C2 D2|C4 D15/4|]\n",
    "X:1\nM:4/4\nL:1/4\nK:C\nz C z C7/8|C z C z|]\n",
    "X:1\nM:4/4\nL:1/4\nK:C\n[CEG]2 [DFA]17/8|[CEG]4|]\n",
]


def test_criterion_6_measure_arithmetic_classifier(capsys):
    with _announce(capsys, 6, "measure arithmetic classifier"):
        off = parse_abc(_ARITH_OFF_BY_EIGHTH[0])
        assert off.measures[0].duration_sum == Fraction(31, 8)
        assert off.meter.beats - off.measures[0].duration_sum == Fraction(1, 8)

        true_positive = false_positive = false_negative = 0
        for text in _ARITH_VALID:
            flagged = not smg_rules(parse_abc(text), None).measure_arith_ok
            if flagged:
                false_positive += 1
        for text in _ARITH_OFF_BY_EIGHTH:
            flagged = not smg_rules(parse_abc(text), None).measure_arith_ok
            if flagged:
                true_positive += 1
            else:
                false_negative += 1
        precision = Fraction(true_positive, true_positive + false_positive)
        recall = Fraction(true_positive, true_positive + false_negative)
        assert precision == 1
        assert recall == 1


def _build_synthetic_manifest(root):
    fmt_cycle = [STAFF, JIANPU, TAB]
    letters = "abcd"
    rows = []

    gt_dir = root / "gt"
    pred_dir = root / "pred"
    gt_dir.mkdir()
    pred_dir.mkdir()
    for melody in MELODIES:
        for fmt in fmt_cycle:
            path = gt_dir / f"{melody.name}-{fmt.value}.json"
            path.write_text(melody.ground_truth_json(fmt.value),
                            encoding="utf-8")

    def encoding(melody, fmt):
        return {STAFF: melody.abc, JIANPU: melody.jianpu,
                TAB: melody.tab}[fmt]

    for i in range(280):
        answer = letters[i % 4]
        phrasing = i % 5
        if phrasing == 0:
            text = f"The answer is ({answer.upper()})."
        elif phrasing == 1:
            text = answer.upper()
        elif phrasing == 2:
            text = f"{answer}) because of the key signature"
        elif phrasing == 3:
            text = letters[(i + 1) % 4]
        else:
            text = "cannot tell"
        pred = pred_dir / f"vsu-{i:04d}.txt"
        pred.write_text(text, encoding="utf-8")
        rows.append({"id": f"vsu-{i:04d}", "task": "vsu", "format": "staff",
                     "pred_path": f"pred/{pred.name}", "answer": answer})

    for task in ("cnc", "ast"):
        for i in range(280):
            melody = MELODIES[i % 10]
            fmt = fmt_cycle[i % 3]
            body = encoding(melody, fmt)
            if task == "cnc" and i % 7 == 3:
                body = "garbage\n"
            if task == "ast" and i % 6 == 5:
                body = body.split("\n", 1)[1]
            pred = pred_dir / f"{task}-{i:04d}.txt"
            pred.write_text(body, encoding="utf-8")
            rows.append({
                "id": f"{task}-{i:04d}", "task": task, "format": fmt.value,
                "pred_path": f"pred/{pred.name}",
                "gt_path": f"gt/{melody.name}-{fmt.value}.json"})

    for i in range(280):
        melody = MELODIES[i % 10]
        fmt = fmt_cycle[i % 3]
        body = "nothing musical" if i % 9 == 4 else encoding(melody, fmt)
        pred = pred_dir / f"smg-{i:04d}.txt"
        pred.write_text(body, encoding="utf-8")
        rows.append({
            "id": f"smg-{i:04d}", "task": "smg", "format": fmt.value,
            "pred_path": f"pred/{pred.name}",
            "declared_key": melody.key, "declared_meter": melody.meter})

    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(json.dumps(row) for row in rows) + "\n",
                        encoding="utf-8")
    return manifest


def test_criterion_7_harness_determinism_and_scale(tmp_path, capsys):
    with _announce(capsys, 7, "harness determinism and scale"):
        manifest = _build_synthetic_manifest(tmp_path)

        started = time.monotonic()
        records = load_manifest(manifest)
        assert len(records) == 1_120
        report = run_batch(records, EvalConfig(), workers=1)
        serial_path = tmp_path / "report-1.json"
        write_report(report, serial_path)
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"1,120-sample run took {elapsed:.1f}s"

        parallel = run_batch(records, EvalConfig(), workers=8)
        parallel_path = tmp_path / "report-8.json"
        write_report(parallel, parallel_path)
        assert serial_path.read_bytes() == parallel_path.read_bytes()


_FUZZ_PREFIXES = [
    "X:1\nM:4/4\nL:1/4\nK:C\n",
    "X:1\nK:C\n",
    "1=C 4/4\n",
    "1=",
    "e|",
    "e|--|\nB|--|\nG|--|\nD|--|\nA|--|\nE|--|\n",
    '{"id": "x", ',
    "[",
    "|",
]


def test_criterion_8_fuzz_robustness(capsys):
    with _announce(capsys, 8, "fuzz robustness"):
        rng = random.Random(8)
        gt = parse_ground_truth(MELODIES[0].ground_truth_json("staff"))
        key = KeySignature.parse("C")
        meter = TimeSignature(4, 4)
        fmts = [STAFF, JIANPU, TAB]

        for i in range(100_000):
            raw = rng.randbytes(rng.randint(0, 48))
            if i % 5 == 0:
                raw = rng.choice(_FUZZ_PREFIXES).encode("latin-1") + raw
            text = raw.decode("latin-1")

            try:
                parse_abc(text)
            except ParseError:
                pass
            try:
                parse_jianpu(text)
            except ParseError:
                pass
            try:
                parse_ascii_tab(text)
            except ParseError:
                pass
            try:
                parse_ground_truth(text)
            except SchemaError:
                pass

            fmt = fmts[i % 3]
            branch = i % 4
            if branch == 0:
                result = score_vsu("f", "b", text)
                assert result.correct in (True, False)
            elif branch == 1:
                result = score_cnc("f", gt, text, fmt)
                if result.hybrid == 0:
                    assert result.diagnostics
            elif branch == 2:
                result = score_ast("f", gt, text, fmt)
                if result.hybrid == 0:
                    assert result.diagnostics
            else:
                result = score_smg("f", text, fmt, key, meter)
                assert result.rules is not None
                if result.technical == 0:
                    assert result.diagnostics or not result.fmt_legal
