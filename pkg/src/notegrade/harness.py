"""Batch evaluation: manifest loading, parallel scoring, report emission.

Reports are canonical: keys sorted, exact values rendered the same way
every run, samples ordered by id. Worker count changes throughput only,
never a byte of the report.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, ParseError, SchemaError
from .metrics import MetricWeights
from .parsers import load_ground_truth
from .pitch import STANDARD_TUNING, KeySignature, Tuning
from .projection import DEFAULT_GRID, beats_text
from .score import GroundTruth, NotationFormat, TimeSignature
from .tasks import (
    CapabilityWeights,
    Task,
    TaskResult,
    aggregate_capability,
    score_ast,
    score_cnc,
    score_smg,
    score_vsu,
)

REPORT_SCHEMA_VERSION = 1

_RECORD_KEYS = {"id", "task", "format", "pred_path", "gt_path", "answer",
                "declared_key", "declared_meter", "tuning"}


@dataclass(frozen=True)
class EvalConfig:
    weights: MetricWeights = MetricWeights()
    task_weights: CapabilityWeights = CapabilityWeights()
    grid: Fraction = DEFAULT_GRID
    tuning: Tuning = STANDARD_TUNING
    cnc_lenient: bool = False
    ast_length_cap: int | None = None

    def __post_init__(self) -> None:
        if self.grid <= 0:
            raise ConfigError(f"grid must be positive, got {self.grid}")
        if self.ast_length_cap is not None and self.ast_length_cap < 1:
            raise ConfigError(
                f"ast_length_cap must be >= 1, got {self.ast_length_cap}")

    def to_json_dict(self) -> dict:
        return {
            "weights": self.weights.to_json_dict(),
            "task_weights": self.task_weights.to_json_dict(),
            "grid": beats_text(self.grid),
            "tuning": list(self.tuning.base),
            "cnc_lenient": self.cnc_lenient,
            "ast_length_cap": self.ast_length_cap,
        }


@dataclass(frozen=True)
class SampleRecord:
    id: str
    task: Task
    format: NotationFormat
    pred_path: Path
    gt_path: Path | None = None
    answer: str | None = None
    declared_key: KeySignature | None = None
    declared_meter: TimeSignature | None = None
    tuning: Tuning | None = None


def _require_str(obj: dict, key: str, line: int) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise SchemaError(
            f"manifest line {line}: {key!r} must be a non-empty string")
    return value


def _record(obj: object, line: int, base_dir: Path) -> SampleRecord:
    if not isinstance(obj, dict):
        raise SchemaError(f"manifest line {line}: record must be an object")
    unknown = set(obj) - _RECORD_KEYS
    if unknown:
        raise SchemaError(
            f"manifest line {line}: unknown keys {sorted(unknown)}")
    sample_id = _require_str(obj, "id", line)
    try:
        task = Task.parse(_require_str(obj, "task", line))
        fmt = NotationFormat.parse(_require_str(obj, "format", line))
    except (ConfigError, ParseError) as exc:
        raise SchemaError(f"manifest line {line}: {exc}") from None
    pred_path = base_dir / _require_str(obj, "pred_path", line)

    gt_path = None
    if task in (Task.CNC, Task.AST):
        gt_path = base_dir / _require_str(obj, "gt_path", line)
    elif "gt_path" in obj:
        raise SchemaError(
            f"manifest line {line}: gt_path only applies to cnc and ast")

    answer = None
    if task is Task.VSU:
        answer = _require_str(obj, "answer", line)
    elif "answer" in obj:
        raise SchemaError(f"manifest line {line}: answer only applies to vsu")

    declared_key = declared_meter = None
    if task is Task.SMG:
        try:
            declared_key = KeySignature.parse(
                _require_str(obj, "declared_key", line))
            declared_meter = TimeSignature.parse(
                _require_str(obj, "declared_meter", line))
        except ParseError as exc:
            raise SchemaError(f"manifest line {line}: {exc}") from None
    elif "declared_key" in obj or "declared_meter" in obj:
        raise SchemaError(
            f"manifest line {line}: declared_key/declared_meter only apply to smg")

    tuning = None
    if "tuning" in obj:
        if fmt is not NotationFormat.ASCII_TAB:
            raise SchemaError(
                f"manifest line {line}: tuning only applies to tab samples")
        value = obj["tuning"]
        if not isinstance(value, list) or len(value) != 6 or \
                not all(isinstance(v, int) and not isinstance(v, bool)
                        for v in value):
            raise SchemaError(
                f"manifest line {line}: tuning must be a list of 6 integers")
        try:
            tuning = Tuning(tuple(value))
        except Exception as exc:
            raise SchemaError(f"manifest line {line}: {exc}") from None

    return SampleRecord(
        id=sample_id, task=task, format=fmt, pred_path=pred_path,
        gt_path=gt_path, answer=answer, declared_key=declared_key,
        declared_meter=declared_meter, tuning=tuning)


def load_manifest(path: str | Path) -> tuple[SampleRecord, ...]:
    """Read a JSONL manifest; any structural problem is a SchemaError."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot read manifest {path}: {exc}") from None
    base_dir = path.parent
    records = []
    seen: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(
                f"manifest line {line_no}: invalid JSON: {exc}") from None
        record = _record(obj, line_no, base_dir)
        if record.id in seen:
            raise SchemaError(
                f"manifest line {line_no}: duplicate sample id {record.id!r}")
        seen.add(record.id)
        records.append(record)
    if not records:
        raise SchemaError(f"manifest {path} contains no samples")
    return tuple(records)


def load_external_scores(path: str | Path) -> dict[str, dict[str, float]]:
    """Read judge annotations: a JSON object of id -> {aesthetic, fingering}.

    Scores live on a 1-5 scale; anything outside it is corrupt input.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot read external scores {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"external scores: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("external scores must be a JSON object keyed by id")
    out: dict[str, dict[str, float]] = {}
    for sample_id, entry in obj.items():
        if not isinstance(entry, dict):
            raise SchemaError(f"external scores for {sample_id!r} must be an object")
        unknown = set(entry) - {"aesthetic", "fingering"}
        if unknown:
            raise SchemaError(
                f"external scores for {sample_id!r} have unknown keys "
                f"{sorted(unknown)}")
        if not entry:
            raise SchemaError(f"external scores for {sample_id!r} are empty")
        cleaned = {}
        for name, value in entry.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool) \
                    or not 1 <= value <= 5:
                raise SchemaError(
                    f"external {name} score for {sample_id!r} must be in [1, 5], "
                    f"got {value!r}")
            cleaned[name] = float(value)
        out[sample_id] = cleaned
    return out


def _read_prediction(path: Path) -> tuple[str, tuple[str, ...]]:
    try:
        return path.read_text(encoding="utf-8", errors="replace"), ()
    except OSError as exc:
        return "", (f"prediction unreadable, scored as empty: {exc}",)


def score_sample(record: SampleRecord, config: EvalConfig,
                 gt: GroundTruth | None) -> TaskResult:
    """Score one sample; ground truth, when needed, is loaded by the caller."""
    prediction, diagnostics = _read_prediction(record.pred_path)
    tuning = record.tuning or config.tuning
    if record.task is Task.VSU:
        result = score_vsu(record.id, record.answer, prediction)
    elif record.task is Task.CNC:
        result = score_cnc(
            record.id, gt, prediction, record.format,
            weights=config.weights, grid=config.grid, tuning=tuning,
            lenient=config.cnc_lenient)
    elif record.task is Task.AST:
        result = score_ast(
            record.id, gt, prediction, record.format,
            weights=config.weights, grid=config.grid, tuning=tuning,
            length_cap=config.ast_length_cap)
    else:
        result = score_smg(
            record.id, prediction, record.format,
            record.declared_key, record.declared_meter, tuning=tuning)
    if diagnostics:
        result = replace(result, diagnostics=diagnostics + result.diagnostics)
    return result


@dataclass(frozen=True)
class Report:
    config: EvalConfig
    records: tuple[SampleRecord, ...]
    results: tuple[TaskResult, ...]
    external: dict[str, dict[str, float]] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def task_means(self) -> dict[Task, Fraction]:
        return self._means_for(self.results)

    @staticmethod
    def _means_for(results: tuple[TaskResult, ...]) -> dict[Task, Fraction]:
        sums: dict[Task, Fraction] = {}
        counts: dict[Task, int] = {}
        for result in results:
            value = result.normalized()
            if value is None:
                continue
            sums[result.task] = sums.get(result.task, Fraction(0)) + value
            counts[result.task] = counts.get(result.task, 0) + 1
        return {task: sums[task] / counts[task] for task in sums}

    def capability(self) -> Fraction:
        return aggregate_capability(self.task_means(), self.config.task_weights)

    def to_json_dict(self) -> dict:
        fmt_of = {record.id: record.format for record in self.records}
        per_sample = []
        for result in self.results:
            entry = result.to_json_dict()
            entry["format"] = fmt_of[result.sample_id].value
            scores = self.external.get(result.sample_id)
            entry["aesthetic"] = None if scores is None else scores.get("aesthetic")
            entry["fingering"] = None if scores is None else scores.get("fingering")
            per_sample.append(entry)

        per_task = {}
        for task in Task:
            task_results = [r for r in self.results if r.task is task]
            valid = [r.normalized() for r in task_results
                     if r.normalized() is not None]
            mean = sum(valid, Fraction(0)) / len(valid) if valid else None
            per_task[task.value] = {
                "count": len(task_results),
                "invalid_count": len(task_results) - len(valid),
                "mean": None if mean is None else float(mean),
                "mean_exact": None if mean is None else
                f"{mean.numerator}/{mean.denominator}",
            }

        per_task_format = []
        for task in Task:
            for fmt in NotationFormat:
                cell = [r for r in self.results if r.task is task
                        and fmt_of[r.sample_id] is fmt]
                if not cell:
                    continue
                valid = [r.normalized() for r in cell
                         if r.normalized() is not None]
                mean = sum(valid, Fraction(0)) / len(valid) if valid else None
                per_task_format.append({
                    "task": task.value,
                    "format": fmt.value,
                    "count": len(cell),
                    "invalid_count": len(cell) - len(valid),
                    "mean": None if mean is None else float(mean),
                })

        capability_by_format = {}
        for fmt in NotationFormat:
            fmt_results = tuple(r for r in self.results
                                if fmt_of[r.sample_id] is fmt)
            if not fmt_results:
                continue
            means = self._means_for(fmt_results)
            capability_by_format[fmt.value] = float(
                aggregate_capability(means, self.config.task_weights))

        capability = self.capability()
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config": self.config.to_json_dict(),
            "per_sample": per_sample,
            "per_task": per_task,
            "per_task_format": per_task_format,
            "capability": float(capability),
            "capability_exact":
                f"{capability.numerator}/{capability.denominator}",
            "capability_by_format": capability_by_format,
            "warnings": list(self.warnings),
        }


def run_batch(records: tuple[SampleRecord, ...],
              config: EvalConfig = EvalConfig(), *,
              workers: int = 1,
              external_scores: dict[str, dict[str, float]] | None = None,
              ) -> Report:
    """Score every sample and assemble a deterministic report.

    Ground truth is loaded up front so corrupt benchmark data aborts the
    run before any scoring happens.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    ground_truths: dict[str, GroundTruth | None] = {}
    gt_cache: dict[Path, GroundTruth] = {}
    for record in records:
        if record.gt_path is None:
            ground_truths[record.id] = None
            continue
        if record.gt_path not in gt_cache:
            gt_cache[record.gt_path] = load_ground_truth(record.gt_path)
        ground_truths[record.id] = gt_cache[record.gt_path]

    ordered = sorted(records, key=lambda r: r.id)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = tuple(pool.map(
            lambda r: score_sample(r, config, ground_truths[r.id]), ordered))

    warnings = []
    present = {record.task for record in records}
    for task in Task:
        if task not in present:
            warnings.append(
                f"no {task.value} samples; task contributes 0 to capability")

    external = {}
    if external_scores:
        by_id = {record.id: record for record in records}
        for sample_id in sorted(external_scores):
            record = by_id.get(sample_id)
            if record is None:
                warnings.append(
                    f"external score for unknown sample {sample_id!r} ignored")
            elif record.task is not Task.SMG:
                warnings.append(
                    f"external score for non-smg sample {sample_id!r} ignored")
            else:
                external[sample_id] = external_scores[sample_id]

    return Report(config=config, records=tuple(ordered), results=results,
                  external=external, warnings=tuple(warnings))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_report(report: Report, out_path: str | Path,
                 csv_path: str | Path | None = None) -> None:
    """Serialize the report as canonical JSON, plus an optional CSV of the
    task-by-format table."""
    out_path = Path(out_path)
    payload = json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n"
    _atomic_write(out_path, payload)
    if csv_path is None:
        return
    csv_path = Path(csv_path)
    rows = report.to_json_dict()["per_task_format"]
    tmp = csv_path.with_name(csv_path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["task", "format", "count", "invalid_count", "mean"])
        for row in rows:
            mean = "" if row["mean"] is None else f"{row['mean']:.6f}"
            writer.writerow([row["task"], row["format"], row["count"],
                             row["invalid_count"], mean])
    os.replace(tmp, csv_path)
