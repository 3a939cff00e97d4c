import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Iterable, List, TypedDict

from ntk_lab.errors import BenchmarkParseError, ContractError
from ntk_lab.space import CellEncoding, SpaceConfig, enumerate_space, format_encoding, parse_encoding
from .study import Study, metric_key

logger = logging.getLogger(__name__)


class BenchmarkRecord(TypedDict):
    arch: str
    seed: int
    epoch_accs: List[float]
    final_test_acc: float
    params: int
    metrics: dict[str, float]
    degenerate: List[str]


REQUIRED_FIELDS = ("arch", "seed", "epoch_accs", "final_test_acc", "params", "metrics")


def evaluate_architecture(study: Study, enc: CellEncoding) -> BenchmarkRecord:
    """Trains one architecture to completion and scores every cached snapshot."""
    seed = study.seed_for(enc)
    snapshot_epochs = [t for t in study.snapshot_epochs if t <= study.train_config.epochs]
    net, history = study.train_arch(enc, snapshot_epochs=snapshot_epochs, seed=seed)
    values, degenerate = study.snapshot_metrics(history.snapshots, snapshot_epochs)
    return BenchmarkRecord(
        arch=format_encoding(enc),
        seed=seed,
        epoch_accs=history.test_accuracy,
        final_test_acc=history.final_test_accuracy,
        params=net.parameter_count,
        metrics=values,
        degenerate=degenerate,
    )


def record_line(record: BenchmarkRecord) -> str:
    return json.dumps(record, sort_keys=True)


def parse_record(line: str, path: str, line_number: int, space: SpaceConfig | None = None) -> BenchmarkRecord:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as err:
        raise BenchmarkParseError(path, line_number, f"invalid JSON: {err.msg}")
    if not isinstance(record, dict):
        raise BenchmarkParseError(path, line_number, "not an object")
    missing = [name for name in REQUIRED_FIELDS if name not in record]
    if missing:
        raise BenchmarkParseError(path, line_number, f"missing fields {missing}")
    try:
        parse_encoding(record["arch"], space)
    except ContractError as err:
        raise BenchmarkParseError(path, line_number, str(err))
    accs = [record["final_test_acc"], *record["epoch_accs"]]
    if not all(isinstance(a, (int, float)) and 0.0 <= a <= 1.0 for a in accs):
        raise BenchmarkParseError(path, line_number, "accuracy outside [0, 1]")
    record.setdefault("degenerate", [])
    return record


def load_benchmark(path: str, space: SpaceConfig | None = None) -> list[BenchmarkRecord]:
    records = []
    with open(path, "r") as file:
        for line_number, line in enumerate(file, start=1):
            if line.strip():
                records.append(parse_record(line, path, line_number, space))
    return records


def save_benchmark(path: str, records: Iterable[BenchmarkRecord]) -> None:
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w") as file:
        for record in records:
            file.write(record_line(record) + "\n")
    os.replace(tmp_path, path)


def build_oracle_benchmark(study: Study, path: str, jobs: int = 1) -> list[BenchmarkRecord]:
    """
    Trains every architecture of the space and appends one JSON record per
    line to ``path``. Architectures already in the file are skipped, so an
    interrupted build resumes where it stopped. Records are written in
    enumeration order whatever order the workers finish in.
    """
    if study.train_config.epochs < 1:
        raise ContractError("The oracle benchmark needs at least one training epoch")
    existing = load_benchmark(path, study.space) if os.path.exists(path) else []
    done = {record["arch"] for record in existing}
    pending = [enc for enc in enumerate_space(study.space) if format_encoding(enc) not in done]
    logger.info(
        f"Oracle benchmark {path}: {len(existing)} records present, {len(pending)} to train"
    )
    if not pending:
        return existing

    records = list(existing)
    evaluate = partial(evaluate_architecture, study)
    with open(path, "a") as file:
        if jobs <= 1:
            _write_records(file, map(evaluate, pending), records, len(pending))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                _write_records(file, executor.map(evaluate, pending), records, len(pending))
    return records


def _write_records(file, results: Iterable[BenchmarkRecord], records: list[BenchmarkRecord], total: int) -> None:
    for i, record in enumerate(results):
        file.write(record_line(record) + "\n")
        file.flush()
        records.append(record)
        logger.info(f"[{i + 1}/{total}] {record['arch']}: final_test_acc={record['final_test_acc']:.4f}")


def fill_missing_metrics(
    study: Study, records: list[BenchmarkRecord], epochs, modes=None
) -> int:
    """Recomputes absent (metric, epoch, mode) entries by deterministic retraining. Returns records touched."""
    modes = modes or study.modes
    touched = 0
    for record in records:
        missing = sorted(
            {
                t
                for t in epochs
                for mode in modes
                for metric_id in study.metric_ids
                if study_key(study, metric_id, t, mode) not in record["metrics"]
            }
        )
        if not missing:
            continue
        enc = parse_encoding(record["arch"], study.space)
        values, degenerate = study.recompute_metrics(enc, missing, seed=record["seed"], modes=modes)
        record["metrics"].update(values)
        record["degenerate"] = sorted(set(record.get("degenerate", [])) | set(degenerate))
        touched += 1
    if touched:
        logger.info(f"Recomputed metrics for {touched} architectures")
    return touched


def study_key(study: Study, metric_id: str, epoch: int, mode: str) -> str:
    return metric_key(metric_id, epoch, mode, study.probe_hash)
