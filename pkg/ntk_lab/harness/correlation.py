import logging
from typing import Callable, List, TypedDict

import numpy as np
from scipy import stats

from ntk_lab.errors import ContractError, DegenerateError, MissingSnapshotError
from .benchmark import BenchmarkRecord
from .study import metric_key

logger = logging.getLogger(__name__)

# (record, metric id, epoch, mode, probe hash) -> value
MetricLookup = Callable[[BenchmarkRecord, str, int, str, str], float]


class MetricReport(TypedDict):
    metric: str
    epoch: int
    mode: str
    tau: float
    samples: int
    degenerate: int
    seed: int


def kendall_tau(xs, ys) -> float:
    """
    Tie-corrected Kendall tau-b.

    Raises:
    ContractError: On unequal lengths or fewer than two points.
    DegenerateError: When either vector is entirely tied.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ContractError(f"kendall_tau needs two equal-length vectors, got {xs.shape} and {ys.shape}")
    if xs.size < 2:
        raise ContractError("kendall_tau needs at least two points")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise DegenerateError("kendall_tau of an all-tied vector is undefined")
    tau = stats.kendalltau(xs, ys, variant="b")[0]
    return float(min(1.0, max(-1.0, tau)))


def cached_metric(record: BenchmarkRecord, metric_id: str, epoch: int, mode: str, probe_hash: str) -> float:
    key = metric_key(metric_id, epoch, mode, probe_hash)
    try:
        return record["metrics"][key]
    except KeyError:
        raise MissingSnapshotError(key, epoch)


def final_accuracy(record: BenchmarkRecord, *_) -> float:
    return record["final_test_acc"]


def is_degenerate(record: BenchmarkRecord, metric_id: str, epoch: int, mode: str, probe_hash: str) -> bool:
    return metric_key(metric_id, epoch, mode, probe_hash) in record.get("degenerate", [])


def rank_correlation_report(
    records: List[BenchmarkRecord],
    metric_ids,
    epochs,
    modes,
    probe_hash: str,
    lookup: MetricLookup = cached_metric,
    seed: int = 0,
) -> list[MetricReport]:
    """
    One row per (metric, epoch, mode): Kendall tau-b between the metric
    values of every architecture and their final test accuracy.
    """
    if len(records) < 2:
        raise ContractError("Rank correlation needs at least two benchmark records")
    accuracy = [record["final_test_acc"] for record in records]
    rows: list[MetricReport] = []
    for metric_id in metric_ids:
        for epoch in epochs:
            for mode in modes:
                values = [lookup(record, metric_id, epoch, mode, probe_hash) for record in records]
                degenerate = sum(is_degenerate(r, metric_id, epoch, mode, probe_hash) for r in records)
                try:
                    tau = kendall_tau(values, accuracy)
                except DegenerateError:
                    logger.warning(f"{metric_id} at t={epoch} ({mode}): all values tied, tau undefined")
                    tau = float("nan")
                rows.append(
                    MetricReport(
                        metric=metric_id,
                        epoch=epoch,
                        mode=mode,
                        tau=tau,
                        samples=len(records),
                        degenerate=degenerate,
                        seed=seed,
                    )
                )
                logger.info(f"tau[{metric_id}, t={epoch}, {mode}] = {tau:.4f}")
    return rows
