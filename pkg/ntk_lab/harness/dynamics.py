import logging
from typing import List, TypedDict

import numpy as np

from ntk_lab.errors import DegenerateError
from ntk_lab.kernel import ProbeBatch, compute_ntk, kernel_correlation, relative_kernel_difference
from ntk_lab.space import CellEncoding, parse_encoding
from .benchmark import BenchmarkRecord
from .correlation import MetricLookup
from .study import Study, metric_key

logger = logging.getLogger(__name__)


class EvolutionRow(TypedDict):
    epoch: int
    kernel_correlation: float
    relative_kernel_difference: float
    train_loss: float
    test_accuracy: float


class TrajectoryRow(TypedDict):
    group: str
    metric: str
    epoch: int
    mode: str
    mean: float
    architectures: int


def _or_nan(func, theta0, thetat) -> float:
    try:
        return func(theta0, thetat)
    except DegenerateError as err:
        logger.warning(f"{func.__name__}: {err}")
        return float("nan")


def kernel_evolution(
    study: Study,
    enc: CellEncoding,
    epochs: int,
    probe: ProbeBatch | None = None,
    mode: str = "eval",
) -> list[EvolutionRow]:
    """
    How far the kernel drifts from its value at initialization: after every
    epoch, the correlation with and the relative distance from theta_0.
    """
    probe = probe or study.probe
    _, history = study.train_arch(enc, epochs=epochs, snapshot_epochs=range(epochs + 1))
    theta0 = compute_ntk(history.snapshots[0], probe, mode)
    rows: list[EvolutionRow] = []
    for epoch in range(1, epochs + 1):
        thetat = compute_ntk(history.snapshots[epoch], probe, mode)
        rows.append(
            EvolutionRow(
                epoch=epoch,
                kernel_correlation=_or_nan(kernel_correlation, theta0, thetat),
                relative_kernel_difference=_or_nan(relative_kernel_difference, theta0, thetat),
                train_loss=history.train_loss[epoch - 1],
                test_accuracy=history.test_accuracy[epoch - 1],
            )
        )
    return rows


def accuracy_groups(records: List[BenchmarkRecord], size: int) -> dict[str, list[BenchmarkRecord]]:
    """Top, middle and bottom ``size`` architectures by final accuracy (ties by encoding)."""
    ranked = sorted(records, key=lambda r: (-r["final_test_acc"], parse_encoding(r["arch"])))
    size = max(1, min(size, len(ranked) // 3 or 1))
    mid_start = (len(ranked) - size) // 2
    return {
        "high": ranked[:size],
        "mid": ranked[mid_start : mid_start + size],
        "low": ranked[-size:],
    }


def recomputed_lookup(study: Study, records: List[BenchmarkRecord], epochs) -> MetricLookup:
    """A lookup that fills every uncached value by retraining the record's architecture."""
    cache: dict[str, dict[str, float]] = {}

    def lookup(record, metric_id, epoch, mode, probe_hash):
        key = metric_key(metric_id, epoch, mode, probe_hash)
        if key in record["metrics"]:
            return record["metrics"][key]
        if record["arch"] not in cache:
            enc = parse_encoding(record["arch"], study.space)
            cache[record["arch"]], _ = study.recompute_metrics(enc, epochs, seed=record["seed"])
        return cache[record["arch"]][key]

    return lookup


def metric_trajectories(
    study: Study,
    records: List[BenchmarkRecord],
    epochs,
    group_size: int = 5,
    modes=None,
) -> list[TrajectoryRow]:
    """Mean of every metric per accuracy group at each epoch."""
    modes = modes or study.modes
    lookup = recomputed_lookup(study, records, epochs)
    rows: list[TrajectoryRow] = []
    for group, members in accuracy_groups(records, group_size).items():
        for metric_id in study.metric_ids:
            for mode in modes:
                for epoch in epochs:
                    values = [lookup(r, metric_id, epoch, mode, study.probe_hash) for r in members]
                    rows.append(
                        TrajectoryRow(
                            group=group,
                            metric=metric_id,
                            epoch=epoch,
                            mode=mode,
                            mean=float(np.mean(values)),
                            architectures=len(members),
                        )
                    )
    return rows
