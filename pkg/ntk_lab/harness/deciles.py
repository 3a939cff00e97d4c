import logging
from typing import List, TypedDict

import numpy as np

from ntk_lab.errors import DegenerateError
from ntk_lab.linalg import Rng
from ntk_lab.space import parse_encoding
from .benchmark import BenchmarkRecord
from .correlation import MetricLookup, cached_metric, kendall_tau

logger = logging.getLogger(__name__)

DECILES = 10
TOTAL_DECILE = 0  # decile number of the whole-benchmark row


class DecileRow(TypedDict):
    metric: str
    epoch: int
    mode: str
    decile: int
    size: int
    sampled: int
    clamped: bool
    skipped: bool
    taus: int
    mean: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


def decile_bins(records: List[BenchmarkRecord]) -> list[np.ndarray]:
    """
    Record indices sorted by final accuracy (best first, ties by encoding)
    and cut into ten near-equal bins; P1 holds the top tenth.
    """
    order = sorted(
        range(len(records)),
        key=lambda i: (-records[i]["final_test_acc"], parse_encoding(records[i]["arch"])),
    )
    return np.array_split(np.asarray(order, dtype=np.int64), DECILES)


def decile_analysis(
    records: List[BenchmarkRecord],
    metric_id: str,
    epoch: int,
    mode: str,
    probe_hash: str,
    seeds: int = 20,
    per_decile: int = 100,
    base_seed: int = 0,
    lookup: MetricLookup = cached_metric,
) -> list[DecileRow]:
    """
    Kendall tau inside each accuracy decile. For every bin and seed,
    ``per_decile`` architectures (clamped to the bin size) are drawn without
    replacement and correlated; the row carries the box-plot summary of the
    per-seed taus. Bins with fewer than two architectures are skipped.

    A last row with ``decile`` 0 repeats the sampling over the whole
    benchmark, the baseline every bin is read against.
    """
    values = np.array([lookup(r, metric_id, epoch, mode, probe_hash) for r in records])
    accuracy = np.array([r["final_test_acc"] for r in records])
    groups = [(b + 1, members) for b, members in enumerate(decile_bins(records))]
    groups.append((TOTAL_DECILE, np.arange(len(records), dtype=np.int64)))

    rows: list[DecileRow] = []
    for decile, members in groups:
        size = int(members.size)
        sampled = min(per_decile, size)
        label = "Total" if decile == TOTAL_DECILE else f"P{decile}"
        row = DecileRow(
            metric=metric_id,
            epoch=epoch,
            mode=mode,
            decile=decile,
            size=size,
            sampled=sampled,
            clamped=per_decile > size,
            skipped=size < 2,
            taus=0,
            mean=float("nan"),
            min=float("nan"),
            q1=float("nan"),
            median=float("nan"),
            q3=float("nan"),
            max=float("nan"),
        )
        if row["skipped"]:
            logger.warning(f"{label} has {size} architectures; skipped")
            rows.append(row)
            continue
        taus = []
        for s in range(seeds):
            pick = members[Rng.derive(base_seed, "decile", s, decile).choice(size, sampled, replace=False)]
            try:
                taus.append(kendall_tau(values[pick], accuracy[pick]))
            except DegenerateError:
                continue
        if taus:
            q1, median, q3 = np.percentile(taus, [25, 50, 75])
            row.update(
                taus=len(taus),
                mean=float(np.mean(taus)),
                min=float(np.min(taus)),
                q1=float(q1),
                median=float(median),
                q3=float(q3),
                max=float(np.max(taus)),
            )
        else:
            logger.warning(f"{label}: every sample was fully tied")
        rows.append(row)
    if any(row["clamped"] for row in rows):
        logger.warning(f"per_decile={per_decile} clamped to the bin sizes")
    return rows
