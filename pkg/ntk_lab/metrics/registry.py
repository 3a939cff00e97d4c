from dataclasses import dataclass, replace
from functools import wraps
from typing import Callable, Literal

import numpy as np

from ntk_lab.errors import ConfigurationError

MetricId = Literal["fnorm", "mean", "ncn", "lga"]


@dataclass(frozen=True)
class MetricValue:
    metric: str
    value: float
    epoch: int = 0
    degenerate: bool = False

    def at_epoch(self, epoch: int) -> "MetricValue":
        return replace(self, epoch=epoch)


ScoreFunction = Callable[[np.ndarray, np.ndarray | None], MetricValue]

METRICS: dict[str, ScoreFunction] = {}


def metric(metric_id: str, needs_labels: bool = False) -> Callable[[Callable[..., MetricValue]], Callable[..., MetricValue]]:
    """
    Registers a kernel metric under its stable id. Every registered metric is
    "higher is better"; the registry calls each one as ``fn(theta, labels)``.
    """

    def decorator(func: Callable[..., MetricValue]) -> Callable[..., MetricValue]:
        @wraps(func)
        def registered(theta: np.ndarray, labels: np.ndarray | None = None) -> MetricValue:
            if needs_labels:
                return func(theta, labels)
            return func(theta)

        METRICS[metric_id] = registered
        return func

    return decorator


def get_metric(metric_id: str) -> ScoreFunction:
    try:
        return METRICS[metric_id]
    except KeyError:
        raise ConfigurationError(f"Unknown metric: {metric_id!r} (expected one of {sorted(METRICS)})")


def parse_metric_ids(text: str | list[str]) -> list[str]:
    ids = text.split(",") if isinstance(text, str) else list(text)
    ids = [i.strip() for i in ids if i.strip()]
    for metric_id in ids:
        get_metric(metric_id)
    return ids
