from .registry import METRICS, MetricId, MetricValue, get_metric, metric, parse_metric_ids
from .scores import (
    LabelMatrix,
    f_norm_metric,
    label_alignment,
    label_matrix,
    lga_metric,
    mean_metric,
    ncn_metric,
    score_kernel,
)

METRIC_IDS = ("fnorm", "mean", "ncn", "lga")
