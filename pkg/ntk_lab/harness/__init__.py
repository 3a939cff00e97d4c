from .study import DEFAULT_SNAPSHOT_EPOCHS, Study, arch_seed, metric_key
from .benchmark import (
    BenchmarkRecord,
    build_oracle_benchmark,
    evaluate_architecture,
    fill_missing_metrics,
    load_benchmark,
    save_benchmark,
)
from .correlation import (
    MetricLookup,
    MetricReport,
    cached_metric,
    final_accuracy,
    kendall_tau,
    rank_correlation_report,
)
from .deciles import TOTAL_DECILE, DecileRow, decile_analysis, decile_bins
from .dynamics import (
    EvolutionRow,
    TrajectoryRow,
    accuracy_groups,
    kernel_evolution,
    metric_trajectories,
    recomputed_lookup,
)
