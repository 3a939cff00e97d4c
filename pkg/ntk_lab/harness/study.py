import logging
from dataclasses import dataclass, replace

import numpy as np

from ntk_lab.kernel import ProbeBatch, compute_ntk
from ntk_lab.metrics import METRIC_IDS, score_kernel
from ntk_lab.network import Network
from ntk_lab.network.network import Readout
from ntk_lab.linalg import Rng
from ntk_lab.space import CellEncoding, SpaceConfig, encoding_index, instantiate
from ntk_lab.training import Dataset, TrainConfig, TrainHistory, train

logger = logging.getLogger(__name__)

DEFAULT_SNAPSHOT_EPOCHS = (0, 1, 3, 5, 10)


def arch_seed(base_seed: int, index: int) -> int:
    """Per-architecture seed derived from the study seed and the architecture's index."""
    state = np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, dtype=np.uint32)
    return int(state[0])


def metric_key(metric_id: str, epoch: int, mode: str, probe_hash: str) -> str:
    return f"{metric_id}@{epoch}@{mode}@{probe_hash}"


@dataclass(frozen=True, eq=False)
class Study:
    """Everything shared by all architectures of one experiment."""

    space: SpaceConfig
    dataset: Dataset
    train_config: TrainConfig
    probe: ProbeBatch
    scheme: str = "kaiming"
    gaussian_std: float = 0.05
    readout: Readout = "mean"
    modes: tuple[str, ...] = ("eval", "train")
    metric_ids: tuple[str, ...] = METRIC_IDS
    snapshot_epochs: tuple[int, ...] = DEFAULT_SNAPSHOT_EPOCHS
    seed: int = 0

    @property
    def probe_hash(self) -> str:
        return self.probe.digest()

    def seed_for(self, enc: CellEncoding) -> int:
        return arch_seed(self.seed, encoding_index(enc, self.space))

    def build(self, enc: CellEncoding, seed: int | None = None) -> Network:
        seed = self.seed_for(enc) if seed is None else seed
        return instantiate(
            enc, self.space, self.scheme, Rng.derive(seed, "init"), self.readout, self.gaussian_std
        )

    def train_arch(
        self,
        enc: CellEncoding,
        epochs: int | None = None,
        snapshot_epochs=(),
        seed: int | None = None,
    ) -> tuple[Network, TrainHistory]:
        seed = self.seed_for(enc) if seed is None else seed
        net = self.build(enc, seed)
        cfg = replace(self.train_config, seed=seed)
        if epochs is not None:
            cfg = replace(cfg, epochs=epochs)
        history = train(net, self.dataset, cfg, frozenset(snapshot_epochs))
        return net, history

    def snapshot_metrics(self, snapshots: dict[int, Network], epochs, metric_ids=None, modes=None):
        """Metric values for each requested snapshot epoch, keyed by ``metric_key``."""
        metric_ids = metric_ids or self.metric_ids
        modes = modes or self.modes
        values: dict[str, float] = {}
        degenerate: list[str] = []
        for epoch in sorted(epochs):
            for mode in modes:
                kernel = compute_ntk(snapshots[epoch], self.probe, mode)
                for mv in score_kernel(kernel, self.probe.labels, metric_ids, epoch):
                    key = metric_key(mv.metric, epoch, mode, self.probe_hash)
                    values[key] = mv.value
                    if mv.degenerate:
                        degenerate.append(key)
        return values, degenerate

    def recompute_metrics(self, enc: CellEncoding, epochs, seed: int | None = None, metric_ids=None, modes=None):
        """Retrains just far enough to reproduce the requested snapshots, then scores them."""
        epochs = sorted(set(epochs))
        _, history = self.train_arch(enc, epochs=max(epochs), snapshot_epochs=epochs, seed=seed)
        return self.snapshot_metrics(history.snapshots, epochs, metric_ids, modes)
