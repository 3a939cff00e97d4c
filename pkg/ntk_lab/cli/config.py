import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from dotenv import find_dotenv, load_dotenv

from ntk_lab.errors import ConfigurationError, ContractError
from ntk_lab.harness import Study
from ntk_lab.kernel import ProbeBatch, draw_probe
from ntk_lab.linalg import INIT_SCHEMES, Rng
from ntk_lab.metrics import METRIC_IDS
from ntk_lab.network import MODES, READOUTS
from ntk_lab.space import SpaceConfig
from ntk_lab.training import Dataset, TrainConfig, make_dataset

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = ".ntklab_config"
ENV_CONFIG = "NTKLAB_CONFIG"
ENV_JOBS = "NTKLAB_JOBS"


@dataclass(frozen=True)
class RunConfig:
    # space
    nodes: int = 3
    ops: int = 3
    feature_dim: int = 16
    cells_stacked: int = 1
    # data
    classes: int = 3
    input_dim: int = 16
    per_class: int = 60
    spread: float = 0.3
    # training
    lr: float = 0.025
    momentum: float = 0.9
    weight_decay: float = 3e-4
    batch_size: int = 32
    epochs: int = 30
    norm_momentum: float = 0.9
    # probing
    probe_size: int = 32
    mode: str = "eval"
    modes: list[str] = field(default_factory=lambda: ["eval", "train"])
    metrics: list[str] = field(default_factory=lambda: list(METRIC_IDS))
    snapshot_epochs: list[int] = field(default_factory=lambda: [0, 1, 3, 5, 10])
    init: str = "kaiming"
    gaussian_std: float = 0.05
    readout: str = "mean"
    # run
    seed: int = 0
    jobs: int = 1
    out_dir: str = "."

    def __post_init__(self):
        if self.init not in INIT_SCHEMES:
            raise ConfigurationError(f"Unknown init scheme: {self.init!r} (expected one of {INIT_SCHEMES})")
        for mode in [self.mode, *self.modes]:
            if mode not in MODES:
                raise ConfigurationError(f"Unknown mode: {mode!r} (expected one of {MODES})")
        if self.readout not in READOUTS:
            raise ConfigurationError(f"Unknown readout: {self.readout!r} (expected one of {READOUTS})")
        for metric_id in self.metrics:
            if metric_id not in METRIC_IDS:
                raise ConfigurationError(f"Unknown metric: {metric_id!r} (expected one of {METRIC_IDS})")
        if self.jobs < 1 or self.probe_size < 1:
            raise ConfigurationError("jobs and probe_size must be >= 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    # ------------------------------------------------#

    def space_config(self) -> SpaceConfig:
        try:
            return SpaceConfig(
                nodes=self.nodes,
                ops=self.ops,
                feature_dim=self.feature_dim,
                cells_stacked=self.cells_stacked,
                classes=self.classes,
                input_dim=self.input_dim,
                norm_momentum=self.norm_momentum,
            )
        except ContractError as err:
            raise ConfigurationError(str(err))

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
        )

    def dataset(self) -> Dataset:
        return make_dataset(self.classes, self.input_dim, self.per_class, self.spread, self.seed)

    def probe(self, ds: Dataset, size: int | None = None) -> ProbeBatch:
        return draw_probe(ds.train_x, ds.train_y, size or self.probe_size, Rng.derive(self.seed, "probe"))

    def study(self, ds: Dataset | None = None, probe_size: int | None = None) -> Study:
        ds = ds or self.dataset()
        return Study(
            space=self.space_config(),
            dataset=ds,
            train_config=self.train_config(),
            probe=self.probe(ds, probe_size),
            scheme=self.init,
            gaussian_std=self.gaussian_std,
            readout=self.readout,
            modes=tuple(self.modes),
            metric_ids=tuple(self.metrics),
            snapshot_epochs=tuple(self.snapshot_epochs),
            seed=self.seed,
        )


CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    default = RunConfig.__dataclass_fields__[name]
    kind = default.type
    try:
        if kind in ("int", int):
            return int(value)
        if kind in ("float", float):
            return float(value)
        if kind in ("str", str):
            return str(value)
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",") if p.strip()]
            return [int(p) for p in parts] if name == "snapshot_epochs" else parts
        return list(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Config key {name!r} has an invalid value: {value!r}")


def load_run_config(path: str | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """
    Resolves the run configuration.

    Precedence: ``overrides`` (command-line flags) > config file > environment
    (``NTKLAB_JOBS``) > built-in defaults. The config file is ``path``, else
    ``$NTKLAB_CONFIG``, else ``.ntklab_config`` when it exists.
    """
    load_dotenv(dotenv_path=find_dotenv(usecwd=True))
    values: dict[str, Any] = {}
    if os.getenv(ENV_JOBS):
        values["jobs"] = os.getenv(ENV_JOBS)

    path = path or os.getenv(ENV_CONFIG)
    if path is None and os.path.exists(DEFAULT_CONFIG_PATH):
        path = DEFAULT_CONFIG_PATH
    if path is not None:
        try:
            with open(path, "r") as file:
                file_values = json.load(file)
        except FileNotFoundError:
            raise ConfigurationError(f"Config file not found: {path}")
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {err}")
        if not isinstance(file_values, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")
        values.update(file_values)
        logger.debug(f"Loaded config from {path}")

    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(values) - CONFIG_KEYS)
    if unknown:
        raise ConfigurationError(f"Unknown config keys: {unknown}")
    return replace(RunConfig(), **{name: _coerce(name, value) for name, value in values.items()})
