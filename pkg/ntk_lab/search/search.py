import logging
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Literal, TypedDict

from ntk_lab.errors import ConfigurationError
from ntk_lab.linalg import Rng
from ntk_lab.space import CellEncoding, SpaceConfig, encoding_at, format_encoding, mutate, sample_random
from .scorers import BaseScorer, Evaluation

logger = logging.getLogger(__name__)

Algorithm = Literal["random", "evolution"]


@dataclass(frozen=True)
class SearchConfig:
    algorithm: Algorithm = "random"
    population: int = 100
    epochs: int = 3
    budget: int | None = None
    seed: int = 0
    replace: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.algorithm not in ("random", "evolution"):
            raise ConfigurationError(f"Unknown search algorithm: {self.algorithm!r}")
        if self.population < 1 or self.epochs < 0:
            raise ConfigurationError("population must be >= 1 and epochs >= 0")
        if self.algorithm == "evolution" and self.total_budget < self.population:
            raise ConfigurationError(
                f"Evolution budget {self.total_budget} is below the pool size {self.population}"
            )

    @property
    def total_budget(self) -> int:
        return self.population if self.budget is None else self.budget


class LogEntry(TypedDict):
    step: int
    arch: str
    score: float
    degenerate: bool
    best_so_far: float
    parent: int | None
    evicted: int | None


@dataclass
class SearchResult:
    algorithm: str
    chosen: CellEncoding
    score: float
    evaluations: int
    epochs_trained: int
    log: List[LogEntry] = field(default_factory=list)
    pool_sizes: List[int] = field(default_factory=list)
    all_degenerate: bool = False

    @property
    def chosen_arch(self) -> str:
        return format_encoding(self.chosen)


def _score_all(scorer: BaseScorer, encodings: list[CellEncoding], jobs: int) -> list[Evaluation]:
    if jobs <= 1:
        return [scorer.score(enc) for enc in encodings]
    # scorers are plain picklable objects, each worker process gets a copy
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(scorer.score, encodings))


def _append(log: list[LogEntry], step: int, enc: CellEncoding, ev: Evaluation, **extra) -> None:
    best = ev.value if not log else max(log[-1]["best_so_far"], ev.value)
    log.append(
        LogEntry(
            step=step,
            arch=format_encoding(enc),
            score=ev.value,
            degenerate=ev.degenerate,
            best_so_far=best,
            parent=extra.get("parent"),
            evicted=extra.get("evicted"),
        )
    )


def _best(evaluations: list[Evaluation]) -> int:
    """Index of the highest score; the earliest wins ties."""
    best = 0
    for i, ev in enumerate(evaluations):
        if ev.value > evaluations[best].value:
            best = i
    return best


def random_search(cfg: SearchConfig, space: SpaceConfig, scorer: BaseScorer) -> SearchResult:
    """
    Samples ``cfg.population`` candidates, scores each and keeps the argmax.
    With ``cfg.replace`` off the candidates are distinct (at most the whole space).
    """
    rng = Rng.derive(cfg.seed, "search")
    if cfg.replace:
        encodings = [sample_random(space, rng) for _ in range(cfg.population)]
    else:
        if cfg.population > space.size:
            raise ConfigurationError(
                f"Cannot draw {cfg.population} distinct candidates from a space of {space.size}"
            )
        encodings = [encoding_at(int(i), space) for i in rng.choice(space.size, cfg.population, replace=False)]

    evaluations = _score_all(scorer, encodings, cfg.jobs)
    log: list[LogEntry] = []
    for step, (enc, ev) in enumerate(zip(encodings, evaluations)):
        _append(log, step, enc, ev)
    best = _best(evaluations)
    all_degenerate = all(ev.degenerate for ev in evaluations)
    if all_degenerate:
        logger.warning("Every candidate scored degenerate; the choice is arbitrary")
    logger.info(
        f"Random search: {format_encoding(encodings[best])} scored {evaluations[best].value:.4f} "
        f"over {len(encodings)} candidates"
    )
    return SearchResult(
        algorithm="random",
        chosen=encodings[best],
        score=evaluations[best].value,
        evaluations=len(encodings),
        epochs_trained=sum(ev.epochs for ev in evaluations),
        log=log,
        all_degenerate=all_degenerate,
    )


def regularized_evolution(cfg: SearchConfig, space: SpaceConfig, scorer: BaseScorer) -> SearchResult:
    """
    Aging evolution. The pool starts with ``cfg.population`` random scored
    candidates. Each step mutates the best-scoring pool member, scores the
    child, drops the oldest member and appends the child, until the budget
    of evaluations is spent. The answer is the best candidate seen over the
    whole run, not just the survivors.
    """
    if space.ops < 2:
        raise ConfigurationError("Evolution needs at least two ops to mutate between")
    rng = Rng.derive(cfg.seed, "search")
    initial = [sample_random(space, rng) for _ in range(cfg.population)]
    evaluations = _score_all(scorer, initial, cfg.jobs)

    log: list[LogEntry] = []
    history: list[tuple[CellEncoding, Evaluation]] = []
    # pool entries are (step, encoding, evaluation); the left end is the oldest
    pool: deque[tuple[int, CellEncoding, Evaluation]] = deque()
    for step, (enc, ev) in enumerate(zip(initial, evaluations)):
        pool.append((step, enc, ev))
        history.append((enc, ev))
        _append(log, step, enc, ev)
    pool_sizes = [len(pool)]

    step = len(history)
    while step < cfg.total_budget:
        parent_step, parent, _ = max(pool, key=lambda member: (member[2].value, -member[0]))
        child = mutate(parent, space, rng)
        ev = scorer.score(child)
        evicted_step, _, _ = pool.popleft()
        pool.append((step, child, ev))
        history.append((child, ev))
        _append(log, step, child, ev, parent=parent_step, evicted=evicted_step)
        pool_sizes.append(len(pool))
        logger.debug(f"step {step}: child {format_encoding(child)} scored {ev.value:.4f}")
        step += 1

    best = _best([ev for _, ev in history])
    chosen, chosen_ev = history[best]
    all_degenerate = all(ev.degenerate for _, ev in history)
    if all_degenerate:
        logger.warning("Every candidate scored degenerate; the choice is arbitrary")
    logger.info(
        f"Evolution: {format_encoding(chosen)} scored {chosen_ev.value:.4f} after {len(history)} evaluations"
    )
    return SearchResult(
        algorithm="evolution",
        chosen=chosen,
        score=chosen_ev.value,
        evaluations=len(history),
        epochs_trained=sum(ev.epochs for _, ev in history),
        log=log,
        pool_sizes=pool_sizes,
        all_degenerate=all_degenerate,
    )
