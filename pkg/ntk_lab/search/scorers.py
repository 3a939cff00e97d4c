from abc import ABC, abstractmethod
import logging
from typing import List, NamedTuple

from ntk_lab.errors import ContractError
from ntk_lab.harness import BenchmarkRecord, Study
from ntk_lab.kernel import compute_ntk
from ntk_lab.metrics import lga_metric
from ntk_lab.space import CellEncoding, format_encoding

logger = logging.getLogger(__name__)


class Evaluation(NamedTuple):
    value: float
    degenerate: bool
    epochs: int


class BaseScorer(ABC):
    """How a search judges a candidate; higher is better."""

    @abstractmethod
    def score(self, enc: CellEncoding) -> Evaluation:
        pass


class LgaScorer(BaseScorer):
    """Trains the candidate for ``epochs`` epochs, then scores LGA on the study's probe."""

    def __init__(self, study: Study, epochs: int = 3, mode: str = "eval"):
        if epochs < 0:
            raise ContractError(f"epochs must be >= 0, got {epochs}")
        self.study = study
        self.epochs = epochs
        self.mode = mode

    def score(self, enc: CellEncoding) -> Evaluation:
        net, _ = self.study.train_arch(enc, epochs=self.epochs)
        kernel = compute_ntk(net, self.study.probe, self.mode)
        mv = lga_metric(kernel, self.study.probe.labels)
        logger.debug(f"LGA_{self.epochs}({format_encoding(enc)}) = {mv.value:.4f}")
        return Evaluation(mv.value, mv.degenerate, self.epochs)


class BenchmarkScorer(BaseScorer):
    """Looks candidates up in a finished oracle benchmark (by default their true final accuracy)."""

    def __init__(self, records: List[BenchmarkRecord], field: str = "final_test_acc"):
        self.table = {record["arch"]: record for record in records}
        self.field = field

    def score(self, enc: CellEncoding) -> Evaluation:
        arch = format_encoding(enc)
        try:
            record = self.table[arch]
        except KeyError:
            raise ContractError(f"Architecture {arch} is not in the benchmark")
        if self.field == "final_test_acc":
            return Evaluation(record["final_test_acc"], False, 0)
        return Evaluation(record["metrics"][self.field], self.field in record["degenerate"], 0)
