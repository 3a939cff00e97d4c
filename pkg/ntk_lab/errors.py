class NtkLabError(Exception):
    """Base class for every error raised by ntk_lab."""


class ContractError(NtkLabError, ValueError):
    pass


class ConfigurationError(NtkLabError):
    pass


class ConvergenceError(NtkLabError):
    pass


class DegenerateError(NtkLabError, ArithmeticError):
    pass


class NumericError(NtkLabError, ArithmeticError):
    def __init__(self, message: str, layer_index: int | None = None):
        super().__init__(message)
        self.layer_index = layer_index


class TrainingDiverged(NumericError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"Training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class SpaceSizeError(ContractError):
    pass


class MutationError(ConfigurationError):
    pass


class BenchmarkParseError(ContractError):
    def __init__(self, path: str, line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: corrupt benchmark record ({reason})")
        self.path = path
        self.line_number = line_number


class MissingSnapshotError(ContractError):
    def __init__(self, key: str, epoch: int):
        super().__init__(
            f"No cached value for {key}. Rebuild the benchmark with epoch {epoch} "
            f"added to snapshot_epochs, or pass --recompute."
        )
        self.key = key
        self.epoch = epoch
