from .errors import (
    BenchmarkParseError,
    ConfigurationError,
    ContractError,
    ConvergenceError,
    DegenerateError,
    MissingSnapshotError,
    NtkLabError,
    NumericError,
    TrainingDiverged,
)

__version__ = "0.1.0"
