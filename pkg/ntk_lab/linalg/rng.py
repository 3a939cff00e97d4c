from typing import Literal

import numpy as np

from ntk_lab.errors import ConfigurationError, ContractError

InitScheme = Literal["xavier", "kaiming", "gaussian"]
INIT_SCHEMES = ("xavier", "kaiming", "gaussian")
DEFAULT_GAUSSIAN_STD = 0.05


class Rng:
    """
    A seeded random stream on numpy's counter-based Philox generator.

    Streams are never shared between tasks: every consumer derives its own
    child with ``derive``/``child``, keyed by what it is used for, so results
    do not depend on scheduling order.
    """

    def __init__(self, seed: int, *keys: int | str):
        self.seed = int(seed)
        self.keys = tuple(keys)
        seed = self.seed & 0xFFFFFFFFFFFFFFFF
        # fixed-width words: SeedSequence pads short entropy with zeros
        entropy = [seed & 0xFFFFFFFF, seed >> 32, len(keys)]
        for key in keys:
            entropy.extend(_key_words(key))
        self.generator = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))

    @classmethod
    def derive(cls, seed: int, *keys: int | str) -> "Rng":
        return cls(seed, *keys)

    def child(self, *keys: int | str) -> "Rng":
        return Rng(self.seed, *self.keys, *keys)

    def uniform(self, low: float, high: float, size=None) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def normal(self, scale: float = 1.0, size=None) -> np.ndarray:
        return self.generator.normal(0.0, scale, size)

    def integers(self, high: int, size=None):
        return self.generator.integers(0, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def choice(self, n: int, size: int, replace: bool = True) -> np.ndarray:
        return self.generator.choice(n, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, keys={self.keys})"


_INT_KEY = 0
_STR_KEY = 1


def _key_words(key: int | str) -> list[int]:
    """
    32-bit entropy words for one stream key: a type tag, then the payload.
    Strings carry their byte length and every UTF-8 byte, so no two distinct
    keys (or key tuples) share a word sequence.
    """
    if isinstance(key, str):
        data = key.encode("utf-8")
        padded = data + b"\0" * (-len(data) % 4)
        return [_STR_KEY, len(data), *np.frombuffer(padded, dtype="<u4").tolist()]
    value = int(key) & 0xFFFFFFFFFFFFFFFF
    return [_INT_KEY, value & 0xFFFFFFFF, value >> 32]


def init_weights(
    fan_in: int,
    fan_out: int,
    scheme: InitScheme,
    rng: Rng,
    gaussian_std: float = DEFAULT_GAUSSIAN_STD,
) -> np.ndarray:
    """
    Draws a (fan_out, fan_in) weight matrix.

    xavier: uniform on +-sqrt(6 / (fan_in + fan_out))
    kaiming: normal with std sqrt(2 / fan_in)
    gaussian: normal with std ``gaussian_std``
    """
    if fan_in < 1 or fan_out < 1:
        raise ContractError(f"fan_in and fan_out must be >= 1, got ({fan_in}, {fan_out})")
    shape = (fan_out, fan_in)
    if scheme == "xavier":
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, shape)
    if scheme == "kaiming":
        return rng.normal(np.sqrt(2.0 / fan_in), shape)
    if scheme == "gaussian":
        return rng.normal(gaussian_std, shape)
    raise ConfigurationError(f"Unknown init scheme: {scheme!r} (expected one of {INIT_SCHEMES})")
