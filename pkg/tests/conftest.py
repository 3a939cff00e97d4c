import numpy as np
import pytest

from ntk_lab.cli import RunConfig
from ntk_lab.harness import build_oracle_benchmark
from ntk_lab.space import SpaceConfig, enumerate_space, format_encoding

# Small enough to train a whole space in a couple of seconds.
TINY = dict(nodes=2, ops=3, per_class=20, epochs=2, snapshot_epochs=[0, 1, 2], probe_size=12)


@pytest.fixture
def tiny_config() -> RunConfig:
    return RunConfig(**TINY)


@pytest.fixture
def tiny_study(tiny_config):
    return tiny_config.study()


@pytest.fixture(scope="session")
def toy_benchmark(tmp_path_factory):
    """The trained 27-architecture benchmark for a dataset seed, built once per session."""
    built = {}

    def build(seed: int):
        if seed not in built:
            study = RunConfig(seed=seed, snapshot_epochs=[0, 3, 5], modes=["eval"]).study()
            path = tmp_path_factory.mktemp("toy") / "bench.txt"
            built[seed] = study, build_oracle_benchmark(study, str(path))
        return built[seed]

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _bisect(p, lo: float, hi: float, iterations: int = 200) -> float:
    f_lo = p(lo)
    for _ in range(iterations):
        mid = (lo + hi) / 2.0
        f_mid = p(mid)
        if (f_mid <= 0.0) == (f_lo <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def char_poly_roots_3x3(a: np.ndarray) -> np.ndarray:
    """
    Eigenvalues of a symmetric 3x3 matrix with distinct eigenvalues, found by
    bisection on det(lambda I - A). The two critical points of the cubic
    separate its three real roots.
    """
    trace = np.trace(a)
    minors = (
        a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        + a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
        + a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    )
    det = np.linalg.det(a)

    def p(lam):
        return lam**3 - trace * lam**2 + minors * lam - det

    disc = np.sqrt(max(4 * trace**2 - 12 * minors, 0.0))
    m1 = (2 * trace - disc) / 6.0
    m2 = (2 * trace + disc) / 6.0
    bound = np.sqrt(np.sum(a * a)) + 1.0
    return np.array([_bisect(p, -bound, m1), _bisect(p, m1, m2), _bisect(p, m2, bound)])


@pytest.fixture
def char_poly_roots():
    return char_poly_roots_3x3


def additive_table(space: SpaceConfig, best) -> dict[str, float]:
    """
    Synthetic accuracies where every edge contributes independently and
    ``best`` is the unique optimum. Values are distinct and inside [0, 1] as
    long as every code of ``best`` is 0 or ops - 1.
    """
    table = {}
    weights = [space.ops ** (space.edge_count - 1 - e) for e in range(space.edge_count)]
    top = sum(w * (space.ops - 1) for w in weights)
    for enc in enumerate_space(space):
        closeness = sum(w * (space.ops - 1 - abs(code - b)) for w, code, b in zip(weights, enc, best))
        table[format_encoding(enc)] = closeness / (top + 1)
    return table


@pytest.fixture
def additive_accuracies():
    return additive_table


@pytest.fixture
def make_records():
    def make(accuracies: dict[str, float], metrics=None):
        return [
            {
                "arch": arch,
                "seed": i,
                "epoch_accs": [acc],
                "final_test_acc": acc,
                "params": 10,
                "metrics": dict(metrics or {}),
                "degenerate": [],
            }
            for i, (arch, acc) in enumerate(accuracies.items())
        ]

    return make
