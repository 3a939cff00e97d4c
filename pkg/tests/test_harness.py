from dataclasses import replace
from itertools import combinations

import numpy as np
import pytest

import ntk_lab.harness.benchmark as benchmark_module
from ntk_lab.cli import RunConfig
from ntk_lab.errors import BenchmarkParseError, ContractError, DegenerateError, MissingSnapshotError
from ntk_lab.harness import (
    TOTAL_DECILE,
    accuracy_groups,
    build_oracle_benchmark,
    cached_metric,
    decile_analysis,
    decile_bins,
    fill_missing_metrics,
    final_accuracy,
    kendall_tau,
    kernel_evolution,
    load_benchmark,
    metric_key,
    metric_trajectories,
    rank_correlation_report,
    save_benchmark,
)
from ntk_lab.linalg import INIT_SCHEMES
from ntk_lab.metrics import METRIC_IDS
from ntk_lab.space import SpaceConfig, parse_encoding

DATASET_SEEDS = range(5)


def pair_counting_tau(xs, ys) -> float:
    s = tied_free_x = tied_free_y = 0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            sx = np.sign(xs[i] - xs[j])
            sy = np.sign(ys[i] - ys[j])
            s += sx * sy
            tied_free_x += sx != 0
            tied_free_y += sy != 0
    return s / np.sqrt(tied_free_x * tied_free_y)


def test_kendall_tau_examples():
    assert kendall_tau([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert kendall_tau([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(4 / 6)
    n = 40
    assert kendall_tau(range(n), range(n)) == pytest.approx(1.0)
    assert kendall_tau(range(n), range(n, 0, -1)) == pytest.approx(-1.0)


def test_kendall_tau_matches_pair_counting(rng):
    for trial in range(1000):
        n = int(rng.integers(2, 30))
        if trial % 2:
            xs, ys = rng.integers(0, 4, n), rng.integers(0, 4, n)
        else:
            xs, ys = rng.normal(size=n), rng.normal(size=n)
        if np.all(xs == xs[0]) or np.all(ys == ys[0]):
            continue
        assert kendall_tau(xs, ys) == pytest.approx(pair_counting_tau(xs, ys), abs=1e-12)


def test_kendall_tau_properties(rng):
    xs, ys = rng.normal(size=25), rng.normal(size=25)
    assert kendall_tau(xs, ys) == pytest.approx(kendall_tau(ys, xs), abs=1e-12)
    assert kendall_tau(xs, ys) == pytest.approx(kendall_tau(np.exp(xs), ys ** 3), abs=1e-12)


def test_kendall_tau_errors():
    with pytest.raises(DegenerateError):
        kendall_tau([1, 1, 1], [1, 2, 3])
    with pytest.raises(ContractError):
        kendall_tau([1, 2], [1, 2, 3])
    with pytest.raises(ContractError):
        kendall_tau([1], [1])


def test_oracle_benchmark_on_tiny_space(tiny_study, tmp_path):
    path = str(tmp_path / "bench.txt")
    records = build_oracle_benchmark(tiny_study, path)
    assert [r["arch"] for r in records] == ["0", "1", "2"]
    assert load_benchmark(path, tiny_study.space) == records
    for record in records:
        assert len(record["epoch_accs"]) == 2
        assert record["final_test_acc"] == record["epoch_accs"][-1]
        assert len(record["metrics"]) == len(METRIC_IDS) * 3 * 2
    # zero features force one constant prediction over a balanced test split
    assert records[0]["final_test_acc"] == pytest.approx(1 / 3)
    key = metric_key("lga", 0, "eval", tiny_study.probe_hash)
    assert key in records[0]["degenerate"]


def test_oracle_benchmark_resumes_and_is_idempotent(tiny_study, tmp_path, monkeypatch):
    path = tmp_path / "bench.txt"
    build_oracle_benchmark(tiny_study, str(path))
    complete = path.read_bytes()

    path.write_bytes(complete.splitlines(keepends=True)[0])
    build_oracle_benchmark(tiny_study, str(path))
    assert path.read_bytes() == complete

    def no_training(*args):
        raise AssertionError("nothing should be retrained")

    monkeypatch.setattr(benchmark_module, "evaluate_architecture", no_training)
    assert len(build_oracle_benchmark(tiny_study, str(path))) == 3
    assert path.read_bytes() == complete


def test_oracle_benchmark_is_byte_identical(tiny_study, tmp_path):
    serial, parallel = tmp_path / "serial.txt", tmp_path / "parallel.txt"
    build_oracle_benchmark(tiny_study, str(serial), jobs=1)
    build_oracle_benchmark(tiny_study, str(parallel), jobs=3)
    assert serial.read_bytes() == parallel.read_bytes()


def test_benchmark_parse_error_names_the_line(tmp_path, make_records):
    path = str(tmp_path / "bench.txt")
    save_benchmark(path, make_records({"0": 0.5}))
    with open(path, "a") as file:
        file.write('{"arch": "1", "seed": 1\n')
    with pytest.raises(BenchmarkParseError) as err:
        load_benchmark(path)
    assert err.value.line_number == 2

    save_benchmark(path, make_records({"0": 1.5}))
    with pytest.raises(BenchmarkParseError):
        load_benchmark(path)
    save_benchmark(path, make_records({"0|9": 0.5}))
    with pytest.raises(BenchmarkParseError):
        load_benchmark(path, SpaceConfig(nodes=2, ops=3))


def test_rank_correlation_self_ranking(make_records):
    records = make_records({"0|0|0": 0.2, "0|0|1": 0.9, "1|0|0": 0.5, "2|2|2": 0.7})
    rows = rank_correlation_report(records, ["acc"], [1, 3], ["eval"], "abc", lookup=final_accuracy)
    assert [row["tau"] for row in rows] == pytest.approx([1.0, 1.0])
    assert rows[0]["samples"] == 4

    negated = lambda record, *_: -record["final_test_acc"]
    rows = rank_correlation_report(records, ["neg"], [0], ["eval", "train"], "abc", lookup=negated)
    assert [row["tau"] for row in rows] == pytest.approx([-1.0, -1.0])
    assert [row["mode"] for row in rows] == ["eval", "train"]

    flat = rank_correlation_report(records, ["flat"], [0], ["eval"], "abc", lookup=lambda *_: 1.0)
    assert np.isnan(flat[0]["tau"])


def test_missing_snapshot_is_reported(make_records):
    records = make_records({"0": 0.1, "1": 0.2}, metrics={"lga@1@eval@abc": 0.3})
    assert cached_metric(records[0], "lga", 1, "eval", "abc") == 0.3
    with pytest.raises(MissingSnapshotError) as err:
        rank_correlation_report(records, ["lga"], [5], ["eval"], "abc")
    assert err.value.epoch == 5
    assert "snapshot_epochs" in str(err.value)


def test_fill_missing_metrics_reproduces_cached_values(tiny_study, tmp_path):
    path = str(tmp_path / "bench.txt")
    records = build_oracle_benchmark(tiny_study, path)
    key = metric_key("lga", 1, "eval", tiny_study.probe_hash)
    cached = records[2]["metrics"].pop(key)

    assert fill_missing_metrics(tiny_study, records, [1]) == 1
    assert records[2]["metrics"][key] == cached

    assert fill_missing_metrics(tiny_study, records, [3]) == 3
    assert metric_key("ncn", 3, "train", tiny_study.probe_hash) in records[1]["metrics"]


def test_decile_analysis_on_exact_ranking(additive_accuracies, make_records):
    space = SpaceConfig(nodes=3, ops=3)
    records = make_records(additive_accuracies(space, (2, 0, 2)))
    bins = decile_bins(records)
    assert [b.size for b in bins] == [3] * 7 + [2] * 3
    assert sorted(np.concatenate(bins).tolist()) == list(range(27))
    assert records[bins[0][0]]["arch"] == "2|0|2"

    rows = decile_analysis(records, "acc", 0, "eval", "abc", seeds=5, lookup=final_accuracy)
    assert [row["decile"] for row in rows] == [*range(1, 11), TOTAL_DECILE]
    assert (rows[-1]["size"], rows[-1]["sampled"]) == (27, 27)
    assert all(row["clamped"] and not row["skipped"] for row in rows)
    assert all(row["min"] == pytest.approx(1.0) and row["taus"] == 5 for row in rows)
    again = decile_analysis(records, "acc", 0, "eval", "abc", seeds=5, lookup=final_accuracy)
    assert rows == again


def test_decile_analysis_skips_tiny_bins(make_records):
    records = make_records({f"{i}|0": i / 20 for i in range(5)} | {f"0|{i}": 0.5 + i / 20 for i in range(1, 5)})
    rows = decile_analysis(records, "acc", 0, "eval", "abc", seeds=3, per_decile=2, lookup=final_accuracy)
    assert [row["size"] for row in rows] == [1] * 9 + [0, 9]
    assert all(row["skipped"] and np.isnan(row["mean"]) for row in rows[:10])

    total = rows[-1]
    assert total["decile"] == TOTAL_DECILE
    assert not total["skipped"] and not total["clamped"]
    assert (total["sampled"], total["taus"]) == (2, 3)
    assert total["min"] == pytest.approx(1.0)


def test_kernel_evolution(tiny_study):
    rows = kernel_evolution(tiny_study, parse_encoding("2"), epochs=2)
    assert [row["epoch"] for row in rows] == [1, 2]
    for row in rows:
        assert -1.0 <= row["kernel_correlation"] <= 1.0 + 1e-12
        assert row["relative_kernel_difference"] >= 0.0


def test_kernel_evolution_with_single_sample_probe(tiny_config):
    study = replace(tiny_config, probe_size=1).study()
    rows = kernel_evolution(study, parse_encoding("2"), epochs=1)
    assert np.isnan(rows[0]["kernel_correlation"])
    assert rows[0]["relative_kernel_difference"] >= 0.0


def test_accuracy_groups(additive_accuracies, make_records):
    records = make_records(additive_accuracies(SpaceConfig(nodes=3, ops=3), (0, 0, 0)))
    groups = accuracy_groups(records, 5)
    assert [len(members) for members in groups.values()] == [5, 5, 5]
    assert groups["high"][0]["arch"] == "0|0|0"
    assert groups["low"][-1]["arch"] == "2|2|2"
    archs = [r["arch"] for members in groups.values() for r in members]
    assert len(set(archs)) == 15


def test_metric_trajectories(tiny_study, tmp_path):
    records = build_oracle_benchmark(tiny_study, str(tmp_path / "bench.txt"))
    rows = metric_trajectories(tiny_study, records, [0, 2, 3], group_size=5)
    assert len(rows) == 3 * len(METRIC_IDS) * 2 * 3
    assert {row["architectures"] for row in rows} == {1}
    high = [r for r in rows if r["group"] == "high" and r["metric"] == "fnorm" and r["mode"] == "eval"]
    assert [r["epoch"] for r in high] == [0, 2, 3]


def test_init_schemes_change_the_metrics(tmp_path):
    values = {}
    for scheme in ("xavier", "kaiming", "gaussian"):
        study = RunConfig(nodes=2, ops=3, per_class=20, epochs=1, snapshot_epochs=[0], init=scheme).study()
        records = build_oracle_benchmark(study, str(tmp_path / f"{scheme}.txt"))
        values[scheme] = [r["metrics"][metric_key("fnorm", 0, "eval", study.probe_hash)] for r in records]
    for first, second in combinations(INIT_SCHEMES, 2):
        assert values[first] != values[second]


@pytest.mark.slow
def test_init_schemes_change_the_report(tmp_path):
    taus = {}
    for scheme in INIT_SCHEMES:
        study = RunConfig(init=scheme, snapshot_epochs=[0, 3], modes=["eval"]).study()
        records = build_oracle_benchmark(study, str(tmp_path / f"{scheme}.txt"))
        rows = rank_correlation_report(records, METRIC_IDS, [0, 3], ["eval"], study.probe_hash)
        taus[scheme] = np.array([row["tau"] for row in rows])
    for first, second in combinations(INIT_SCHEMES, 2):
        assert not np.array_equal(taus[first], taus[second], equal_nan=True)


@pytest.mark.slow
def test_lga_after_training_outranks_initial_metrics(toy_benchmark):
    wins = 0
    for seed in DATASET_SEEDS:
        study, records = toy_benchmark(seed)
        rows = rank_correlation_report(records, METRIC_IDS, [0, 3], ["eval"], study.probe_hash)
        tau = {(row["metric"], row["epoch"]): row["tau"] for row in rows}
        best_initial = max(tau[(metric_id, 0)] for metric_id in ("fnorm", "mean", "ncn"))
        wins += tau[("lga", 3)] >= best_initial - 1e-12
    assert wins >= 4


@pytest.mark.slow
def test_lga_moves_only_for_good_architectures(toy_benchmark):
    for seed in DATASET_SEEDS:
        study, records = toy_benchmark(seed)
        groups = accuracy_groups(records, 5)

        def lga_change(record):
            before = cached_metric(record, "lga", 0, "eval", study.probe_hash)
            return cached_metric(record, "lga", 5, "eval", study.probe_hash) - before

        assert np.mean([lga_change(r) for r in groups["high"]]) > 0.0
        assert all(abs(lga_change(r)) < 0.05 for r in groups["low"])


@pytest.mark.slow
def test_full_benchmark_is_byte_identical(tmp_path):
    study = RunConfig(seed=3).study()
    first, second = tmp_path / "a.txt", tmp_path / "b.txt"
    build_oracle_benchmark(study, str(first))
    build_oracle_benchmark(study, str(second), jobs=2)
    assert first.read_bytes() == second.read_bytes()
    assert len(load_benchmark(str(first))) == 27
    # a rerun of the whole report is a pure function of the file
    records = load_benchmark(str(first))
    report = rank_correlation_report(records, METRIC_IDS, [0, 1, 3], ["eval"], study.probe_hash)
    assert report == rank_correlation_report(records, METRIC_IDS, [0, 1, 3], ["eval"], study.probe_hash)


@pytest.mark.slow
def test_kernels_drift_during_training():
    study = RunConfig(seed=0).study()
    for enc in [(2, 2, 2), (1, 2, 2), (2, 1, 2), (2, 2, 1), (2, 0, 2)]:
        rows = kernel_evolution(study, enc, epochs=5)
        assert rows[-1]["kernel_correlation"] <= 0.999
        assert rows[-1]["relative_kernel_difference"] >= 0.01
