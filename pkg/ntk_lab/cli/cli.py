import argparse
import logging
import sys

from ntk_lab.errors import ConfigurationError, NtkLabError
from ntk_lab.harness import (
    build_oracle_benchmark,
    decile_analysis,
    fill_missing_metrics,
    kernel_evolution,
    load_benchmark,
    metric_trajectories,
    rank_correlation_report,
    save_benchmark,
)
from ntk_lab.kernel import compute_ntk, write_kernel
from ntk_lab.metrics import get_metric, label_alignment, parse_metric_ids
from ntk_lab.search import LgaScorer, SearchConfig, random_search, regularized_evolution
from ntk_lab.space import parse_encoding
from ntk_lab.training import save_dataset
from .config import RunConfig, load_run_config
from .reporting import ReportWriter

logger = logging.getLogger(__name__)

# flag name -> RunConfig key
CONFIG_FLAGS = {
    "seed": "seed",
    "jobs": "jobs",
    "init": "init",
    "mode": "mode",
    "readout": "readout",
    "out_dir": "out_dir",
    "nodes": "nodes",
    "ops": "ops",
    "feature_dim": "feature_dim",
    "classes": "classes",
    "input_dim": "input_dim",
    "per_class": "per_class",
    "spread": "spread",
    "train_epochs": "epochs",
    "probe_size": "probe_size",
    "gaussian_std": "gaussian_std",
    "modes": "modes",
    "snapshot_epochs": "snapshot_epochs",
}


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def resolve_config(args) -> RunConfig:
    overrides = {key: getattr(args, flag, None) for flag, key in CONFIG_FLAGS.items()}
    return load_run_config(args.config, overrides)


def writer_for(cfg: RunConfig) -> ReportWriter:
    return ReportWriter(cfg.out_dir, cfg.to_json())


# ------------------------------------------------#


def gen_data(args, cfg: RunConfig) -> None:
    ds = cfg.dataset()
    save_dataset(args.out, ds)
    logger.info(f"{args.out} generated ({ds.train_x.shape[0]} train / {ds.test_x.shape[0]} test).")


def oracle(args, cfg: RunConfig) -> None:
    study = cfg.study()
    records = build_oracle_benchmark(study, args.bench, jobs=cfg.jobs)
    print(f"{args.bench}: {len(records)} architectures")


def score(args, cfg: RunConfig) -> None:
    study = cfg.study()
    enc = parse_encoding(args.arch, study.space)
    net, history = study.train_arch(enc, epochs=args.t)
    kernel = compute_ntk(net, study.probe, cfg.mode)
    mv = get_metric(args.metric)(kernel, study.probe.labels).at_epoch(args.t)
    if args.kernel_out:
        write_kernel(args.kernel_out, kernel)
    row = {
        "arch": args.arch,
        "metric": mv.metric,
        "epoch": mv.epoch,
        "mode": cfg.mode,
        "value": mv.value,
        "degenerate": mv.degenerate,
        "alignment": label_alignment(kernel, study.probe.labels, cfg.classes),
    }
    print(writer_for(cfg).table([row]), end="")


def rankcorr(args, cfg: RunConfig) -> None:
    study = cfg.study()
    metric_ids = parse_metric_ids(args.metrics)
    records = load_benchmark(args.bench, study.space)
    if args.recompute and fill_missing_metrics(study, records, args.t):
        save_benchmark(args.bench, records)
    rows = rank_correlation_report(records, metric_ids, args.t, cfg.modes, study.probe_hash, seed=cfg.seed)
    writer = writer_for(cfg)
    writer.write_csv(args.out, rows)
    print(writer.table(rows, title="Kendall tau vs final test accuracy"), end="")


def decile(args, cfg: RunConfig) -> None:
    study = cfg.study()
    get_metric(args.metric)
    records = load_benchmark(args.bench, study.space)
    rows = decile_analysis(
        records,
        args.metric,
        args.t,
        cfg.mode,
        study.probe_hash,
        seeds=args.seeds,
        per_decile=args.per_decile,
        base_seed=cfg.seed,
    )
    writer = writer_for(cfg)
    writer.write_csv(args.out, rows)
    print(writer.table(rows, title=f"Decile taus for {args.metric} at t={args.t}"), end="")


def ntk_evolution(args, cfg: RunConfig) -> None:
    study = cfg.study()
    enc = parse_encoding(args.arch, study.space)
    rows = kernel_evolution(study, enc, args.epochs, mode=cfg.mode)
    writer = writer_for(cfg)
    writer.write_csv(args.out, rows)
    print(writer.table(rows, title=f"Kernel evolution of {args.arch}"), end="")


def trajectory(args, cfg: RunConfig) -> None:
    study = cfg.study()
    records = load_benchmark(args.bench, study.space)
    rows = metric_trajectories(study, records, args.t, group_size=args.group_size)
    writer = writer_for(cfg)
    writer.write_csv(args.out, rows)
    print(writer.table(rows, title="Metric trajectories by accuracy group"), end="")


def search(args, cfg: RunConfig) -> None:
    study = cfg.study()
    search_cfg = SearchConfig(
        algorithm=args.algorithm,
        population=args.n,
        epochs=args.t,
        budget=getattr(args, "budget", None),
        seed=cfg.seed,
        jobs=cfg.jobs,
    )
    scorer = LgaScorer(study, epochs=args.t, mode=cfg.mode)
    run = random_search if args.algorithm == "random" else regularized_evolution
    result = run(search_cfg, study.space, scorer)
    writer = writer_for(cfg)
    path = writer.search_report(args.out, result, exhaustive_epochs=study.space.size * cfg.epochs)
    print(f"chosen {result.chosen_arch} (LGA_{args.t} = {result.score:.6f}); report in {path}")


# ------------------------------------------------#


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run configuration (flags override the config file)")
    group.add_argument("--config", "-c", default=None, help="JSON config file (default: .ntklab_config if present)")
    group.add_argument("--seed", type=int, default=None, help="Base seed for every random stream (default 0)")
    group.add_argument("--jobs", "-j", type=int, default=None, help="Worker processes (default 1)")
    group.add_argument("--init", choices=["xavier", "kaiming", "gaussian"], default=None, help="Weight init scheme (default kaiming)")
    group.add_argument("--gaussian-std", type=float, default=None, help="Std of the gaussian init scheme (default 0.05)")
    group.add_argument("--mode", choices=["eval", "train"], default=None, help="Normalization mode for NTK computation (default eval)")
    group.add_argument("--modes", default=None, help="Comma-separated modes reported side by side (default eval,train)")
    group.add_argument("--readout", choices=["mean", "first"], default=None, help="Scalar readout of the logits (default mean)")
    group.add_argument("--nodes", type=int, default=None, help="Cell nodes V (default 3)")
    group.add_argument("--ops", type=int, default=None, help="Op set size K (default 3)")
    group.add_argument("--feature-dim", type=int, default=None, help="Hidden width (default 16)")
    group.add_argument("--classes", type=int, default=None, help="Class count C (default 3)")
    group.add_argument("--input-dim", type=int, default=None, help="Input dimension d (default 16)")
    group.add_argument("--per-class", type=int, default=None, help="Samples per class (default 60)")
    group.add_argument("--spread", type=float, default=None, help="Cluster standard deviation (default 0.3)")
    group.add_argument("--train-epochs", type=int, default=None, help="Full training epochs (default 30)")
    group.add_argument("--probe-size", type=int, default=None, help="Probe batch size (default 32)")
    group.add_argument("--snapshot-epochs", default=None, help="Comma-separated cached epochs (default 0,1,3,5,10)")
    group.add_argument("--out-dir", default=None, help="Directory for reports (default .)")
    group.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    group.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")

    parser = argparse.ArgumentParser(
        prog="ntk-lab",
        description="NTK-based architecture scoring on a miniature cell search space",
        usage="%(prog)s [command] [options]",
    )
    subparsers = parser.add_subparsers(title="Commands", dest="command")
    subparsers.required = True

    p = subparsers.add_parser("gen-data", parents=[common], help="Write the synthetic dataset as text.")
    p.add_argument("--out", default="dataset.txt", help="Output file (default dataset.txt)")
    p.set_defaults(func=gen_data)

    p = subparsers.add_parser("oracle", parents=[common], help="Train every architecture into a benchmark file.")
    p.add_argument("--bench", default="bench.txt", help="Benchmark file, resumed if present (default bench.txt)")
    p.set_defaults(func=oracle)

    p = subparsers.add_parser("score", parents=[common], help="Score one architecture after t epochs.")
    p.add_argument("--arch", required=True, help='Encoding such as "1|2|0"')
    p.add_argument("--metric", default="lga", help="fnorm, mean, ncn or lga (default lga)")
    p.add_argument("--t", type=int, default=0, help="Epochs trained before scoring (default 0)")
    p.add_argument("--kernel-out", default=None, help="Also write the kernel as text")
    p.set_defaults(func=score)

    p = subparsers.add_parser("rankcorr", parents=[common], help="Kendall tau of each metric vs final accuracy.")
    p.add_argument("--bench", default="bench.txt", help="Benchmark file (default bench.txt)")
    p.add_argument("--metrics", default="fnorm,mean,ncn,lga", help="Comma-separated metric ids (default all)")
    p.add_argument("--t", type=parse_int_list, default=[0, 1, 3, 5, 10], help="Comma-separated epochs (default 0,1,3,5,10)")
    p.add_argument("--recompute", action="store_true", help="Retrain to fill uncached epochs and save them")
    p.add_argument("--out", default="rankcorr.csv", help="CSV report (default rankcorr.csv)")
    p.set_defaults(func=rankcorr)

    p = subparsers.add_parser("decile", parents=[common], help="Kendall tau inside accuracy deciles.")
    p.add_argument("--bench", default="bench.txt", help="Benchmark file (default bench.txt)")
    p.add_argument("--metric", default="lga", help="Metric id (default lga)")
    p.add_argument("--t", type=int, default=0, help="Snapshot epoch (default 0)")
    p.add_argument("--seeds", type=int, default=20, help="Sampling seeds per decile (default 20)")
    p.add_argument("--per-decile", type=int, default=100, help="Architectures sampled per decile (default 100)")
    p.add_argument("--out", default="decile.csv", help="CSV report (default decile.csv)")
    p.set_defaults(func=decile)

    p = subparsers.add_parser("ntk-evolution", parents=[common], help="Kernel drift from initialization per epoch.")
    p.add_argument("--arch", required=True, help='Encoding such as "1|2|0"')
    p.add_argument("--epochs", type=int, default=30, help="Epochs to follow (default 30)")
    p.add_argument("--out", default="ntk_evolution.csv", help="CSV report (default ntk_evolution.csv)")
    p.set_defaults(func=ntk_evolution)

    p = subparsers.add_parser("trajectory", parents=[common], help="Metric means for high/mid/low accuracy groups.")
    p.add_argument("--bench", default="bench.txt", help="Benchmark file (default bench.txt)")
    p.add_argument("--t", type=parse_int_list, default=[0, 1, 3, 5, 10], help="Comma-separated epochs (default 0,1,3,5,10)")
    p.add_argument("--group-size", type=int, default=5, help="Architectures per group (default 5)")
    p.add_argument("--out", default="trajectory.csv", help="CSV report (default trajectory.csv)")
    p.set_defaults(func=trajectory)

    p = subparsers.add_parser("randsearch", parents=[common], help="Random search guided by LGA_t.")
    p.add_argument("--n", type=int, default=100, help="Candidates sampled (default 100)")
    p.add_argument("--t", type=int, default=3, help="Epochs trained per candidate (default 3)")
    p.add_argument("--out", default="randsearch.txt", help="Search report (default randsearch.txt)")
    p.set_defaults(func=search, algorithm="random")

    p = subparsers.add_parser("evolve", parents=[common], help="Regularized evolution guided by LGA_t.")
    p.add_argument("--n", type=int, default=10, help="Parent pool size (default 10)")
    p.add_argument("--t", type=int, default=3, help="Epochs trained per candidate (default 3)")
    p.add_argument("--budget", type=int, default=100, help="Total candidate evaluations (default 100)")
    p.add_argument("--out", default="evolve.txt", help="Search report (default evolve.txt)")
    p.set_defaults(func=search, algorithm="evolution")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except ConfigurationError as err:
        logger.error(f"Configuration error: {err}")
        return 2
    except NtkLabError as err:
        logger.error(f"{err.__class__.__name__}: {err}")
        return 1
    except OSError as err:
        logger.error(f"I/O error: {err}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
