"""Command line interface: simulate, dataset, train, eval, bench, grid.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import dataset as ds
from .baselines import GaussianNB, LogisticRegression, make_fallback
from .errors import ConfigError, DomainError, JamsenseError, ParseError
from .harness import ExperimentGrid, bench_latency, confusion, evaluate, run_grid
from .nn.checkpoint import load_model, save_model
from .nn.model import ArchConfig, build_mhdnn
from .nn.train import TrainConfig, train
from .scenario import ScenarioConfig, run_simulation


def _cmd_simulate(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    n_runs = int(spec.pop("n_runs", 1))
    base_seed = int(spec.pop("seed", args.seed))
    os.makedirs(args.out, exist_ok=True)
    for i in range(n_runs):
        cfg = ScenarioConfig.from_dict({**_config_defaults(), **spec, "seed": base_seed + i})
        run = run_simulation(cfg)
        ds.save_run(run, os.path.join(args.out, f"run_{base_seed + i:06d}.csv"))
    print(f"wrote {n_runs} run(s) to {args.out}")
    return 0


def _config_defaults():
    return ScenarioConfig().to_dict()


def _cmd_dataset(args):
    names = sorted(f for f in os.listdir(args.runs) if f.endswith(".csv"))
    if not names:
        raise ConfigError(f"no run files in {args.runs}")
    runs = [(os.path.splitext(n)[0], ds.load_run(os.path.join(args.runs, n))) for n in names]
    stride = args.stride if args.stride else max(1, args.w // 2)
    manifest = ds.build_dataset(
        runs, args.out, args.w, stride, args.seed, test_fraction=args.test_fraction
    )
    n_train = sum(1 for s in manifest.splits.values() if s == "train")
    print(f"dataset at {args.out}: {n_train} train / {len(runs) - n_train} test runs, w={args.w}")
    return 0


def _load_train_windows(ds_dir, use_tsa, seed):
    from .augment import augment_training_set

    manifest = ds.load_manifest(os.path.join(ds_dir, "manifest.json"))
    windows = ds.load_split_windows(ds_dir, "train", manifest=manifest)
    windows = ds.balance(windows, np.random.default_rng(seed + 1))
    if use_tsa:
        windows = augment_training_set(windows, np.random.default_rng(seed + 2))
    return manifest, windows


def _cmd_train(args):
    manifest, windows = _load_train_windows(args.dataset, args.tsa, args.seed)
    model = build_mhdnn(ArchConfig(variant=args.variant, w=manifest.w), seed=args.seed)
    losses = train(
        model, windows, TrainConfig(epochs=args.epochs, seed=args.seed, learning_rate=args.lr)
    )
    save_model(args.out, model, norm_stats=manifest.norm_stats)
    print(
        f"trained {args.variant} ({model.param_count()} parameters), "
        f"final loss {losses[-1]:.4f}, checkpoint at {args.out}"
    )
    return 0


def _cmd_eval(args):
    model, _ = load_model(args.model)
    test = ds.load_split_windows(args.dataset, "test")
    method = None if args.method == "none" else int(args.method)
    fallback = None
    if method is not None:
        manifest, train_windows = _load_train_windows(args.dataset, False, args.seed)
        fallback = make_fallback(args.fallback, train_windows)
    preds, fb_rate = evaluate(model, test, method=method, fallback=fallback)
    counts = confusion(preds, [s.label for s in test])
    report = {
        "accuracy": counts.accuracy,
        "true_pos": counts.true_pos,
        "true_neg": counts.true_neg,
        "false_pos": counts.false_pos,
        "false_neg": counts.false_neg,
        "fallback_rate": fb_rate,
        "method": args.method,
    }
    print(json.dumps(report, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_bench(args):
    from .nn.model import forward_windows

    model, _ = load_model(args.model)
    windows = ds.load_split_windows(args.dataset, "test")
    if len(windows) < 100:
        windows = (windows * (100 // max(len(windows), 1) + 1))[:100]
    report = bench_latency(lambda s: forward_windows(model, [s]), windows)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def _cmd_grid(args):
    with open(args.grid, "r", encoding="utf-8") as fh:
        grid = ExperimentGrid.from_json(fh.read())
    rows = run_grid(grid, args.out, cache_dir=args.cache)
    failures = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} row(s) -> {args.out} ({failures} failure(s))")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="jamsense")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate RSSI/SINR runs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("dataset", help="window, split and normalize runs")
    p.add_argument("--runs", required=True)
    p.add_argument("--w", type=int, default=300)
    p.add_argument("--stride", type=int, default=0)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("train", help="train the detection network")
    p.add_argument("--dataset", required=True)
    p.add_argument("--variant", choices=("attention", "lstm"), default="attention")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=2.5e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tsa", action="store_true", help="expand train set with flip quads")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=("1", "2", "none"), default="none")
    p.add_argument("--fallback", choices=("lr", "gnb"), default="lr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="single-sample prediction latency")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("grid", help="run an experiment grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cache", default="")
    p.set_defaults(func=_cmd_grid)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (JamsenseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
