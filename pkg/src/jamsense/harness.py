"""Metrics, experiment grid execution, and prediction-latency benchmarks."""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import dataset as ds
from .augment import augment_training_set
from .baselines import make_fallback
from .errors import DomainError
from .nn.checkpoint import load_model, save_model
from .nn.model import ArchConfig, attack_probability, build_mhdnn, forward_windows
from .nn.train import TrainConfig, train
from .scenario import ChannelMode, ScenarioConfig, SpeedProfile, run_simulation
from .vote import datr_classify


@dataclass(frozen=True)
class ConfusionCounts:
    true_pos: int
    true_neg: int
    false_pos: int
    false_neg: int

    @property
    def total(self):
        return self.true_pos + self.true_neg + self.false_pos + self.false_neg

    @property
    def accuracy(self):
        return (self.true_pos + self.true_neg) / self.total


def confusion(preds, labels):
    """Counts with attack as the positive class."""
    if len(preds) != len(labels):
        raise DomainError("preds and labels must have equal length")
    if not preds:
        raise DomainError("confusion requires at least one prediction")
    tp = sum(1 for p, y in zip(preds, labels) if p and y)
    tn = sum(1 for p, y in zip(preds, labels) if not p and not y)
    fp = sum(1 for p, y in zip(preds, labels) if p and not y)
    fn = sum(1 for p, y in zip(preds, labels) if not p and y)
    return ConfusionCounts(tp, tn, fp, fn)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(model, samples, method=None, fallback=None):
    """Predict each window; returns (preds, fallback_rate).

    method None: plain argmax on the network output. method 1/2: the vote
    pipeline with TSA quads and the fallback for undecided windows.
    """
    if method is None:
        probs = attack_probability(forward_windows(model, samples))
        return [bool(p >= 0.5) for p in probs], 0.0
    preds = []
    n_fallback = 0
    for s in samples:
        final, decision = datr_classify(s, model, method, fallback=fallback)
        preds.append(final)
        n_fallback += int(decision.fallback_invoked)
    return preds, n_fallback / len(samples)


# ---------------------------------------------------------------------------
# Latency benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimingReport:
    mean_s: float
    std_s: float
    window_size: int
    sample_count: int

    def to_dict(self):
        return {
            "mean_ms": self.mean_s * 1e3,
            "std_ms": self.std_s * 1e3,
            "w": self.window_size,
            "samples": self.sample_count,
        }


def bench_latency(predict_fn, windows, warmup=10):
    """Single-sample wall-clock prediction stats after warm-up."""
    if len(windows) < 100:
        raise DomainError("bench_latency requires at least 100 windows")
    for s in windows[:warmup]:
        predict_fn(s)
    times = []
    for s in windows:
        t0 = time.perf_counter()
        predict_fn(s)
        times.append(time.perf_counter() - t0)
    times = np.array(times)
    return TimingReport(
        mean_s=float(times.mean()),
        std_s=float(times.std()),
        window_size=windows[0].w,
        sample_count=len(windows),
    )


# ---------------------------------------------------------------------------
# Experiment grid
# ---------------------------------------------------------------------------

AXIS_FIELDS = (
    "n_users",
    "n_attackers",
    "attacker_power_dbm",
    "cell_uav_distance_m",
    "channel_mode",
    "w",
    "variant",
    "method",
)

CSV_COLUMNS = AXIS_FIELDS + (
    "seed",
    "held_out",
    "accuracy",
    "true_pos",
    "true_neg",
    "false_pos",
    "false_neg",
    "fallback_rate",
    "error",
)


@dataclass
class ExperimentGrid:
    axes: dict
    base: dict = field(default_factory=dict)
    runs_per_class: int = 20
    test_fraction: float = 0.2
    epochs: int = 10
    stride: int = 0  # 0 -> w // 2
    seed: int = 0
    use_tsa: bool = False
    fallback: str = "lr"
    held_out_powers: tuple = ()

    def __post_init__(self):
        for key in self.axes:
            if key not in AXIS_FIELDS:
                raise DomainError(f"unknown grid axis {key!r}")
        for key, values in self.axes.items():
            if key == "n_attackers" and 0 in values:
                raise DomainError(
                    "n_attackers axis describes the attack class; 0 is implicit"
                )

    @classmethod
    def from_json(cls, s):
        d = json.loads(s)
        d["held_out_powers"] = tuple(d.get("held_out_powers", ()))
        return cls(**d)

    def cells(self):
        keys = [k for k in AXIS_FIELDS if k in self.axes]
        for combo in itertools.product(*(self.axes[k] for k in keys)):
            yield dict(zip(keys, combo))


def _cell_key(grid: ExperimentGrid, cell, extra=None):
    payload = {
        "cell": cell,
        "base": grid.base,
        "runs_per_class": grid.runs_per_class,
        "test_fraction": grid.test_fraction,
        "epochs": grid.epochs,
        "stride": grid.stride,
        "seed": grid.seed,
        "use_tsa": grid.use_tsa,
        "extra": extra,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:24]


def _scenario_for(grid: ExperimentGrid, cell, n_attackers, power, seed):
    kwargs = dict(grid.base)
    kwargs.update(
        {
            k: v
            for k, v in cell.items()
            if k in ("n_users", "cell_uav_distance_m")
        }
    )
    if "channel_mode" in cell:
        kwargs["channel_mode"] = ChannelMode(cell["channel_mode"])
    if "channel_mode" in kwargs and isinstance(kwargs["channel_mode"], str):
        kwargs["channel_mode"] = ChannelMode(kwargs["channel_mode"])
    if "speed_profile" in kwargs and isinstance(kwargs["speed_profile"], str):
        kwargs["speed_profile"] = SpeedProfile(kwargs["speed_profile"])
    kwargs["n_attackers"] = n_attackers
    kwargs["attacker_power_dbm"] = power
    kwargs["seed"] = seed
    return ScenarioConfig(**kwargs)


def simulate_cell_runs(grid: ExperimentGrid, cell, powers=None):
    """Attack and no-attack runs for one grid cell; returns (run_id, run)."""
    n_attackers = cell.get("n_attackers", 1)
    if powers is None:
        powers = [cell.get("attacker_power_dbm", grid.base.get("attacker_power_dbm", 5.0))]
    runs = []
    base_seed = grid.seed * 1_000_003
    idx = 0
    for power in powers:
        for i in range(grid.runs_per_class):
            cfg = _scenario_for(grid, cell, n_attackers, power, base_seed + idx)
            runs.append((f"attack_p{power}_{i:04d}", run_simulation(cfg)))
            idx += 1
    for i in range(grid.runs_per_class):
        cfg = _scenario_for(
            grid, cell, 0, cell.get("attacker_power_dbm", 0.0) or 0.0, base_seed + idx
        )
        runs.append((f"clean_{i:04d}", run_simulation(cfg)))
        idx += 1
    return runs


def _prepare_windows(grid, cell, runs):
    w = int(cell.get("w", 300))
    stride = grid.stride or max(1, w // 2)
    rng = np.random.default_rng(grid.seed + 1)
    train_runs, test_runs = ds.split_by_run(runs, grid.test_fraction, grid.seed)
    train_windows = []
    for rid, run in train_runs:
        train_windows.extend(ds.windowize(run, w, stride, run_id=rid))
    test_windows = []
    for rid, run in test_runs:
        test_windows.extend(ds.windowize(run, w, stride, run_id=rid))
    train_windows = ds.balance(train_windows, rng)
    stats = ds.fit_normalizer(train_windows)
    train_windows = ds.apply_normalizer(stats, train_windows)
    test_windows = ds.apply_normalizer(stats, test_windows)
    if grid.use_tsa:
        train_windows = augment_training_set(train_windows, np.random.default_rng(grid.seed + 2))
    return train_windows, test_windows, stats


def _train_or_load(grid, cell, train_windows, stats, cache_dir, extra=None):
    w = int(cell.get("w", 300))
    variant = cell.get("variant", "attention")
    arch = ArchConfig(variant=variant, w=w)
    key = _cell_key(grid, cell, extra=extra)
    path = os.path.join(cache_dir, f"{key}.ckpt") if cache_dir else None
    if path and os.path.exists(path):
        model, _ = load_model(path)
        return model
    model = build_mhdnn(arch, seed=grid.seed)
    train(model, train_windows, TrainConfig(epochs=grid.epochs, seed=grid.seed))
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        save_model(path, model, norm_stats=stats)
    return model


def run_cell(grid: ExperimentGrid, cell, cache_dir=None):
    """Execute one grid cell end to end; returns one or two result rows."""
    method = cell.get("method")
    if method in ("none", "None", 0):
        method = None
    rows = []
    if grid.held_out_powers:
        powers = list(grid.axes.get("attacker_power_dbm", [cell.get("attacker_power_dbm", 5.0)]))
        all_runs = simulate_cell_runs(grid, cell, powers=powers)
        held = set(float(p) for p in grid.held_out_powers)

        def power_of(rid):
            return float(rid.split("_p")[1].rsplit("_", 1)[0]) if rid.startswith("attack") else None

        kept_runs = [r for r in all_runs if power_of(r[0]) not in held]
        held_runs = [r for r in all_runs if power_of(r[0]) in held]
        # full-training reference row
        rows.append(_run_rows(grid, cell, all_runs, method, cache_dir, held_out=False))
        # held-out protocol: train without the held powers, test on them
        w = int(cell.get("w", 300))
        stride = grid.stride or max(1, w // 2)
        rng = np.random.default_rng(grid.seed + 1)
        train_windows = []
        for rid, run in kept_runs:
            train_windows.extend(ds.windowize(run, w, stride, run_id=rid))
        train_windows = ds.balance(train_windows, rng)
        stats = ds.fit_normalizer(train_windows)
        train_windows = ds.apply_normalizer(stats, train_windows)
        test_windows = []
        for rid, run in held_runs:
            test_windows.extend(ds.windowize(run, w, stride, run_id=rid))
        test_windows = ds.apply_normalizer(stats, test_windows)
        if grid.use_tsa:
            train_windows = augment_training_set(
                train_windows, np.random.default_rng(grid.seed + 2)
            )
        model = _train_or_load(grid, cell, train_windows, stats, cache_dir, extra="held_out")
        fallback = make_fallback(grid.fallback, train_windows) if method else None
        preds, fb_rate = evaluate(model, test_windows, method=method, fallback=fallback)
        counts = confusion(preds, [s.label for s in test_windows])
        rows.append(_make_row(grid, cell, counts, fb_rate, held_out=True))
        return rows
    rows.append(_run_rows(grid, cell, simulate_cell_runs(grid, cell), method, cache_dir))
    return rows


def _run_rows(grid, cell, runs, method, cache_dir, held_out=False):
    train_windows, test_windows, stats = _prepare_windows(grid, cell, runs)
    model = _train_or_load(grid, cell, train_windows, stats, cache_dir)
    fallback = make_fallback(grid.fallback, train_windows) if method else None
    preds, fb_rate = evaluate(model, test_windows, method=method, fallback=fallback)
    counts = confusion(preds, [s.label for s in test_windows])
    return _make_row(grid, cell, counts, fb_rate, held_out=held_out)


def _make_row(grid, cell, counts, fb_rate, held_out=False, error=""):
    row = {k: cell.get(k, "") for k in AXIS_FIELDS}
    row.update(
        {
            "seed": grid.seed,
            "held_out": str(held_out).lower(),
            "accuracy": f"{counts.accuracy:.6f}" if counts else "",
            "true_pos": counts.true_pos if counts else "",
            "true_neg": counts.true_neg if counts else "",
            "false_pos": counts.false_pos if counts else "",
            "false_neg": counts.false_neg if counts else "",
            "fallback_rate": f"{fb_rate:.6f}" if counts else "",
            "error": error,
        }
    )
    return row


def run_grid(grid: ExperimentGrid, out_csv, cache_dir=None):
    """Run every grid cell, appending one CSV row per evaluation.

    Cell failures are recorded in the row's error column and do not stop
    the sweep. A JSON manifest with summary flags lands beside the CSV.
    """
    rows = []
    for cell in grid.cells():
        try:
            rows.extend(run_cell(grid, cell, cache_dir=cache_dir))
        except Exception as exc:  # record and continue
            rows.append(_make_row(grid, cell, None, 0.0, error=str(exc)))
    with open(out_csv, "w", encoding="utf-8") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in CSV_COLUMNS) + "\n")
    manifest = {
        "grid": {
            "axes": grid.axes,
            "runs_per_class": grid.runs_per_class,
            "epochs": grid.epochs,
            "seed": grid.seed,
            "held_out_powers": list(grid.held_out_powers),
        },
        "rows": len(rows),
        "failures": sum(1 for r in rows if r["error"]),
        "mean_accuracy": (
            float(np.mean([float(r["accuracy"]) for r in rows if r["accuracy"] != ""]))
            if any(r["accuracy"] != "" for r in rows)
            else None
        ),
    }
    with open(out_csv + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return rows
