"""Run persistence, windowing, balancing, normalization and splits."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParseError
from .scenario import ScenarioConfig, TimeSeriesRun

STD_FLOOR = 1e-6


@dataclass
class WindowSample:
    """A w-length two-channel slice; the unit of classification."""

    rssi: np.ndarray
    sinr: np.ndarray
    label: bool  # True = attack
    origin: tuple  # (run_id, start_index)

    def __post_init__(self):
        if len(self.rssi) != len(self.sinr):
            raise DomainError("rssi and sinr windows must have equal length")

    @property
    def w(self):
        return len(self.rssi)


@dataclass(frozen=True)
class NormStats:
    """Per-channel z-score statistics fitted on the training split."""

    rssi_mean: float
    rssi_std: float
    sinr_mean: float
    sinr_std: float

    def to_dict(self):
        return {
            "rssi_mean": self.rssi_mean,
            "rssi_std": self.rssi_std,
            "sinr_mean": self.sinr_mean,
            "sinr_std": self.sinr_std,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def windowize(run: TimeSeriesRun, w, stride, run_id="run"):
    """Slice a run into overlapping windows inheriting the run label."""
    if w < 1 or stride < 1:
        raise DomainError("w and stride must be >= 1")
    n = len(run.rssi_dbm)
    if n < w:
        return []
    count = (n - w) // stride + 1
    return [
        WindowSample(
            rssi=np.array(run.rssi_dbm[i * stride : i * stride + w]),
            sinr=np.array(run.sinr_db[i * stride : i * stride + w]),
            label=run.label,
            origin=(run_id, i * stride),
        )
        for i in range(count)
    ]


def balance(samples, rng):
    """Undersample the majority class to equal class counts."""
    attack = [s for s in samples if s.label]
    clean = [s for s in samples if not s.label]
    if not attack or not clean:
        raise DomainError("balance requires both classes to be present")
    if len(attack) > len(clean):
        keep = rng.choice(len(attack), size=len(clean), replace=False)
        attack = [attack[i] for i in sorted(keep)]
    elif len(clean) > len(attack):
        keep = rng.choice(len(clean), size=len(attack), replace=False)
        clean = [clean[i] for i in sorted(keep)]
    return attack + clean


def fit_normalizer(train_samples):
    """Per-channel mean/std over the training windows, std floored."""
    if not train_samples:
        raise DomainError("fit_normalizer requires a non-empty train set")
    rssi = np.concatenate([s.rssi for s in train_samples])
    sinr = np.concatenate([s.sinr for s in train_samples])
    return NormStats(
        rssi_mean=float(rssi.mean()),
        rssi_std=float(max(rssi.std(), STD_FLOOR)),
        sinr_mean=float(sinr.mean()),
        sinr_std=float(max(sinr.std(), STD_FLOOR)),
    )


def apply_normalizer(stats: NormStats, samples):
    """Z-score windows with the (train-fitted) statistics."""
    return [
        WindowSample(
            rssi=(s.rssi - stats.rssi_mean) / stats.rssi_std,
            sinr=(s.sinr - stats.sinr_mean) / stats.sinr_std,
            label=s.label,
            origin=s.origin,
        )
        for s in samples
    ]


def split_by_run(runs, test_fraction, seed):
    """Stratified whole-run train/test split.

    ``runs`` is a list of (run_id, TimeSeriesRun). Windows never leak
    across splits because assignment happens at run granularity.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DomainError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in (False, True):
        group = [r for r in runs if r[1].label == label]
        if not group:
            continue
        n_test = int(round(len(group) * test_fraction))
        if len(group) >= 2 and (n_test == 0 or n_test == len(group)):
            raise DomainError(
                f"too few runs with label={label} to stratify at {test_fraction}"
            )
        if len(group) < 2:
            raise DomainError("need at least 2 runs per label to split")
        order = rng.permutation(len(group))
        test.extend(group[i] for i in sorted(order[:n_test]))
        train.extend(group[i] for i in sorted(order[n_test:]))
    if not train or not test:
        raise DomainError("both splits must be non-empty")
    return train, test


# ---------------------------------------------------------------------------
# Run persistence: CSV with #meta comment lines
# ---------------------------------------------------------------------------


def save_run(run: TimeSeriesRun, path):
    """Write a run as CSV; float repr keeps the round trip bitwise."""
    dt = 1.0 / run.config.sample_rate_hz
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#meta config={run.config.to_json()}\n")
        fh.write(f"#meta seed={run.seed}\n")
        fh.write(f"#meta label={'attack' if run.label else 'no_attack'}\n")
        fh.write("t_s,rssi_dbm,sinr_db\n")
        for i in range(len(run.rssi_dbm)):
            fh.write(f"{i * dt!r},{float(run.rssi_dbm[i])!r},{float(run.sinr_db[i])!r}\n")


def load_run(path) -> TimeSeriesRun:
    config = None
    seed = None
    label = None
    rssi, sinr = [], []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#meta"):
                body = line[len("#meta") :].strip()
                key, _, value = body.partition("=")
                try:
                    if key == "config":
                        config = ScenarioConfig.from_json(value)
                    elif key == "seed":
                        seed = int(value)
                    elif key == "label":
                        label = value == "attack"
                except (ValueError, KeyError, TypeError) as exc:
                    raise ParseError(f"bad #meta {key}: {exc}", line=lineno) from exc
                continue
            if not header_seen:
                if line != "t_s,rssi_dbm,sinr_db":
                    raise ParseError("expected header t_s,rssi_dbm,sinr_db", line=lineno)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError("expected 3 comma-separated values", line=lineno)
            try:
                rssi.append(float(parts[1]))
                sinr.append(float(parts[2]))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    if config is None or seed is None or label is None or not header_seen:
        raise ParseError("missing #meta lines or header", line=1)
    expected = config.n_samples()
    if len(rssi) != expected:
        raise ParseError(f"expected {expected} samples, found {len(rssi)}", line=lineno)
    return TimeSeriesRun(
        rssi_dbm=np.array(rssi), sinr_db=np.array(sinr), label=label, config=config, seed=seed
    )


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


@dataclass
class DatasetManifest:
    """Dataset description: run files, split assignment, window geometry."""

    runs: dict  # run_id -> relative file name
    splits: dict  # run_id -> "train" | "test"
    w: int
    stride: int
    seed: int
    norm_stats: NormStats

    def __post_init__(self):
        if set(self.runs) != set(self.splits):
            raise DomainError("every run must be assigned to exactly one split")

    def to_json(self):
        return json.dumps(
            {
                "runs": self.runs,
                "splits": self.splits,
                "w": self.w,
                "stride": self.stride,
                "seed": self.seed,
                "norm_stats": self.norm_stats.to_dict(),
            },
            sort_keys=True,
            indent=1,
        )

    @classmethod
    def from_json(cls, s):
        d = json.loads(s)
        return cls(
            runs=d["runs"],
            splits=d["splits"],
            w=d["w"],
            stride=d["stride"],
            seed=d["seed"],
            norm_stats=NormStats.from_dict(d["norm_stats"]),
        )


def save_manifest(manifest: DatasetManifest, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
        fh.write("\n")


def load_manifest(path) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return DatasetManifest.from_json(fh.read())


def build_dataset(runs, out_dir, w, stride, seed, test_fraction=0.2):
    """Persist runs, split them, fit the normalizer: one dataset directory.

    ``runs`` is a list of (run_id, TimeSeriesRun). Returns the manifest.
    """
    os.makedirs(out_dir, exist_ok=True)
    files = {}
    for run_id, run in runs:
        name = f"{run_id}.csv"
        save_run(run, os.path.join(out_dir, name))
        files[run_id] = name
    train_runs, test_runs = split_by_run(runs, test_fraction, seed)
    splits = {rid: "train" for rid, _ in train_runs}
    splits.update({rid: "test" for rid, _ in test_runs})
    train_windows = []
    for rid, run in train_runs:
        train_windows.extend(windowize(run, w, stride, run_id=rid))
    stats = fit_normalizer(train_windows)
    manifest = DatasetManifest(
        runs=files, splits=splits, w=w, stride=stride, seed=seed, norm_stats=stats
    )
    save_manifest(manifest, os.path.join(out_dir, "manifest.json"))
    return manifest


def load_split_windows(ds_dir, split, normalized=True, manifest=None):
    """Load the normalized windows of one split from a dataset directory."""
    if manifest is None:
        manifest = load_manifest(os.path.join(ds_dir, "manifest.json"))
    windows = []
    for rid in sorted(manifest.runs):
        if manifest.splits[rid] != split:
            continue
        run = load_run(os.path.join(ds_dir, manifest.runs[rid]))
        windows.extend(windowize(run, manifest.w, manifest.stride, run_id=rid))
    if normalized:
        windows = apply_normalizer(manifest.norm_stats, windows)
    return windows
