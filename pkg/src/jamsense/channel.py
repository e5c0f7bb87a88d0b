"""Air-to-ground propagation mathematics.

Pathloss, shadowing, LoS probability and a sum-of-rays small-scale fading
generator for UAV links in an urban micro deployment. All functions are
pure: randomness enters only through explicitly passed generators/seeds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import AltitudeWarning, DomainError, ParseError
from . import kernels

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

MIN_UAV_ALT_M = 22.5
MAX_UAV_ALT_M = 300.0

# Canonical 20-ray in-cluster azimuth offsets (unit spread), symmetric pairs.
RAY_OFFSETS_20 = np.array(
    [
        0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715,
        0.5129, -0.5129, 0.6797, -0.6797, 0.8844, -0.8844, 1.1481, -1.1481,
        1.5195, -1.5195, 2.1551, -2.1551,
    ]
)


class ChannelCondition(Enum):
    LOS = "LoS"
    NLOS = "NLoS"


@dataclass(frozen=True)
class LinkGeometry:
    """Transmitter-receiver geometry for one air-to-ground link."""

    d3d_m: float
    d2d_m: float
    h_m: float

    def __post_init__(self):
        if self.d3d_m <= 0:
            raise DomainError(f"d3d_m must be > 0, got {self.d3d_m}")
        if self.d2d_m < 0:
            raise DomainError(f"d2d_m must be >= 0, got {self.d2d_m}")
        if self.d3d_m + 1e-9 < self.d2d_m:
            raise DomainError(
                f"d3d_m ({self.d3d_m}) must be >= d2d_m ({self.d2d_m})"
            )


def _check_altitude(h_m, strict=False):
    if MIN_UAV_ALT_M < h_m < MAX_UAV_ALT_M:
        return
    msg = f"altitude {h_m} m outside validity margin ({MIN_UAV_ALT_M}, {MAX_UAV_ALT_M})"
    if strict:
        raise DomainError(msg)
    warnings.warn(msg, AltitudeWarning, stacklevel=3)


def free_space_pl(d_m, f_hz):
    """Free-space pathloss in dB."""
    if np.any(np.asarray(d_m) <= 0) or np.any(np.asarray(f_hz) <= 0):
        raise DomainError("free_space_pl requires d_m > 0 and f_hz > 0")
    return 20.0 * np.log10(4.0 * np.pi * np.asarray(d_m) * f_hz / SPEED_OF_LIGHT)


def _pl_low_altitude(d3d_m, h_m, f_hz):
    f_ghz = f_hz / 1e9
    return (
        30.9
        + (22.25 - 0.5 * np.log10(h_m)) * np.log10(d3d_m)
        + 20.0 * np.log10(f_ghz)
    )


def _pl_nlos_term(d3d_m, h_m, f_hz):
    f_ghz = f_hz / 1e9
    return (
        32.4
        + (43.2 - 7.6 * np.log10(h_m)) * np.log10(d3d_m)
        + 20.0 * np.log10(f_ghz)
    )


def pathloss_los(g: LinkGeometry, f_hz):
    """LoS pathloss in dB: max of the high- and low-altitude branches."""
    _check_altitude(g.h_m)
    return pathloss_los_arrays(g.d3d_m, g.h_m, f_hz)


def pathloss_los_arrays(d3d_m, h_m, f_hz):
    """Vectorized LoS pathloss without geometry validation (hot path)."""
    return np.maximum(free_space_pl(d3d_m, f_hz), _pl_low_altitude(d3d_m, h_m, f_hz))


def pathloss_nlos(g: LinkGeometry, f_hz):
    """NLoS pathloss in dB: max of the LoS pathloss and the NLoS expression."""
    _check_altitude(g.h_m)
    return pathloss_nlos_arrays(g.d3d_m, g.h_m, f_hz)


def pathloss_nlos_arrays(d3d_m, h_m, f_hz):
    """Vectorized NLoS pathloss without geometry validation (hot path)."""
    return np.maximum(
        pathloss_los_arrays(d3d_m, h_m, f_hz), _pl_nlos_term(d3d_m, h_m, f_hz)
    )


def shadowing_std(condition: ChannelCondition, h_m):
    """Shadowing standard deviation in dB for a UAV link in UMi."""
    _check_altitude(h_m, strict=True)
    if condition is ChannelCondition.LOS:
        return max(5.0 * math.exp(-0.01 * h_m), 2.0)
    return 8.0


def sample_shadowing(std_db, rng):
    """Zero-mean Gaussian shadowing draw in dB."""
    if std_db < 0:
        raise DomainError(f"std_db must be >= 0, got {std_db}")
    if std_db == 0:
        return 0.0
    return float(rng.normal(0.0, std_db))


def los_probability(d2d_m, h_m):
    """Probability that the link is in LoS, clamped to [0, 1]."""
    if d2d_m < 0:
        raise DomainError(f"d2d_m must be >= 0, got {d2d_m}")
    log_h = math.log10(h_m)
    d1 = max(294.05 * log_h - 432.94, 18.0)
    if d2d_m <= d1:
        return 1.0
    p = 233.98 * log_h - 0.95
    ratio = d1 / d2d_m
    val = ratio + math.exp(-d2d_m / p) * (1.0 - ratio)
    return min(max(val, 0.0), 1.0)


def sample_condition(p_los, u):
    """Pick LoS iff the uniform draw u falls below p_los."""
    if not 0.0 <= p_los <= 1.0:
        raise DomainError(f"p_los must be in [0, 1], got {p_los}")
    return ChannelCondition.LOS if u < p_los else ChannelCondition.NLOS


def large_scale_loss(g: LinkGeometry, f_hz, condition: ChannelCondition, shadow_db):
    """Pathloss plus shadowing in dB, dispatched on the channel condition."""
    if condition is ChannelCondition.LOS:
        pl = pathloss_los(g, f_hz)
    else:
        pl = pathloss_nlos(g, f_hz)
    return pl + shadow_db


# ---------------------------------------------------------------------------
# Small-scale fading
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cluster:
    power_fraction: float
    delay_s: float
    aoa_deg: float
    aod_deg: float
    zoa_deg: float
    zod_deg: float


@dataclass(frozen=True)
class LosComponent:
    power_fraction: float
    aoa_deg: float = 0.0
    aod_deg: float = 0.0


@dataclass(frozen=True)
class FadingTable:
    """Cluster description for the sum-of-rays fading generator.

    Per-ray azimuth angles are spread around each cluster AoA using the
    canonical 20-ray offsets scaled by ``asa_deg``. Narrowband use: delays
    collapse to random per-ray phases, only per-sample power is consumed.
    """

    clusters: tuple
    rays_per_cluster: int = 20
    los_component: Optional[LosComponent] = None
    asa_deg: float = 11.0

    def __post_init__(self):
        if not self.clusters:
            raise DomainError("FadingTable requires at least one cluster")
        if self.rays_per_cluster < 1:
            raise DomainError("rays_per_cluster must be >= 1")
        total = sum(c.power_fraction for c in self.clusters)
        if self.los_component is not None:
            total += self.los_component.power_fraction
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"cluster powers must sum to 1, got {total}")


@dataclass(frozen=True)
class FadingState:
    """Frozen per-ray parameters; deterministic in (table, seed, speed, f)."""

    amps: np.ndarray
    phases: np.ndarray
    dopplers: np.ndarray
    seed: int


def _ray_offsets(m, rng):
    if m == 20:
        return RAY_OFFSETS_20
    # non-standard ray count: deterministic uniform offsets in +-2 spreads
    return np.linspace(-2.0, 2.0, m)


def build_fading_state(table: FadingTable, seed, speed_mps, f_hz):
    """Expand a FadingTable into per-ray amplitudes, phases and Dopplers."""
    rng = np.random.default_rng(seed)
    lam = SPEED_OF_LIGHT / f_hz
    m = table.rays_per_cluster
    offsets = _ray_offsets(m, rng)
    amps, phases, dopplers = [], [], []
    for cluster in table.clusters:
        ray_aoas = np.radians(cluster.aoa_deg + table.asa_deg * offsets)
        amps.append(np.full(m, math.sqrt(cluster.power_fraction / m)))
        phases.append(rng.uniform(0.0, 2.0 * np.pi, m))
        dopplers.append((speed_mps / lam) * np.cos(ray_aoas))
    if table.los_component is not None:
        los = table.los_component
        amps.append(np.array([math.sqrt(los.power_fraction)]))
        phases.append(rng.uniform(0.0, 2.0 * np.pi, 1))
        dopplers.append(np.array([(speed_mps / lam) * math.cos(math.radians(los.aoa_deg))]))
    return FadingState(
        amps=np.concatenate(amps),
        phases=np.concatenate(phases),
        dopplers=np.concatenate(dopplers),
        seed=int(seed),
    )


def fading_linear_power_series(state: FadingState, t_s):
    """Instantaneous linear channel power |g(t)|^2 over a time grid."""
    t = np.atleast_1d(np.asarray(t_s, dtype=np.float64))
    g = kernels.fading_series(state.amps, state.phases, state.dopplers, t)
    return np.abs(g) ** 2


def fading_gain_db(state: FadingState, t_s):
    """Instantaneous fading gain 10*log10 |g(t)|^2 (scalar t -> scalar)."""
    power = fading_linear_power_series(state, t_s)
    out = 10.0 * np.log10(power)
    return float(out[0]) if np.isscalar(t_s) else out


# ---------------------------------------------------------------------------
# Default tables
# ---------------------------------------------------------------------------


def _default_clusters(total_power):
    """23 clusters with an exponentially decaying power profile."""
    n = 23
    raw = np.exp(-np.arange(n) / 8.0)
    powers = raw / raw.sum() * total_power
    clusters = []
    for i in range(n):
        aoa = ((i * 360.0 / n + 17.0 * i) % 360.0) - 180.0
        aod = ((i * 360.0 / n + 111.0) % 360.0) - 180.0
        clusters.append(
            Cluster(
                power_fraction=float(powers[i]),
                delay_s=i * 100e-9,
                aoa_deg=aoa,
                aod_deg=aod,
                zoa_deg=90.0 + 10.0 * math.sin(i),
                zod_deg=90.0 - 10.0 * math.sin(i),
            )
        )
    return tuple(clusters)


def default_nlos_table():
    """Rayleigh-like 23-cluster table (no dominant direct component)."""
    return FadingTable(clusters=_default_clusters(1.0))


def default_los_table():
    """Rician-like table: 23 clusters at 0.4 total plus a 0.6 direct ray."""
    return FadingTable(
        clusters=_default_clusters(0.4),
        los_component=LosComponent(power_fraction=0.6, aoa_deg=38.0),
    )


def table_for(condition: ChannelCondition):
    return default_los_table() if condition is ChannelCondition.LOS else default_nlos_table()


_CSV_FIELDS = ("power_fraction", "delay_s", "aoa_deg", "aod_deg", "zoa_deg", "zod_deg")


def load_fading_table(path, rays_per_cluster=20, asa_deg=11.0):
    """Load a FadingTable from CSV (one cluster per row).

    An optional ``#los power aoa aod`` comment line declares the direct
    component.
    """
    clusters = []
    los = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#los"):
            parts = line.split()
            if len(parts) < 2:
                raise ParseError("malformed #los line", line=lineno)
            try:
                vals = [float(v) for v in parts[1:4]]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            vals += [0.0] * (3 - len(vals))
            los = LosComponent(*vals)
            continue
        if line.startswith("#"):
            continue
        if not header_seen:
            if tuple(f.strip() for f in line.split(",")) != _CSV_FIELDS:
                raise ParseError(f"expected header {','.join(_CSV_FIELDS)}", line=lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != len(_CSV_FIELDS):
            raise ParseError(f"expected {len(_CSV_FIELDS)} fields", line=lineno)
        try:
            clusters.append(Cluster(*(float(p) for p in parts)))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc
    if not header_seen:
        raise ParseError("missing header line", line=len(lines) or 1)
    return FadingTable(
        clusters=tuple(clusters),
        rays_per_cluster=rays_per_cluster,
        los_component=los,
        asa_deg=asa_deg,
    )


def save_fading_table(table: FadingTable, path):
    with open(path, "w", encoding="utf-8") as fh:
        if table.los_component is not None:
            los = table.los_component
            fh.write(f"#los {los.power_fraction!r} {los.aoa_deg!r} {los.aod_deg!r}\n")
        fh.write(",".join(_CSV_FIELDS) + "\n")
        for c in table.clusters:
            fh.write(
                ",".join(
                    repr(getattr(c, f)) for f in _CSV_FIELDS
                )
                + "\n"
            )
