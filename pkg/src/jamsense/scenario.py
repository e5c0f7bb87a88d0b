"""Entity placement, mobility and RSSI/SINR time-series generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace, asdict
from enum import Enum

import numpy as np

from . import channel
from .channel import ChannelCondition
from .errors import ConfigError, DomainError

AREA_SIDE_M = 1000.0
CELL_HEIGHT_M = 10.0
USER_HEIGHT_M = 1.5
DEFAULT_SPEED_MPS = 10.0
MIN_JAMMER_SEPARATION_M = 5.0
SHADOW_COHERENCE_S = 0.1

USERS_GRID = (0, 3, 5, 10, 20, 30)
ATTACKERS_GRID = (0, 1, 2, 3, 4)
ATTACKER_POWER_GRID = (0.0, 2.0, 5.0, 10.0, 20.0)
DISTANCE_GRID = (100.0, 200.0, 500.0, 1000.0)


class SpeedProfile(Enum):
    NONE = "None"
    ATTACKERS_ONLY = "AttackersOnly"
    USERS_ONLY = "UsersOnly"
    BOTH = "Both"


class ChannelMode(Enum):
    ALWAYS_LOS = "AlwaysLoS"
    ALWAYS_NLOS = "AlwaysNLoS"
    PROBABILISTIC = "Probabilistic"


class Role(Enum):
    SMALL_CELL = "small_cell"
    AUTHENTICATED_UAV = "authenticated_uav"
    JAMMER = "jammer"
    TERRESTRIAL_USER = "terrestrial_user"


@dataclass
class Entity:
    role: Role
    position: np.ndarray  # (x, y, z) meters
    speed_mps: float = 0.0
    tx_power_dbm: float = 0.0
    antenna_gain_dbi: float = 0.0
    heading_rad: float = 0.0  # persistent walk direction for users


@dataclass(frozen=True)
class NoiseModel:
    noise_power_dbm: float = -94.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulation run."""

    n_users: int = 20
    n_attackers: int = 0
    attacker_power_dbm: float = 5.0
    cell_uav_distance_m: float = 100.0
    speed_profile: SpeedProfile = SpeedProfile.NONE
    channel_mode: ChannelMode = ChannelMode.ALWAYS_LOS
    duration_s: float = 30.0
    sample_rate_hz: float = 100.0
    noise_power_dbm: float = -94.0
    seed: int = 0
    cell_power_dbm: float = 4.0
    uav_power_dbm: float = 2.0
    user_power_dbm: float = 2.0
    freq_hz: float = 2e9
    antenna_gain_dbi: float = 0.0
    allow_off_grid: bool = False

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be > 0")
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be > 0")
        if not self.allow_off_grid:
            if self.n_users not in USERS_GRID:
                raise ConfigError(f"n_users {self.n_users} outside grid {USERS_GRID}")
            if self.n_attackers not in ATTACKERS_GRID:
                raise ConfigError(
                    f"n_attackers {self.n_attackers} outside grid {ATTACKERS_GRID}"
                )
            if float(self.attacker_power_dbm) not in ATTACKER_POWER_GRID:
                raise ConfigError(
                    f"attacker_power_dbm {self.attacker_power_dbm} outside grid "
                    f"{ATTACKER_POWER_GRID}"
                )
            if float(self.cell_uav_distance_m) not in DISTANCE_GRID:
                raise ConfigError(
                    f"cell_uav_distance_m {self.cell_uav_distance_m} outside grid "
                    f"{DISTANCE_GRID}"
                )

    def n_samples(self):
        return int(round(self.duration_s * self.sample_rate_hz))

    def to_dict(self):
        d = asdict(self)
        d["speed_profile"] = self.speed_profile.value
        d["channel_mode"] = self.channel_mode.value
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["speed_profile"] = SpeedProfile(d["speed_profile"])
        d["channel_mode"] = ChannelMode(d["channel_mode"])
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


@dataclass
class TimeSeriesRun:
    rssi_dbm: np.ndarray
    sinr_db: np.ndarray
    label: bool
    config: ScenarioConfig
    seed: int

    def __post_init__(self):
        if len(self.rssi_dbm) != len(self.sinr_db):
            raise DomainError("rssi and sinr sequences must have equal length")
        if not (np.all(np.isfinite(self.rssi_dbm)) and np.all(np.isfinite(self.sinr_db))):
            raise DomainError("run contains non-finite values")


# ---------------------------------------------------------------------------
# Placement and mobility
# ---------------------------------------------------------------------------


def place_entities(config: ScenarioConfig, rng):
    """Deterministic entity placement for one run."""
    d = config.cell_uav_distance_m
    cell = Entity(
        role=Role.SMALL_CELL,
        position=np.array([AREA_SIDE_M / 2, AREA_SIDE_M / 2, CELL_HEIGHT_M]),
        tx_power_dbm=config.cell_power_dbm,
        antenna_gain_dbi=config.antenna_gain_dbi,
    )
    h_max = min(channel.MAX_UAV_ALT_M, CELL_HEIGHT_M + d)
    if h_max <= channel.MIN_UAV_ALT_M:
        raise DomainError(
            f"cell-UAV distance {d} m cannot place the UAV above "
            f"{channel.MIN_UAV_ALT_M} m altitude"
        )
    bearing = rng.uniform(0.0, 2.0 * np.pi)
    h = rng.uniform(channel.MIN_UAV_ALT_M + 1e-6, h_max - 1e-6)
    r = math.sqrt(max(d * d - (h - CELL_HEIGHT_M) ** 2, 0.0))
    uav = Entity(
        role=Role.AUTHENTICATED_UAV,
        position=cell.position + np.array([r * math.cos(bearing), r * math.sin(bearing), h - CELL_HEIGHT_M]),
        tx_power_dbm=config.uav_power_dbm,
        antenna_gain_dbi=config.antenna_gain_dbi,
    )
    entities = [cell, uav]
    jammer_speed = (
        DEFAULT_SPEED_MPS
        if config.speed_profile in (SpeedProfile.ATTACKERS_ONLY, SpeedProfile.BOTH)
        else 0.0
    )
    for _ in range(config.n_attackers):
        pos = np.array(
            [
                rng.uniform(0.0, AREA_SIDE_M),
                rng.uniform(0.0, AREA_SIDE_M),
                rng.uniform(channel.MIN_UAV_ALT_M + 1e-6, channel.MAX_UAV_ALT_M - 1e-6),
            ]
        )
        entities.append(
            Entity(
                role=Role.JAMMER,
                position=pos,
                speed_mps=jammer_speed,
                tx_power_dbm=config.attacker_power_dbm,
                antenna_gain_dbi=config.antenna_gain_dbi,
            )
        )
    user_speed = (
        DEFAULT_SPEED_MPS
        if config.speed_profile in (SpeedProfile.USERS_ONLY, SpeedProfile.BOTH)
        else 0.0
    )
    for _ in range(config.n_users):
        pos = np.array(
            [rng.uniform(0.0, AREA_SIDE_M), rng.uniform(0.0, AREA_SIDE_M), USER_HEIGHT_M]
        )
        entities.append(
            Entity(
                role=Role.TERRESTRIAL_USER,
                position=pos,
                speed_mps=user_speed,
                tx_power_dbm=config.user_power_dbm,
                antenna_gain_dbi=config.antenna_gain_dbi,
                heading_rad=rng.uniform(0.0, 2.0 * np.pi),
            )
        )
    return entities


def step_mobility(entities, dt_s, profile: SpeedProfile):
    """Advance every moving entity by dt; returns a new entity list."""
    if dt_s <= 0:
        raise DomainError("dt_s must be > 0")
    if profile is SpeedProfile.NONE:
        return [replace(e, position=e.position.copy()) for e in entities]
    uav = next(e for e in entities if e.role is Role.AUTHENTICATED_UAV)
    out = []
    for e in entities:
        pos = e.position.copy()
        if e.role is Role.JAMMER and e.speed_mps > 0:
            delta = uav.position - pos
            dist = float(np.linalg.norm(delta))
            if dist > MIN_JAMMER_SEPARATION_M:
                step = min(e.speed_mps * dt_s, dist - MIN_JAMMER_SEPARATION_M)
                pos = pos + delta / dist * step
            # below-floor start: leave in place
        elif e.role is Role.TERRESTRIAL_USER and e.speed_mps > 0:
            pos = pos + np.array(
                [
                    math.cos(e.heading_rad) * e.speed_mps * dt_s,
                    math.sin(e.heading_rad) * e.speed_mps * dt_s,
                    0.0,
                ]
            )
        out.append(replace(e, position=pos))
    return out


# ---------------------------------------------------------------------------
# Link budget
# ---------------------------------------------------------------------------


def received_power_dbm(tx: Entity, rx: Entity, loss_db, fading_db):
    """Eq-style link budget P + G - L - S; fading enters as S = -gain."""
    g = tx.antenna_gain_dbi + rx.antenna_gain_dbi
    return tx.tx_power_dbm + g - loss_db - fading_db


def _dbm_to_mw(x):
    return np.power(10.0, np.asarray(x) / 10.0)


def sinr_db(signal_dbm, interferer_dbm_list, noise: NoiseModel):
    """Serving power over interference plus noise, in dB."""
    denom = _dbm_to_mw(noise.noise_power_dbm)
    for p in interferer_dbm_list:
        denom = denom + _dbm_to_mw(p)
    return 10.0 * np.log10(_dbm_to_mw(signal_dbm) / denom)


def rssi_dbm(all_received_dbm_list, noise: NoiseModel):
    """Total received power from all sources plus noise, in dBm."""
    total = _dbm_to_mw(noise.noise_power_dbm)
    for p in all_received_dbm_list:
        total = total + _dbm_to_mw(p)
    return 10.0 * np.log10(total)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _link_geometry_arrays(tx_pos, rx_pos):
    """Per-sample (d3d, d2d, h) for a link; positions are (N, 3) arrays."""
    delta = rx_pos - tx_pos
    d2d = np.hypot(delta[:, 0], delta[:, 1])
    d3d = np.maximum(np.linalg.norm(delta, axis=1), 1e-6)
    h = np.maximum(tx_pos[:, 2], rx_pos[:, 2])
    return d3d, d2d, h


def _link_receive_series(
    tx_positions, rx_positions, tx_power, gains, rel_speed, config, rng, t
):
    """Received power series at the UAV for one transmitter.

    Per-coherence-block LoS/NLoS resolution and shadowing, per-sample
    pathloss and fading.
    """
    n = len(t)
    block = max(1, int(round(SHADOW_COHERENCE_S * config.sample_rate_hz)))
    n_blocks = (n + block - 1) // block
    d3d, d2d, h = _link_geometry_arrays(tx_positions, rx_positions)
    # for the low-altitude pathloss branch, clamp h into its validity range
    h_eff = np.clip(h, math.nextafter(channel.MIN_UAV_ALT_M, math.inf), channel.MAX_UAV_ALT_M)

    # condition per coherence block
    conditions = np.empty(n_blocks, dtype=object)
    for b in range(n_blocks):
        i = b * block
        if config.channel_mode is ChannelMode.ALWAYS_LOS:
            conditions[b] = ChannelCondition.LOS
        elif config.channel_mode is ChannelMode.ALWAYS_NLOS:
            conditions[b] = ChannelCondition.NLOS
        else:
            p_los = channel.los_probability(float(d2d[i]), float(h_eff[i]))
            conditions[b] = channel.sample_condition(p_los, rng.uniform())

    is_los_blocks = np.array([c is ChannelCondition.LOS for c in conditions])
    shadow_blocks = np.array(
        [
            channel.sample_shadowing(
                channel.shadowing_std(conditions[b], float(h_eff[min(b * block, n - 1)])),
                rng,
            )
            for b in range(n_blocks)
        ]
    )
    is_los = np.repeat(is_los_blocks, block)[:n]
    shadow = np.repeat(shadow_blocks, block)[:n]

    pl_los = channel.pathloss_los_arrays(d3d, h_eff, config.freq_hz)
    need_nlos = not np.all(is_los)
    pl = np.where(
        is_los,
        pl_los,
        channel.pathloss_nlos_arrays(d3d, h_eff, config.freq_hz) if need_nlos else pl_los,
    )

    # fading: one state per condition actually used on this link
    fading_db = np.zeros(n)
    for want_los in (True, False):
        mask = is_los == want_los
        if not np.any(mask):
            continue
        table = channel.default_los_table() if want_los else channel.default_nlos_table()
        state = channel.build_fading_state(
            table, seed=int(rng.integers(2**63)), speed_mps=rel_speed, f_hz=config.freq_hz
        )
        power = channel.fading_linear_power_series(state, t[mask])
        fading_db[mask] = 10.0 * np.log10(np.maximum(power, 1e-30))

    # Eq. 6 subtracts S; a positive fading gain must raise received power
    return tx_power + gains - (pl + shadow) - (-fading_db)


def run_simulation(config: ScenarioConfig) -> TimeSeriesRun:
    """Generate one RSSI/SINR run; fully deterministic given config.seed."""
    rng = np.random.default_rng(config.seed)
    entities = place_entities(config, rng)
    n = config.n_samples()
    dt = 1.0 / config.sample_rate_hz
    t = np.arange(n) * dt

    # trajectories: (N, 3) per entity
    trajectories = [np.empty((n, 3)) for _ in entities]
    current = entities
    for i in range(n):
        for j, e in enumerate(current):
            trajectories[j][i] = e.position
        if i + 1 < n and config.speed_profile is not SpeedProfile.NONE:
            current = step_mobility(current, dt, config.speed_profile)

    uav_idx = next(i for i, e in enumerate(entities) if e.role is Role.AUTHENTICATED_UAV)
    rx_pos = trajectories[uav_idx]
    uav = entities[uav_idx]

    serving = None
    interferers = []
    for j, e in enumerate(entities):
        if e.role is Role.AUTHENTICATED_UAV:
            continue
        rel_speed = e.speed_mps  # the UAV is static; movers set link Doppler
        series = _link_receive_series(
            trajectories[j],
            rx_pos,
            e.tx_power_dbm,
            e.antenna_gain_dbi + uav.antenna_gain_dbi,
            rel_speed,
            config,
            rng,
            t,
        )
        if e.role is Role.SMALL_CELL:
            serving = series
        else:
            interferers.append(series)

    noise = NoiseModel(config.noise_power_dbm)
    sinr = sinr_db(serving, interferers, noise)
    rssi = rssi_dbm([serving] + interferers, noise)
    return TimeSeriesRun(
        rssi_dbm=rssi,
        sinr_db=sinr,
        label=config.n_attackers > 0,
        config=config,
        seed=config.seed,
    )
