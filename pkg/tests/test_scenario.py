"""Scenario tests: placement, mobility, link budget, full simulation."""

import numpy as np
import pytest

from jamsense import scenario as sc
from jamsense.errors import ConfigError


class TestConfig:
    def test_grid_validation(self):
        with pytest.raises(ConfigError):
            sc.ScenarioConfig(n_users=7)
        with pytest.raises(ConfigError):
            sc.ScenarioConfig(attacker_power_dbm=3.0, n_attackers=1)
        sc.ScenarioConfig(n_users=7, allow_off_grid=True)

    def test_n_samples(self):
        assert sc.ScenarioConfig().n_samples() == 3000

    def test_json_round_trip(self):
        cfg = sc.ScenarioConfig(n_attackers=2, channel_mode=sc.ChannelMode.ALWAYS_NLOS)
        assert sc.ScenarioConfig.from_json(cfg.to_json()) == cfg


class TestPlacement:
    def test_no_attackers_no_jammers(self):
        ents = sc.place_entities(sc.ScenarioConfig(n_attackers=0), np.random.default_rng(0))
        assert not [e for e in ents if e.role is sc.Role.JAMMER]

    def test_deterministic(self):
        cfg = sc.ScenarioConfig(n_attackers=3, attacker_power_dbm=5.0)
        a = sc.place_entities(cfg, np.random.default_rng(9))
        b = sc.place_entities(cfg, np.random.default_rng(9))
        for ea, eb in zip(a, b):
            assert np.array_equal(ea.position, eb.position)

    def test_cell_uav_distance_exact(self):
        cfg = sc.ScenarioConfig(cell_uav_distance_m=500.0)
        for seed in range(200):
            ents = sc.place_entities(cfg, np.random.default_rng(seed))
            cell = next(e for e in ents if e.role is sc.Role.SMALL_CELL)
            uav = next(e for e in ents if e.role is sc.Role.AUTHENTICATED_UAV)
            d = np.linalg.norm(uav.position - cell.position)
            assert d == pytest.approx(500.0, abs=1e-6)


class TestMobility:
    def test_jammer_moves_toward_uav(self):
        uav = sc.Entity(sc.Role.AUTHENTICATED_UAV, np.array([0.0, 0.0, 100.0]))
        jam = sc.Entity(sc.Role.JAMMER, np.array([100.0, 0.0, 100.0]), speed_mps=10.0)
        moved = sc.step_mobility([uav, jam], 1.0, sc.SpeedProfile.ATTACKERS_ONLY)
        assert np.allclose(moved[1].position, [90.0, 0.0, 100.0])

    def test_none_profile_static(self):
        uav = sc.Entity(sc.Role.AUTHENTICATED_UAV, np.array([0.0, 0.0, 100.0]))
        jam = sc.Entity(sc.Role.JAMMER, np.array([100.0, 0.0, 100.0]), speed_mps=10.0)
        moved = sc.step_mobility([uav, jam], 1.0, sc.SpeedProfile.NONE)
        assert np.array_equal(moved[1].position, jam.position)

    def test_separation_clamp(self):
        uav = sc.Entity(sc.Role.AUTHENTICATED_UAV, np.array([0.0, 0.0, 100.0]))
        jam = sc.Entity(sc.Role.JAMMER, np.array([7.0, 0.0, 100.0]), speed_mps=10.0)
        moved = sc.step_mobility([uav, jam], 1.0, sc.SpeedProfile.ATTACKERS_ONLY)
        d = np.linalg.norm(moved[1].position - uav.position)
        assert d == pytest.approx(sc.MIN_JAMMER_SEPARATION_M)
        # a below-floor start is left in place
        close = sc.Entity(sc.Role.JAMMER, np.array([3.0, 0.0, 100.0]), speed_mps=10.0)
        moved = sc.step_mobility([uav, close], 1.0, sc.SpeedProfile.ATTACKERS_ONLY)
        assert np.array_equal(moved[1].position, close.position)


class TestLinkBudget:
    def test_received_power(self):
        tx = sc.Entity(sc.Role.SMALL_CELL, np.zeros(3), tx_power_dbm=4.0)
        rx = sc.Entity(sc.Role.AUTHENTICATED_UAV, np.zeros(3), tx_power_dbm=2.0)
        assert sc.received_power_dbm(tx, rx, 79.42, 0.0) == pytest.approx(-75.42)
        assert sc.received_power_dbm(tx, rx, 0.0, 0.0) == pytest.approx(4.0)
        # the last argument is a subtracted fade; a gain enters negated
        assert sc.received_power_dbm(tx, rx, 79.42, -3.0) == pytest.approx(-72.42)

    def test_sinr(self):
        noise = sc.NoiseModel(-94.0)
        assert sc.sinr_db(-75.42, [], noise) == pytest.approx(18.58)
        assert sc.sinr_db(-50.0, [-50.0], sc.NoiseModel(-200.0)) == pytest.approx(
            0.0, abs=1e-10
        )
        assert sc.sinr_db(-94.0, [], noise) == pytest.approx(0.0)

    def test_rssi(self):
        assert sc.rssi_dbm([-80.0, -80.0], sc.NoiseModel(-200.0)) == pytest.approx(
            -76.99, abs=0.01
        )
        # single source plus noise: 10*log10(10^-7.542 + 10^-9.4) = -75.36
        assert sc.rssi_dbm([-75.42], sc.NoiseModel(-94.0)) == pytest.approx(
            -75.36, abs=0.005
        )
        assert sc.rssi_dbm([], sc.NoiseModel(-94.0)) == pytest.approx(-94.0)


class TestSimulation:
    def test_clean_run_shape_and_label(self):
        run = sc.run_simulation(sc.ScenarioConfig(n_attackers=0, seed=1))
        assert len(run.rssi_dbm) == 3000
        assert len(run.sinr_db) == 3000
        assert run.label is False

    def test_attack_run_label(self):
        cfg = sc.ScenarioConfig(
            n_attackers=2, attacker_power_dbm=5.0, duration_s=2.0, allow_off_grid=True
        )
        assert sc.run_simulation(cfg).label is True

    def test_deterministic(self):
        cfg = sc.ScenarioConfig(n_attackers=1, attacker_power_dbm=5.0, seed=42)
        a = sc.run_simulation(cfg)
        b = sc.run_simulation(cfg)
        assert np.array_equal(a.rssi_dbm, b.rssi_dbm)
        assert np.array_equal(a.sinr_db, b.sinr_db)

    def test_attack_lowers_sinr(self):
        # strong jammers vs clean link, short runs, averaged over seeds
        deltas = []
        for seed in range(12):
            attack = sc.run_simulation(
                sc.ScenarioConfig(
                    n_attackers=4,
                    attacker_power_dbm=20.0,
                    duration_s=3.0,
                    seed=seed,
                    allow_off_grid=True,
                )
            )
            clean = sc.run_simulation(
                sc.ScenarioConfig(
                    n_attackers=0, duration_s=3.0, seed=seed, allow_off_grid=True
                )
            )
            deltas.append(clean.sinr_db.mean() - attack.sinr_db.mean())
        assert np.mean(deltas) > 3.0
