import math

import pytest

import mmson


def test_channel_oracles():
    assert abs(mmson.pathloss_friis_db(10.0) - 81.39) < 0.01
    assert abs(mmson.pathloss_nlos_db(100.0) - 130.4) < 0.01
    assert mmson.capacity(1.0) == 1.0


def test_rewards_and_fairness():
    assert mmson.reward_cdpq(0.0) == -1.0
    assert mmson.reward_cdpq(10.0) == 1.0
    assert mmson.reward_expq(0.0) == pytest.approx(-3.486, abs=1e-3)
    assert mmson.jain_index([1, 2, 3]) == pytest.approx(36 / 42)
    with pytest.raises(ValueError):
        mmson.jain_index([0, 0])
    with pytest.raises(mmson.ConfigError):
        mmson.reward_cdpq(1.0, 1.0)


def test_deploy_cluster_verify():
    layout = mmson.deploy(seed=5)
    assert len(layout["stations"]) == len(layout["users"]) > 0
    assignment = mmson.cluster(layout, seed=5)
    covered = sum(1 + len(c["members"]) for c in assignment["clusters"])
    assert covered == len(layout["stations"])
    assert mmson.verify(assignment, layout) == []
    assert assignment["convergence_time_s"] < 15.0


def test_config_round_trip():
    text = mmson.default_config()
    assert mmson.normalize_config(text) == text
    with pytest.raises(mmson.ConfigError):
        mmson.deploy(seed=1, config="nope.key = 1\n")


def test_pipeline_and_report(tmp_path):
    summary = mmson.run_pipeline(tmp_path / "run", seed=2, config="qlearn.episodes_max = 1000\n")
    assert summary["fraction_qos_met"] == 1.0
    assert not math.isnan(summary["total_capacity"])
    assert "cluster-size histogram" in mmson.report(str(tmp_path / "run"))
    with pytest.raises(mmson.StageError, match="no artifacts"):
        (tmp_path / "empty").mkdir()
        mmson.report(str(tmp_path / "empty"))


def test_sweep(tmp_path):
    table = mmson.sweep(
        tmp_path / "sweep",
        config="sweep.sizes = 2..3\nsweep.seeds_per_size = 1\nqlearn.episodes_max = 200\n",
    )
    assert "cdpq" in table
    assert len([line for line in table.splitlines() if line.strip()[:1].isdigit()]) == 2
