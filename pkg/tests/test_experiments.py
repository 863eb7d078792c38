import math

import pytest

from fogfed import build_scenario
from fogfed.experiments import apply_param, baseline_config, compare_baseline, supported_users, sweep
from fogfed.report import read_csv

from conftest import quick_config


def test_sweep_cross_product(tmp_path):
    cfg = quick_config(devices=5, duration=20.0)
    res = sweep(cfg, "interarrival", [0.5, 1.0, 1.5], [1, 2, 3, 4, 5], tmp_path)
    assert len(res.rows) == 15
    header, rows = read_csv(tmp_path / "summary.csv")
    assert header[:2] == ["parameter", "value"]
    assert len(rows) == 15
    assert (tmp_path / "interarrival=0.5" / "seed=3" / "latency.csv").exists()


def test_sweep_rejects_bad_input():
    cfg = quick_config()
    with pytest.raises(ValueError):
        sweep(cfg, "interarrival", [], [1])
    with pytest.raises(ValueError):
        apply_param(cfg, "nonsense", 1)


def test_sweep_parallel_matches_serial():
    cfg = quick_config(devices=5, duration=20.0)
    a = sweep(cfg, "devices", [3, 6], [1], jobs=1)
    b = sweep(cfg, "devices", [3, 6], [1], jobs=2)
    assert a.rows == b.rows


def test_supported_users_infinite_budget():
    assert supported_users(quick_config(), 1, math.inf, 300).supported == 300


def test_supported_users_tiny_budget():
    res = supported_users(quick_config(duration=20.0), 1, 1e-9, 16)
    assert res.supported == 0


def test_compare_infinite_budget(tmp_path):
    rep = compare_baseline(quick_config(devices=40), math.inf, [1, 2], tmp_path)
    assert all(r.federated == r.single == 40 for r in rep.rows)
    _, rows = read_csv(tmp_path / "compare.csv")
    assert len(rows) == 2


def test_compare_errors():
    cfg = quick_config()
    with pytest.raises(ValueError):
        compare_baseline(cfg, 0.0, [1])
    with pytest.raises(ValueError):
        compare_baseline(cfg.with_value("topology", "locations", 1), 1.0, [1])


def test_baseline_arms():
    cfg = quick_config()
    single = build_scenario(baseline_config(cfg, "single"))
    assert set(single.ap_location.values()) == {0}
    assert all(not b.leased_brokers for b in single.topology.brokers)
    isolated = build_scenario(baseline_config(cfg, "isolated"))
    assert len(set(isolated.ap_location.values())) == cfg.topology.locations
    assert all(not b.leased_brokers for b in isolated.topology.brokers)
    with pytest.raises(ValueError):
        baseline_config(cfg, "nope")


def test_compare_writes_baseline_column(tmp_path):
    compare_baseline(quick_config(devices=8), math.inf, [1], tmp_path, baseline="isolated")
    header, rows = read_csv(tmp_path / "compare.csv")
    assert rows[0][header.index("baseline")] == "isolated"
