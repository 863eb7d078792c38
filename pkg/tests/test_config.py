import pytest

from fogfed import build_scenario, bundled_config, dump_config, load_config, parse_config
from fogfed.config import ConfigError, ConfigSyntaxError, Span
from fogfed.mobility import RandomWaypointMobility


def test_bundled_reference_scenario():
    cfg = bundled_config()
    assert cfg.topology.locations == 5
    assert cfg.topology.nodes_per_location == Span(2, 5)
    assert cfg.model.packet_error_rate == 1e-3
    assert cfg.run.duration == 500
    sc = build_scenario(cfg)
    assert all(2 <= len(loc.node_ids) <= 5 for loc in sc.topology.locations)
    assert len(sc.topology.devices) == 200


def test_round_trip(tmp_path):
    cfg = bundled_config()
    text = dump_config(cfg)
    assert parse_config(text) == cfg
    p = tmp_path / "x.cfg"
    p.write_text(text)
    assert load_config(p) == cfg
    assert dump_config(load_config(p)) == text


def test_missing_mobility_defaults_to_random_waypoint():
    cfg = parse_config("[run]\nduration = 50\n")
    assert cfg.mobility.models == ("random_waypoint",)
    sc = build_scenario(cfg)
    assert all(isinstance(m, RandomWaypointMobility) for m in sc.mobility.values())


def test_zero_duration():
    with pytest.raises(ConfigError, match="duration must be positive"):
        parse_config("[run]\nduration = 0\n")


@pytest.mark.parametrize(
    "text, line",
    [
        ("[bogus]\n", 1),
        ("[run]\nseed = 1\nnope = 2\n", 3),
        ("[run]\nseed = 1\nseed = 2\n", 3),
        ("seed = 1\n", 1),
        ("[run]\nseed = x\n", 2),
        ("[run]\n\n# note\nseed\n", 4),
        ("[nodes]\nprice = 3..1\n", 2),
    ],
)
def test_syntax_errors_carry_line(text, line):
    with pytest.raises(ConfigSyntaxError) as err:
        parse_config(text)
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}:")


def test_span_draw():
    import random

    rng = random.Random(1)
    assert all(2 <= Span(2, 5).draw(rng) <= 5 for _ in range(100))
    assert isinstance(Span(2, 5).draw(rng), int)
    assert 0.5 <= Span(0.5, 0.6).draw(rng) <= 0.6


def test_with_value_rechecks():
    with pytest.raises(ConfigError):
        bundled_config().with_value("run", "duration", -1.0)


def test_scenario_is_seeded():
    cfg = bundled_config()
    a, b = build_scenario(cfg, 1), build_scenario(cfg, 1)
    assert a.topology.fog_nodes == b.topology.fog_nodes
    assert build_scenario(cfg, 2).topology.devices != a.topology.devices
