import math
import random

import pytest

from fogfed.domain import AccessPoint, MobileDevice, Position
from fogfed.mobility import (
    CircularMobility,
    LinearMobility,
    Lost,
    RandomWaypointMobility,
    Switch,
    advance,
    handover,
    initial_state,
)


def test_linear_uniform_motion():
    m = LinearMobility((1.0, 0.0), 1000.0)
    s = advance(initial_state(Position(0, 0), m, None), m, 10)
    assert s.position == Position(10.0, 0.0)


def test_linear_reflection():
    m = LinearMobility((3.0, -4.0), 100.0)
    s = initial_state(Position(95.0, 5.0), m, None)
    s = advance(s, m, 10)
    assert s.position == Position(75.0, 35.0)
    assert s.phase == (-3.0, 4.0)
    for _ in range(500):
        s = advance(s, m, 7.3)
        assert math.hypot(*s.phase) == 5.0
        assert 0 <= s.position.x <= 100 and 0 <= s.position.y <= 100


def test_circular_full_period():
    m = CircularMobility(Position(50, 50), 5.0, 2 * math.pi / 100)
    start = initial_state(Position(55, 50), m, None)
    s = start
    for _ in range(100):
        s = advance(s, m, 1.0)
        assert math.isclose(math.hypot(s.position.x - 50, s.position.y - 50), 5.0, rel_tol=1e-9)
    assert math.isclose(s.position.x, start.position.x, rel_tol=1e-6)
    assert abs(s.position.y - start.position.y) <= 1e-6 * 50


def test_circular_rejects_bad_radius():
    with pytest.raises(ValueError):
        CircularMobility(Position(0, 0), 0.0, 1.0)


@pytest.mark.parametrize("seed", range(3))
def test_random_waypoint_confined(seed):
    rng = random.Random(seed)
    m = RandomWaypointMobility((0.5, 20.0), 1.0, 200.0)
    s = initial_state(Position(100, 100), m, rng)
    for _ in range(10_000):
        s = advance(s, m, 1.0, rng)
        assert 0 <= s.position.x <= 200 and 0 <= s.position.y <= 200


def test_random_waypoint_zero_speed_stays():
    rng = random.Random(1)
    m = RandomWaypointMobility((0.0, 0.0), 0.0, 100.0)
    s = initial_state(Position(10, 10), m, rng)
    assert advance(s, m, 5.0, rng).position == Position(10, 10)


def test_advance_rejects_nonpositive_dt():
    m = LinearMobility((1, 0), 10)
    with pytest.raises(ValueError):
        advance(initial_state(Position(0, 0), m, None), m, 0)


def test_handover_events():
    aps = [AccessPoint(1, Position(0, 0), 0), AccessPoint(2, Position(400, 0), 1)]
    dev = MobileDevice(9, Position(50, 0), 0.0)
    assert handover(dev, None, aps) == (1, Switch(None, 1))
    assert handover(dev, 1, aps) == (1, None)
    assert handover(dev, 1, aps, Position(350, 0)) == (2, Switch(1, 2))
    assert handover(dev, 2, aps, Position(200, 300)) == (None, Lost(2))
