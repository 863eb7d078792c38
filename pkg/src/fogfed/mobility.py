"""Linear, circular and random-waypoint movement plus access-point handover."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .domain import AccessPoint, Position, _nearest, distance


@dataclass(frozen=True)
class LinearMobility:
    velocity: tuple  # (vx, vy) m/s
    arena: float


@dataclass(frozen=True)
class CircularMobility:
    center: Position
    radius: float
    angular_velocity: float  # rad/s

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class RandomWaypointMobility:
    speed: tuple  # (min, max) m/s
    pause: float
    arena: float

    def __post_init__(self):
        lo, hi = self.speed
        if lo < 0 or hi < lo:
            raise ValueError("speed range must satisfy 0 <= min <= max")
        if not self.arena > 0:
            raise ValueError("arena must be positive")


@dataclass(frozen=True)
class MobilityState:
    position: Position
    # linear: current (vx, vy); circular: angle; random waypoint: (waypoint, speed, pause_left)
    phase: object = None


def initial_state(position: Position, model, rng) -> MobilityState:
    if isinstance(model, LinearMobility):
        return MobilityState(position, tuple(model.velocity))
    if isinstance(model, CircularMobility):
        angle = math.atan2(position.y - model.center.y, position.x - model.center.x)
        return MobilityState(_on_circle(model, angle), angle)
    if isinstance(model, RandomWaypointMobility):
        return MobilityState(position, (_draw_waypoint(model, rng), rng.uniform(*model.speed), 0.0))
    raise TypeError(f"unknown mobility model {model!r}")


def _on_circle(model: CircularMobility, angle: float) -> Position:
    return Position(model.center.x + model.radius * math.cos(angle), model.center.y + model.radius * math.sin(angle))


def _draw_waypoint(model: RandomWaypointMobility, rng) -> Position:
    return Position(rng.uniform(0.0, model.arena), rng.uniform(0.0, model.arena))


def _reflect(x: float, v: float, size: float) -> tuple[float, float]:
    # fold x back into [0, size], flipping the velocity once per wall hit
    while x < 0.0 or x > size:
        if x < 0.0:
            x = -x
        else:
            x = 2.0 * size - x
        v = -v
    return x, v


def advance(state: MobilityState, model, dt: float, rng=None) -> MobilityState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if isinstance(model, LinearMobility):
        vx, vy = state.phase
        x, vx = _reflect(state.position.x + vx * dt, vx, model.arena)
        y, vy = _reflect(state.position.y + vy * dt, vy, model.arena)
        return MobilityState(Position(x, y), (vx, vy))
    if isinstance(model, CircularMobility):
        angle = state.phase + model.angular_velocity * dt
        return MobilityState(_on_circle(model, angle), angle)
    if isinstance(model, RandomWaypointMobility):
        return _advance_waypoint(state, model, dt, rng)
    raise TypeError(f"unknown mobility model {model!r}")


def _advance_waypoint(state, model, dt, rng):
    pos = state.position
    target, speed, pause_left = state.phase
    if model.speed[1] <= 0:
        return state
    left = dt
    while left > 0:
        if pause_left > 0:
            used = min(pause_left, left)
            pause_left -= used
            left -= used
            continue
        if speed <= 0:
            speed = rng.uniform(*model.speed)
            continue
        gap = distance(pos, target)
        if gap <= speed * left:
            left -= gap / speed
            pos = target
            target, speed, pause_left = _draw_waypoint(model, rng), rng.uniform(*model.speed), model.pause
        else:
            f = speed * left / gap
            a = model.arena
            pos = Position(min(max(pos.x + (target.x - pos.x) * f, 0.0), a), min(max(pos.y + (target.y - pos.y) * f, 0.0), a))
            left = 0.0
    return MobilityState(pos, (target, speed, pause_left))


@dataclass(frozen=True)
class Switch:
    from_ap: Optional[int]
    to_ap: int


@dataclass(frozen=True)
class Lost:
    from_ap: int


def handover(device, previous_ap: Optional[int], aps: Sequence[AccessPoint], position: Optional[Position] = None):
    """Re-associate ``device`` to the nearest in-range AP.

    Returns ``(ap_id, event)`` where ``event`` is ``None``, ``Switch`` or ``Lost``.
    ``position`` overrides the device's stored position.
    """
    ap = _nearest(position or device.position, device.radio_range, aps)
    if ap == previous_ap:
        return ap, None
    if ap is None:
        return None, Lost(previous_ap)
    return ap, Switch(previous_ap, ap)
