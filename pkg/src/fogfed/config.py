"""Scenario files: a sectioned ``key = value`` grammar, its schema and the topology builder.

Grammar::

    # comment (also ';')
    [section]
    key = value

Ranges are written ``lo..hi``; a single value means ``lo == hi``. Per-node
quantities given as a range are drawn uniformly per node from the seeded
``topology`` stream. Every key is optional and unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from importlib import resources
from typing import Optional

from .domain import (
    AccessPoint,
    Broker,
    CloudSink,
    CostParams,
    FogLocation,
    FogNode,
    MobileDevice,
    Position,
    Topology,
    distance,
    validate_topology,
)
from .mobility import CircularMobility, LinearMobility, RandomWaypointMobility
from .rng import Streams


class ConfigError(ValueError):
    """A config that parses but violates an invariant."""


class ConfigSyntaxError(ConfigError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True)
class Span:
    lo: float
    hi: float

    def __post_init__(self):
        if self.hi < self.lo:
            raise ConfigError(f"range {self.lo}..{self.hi} is reversed")

    def draw(self, rng):
        if self.lo == self.hi:
            return self.lo
        if isinstance(self.lo, int) and isinstance(self.hi, int):
            return rng.randint(self.lo, self.hi)
        return rng.uniform(self.lo, self.hi)


def _key(kind, default, doc=""):
    return field(default=default, metadata={"kind": kind, "doc": doc})


@dataclass(frozen=True)
class TopologySection:
    arena_size: float = _key("float", 1000.0, "side of the square arena, m")
    locations: int = _key("int", 5, "fog locations, one broker each")
    nodes_per_location: Span = _key("intspan", Span(2, 5), "fog nodes per location")
    access_points: int = _key("int", 25, "APs on a regular grid")
    cloud_sinks: int = _key("int", 2, "cloud datacenters")
    broker_bandwidth: float = _key("float", 10e9, "broker-to-broker link, bit/s")
    leasing: bool = _key("bool", True, "brokers lease capacity from every peer")
    queue_capacity_factor: float = _key("float", 0.85, "location queuing capacity as a multiple of its service capacity")
    confine_load: bool = _key("bool", False, "home every access point at the lowest-id location")


@dataclass(frozen=True)
class NodeSection:
    server_count: Span = _key("intspan", Span(1, 4), "servers per node")
    service_rate: Span = _key("span", Span(8.0, 16.0), "tasks/s per server")
    price: Span = _key("span", Span(1.0, 3.0), "cost units per task")
    failure_prob: Span = _key("span", Span(0.01, 0.05), "per-node failure probability")
    power_idle: Span = _key("span", Span(50.0, 70.0), "W")
    power_busy: Span = _key("span", Span(120.0, 160.0), "W")
    max_queue: int = _key("int", 0, "queued requests per node before rejection; 0 = unbounded")


@dataclass(frozen=True)
class WorkloadSection:
    devices: int = _key("int", 200, "mobile devices")
    mean_interarrival: float = _key("float", 1.0, "s per device; inf disables arrivals")
    small_size: float = _key("float", 1.0, "service demand of a small task")
    large_size: float = _key("float", 3.0, "service demand of a large task")
    large_fraction: float = _key("float", 0.1, "share of large tasks")
    request_bits: float = _key("float", 1e6, "payload forwarded on a lease, bit")


@dataclass(frozen=True)
class ModelSection:
    beta1: float = _key("float", 1e-5, "s/m, broker-to-broker")
    beta2: float = _key("float", 1e-5, "s/m, user-to-broker")
    q_unit: float = _key("float", 0.01, "s per unit of queuing cost")
    hop_count: float = _key("float", 2.0, "access hops")
    cloud_comm_cost: float = _key("float", 0.002, "s per hop")
    cq_max: float = _key("float", 1e6, "queuing cost at saturation")
    max_price: float = _key("float", math.inf, "reject nodes priced above this")
    min_availability: float = _key("float", 0.9, "reject locations less available than this")
    energy_aware: bool = _key("bool", False, "break near-ties by least energy")
    epsilon_t: float = _key("float", 0.05, "near-tie window, s")
    policy: str = _key("choice:fra,random", "fra", "fra or uniform random feasible")
    cloud_enabled: bool = _key("bool", True, "overflow to the cloud")
    cloud_latency: float = _key("float", 1.0, "fixed cloud round trip, s")
    cloud_price: float = _key("float", 0.0, "cost units per cloud task")
    packet_error_rate: float = _key("float", 1e-3, "uplink drop probability")
    estimator_window: float = _key("float", 1.0, "load estimator window, s")
    estimator_alpha: float = _key("float", 0.3, "load estimator smoothing")
    rate_time_constant: float = _key("float", 2.0, "per-node arrival-rate decay constant, s")
    latency_budget: float = _key("float", 1.0, "per-device p95 target for supported_users, s")


@dataclass(frozen=True)
class MobilitySection:
    models: tuple = _key("list:linear,circular,random_waypoint", ("random_waypoint",), "assigned round-robin by device")
    dt: float = _key("float", 1.0, "mobility step, s")
    radio_range: float = _key("float", 250.0, "m")
    linear_speed: float = _key("float", 1.5, "m/s")
    circular_radius: float = _key("float", 100.0, "m")
    circular_period: float = _key("float", 120.0, "s per revolution")
    rwp_speed: Span = _key("span", Span(0.5, 2.0), "m/s")
    rwp_pause: float = _key("float", 2.0, "s")


@dataclass(frozen=True)
class RunSection:
    duration: float = _key("float", 500.0, "s")
    seed: int = _key("int", 1, "master seed")
    metrics_interval: float = _key("float", 5.0, "s between interval records")


@dataclass(frozen=True)
class ScenarioConfig:
    topology: TopologySection = field(default_factory=TopologySection)
    nodes: NodeSection = field(default_factory=NodeSection)
    workload: WorkloadSection = field(default_factory=WorkloadSection)
    model: ModelSection = field(default_factory=ModelSection)
    mobility: MobilitySection = field(default_factory=MobilitySection)
    run: RunSection = field(default_factory=RunSection)

    def with_value(self, section: str, key: str, value) -> "ScenarioConfig":
        sec = dataclasses.replace(getattr(self, section), **{key: value})
        cfg = dataclasses.replace(self, **{section: sec})
        check(cfg)
        return cfg

    def cost_params(self) -> CostParams:
        m = self.model
        return CostParams(m.beta1, m.beta2, m.q_unit, m.hop_count, m.cloud_comm_cost, m.cq_max)


_SECTION_TYPES = {
    "topology": TopologySection,
    "nodes": NodeSection,
    "workload": WorkloadSection,
    "model": ModelSection,
    "mobility": MobilitySection,
    "run": RunSection,
}


def _parse_number(text: str, integer: bool):
    if integer:
        try:
            return int(text)
        except ValueError:
            raise ValueError(f"expected an integer, got {text!r}") from None
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None


def _parse_value(kind: str, text: str):
    if kind == "int":
        return _parse_number(text, True)
    if kind == "float":
        return _parse_number(text, False)
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected true/false, got {text!r}")
    if kind in ("span", "intspan"):
        integer = kind == "intspan"
        lo, sep, hi = text.partition("..")
        lo = _parse_number(lo.strip(), integer)
        hi = _parse_number(hi.strip(), integer) if sep else lo
        return Span(lo, hi)
    if kind.startswith("choice:"):
        options = kind.split(":", 1)[1].split(",")
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text
    if kind.startswith("list:"):
        options = kind.split(":", 1)[1].split(",")
        items = tuple(t.strip() for t in text.split(",") if t.strip())
        if not items:
            raise ValueError("empty list")
        for t in items:
            if t not in options:
                raise ValueError(f"expected items from {options}, got {t!r}")
        return items
    raise AssertionError(kind)


def _format_value(kind: str, value) -> str:
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("span", "intspan"):
        if value.lo == value.hi:
            return repr(value.lo)
        return f"{value.lo!r}..{value.hi!r}"
    if kind.startswith("list:"):
        return ", ".join(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> ScenarioConfig:
    values: dict = {name: {} for name in _SECTION_TYPES}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigSyntaxError(lineno, f"malformed section header {raw.strip()!r}")
            section = line[1:-1].strip()
            if section not in _SECTION_TYPES:
                raise ConfigSyntaxError(lineno, f"unknown section [{section}]")
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigSyntaxError(lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, val = key.strip(), val.strip()
        if section is None:
            raise ConfigSyntaxError(lineno, f"key {key!r} outside any section")
        schema = {f.name: f for f in fields(_SECTION_TYPES[section])}
        if key not in schema:
            raise ConfigSyntaxError(lineno, f"unknown key {key!r} in [{section}]")
        if key in values[section]:
            raise ConfigSyntaxError(lineno, f"duplicate key {key!r} in [{section}]")
        try:
            values[section][key] = _parse_value(schema[key].metadata["kind"], val)
        except ValueError as exc:
            raise ConfigSyntaxError(lineno, f"{section}.{key}: {exc}") from None
    cfg = ScenarioConfig(**{name: _SECTION_TYPES[name](**kv) for name, kv in values.items()})
    check(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def bundled_config(name: str = "table2.cfg") -> ScenarioConfig:
    return parse_config(resources.files("fogfed").joinpath("data", name).read_text(encoding="utf-8"))


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical text: every key, schema order, shortest round-trip numbers."""
    out = []
    for name, typ in _SECTION_TYPES.items():
        out.append(f"[{name}]")
        sec = getattr(cfg, name)
        for f in fields(typ):
            out.append(f"{f.name} = {_format_value(f.metadata['kind'], getattr(sec, f.name))}")
        out.append("")
    return "\n".join(out)


def check(cfg: ScenarioConfig) -> None:
    """Raise ConfigError naming the first violated invariant."""
    t, n, w, m, mob, r = cfg.topology, cfg.nodes, cfg.workload, cfg.model, cfg.mobility, cfg.run
    rules = [
        (r.duration > 0, "duration must be positive"),
        (r.metrics_interval > 0, "metrics_interval must be positive"),
        (t.arena_size > 0, "arena_size must be positive"),
        (t.locations >= 1, "locations must be >= 1"),
        (t.nodes_per_location.lo >= 1, "nodes_per_location must be >= 1"),
        (t.access_points >= 1, "access_points must be >= 1"),
        (t.cloud_sinks >= 0, "cloud_sinks must be >= 0"),
        (t.broker_bandwidth > 0, "broker_bandwidth must be positive"),
        (t.queue_capacity_factor >= 0, "queue_capacity_factor must be nonnegative"),
        (n.server_count.lo >= 1, "server_count must be >= 1"),
        (n.service_rate.lo > 0, "service_rate must be positive"),
        (n.price.lo >= 0, "price must be nonnegative"),
        (0 <= n.failure_prob.lo and n.failure_prob.hi <= 1, "failure_prob must lie in [0, 1]"),
        (n.power_idle.lo >= 0, "power_idle must be nonnegative"),
        (n.power_busy.lo >= n.power_idle.hi, "power_busy must be >= power_idle"),
        (n.max_queue >= 0, "max_queue must be nonnegative"),
        (w.devices >= 0, "devices must be nonnegative"),
        (w.mean_interarrival > 0, "mean_interarrival must be positive"),
        (w.small_size > 0 and w.large_size > 0, "task sizes must be positive"),
        (0 <= w.large_fraction <= 1, "large_fraction must lie in [0, 1]"),
        (w.request_bits >= 0, "request_bits must be nonnegative"),
        (0 <= m.min_availability <= 1, "min_availability must lie in [0, 1]"),
        (m.epsilon_t >= 0, "epsilon_t must be nonnegative"),
        (m.cq_max > 0, "cq_max must be positive"),
        (min(m.beta1, m.beta2, m.q_unit, m.hop_count, m.cloud_comm_cost) >= 0, "cost parameters must be nonnegative"),
        (m.cloud_latency >= 0, "cloud_latency must be nonnegative"),
        (0 <= m.packet_error_rate <= 1, "packet_error_rate must lie in [0, 1]"),
        (m.estimator_window > 0, "estimator_window must be positive"),
        (0 < m.estimator_alpha <= 1, "estimator_alpha must lie in (0, 1]"),
        (m.rate_time_constant > 0, "rate_time_constant must be positive"),
        (m.latency_budget > 0, "latency_budget must be positive"),
        (not m.cloud_enabled or t.cloud_sinks >= 1, "cloud_enabled needs at least one cloud sink"),
        (mob.dt > 0, "mobility dt must be positive"),
        (mob.radio_range > 0, "radio_range must be positive"),
        (mob.linear_speed >= 0, "linear_speed must be nonnegative"),
        (0 < mob.circular_radius < t.arena_size / 2, "circular_radius must lie in (0, arena_size/2)"),
        (mob.circular_period > 0, "circular_period must be positive"),
        (mob.rwp_speed.lo >= 0, "rwp_speed must be nonnegative"),
        (mob.rwp_pause >= 0, "rwp_pause must be nonnegative"),
    ]
    for ok, msg in rules:
        if not ok:
            raise ConfigError(msg)


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    topology: Topology
    params: CostParams
    mobility: dict  # device id -> model
    ap_location: dict  # ap id -> location id

    @property
    def duration(self) -> float:
        return self.config.run.duration


def _broker_positions(count: int, arena: float) -> list[Position]:
    c = arena / 2
    if count == 1:
        return [Position(c, c)]
    r = arena / 3
    return [
        Position(c + r * math.cos(math.pi / 2 + 2 * math.pi * i / count), c + r * math.sin(math.pi / 2 + 2 * math.pi * i / count))
        for i in range(count)
    ]


def _grid(count: int, arena: float) -> list[Position]:
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    return [
        Position((i % cols + 0.5) * arena / cols, (i // cols + 0.5) * arena / rows)
        for i in range(count)
    ]


def build_scenario(cfg: ScenarioConfig, seed: Optional[int] = None) -> Scenario:
    """Instantiate the topology described by ``cfg``; per-node draws come from ``seed``."""
    seed = cfg.run.seed if seed is None else seed
    streams = Streams(seed)
    rng = streams.get("topology")
    t, ns = cfg.topology, cfg.nodes
    arena = t.arena_size
    next_id = iter(range(1, 1 << 62))

    broker_pos = _broker_positions(t.locations, arena)
    broker_ids = [next(next_id) for _ in range(t.locations)]
    nodes, locations = [], []
    for loc, bid in enumerate(broker_ids):
        count = t.nodes_per_location.draw(rng)
        members = []
        for _ in range(count):
            idle = ns.power_idle.draw(rng)
            busy = max(ns.power_busy.draw(rng), idle)
            node = FogNode(
                id=next(next_id),
                location_id=loc,
                server_count=ns.server_count.draw(rng),
                service_rate=ns.service_rate.draw(rng),
                price=ns.price.draw(rng),
                failure_prob=ns.failure_prob.draw(rng),
                power_idle=idle,
                power_busy=busy,
                max_queue=ns.max_queue,
            )
            members.append(node)
        nodes.extend(members)
        cap = sum(x.capacity for x in members)
        locations.append(FogLocation(loc, bid, tuple(x.id for x in members), t.queue_capacity_factor * cap))

    brokers = []
    for loc, (bid, pos) in enumerate(zip(broker_ids, broker_pos)):
        leased = frozenset(b for b in broker_ids if b != bid) if t.leasing else frozenset()
        brokers.append(Broker(bid, loc, pos, leased, t.broker_bandwidth))

    aps, ap_location = [], {}
    for pos in _grid(t.access_points, arena):
        if t.confine_load:
            loc = 0
        else:
            loc = min(range(t.locations), key=lambda i: (distance(pos, broker_pos[i]), broker_ids[i]))
        ap = AccessPoint(next(next_id), pos, loc)
        aps.append(ap)
        ap_location[ap.id] = loc

    corners = [Position(0.0, 0.0), Position(arena, arena), Position(arena, 0.0), Position(0.0, arena)]
    clouds = [CloudSink(next(next_id), corners[i % 4], cfg.model.cloud_latency) for i in range(t.cloud_sinks)]

    place = streams.get("placement")
    mob = cfg.mobility
    rate = 0.0 if math.isinf(cfg.workload.mean_interarrival) else 1.0 / cfg.workload.mean_interarrival
    devices, models = [], {}
    for i in range(cfg.workload.devices):
        did = next(next_id)
        pos = Position(place.uniform(0, arena), place.uniform(0, arena))
        kind = mob.models[i % len(mob.models)]
        if kind == "linear":
            heading = place.uniform(0, 2 * math.pi)
            model = LinearMobility((mob.linear_speed * math.cos(heading), mob.linear_speed * math.sin(heading)), arena)
        elif kind == "circular":
            r = mob.circular_radius
            center = Position(min(max(pos.x, r), arena - r), min(max(pos.y, r), arena - r))
            model = CircularMobility(center, r, 2 * math.pi / mob.circular_period)
        else:
            model = RandomWaypointMobility((mob.rwp_speed.lo, mob.rwp_speed.hi), mob.rwp_pause, arena)
        devices.append(MobileDevice(did, pos, rate, model, mob.radio_range))
        models[did] = model

    topo = Topology(
        arena_size=arena,
        devices=tuple(devices),
        fog_nodes=tuple(nodes),
        brokers=tuple(brokers),
        locations=tuple(locations),
        access_points=tuple(aps),
        cloud_sinks=tuple(clouds),
    )
    problems = validate_topology(topo, (t.nodes_per_location.lo, t.nodes_per_location.hi))
    if problems:
        raise ConfigError("; ".join(problems))
    return Scenario(cfg, topo, cfg.cost_params(), models, ap_location)
