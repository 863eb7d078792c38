"""Entities, parameters and the topology graph shared by every other module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence


class UnknownIdError(KeyError):
    pass


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def in_arena(self, size: float) -> bool:
        return 0.0 <= self.x <= size and 0.0 <= self.y <= size


@dataclass(frozen=True)
class FogNode:
    id: int
    location_id: int
    server_count: int
    service_rate: float  # tasks/s per server
    price: float
    failure_prob: float
    power_idle: float
    power_busy: float
    max_queue: int = 0  # 0 means unbounded

    @property
    def capacity(self) -> float:
        return self.server_count * self.service_rate


@dataclass(frozen=True)
class Broker:
    id: int
    location_id: int
    position: Position
    leased_brokers: frozenset = frozenset()
    link_bandwidth: float = 10e9  # bits/s


@dataclass(frozen=True)
class FogLocation:
    id: int
    broker_id: int
    node_ids: tuple
    queue_capacity: float  # tasks/s


@dataclass(frozen=True)
class AccessPoint:
    id: int
    position: Position
    location_id: int


@dataclass(frozen=True)
class CloudSink:
    id: int
    position: Position
    latency: float  # seconds, fixed


@dataclass(frozen=True)
class MobileDevice:
    id: int
    position: Position
    arrival_rate: float  # tasks/s
    mobility: object = None
    radio_range: float = 250.0


@dataclass(frozen=True)
class CostParams:
    beta1: float = 1e-5  # s/m, broker-to-broker
    beta2: float = 1e-5  # s/m, user-to-broker
    q_unit: float = 0.01
    hop_count: float = 2.0
    cloud_comm_cost: float = 0.002  # s/hop
    cq_max: float = 1e6

    def __post_init__(self):
        for name in ("beta1", "beta2", "q_unit", "hop_count", "cloud_comm_cost"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not self.cq_max > 0:
            raise ValueError("cq_max must be positive")


@dataclass(frozen=True)
class Request:
    id: int
    device_id: int
    size: float
    created_at: float


@dataclass(frozen=True)
class Topology:
    arena_size: float
    devices: tuple
    fog_nodes: tuple
    brokers: tuple
    locations: tuple
    access_points: tuple = ()
    cloud_sinks: tuple = ()
    # unordered broker pairs with a direct link; None means full mesh
    broker_links: Optional[frozenset] = None
    # (a, b) -> seconds; overrides the distance-derived latency of a link
    edge_latency: dict = field(default_factory=dict)

    def __post_init__(self):
        index = {}
        for group in (self.devices, self.fog_nodes, self.brokers, self.access_points, self.cloud_sinks):
            for item in group:
                index.setdefault(item.id, item)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_locations", {loc.id: loc for loc in self.locations})

    def get(self, id_):
        try:
            return self._index[id_]
        except KeyError:
            raise UnknownIdError(id_) from None

    def location(self, location_id):
        try:
            return self._locations[location_id]
        except KeyError:
            raise UnknownIdError(location_id) from None

    def broker_of(self, location_id) -> Broker:
        return self.get(self.location(location_id).broker_id)

    def nodes_at(self, location_id) -> list:
        return [self.get(n) for n in self.location(location_id).node_ids]

    def link_latency(self, a: int, b: int) -> Optional[float]:
        if (a, b) in self.edge_latency:
            return self.edge_latency[(a, b)]
        return self.edge_latency.get((b, a))


def distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def _all_ids(topo: Topology) -> Iterable[int]:
    for group in (topo.devices, topo.fog_nodes, topo.brokers, topo.access_points, topo.cloud_sinks):
        for item in group:
            yield item.id


def validate_topology(topo: Topology, node_bounds: Sequence = (1, None)) -> list[str]:
    """Return every structural violation found in ``topo``; an empty list means ok.

    ``node_bounds`` is an inclusive (min, max) on fog nodes per location, with
    ``None`` for an open upper end.
    """
    problems = []
    seen = set()
    for id_ in _all_ids(topo):
        if id_ in seen:
            problems.append(f"duplicate id {id_}")
        seen.add(id_)

    brokers_by_loc: dict = {}
    for b in topo.brokers:
        brokers_by_loc.setdefault(b.location_id, []).append(b)
        if b.id in b.leased_brokers:
            problems.append(f"broker {b.id} leases from itself")
        for a in sorted(b.leased_brokers):
            if not any(o.id == a for o in topo.brokers):
                problems.append(f"broker {b.id} leases from unknown broker {a}")
        if not b.position.in_arena(topo.arena_size):
            problems.append(f"broker {b.id} outside arena")

    lo, hi = node_bounds
    node_ids = {n.id for n in topo.fog_nodes}
    loc_ids = set()
    for loc in topo.locations:
        if loc.id in loc_ids:
            problems.append(f"duplicate location id {loc.id}")
        loc_ids.add(loc.id)
        found = brokers_by_loc.get(loc.id, [])
        if not found:
            problems.append(f"missing broker at location {loc.id}")
        elif len(found) > 1:
            problems.append(f"location {loc.id} has {len(found)} brokers")
        elif found[0].id != loc.broker_id:
            problems.append(f"location {loc.id} names broker {loc.broker_id} but broker {found[0].id} serves it")
        n = len(loc.node_ids)
        if n < lo or (hi is not None and n > hi):
            problems.append(f"location {loc.id} has {n} nodes, outside [{lo}, {hi}]")
        if loc.queue_capacity < 0:
            problems.append(f"location {loc.id} has negative queue capacity")
        for nid in loc.node_ids:
            if nid not in node_ids:
                problems.append(f"location {loc.id} references unknown node {nid}")
    for b in topo.brokers:
        if b.location_id not in loc_ids:
            problems.append(f"broker {b.id} references unknown location {b.location_id}")

    for n in topo.fog_nodes:
        if n.location_id not in loc_ids:
            problems.append(f"node {n.id} references unknown location {n.location_id}")
        if n.server_count < 1:
            problems.append(f"node {n.id} server_count must be >= 1")
        if not n.service_rate > 0:
            problems.append(f"node {n.id} service_rate must be positive")
        if n.price < 0:
            problems.append(f"node {n.id} price must be nonnegative")
        if not 0.0 <= n.failure_prob <= 1.0:
            problems.append(f"node {n.id} failure_prob outside [0, 1]")
        if not n.power_busy >= n.power_idle >= 0:
            problems.append(f"node {n.id} power profile must satisfy busy >= idle >= 0")

    for d in topo.devices:
        if d.arrival_rate < 0:
            problems.append(f"device {d.id} has negative arrival rate")
        if not d.radio_range > 0:
            problems.append(f"device {d.id} radio range must be positive")
        if not d.position.in_arena(topo.arena_size):
            problems.append(f"device {d.id} outside arena")
    for ap in topo.access_points:
        if ap.location_id not in loc_ids:
            problems.append(f"access point {ap.id} references unknown location {ap.location_id}")

    if topo.brokers and not _brokers_connected(topo):
        problems.append("broker graph is not connected")
    return problems


def _brokers_connected(topo: Topology) -> bool:
    ids = [b.id for b in topo.brokers]
    if topo.broker_links is None:
        return True
    adj = {i: set() for i in ids}
    for a, b in topo.broker_links:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    stack, seen = [ids[0]], {ids[0]}
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(ids)


def nearest_access_point(device: MobileDevice, aps: Sequence[AccessPoint], position: Optional[Position] = None) -> Optional[int]:
    """Closest access point within the device's radio range; lowest id wins a tie.

    ``position`` overrides ``device.position`` for devices that have moved.
    """
    return _nearest(position or device.position, device.radio_range, aps)


def _nearest(position: Position, radio_range: float, aps: Sequence[AccessPoint]) -> Optional[int]:
    # squared distances: same ordering and same ties as the metric itself
    x, y = position.x, position.y
    r2 = radio_range * radio_range
    best = None
    best_d = math.inf
    for ap in aps:
        dx = ap.position.x - x
        dy = ap.position.y - y
        d = dx * dx + dy * dy
        if d > r2:
            continue
        if d < best_d or (d == best_d and ap.id < best):
            best, best_d = ap.id, d
    return best
