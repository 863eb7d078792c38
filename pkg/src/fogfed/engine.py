"""Deterministic discrete-event simulation of a federated fog deployment."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import analytic
from .config import Scenario, ScenarioConfig, build_scenario
from .domain import FogNode, MobileDevice, Request, distance
from .federation import (
    CLOUD,
    LEASED,
    LOCAL,
    AllocationDecision,
    NoFeasibleNodeError,
    Candidate,
    Constraints,
    access_delay,
    availability,
    fra_allocate,
    lease_candidates,
    leased_response_time,
    local_response_time,
    random_feasible,
    response_time,
)
from .mobility import Switch, advance, handover, initial_state
from .rng import Streams

# event kinds, ordered as they are reported
ARRIVAL = "request-arrival"
NODE_ARRIVAL = "node-arrival"
COMPLETE = "service-complete"
MOBILITY = "mobility-tick"
METRICS = "metrics-tick"
LEASE = "lease-refresh"


class SimulationError(RuntimeError):
    """Internal consistency failure (event ordering or request accounting)."""


@dataclass(frozen=True)
class Event:
    timestamp: float
    sequence: int
    kind: str


@dataclass
class NodeRuntime:
    node: FogNode
    busy_servers: int = 0
    queue: deque = field(default_factory=deque)
    busy_time_accum: float = 0.0  # server-seconds since the last metrics tick
    energy_accum: float = 0.0  # joules up to the last metrics tick
    last_change: float = 0.0
    completed: int = 0
    latency_sum: float = 0.0
    rate: float = 0.0  # exponentially decayed assigned work, unit tasks/s
    rate_t: float = 0.0

    def touch(self, now: float) -> None:
        self.busy_time_accum += self.busy_servers * (now - self.last_change)
        self.last_change = now

    def in_system(self) -> int:
        return self.busy_servers + len(self.queue)


class LoadEstimator:
    """Per-location EWMA of arrival rate over fixed windows aligned at multiples of ``window``."""

    def __init__(self, window: float, alpha: float):
        if not window > 0 or not 0 < alpha <= 1:
            raise ValueError("window must be positive and alpha in (0, 1]")
        self.window = window
        self.alpha = alpha
        self._state: dict = {}  # location -> [window index, count, ewma]

    def _roll(self, location, now: float) -> list:
        st = self._state.setdefault(location, [0, 0, 0.0])
        idx = int(now // self.window)
        if idx > st[0]:
            a = self.alpha
            st[2] = a * st[1] / self.window + (1 - a) * st[2]
            gap = idx - st[0] - 1
            if gap:
                st[2] *= (1 - a) ** gap
            st[0], st[1] = idx, 0
        return st

    def record(self, location, now: float, count: int = 1) -> None:
        self._roll(location, now)[1] += count

    def estimate(self, location, now: float) -> float:
        return self._roll(location, now)[2]


def estimate_load(estimator: LoadEstimator, location, now: float) -> float:
    return estimator.estimate(location, now)


def generate_arrivals(device: MobileDevice, rng, horizon: float = math.inf) -> Iterator[float]:
    """Exponential interarrival times at the device's rate, up to ``horizon``."""
    if device.arrival_rate <= 0:
        return
    t = rng.expovariate(device.arrival_rate)
    while t <= horizon:
        yield t
        t += rng.expovariate(device.arrival_rate)


def apply_packet_loss(rng, per: float) -> bool:
    """True when the packet is delivered."""
    if not 0.0 <= per <= 1.0:
        raise ValueError("packet error rate must lie in [0, 1]")
    return rng.random() >= per


def service_request(rt: NodeRuntime, req: Request, now: float, rng, tag=None) -> Optional[float]:
    """Admit ``req`` at ``now``: start service and return the completion time, or queue it.

    Returns ``None`` when queued; ``tag`` rides along in the queue. Raises
    ``OverflowError`` when a finite queue is full.
    """
    node = rt.node
    if rt.busy_servers < node.server_count:
        rt.touch(now)
        rt.busy_servers += 1
        return now + rng.expovariate(node.service_rate / req.size)
    if node.max_queue and len(rt.queue) >= node.max_queue:
        raise OverflowError(f"node {node.id} queue full")
    rt.queue.append((req, tag))
    return None


def account_energy(rt: NodeRuntime, interval: float) -> float:
    """Joules drawn over ``interval`` given the busy server-seconds accumulated in it."""
    if not interval > 0:
        raise ValueError("interval must be positive")
    node = rt.node
    busy = min(rt.busy_time_accum / node.server_count, interval)
    return node.power_idle * (interval - busy) + node.power_busy * busy


@dataclass(frozen=True)
class MetricsRecord:
    t: float
    node_id: int
    utilization: float
    queue_len: int
    completed: int
    mean_latency: Optional[float]
    energy: float


@dataclass(frozen=True)
class LatencySample:
    request_id: int
    created_at: float
    completed_at: float
    latency: float
    node_id: int
    kind: str


@dataclass(frozen=True)
class RunSummary:
    seed: int
    duration_s: float
    devices: int
    generated: int
    completed: int
    dropped: int
    dropped_loss: int
    dropped_coverage: int
    rejected: int
    in_flight: int
    local: int
    leased: int
    cloud: int
    mean_latency_s: float
    p95_latency_s: float
    total_energy_j: float
    energy_cv: float
    mean_utilization: float
    handovers: int
    supported_users: int


@dataclass
class MetricsReport:
    records: list = field(default_factory=list)
    latencies: list = field(default_factory=list)
    summary: Optional[RunSummary] = None
    trace: Optional[list] = None


def p95(values) -> float:
    """Nearest-rank 95th percentile; 0 for no samples."""
    if not values:
        return 0.0
    s = sorted(values)
    return s[max(math.ceil(0.95 * len(s)) - 1, 0)]


def coefficient_of_variation(values) -> float:
    n = len(values)
    if n == 0:
        return 0.0
    mean = sum(values) / n
    if mean == 0:
        return 0.0
    var = sum((v - mean) ** 2 for v in values) / n
    return math.sqrt(var) / mean


class Simulation:
    def __init__(self, scenario: Scenario, seed: Optional[int] = None, trace: bool = False):
        self.sc = scenario
        cfg = scenario.config
        self.cfg = cfg
        self.seed = cfg.run.seed if seed is None else seed
        self.streams = Streams(self.seed)
        self.topo = scenario.topology
        self.params = scenario.params
        m = cfg.model
        self.cons = Constraints(m.max_price, m.min_availability, m.energy_aware, m.epsilon_t)
        self.horizon = cfg.run.duration
        self.trace = [] if trace else None

        self._heap: list = []
        self._seq = 0
        self.now = 0.0

        self.runtimes = {n.id: NodeRuntime(n) for n in self.topo.fog_nodes}
        self.loc_nodes = {loc.id: [self.runtimes[i] for i in loc.node_ids] for loc in self.topo.locations}
        self.loc_avail = {
            loc.id: availability([self.runtimes[i].node.failure_prob for i in loc.node_ids]) for loc in self.topo.locations
        }
        self.loc_capacity = {loc.id: sum(rt.node.capacity for rt in self.loc_nodes[loc.id]) for loc in self.topo.locations}
        self.brokers = {b.location_id: b for b in self.topo.brokers}
        self.offered = LoadEstimator(m.estimator_window, m.estimator_alpha)
        self.executed = LoadEstimator(m.estimator_window, m.estimator_alpha)
        self.leases = {}
        self._refresh_leases(0.0)

        self.service_rng = self.streams.get("service")
        self.loss_rng = self.streams.get("loss")
        self.admit_rng = self.streams.get("admission")
        self.policy_rng = self.streams.get("policy")

        self.devices = {d.id: d for d in self.topo.devices}
        self.dev_state = {}
        self.dev_ap = {}
        self.dev_rng = {}
        self.dev_mob_rng = {}
        aps = self.topo.access_points
        for d in self.topo.devices:
            mrng = self.streams.get(f"mobility/{d.id}")
            self.dev_mob_rng[d.id] = mrng
            self.dev_state[d.id] = initial_state(d.position, self.sc.mobility[d.id], mrng)
            self.dev_ap[d.id], _ = handover(d, None, aps, self.dev_state[d.id].position)
            self.dev_rng[d.id] = self.streams.get(f"arrivals/{d.id}")

        self.cloud = min(self.topo.cloud_sinks, key=lambda c: c.id) if self.topo.cloud_sinks and m.cloud_enabled else None
        self.next_request = 0
        self.counts = dict.fromkeys(
            ("generated", "completed", "dropped_loss", "dropped_coverage", "rejected", "local", "leased", "cloud", "handovers"), 0
        )
        self.in_flight = 0
        self.report = MetricsReport(trace=self.trace)
        self._last_tick = 0.0
        self._per_device = {}

    # event queue

    def schedule(self, t: float, kind: str, a=None, b=None) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (t, self._seq, kind, a, b))

    # estimators

    def _node_rate(self, rt: NodeRuntime, now: float) -> float:
        tau = self.cfg.model.rate_time_constant
        return rt.rate * math.exp(-(now - rt.rate_t) / tau)

    def _bump_rate(self, rt: NodeRuntime, now: float, work: float) -> None:
        rt.rate = self._node_rate(rt, now) + work / self.cfg.model.rate_time_constant
        rt.rate_t = now

    def _predicted_node_time(self, rt: NodeRuntime, now: float) -> Optional[float]:
        node = rt.node
        lam = self._node_rate(rt, now)
        try:
            t = analytic.avg_waiting_time(node.server_count, lam, node.service_rate)
        except analytic.InstabilityError:
            return None
        ahead = rt.in_system() - node.server_count + 1
        if ahead > 0:
            t += ahead / node.capacity
        return t

    def _refresh_leases(self, now: float) -> None:
        q = {}
        m = self.cfg.model
        for loc in self.topo.locations:
            lam = self.executed.estimate(loc.id, now)
            acc = analytic.acceptance_fraction(loc.queue_capacity, lam)
            theta = min(analytic.execution_rate(lam, acc), self.loc_capacity[loc.id])
            q[loc.id] = analytic.queuing_cost(theta, self.loc_capacity[loc.id], m.q_unit, m.cq_max)
        self.leases = {b.id: lease_candidates(b, self.topo, self.params, q) for b in self.topo.brokers}

    # decisions

    def _energy_snapshot(self, node_ids, now):
        snap = {}
        for nid in node_ids:
            rt = self.runtimes.get(nid)
            if rt is None:
                continue
            rt.touch(now)
            span = now - self._last_tick
            snap[nid] = rt.energy_accum + (account_energy(rt, span) if span > 0 else 0.0)
        return snap

    def decide(self, req: Request, home: int, pos, now: float) -> AllocationDecision:
        broker = self.brokers[home]
        d_bu = distance(pos, broker.position)
        access = access_delay(d_bu, self.params)

        local = []
        lam = self.offered.estimate(home, now)
        acc = analytic.acceptance_fraction(self.sc.topology.location(home).queue_capacity, lam)
        if acc >= 1.0 or self.admit_rng.random() < acc:
            avail = self.loc_avail[home]
            for rt in self.loc_nodes[home]:
                t_x = self._predicted_node_time(rt, now)
                if t_x is None:
                    continue
                t_r = response_time(local_response_time([t_x], d_bu, self.params), 0.0).t_total
                local.append(Candidate(rt.node.id, t_r, rt.node.price, avail))

        def leased():
            out = []
            for lc in self.leases[broker.id]:
                rt = self.runtimes[lc.node_id]
                t_y = self._predicted_node_time(rt, now)
                if t_y is None:
                    continue
                t_r = response_time(access, leased_response_time([t_y], [lc.delay_cost])).t_total
                out.append(Candidate(lc.node_id, t_r, rt.node.price, self.loc_avail[lc.location_id]))
            return out

        cloud = None
        if self.cloud is not None:
            cloud = Candidate(self.cloud.id, access + self.cloud.latency, self.cfg.model.cloud_price, 1.0)

        if self.cfg.model.policy == "random":
            return self._random_decision(req, local, leased, cloud)
        energy = None
        if self.cons.energy_aware:
            energy = self._energy_snapshot([c.node_id for c in local], now)
            if not any(c.price <= self.cons.max_price and c.availability >= self.cons.min_availability for c in local):
                lease_list = leased()
                energy.update(self._energy_snapshot([c.node_id for c in lease_list], now))
                return fra_allocate(req, local, lease_list, self.cons, energy, cloud)
        return fra_allocate(req, local, leased, self.cons, energy, cloud)

    def _random_decision(self, req, local, leased, cloud):
        for kind, cands in ((LOCAL, local), (LEASED, None)):
            if cands is None:
                cands = leased()
            c = random_feasible(cands, self.cons, self.policy_rng)
            if c is not None:
                return AllocationDecision(c.node_id, kind, c.t_r, c.price, c.availability)
        if cloud is None:
            raise NoFeasibleNodeError(f"no feasible node for request {req.id}")
        return AllocationDecision(cloud.node_id, CLOUD, cloud.t_r, cloud.price, cloud.availability)

    # handlers

    def _on_arrival(self, now, did, _):
        dev = self.devices[did]
        drng = self.dev_rng[did]
        nxt = now + drng.expovariate(dev.arrival_rate)
        if nxt <= self.horizon:
            self.schedule(nxt, ARRIVAL, did)
        w = self.cfg.workload
        size = w.large_size if drng.random() < w.large_fraction else w.small_size
        self.next_request += 1
        req = Request(self.next_request, did, size, now)
        self.counts["generated"] += 1
        if not apply_packet_loss(self.loss_rng, self.cfg.model.packet_error_rate):
            self.counts["dropped_loss"] += 1
            return
        ap = self.dev_ap[did]
        if ap is None:
            self.counts["dropped_coverage"] += 1
            return
        home = self.sc.ap_location[ap]
        self.offered.record(home, now, size)
        pos = self.dev_state[did].position
        try:
            decision = self.decide(req, home, pos, now)
        except NoFeasibleNodeError:
            self.counts["rejected"] += 1
            return
        broker = self.brokers[home]
        delay = access_delay(distance(pos, broker.position), self.params)
        self.in_flight += 1
        self.counts[decision.kind] += 1
        if decision.kind == CLOUD:
            self.schedule(now + delay + self.cloud.latency, COMPLETE, req, decision)
            return
        rt = self.runtimes[decision.node_id]
        self._bump_rate(rt, now, size)
        self.executed.record(rt.node.location_id, now, size)
        if decision.kind == LEASED:
            remote = self.brokers[rt.node.location_id]
            link = self.topo.link_latency(broker.id, remote.id)
            if link is None:
                link = self.params.beta1 * distance(broker.position, remote.position)
            delay += link + w.request_bits / broker.link_bandwidth
        self.schedule(now + delay, NODE_ARRIVAL, req, decision)

    def _on_node_arrival(self, now, req, decision):
        rt = self.runtimes[decision.node_id]
        try:
            done = service_request(rt, req, now, self.service_rng, decision)
        except OverflowError:
            self.counts["rejected"] += 1
            self.in_flight -= 1
            return
        if done is not None:
            self.schedule(done, COMPLETE, req, decision)

    def _on_complete(self, now, req, decision):
        self.in_flight -= 1
        self.counts["completed"] += 1
        lat = now - req.created_at
        self.report.latencies.append(LatencySample(req.id, req.created_at, now, lat, decision.node_id, decision.kind))
        self._per_device.setdefault(req.device_id, []).append(lat)
        rt = self.runtimes.get(decision.node_id)
        if rt is None:
            return
        rt.completed += 1
        rt.latency_sum += lat
        rt.touch(now)
        rt.busy_servers -= 1
        if rt.queue:
            nreq, ndec = rt.queue.popleft()
            done = service_request(rt, nreq, now, self.service_rng)
            self.schedule(done, COMPLETE, nreq, ndec)

    def _on_mobility(self, now, _a, _b):
        dt = self.cfg.mobility.dt
        aps = self.topo.access_points
        for did, dev in self.devices.items():
            st = advance(self.dev_state[did], self.sc.mobility[did], dt, self.dev_mob_rng[did])
            self.dev_state[did] = st
            ap, ev = handover(dev, self.dev_ap[did], aps, st.position)
            if ev is not None:
                if isinstance(ev, Switch) and ev.from_ap is not None:
                    self.counts["handovers"] += 1
                self.dev_ap[did] = ap
        if now + dt <= self.horizon:
            self.schedule(now + dt, MOBILITY)

    def _on_metrics(self, now, _a, _b):
        interval = now - self._last_tick
        for nid in sorted(self.runtimes):
            rt = self.runtimes[nid]
            rt.touch(now)
            util = min(rt.busy_time_accum / (rt.node.server_count * interval), 1.0)
            rt.energy_accum += account_energy(rt, interval)
            mean = rt.latency_sum / rt.completed if rt.completed else None
            self.report.records.append(MetricsRecord(now, nid, util, len(rt.queue), rt.completed, mean, rt.energy_accum))
            rt.busy_time_accum = 0.0
            rt.completed = 0
            rt.latency_sum = 0.0
        self._last_tick = now

    def _on_lease(self, now, _a, _b):
        self._refresh_leases(now)
        w = self.cfg.model.estimator_window
        if now + w <= self.horizon:
            self.schedule(now + w, LEASE)

    # main loop

    def run(self) -> MetricsReport:
        h = self.horizon
        for did, dev in self.devices.items():
            if dev.arrival_rate > 0:
                t = self.dev_rng[did].expovariate(dev.arrival_rate)
                if t <= h:
                    self.schedule(t, ARRIVAL, did)
        interval = self.cfg.run.metrics_interval
        ticks = math.ceil(h / interval - 1e-12)
        for k in range(1, ticks + 1):
            self.schedule(min(k * interval, h), METRICS)
        if self.devices and self.cfg.mobility.dt <= h:
            self.schedule(self.cfg.mobility.dt, MOBILITY)
        if self.cfg.model.estimator_window <= h:
            self.schedule(self.cfg.model.estimator_window, LEASE)

        handlers = {
            ARRIVAL: self._on_arrival,
            NODE_ARRIVAL: self._on_node_arrival,
            COMPLETE: self._on_complete,
            MOBILITY: self._on_mobility,
            METRICS: self._on_metrics,
            LEASE: self._on_lease,
        }
        heap = self._heap
        last = (-math.inf, -1)
        while heap and heap[0][0] <= h:
            t, seq, kind, a, b = heapq.heappop(heap)
            if (t, seq) < last:
                raise SimulationError(f"event order violated at t={t}")
            last = (t, seq)
            self.now = t
            if self.trace is not None:
                self.trace.append(Event(t, seq, kind))
            handlers[kind](t, a, b)
        self._finish()
        return self.report

    def _finish(self) -> None:
        pending = sum(1 for e in self._heap if e[2] in (NODE_ARRIVAL, COMPLETE))
        held = sum(len(rt.queue) for rt in self.runtimes.values())
        if pending + held != self.in_flight:
            raise SimulationError(f"in-flight mismatch: tracked {self.in_flight}, found {pending + held}")
        c = self.counts
        dropped = c["dropped_loss"] + c["dropped_coverage"]
        if c["generated"] != c["completed"] + dropped + c["rejected"] + self.in_flight:
            raise SimulationError("request conservation violated")

        lats = [s.latency for s in self.report.latencies]
        finals = {}
        for r in self.report.records:
            finals[r.node_id] = r.energy
        energies = [finals[n] for n in sorted(finals)]
        utils = [r.utilization for r in self.report.records]
        budget = self.cfg.model.latency_budget
        supported = sum(1 for v in self._per_device.values() if p95(v) <= budget)
        self.report.summary = RunSummary(
            seed=self.seed,
            duration_s=self.horizon,
            devices=len(self.devices),
            generated=c["generated"],
            completed=c["completed"],
            dropped=dropped,
            dropped_loss=c["dropped_loss"],
            dropped_coverage=c["dropped_coverage"],
            rejected=c["rejected"],
            in_flight=self.in_flight,
            local=c["local"],
            leased=c["leased"],
            cloud=c["cloud"],
            mean_latency_s=sum(lats) / len(lats) if lats else 0.0,
            p95_latency_s=p95(lats),
            total_energy_j=sum(energies),
            energy_cv=coefficient_of_variation(energies),
            mean_utilization=sum(utils) / len(utils) if utils else 0.0,
            handovers=c["handovers"],
            supported_users=supported,
        )


def run(scenario, seed: Optional[int] = None, trace: bool = False) -> MetricsReport:
    """Simulate ``scenario`` (a Scenario or ScenarioConfig) to its horizon."""
    if isinstance(scenario, ScenarioConfig):
        scenario = build_scenario(scenario, seed)
    return Simulation(scenario, seed, trace).run()
