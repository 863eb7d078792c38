"""Broker federation: response-time model, availability, leasing and node selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

from . import kernels
from .analytic import DelayCost
from .domain import Broker, CostParams, MobileDevice, Topology, distance

LOCAL, LEASED, CLOUD = "local", "leased", "cloud"


class NoFeasibleNodeError(RuntimeError):
    pass


@dataclass(frozen=True)
class ResponseEstimate:
    t_local: float
    t_leased: float
    t_total: float


@dataclass(frozen=True)
class AllocationDecision:
    node_id: int
    kind: str
    predicted_t_r: float
    cost: float
    availability: float


@dataclass(frozen=True)
class Constraints:
    max_price: float = math.inf
    min_availability: float = 0.0
    energy_aware: bool = False
    epsilon_t: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.min_availability <= 1.0:
            raise ValueError("min_availability must lie in [0, 1]")
        if self.epsilon_t < 0:
            raise ValueError("epsilon_t must be nonnegative")


@dataclass(frozen=True)
class Candidate:
    node_id: int
    t_r: float
    price: float
    availability: float


@dataclass(frozen=True)
class LeaseCandidate:
    node_id: int
    location_id: int
    broker_id: int
    cost: DelayCost

    @property
    def delay_cost(self) -> float:
        return self.cost.total


def _eq7(beta1: float, d_bu: float, leased_distances) -> float:
    return beta1 * (d_bu + sum(leased_distances))


def network_delay(broker: Broker, user: MobileDevice, topo: Topology, params: CostParams, leased=None) -> float:
    """Broker-side network delay for ``user``, including every leased broker link.

    ``leased`` overrides ``broker.leased_brokers``.
    """
    topo.get(broker.id)
    topo.get(user.id)
    ids = broker.leased_brokers if leased is None else leased
    far = [distance(topo.get(a).position, broker.position) for a in sorted(ids)]
    return _eq7(params.beta1, distance(broker.position, user.position), far)


def total_location_cost(local_prices: Sequence[float], leased_prices: Sequence[float]) -> float:
    return sum(local_prices) + sum(leased_prices)


def access_delay(d_bu: float, params: CostParams) -> float:
    return params.beta2 * d_bu + params.hop_count * params.cloud_comm_cost


def _harmonic(node_times) -> float:
    if any(not t > 0 for t in node_times):
        raise ValueError("node times must be positive")
    return 1.0 / kernels.harmonic_sum(node_times)


def local_response_time(node_times: Sequence[float], d_bu: float, params: CostParams) -> float:
    if not node_times:
        raise ValueError("local response time needs at least one node")
    return _harmonic(node_times) + access_delay(d_bu, params)


def leased_response_time(node_times: Sequence[float], delay_costs: Sequence[float]) -> float:
    # no active lease contributes nothing
    if not node_times:
        return 0.0
    return _harmonic(node_times) + sum(delay_costs)


def response_time(local: float, leased: float) -> ResponseEstimate:
    if local < 0 or leased < 0:
        raise ValueError("response time components must be nonnegative")
    return ResponseEstimate(local, leased, local + leased)


def availability(failure_probs: Sequence[float]) -> float:
    """Probability that not every node in the set has failed; 0 for an empty set."""
    for p in failure_probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"failure probability {p} outside [0, 1]")
    if not failure_probs:
        return 0.0
    return 1.0 - kernels.failure_product(failure_probs)


def lease_candidates(broker: Broker, topo: Topology, params: CostParams,
                     queuing_costs: Optional[Mapping[int, float]] = None) -> list[LeaseCandidate]:
    """Every fog node reachable through ``broker``'s leases, with the delay cost of reaching it.

    ``queuing_costs`` maps location id to its current queuing cost (0 when absent).
    """
    topo.get(broker.id)
    out = []
    for a in sorted(broker.leased_brokers):
        remote = topo.get(a)
        h = topo.link_latency(broker.id, a)
        if h is None:
            h = _eq7(params.beta1, 0.0, [distance(remote.position, broker.position)])
        c_q = (queuing_costs or {}).get(remote.location_id, 0.0)
        for node in topo.nodes_at(remote.location_id):
            out.append(LeaseCandidate(node.id, remote.location_id, a, DelayCost(h, c_q)))
    return out


def _pick(cands: Sequence[Candidate], cons: Constraints, energy: Optional[Mapping[int, float]]) -> Optional[Candidate]:
    if not cands:
        return None
    if cons.energy_aware:
        if energy is None:
            raise ValueError("energy-aware selection needs an energy snapshot")
        e = [energy.get(c.node_id, 0.0) for c in cands]
    else:
        e = None
    i = kernels.select_index(
        [c.t_r for c in cands],
        [c.price for c in cands],
        [c.availability for c in cands],
        [c.node_id for c in cands],
        e,
        cons.max_price,
        cons.min_availability,
        cons.energy_aware,
        cons.epsilon_t,
    )
    return cands[i] if i >= 0 else None


def fra_allocate(
    req,
    local_nodes: Sequence[Candidate],
    leasable_nodes: Union[Sequence[Candidate], Callable[[], Sequence[Candidate]]],
    cons: Constraints,
    state: Optional[Mapping[int, float]] = None,
    cloud: Optional[Candidate] = None,
) -> AllocationDecision:
    """Choose a node for ``req``: feasible local nodes first, then leased ones, then the cloud.

    ``state`` is a node id -> cumulative energy snapshot, used only when
    ``cons.energy_aware`` is set. ``leasable_nodes`` may be a callable so the
    lease list is only built when no local node qualifies.
    """
    best = _pick(local_nodes, cons, state)
    if best is not None:
        return AllocationDecision(best.node_id, LOCAL, best.t_r, total_location_cost([best.price], []), best.availability)
    leased = leasable_nodes() if callable(leasable_nodes) else leasable_nodes
    best = _pick(leased, cons, state)
    if best is not None:
        return AllocationDecision(best.node_id, LEASED, best.t_r, total_location_cost([], [best.price]), best.availability)
    if cloud is None:
        raise NoFeasibleNodeError(f"no feasible node for request {getattr(req, 'id', req)}")
    return AllocationDecision(cloud.node_id, CLOUD, cloud.t_r, cloud.price, cloud.availability)


def random_feasible(cands: Sequence[Candidate], cons: Constraints, rng) -> Optional[Candidate]:
    """Uniform choice among constraint-satisfying candidates; the baseline for energy comparisons."""
    ok = [c for c in cands if c.price <= cons.max_price and c.availability >= cons.min_availability]
    if not ok:
        return None
    return ok[rng.randrange(len(ok))]
