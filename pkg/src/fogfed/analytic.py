"""Closed-form queuing and cost model used as the allocator's predictor."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

SATURATION_EPS = 1e-9


class InstabilityError(ValueError):
    """Raised when a location cannot serve the offered load (kappa * rho <= lambda)."""


@dataclass(frozen=True)
class QueuingEstimate:
    lam: float
    acceptance: float
    execution_rate: float
    waiting_time: float
    kappa: int
    rho: float


@dataclass(frozen=True)
class DelayCost:
    network_delay: float
    queuing_cost: float

    @property
    def total(self) -> float:
        return service_delay_cost(self.network_delay, self.queuing_cost)


def aggregate_arrival_rate(devices: Iterable) -> float:
    return sum(d.arrival_rate for d in devices)


def acceptance_fraction(capacity: float, lam: float) -> float:
    if lam == 0 or capacity > lam:
        return 1.0
    return capacity / lam


def execution_rate(lam: float, acceptance: float) -> float:
    return lam * acceptance


def avg_waiting_time(kappa: int, lam: float, rho: float) -> float:
    """Mean waiting time predictor at a location with ``kappa`` servers of rate ``rho``.

    Evaluated as ``kappa*lam/(kappa*rho - lam) + 1/rho``. This is not the
    textbook M/M/c sojourn; it is kept as the allocator's ranking signal.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if not rho > 0:
        raise ValueError("rho must be positive")
    if kappa * rho <= lam:
        raise InstabilityError(f"unstable: kappa*rho={kappa * rho} <= lambda={lam}")
    return kappa * lam / (kappa * rho - lam) + 1.0 / rho


def queuing_cost(theta: float, lam: float, q_unit: float, cq_max: float = 1e6) -> float:
    # theta == lam divides by zero; clamp to cq_max instead
    if lam - theta <= SATURATION_EPS:
        return cq_max
    return theta / (lam - theta) * q_unit


def service_delay_cost(h: float, c_q: float) -> float:
    return h + c_q


def location_parameters(nodes) -> tuple[int, float]:
    """Pool a location's nodes into (kappa, rho): summed servers, mean per-server rate."""
    nodes = list(nodes)
    if not nodes:
        raise ValueError("location has no nodes")
    kappa = sum(n.server_count for n in nodes)
    rho = sum(n.service_rate for n in nodes) / len(nodes)
    return kappa, rho


def estimate_location(nodes, capacity: float, lam: float) -> QueuingEstimate:
    kappa, rho = location_parameters(nodes)
    acc = acceptance_fraction(capacity, lam)
    return QueuingEstimate(
        lam=lam,
        acceptance=acc,
        execution_rate=execution_rate(lam, acc),
        waiting_time=avg_waiting_time(kappa, lam, rho),
        kappa=kappa,
        rho=rho,
    )
