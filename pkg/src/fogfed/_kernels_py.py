"""Pure-Python kernels. ``_kernels.pyx`` mirrors these contracts exactly."""

import heapq
import math


def select_index(t_r, price, avail, ids, energy, max_price, min_avail, energy_aware, eps):
    """Index of the chosen candidate, or -1 when none is feasible.

    Feasible means ``price <= max_price`` and ``avail >= min_avail``. The
    minimum ``t_r`` wins, lowest id on ties. With ``energy_aware`` the winner
    is the least-energy candidate whose ``t_r`` lies within ``eps`` of the
    minimum.
    """
    n = len(t_r)
    best_t = math.inf
    for i in range(n):
        if price[i] <= max_price and avail[i] >= min_avail and t_r[i] < best_t:
            best_t = t_r[i]
    if best_t == math.inf:
        return -1
    limit = best_t + eps if energy_aware else best_t
    chosen = -1
    for i in range(n):
        if price[i] > max_price or avail[i] < min_avail or t_r[i] > limit:
            continue
        if chosen < 0:
            chosen = i
        elif energy_aware:
            if energy[i] < energy[chosen] or (energy[i] == energy[chosen] and ids[i] < ids[chosen]):
                chosen = i
        elif ids[i] < ids[chosen]:
            chosen = i
    return chosen


def failure_product(probs):
    y = 1.0
    for p in probs:
        y *= p
    return y


def harmonic_sum(times):
    s = 0.0
    for t in times:
        s += 1.0 / t
    return s


def fifo_sojourn(arrivals, services, servers):
    """Sojourn times of a FIFO queue with ``servers`` identical servers."""
    free = [0.0] * servers
    out = []
    for a, s in zip(arrivals, services):
        earliest = free[0]
        start = a if a > earliest else earliest
        heapq.heapreplace(free, start + s)
        out.append(start + s - a)
    return out
