import dataclasses
import math
import random
import statistics

import pytest

from fogfed import build_scenario
from fogfed.domain import MobileDevice, Position, Request
from fogfed.engine import (
    ARRIVAL,
    LoadEstimator,
    NodeRuntime,
    Simulation,
    account_energy,
    apply_packet_loss,
    coefficient_of_variation,
    estimate_load,
    generate_arrivals,
    p95,
    run,
    service_request,
)
from fogfed import _kernels_py

from conftest import mm1_config, node, quick_config


def test_generate_arrivals_poisson_count():
    dev = MobileDevice(1, Position(0, 0), 1.0)
    counts = [sum(1 for _ in generate_arrivals(dev, random.Random(s), 500.0)) for s in range(5)]
    for c in counts:
        assert abs(c - 500) <= 3 * math.sqrt(500)


def test_generate_arrivals_edge_cases():
    assert list(generate_arrivals(MobileDevice(1, Position(0, 0), 0.0), random.Random(1), 100)) == []
    dev = MobileDevice(1, Position(0, 0), 2.0)
    a = list(generate_arrivals(dev, random.Random(4), 50))
    b = list(generate_arrivals(dev, random.Random(4), 50))
    assert a == b and all(x <= 50 for x in a)


def test_packet_loss_extremes():
    rng = random.Random(0)
    assert all(apply_packet_loss(rng, 0.0) for _ in range(1000))
    assert not any(apply_packet_loss(rng, 1.0) for _ in range(1000))
    with pytest.raises(ValueError):
        apply_packet_loss(rng, 1.5)


def test_service_request_semantics():
    rng = random.Random(1)
    rt = NodeRuntime(node(1, 0, servers=2, rate=1.0))
    reqs = [Request(i, 0, 1.0, 0.0) for i in range(3)]
    done0 = service_request(rt, reqs[0], 3.0, rng)
    assert done0 is not None and done0 > 3.0
    assert service_request(rt, reqs[1], 3.0, rng) is not None
    assert service_request(rt, reqs[2], 3.0, rng, tag="x") is None
    assert list(rt.queue) == [(reqs[2], "x")]
    assert rt.in_system() == 3


def test_service_request_finite_queue():
    rt = NodeRuntime(dataclasses.replace(node(1, 0), max_queue=1))
    rng = random.Random(2)
    service_request(rt, Request(1, 0, 1, 0), 0, rng)
    service_request(rt, Request(2, 0, 1, 0), 0, rng)
    with pytest.raises(OverflowError):
        service_request(rt, Request(3, 0, 1, 0), 0, rng)


def test_fifo_sojourn_mm1_mean():
    rng = random.Random(5)
    t, arr, svc = 0.0, [], []
    for _ in range(60_000):
        t += rng.expovariate(0.5)
        arr.append(t)
        svc.append(rng.expovariate(1.0))
    mean = statistics.fmean(_kernels_py.fifo_sojourn(arr, svc, 1))
    assert abs(mean - 2.0) / 2.0 < 0.1


def test_energy_examples():
    rt = NodeRuntime(node(1, 0, idle=50.0, busy=150.0))
    assert account_energy(rt, 10.0) == 500.0
    rt.busy_time_accum = 10.0
    assert account_energy(rt, 10.0) == 1500.0
    flat = NodeRuntime(node(2, 0, servers=2, idle=100.0, busy=100.0))
    flat.busy_time_accum = 7.0
    assert account_energy(flat, 10.0) == 1000.0


def test_load_estimator():
    est = LoadEstimator(1.0, 0.3)
    assert est.estimate(0, 50.0) == 0.0
    for k in range(200):
        est.record(0, k + 0.1, 1)
        est.record(0, k + 0.6, 1)
    assert math.isclose(estimate_load(est, 0, 200.0), 2.0, rel_tol=0.01)
    one = LoadEstimator(2.0, 1.0)
    for t in (0.1, 0.5, 1.9, 2.5):
        one.record(7, t)
    assert one.estimate(7, 2.6) == 1.5
    assert one.estimate(7, 4.0) == 0.5
    with pytest.raises(ValueError):
        LoadEstimator(0, 0.5)


def test_p95_and_cv():
    assert p95([]) == 0.0
    assert p95(list(range(1, 101))) == 95
    assert coefficient_of_variation([3.0, 3.0]) == 0.0


def test_empty_workload():
    cfg = quick_config(devices=0, duration=500.0)
    rep = run(cfg)
    s = rep.summary
    assert s.generated == 0 and s.completed == 0
    assert all(r.utilization == 0 for r in rep.records)
    idle = sum(n.power_idle for n in build_scenario(cfg).topology.fog_nodes) * 500.0
    assert math.isclose(s.total_energy_j, idle, rel_tol=1e-12)


def test_single_device_conservation():
    rep = run(mm1_config(0.5, 2.0, 500.0))
    s = rep.summary
    assert s.generated == s.completed + s.dropped + s.rejected + s.in_flight
    assert s.in_flight <= 3
    assert s.completed > 0


def test_event_ordering_and_determinism():
    cfg = quick_config(devices=30, duration=60.0)
    a = Simulation(build_scenario(cfg, 3), 3, trace=True).run()
    keys = [(e.timestamp, e.sequence) for e in a.trace]
    assert keys == sorted(keys)
    assert any(e.kind == ARRIVAL for e in a.trace)
    b = run(cfg, 3)
    assert a.latencies == b.latencies and a.summary == b.summary


def test_run_invariants():
    rep = run(quick_config(devices=60, duration=100.0), 2)
    s = rep.summary
    assert s.generated == s.completed + s.dropped + s.rejected + s.in_flight
    assert s.local + s.leased + s.cloud >= s.completed
    assert all(0.0 <= r.utilization <= 1.0 + 1e-9 for r in rep.records)
    assert all(x.latency > 0 for x in rep.latencies)
    by_node = {}
    for r in rep.records:
        assert r.energy >= by_node.get(r.node_id, 0.0)
        by_node[r.node_id] = r.energy


def test_leasing_happens_under_load():
    s = run(quick_config(devices=200, duration=60.0), 1).summary
    assert s.leased > 0
    s = run(quick_config(devices=200, duration=60.0, topology__leasing=False), 1).summary
    assert s.leased == 0


def test_random_policy_runs():
    s = run(quick_config(devices=30, duration=60.0, model__policy="random"), 1).summary
    assert s.completed > 0
