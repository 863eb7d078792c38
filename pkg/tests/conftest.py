import importlib

import pytest

from fogfed import bundled_config
from fogfed.config import Span
from fogfed.domain import AccessPoint, Broker, CostParams, FogLocation, FogNode, MobileDevice, Position, Topology


def node(id_, loc, servers=1, rate=1.0, price=1.0, pf=0.01, idle=50.0, busy=150.0):
    return FogNode(id_, loc, servers, rate, price, pf, idle, busy)


def small_topology(nodes_per_loc=(2, 2, 3), lease_all=True, spacing=500.0):
    """Brokers on a line ``spacing`` metres apart; node ids start at 100."""
    brokers, locations, nodes = [], [], []
    bids = [1 + i for i in range(len(nodes_per_loc))]
    nid = 100
    for loc, count in enumerate(nodes_per_loc):
        members = []
        for _ in range(count):
            members.append(node(nid, loc))
            nid += 1
        nodes.extend(members)
        locations.append(FogLocation(loc, bids[loc], tuple(n.id for n in members), 10.0))
        leased = frozenset(b for b in bids if b != bids[loc]) if lease_all else frozenset()
        brokers.append(Broker(bids[loc], loc, Position(100.0 + spacing * loc, 100.0), leased))
    aps = [AccessPoint(200 + i, Position(100.0 + spacing * i, 100.0), i) for i in range(len(nodes_per_loc))]
    dev = MobileDevice(900, Position(100.0, 200.0), 1.0)
    return Topology(
        arena_size=100.0 + spacing * len(nodes_per_loc),
        devices=(dev,),
        fog_nodes=tuple(nodes),
        brokers=tuple(brokers),
        locations=tuple(locations),
        access_points=tuple(aps),
    )


def mm1_config(lam, rho, duration, seed=1):
    """One device, one single-server node, no network delay, no loss."""
    cfg = bundled_config()
    changes = [
        ("topology", "locations", 1),
        ("topology", "nodes_per_location", Span(1, 1)),
        ("topology", "access_points", 1),
        ("topology", "queue_capacity_factor", 1e9),
        ("topology", "leasing", False),
        ("nodes", "server_count", Span(1, 1)),
        ("nodes", "service_rate", Span(rho, rho)),
        ("nodes", "failure_prob", Span(0.0, 0.0)),
        ("workload", "devices", 1),
        ("workload", "mean_interarrival", 1.0 / lam),
        ("workload", "large_fraction", 0.0),
        ("model", "beta1", 0.0),
        ("model", "beta2", 0.0),
        ("model", "hop_count", 0.0),
        ("model", "packet_error_rate", 0.0),
        ("model", "cloud_enabled", False),
        ("model", "rate_time_constant", 1e9),
        ("model", "estimator_window", 1000.0),
        ("mobility", "models", ("circular",)),
        ("mobility", "dt", 1000.0),
        ("mobility", "radio_range", 5000.0),
        ("run", "duration", float(duration)),
        ("run", "metrics_interval", 1000.0),
        ("run", "seed", seed),
    ]
    for sec, key, val in changes:
        cfg = cfg.with_value(sec, key, val)
    return cfg


def quick_config(devices=20, duration=60.0, **overrides):
    cfg = bundled_config().with_value("workload", "devices", devices).with_value("run", "duration", float(duration))
    for dotted, val in overrides.items():
        sec, key = dotted.split("__")
        cfg = cfg.with_value(sec, key, val)
    return cfg


@pytest.fixture
def params():
    return CostParams()


@pytest.fixture(params=["fogfed._kernels_py", "fogfed._kernels"])
def backend(request):
    try:
        return importlib.import_module(request.param)
    except ImportError:
        pytest.skip("compiled kernels not built")


_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    name = item.originalname if hasattr(item, "originalname") else item.name
    if item.module.__name__.endswith("test_acceptance") and name.startswith("test_c"):
        if rep.when == "call" or rep.failed:
            prev = _criteria.get(name, True)
            _criteria[name] = prev and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        n = int(name[6:8])
        label = name[9:].replace("_", " ")
        terminalreporter.write_line(f"{'PASS' if _criteria[name] else 'FAIL'}  criterion {n:2d}: {label}")
