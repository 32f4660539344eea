"""Event-driven simulator: determinism, exact integration, independent references."""
import numpy as np
import pytest

from aoinet.analytic import aoi_multi_source_n2
from aoinet.model import NetworkConfig
from aoinet.shs import ShsModel, ShsTransition, solve_age
from aoinet.sim import SimParams, SimResult, _integrate_source, replicate, simulate


def cfg(m=1, n=1, rates=None, mus=None, disc="lcfs-s"):
    if rates is None:
        rates = [[1.0] * n for _ in range(m)]
    if mus is None:
        mus = [1.0] * n
    return NetworkConfig(m, n, rates, mus, disc)


def close_enough(value, target, ci):
    return abs(value - target) <= max(4.0 * ci, 0.02 * target)


def test_integrate_source_hand_case():
    # delivery at t=1 (gen 0.5), t=2 (gen 1.8), t=3 (gen 1.0, stale)
    aoi, ci, nd, nu = _integrate_source(
        np.array([1.0, 2.0, 3.0]),
        np.array([0.5, 1.8, 1.0]),
        0.0,
        4.0,
        2,
    )
    # piecewise integral: 0.5 + 1.0 + 0.7 + 1.7 over four unit stretches
    assert aoi == pytest.approx(3.9 / 4.0, rel=1e-12)
    assert nd == 3
    assert nu == 2
    # batch means are 0.75 and 1.2
    assert ci == pytest.approx(1.96 * 0.225, rel=1e-9)


def test_integrate_source_warmup_window():
    aoi, _, nd, nu = _integrate_source(
        np.array([1.0, 2.0, 3.0]),
        np.array([0.5, 1.8, 1.0]),
        2.0,
        4.0,
        2,
    )
    # window (2, 4]: age runs from 0.2 to 2.2 on generation 1.8
    assert aoi == pytest.approx(2.4 / 2.0, rel=1e-12)
    assert nd == 1  # only the stale t=3 delivery falls in the window
    assert nu == 0


def test_same_seed_bitwise_identical():
    p = SimParams(cfg(n=2), 3000.0, seed=42)
    a, b = simulate(p), simulate(p)
    assert a.aoi == b.aoi
    assert a.ci_half_width == b.ci_half_width
    assert (a.deliveries, a.useful_deliveries, a.discarded_stale) == (
        b.deliveries,
        b.useful_deliveries,
        b.discarded_stale,
    )


def test_different_seeds_differ():
    a = simulate(SimParams(cfg(), 3000.0, seed=1))
    b = simulate(SimParams(cfg(), 3000.0, seed=2))
    assert a.aoi != b.aoi


def test_counters_add_up():
    r = simulate(SimParams(cfg(m=2, n=2, rates=[[0.4, 0.4], [0.7, 0.7]]), 5000.0))
    assert r.deliveries == r.useful_deliveries + r.discarded_stale
    assert 0 < r.useful_deliveries <= r.deliveries


def test_parallel_servers_produce_stale_deliveries():
    r = simulate(SimParams(cfg(n=2), 10000.0, seed=7))
    assert r.discarded_stale > 0


def test_single_server_never_stale():
    # one preemptive server delivers in generation order
    for disc in ("lcfs-s", "lcfs-w", "fcfs"):
        rates = [[0.5]]
        r = simulate(SimParams(cfg(rates=rates, disc=disc), 5000.0, seed=3))
        assert r.discarded_stale == 0


def test_warmup_defaults_to_one_percent():
    r = simulate(SimParams(cfg(), 1000.0))
    assert r.warmup == pytest.approx(10.0)
    assert r.replications == 1


def test_validation_errors():
    with pytest.raises(ValueError, match="horizon"):
        simulate(SimParams(cfg(), 0.0))
    with pytest.raises(ValueError, match="warmup"):
        simulate(SimParams(cfg(), 100.0, warmup=100.0))
    with pytest.raises(ValueError, match="warmup"):
        simulate(SimParams(cfg(), 100.0, warmup=-1.0))
    with pytest.raises(ValueError, match="batches"):
        simulate(SimParams(cfg(), 100.0, batches=1))
    with pytest.raises(ValueError, match="service_rates"):
        simulate(SimParams(cfg(mus=[0.0]), 100.0))


def test_fcfs_stability_guard():
    with pytest.raises(ValueError, match="unstable under fcfs"):
        simulate(SimParams(cfg(disc="fcfs"), 100.0))
    # per-server load includes every source
    bad = cfg(m=2, n=1, rates=[[0.6], [0.6]], disc="fcfs")
    with pytest.raises(ValueError, match="server 0 is unstable"):
        simulate(SimParams(bad, 100.0))


def test_replicate_one_is_simulate():
    p = SimParams(cfg(), 2000.0, seed=9)
    assert replicate(p, 1) == simulate(p)


def test_replicate_pools_counters_and_tightens():
    p = SimParams(cfg(), 50000.0, seed=11)
    r4 = replicate(p, 4)
    r16 = replicate(p, 16)
    assert r4.replications == 4
    assert r16.deliveries > r4.deliveries
    assert r16.ci_half_width[0] < r4.ci_half_width[0]


def test_replicate_validation():
    p = SimParams(cfg(), 100.0)
    with pytest.raises(ValueError, match="replications"):
        replicate(p, 0)


def test_fcfs_single_server_reference():
    # M/M/1 first-come-first-served average age has a textbook closed form
    lam, mu = 0.5, 1.0
    rho = lam / mu
    target = (1.0 / mu) * (1.0 + 1.0 / rho + rho * rho / (1.0 - rho))
    r = replicate(SimParams(cfg(rates=[[lam]], disc="fcfs"), 200000.0, seed=5), 4)
    assert close_enough(r.aoi[0], target, r.ci_half_width[0])


def lcfs_w_reference_model(lam, mu):
    """Hand-built chain for one non-preemptive server with a single waiting slot.

    States: idle, serving, serving with a waiter. Coordinates: monitor age,
    in-service update age, waiting update age.
    """
    fresh_service = [[1, 0, 0], [0, 0, 0], [0, 0, 0]]
    new_waiter = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
    deliver_to_idle = [[0, 0, 0], [1, 0, 0], [0, 0, 0]]
    deliver_promote = [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
    transitions = (
        ShsTransition(0, 1, lam, fresh_service),
        ShsTransition(1, 2, lam, new_waiter),
        ShsTransition(1, 0, mu, deliver_to_idle),
        ShsTransition(2, 2, lam, new_waiter),
        ShsTransition(2, 1, mu, deliver_promote),
    )
    growth = [[1, 0, 0], [1, 1, 0], [1, 1, 1]]
    return ShsModel(3, 3, transitions, growth)


def test_lcfs_w_single_server_reference():
    for lam, mu in ((1.0, 1.0), (2.0, 1.3)):
        target = solve_age(lcfs_w_reference_model(lam, mu)).aoi
        r = replicate(
            SimParams(cfg(rates=[[lam]], mus=[mu], disc="lcfs-w"), 200000.0, seed=3), 4
        )
        assert close_enough(r.aoi[0], target, r.ci_half_width[0])


def test_lcfs_w_known_value():
    # at equal rates the reference chain gives exactly 29/12
    assert solve_age(lcfs_w_reference_model(1.0, 1.0)).aoi == pytest.approx(
        29.0 / 12.0, rel=1e-12
    )


def test_lcfs_s_two_servers_reference():
    r = replicate(SimParams(cfg(n=2), 200000.0, seed=13), 4)
    assert close_enough(r.aoi[0], 1.25, r.ci_half_width[0])


def test_two_sources_split_evenly():
    shared = cfg(m=2, n=2, rates=[[0.5, 0.5], [0.5, 0.5]])
    r = replicate(SimParams(shared, 200000.0, seed=21), 4)
    target = aoi_multi_source_n2(0.5, 1.0, 1.0)
    for i in range(2):
        assert close_enough(r.aoi[i], target, r.ci_half_width[i])


def test_result_type_round_trip():
    r = simulate(SimParams(cfg(), 1000.0, seed=2))
    assert isinstance(r, SimResult)
    assert len(r.aoi) == 1 and len(r.ci_half_width) == 1
    assert r.seed == 2 and r.horizon == 1000.0
