import math

import numpy as np
import pytest

from cachecost import (
    InstanceError,
    LinkCategory,
    ScenarioConfig,
    make_instance,
    three_link_topology,
    sample_availability,
    scenario_rng,
    zipf_catalog,
)


def test_zipf_flat_popularity():
    assert zipf_catalog(3, 0.0).demands.tolist() == [1.0, 1.0, 1.0]


def test_zipf_inverse_rank():
    assert zipf_catalog(2, 1.0).demands.tolist() == [1.0, 0.5]


def test_zipf_definition_applied():
    d = zipf_catalog(4, 1.2).demands
    expected = [1.0, 2.0 ** -1.2, 3.0 ** -1.2, 4.0 ** -1.2]
    assert d.tolist() == expected


def test_zipf_monotone():
    d = zipf_catalog(1000, 0.8).demands
    assert (np.diff(d) < 0).all()
    flat = zipf_catalog(1000, 0.0).demands
    assert (flat == 1.0).all()
    with pytest.raises(InstanceError):
        zipf_catalog(0, 1.0)
    with pytest.raises(InstanceError):
        zipf_catalog(5, -0.1)


def test_three_link_topology_prices_and_categories():
    for gamma, expected in [(1.0, [0.0, 1.0, 1.0]), (10.0, [0.0, 1.0, 10.0]), (2.0, [0.0, 1.0, 2.0])]:
        topology = three_link_topology(gamma)
        assert topology.prices.tolist() == expected
        assert [l.category for l in topology.links] == [
            LinkCategory.PEERING, LinkCategory.PROVIDER, LinkCategory.PROVIDER,
        ]
    with pytest.raises(InstanceError):
        three_link_topology(0.99)
    with pytest.raises(InstanceError):
        three_link_topology(float("inf"))


def test_sample_availability_prob_one_and_zero():
    topology = three_link_topology(2.0)
    full = sample_availability(50, topology, 1.0, scenario_rng(1))
    assert (full.mask == 0b111).all()
    singles = sample_availability(2000, topology, 0.0, scenario_rng(1))
    sizes = np.array([len(singles.links_for(o)) for o in range(2000)])
    assert (sizes == 1).all()
    # the fallback link is uniform over the three links
    first = np.array([singles.links_for(o)[0] for o in range(2000)])
    counts = np.bincount(first, minlength=3)
    assert (counts > 500).all()


def test_sample_availability_mean_set_size_matches_analytic():
    # two-stage rule at prob p: |L_o| = Binomial(3, p), bumped to 1 when 0.
    # Mean and variance computed from the exact pmf, test within 3 sigma.
    p = 0.5
    L = 3
    pmf = [math.comb(L, k) * p**k * (1 - p) ** (L - k) for k in range(L + 1)]
    sizes = [1] + list(range(1, L + 1))  # k=0 falls back to a single link
    mean = sum(q * s for q, s in zip(pmf, sizes))
    var = sum(q * s**2 for q, s in zip(pmf, sizes)) - mean**2
    assert mean == pytest.approx(3 * 0.5 + 0.5**3 * 1.0)

    n = 300_000
    amap = sample_availability(n, three_link_topology(2.0), p, scenario_rng(42))
    popcount = np.array([bin(m).count("1") for m in range(8)])
    empirical = float(popcount[amap.mask].mean())
    assert abs(empirical - mean) <= 3 * math.sqrt(var / n)


def test_sample_availability_deterministic():
    topology = three_link_topology(3.0)
    a = sample_availability(10_000, topology, 0.5, scenario_rng(7, 3))
    b = sample_availability(10_000, topology, 0.5, scenario_rng(7, 3))
    assert a.mask.tobytes() == b.mask.tobytes()
    c = sample_availability(10_000, topology, 0.5, scenario_rng(7, 4))
    assert c.mask.tobytes() != a.mask.tobytes()
    d = sample_availability(10_000, topology, 0.25, scenario_rng(7, 3))
    assert d.mask.tobytes() != a.mask.tobytes()


def test_sample_availability_never_empty():
    topology = three_link_topology(5.0)
    for prob in (0.0, 0.05, 0.5, 0.9):
        amap = sample_availability(5000, topology, prob, scenario_rng(11))
        assert (amap.mask != 0).all()


def test_make_instance_round_trip():
    config = ScenarioConfig(catalog_size=500, zipf_alpha=1.2, price_ratio=4.0, budget=50, seed=3)
    inst = make_instance(config, scenario_index=2)
    assert inst.catalog.n_objects == 500
    assert inst.topology.prices.tolist() == [0.0, 1.0, 4.0]
    assert inst.budget == 50
    again = make_instance(config, scenario_index=2)
    assert inst.availability.mask.tobytes() == again.availability.mask.tobytes()


def test_scenario_config_validation():
    with pytest.raises(InstanceError):
        ScenarioConfig(catalog_size=0, zipf_alpha=1.0, price_ratio=2.0, budget=1)
    with pytest.raises(InstanceError):
        ScenarioConfig(catalog_size=10, zipf_alpha=-1.0, price_ratio=2.0, budget=1)
    with pytest.raises(InstanceError):
        ScenarioConfig(catalog_size=10, zipf_alpha=1.0, price_ratio=0.5, budget=1)
    with pytest.raises(InstanceError):
        ScenarioConfig(catalog_size=10, zipf_alpha=1.0, price_ratio=2.0, budget=-1)
    with pytest.raises(InstanceError):
        ScenarioConfig(catalog_size=10, zipf_alpha=1.0, price_ratio=2.0, budget=1, availability_prob=1.5)
