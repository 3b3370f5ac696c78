import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from cachecost import (
    AvailabilityMap,
    Catalog,
    PlacementPlan,
    SearchSpaceExceeded,
    SmallInstanceLimits,
    brute_force_max_hit,
    brute_force_min_cost,
    certify,
    evaluate,
    random_small_instance,
    scenario_rng,
    validate,
)
from conftest import make_topology, small_instances


def exhaustive_cross_product(instance):
    """Oracle for the oracle: enumerate complete configurations.

    Every cached subset, every placement vector over the subset and every
    routing vector is materialized as a plan and scored with raw
    per-object arithmetic. No per-object decomposition, tiny scale only.
    """
    t, c, a, b = instance.topology, instance.catalog, instance.availability, instance.budget
    n = c.n_objects
    d = c.demands
    prices = [l.price for l in t.links]
    total = float(d.sum())
    best_cost = None
    best_hit = None
    for k in range(min(n, b) + 1):
        for subset in itertools.combinations(range(n), k):
            placement_spaces = [a.links_for(o) for o in subset]
            for placement in itertools.product(*placement_spaces):
                for routing in itertools.product(*(a.links_for(o) for o in range(n))):
                    placed_at = dict(zip(subset, placement))
                    cost = 0.0
                    hit = 0.0
                    for o in range(n):
                        if placed_at.get(o) == routing[o]:
                            hit += d[o]
                        else:
                            cost += d[o] * prices[routing[o]]
                    if best_cost is None or cost < best_cost:
                        best_cost = cost
                    key = (-hit, cost)
                    if best_hit is None or key < best_hit:
                        best_hit = key
    return best_cost, (-best_hit[0] / total, best_hit[1])


@settings(max_examples=40, deadline=None)
@given(small_instances(max_objects=4, max_links=2, max_budget=2))
def test_oracle_matches_full_cross_product(instance):
    ref_cost, (ref_hit, ref_hit_cost) = exhaustive_cross_product(instance)
    cost, plan = brute_force_min_cost(
        instance.topology, instance.catalog, instance.availability, instance.budget
    )
    hit, hit_cost = brute_force_max_hit(
        instance.topology, instance.catalog, instance.availability, instance.budget
    )
    assert cost == pytest.approx(ref_cost, rel=1e-12, abs=1e-12)
    assert hit == pytest.approx(ref_hit, rel=1e-12, abs=1e-12)
    assert hit_cost == pytest.approx(ref_hit_cost, rel=1e-9, abs=1e-12)
    # the returned plan actually attains the optimum
    report = evaluate(instance.topology, instance.catalog, instance.availability, plan)
    assert report.total_cost == pytest.approx(cost, rel=1e-12, abs=1e-12)


def test_budget_covers_catalog_is_free(four_object_instance):
    inst = four_object_instance
    cost, plan = brute_force_min_cost(inst.topology, inst.catalog, inst.availability, 4)
    assert cost == 0.0
    assert validate(inst.topology, inst.catalog, inst.availability, plan, 4).ok


def test_four_object_instance_optima(four_object_instance):
    inst = four_object_instance
    cost, _ = brute_force_min_cost(inst.topology, inst.catalog, inst.availability, 2)
    assert cost == pytest.approx(6.0, rel=1e-12)
    hit, hit_cost = brute_force_max_hit(inst.topology, inst.catalog, inst.availability, 2)
    assert hit == pytest.approx(0.7, rel=1e-12)
    assert hit_cost == pytest.approx(7.0, rel=1e-12)


def test_single_object_budget_zero_routes_cheapest():
    topology = make_topology([1.0, 5.0])
    catalog = Catalog.from_demands([3.0])
    amap = AvailabilityMap.from_sets([[0, 1]], 2)
    cost, plan = brute_force_min_cost(topology, catalog, amap, 0)
    assert cost == 3.0
    assert plan.path_selection.tolist() == [0]


def test_max_hit_trivial_anchors():
    topology = make_topology([2.0])
    catalog = Catalog.from_demands([5.0, 1.0])
    amap = AvailabilityMap.from_sets([[0], [0]], 1)
    hit, _ = brute_force_max_hit(topology, catalog, amap, 0)
    assert hit == 0.0
    hit, _ = brute_force_max_hit(topology, catalog, amap, 1)
    assert hit == pytest.approx(5.0 / 6.0, rel=1e-12)


def test_search_space_refusal(four_object_instance):
    inst = four_object_instance
    tight = SmallInstanceLimits(node_budget=10)
    with pytest.raises(SearchSpaceExceeded):
        brute_force_min_cost(inst.topology, inst.catalog, inst.availability, 2, tight)
    small = SmallInstanceLimits(max_objects=2)
    with pytest.raises(SearchSpaceExceeded):
        brute_force_min_cost(inst.topology, inst.catalog, inst.availability, 2, small)
    # budget above max_budget is fine when the catalog itself is small
    limits = SmallInstanceLimits(max_budget=2)
    cost, _ = brute_force_min_cost(inst.topology, inst.catalog, inst.availability, 2, limits)
    assert cost == pytest.approx(6.0)


def test_random_feasible_plans_never_beat_oracle():
    rng = scenario_rng(99)
    for _ in range(25):
        instance = random_small_instance(rng)
        t, c, a, b = instance.topology, instance.catalog, instance.availability, instance.budget
        optimum, _ = brute_force_min_cost(t, c, a, b)
        best_hit, _ = brute_force_max_hit(t, c, a, b)
        n = c.n_objects
        routes = np.array([rng.choice(a.links_for(o)) for o in range(n)], dtype=np.int64)
        k = int(rng.integers(0, min(b, n) + 1))
        cached = rng.choice(n, size=k, replace=False)
        pairs = np.array([[int(rng.choice(a.links_for(int(o)))), int(o)] for o in cached],
                         dtype=np.int64).reshape(-1, 2)
        sizes = {}
        for l in pairs[:, 0]:
            sizes[int(l)] = sizes.get(int(l), 0) + 1
        plan = PlacementPlan(sizes, {}, pairs, routes)
        report = evaluate(t, c, a, plan)
        assert report.total_cost >= optimum - 1e-9 * max(1.0, optimum)
        assert report.hit_ratio <= best_hit + 1e-9


def test_certification_family_is_deterministic_and_passes():
    first = list(certify(50, seed=123))
    second = list(certify(50, seed=123))
    assert all(r.ok for r in first)
    assert [r.stats for r in first] == [r.stats for r in second]
    different = list(certify(50, seed=124))
    assert [r.stats for r in different] != [r.stats for r in first]
