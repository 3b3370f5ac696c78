"""Exhaustive reference solvers for toy instances.

The brute-force solvers enumerate every cached-object subset within the
budget and, per object, every routing link and every placement link, keeping
the best configuration. They exist purely to certify the greedy planners:
``certify`` generates seeded random small instances and checks that the
greedy min-cost plan matches both the enumerated optimum and the analytical
lower bound, and that the greedy max-hit plan matches the enumerated
hit-ratio optimum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .model import (
    AvailabilityMap,
    Catalog,
    Instance,
    Link,
    LinkTopology,
    PlacementPlan,
    evaluate,
)
from .planner import lower_bound_cost, plan_max_hit, plan_min_cost

REL_TOL = 1e-9
ABS_TOL = 1e-12


class SearchSpaceExceeded(ValueError):
    """Raised instead of silently truncating an oversized enumeration."""


@dataclass(frozen=True)
class SmallInstanceLimits:
    """Bounds on what the brute-force solvers will accept."""

    max_objects: int = 8
    max_links: int = 3
    max_budget: int = 4
    node_budget: int = 10_000_000


DEFAULT_LIMITS = SmallInstanceLimits()


def _subset_count(n: int, budget: int) -> int:
    return sum(math.comb(n, k) for k in range(min(n, budget) + 1))


def _check_limits(instance: Instance, limits: SmallInstanceLimits) -> None:
    n = instance.catalog.n_objects
    L = instance.topology.n_links
    b = min(instance.budget, n)
    if n > limits.max_objects:
        raise SearchSpaceExceeded(f"{n} objects exceeds limit {limits.max_objects}")
    if L > limits.max_links:
        raise SearchSpaceExceeded(f"{L} links exceeds limit {limits.max_links}")
    if b > limits.max_budget:
        raise SearchSpaceExceeded(f"effective budget {b} exceeds limit {limits.max_budget}")
    states = _subset_count(n, b) * n * L * L
    if states > limits.node_budget:
        raise SearchSpaceExceeded(f"~{states} enumeration states exceed node budget {limits.node_budget}")


def _object_options(instance: Instance, obj: int, cached: bool):
    """All (cost, hit demand, route, placement) choices for one object.

    Demand can only be served (hit) when the object is placed at the very
    link it is routed to; a mismatched placement wastes the cache slot.
    """
    d = float(instance.catalog.demands[obj])
    links = instance.availability.links_for(obj)
    prices = instance.topology.prices
    if not cached:
        for route in links:
            yield d * float(prices[route]), 0.0, route, None
    else:
        for route in links:
            for placed in links:
                if placed == route:
                    yield 0.0, d, route, placed
                else:
                    yield d * float(prices[route]), 0.0, route, placed


def _best_for_subset(instance: Instance, subset: frozenset[int], objective: str):
    """Best (cost, hit demand, routes, placements) for a fixed cached set.

    The objective decomposes per object once the cached set is fixed, and
    for every object one option weakly dominates on both axes, so the
    per-object optimum is also the configuration optimum for either
    objective ordering.
    """
    total_cost = 0.0
    total_hit = 0.0
    routes: list[int] = []
    placements: dict[int, int] = {}
    for obj in range(instance.catalog.n_objects):
        best = None
        for cost, hit, route, placed in _object_options(instance, obj, obj in subset):
            key = (cost, -hit) if objective == "cost" else (-hit, cost)
            if best is None or key < best[0]:
                best = (key, cost, hit, route, placed)
        _, cost, hit, route, placed = best
        total_cost += cost
        total_hit += hit
        routes.append(route)
        if placed is not None:
            placements[obj] = placed
    return total_cost, total_hit, routes, placements


def _iter_subsets(n: int, budget: int) -> Iterator[frozenset[int]]:
    for k in range(min(n, budget) + 1):
        for combo in itertools.combinations(range(n), k):
            yield frozenset(combo)


def _subset_plan(instance: Instance, routes: list[int], placements: dict[int, int]) -> PlacementPlan:
    pairs = np.array([[l, o] for o, l in sorted(placements.items())], dtype=np.int64).reshape(-1, 2)
    sizes: dict[int, int] = {}
    for l in placements.values():
        sizes[l] = sizes.get(l, 0) + 1
    return PlacementPlan(sizes, {}, pairs, np.array(routes, dtype=np.int64))


def brute_force_min_cost(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    budget: int,
    limits: SmallInstanceLimits = DEFAULT_LIMITS,
) -> tuple[float, PlacementPlan]:
    """Exact minimum retrieval cost over every feasible configuration.

    Returns the optimum and one plan attaining it. Refuses instances whose
    enumeration would exceed the configured node budget.
    """
    instance = Instance(topology, catalog, availability, budget)
    _check_limits(instance, limits)
    best = None
    for subset in _iter_subsets(catalog.n_objects, budget):
        cost, hit, routes, placements = _best_for_subset(instance, subset, "cost")
        if best is None or (cost, -hit) < (best[0], -best[1]):
            best = (cost, hit, routes, placements)
    cost, _, routes, placements = best
    return cost, _subset_plan(instance, routes, placements)


def brute_force_max_hit(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    budget: int,
    limits: SmallInstanceLimits = DEFAULT_LIMITS,
) -> tuple[float, float]:
    """Exact maximum hit-ratio, with the minimum cost among hit-optimal configs.

    The hit-optimal tie set is not materialized; the best cost within it is
    tracked incrementally.
    """
    instance = Instance(topology, catalog, availability, budget)
    _check_limits(instance, limits)
    total_demand = catalog.total_demand
    # Cached-demand sums of genuinely tied subsets can differ by a few ulps
    # depending on summation order; treat sums within tol as the same tie set.
    tol = REL_TOL * total_demand
    best_hit = -math.inf
    best_cost = math.inf
    for subset in _iter_subsets(catalog.n_objects, budget):
        cost, hit, _, _ = _best_for_subset(instance, subset, "hit")
        if hit > best_hit + tol:
            best_hit, best_cost = hit, cost
        elif hit >= best_hit - tol:
            best_hit = max(best_hit, hit)
            best_cost = min(best_cost, cost)
    return best_hit / total_demand, best_cost


# --------------------------------------------------------------------------
# Certification of the greedy planners against the oracle


@dataclass(frozen=True)
class CertificationResult:
    index: int
    ok: bool
    detail: str
    stats: dict = field(default_factory=dict)


def random_small_instance(rng: np.random.Generator, limits: SmallInstanceLimits = DEFAULT_LIMITS) -> Instance:
    """A random toy instance within the oracle limits.

    Prices are 0 or in [0.1, 10]; demands and prices mix discrete and
    continuous values so that potential-cost ties (and hence the planners'
    tie-break rules) actually occur in the family.
    """
    n = int(rng.integers(1, limits.max_objects + 1))
    L = int(rng.integers(1, limits.max_links + 1))
    budget = int(rng.integers(0, limits.max_budget + 1))

    links = []
    for lid in range(L):
        r = rng.random()
        if r < 0.3:
            links.append(Link.peering(lid))
        elif r < 0.65:
            links.append(Link.provider(lid, float(rng.choice([0.5, 1.0, 2.0, 10.0]))))
        else:
            links.append(Link.provider(lid, float(rng.uniform(0.1, 10.0))))
    topology = LinkTopology(tuple(links))

    demands = np.empty(n)
    for o in range(n):
        r = rng.random()
        if r < 0.1:
            demands[o] = 0.0
        elif r < 0.6:
            demands[o] = float(rng.integers(1, 5))
        else:
            demands[o] = float(rng.uniform(0.1, 10.0))
    if not (demands > 0).any():
        demands[int(rng.integers(0, n))] = float(rng.integers(1, 5))
    catalog = Catalog(demands)

    mask = rng.integers(1, 1 << L, size=n, dtype=np.uint8)
    availability = AvailabilityMap(mask, L)
    return Instance(topology, catalog, availability, budget)


def _random_feasible_plan(instance: Instance, rng: np.random.Generator) -> PlacementPlan:
    n = instance.catalog.n_objects
    routes = np.array(
        [int(rng.choice(instance.availability.links_for(o))) for o in range(n)], dtype=np.int64
    )
    k = int(rng.integers(0, min(instance.budget, n) + 1))
    cached = rng.choice(n, size=k, replace=False)
    placements = {int(o): int(rng.choice(instance.availability.links_for(int(o)))) for o in cached}
    return _subset_plan(instance, list(routes), placements)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=ABS_TOL)


def check_instance(instance: Instance, rng: np.random.Generator | None = None,
                   limits: SmallInstanceLimits = DEFAULT_LIMITS) -> tuple[bool, str, dict]:
    """Certify both greedy planners against the oracle on one instance."""
    t, c, a, b = instance.topology, instance.catalog, instance.availability, instance.budget
    greedy_cost = evaluate(t, c, a, plan_min_cost(t, c, a, b)).total_cost
    max_hit_report = evaluate(t, c, a, plan_max_hit(t, c, a, b))
    greedy_hit = max_hit_report.hit_ratio
    greedy_hit_cost = max_hit_report.total_cost
    lb = lower_bound_cost(t, c, a, b)
    oracle_cost, _ = brute_force_min_cost(t, c, a, b, limits)
    oracle_hit, oracle_hit_cost = brute_force_max_hit(t, c, a, b, limits)

    stats = {
        "n": c.n_objects, "links": t.n_links, "budget": b,
        "greedy_cost": greedy_cost, "oracle_cost": oracle_cost, "lower_bound": lb,
        "greedy_hit": greedy_hit, "oracle_hit": oracle_hit,
    }
    if not _close(greedy_cost, oracle_cost):
        return False, f"greedy cost {greedy_cost!r} != oracle optimum {oracle_cost!r}", stats
    if not _close(greedy_cost, lb):
        return False, f"greedy cost {greedy_cost!r} != lower bound {lb!r}", stats
    if not _close(greedy_hit, oracle_hit):
        return False, f"greedy hit-ratio {greedy_hit!r} != oracle optimum {oracle_hit!r}", stats
    if not _close(greedy_hit_cost, oracle_hit_cost):
        return False, f"greedy max-hit cost {greedy_hit_cost!r} != oracle best {oracle_hit_cost!r}", stats
    if rng is not None:
        probe = evaluate(t, c, a, _random_feasible_plan(instance, rng))
        if probe.total_cost < oracle_cost and not _close(probe.total_cost, oracle_cost):
            return False, f"random feasible plan cost {probe.total_cost!r} beats oracle optimum", stats
        if probe.hit_ratio > oracle_hit and not _close(probe.hit_ratio, oracle_hit):
            return False, f"random feasible plan hit {probe.hit_ratio!r} beats oracle optimum", stats
    return True, "", stats


def _certify_one(args) -> CertificationResult:
    index, seed, limits = args
    from .scenario import scenario_rng

    rng = scenario_rng(seed, index)
    instance = random_small_instance(rng, limits)
    ok, detail, stats = check_instance(instance, rng, limits)
    return CertificationResult(index, ok, detail, stats)


def certify(
    n_instances: int,
    seed: int,
    limits: SmallInstanceLimits = DEFAULT_LIMITS,
    workers: int | None = None,
) -> Iterator[CertificationResult]:
    """Stream certification results over seeded random small instances.

    Instance ``i`` is generated from sub-seed ``(seed, i)``, so the family
    is stable regardless of worker count or execution order.
    """
    tasks = [(i, seed, limits) for i in range(n_instances)]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(_certify_one, tasks, chunksize=32)
    else:
        for task in tasks:
            yield _certify_one(task)
