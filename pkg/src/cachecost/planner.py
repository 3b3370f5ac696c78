"""Greedy cache provisioning planners.

Both planners route every object's demand to its cheapest available link and
then fill the cache budget greedily:

* ``plan_min_cost`` ranks objects by potential cost (demand times the price
  of the cheapest available link), so the cache absorbs the demand that
  would be most expensive to retrieve. This placement is cost-optimal: its
  retrieval cost always equals the analytical lower bound
  ``lower_bound_cost``.
* ``plan_max_hit`` ranks objects by demand, the classical hit-ratio-maximal
  placement.

Ranking is a deterministic total order (primary key, then the other metric
descending, then object id ascending), so identical instances always yield
byte-identical plans. Both planners allocate all cache at the borders;
internal caches are never used.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AvailabilityMap, Catalog, InstanceError, LinkTopology, PlacementPlan


@dataclass(frozen=True)
class RankedObject:
    """One object's position in a planner ranking."""

    object_id: int
    potential_cost: float
    demand: float
    cheapest_link: int


def cheapest_links(topology: LinkTopology, availability: AvailabilityMap) -> np.ndarray:
    """Assign each object the cheapest link able to supply it.

    Price ties break toward the lowest link id. Returns an int8/int16 array
    of link ids indexed by object id.
    """
    L = topology.n_links
    out_dtype = np.int8 if L <= 127 else np.int16
    mask = availability.mask
    if L <= 8:
        # 256-entry lookup table: cheapest link id per availability bitmask.
        lut = np.full(1 << L, -1, dtype=out_dtype)
        for m in range(1, 1 << L):
            for lid in topology.ids_by_price:
                if m >> lid & 1:
                    lut[m] = lid
                    break
        choice = lut[mask]
    else:
        choice = np.full(availability.n_objects, -1, dtype=out_dtype)
        mdt = mask.dtype
        for lid in reversed(topology.ids_by_price):
            has = ((mask >> mdt.type(lid)) & mdt.type(1)).astype(bool)
            choice[has] = lid
    if (choice < 0).any():
        o = int(np.flatnonzero(choice < 0)[0])
        raise InstanceError(f"availability[{o}]: object is reachable through no link")
    return choice


def potential_costs(
    topology: LinkTopology, catalog: Catalog, availability: AvailabilityMap
) -> tuple[np.ndarray, np.ndarray]:
    """Per-object potential cost and cheapest link.

    The potential cost of an object is its demand times the price of its
    cheapest available link: what serving it from outside would cost if it
    is never cached.
    """
    choice = cheapest_links(topology, availability)
    if topology.n_links <= 8:
        price_lut = np.zeros(1 << topology.n_links, dtype=np.float64)
        for m in range(1, 1 << topology.n_links):
            lid = min((l for l in range(topology.n_links) if m >> l & 1),
                      key=lambda l: (topology.links[l].price, l))
            price_lut[m] = topology.links[lid].price
        pc = catalog.demands * price_lut[availability.mask]
    else:
        pc = catalog.demands * topology.prices[choice.astype(np.int64)]
    return pc, choice


def _top_k(primary: np.ndarray, secondary: np.ndarray, k: int) -> np.ndarray:
    """Ids of the k largest by (primary desc, secondary desc, id asc).

    Avoids a full sort: only boundary ties at the k-th primary value need
    the secondary ordering. Tie detection uses exact value equality.
    """
    n = primary.size
    if k >= n:
        return np.arange(n, dtype=np.int64)
    if k == 0:
        return np.empty(0, dtype=np.int64)
    kth_value = np.partition(primary, n - k)[n - k]
    above = np.flatnonzero(primary > kth_value)
    ties = np.flatnonzero(primary == kth_value)
    need = k - above.size
    order = np.lexsort((ties, -secondary[ties]))
    chosen = np.concatenate([above, ties[order[:need]]])
    chosen.sort()
    return chosen


def _greedy_plan(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    budget: int,
    primary: np.ndarray,
    secondary: np.ndarray,
    choice: np.ndarray,
) -> PlacementPlan:
    if budget < 0:
        raise InstanceError(f"budget: expected a non-negative integer, got {budget!r}")
    k = min(int(budget), catalog.n_objects)
    cached = _top_k(primary, secondary, k)
    links = choice[cached].astype(np.int64)
    placement = np.column_stack([links, cached])
    sizes = np.bincount(links, minlength=topology.n_links)
    border_sizes = {int(l): int(c) for l, c in enumerate(sizes) if c > 0}
    choice.flags.writeable = False  # fresh array, hand it over without a copy
    return PlacementPlan(border_sizes, {}, placement, choice)


def plan_min_cost(
    topology: LinkTopology, catalog: Catalog, availability: AvailabilityMap, budget: int
) -> PlacementPlan:
    """Cost-optimal plan: cache the top-budget objects by potential cost.

    Ties in potential cost prefer the higher demand (largest hit-ratio among
    the cost-optimal placements), then the lower object id. Every cached
    object is stored at its cheapest available link, which is also where its
    demand is routed.
    """
    pc, choice = potential_costs(topology, catalog, availability)
    return _greedy_plan(topology, catalog, availability, budget, pc, catalog.demands, choice)


def plan_max_hit(
    topology: LinkTopology, catalog: Catalog, availability: AvailabilityMap, budget: int
) -> PlacementPlan:
    """Hit-ratio-optimal plan: cache the top-budget objects by demand.

    Ties in demand prefer the higher potential cost (cheapest retrieval bill
    among the hit-optimal placements), then the lower object id.
    """
    pc, choice = potential_costs(topology, catalog, availability)
    return _greedy_plan(topology, catalog, availability, budget, catalog.demands, pc, choice)


def lower_bound_cost(
    topology: LinkTopology, catalog: Catalog, availability: AvailabilityMap, budget: int
) -> float:
    """Analytical lower bound on retrieval cost for the given budget.

    Sum of potential costs of all objects outside the top-budget prefix of
    the potential-cost ranking. No plan can beat it, and the greedy
    min-cost plan attains it exactly.
    """
    if budget < 0:
        raise InstanceError(f"budget: expected a non-negative integer, got {budget!r}")
    pc, _ = potential_costs(topology, catalog, availability)
    n = pc.size
    k = min(int(budget), n)
    if k == n:
        return 0.0
    if k == 0:
        return float(pc.sum())
    kth_value = np.partition(pc, n - k)[n - k]
    above = pc[pc > kth_value]
    m = k - above.size  # boundary ties contribute m copies of the k-th value
    return float(pc.sum() - above.sum() - m * kth_value)


def ranked_objects(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    objective: str = "min-cost",
) -> list[RankedObject]:
    """Full planner ranking, materialized. Intended for small instances."""
    pc, choice = potential_costs(topology, catalog, availability)
    d = catalog.demands
    ids = np.arange(catalog.n_objects)
    if objective == "min-cost":
        order = np.lexsort((ids, -d, -pc))
    elif objective == "max-hit":
        order = np.lexsort((ids, -pc, -d))
    else:
        raise ValueError(f"objective must be 'min-cost' or 'max-hit', got {objective!r}")
    return [
        RankedObject(int(o), float(pc[o]), float(d[o]), int(choice[o]))
        for o in order
    ]
