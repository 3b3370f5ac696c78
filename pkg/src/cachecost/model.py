"""Domain model for cost-aware border caching.

An instance describes an ISP that retrieves objects through priced external
links: a catalog of per-object demands, the link topology, a per-object
availability map (which links can supply which object), and a total cache
budget. A placement plan fixes border cache sizes, the objects stored in
each border cache, and the external link each object's residual demand is
routed to. ``validate`` checks a plan against every feasibility constraint
and ``evaluate`` computes the resulting retrieval cost and hit-ratio in
closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised when instance data (links, demands, availability) is invalid."""


class InfeasiblePlanError(ValueError):
    """Raised when an operation requires a feasible plan but got violations."""

    def __init__(self, verdict: "ValidationVerdict"):
        super().__init__("infeasible plan: " + "; ".join(verdict.violations))
        self.verdict = verdict


class UnsupportedPlanError(ValueError):
    """Raised for plans with non-empty internal caches.

    The fraction of demand absorbed by internal caches has no defined
    evaluation rule in this model (optimal plans never allocate internal
    cache), so such plans are rejected rather than silently mis-scored.
    """


class LinkCategory(Enum):
    PEERING = "peering"
    PROVIDER = "provider"
    CUSTOMER = "customer"


@dataclass(frozen=True)
class Link:
    """An external link with a per-object retrieval price.

    Peering links are free, provider links cost ``price`` per retrieved
    object. Customer links generate income rather than cost and are rejected:
    caching an object reachable through one would lose income, so they are
    not part of a cost-minimization instance.
    """

    id: int
    price: float
    category: LinkCategory

    def __post_init__(self):
        if not isinstance(self.id, (int, np.integer)) or self.id < 0:
            raise InstanceError(f"link id must be a non-negative integer, got {self.id!r}")
        if self.category is LinkCategory.CUSTOMER:
            raise InstanceError(
                f"links[{self.id}].category: customer links are income, not cost, "
                "and are not allowed in an instance; remove the link"
            )
        price = float(self.price)
        if not np.isfinite(price) or price < 0:
            raise InstanceError(f"links[{self.id}].price: expected a finite non-negative number, got {self.price!r}")
        if self.category is LinkCategory.PEERING and price != 0.0:
            raise InstanceError(f"links[{self.id}]: peering links must have price 0, got {price}")
        if self.category is LinkCategory.PROVIDER and price <= 0.0:
            raise InstanceError(f"links[{self.id}]: provider links must have price > 0, got {price}")
        object.__setattr__(self, "price", price)

    @staticmethod
    def peering(link_id: int) -> "Link":
        return Link(link_id, 0.0, LinkCategory.PEERING)

    @staticmethod
    def provider(link_id: int, price: float) -> "Link":
        return Link(link_id, price, LinkCategory.PROVIDER)


@dataclass(frozen=True)
class LinkTopology:
    """The set of external links, with ids required to be 0..L-1."""

    links: tuple[Link, ...]

    def __post_init__(self):
        links = tuple(sorted(self.links, key=lambda l: l.id))
        if not links:
            raise InstanceError("topology must contain at least one external link")
        ids = [l.id for l in links]
        if ids != list(range(len(links))):
            raise InstanceError(f"link ids must be contiguous 0..{len(links) - 1}, got {sorted(ids)}")
        object.__setattr__(self, "links", links)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @cached_property
    def prices(self) -> np.ndarray:
        p = np.array([l.price for l in self.links], dtype=np.float64)
        p.flags.writeable = False
        return p

    @cached_property
    def ids_by_price(self) -> tuple[int, ...]:
        """Link ids sorted by (price, id): the cheapest-first scan order."""
        return tuple(sorted(range(self.n_links), key=lambda i: (self.links[i].price, i)))

    def __iter__(self) -> Iterator[Link]:
        return iter(self.links)


@dataclass(frozen=True)
class Catalog:
    """Per-object demand weights; object id is the array index."""

    demands: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.demands, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise InstanceError("demands must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(d)):
            bad = int(np.flatnonzero(~np.isfinite(d))[0])
            raise InstanceError(f"demands[{bad}]: expected a finite number, got {d[bad]!r}")
        if np.any(d < 0):
            bad = int(np.flatnonzero(d < 0)[0])
            raise InstanceError(f"demands[{bad}]: negative demand {d[bad]!r}")
        if not np.any(d > 0):
            raise InstanceError("at least one object must have positive demand")
        d.flags.writeable = False
        object.__setattr__(self, "demands", d)

    @staticmethod
    def from_demands(values: Sequence[float]) -> "Catalog":
        return Catalog(np.asarray(values, dtype=np.float64))

    @property
    def n_objects(self) -> int:
        return int(self.demands.size)

    @cached_property
    def total_demand(self) -> float:
        return float(self.demands.sum())


def _mask_dtype(n_links: int):
    for dt in (np.uint8, np.uint16, np.uint32, np.uint64):
        if n_links <= np.iinfo(dt).bits:
            return dt
    raise InstanceError(f"at most 64 external links supported, got {n_links}")


@dataclass(frozen=True)
class AvailabilityMap:
    """Per-object set of links that can supply the object, as bitmasks.

    ``mask[o]`` has bit ``l`` set iff object ``o`` is retrievable through
    link ``l``. Every object must be retrievable through at least one link.
    """

    mask: np.ndarray
    n_links: int

    def __post_init__(self):
        if self.n_links < 1:
            raise InstanceError("availability map needs at least one link")
        dt = _mask_dtype(self.n_links)
        m = np.ascontiguousarray(self.mask, dtype=dt)
        if m.ndim != 1:
            raise InstanceError("availability mask must be 1-d")
        if np.any(m == 0):
            bad = int(np.flatnonzero(m == 0)[0])
            raise InstanceError(f"availability[{bad}]: object is reachable through no link")
        if self.n_links < np.iinfo(dt).bits:
            limit = dt(1) << dt(self.n_links)
            if np.any(m >= limit):
                bad = int(np.flatnonzero(m >= limit)[0])
                raise InstanceError(f"availability[{bad}]: references a link id >= {self.n_links}")
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)

    @staticmethod
    def from_sets(link_sets: Iterable[Iterable[int]], n_links: int) -> "AvailabilityMap":
        dt = _mask_dtype(n_links)
        masks = []
        for o, links in enumerate(link_sets):
            m = 0
            for l in links:
                l = int(l)
                if not 0 <= l < n_links:
                    raise InstanceError(f"availability[{o}]: link id {l} not in topology (0..{n_links - 1})")
                m |= 1 << l
            masks.append(m)
        return AvailabilityMap(np.array(masks, dtype=dt), n_links)

    @property
    def n_objects(self) -> int:
        return int(self.mask.size)

    def links_for(self, obj: int) -> tuple[int, ...]:
        m = int(self.mask[obj])
        return tuple(l for l in range(self.n_links) if m >> l & 1)

    def to_sets(self) -> list[list[int]]:
        return [list(self.links_for(o)) for o in range(self.n_objects)]

    def has_link(self, link_ids: np.ndarray) -> np.ndarray:
        """Vectorized ``link_ids[o] in L_o`` membership test."""
        dt = self.mask.dtype
        return ((self.mask >> link_ids.astype(dt)) & dt.type(1)).astype(bool)


@dataclass(frozen=True)
class Instance:
    """A complete problem instance: topology, catalog, availability, budget."""

    topology: LinkTopology
    catalog: Catalog
    availability: AvailabilityMap
    budget: int

    def __post_init__(self):
        if not isinstance(self.budget, (int, np.integer)) or self.budget < 0:
            raise InstanceError(f"budget: expected a non-negative integer, got {self.budget!r}")
        object.__setattr__(self, "budget", int(self.budget))
        if self.availability.n_objects != self.catalog.n_objects:
            raise InstanceError(
                f"availability covers {self.availability.n_objects} objects "
                f"but the catalog has {self.catalog.n_objects}"
            )
        if self.availability.n_links != self.topology.n_links:
            raise InstanceError(
                f"availability assumes {self.availability.n_links} links "
                f"but the topology has {self.topology.n_links}"
            )


@dataclass(eq=False)
class PlacementPlan:
    """Border cache sizes, object placement, and per-object path selection.

    ``border_placement`` is a (k, 2) array of (link id, object id) rows in
    canonical (link, object) order; ``path_selection[o]`` is the external
    link the residual demand for object ``o`` is routed to. ``border_sizes``
    and ``internal_sizes`` map link/router id to cache size in objects;
    zero sizes may be omitted.
    """

    border_sizes: dict[int, int]
    internal_sizes: dict[int, int]
    border_placement: np.ndarray
    path_selection: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.border_placement, dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((bp[:, 1], bp[:, 0]))
        bp = bp[order]
        bp.flags.writeable = False
        self.border_placement = bp
        ps = np.asarray(self.path_selection)
        if not np.issubdtype(ps.dtype, np.integer):
            raise InstanceError("path_selection must hold integer link ids")
        if ps.flags.writeable:
            ps = ps.copy()
            ps.flags.writeable = False
        self.path_selection = ps
        self.border_sizes = {int(k): int(v) for k, v in sorted(self.border_sizes.items())}
        self.internal_sizes = {int(k): int(v) for k, v in sorted(self.internal_sizes.items())}

    @staticmethod
    def empty(path_selection: np.ndarray) -> "PlacementPlan":
        return PlacementPlan({}, {}, np.empty((0, 2), dtype=np.int64), path_selection)

    @property
    def total_border_size(self) -> int:
        return sum(self.border_sizes.values())

    @property
    def total_internal_size(self) -> int:
        return sum(self.internal_sizes.values())

    def placement_pairs(self) -> set[tuple[int, int]]:
        return {(int(l), int(o)) for l, o in self.border_placement}

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlacementPlan):
            return NotImplemented
        return (
            self.border_sizes == other.border_sizes
            and self.internal_sizes == other.internal_sizes
            and np.array_equal(self.border_placement, other.border_placement)
            and np.array_equal(self.path_selection, other.path_selection)
        )


@dataclass(frozen=True)
class ValidationVerdict:
    """Outcome of a feasibility check: empty violations means feasible."""

    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class EvaluationReport:
    """Closed-form plan metrics: retrieval cost, hit-ratio, per-link outflow."""

    total_cost: float
    hit_ratio: float
    per_link_outflow: dict[int, float]
    core_hit_fraction: float = 0.0


def _plan_violations(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    plan: PlacementPlan,
    budget: int | None,
) -> list[str]:
    out: list[str] = []
    n, L = catalog.n_objects, topology.n_links

    for rid, size in plan.internal_sizes.items():
        if size < 0:
            out.append(f"internal_sizes[{rid}]: negative size {size}")
    for lid, size in plan.border_sizes.items():
        if size < 0:
            out.append(f"border_sizes[{lid}]: negative size {size}")
        if not 0 <= lid < L:
            out.append(f"border_sizes: unknown link id {lid}")

    ps = plan.path_selection
    if ps.shape != (n,):
        out.append(f"path_selection: expected one link per object ({n}), got shape {ps.shape}")
        return out
    bad_range = (ps < 0) | (ps >= L)
    if bad_range.any():
        o = int(np.flatnonzero(bad_range)[0])
        out.append(f"path_selection[{o}]: link id {int(ps[o])} not in topology (0..{L - 1})")
    else:
        positive = catalog.demands > 0
        ok = availability.has_link(ps)
        bad = positive & ~ok
        if bad.any():
            o = int(np.flatnonzero(bad)[0])
            out.append(
                f"path_selection[{o}]: object with positive demand routed to link "
                f"{int(ps[o])} which cannot supply it ({bad.sum()} such objects)"
            )

    bp = plan.border_placement
    counts = np.zeros(L, dtype=np.int64)
    if bp.size:
        links, objs = bp[:, 0], bp[:, 1]
        if ((links < 0) | (links >= L)).any():
            out.append("border_placement: contains link ids outside the topology")
        elif ((objs < 0) | (objs >= n)).any():
            out.append("border_placement: contains object ids outside the catalog")
        else:
            counts = np.bincount(links, minlength=L)
            if len(np.unique(bp, axis=0)) != len(bp):
                out.append("border_placement: duplicate (link, object) pair")
            mdt = availability.mask.dtype
            unavailable = ~(((availability.mask[objs] >> links.astype(mdt)) & mdt.type(1)).astype(bool))
            if unavailable.any():
                i = int(np.flatnonzero(unavailable)[0])
                out.append(
                    f"border_placement: object {int(objs[i])} placed at link {int(links[i])} "
                    f"which cannot supply it ({int(unavailable.sum())} such pairs)"
                )

    for l in range(L):
        declared = plan.border_sizes.get(l, 0)
        if declared != int(counts[l]):
            out.append(f"border_sizes[{l}]: declares {declared} objects but placement stores {int(counts[l])}")

    if budget is not None:
        total = plan.total_border_size + plan.total_internal_size
        if total > budget:
            out.append(f"cache budget: total size {total} exceeds budget {budget}")
    return out


def validate(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    plan: PlacementPlan,
    budget: int,
) -> ValidationVerdict:
    """Check a plan against all feasibility constraints.

    Returns a verdict listing every violated constraint (budget, cache size
    accounting, placement availability, path selection availability); an
    empty list confirms feasibility. Never raises for an infeasible plan.
    """
    return ValidationVerdict(tuple(_plan_violations(topology, catalog, availability, plan, budget)))


def evaluate(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    plan: PlacementPlan,
) -> EvaluationReport:
    """Compute retrieval cost and hit-ratio of a feasible plan in closed form.

    With no internal caches the full demand of object ``o`` reaches the
    border at link ``path_selection[o]``; it exits (and is billed at that
    link's price) unless the object is stored in that border cache. The
    hit-ratio is the demand-weighted fraction of requests served by caches.

    Raises ``InfeasiblePlanError`` if the plan violates placement or routing
    constraints, and ``UnsupportedPlanError`` for plans with internal caches
    (no evaluation rule exists for the core filtering fraction).
    """
    if plan.total_internal_size > 0:
        raise UnsupportedPlanError(
            "plans with non-empty internal caches cannot be evaluated: the fraction "
            "of demand served inside the core is undefined in this model"
        )
    violations = _plan_violations(topology, catalog, availability, plan, budget=None)
    if violations:
        raise InfeasiblePlanError(ValidationVerdict(tuple(violations)))

    d = catalog.demands
    ps = plan.path_selection.astype(np.int64, copy=False)
    L = topology.n_links

    # Residual (outflowing) demand: zero out objects served by the border
    # cache on their own route, then aggregate per link. Summing the zeroed
    # weights keeps full-cache costs exactly 0.0.
    residual = d.copy()
    bp = plan.border_placement
    if bp.size:
        served = bp[:, 0] == ps[bp[:, 1]]
        residual[bp[served, 1]] = 0.0
    outflow = np.bincount(ps, weights=residual, minlength=L)

    total_cost = float(topology.prices @ outflow)
    # summing the residual array directly (same shape as the demand array)
    # keeps the empty plan at hit 0.0 and the full cache at hit 1.0 exactly
    hit = 1.0 - float(residual.sum()) / catalog.total_demand
    hit_ratio = min(max(hit, 0.0), 1.0)
    return EvaluationReport(
        total_cost=total_cost,
        hit_ratio=hit_ratio,
        per_link_outflow={l: float(outflow[l]) for l in range(L)},
        core_hit_fraction=0.0,
    )
