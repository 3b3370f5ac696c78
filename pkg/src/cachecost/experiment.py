"""Sweep harness contrasting cost-optimal and hit-optimal cache designs.

For every (gamma, alpha, budget) point the harness generates a batch of
random-availability scenarios, plans each one with both objectives and
records the relative cost saving of the cost-aware design, the hit-ratio it
sacrifices, and how the min-cost plan splits the cache budget across border
links. Per-point aggregates carry Student-t confidence intervals.

``replay_requests`` is a validation tool, not a metric path: it quantizes
demands into an explicit request trace, routes and charges each request
individually, and must agree with the closed-form evaluation.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
import scipy.stats

from .model import (
    AvailabilityMap,
    Catalog,
    InfeasiblePlanError,
    LinkTopology,
    PlacementPlan,
    ValidationVerdict,
    _plan_violations,
    evaluate,
)
from .planner import plan_max_hit, plan_min_cost
from .scenario import three_link_topology, sample_availability, scenario_rng

log = logging.getLogger("cachecost.experiment")

TRACE_REQUEST_LIMIT = 100_000_000


@dataclass(frozen=True)
class SweepSpec:
    """Grid of experiment points plus batch and aggregation settings."""

    gammas: tuple[float, ...]
    alphas: tuple[float, ...]
    budgets: tuple[int, ...]
    catalog_size: int
    seed: int
    scenarios_per_point: int = 40
    confidence: float = 0.95
    availability_prob: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if not (self.gammas and self.alphas and self.budgets):
            raise ValueError("sweep needs at least one gamma, alpha and budget")
        if self.scenarios_per_point < 2:
            raise ValueError("confidence intervals need at least 2 scenarios per point")
        if not 0.0 <= self.confidence < 1.0:
            raise ValueError(f"confidence: expected in [0, 1), got {self.confidence}")

    def points(self) -> list[tuple[float, float, int]]:
        return [(g, a, b) for g in self.gammas for a in self.alphas for b in self.budgets]

    def resolved_config(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScenarioResult:
    """Metrics of one scenario at one sweep point."""

    scenario_index: int
    cost_min: float
    hit_min: float
    cost_hit: float
    hit_hit: float
    cost_saving: float
    cost_saving_defined: bool
    hit_ratio_loss: float
    hit_ratio_loss_defined: bool
    cache_shares: tuple[float, ...] | None
    total_border_size: int


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated metrics (mean, CI half-width) for one grid point."""

    gamma: float
    alpha: float
    budget: int
    cost_saving_mean: float
    cost_saving_half_width: float
    hit_ratio_loss_mean: float
    hit_ratio_loss_half_width: float
    share_means: tuple[float, ...] | None
    share_half_widths: tuple[float, ...] | None
    cost_saving_undefined: int
    hit_ratio_loss_undefined: int
    scenarios: tuple[ScenarioResult, ...]


def confidence_interval(samples, confidence: float = 0.95) -> tuple[float, float]:
    """Student-t interval on the sample mean: (mean, half-width).

    With fewer than 2 samples no interval exists; the half-width is NaN.
    """
    if not 0.0 <= confidence < 1.0:
        raise ValueError(f"confidence: expected in [0, 1), got {confidence}")
    x = np.asarray(samples, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("confidence_interval needs at least one sample")
    mean = float(x.mean())
    if n < 2:
        return mean, math.nan
    if confidence == 0.0:
        return mean, 0.0
    s = float(x.std(ddof=1))
    t = float(scipy.stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    return mean, t * s / math.sqrt(n)


@lru_cache(maxsize=4)
def _cached_catalog(n_objects: int, alpha: float) -> Catalog:
    from .scenario import zipf_catalog

    return zipf_catalog(n_objects, alpha)


def _run_scenario(args) -> ScenarioResult:
    gamma, alpha, budget, catalog_size, prob, seed, index = args
    t = three_link_topology(gamma)
    c = _cached_catalog(catalog_size, alpha)
    a = sample_availability(catalog_size, t, prob, scenario_rng(seed, index))

    min_plan = plan_min_cost(t, c, a, budget)
    min_rep = evaluate(t, c, a, min_plan)
    hit_plan = plan_max_hit(t, c, a, budget)
    hit_rep = evaluate(t, c, a, hit_plan)

    saving_defined = hit_rep.total_cost > 0.0
    saving = (hit_rep.total_cost - min_rep.total_cost) / hit_rep.total_cost if saving_defined else 0.0
    loss_defined = hit_rep.hit_ratio > 0.0
    loss = (hit_rep.hit_ratio - min_rep.hit_ratio) / hit_rep.hit_ratio if loss_defined else 0.0

    total_size = min_plan.total_border_size
    if total_size > 0:
        shares = tuple(
            min_plan.border_sizes.get(l, 0) / total_size for l in range(t.n_links)
        )
    else:
        shares = None

    return ScenarioResult(
        scenario_index=index,
        cost_min=min_rep.total_cost,
        hit_min=min_rep.hit_ratio,
        cost_hit=hit_rep.total_cost,
        hit_hit=hit_rep.hit_ratio,
        cost_saving=saving,
        cost_saving_defined=saving_defined,
        hit_ratio_loss=loss,
        hit_ratio_loss_defined=loss_defined,
        cache_shares=shares,
        total_border_size=total_size,
    )


def _aggregate(gamma: float, alpha: float, budget: int,
               results: list[ScenarioResult], confidence: float) -> SweepPoint:
    saving_mean, saving_hw = confidence_interval([r.cost_saving for r in results], confidence)
    loss_mean, loss_hw = confidence_interval([r.hit_ratio_loss for r in results], confidence)
    with_shares = [r for r in results if r.cache_shares is not None]
    if with_shares:
        n_links = len(with_shares[0].cache_shares)
        means, hws = [], []
        for l in range(n_links):
            m, hw = confidence_interval([r.cache_shares[l] for r in with_shares], confidence)
            means.append(m)
            hws.append(hw)
        share_means, share_hws = tuple(means), tuple(hws)
    else:
        share_means = share_hws = None
    return SweepPoint(
        gamma=gamma,
        alpha=alpha,
        budget=budget,
        cost_saving_mean=saving_mean,
        cost_saving_half_width=saving_hw,
        hit_ratio_loss_mean=loss_mean,
        hit_ratio_loss_half_width=loss_hw,
        share_means=share_means,
        share_half_widths=share_hws,
        cost_saving_undefined=sum(not r.cost_saving_defined for r in results),
        hit_ratio_loss_undefined=sum(not r.hit_ratio_loss_defined for r in results),
        scenarios=tuple(results),
    )


def _scenario_tasks(spec: SweepSpec):
    for gamma, alpha, budget in spec.points():
        for s in range(spec.scenarios_per_point):
            yield (gamma, alpha, budget, spec.catalog_size, spec.availability_prob, spec.seed, s)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepPoint]:
    """Run every point of the sweep; scenario order never affects results.

    Scenario ``s`` always uses sub-seed ``(seed, s)``, so the same
    availability maps are paired across gamma/alpha/budget points.
    """
    tasks = list(_scenario_tasks(spec))
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_run_scenario, tasks, chunksize=1))
    else:
        raw = [_run_scenario(t) for t in tasks]

    points: list[SweepPoint] = []
    per_point = spec.scenarios_per_point
    for i, (gamma, alpha, budget) in enumerate(spec.points()):
        results = raw[i * per_point:(i + 1) * per_point]
        points.append(_aggregate(gamma, alpha, budget, results, spec.confidence))
        log.info(
            "point gamma=%g alpha=%g budget=%d: saving=%.4f loss=%.4f",
            gamma, alpha, budget, points[-1].cost_saving_mean, points[-1].hit_ratio_loss_mean,
        )
    return points


def run_point(
    gamma: float,
    alpha: float,
    budget: int,
    catalog_size: int,
    scenarios: int,
    seed: int,
    availability_prob: float = 0.5,
    confidence: float = 0.95,
    workers: int | None = None,
) -> SweepPoint:
    """Generate, plan and aggregate all scenarios of one grid point."""
    spec = SweepSpec(
        gammas=(gamma,), alphas=(alpha,), budgets=(budget,),
        catalog_size=catalog_size, seed=seed, scenarios_per_point=scenarios,
        confidence=confidence, availability_prob=availability_prob,
    )
    return run_sweep(spec, workers=workers)[0]


# --------------------------------------------------------------------------
# Request-trace replay (validation path for the closed-form evaluation)


@dataclass(frozen=True)
class RequestTrace:
    """Explicit request multiset: ``counts[o]`` requests per object.

    ``object_ids`` lists the requests in ascending object order; each demand
    unit stands for ``quantum`` demand.
    """

    object_ids: np.ndarray
    counts: np.ndarray
    quantum: float


def _quantized_counts(demands: np.ndarray, quantum: float,
                      path_selection: np.ndarray, charged: np.ndarray, n_links: int) -> np.ndarray:
    """Integer request counts per object, approximately demand/quantum.

    Counts are rounded with error feedback along each routing link's stream
    of charged objects, so the quantized charged demand per link stays
    within half a quantum of the true value (each individual count is
    within one of plain rounding). Uncharged objects round independently.
    """
    counts = np.floor(demands / quantum + 0.5).astype(np.int64)
    for link in range(n_links):
        stream = np.flatnonzero(charged & (path_selection == link))
        if stream.size == 0:
            continue
        cum = np.cumsum(demands[stream])
        quantized = np.floor(cum / quantum + 0.5).astype(np.int64)
        counts[stream] = np.diff(quantized, prepend=np.int64(0))
    return counts


def build_request_trace(
    catalog: Catalog, plan: PlacementPlan, topology: LinkTopology, quantum: float
) -> RequestTrace:
    """Quantize demands into an explicit per-object request trace."""
    if not quantum > 0:
        raise ValueError(f"quantum must be positive, got {quantum!r}")
    if catalog.total_demand / quantum > 2 * TRACE_REQUEST_LIMIT:
        raise ValueError(
            f"quantum {quantum!r} is too fine: trace would hold ~{catalog.total_demand / quantum:.3g} requests"
        )
    d = catalog.demands
    ps = plan.path_selection.astype(np.int64, copy=False)
    served = np.zeros(catalog.n_objects, dtype=bool)
    bp = plan.border_placement
    if bp.size:
        match = bp[:, 0] == ps[bp[:, 1]]
        served[bp[match, 1]] = True
    counts = _quantized_counts(d, quantum, ps, ~served, topology.n_links)
    total = int(counts.sum())
    if total == 0:
        raise ValueError(f"quantum {quantum!r} is too coarse: every request count rounds to zero")
    if total > TRACE_REQUEST_LIMIT:
        raise ValueError(f"quantum {quantum!r} is too fine: trace would hold {total} requests")
    object_ids = np.repeat(np.arange(catalog.n_objects, dtype=np.int64), counts)
    return RequestTrace(object_ids=object_ids, counts=counts, quantum=quantum)


def replay_requests(
    topology: LinkTopology,
    catalog: Catalog,
    availability: AvailabilityMap,
    plan: PlacementPlan,
    quantum: float | None = None,
) -> float:
    """Total retrieval cost by replaying an explicit request trace.

    Each request for object ``o`` goes to ``path_selection[o]``; it is free
    when that link's border cache stores the object and costs the link price
    otherwise. The result converges to ``evaluate(...).total_cost`` as the
    quantum shrinks and matches it exactly when every demand is an integer
    multiple of the quantum.
    """
    violations = _plan_violations(topology, catalog, availability, plan, budget=None)
    if violations:
        raise InfeasiblePlanError(ValidationVerdict(tuple(violations)))
    if quantum is None:
        quantum = float(catalog.demands.max()) / 1e4
    trace = build_request_trace(catalog, plan, topology, quantum)

    ps = plan.path_selection.astype(np.int64, copy=False)
    served = np.zeros(catalog.n_objects, dtype=bool)
    bp = plan.border_placement
    if bp.size:
        match = bp[:, 0] == ps[bp[:, 1]]
        served[bp[match, 1]] = True

    routes = ps[trace.object_ids]
    charges = np.where(served[trace.object_ids], 0.0, topology.prices[routes])
    return float(charges.sum()) * trace.quantum


# --------------------------------------------------------------------------
# Result serialization


def _point_row(point: SweepPoint, n_links: int) -> dict:
    row = {
        "gamma": point.gamma,
        "alpha": point.alpha,
        "budget": point.budget,
        "scenarios": len(point.scenarios),
        "cost_saving_mean": point.cost_saving_mean,
        "cost_saving_half_width": point.cost_saving_half_width,
        "hit_ratio_loss_mean": point.hit_ratio_loss_mean,
        "hit_ratio_loss_half_width": point.hit_ratio_loss_half_width,
        "cost_saving_undefined": point.cost_saving_undefined,
        "hit_ratio_loss_undefined": point.hit_ratio_loss_undefined,
    }
    for l in range(n_links):
        row[f"share_l{l}_mean"] = point.share_means[l] if point.share_means else math.nan
        row[f"share_l{l}_half_width"] = point.share_half_widths[l] if point.share_half_widths else math.nan
    return row


def _sweep_n_links(points: list[SweepPoint]) -> int:
    for p in points:
        if p.share_means is not None:
            return len(p.share_means)
    return 0


def render_csv(points: list[SweepPoint], config: dict) -> str:
    """One CSV row per sweep point, with the resolved config as a # header."""
    n_links = _sweep_n_links(points)
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    rows = [_point_row(p, n_links) for p in points]
    fields = list(rows[0].keys()) if rows else []
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def results_document(points: list[SweepPoint], config: dict) -> dict:
    """Full results: resolved config plus the per-scenario raw matrix."""
    return {
        "config": config,
        "points": [
            {
                "gamma": p.gamma,
                "alpha": p.alpha,
                "budget": p.budget,
                "cost_saving": {"mean": p.cost_saving_mean, "half_width": p.cost_saving_half_width,
                                "undefined": p.cost_saving_undefined},
                "hit_ratio_loss": {"mean": p.hit_ratio_loss_mean, "half_width": p.hit_ratio_loss_half_width,
                                   "undefined": p.hit_ratio_loss_undefined},
                "cache_shares": {
                    "means": list(p.share_means) if p.share_means else None,
                    "half_widths": list(p.share_half_widths) if p.share_half_widths else None,
                },
                "scenarios": [
                    {
                        "index": r.scenario_index,
                        "cost_min": r.cost_min,
                        "hit_min": r.hit_min,
                        "cost_hit": r.cost_hit,
                        "hit_hit": r.hit_hit,
                        "cost_saving": r.cost_saving,
                        "cost_saving_defined": r.cost_saving_defined,
                        "hit_ratio_loss": r.hit_ratio_loss,
                        "hit_ratio_loss_defined": r.hit_ratio_loss_defined,
                        "cache_shares": list(r.cache_shares) if r.cache_shares else None,
                        "total_border_size": r.total_border_size,
                    }
                    for r in p.scenarios
                ],
            }
            for p in points
        ],
    }
