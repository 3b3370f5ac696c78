"""Deterministic generation of experiment instances.

A scenario is a Zipf-popularity catalog over a three-link ISP topology (one
free peering link, one provider link at price 1, one at price gamma) with a
random availability map: each object is reachable through each link
independently with a fixed probability, and any object left unreachable is
assigned one uniformly chosen link.

All randomness flows through a counter-based generator keyed by
``(seed, scenario_index)``, so scenario sets are reproducible bit-for-bit
and independent of generation order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AvailabilityMap, Catalog, Instance, InstanceError, Link, LinkTopology, _mask_dtype


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one generated instance family."""

    catalog_size: int
    zipf_alpha: float
    price_ratio: float
    budget: int
    availability_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.catalog_size < 1:
            raise InstanceError(f"catalog_size: expected >= 1, got {self.catalog_size}")
        if not np.isfinite(self.zipf_alpha) or self.zipf_alpha < 0:
            raise InstanceError(f"zipf_alpha: expected a finite value >= 0, got {self.zipf_alpha}")
        if not np.isfinite(self.price_ratio) or self.price_ratio < 1:
            raise InstanceError(f"price_ratio: expected a finite value >= 1, got {self.price_ratio}")
        if self.budget < 0:
            raise InstanceError(f"budget: expected >= 0, got {self.budget}")
        if not 0.0 <= self.availability_prob <= 1.0:
            raise InstanceError(f"availability_prob: expected in [0, 1], got {self.availability_prob}")


def scenario_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, scenario index)."""
    key = np.array([seed % 2**64, index % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def zipf_catalog(n_objects: int, alpha: float) -> Catalog:
    """Catalog with demand rank**(-alpha) for ranks 1..N.

    Weights are unnormalized: every downstream metric is either a ratio or
    linear in the demands, so the scale is immaterial.
    """
    if n_objects < 1:
        raise InstanceError(f"catalog_size: expected >= 1, got {n_objects}")
    if not np.isfinite(alpha) or alpha < 0:
        raise InstanceError(f"zipf_alpha: expected a finite value >= 0, got {alpha}")
    ranks = np.arange(1, n_objects + 1, dtype=np.float64)
    return Catalog(ranks ** -alpha)


def three_link_topology(gamma: float) -> LinkTopology:
    """Three-link topology: free peering, cheap provider (1), expensive provider (gamma)."""
    if not np.isfinite(gamma) or gamma < 1:
        raise InstanceError(f"price ratio gamma: expected a finite value >= 1, got {gamma}")
    return LinkTopology((
        Link.peering(0),
        Link.provider(1, 1.0),
        Link.provider(2, float(gamma)),
    ))


def sample_availability(
    n_objects: int,
    links: LinkTopology,
    prob: float,
    rng: np.random.Generator,
) -> AvailabilityMap:
    """Random availability: each (object, link) pair present with ``prob``.

    Objects left with no link are then assigned exactly one uniformly chosen
    link, so the result is always a valid availability map. For prob == 0.5
    the per-link coin flips come from a single uniform-integer draw per
    object (each bit an independent fair coin); the generic path draws one
    uniform float per (link, object). Either path is deterministic given the
    generator state.
    """
    if not 0.0 <= prob <= 1.0:
        raise InstanceError(f"availability probability: expected in [0, 1], got {prob}")
    L = links.n_links
    dt = _mask_dtype(L)
    if prob == 0.5:
        mask = rng.integers(0, 1 << L, size=n_objects, dtype=dt)
    else:
        mask = np.zeros(n_objects, dtype=dt)
        for lid in range(L):
            mask |= (rng.random(n_objects) < prob).astype(dt) << dt(lid)
    empty = np.flatnonzero(mask == 0)
    if empty.size:
        fallback = rng.integers(0, L, size=empty.size)
        mask[empty] = dt(1) << fallback.astype(dt)
    return AvailabilityMap(mask, L)


def make_instance(config: ScenarioConfig, scenario_index: int = 0) -> Instance:
    """Build the complete instance for one scenario of a configuration."""
    topology = three_link_topology(config.price_ratio)
    catalog = zipf_catalog(config.catalog_size, config.zipf_alpha)
    rng = scenario_rng(config.seed, scenario_index)
    availability = sample_availability(config.catalog_size, topology, config.availability_prob, rng)
    return Instance(topology, catalog, availability, config.budget)
