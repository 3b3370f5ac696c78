import hypothesis.strategies as st
import numpy as np
import pytest

from cachecost import AvailabilityMap, Catalog, Instance, Link, LinkTopology


@pytest.fixture
def four_object_instance() -> Instance:
    """demands (4,3,2,1); link0 p=1, link1 p=5; budget 2.

    Optimal values certified by the brute-force oracle (see test_oracle):
    min-cost caches objects 1 and 3 at link 1 for total cost 6; max-hit
    caches objects 0 and 1 for hit-ratio 0.7 at cost 7.
    """
    topology = LinkTopology((Link.provider(0, 1.0), Link.provider(1, 5.0)))
    catalog = Catalog.from_demands([4, 3, 2, 1])
    availability = AvailabilityMap.from_sets([[0], [1], [0, 1], [1]], 2)
    return Instance(topology, catalog, availability, 2)


def make_topology(prices) -> LinkTopology:
    links = tuple(
        Link.peering(i) if p == 0 else Link.provider(i, float(p))
        for i, p in enumerate(prices)
    )
    return LinkTopology(links)


@st.composite
def small_instances(draw, max_objects: int = 6, max_links: int = 3, max_budget: int = 4) -> Instance:
    """Random toy instances mixing discrete and continuous demands/prices.

    Discrete values make potential-cost ties common, which is what the
    planner tie-break rules are exercised on.
    """
    n = draw(st.integers(1, max_objects))
    n_links = draw(st.integers(1, max_links))
    price = st.one_of(
        st.just(0.0),
        st.sampled_from([0.5, 1.0, 2.0, 10.0]),
        st.floats(0.1, 10.0, allow_nan=False, allow_infinity=False),
    )
    prices = draw(st.lists(price, min_size=n_links, max_size=n_links))
    demand = st.one_of(
        st.integers(0, 4).map(float),
        st.floats(0.0, 10.0, allow_nan=False, allow_infinity=False),
    )
    demands = draw(st.lists(demand, min_size=n, max_size=n))
    if not any(d > 0 for d in demands):
        demands[draw(st.integers(0, n - 1))] = float(draw(st.integers(1, 4)))
    masks = draw(st.lists(st.integers(1, (1 << n_links) - 1), min_size=n, max_size=n))
    budget = draw(st.integers(0, max_budget))
    return Instance(
        make_topology(prices),
        Catalog.from_demands(demands),
        AvailabilityMap(np.array(masks, dtype=np.uint8), n_links),
        budget,
    )
