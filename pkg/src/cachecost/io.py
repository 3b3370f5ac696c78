"""Instance and plan file formats.

JSON is the interchange format:

* instance: ``{"links": [{"id", "price", "category"}...], "demands": [...],
  "availability": [[link ids per object]...], "budget": int}``
* plan: ``{"border_sizes": {...}, "placement": [[link, object]...],
  "path_selection": [...]}``

``.npz`` holds the same instance data as a compact binary cache for large
catalogs; the writer pins the zip member timestamps so identical inputs
produce byte-identical files. Loaders dispatch on the file extension and
ignore unknown JSON keys (writers add a sibling ``config`` key recording the
fully resolved generation parameters).
"""
from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

from .model import (
    AvailabilityMap,
    Catalog,
    Instance,
    InstanceError,
    Link,
    LinkCategory,
    LinkTopology,
    PlacementPlan,
)

_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
_CATEGORY_CODES = {LinkCategory.PEERING: 0, LinkCategory.PROVIDER: 1}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InstanceError(message)


def _parse_link(entry, index: int) -> Link:
    _require(isinstance(entry, dict), f"links[{index}]: expected an object")
    for key in ("id", "price", "category"):
        _require(key in entry, f"links[{index}].{key}: missing")
    raw = entry["category"]
    try:
        category = LinkCategory(raw)
    except ValueError:
        raise InstanceError(
            f"links[{index}].category: expected one of 'peering', 'provider', 'customer', got {raw!r}"
        ) from None
    _require(isinstance(entry["id"], int), f"links[{index}].id: expected an integer, got {entry['id']!r}")
    _require(
        isinstance(entry["price"], (int, float)) and not isinstance(entry["price"], bool),
        f"links[{index}].price: expected a number, got {entry['price']!r}",
    )
    return Link(entry["id"], float(entry["price"]), category)


def instance_from_dict(doc: dict) -> Instance:
    _require(isinstance(doc, dict), "instance: expected a JSON object")
    for key in ("links", "demands", "availability", "budget"):
        _require(key in doc, f"{key}: missing")
    _require(isinstance(doc["links"], list), "links: expected a list")
    topology = LinkTopology(tuple(_parse_link(e, i) for i, e in enumerate(doc["links"])))

    demands = doc["demands"]
    _require(isinstance(demands, list), "demands: expected a list")
    for i, v in enumerate(demands):
        _require(
            isinstance(v, (int, float)) and not isinstance(v, bool),
            f"demands[{i}]: expected a number, got {v!r}",
        )
    catalog = Catalog(np.asarray(demands, dtype=np.float64))

    avail = doc["availability"]
    _require(isinstance(avail, list), "availability: expected a list of link id lists")
    _require(
        len(avail) == catalog.n_objects,
        f"availability: expected {catalog.n_objects} entries, got {len(avail)}",
    )
    for i, links in enumerate(avail):
        _require(isinstance(links, list), f"availability[{i}]: expected a list of link ids")
        for l in links:
            _require(isinstance(l, int), f"availability[{i}]: expected integer link ids, got {l!r}")
    availability = AvailabilityMap.from_sets(avail, topology.n_links)

    _require(
        isinstance(doc["budget"], int) and not isinstance(doc["budget"], bool),
        f"budget: expected an integer, got {doc['budget']!r}",
    )
    return Instance(topology, catalog, availability, doc["budget"])


def instance_to_dict(instance: Instance, config: dict | None = None) -> dict:
    doc = {
        "links": [
            {"id": l.id, "price": l.price, "category": l.category.value}
            for l in instance.topology.links
        ],
        "demands": [float(d) for d in instance.catalog.demands],
        "availability": instance.availability.to_sets(),
        "budget": instance.budget,
    }
    if config is not None:
        doc["config"] = config
    return doc


def _write_npz(path: Path, arrays: dict[str, np.ndarray]) -> None:
    # numpy's savez stamps members with the wall clock; write the zip
    # ourselves with a fixed date so identical data gives identical bytes.
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arr))
            info = zipfile.ZipInfo(name + ".npy", date_time=_ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, buf.getvalue())


def save_instance(instance: Instance, path: str | Path, config: dict | None = None) -> None:
    """Write an instance as .json (interchange) or .npz (binary cache)."""
    path = Path(path)
    if path.suffix == ".npz":
        arrays = {
            "demands": instance.catalog.demands,
            "availability_mask": instance.availability.mask,
            "link_prices": instance.topology.prices,
            "link_categories": np.array(
                [_CATEGORY_CODES[l.category] for l in instance.topology.links], dtype=np.uint8
            ),
            "budget": np.array([instance.budget], dtype=np.int64),
        }
        if config is not None:
            arrays["config_json"] = np.frombuffer(
                json.dumps(config, sort_keys=True).encode(), dtype=np.uint8
            )
        _write_npz(path, arrays)
    elif path.suffix == ".json":
        path.write_text(json.dumps(instance_to_dict(instance, config)) + "\n")
    else:
        raise InstanceError(f"unsupported instance extension {path.suffix!r} (use .json or .npz)")


def load_instance(path: str | Path) -> Instance:
    """Read an instance from .json or .npz."""
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as data:
            for key in ("demands", "availability_mask", "link_prices", "link_categories", "budget"):
                _require(key in data, f"{path.name}: missing array {key!r}")
            categories = data["link_categories"]
            links = tuple(
                Link.peering(i) if code == 0 else Link.provider(i, float(price))
                for i, (code, price) in enumerate(zip(categories, data["link_prices"]))
            )
            topology = LinkTopology(links)
            catalog = Catalog(data["demands"])
            availability = AvailabilityMap(data["availability_mask"], topology.n_links)
            return Instance(topology, catalog, availability, int(data["budget"][0]))
    if path.suffix == ".json":
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path.name}: not valid JSON ({exc})") from None
        return instance_from_dict(doc)
    raise InstanceError(f"unsupported instance extension {path.suffix!r} (use .json or .npz)")


def plan_to_dict(plan: PlacementPlan, config: dict | None = None) -> dict:
    doc = {
        "border_sizes": {str(k): v for k, v in plan.border_sizes.items()},
        "placement": [[int(l), int(o)] for l, o in plan.border_placement],
        "path_selection": [int(l) for l in plan.path_selection],
    }
    if plan.internal_sizes:
        doc["internal_sizes"] = {str(k): v for k, v in plan.internal_sizes.items()}
    if config is not None:
        doc["config"] = config
    return doc


def plan_from_dict(doc: dict) -> PlacementPlan:
    _require(isinstance(doc, dict), "plan: expected a JSON object")
    for key in ("border_sizes", "placement", "path_selection"):
        _require(key in doc, f"{key}: missing")
    _require(isinstance(doc["border_sizes"], dict), "border_sizes: expected an object")
    sizes: dict[int, int] = {}
    for k, v in doc["border_sizes"].items():
        try:
            lid = int(k)
        except ValueError:
            raise InstanceError(f"border_sizes: key {k!r} is not a link id") from None
        _require(isinstance(v, int) and not isinstance(v, bool), f"border_sizes[{k}]: expected an integer, got {v!r}")
        sizes[lid] = v
    placement = doc["placement"]
    _require(isinstance(placement, list), "placement: expected a list of [link, object] pairs")
    for i, pair in enumerate(placement):
        _require(
            isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, int) for x in pair),
            f"placement[{i}]: expected a [link, object] integer pair, got {pair!r}",
        )
    ps = doc["path_selection"]
    _require(isinstance(ps, list), "path_selection: expected a list of link ids")
    for i, l in enumerate(ps):
        _require(isinstance(l, int) and not isinstance(l, bool), f"path_selection[{i}]: expected a link id, got {l!r}")
    internal: dict[int, int] = {}
    for k, v in doc.get("internal_sizes", {}).items():
        internal[int(k)] = int(v)
    pairs = np.asarray(placement, dtype=np.int64).reshape(-1, 2)
    return PlacementPlan(sizes, internal, pairs, np.asarray(ps, dtype=np.int64))


def save_plan(plan: PlacementPlan, path: str | Path, config: dict | None = None) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan, config)) + "\n")


def load_plan(path: str | Path) -> PlacementPlan:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path.name}: not valid JSON ({exc})") from None
    return plan_from_dict(doc)
