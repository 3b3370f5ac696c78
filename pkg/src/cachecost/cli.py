"""Command-line entry point.

Subcommands: ``generate`` (write an instance file), ``plan`` (run a greedy
planner on an instance), ``evaluate`` (score a plan against an instance),
``oracle-check`` (certify the planners against the brute-force oracle on
seeded random small instances), ``experiment`` (run a sweep and write
CSV + JSON results). Every command echoes its fully resolved configuration.
``CACHECOST_LOG`` sets the log level (DEBUG, INFO, WARNING, ...).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import experiment, io, oracle, scenario
from .model import InstanceError, evaluate, validate
from .planner import lower_bound_cost, plan_max_hit, plan_min_cost

log = logging.getLogger("cachecost.cli")


def _setup_logging() -> None:
    level = os.environ.get("CACHECOST_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    if p.suffix == ".json":
        return json.loads(p.read_text())
    raise InstanceError(f"config file must be .toml or .json, got {p.suffix!r}")


def _print_config(kind: str, config: dict) -> None:
    print(f"config {kind}: " + json.dumps(config, sort_keys=True))


def _cmd_generate(args) -> int:
    fields = {
        "catalog_size": args.catalog_size,
        "zipf_alpha": args.alpha,
        "price_ratio": args.gamma,
        "budget": args.budget,
        "availability_prob": args.availability_prob,
        "seed": args.seed,
    }
    if args.config:
        file_conf = _load_config_file(args.config)
        unknown = set(file_conf) - set(fields) - {"scenario_index"}
        if unknown:
            raise InstanceError(f"config file: unknown keys {sorted(unknown)}")
        for key, value in file_conf.items():
            if key == "scenario_index":
                if args.scenario_index == 0:
                    args.scenario_index = int(value)
            elif fields[key] is None:
                fields[key] = value
    defaults = {"catalog_size": 1000, "zipf_alpha": 1.2, "price_ratio": 2.0,
                "budget": 100, "availability_prob": 0.5, "seed": 0}
    for key, default in defaults.items():
        if fields[key] is None:
            fields[key] = default
    config = scenario.ScenarioConfig(
        catalog_size=int(fields["catalog_size"]),
        zipf_alpha=float(fields["zipf_alpha"]),
        price_ratio=float(fields["price_ratio"]),
        budget=int(fields["budget"]),
        availability_prob=float(fields["availability_prob"]),
        seed=int(fields["seed"]),
    )
    resolved = {**fields, "scenario_index": args.scenario_index}
    instance = scenario.make_instance(config, args.scenario_index)
    io.save_instance(instance, args.out, config=resolved)
    _print_config("generate", resolved)
    print(f"wrote {args.out}")
    return 0


def _cmd_plan(args) -> int:
    instance = io.load_instance(args.instance)
    t, c, a, b = instance.topology, instance.catalog, instance.availability, instance.budget
    planner = plan_min_cost if args.objective == "min-cost" else plan_max_hit
    plan = planner(t, c, a, b)
    report = evaluate(t, c, a, plan)
    bound = lower_bound_cost(t, c, a, b)
    resolved = {"objective": args.objective, "instance": str(args.instance), "budget": b}
    if args.out:
        io.save_plan(plan, args.out, config=resolved)
    _print_config("plan", resolved)
    print(f"cost {report.total_cost!r}")
    print(f"hit_ratio {report.hit_ratio!r}")
    print(f"lower_bound {bound!r}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    instance = io.load_instance(args.instance)
    plan = io.load_plan(args.plan)
    t, c, a = instance.topology, instance.catalog, instance.availability
    verdict = validate(t, c, a, plan, instance.budget)
    if not verdict.ok:
        print("infeasible plan:", file=sys.stderr)
        for violation in verdict.violations:
            print(f"  {violation}", file=sys.stderr)
        return 2
    report = evaluate(t, c, a, plan)
    _print_config("evaluate", {"instance": str(args.instance), "plan": str(args.plan)})
    print(json.dumps({
        "total_cost": report.total_cost,
        "hit_ratio": report.hit_ratio,
        "per_link_outflow": {str(k): v for k, v in report.per_link_outflow.items()},
        "core_hit_fraction": report.core_hit_fraction,
    }, sort_keys=True))
    return 0


def _cmd_oracle_check(args) -> int:
    limits = oracle.SmallInstanceLimits(
        max_objects=args.max_objects, max_links=args.max_links, max_budget=args.max_budget
    )
    resolved = {"instances": args.instances, "seed": args.seed,
                "max_objects": args.max_objects, "max_links": args.max_links,
                "max_budget": args.max_budget, "threads": args.threads}
    _print_config("oracle-check", resolved)
    failures = 0
    for result in oracle.certify(args.instances, args.seed, limits, workers=args.threads):
        s = result.stats
        line = (f"n={s['n']} links={s['links']} budget={s['budget']} "
                f"cost={s['greedy_cost']:.6g} hit={s['greedy_hit']:.6g}")
        if result.ok:
            print(f"{result.index:04d} ok {line}")
        else:
            failures += 1
            print(f"{result.index:04d} FAIL {line}: {result.detail}")
    print(f"passed {args.instances - failures}/{args.instances}")
    return 0 if failures == 0 else 1


def _cmd_experiment(args) -> int:
    spec = experiment.SweepSpec(
        gammas=tuple(args.gamma),
        alphas=tuple(args.alpha),
        budgets=tuple(args.budget),
        catalog_size=args.catalog_size,
        seed=args.seed,
        scenarios_per_point=args.scenarios,
        confidence=args.confidence,
        availability_prob=args.availability_prob,
    )
    resolved = {**spec.resolved_config(), "threads": args.threads, "out": str(args.out)}
    _print_config("experiment", resolved)
    points = experiment.run_sweep(spec, workers=args.threads)
    out = Path(args.out)
    csv_path = out.with_suffix(".csv")
    json_path = out.with_suffix(".json")
    csv_path.write_text(experiment.render_csv(points, spec.resolved_config()))
    json_path.write_text(
        json.dumps(experiment.results_document(points, spec.resolved_config()), sort_keys=True) + "\n"
    )
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cachecost",
        description="Cost-aware cache provisioning: planners, oracle certification, experiment sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate an instance file")
    g.add_argument("--catalog-size", type=int, default=None)
    g.add_argument("--alpha", type=float, default=None, help="Zipf popularity exponent")
    g.add_argument("--gamma", type=float, default=None, help="price ratio of the expensive provider link")
    g.add_argument("--budget", type=int, default=None, help="total cache budget in objects")
    g.add_argument("--availability-prob", type=float, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--scenario-index", type=int, default=0)
    g.add_argument("--config", type=str, default=None, help="TOML/JSON file with the same fields")
    g.add_argument("--out", type=str, required=True, help="output path (.json or .npz)")
    g.set_defaults(func=_cmd_generate)

    p = sub.add_parser("plan", help="plan an instance and report cost/hit-ratio/lower bound")
    p.add_argument("instance", type=str, help="instance file (.json or .npz)")
    p.add_argument("--objective", choices=["min-cost", "max-hit"], default="min-cost")
    p.add_argument("--out", type=str, default=None, help="write the plan JSON here")
    p.set_defaults(func=_cmd_plan)

    e = sub.add_parser("evaluate", help="validate and score a plan against an instance")
    e.add_argument("instance", type=str)
    e.add_argument("plan", type=str)
    e.set_defaults(func=_cmd_evaluate)

    o = sub.add_parser("oracle-check", help="certify the greedy planners against the brute-force oracle")
    o.add_argument("--instances", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--max-objects", type=int, default=8)
    o.add_argument("--max-links", type=int, default=3)
    o.add_argument("--max-budget", type=int, default=4)
    o.add_argument("--threads", type=int, default=None)
    o.set_defaults(func=_cmd_oracle_check)

    x = sub.add_parser("experiment", help="run a sweep and write CSV + JSON results")
    x.add_argument("--gamma", type=_float_list, required=True, help="comma-separated price ratios")
    x.add_argument("--alpha", type=_float_list, required=True, help="comma-separated Zipf exponents")
    x.add_argument("--budget", type=_int_list, required=True, help="comma-separated cache budgets")
    x.add_argument("--catalog-size", type=int, required=True)
    x.add_argument("--scenarios", type=int, default=40)
    x.add_argument("--seed", type=int, required=True)
    x.add_argument("--confidence", type=float, default=0.95)
    x.add_argument("--availability-prob", type=float, default=0.5)
    x.add_argument("--threads", type=int, default=None)
    x.add_argument("--out", type=str, required=True, help="output base path; writes <out>.csv and <out>.json")
    x.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        # covers InstanceError, InfeasiblePlanError, UnsupportedPlanError
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
