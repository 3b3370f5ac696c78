import json

import pytest

from cachecost.cli import main
from cachecost.io import load_instance, load_plan

FOUR_OBJECT_DOC = {
    "links": [
        {"id": 0, "price": 1.0, "category": "provider"},
        {"id": 1, "price": 5.0, "category": "provider"},
    ],
    "demands": [4, 3, 2, 1],
    "availability": [[0], [1], [0, 1], [1]],
    "budget": 2,
}


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps(FOUR_OBJECT_DOC))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_plan_prints_certified_values(instance_file, capsys, tmp_path):
    plan_path = tmp_path / "plan.json"
    code, out, _ = run(capsys, "plan", instance_file, "--objective", "min-cost", "--out", plan_path)
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.splitlines() if " " in line)
    assert float(lines["cost"]) == 6.0
    assert float(lines["lower_bound"]) == 6.0
    assert float(lines["hit_ratio"]) == 0.4
    assert out.startswith("config plan: ")

    plan = load_plan(plan_path)
    assert plan.placement_pairs() == {(1, 1), (1, 3)}


def test_plan_budget_zero_prints_zero_hit(instance_file, capsys, tmp_path):
    doc = dict(FOUR_OBJECT_DOC, budget=0)
    path = tmp_path / "b0.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "plan", path, "--objective", "max-hit")
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.splitlines() if " " in line)
    assert float(lines["hit_ratio"]) == 0.0


def test_generate_plan_evaluate_round_trip(capsys, tmp_path):
    instance_path = tmp_path / "inst.json"
    plan_path = tmp_path / "plan.json"
    code, _, _ = run(capsys, "generate", "--catalog-size", 300, "--alpha", "1.1",
                     "--gamma", "4", "--budget", "30", "--seed", "11", "--out", instance_path)
    assert code == 0

    code, out, _ = run(capsys, "plan", instance_path, "--out", plan_path)
    assert code == 0
    lines = dict(line.split(" ", 1) for line in out.splitlines() if " " in line)

    code, out, _ = run(capsys, "evaluate", instance_path, plan_path)
    assert code == 0
    report = json.loads(out.splitlines()[-1])
    assert report["total_cost"] == float(lines["cost"])
    assert report["hit_ratio"] == float(lines["hit_ratio"])
    assert report["core_hit_fraction"] == 0.0


def test_generate_is_byte_deterministic(capsys, tmp_path):
    args = ["generate", "--catalog-size", 200, "--alpha", "0.8", "--gamma", "2",
            "--budget", "20", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, *args, "--out", a)
    run(capsys, *args, "--out", b)
    assert a.read_bytes() == b.read_bytes()

    na, nb = tmp_path / "a.npz", tmp_path / "b.npz"
    run(capsys, *args, "--out", na)
    run(capsys, *args, "--out", nb)
    assert na.read_bytes() == nb.read_bytes()


def test_npz_and_json_instances_agree(capsys, tmp_path):
    args = ["generate", "--catalog-size", 150, "--alpha", "1.2", "--gamma", "6",
            "--budget", "15", "--seed", "8"]
    j, n = tmp_path / "inst.json", tmp_path / "inst.npz"
    run(capsys, *args, "--out", j)
    run(capsys, *args, "--out", n)
    a, b = load_instance(j), load_instance(n)
    assert (a.catalog.demands == b.catalog.demands).all()
    assert (a.availability.mask == b.availability.mask).all()
    assert a.topology.prices.tolist() == b.topology.prices.tolist()
    assert a.budget == b.budget


def test_generate_config_file(capsys, tmp_path):
    conf = tmp_path / "conf.toml"
    conf.write_text(
        'catalog_size = 120\nzipf_alpha = 1.0\nprice_ratio = 3.0\nbudget = 12\nseed = 5\n'
    )
    out = tmp_path / "inst.json"
    code, stdout, _ = run(capsys, "generate", "--config", conf, "--out", out)
    assert code == 0
    instance = load_instance(out)
    assert instance.catalog.n_objects == 120
    assert instance.topology.prices.tolist() == [0.0, 1.0, 3.0]
    # flags override the config file
    out2 = tmp_path / "inst2.json"
    run(capsys, "generate", "--config", conf, "--gamma", "7", "--out", out2)
    assert load_instance(out2).topology.prices.tolist() == [0.0, 1.0, 7.0]


def test_malformed_inputs_name_the_field(capsys, tmp_path):
    bad_price = dict(FOUR_OBJECT_DOC, links=[{"id": 0, "price": -1.0, "category": "provider"}])
    bad_price["availability"] = [[0]] * 4
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad_price))
    code, _, err = run(capsys, "plan", path)
    assert code == 2
    assert "links[0].price" in err

    missing = {k: v for k, v in FOUR_OBJECT_DOC.items() if k != "budget"}
    path.write_text(json.dumps(missing))
    code, _, err = run(capsys, "plan", path)
    assert code == 2 and "budget" in err

    customer = dict(FOUR_OBJECT_DOC)
    customer["links"] = FOUR_OBJECT_DOC["links"][:1] + [{"id": 1, "price": 5.0, "category": "customer"}]
    path.write_text(json.dumps(customer))
    code, _, err = run(capsys, "plan", path)
    assert code == 2 and "customer" in err

    path.write_text("{not json")
    code, _, err = run(capsys, "plan", path)
    assert code == 2 and "JSON" in err

    code, _, err = run(capsys, "plan", tmp_path / "missing.json")
    assert code == 2


def test_evaluate_rejects_infeasible_plan(instance_file, capsys, tmp_path):
    plan_doc = {
        "border_sizes": {"1": 1},
        "placement": [[1, 0]],  # object 0 is not available through link 1
        "path_selection": [0, 1, 0, 1],
    }
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(plan_doc))
    code, _, err = run(capsys, "evaluate", instance_file, plan_path)
    assert code == 2
    assert "cannot supply" in err


def test_oracle_check_passes(capsys):
    code, out, _ = run(capsys, "oracle-check", "--instances", 40, "--seed", 7)
    assert code == 0
    lines = out.splitlines()
    assert lines[-1] == "passed 40/40"
    assert sum(1 for l in lines if " ok " in l) == 40


def test_experiment_writes_csv_and_json(capsys, tmp_path):
    out = tmp_path / "results"
    code, stdout, _ = run(
        capsys, "experiment", "--gamma", "1,5", "--alpha", "1.0", "--budget", "25",
        "--catalog-size", 400, "--scenarios", 3, "--seed", 21, "--out", out,
    )
    assert code == 0
    csv_text = (tmp_path / "results.csv").read_text()
    assert csv_text.startswith("# config: ")
    assert len(csv_text.splitlines()) == 4  # config + header + 2 points
    doc = json.loads((tmp_path / "results.json").read_text())
    assert doc["config"]["seed"] == 21
    assert len(doc["points"]) == 2

    # byte-identical rerun
    out2 = tmp_path / "again"
    run(capsys, "experiment", "--gamma", "1,5", "--alpha", "1.0", "--budget", "25",
        "--catalog-size", 400, "--scenarios", 3, "--seed", 21, "--out", out2)
    assert (tmp_path / "again.csv").read_text() == csv_text


def test_experiment_requires_seed(capsys, tmp_path):
    with pytest.raises(SystemExit):
        main(["experiment", "--gamma", "1", "--alpha", "1.0", "--budget", "10",
              "--catalog-size", "100", "--out", str(tmp_path / "x")])
