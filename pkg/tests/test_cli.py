import json

import pytest

from tripleshard.cli import PipelineConfig, main, run_pipeline, run_scaling
from tripleshard.plan import PartitionPlan
from tripleshard.store import parse_ntriples


def test_generate_writes_parseable_file(tmp_path, capsys):
    out = tmp_path / "g.nt"
    rc = main(["generate", "--sensors", "4", "--observations", "5",
               "--seed", "2", "--out", str(out)])
    assert rc == 0
    store = parse_ntriples(out.read_text())
    assert store.n > 0
    assert str(store.n) in capsys.readouterr().out


def test_partition_verb_covers_store(tmp_path):
    triples = tmp_path / "t.nt"
    main(["generate", "--sensors", "5", "--observations", "6", "--seed", "3",
          "--out", str(triples)])
    out = tmp_path / "fragments.json"
    rc = main(["partition", "--input", str(triples), "--k", "2", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["k"] == 2
    store = parse_ntriples(triples.read_text())
    positions = sorted(p for f in data["fragments"] for p in f["tripleRefs"])
    assert positions == list(range(store.n))


def test_replicate_verb_writes_valid_plan_and_centrality(tmp_path):
    triples = tmp_path / "t.nt"
    main(["generate", "--sensors", "6", "--observations", "8", "--seed", "4",
          "--out", str(triples)])
    plan_path = tmp_path / "plan.json"
    report = tmp_path / "centrality.csv"
    rc = main(["replicate", "--input", str(triples), "--k", "3", "--nodes", "3",
               "--threshold", "0.65", "--out", str(plan_path),
               "--centrality-report", str(report)])
    assert rc == 0
    store = parse_ntriples(triples.read_text())
    plan = PartitionPlan.from_json(plan_path.read_text())
    plan.validate(store)
    assert report.read_text().startswith("predicate,distinctSubjects,edgeCount,centrality")


def test_evaluate_verb_runs_saved_workload(tmp_path, capsys):
    triples = tmp_path / "t.nt"
    main(["generate", "--sensors", "6", "--observations", "8", "--seed", "4",
          "--out", str(triples)])
    plan_path = tmp_path / "plan.json"
    main(["replicate", "--input", str(triples), "--k", "3", "--nodes", "3",
          "--threshold", "0.65", "--out", str(plan_path)])
    run_dir = tmp_path / "run"
    main(["pipeline", "--input", str(triples), "--k", "3", "--nodes", "3",
          "--threshold", "0.65", "--seed", "4", "--out", str(run_dir)])
    capsys.readouterr()
    csv_out = tmp_path / "inc.csv"
    rc = main(["evaluate", "--input", str(triples), "--plan", str(plan_path),
               "--workload", str(run_dir / "workload.json"),
               "--seed", "4", "--out", str(csv_out)])
    assert rc == 0
    assert "local fraction" in capsys.readouterr().out
    header = csv_out.read_text().splitlines()[0]
    assert header.startswith("query,shape,homeNode")


def test_pipeline_writes_all_artifacts(tmp_path):
    out = tmp_path / "run"
    rc = main(["pipeline", "--sensors", "8", "--observations", "10", "--k", "3",
               "--nodes", "3", "--seed", "6", "--out", str(out)])
    assert rc == 0
    for name in (
        "triples.nt", "plan.json", "centrality.csv", "workload.json",
        "inc_report.csv", "report.json", "report.txt",
    ):
        assert (out / name).exists(), name
    store = parse_ntriples((out / "triples.nt").read_text())
    plan = PartitionPlan.from_json((out / "plan.json").read_text())
    plan.validate(store)
    report = json.loads((out / "report.json").read_text())
    assert report["triples"] == store.n
    assert set(report["stages_ms"]) == {"ingest", "partition", "distribute", "evaluate"}
    text = (out / "report.txt").read_text()
    for section in ("stage timings", "fragments", "node loads", "replication",
                    "query workload"):
        assert section in text


def test_pipeline_is_deterministic_across_runs(tmp_path):
    args = ["--sensors", "10", "--observations", "8", "--k", "3", "--nodes", "3",
            "--seed", "11"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["pipeline", *args, "--out", str(a)]) == 0
    assert main(["pipeline", *args, "--out", str(b)]) == 0
    for name in ("triples.nt", "plan.json", "centrality.csv", "workload.json",
                 "inc_report.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_config_file_with_flag_override(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "sensors": 6, "observations_per_sensor": 8, "k": 3, "nodes": 2, "seed": 5,
    }))
    out = tmp_path / "run"
    rc = main(["pipeline", "--config", str(config), "--k", "2", "--out", str(out)])
    assert rc == 0
    plan = PartitionPlan.from_json((out / "plan.json").read_text())
    assert plan.k == 2  # flag beats config
    assert plan.m == 2  # config beats default


def test_unknown_config_key_fails_with_message(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"sensrs": 4}))
    rc = main(["pipeline", "--config", str(config)])
    assert rc == 2
    assert "sensrs" in capsys.readouterr().err


def test_invalid_threshold_fails(tmp_path, capsys):
    rc = main(["pipeline", "--sensors", "4", "--observations", "5",
               "--threshold", "1.5", "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "threshold" in capsys.readouterr().err


def test_missing_input_file_fails(tmp_path, capsys):
    rc = main(["partition", "--input", str(tmp_path / "absent.nt"), "--k", "2"])
    assert rc == 2
    assert "absent.nt" in capsys.readouterr().err


def test_csv_input_through_config(tmp_path):
    csv_file = tmp_path / "data.csv"
    csv_file.write_text("station,temp,hum\nst1,20,80\nst2,25,70\n")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "csv_mapping": {
            "subject_column": "station",
            "properties": [["hasTemp", "temp"], ["hasHumidity", "hum"]],
        },
    }))
    out = tmp_path / "fragments.json"
    rc = main(["partition", "--config", str(config), "--input", str(csv_file),
               "--k", "2", "--out", str(out)])
    assert rc == 0
    assert json.loads(out.read_text())["k"] == 2


def test_scale_verb_writes_csv(tmp_path, capsys):
    out = tmp_path / "scale.csv"
    rc = main(["scale", "--sensors", "5", "--observations", "6", "--k", "2",
               "--nodes", "2", "--seed", "3", "--scales", "1,2", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("scale,n,ingest_ms")
    assert len(lines) == 3
    n1 = int(lines[1].split(",")[1])
    n2 = int(lines[2].split(",")[1])
    assert n2 > n1


def test_scaling_requires_generated_data(tmp_path):
    config = PipelineConfig(input_path=str(tmp_path / "t.nt"))
    with pytest.raises(ValueError):
        run_scaling(config, [1, 2])


def test_run_pipeline_outcome_consistency(tmp_path):
    config = PipelineConfig(
        sensors=6, observations_per_sensor=8, k=2, nodes=2, seed=9,
        out_dir=str(tmp_path / "run"),
    )
    outcome = run_pipeline(config)
    assert outcome.plan.k == 2
    assert sum(outcome.plan.node_loads()) == outcome.store.n
    assert 0.0 <= outcome.report.fraction_local <= 1.0
