import json

import pytest

from swingnet.bigraph import BipartiteGraph, write_bipartite_edgelist, IndexMap
from swingnet.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_DATA, EXIT_MISSING, EXIT_USAGE, main
from swingnet.synthgen import ScenarioSpec, gen_synthetic_dataset


def snapshot(directory):
    """Every file's bytes; the manifest without its timestamp block."""
    out = {}
    for p in sorted(directory.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name == "manifest.json":
                m = json.loads(data)
                m.pop("timestamp")
                data = json.dumps(m, sort_keys=True).encode()
            out[str(p.relative_to(directory))] = data
    return out


@pytest.fixture(scope="module")
def scenario(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    assert main(["gen", "--output-dir", str(out), "--n-tweets", "50000", "--seed", "2"]) == 0
    return out


@pytest.fixture(scope="module")
def run(scenario, tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "a"
    assert main(pipeline_args(scenario, out)) == 0
    return out


def pipeline_args(scenario, out, threads=1, extra=()):
    return ["pipeline", "--input", str(scenario / "tweets.jsonl"), "--output-dir", str(out),
            "--label-map", str(scenario / "label_map.csv"), "--tags", str(scenario / "tags.csv"),
            "--expansion", str(scenario / "expansion.csv"), "--threads", str(threads), *extra]


def test_gen_then_pipeline(run):
    for name in ("01_complete.jsonl", "02_bipartite.tsv", "03_bicm.json", "04_projection.tsv",
                 "05_communities.tsv", "06_labels.tsv", "07_validated.jsonl", "08_bot_classes.tsv",
                 "report.json", "report.txt", "fig_url_categories.csv", "manifest.json"):
        assert (run / name).is_file(), name
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["config"]["fdr_level"] == 0.05 and "input" in manifest["inputs"]
    assert set(manifest["timestamp"]) >= {"started", "elapsed_s"}
    stages = json.loads((run / "stages.json").read_text())
    assert all(got >= 0.9 * want for got, want in zip(stages["communities"]["largest"], (60, 40, 30)))
    assert abs(stages["filter"]["discarded_share_pct"] - 17.0) <= 1.0
    assert stages["prepare"]["state_mentions"]["Washington"] > 0


def test_identical_runs_and_any_thread_count(scenario, run, tmp_path):
    assert main(pipeline_args(scenario, tmp_path / "b", threads=3)) == 0
    assert snapshot(run) == snapshot(tmp_path / "b")


def test_gen_is_deterministic(tmp_path):
    for k in "ab":
        assert main(["gen", "--output-dir", str(tmp_path / k), "--n-tweets", "12000", "--seed", "4"]) == 0
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_graph_subcommands(tmp_path):
    assert main(["gen", "--kind", "planted", "--output-dir", str(tmp_path / "g"), "--seed", "3"]) == 0
    assert main(["solve", "--input", str(tmp_path / "g" / "bipartite.tsv"), "--output-dir", str(tmp_path / "s")]) == 0
    assert main(["validate", "--input", str(tmp_path / "g" / "bipartite.tsv"), "--output-dir", str(tmp_path / "v"),
                 "--solution", str(tmp_path / "s" / "bicm.json"), "--fdr", "0.2"]) == 0
    weighted = tmp_path / "rt.tsv"
    lines = (tmp_path / "g" / "bipartite.tsv").read_text().splitlines()
    weighted.write_text("".join(f"{line}\t1\n" for line in lines))
    assert main(["communities", "--input", str(tmp_path / "v" / "projection.tsv"),
                 "--output-dir", str(tmp_path / "c"), "--retweets", str(weighted)]) == 0
    labels = (tmp_path / "c" / "labels.tsv").read_text().splitlines()
    assert labels and all("\t" in line for line in labels)


def test_report_subcommand(scenario, run, tmp_path):
    assert main(["report", "--input", str(run / "07_validated.jsonl"), "--output-dir",
                 str(tmp_path / "rep"), "--tags", str(scenario / "tags.csv"), "--expansion",
                 str(scenario / "expansion.csv")]) == 0
    assert (tmp_path / "rep" / "report.json").read_bytes() != b""
    full = json.loads((run / "report.json").read_text())
    alone = json.loads((tmp_path / "rep" / "report.json").read_text())
    assert full["table_kinds"] == alone["table_kinds"]


def test_zero_bots_with_fixed_thresholds(tmp_path):
    gen_synthetic_dataset(ScenarioSpec(n_tweets=50_000, bot_share=0.0, rng_seed=1), tmp_path / "g")
    g = tmp_path / "g"
    args = ["pipeline", "--input", str(g / "tweets.jsonl"), "--output-dir", str(tmp_path / "run"),
            "--label-map", str(g / "label_map.csv"), "--tags", str(g / "tags.csv"), "--bot-thresholds", "0.04,0.45"]
    assert main(args) == 0
    bots = json.loads((tmp_path / "run" / "report.json").read_text())["table_bots"]["bot"]
    assert bots == {"label": "bot", "tweets": 0, "urls": 0, "users": 0}


def test_exit_codes(tmp_path, monkeypatch):
    edges = tmp_path / "g.tsv"
    g = BipartiteGraph(4, 6, [(i, a) for i in range(4) for a in range(6) if (i + a) % 3])
    write_bipartite_edgelist(edges, g, IndexMap.from_ids("abcd"), IndexMap.from_ids("uvwxyz"))
    out = str(tmp_path / "o")
    assert main(["validate", "--input", str(edges), "--output-dir", out, "--fdr", "1.5"]) == EXIT_CONFIG
    assert main(["solve", "--input", str(tmp_path / "none.tsv"), "--output-dir", out]) == EXIT_MISSING
    assert main(["solve", "--bogus"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["solve", "--input", str(edges), "--output-dir", out, "--tolerance", "1e-300",
                 "--max-iterations", "1"]) == EXIT_CONVERGENCE
    bad = tmp_path / "bad.jsonl"
    bad.write_text("garbage\n{]\n")
    assert main(["pipeline", "--input", str(bad), "--output-dir", out]) == EXIT_DATA
    assert main(["pipeline", "--input", str(bad), "--output-dir", out, "--bot-thresholds", "0.5,0.1"]) == EXIT_CONFIG
    monkeypatch.setenv("SWINGNET_VALIDATE_FDR", "2")
    assert main(["validate", "--input", str(edges), "--output-dir", out]) == EXIT_CONFIG
