import json

import numpy as np
import pytest

from swingnet.bigraph import degrees
from swingnet.pipeline.records import ingest_tweets
from swingnet.pipeline.states import associate_state, filter_language
from swingnet.synthgen import Camp, PlantedBipartiteSpec, ScenarioSpec, gen_planted_bipartite, gen_synthetic_dataset


def test_planted_extremes_give_complete_components():
    p = gen_planted_bipartite(PlantedBipartiteSpec(((3, 4), (2, 5)), 1.0, 0.0))
    adj = p.graph.biadjacency.toarray()
    assert adj[:3, :4].all() and adj[3:, 4:].all()
    assert not adj[:3, 4:].any() and not adj[3:, :4].any()


def test_planted_edge_count_binomial():
    spec = PlantedBipartiteSpec(((30, 100), (30, 100)), 0.2, 0.2, rng_seed=9)
    n = 60 * 200
    sigma = np.sqrt(n * 0.2 * 0.8)
    assert abs(gen_planted_bipartite(spec).graph.n_edges - 0.2 * n) <= 3 * sigma


def test_planted_deterministic_and_degrees():
    spec = PlantedBipartiteSpec(((10, 30), (10, 30)), 0.5, 0.1, rng_seed=4)
    a, b = gen_planted_bipartite(spec), gen_planted_bipartite(spec)
    assert a.graph == b.graph
    d = degrees(a.graph)
    assert np.array_equal(d.top, a.top_degrees) and np.array_equal(d.bottom, a.bottom_degrees)


def test_planted_validation():
    with pytest.raises(ValueError):
        PlantedBipartiteSpec(((0, 3),), 0.5, 0.1)
    with pytest.raises(ValueError):
        PlantedBipartiteSpec(((2, 3),), 1.5, 0.1)
    with pytest.raises(ValueError):
        PlantedBipartiteSpec((), 0.5, 0.1)


def test_scenario_validation():
    bad_mix = {"swing": {"T": 0.5, "N": 0.5, "P": 0.5, "S": 0.0, "UNC": 0.0},
               "safe": {"T": 1.0, "N": 0.0, "P": 0.0, "S": 0.0, "UNC": 0.0}}
    with pytest.raises(ValueError):
        ScenarioSpec(reputation_mix=bad_mix)
    with pytest.raises(ValueError):
        ScenarioSpec(swing_share=1.2)
    with pytest.raises(ValueError):
        ScenarioSpec(camps=(Camp("a", 5, True, 0.5), Camp("b", 5, False, 0.4)))


@pytest.fixture(scope="module")
def big_scenario(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    truth = gen_synthetic_dataset(ScenarioSpec(n_tweets=100_000, rng_seed=0), out)
    return out, truth


def test_swing_share_within_half_point(big_scenario):
    out, truth = big_scenario
    records, _ = ingest_tweets(out / "tweets.jsonl")
    assert len(records) == 100_000
    kinds = [associate_state(r.text) for r in records if filter_language(r)]
    kinds = [k[1] for k in kinds if isinstance(k, tuple)]
    share = kinds.count("swing") / len(kinds)
    assert abs(share - 0.88) <= 0.005


def test_sidecar_recomputes_planted_shares(big_scenario):
    out, truth = big_scenario
    records, _ = ingest_tweets(out / "tweets.jsonl")
    users = {u[0]: u for u in truth["users"]}
    political = {c["name"] for c in truth["spec"]["camps"] if c["political"]}
    tags = dict(line.split(",") for line in (out / "tags.csv").read_text().splitlines()[1:])
    expansion = dict(line.split(",") for line in (out / "expansion.csv").read_text().splitlines()[1:])
    kind_tweets = {"swing": 0, "safe": 0}
    n_class = {"bot": 0, "human": 0}
    complete = kept = 0
    for r in records:
        m = associate_state(r.text) if filter_language(r) else None
        if not isinstance(m, tuple):
            continue
        complete += 1
        if users[r.author_id][1] not in political:
            continue
        kept += 1
        kind_tweets[m[1]] += 1
        for u in r.urls:
            host = expansion.get(u, u).split("/")[2].removeprefix("www.")
            if tags.get(host) == "N" and users[r.author_id][3] in n_class:
                n_class[users[r.author_id][3]] += 1
    t = truth["targets"]
    assert 100 * kind_tweets["swing"] / kept == pytest.approx(t["swing_share_pct"], abs=1e-9)
    assert 100 * (complete - kept) / complete == pytest.approx(t["noise_discard_pct"], abs=1e-9)
    assert 100 * n_class["bot"] / sum(n_class.values()) == pytest.approx(t["N_bot_share_pct"], abs=1e-9)


def test_scenario_deterministic(tmp_path):
    spec = ScenarioSpec(n_tweets=15_000, unverified_users=600, rng_seed=5)
    gen_synthetic_dataset(spec, tmp_path / "a")
    gen_synthetic_dataset(spec, tmp_path / "b")
    for name in ("tweets.jsonl", "truth.json", "tags.csv", "expansion.csv", "label_map.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_label_map_follows_camp_size(tmp_path):
    gen_synthetic_dataset(ScenarioSpec(n_tweets=15_000, unverified_users=600), tmp_path)
    rows = (tmp_path / "label_map.csv").read_text().splitlines()
    assert rows == ["community_id,label,political_flag", "0,Rep,true", "1,Rep-Dem-Journ,true", "2,Sports,false"]
