import pathlib

import pytest

import hetfair

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def path_graph():
    return hetfair.Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


def test_graph_basics():
    g = hetfair.Graph.from_edges(4, [(0, 1), (1, 0), (2, 2), (1, 2)])
    assert g.n_nodes == 4
    assert g.n_edges == 2
    assert g.neighbors(1) == [0, 2]
    assert g.degree(3) == 0
    assert g.edge_list() == [(0, 1), (1, 2)]
    with pytest.raises(IndexError):
        g.neighbors(9)


def test_homophily():
    g = path_graph()
    labels = [1, 1, 0, 0]
    assert hetfair.global_homophily(g, labels) == pytest.approx(2 / 3)
    assert hetfair.local_homophily(g, labels, 0, 1) == pytest.approx(1.0)
    assert hetfair.local_homophily(g, labels, 1, 1) == pytest.approx(0.5)
    isolated = hetfair.Graph.from_edges(2, [])
    assert hetfair.local_homophily(isolated, [0, 1], 0, 1) is None
    assert sorted(hetfair.khop_subgraph_edges(g, 0, 2)) == [(0, 1), (1, 2)]


def test_profile_histogram():
    g = path_graph()
    profile = hetfair.homophily_profile(g, [1, 1, 0, 0], [0, 1, 0, 1])
    assert profile.n_nodes == 4
    h = profile.histogram("class", k=1, bin_width=0.5)
    assert sum(h["counts"]) + h["undefined_count"] == 4
    with pytest.raises(ValueError):
        profile.histogram("colour")


def test_generate_and_metrics():
    b = hetfair.generate(n_nodes=200, edges_per_node=3, h_c=0.9, h_s=0.1, seed=7)
    g = b["graph"]
    assert g.n_nodes == 200
    assert g.n_edges == hetfair.expected_edge_count(200, 3)
    assert len(b["features"]) == 200 and len(b["features"][0]) == 2
    assert hetfair.global_homophily(g, b["cls"]) > 0.7
    again = hetfair.generate(n_nodes=200, edges_per_node=3, h_c=0.9, h_s=0.1, seed=7)
    assert again["graph"].edge_list() == g.edge_list()
    with pytest.raises(hetfair.ConfigError):
        hetfair.generate(h_c=1.5)


def test_fairness_metrics():
    pred = [1, 0, 1, 1, 0]
    truth = [1, 0, 0, 1, 1]
    sens = [0, 0, 1, 1, 1]
    assert hetfair.statistical_parity(pred, sens) == pytest.approx(1 / 6)
    assert hetfair.equal_opportunity(pred, truth, sens) == pytest.approx(0.5)
    assert hetfair.f1_binary(pred, truth) == pytest.approx(2 / 3)
    assert hetfair.accuracy(pred, truth) == pytest.approx(0.6)
    assert hetfair.statistical_parity(pred, sens, subset=[0, 1]) is None


def test_splits_and_training():
    splits = hetfair.make_splits(100, 3)
    assert (len(splits["train"]), len(splits["val"]), len(splits["test"])) == (50, 25, 25)
    b = hetfair.generate(n_nodes=150, edges_per_node=3, h_c=0.9, h_s=0.5, seed=1)
    r = hetfair.train(b["graph"], b["cls"], b["sensitive"], b["features"],
                      split_seed=5, model="sgc", epochs=50, seed=2)
    assert len(r["predicted"]) == 150
    assert 0 <= r["best_epoch"] < 50
    assert 0.0 <= r["test"]["f1"] <= 1.0
    rep = hetfair.stratified_report(b["graph"], b["cls"], b["sensitive"], r["predicted"])
    assert sum(v["n_nodes"] for v in rep["bins"].values()) + rep["undefined_node_count"] == 150


def test_ingest():
    d = hetfair.ingest(str(FIXTURES / "tiny_edges.txt"), str(FIXTURES / "tiny_nodes.csv"),
                       class_column="label", sensitive_column="region",
                       features=["age", "height"], id_column="user_id")
    assert d["graph"].n_nodes == 6
    assert d["graph"].n_edges == 5
    assert len(d["original_ids"]) == 6


def test_sweep(tmp_path):
    out = hetfair.run_sweep({
        "h_c": [0.5], "h_s": [0.5], "e": [1.0], "graphs_per_cell": 1,
        "runs_per_model": 1, "models": ["sgc"], "n_nodes": 100, "edges_per_node": 3,
        "epochs": 20, "output_dir": str(tmp_path), "sweep_id": "py",
        "write_predictions": False,
    })
    assert out["runs"] == 1 and out["failures"] == 0
    assert (pathlib.Path(out["root"]) / "aggregate" / "runs.csv").exists()
    with pytest.raises(hetfair.ConfigError):
        hetfair.run_sweep({"bogus_key": 1})
