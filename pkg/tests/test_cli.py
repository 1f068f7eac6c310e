import json

import numpy as np
import pytest

from graphdebias import AttributedNetwork, save_network
from graphdebias.cli import main


def _toy_network(tmp_path, name="net.json", labeled=False):
    adjacency = np.zeros((8, 8))
    for i, j in [(0, 1), (2, 3), (4, 5), (6, 7), (1, 2), (5, 6)]:
        adjacency[i, j] = adjacency[j, i] = 1.0
    rng = np.random.default_rng(0)
    attrs = rng.normal(size=(8, 3))
    labels = np.array([0, 1, 0, 1, 0, 1, 0, 1]) if labeled else None
    net = AttributedNetwork(adjacency, attrs, np.arange(8) % 2, labels)
    path = tmp_path / name
    save_network(net, path)
    return path


def test_synth_case1_writes_files(tmp_path):
    out = tmp_path / "case1.json"
    assert main(["synth", "case1", "--n", "100", "--t", "25", "--seed", "3",
                 "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["n"] == 100
    assert set(data["sensitive"]) == {0, 1}
    assert (tmp_path / "case1.json.manifest.json").exists()


def test_synth_same_seed_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    argv = ["synth", "case2", "--n", "60", "--t", "15", "--seed", "9"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_synth_ternary_divisibility(tmp_path):
    ok = tmp_path / "t.json"
    assert main(["synth", "ternary", "--n", "99", "--t", "20", "--out", str(ok)]) == 0
    assert main(["synth", "ternary", "--n", "100", "--t", "20",
                 "--out", str(tmp_path / "bad.json")]) == 1


def test_measure_identical_groups_zero(tmp_path, capsys):
    adjacency = np.zeros((4, 4))
    attrs = np.array([[1.0], [2.0], [1.0], [2.0]])
    net = AttributedNetwork(adjacency, attrs, np.array([0, 0, 1, 1]))
    path = tmp_path / "zero.json"
    save_network(net, path)
    assert main(["measure", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["b_attr"] == 0.0 and report["b_stru"] == 0.0


def test_measure_case1_positive_bias(tmp_path, capsys):
    out = tmp_path / "c1.json"
    main(["synth", "case1", "--n", "100", "--t", "25", "--out", str(out)])
    assert main(["measure", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["b_attr"] > 0.1


def test_measure_missing_file_exit_2(tmp_path):
    assert main(["measure", str(tmp_path / "nope.json")]) == 2


def test_measure_malformed_json_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["measure", str(bad)]) == 2


def test_debias_zero_epochs_round_trips(tmp_path, capsys):
    path = _toy_network(tmp_path)
    out = tmp_path / "out"
    assert main(["debias", str(path), "--epochs", "0", "--out", str(out)]) == 0
    report = json.loads((out / "run_report.json").read_text())
    assert report["config_echo"]["epochs"] == 0
    debiased = json.loads((out / "debiased_network.json").read_text())
    original = json.loads(path.read_text())
    assert sorted(map(tuple, debiased["edges"])) == sorted(map(tuple, original["edges"]))
    assert (out / "adjacency_continuous.npy").exists()
    assert len(report["masked_dims"]) == 1


def test_debias_report_deterministic_modulo_timings(tmp_path):
    path = _toy_network(tmp_path)
    reports = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(["debias", str(path), "--epochs", "4", "--seed", "5",
                     "--out", str(out)]) == 0
        rep = json.loads((out / "run_report.json").read_text())
        rep.pop("timings")
        reports.append(rep)
    assert reports[0] == reports[1]


def test_debias_config_file_with_flag_override(tmp_path):
    path = _toy_network(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 3, "mu1": 0.5}))
    out = tmp_path / "out"
    assert main(["debias", str(path), "--config", str(cfg), "--epochs", "2",
                 "--out", str(out)]) == 0
    echo = json.loads((out / "run_report.json").read_text())["config_echo"]
    assert echo["epochs"] == 2 and echo["mu1"] == 0.5


def test_eval_reports_metrics(tmp_path, capsys):
    path = _toy_network(tmp_path, labeled=True)
    assert main(["eval", str(path), "--gcn-epochs", "10"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert 0.0 <= report["auc"] <= 1.0
    assert report["delta_sp"] is None or 0.0 <= report["delta_sp"] <= 1.0


def test_eval_missing_labels_exit_1(tmp_path):
    path = _toy_network(tmp_path, labeled=False)
    assert main(["eval", str(path), "--gcn-epochs", "5"]) == 1


def test_eval_dump_predictions_csv(tmp_path):
    path = _toy_network(tmp_path, labeled=True)
    csv_path = tmp_path / "preds.csv"
    assert main(["eval", str(path), "--gcn-epochs", "5",
                 "--dump-predictions", str(csv_path),
                 "--out", str(tmp_path / "r.json")]) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "node_id,score,label,sensitive"
    assert len(lines) == 9


def test_spectral_k2_values(tmp_path, capsys):
    net = AttributedNetwork(np.array([[0.0, 1.0], [1.0, 0.0]]),
                            np.array([[0.0], [1.0]]), np.array([0, 1]))
    path = tmp_path / "k2.json"
    save_network(net, path)
    assert main(["spectral", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert sorted(np.round(report["eigenvalues"], 9)) == [0.0, 2.0]
    assert report["alpha"] == pytest.approx(0.5)
    responses = dict(zip(np.round(report["eigenvalues"], 9), report["response"]))
    assert responses[0.0] == pytest.approx(1.0)
    assert responses[2.0] == pytest.approx(0.0, abs=1e-12)
    assert report["residual"] <= 1e-8


def test_spectral_mismatched_alpha_warns_but_computes(tmp_path, capsys):
    net = AttributedNetwork(np.array([[0.0, 1.0], [1.0, 0.0]]),
                            np.array([[0.0], [1.0]]), np.array([0, 1]))
    path = tmp_path / "k2.json"
    save_network(net, path)
    assert main(["spectral", str(path), "--alpha", "0.3"]) == 0
    captured = capsys.readouterr()
    assert "warning" in captured.err
    assert json.loads(captured.out)["alpha"] == pytest.approx(0.3)


def test_spectral_empty_graph_exit_1(tmp_path):
    net = AttributedNetwork(np.zeros((3, 3)), np.zeros((3, 1)), np.array([0, 1, 1]))
    path = tmp_path / "empty.json"
    save_network(net, path)
    assert main(["spectral", str(path)]) == 1
