import json
import time
from collections import Counter

import pytest

from commsense.cli import main
from commsense.config import ConfigError, ExperimentConfig, load_config
from commsense.experiment import (
    ExperimentReport,
    generate_dataset,
    read_dataset,
    run_cell,
    run_experiment,
    stratified_split,
)
from commsense.export import export_results, load_report, report_json

SMALL = {"subcarrier_count": 64, "samples_per_class": 10, "snr_list_db": [10.0], "repetitions": 1}


def small(**kw):
    return load_config(overrides={**SMALL, **kw})


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("")
    cfg = load_config(path)
    assert cfg == ExperimentConfig()
    assert cfg.carrier_freq == 4e9 and cfg.samples_per_class == 50
    assert cfg.snr_list_db == (0.0, 10.0, 20.0)
    assert cfg.split_fraction == 0.7 and cfg.repetitions == 10
    assert load_config() == cfg


def test_precedence_file_then_overrides(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"snr_list_db": [0, 10], "samples_per_class": 20, "svm": {"C": 3.0}}))
    cfg = load_config(path, {"snr_list_db": [5], "svm.kernel": "rbf"})
    assert cfg.snr_list_db == (5.0,)
    assert cfg.samples_per_class == 20
    assert cfg.svm.C == 3.0 and cfg.svm.kernel == "rbf"


def test_unknown_key_is_named(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"smaples_per_class": 50}))
    with pytest.raises(ConfigError, match="smaples_per_class"):
        load_config(path)
    with pytest.raises(ConfigError, match="svm.gama"):
        load_config(overrides={"svm.gama": 1.0})


@pytest.mark.parametrize("key, value", [
    ("samples_per_class", 3), ("split_fraction", 1.0), ("snr_list_db", []), ("carrier_freq", 0.0),
    ("family", "tdlx"), ("channel_sampling", "weird"),
])
def test_invariant_violation_names_key(key, value):
    with pytest.raises(ConfigError, match=key):
        load_config(overrides={key: value})


def test_config_dict_round_trip():
    cfg = small(family="cdl")
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_default_dataset_size():
    data = generate_dataset(ExperimentConfig(), "tdl", 20.0)
    assert len(data) == 250
    assert Counter(v.label for v in data) == {f"TDL-{c}": 50 for c in "ABCDE"}
    assert all(v.features.size == 1200 for v in data)


def test_minimal_dataset_and_file_round_trip(tmp_path):
    cfg = small(samples_per_class=4)
    data = generate_dataset(cfg, "cdl", 0.0, out_path=tmp_path / "d.csv")
    assert len(data) == 20
    header = (tmp_path / "d.csv").read_text().splitlines()[0].split(",")
    assert header[:5] == ["sample_id", "label", "snr_db", "f0_re", "f0_im"]
    back = read_dataset(tmp_path / "d.csv")
    assert [v.features.tobytes() for v in back] == [v.features.tobytes() for v in data]
    assert [(v.label, v.sample_id, v.snr_db) for v in back] == [(v.label, v.sample_id, v.snr_db) for v in data]


def test_dataset_bytes_are_deterministic(tmp_path):
    cfg = small(master_seed=42)
    generate_dataset(cfg, "tdl", 10.0, out_path=tmp_path / "a.csv")
    generate_dataset(cfg, "tdl", 10.0, out_path=tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    generate_dataset(small(master_seed=43), "tdl", 10.0, out_path=tmp_path / "c.csv")
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "c.csv").read_bytes()


def test_independent_sampling_draws_new_channels():
    static = generate_dataset(small(snr_list_db=[200.0]), "tdl", 200.0)
    indep = generate_dataset(small(channel_sampling="independent"), "tdl", 200.0)
    a = [v.features for v in static if v.label == "TDL-A"]
    b = [v.features for v in indep if v.label == "TDL-A"]
    assert abs(a[0] - a[1]).max() < 1e-6
    assert abs(b[0] - b[1]).max() > 1e-2


def test_stratified_split_counts():
    data = generate_dataset(small(samples_per_class=50, subcarrier_count=8), "tdl", 0.0)
    train, test = stratified_split(data, 0.7, 1)
    assert Counter(v.label for v in train) == {f"TDL-{c}": 35 for c in "ABCDE"}
    assert Counter(v.label for v in test) == {f"TDL-{c}": 15 for c in "ABCDE"}
    assert not {v.sample_id for v in train} & {v.sample_id for v in test}


def test_smoke_run_single_cell():
    start = time.perf_counter()
    report = run_experiment(small(family="tdl"))
    assert time.perf_counter() - start < 10
    (cell,) = report.cells
    assert (cell.family, cell.snr_db, cell.seed) == ("tdl", 10.0, 0)
    assert len(cell.projections) == cell.n_test == 15
    assert sum(map(sum, cell.confusion)) == cell.n_test


def test_cell_count_and_seeds():
    report = run_experiment(small(snr_list_db=[0, 20], repetitions=2, master_seed=5))
    keys = [(c.family, c.snr_db, c.seed) for c in report.cells]
    assert len(keys) == len(set(keys)) == 2 * 2 * 2
    assert {c.seed for c in report.cells} == {5, 6}


def test_parallel_equals_serial():
    cfg = small(snr_list_db=[0, 20], repetitions=2)
    assert report_json(run_experiment(cfg, workers=2)) == report_json(run_experiment(cfg))


def test_cell_models_are_returned():
    cell, pca, svm = run_cell(small(), "cdl", 10.0, 0, return_models=True)
    assert pca.components.shape == (2, 128)
    assert len(svm.machines) == 10
    assert cell.classes == list(svm.classes)


@pytest.fixture(scope="module")
def report():
    return run_experiment(small(snr_list_db=[0, 20]))


def test_export_scatter_schema(report, tmp_path):
    export_results(report, tmp_path, "csv")
    for c in report.cells:
        rows = (tmp_path / f"scatter_{c.family}_{c.snr_db:g}dB_seed{c.seed}.csv").read_text().splitlines()
        assert rows[0] == "label,pc1,pc2,snr_db,family"
        assert len(rows) - 1 == c.n_test
        assert all(r.endswith(f",{c.snr_db!r},{c.family}") for r in rows[1:])
    assert (tmp_path / "accuracy.csv").read_text().count("\n") == len(report.cells) + 1


def test_report_json_round_trip(report, tmp_path):
    export_results(report, tmp_path, ["json"])
    again = load_report(tmp_path / "report.json")
    assert again == report
    assert ExperimentReport.from_dict(json.loads(report_json(report))) == report


def test_reexport_is_byte_identical(report, tmp_path):
    a = export_results(report, tmp_path / "a", "csv,json")
    b = export_results(load_report(tmp_path / "a" / "report.json"), tmp_path / "b", "csv,json")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes(), pa.name


def test_export_errors(report, tmp_path):
    with pytest.raises(ValueError, match="unknown export format"):
        export_results(report, tmp_path, "xlsx")
    with pytest.raises(ValueError, match="no cells"):
        export_results(ExperimentReport({}, []), tmp_path, "csv")


def _cli_cfg(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"subcarrier_count": 32, "samples_per_class": 6, "repetitions": 1}))
    return str(path)


def test_cli_generate_run_export(tmp_path, capsys):
    cfg = _cli_cfg(tmp_path)
    assert main(["generate", "--config", cfg, "--family", "tdl", "--snr-db", "0,20", "--out", str(tmp_path / "g")]) == 0
    assert sorted(p.name for p in (tmp_path / "g").iterdir()) == ["dataset_tdl_0dB.csv", "dataset_tdl_20dB.csv"]
    assert main(["run", "--config", cfg, "--seed", "3", "--reps", "2", "--snr-db", "10",
                 "--out", str(tmp_path / "r"), "--save-models"]) == 0
    rep = load_report(tmp_path / "r" / "report.json")
    assert len(rep.cells) == 4 and {c.seed for c in rep.cells} == {3, 4}
    assert len(list((tmp_path / "r" / "models").iterdir())) == 4
    assert main(["export", "--report", str(tmp_path / "r" / "report.json"), "--format", "csv",
                 "--out", str(tmp_path / "e")]) == 0
    assert (tmp_path / "e" / "summary.csv").exists()
    assert "accuracy mean" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "--set", "smaples_per_class=50", "--out", str(tmp_path)]) == 1
    assert "smaples_per_class" in capsys.readouterr().err
    assert main(["generate", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 1
    assert main(["export", "--report", str(tmp_path / "missing.json")]) == 2
    cfg = _cli_cfg(tmp_path)
    assert main(["run", "--config", cfg, "--snr-db", "10", "--reps", "1", "--format", "pdf",
                 "--out", str(tmp_path / "x")]) == 2
