import csv
import json
import os
import subprocess
import sys

import pytest

from tuneseer import cli, harness
from tuneseer.errors import ContractError
from tuneseer.harness import (
    CampaignConfig,
    ComparisonReport,
    cmd_compare,
    cmd_features,
    cmd_recommend,
    cmd_report,
    cmd_train,
    compute_wilcoxon_rows,
)

# budget must cover sigma plus the largest admissible population (500)
TINY = dict(
    dims=(2,),
    instances=1,
    seeds=(0, 1),
    train_seeds=(0,),
    budget=1600,
    sigma=50,
    kappa=3,
    n_param_sets=2,
    workers=1,
)


def train_config(tmp_path, **kw):
    merged = {**TINY, "out": str(tmp_path), **kw}
    return CampaignConfig(**merged)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("campaign")
    config = train_config(out)
    path = cmd_train(config)
    return out, config, path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_train_outputs(trained):
    out, config, path = trained
    assert os.path.exists(path)
    lines = [l for l in open(path) if l.strip()]
    # 10 training functions x 1 dim x 1 instance x 2 param sets x 1 seed
    assert len(lines) == 20
    listing = json.load(open(out / "suite.json"))
    assert len(listing) == 10
    assert {row["dimension"] for row in listing} == {2}


def test_compare_outputs_and_pairing(trained):
    out, config, _ = trained
    compare_out = str(out / "cmp")
    report = cmd_compare(
        train_config(
            out,
            suite="holdout",
            out=compare_out,
            store_path=str(out / "store.jsonl"),
            methods=("predictive", "literature"),
        )
    )
    rows = read_rows(os.path.join(compare_out, "alpha.csv"))
    # 6 holdout functions x 1 dim x 1 instance x 2 seeds x 2 methods
    assert len(rows) == 24
    assert all(r["status"] == "ok" for r in rows)
    keys_by_method = {}
    for r in rows:
        key = (r["function_id"], r["dim"], r["instance_seed"], r["run_seed"])
        keys_by_method.setdefault(r["method"], set()).add(key)
    assert keys_by_method["predictive"] == keys_by_method["literature"]
    # budget audit: evals recorded and within budget
    for r in rows:
        assert int(r["evals"]) <= TINY["budget"]

    wrows = read_rows(os.path.join(compare_out, "wilcoxon.csv"))
    assert len(wrows) == 1
    assert wrows[0]["method_a"] == "predictive"
    assert wrows[0]["method_b"] == "literature"
    assert int(wrows[0]["n"]) == 12

    curves = os.listdir(os.path.join(compare_out, "curves"))
    assert len(curves) == 12  # 6 functions x 1 dim x 2 seeds
    sample = read_rows(os.path.join(compare_out, "curves", sorted(curves)[0]))
    best = [float(r["best"]) for r in sample if r["method"] == "literature"]
    assert best == sorted(best, reverse=True)  # improvement-only rows

    # per-run retrain grows the store and persists it
    grown = out / "cmp" / "store_after_compare.jsonl"
    assert grown.exists() if hasattr(grown, "exists") else os.path.exists(grown)
    assert len(open(grown).readlines()) == 20 + 12


def test_compare_determinism(trained):
    out, config, _ = trained
    kw = dict(
        suite="holdout",
        store_path=str(out / "store.jsonl"),
        methods=("predictive", "literature"),
        seeds=(0,),
    )
    cmd_compare(train_config(out, out=str(out / "d1"), **kw))
    cmd_compare(train_config(out, out=str(out / "d2"), **kw))
    a = open(out / "d1" / "alpha.csv", "rb").read()
    b = open(out / "d2" / "alpha.csv", "rb").read()
    assert a == b


def test_compare_requires_store(tmp_path):
    with pytest.raises(ContractError):
        cmd_compare(
            train_config(tmp_path, suite="holdout", methods=("predictive",))
        )


def test_failed_runs_are_explicit_rows(trained):
    out, _, _ = trained
    # optimizer budget of 10 evals cannot fit any admissible population
    config = train_config(
        out,
        suite="holdout",
        out=str(out / "fail"),
        store_path=str(out / "store.jsonl"),
        methods=("predictive",),
        seeds=(0,),
        budget=60,
        sigma=50,
    )
    report = cmd_compare(config)
    rows = read_rows(os.path.join(str(out / "fail"), "alpha.csv"))
    assert len(rows) == 6
    assert all(r["status"].startswith("failed") for r in rows)
    assert all(r["alpha"] == "" for r in rows)
    assert report.n_failed == 6


def test_self_comparison_is_null():
    rows = []
    for method in ("predictive", "literature"):
        for seed in range(10):
            rows.append(
                {
                    "function_id": "sphere",
                    "dim": 2,
                    "instance_seed": 1,
                    "run_seed": seed,
                    "method": method,
                    "alpha": 0.5 + seed,
                    "status": "ok",
                }
            )
    out = compute_wilcoxon_rows(rows)
    assert len(out) == 1
    assert out[0]["W"] == 0.0
    assert out[0]["p"] == 1.0


def test_cmd_features(trained):
    out, _, _ = trained
    config = train_config(
        out, out=str(out / "feat"), seeds=(0,), sigmas=(20, 50), kappa=3
    )
    path = cmd_features(config)
    rows = read_rows(path)
    # 2 sigmas x 10 functions x 1 instance x 1 seed
    assert len(rows) == 20
    assert {r["sigma"] for r in rows} == {"20", "50"}
    for r in rows:
        assert 0 <= int(r["cluster"]) < 3
        assert float(r["beta1"]) == 2.0


def test_cmd_recommend_with_explicit_beta(trained, capsys):
    out, _, _ = trained
    result = cmd_recommend(
        store_path=str(out / "store.jsonl"), kappa=3, beta=(2.0, 1.2, 0.3)
    )
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload == result
    assert 0.0 <= result["p1"] <= 1.0
    assert result["p3"] >= 5
    assert isinstance(result["cluster"], int)


def test_cmd_report_rederives_wilcoxon(trained):
    out, _, _ = trained
    cmp_dir = str(out / "cmp")
    before = read_rows(os.path.join(cmp_dir, "wilcoxon.csv"))
    rows = cmd_report(cmp_dir)
    after = read_rows(os.path.join(cmp_dir, "wilcoxon.csv"))
    assert before == after
    assert len(rows) == len(before)


def test_cli_exit_codes(trained, tmp_path):
    out, _, _ = trained
    assert cli.main(["report", "--out", str(out / "cmp")]) == 0
    assert cli.main(["report", "--out", str(tmp_path / "nowhere")]) == 2
    assert (
        cli.main(
            ["compare", "--methods", "nonsense", "--out", str(tmp_path)]
        )
        == 1
    )


def test_cli_config_file_with_flag_override(tmp_path):
    config_path = tmp_path / "config.json"
    json.dump(
        {
            "dims": [2],
            "instances": 1,
            "train_seeds": [0],
            "budget": 1600,
            "sigma": 50,
            "n_param_sets": 2,
            "out": str(tmp_path / "a"),
        },
        open(config_path, "w"),
    )
    # flag overrides the config's out dir
    code = cli.main(
        ["train", "--config", str(config_path), "--out", str(tmp_path / "b")]
    )
    assert code == 0
    assert os.path.exists(tmp_path / "b" / "store.jsonl")
    assert not os.path.exists(tmp_path / "a" / "store.jsonl")


def test_cli_module_entrypoint(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tuneseer.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "train" in proc.stdout and "compare" in proc.stdout


def test_unknown_config_key_rejected():
    with pytest.raises(ContractError):
        CampaignConfig().merged({"nonsense": 1})


def test_env_var_sets_default_out(monkeypatch):
    monkeypatch.setenv("TUNESEER_DATA", "/tmp/tuneseer-out")
    assert harness.default_out_dir() == "/tmp/tuneseer-out"
    assert CampaignConfig().out == "/tmp/tuneseer-out"


def test_compare_instance_seeds_disjoint_by_default():
    config = CampaignConfig(instances=2)
    assert set(config.train_instance_seeds()).isdisjoint(
        config.compare_instance_seeds()
    )
    mirrored = CampaignConfig(instances=2, paper_instances=True)
    assert mirrored.compare_instance_seeds() == mirrored.train_instance_seeds()


def test_all_four_methods_compare(trained):
    out, _, _ = trained
    report = cmd_compare(
        train_config(
            out,
            suite="holdout",
            out=str(out / "all4"),
            store_path=str(out / "store.jsonl"),
            methods=("predictive", "best-of-training", "shade", "literature"),
            seeds=(0,),
            dims=(2,),
        )
    )
    rows = read_rows(os.path.join(str(out / "all4"), "alpha.csv"))
    assert {r["method"] for r in rows} == {
        "predictive",
        "best-of-training",
        "shade",
        "literature",
    }
    assert len(report.wilcoxon_rows) == 6  # all unordered method pairs
    first = report.wilcoxon_rows[0]
    assert first["method_a"] == "predictive"  # canonical sign convention


def test_workers_match_sequential(trained):
    out, _, _ = trained
    kw = dict(
        suite="holdout",
        store_path=str(out / "store.jsonl"),
        methods=("literature",),
        seeds=(0,),
    )
    cmd_compare(train_config(out, out=str(out / "w1"), workers=1, **kw))
    cmd_compare(train_config(out, out=str(out / "w2"), workers=2, **kw))
    a = open(out / "w1" / "alpha.csv", "rb").read()
    b = open(out / "w2" / "alpha.csv", "rb").read()
    assert a == b
