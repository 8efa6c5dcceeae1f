import csv
import json

import numpy as np
import pytest

from coach2vec import cli, clustering, features, nn, pipeline, profiles
from coach2vec.errors import TooFewPoints
from coach2vec.model import read_store, write_store
from coach2vec.synth import generate


@pytest.fixture(scope="session")
def store_dir(tmp_path_factory, small_synth_config):
    d = tmp_path_factory.mktemp("store")
    store, _ = generate(small_synth_config)
    write_store(store, d / pipeline.EVENTS_FILE, d / pipeline.MATCHES_FILE)
    return d


def small_cfg(store_dir, out, **kw):
    base = dict(store=str(store_dir), out_dir=str(out), k=4, elbow_k_min=2, elbow_k_max=6, restarts=3,
                train=nn.TrainConfig(epochs=150, dims=(28, 16, 5, 16, 28)))
    base.update(kw)
    return pipeline.PipelineConfig(**base)


def digests(manifest):
    return {s: dict(files) for s, files in manifest["stages"].items()}


@pytest.fixture(scope="session")
def reference_run(store_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("ref")
    cfg = small_cfg(store_dir, out)
    return cfg, pipeline.run_pipeline(cfg)


def test_manifest_contents(reference_run):
    cfg, manifest = reference_run
    assert sorted(manifest["stages"]) == sorted(pipeline.STAGES)
    assert manifest["seeds"] == {"cluster": 0, "train": 0}
    assert manifest["config"]["k"] == 4 and "out_dir" not in manifest["config"]
    for files in manifest["stages"].values():
        for name, digest in files.items():
            assert pipeline.sha256(cfg.out / name) == digest


def test_outputs_reparse(reference_run, small_synth_config):
    cfg, _ = reference_run
    out = cfg.out
    store = read_store(out / pipeline.EVENTS_FILE, out / pipeline.MATCHES_FILE, strict=True)
    assert len(store.matches) == 6 * 3
    keys, raw, z = pipeline.read_features_csv(out / "features.csv")
    scaler = features.ScalerParams.from_json((out / "scaler.json").read_text())
    assert np.allclose(features.apply_scaler(raw, scaler), z, atol=1e-12)
    model = clustering.KMeansModel.from_json((out / "cluster_model.json").read_text())
    assignments = pipeline.read_assignments(out / "assignments.csv")
    assert len(assignments) == len(keys)
    assert set(assignments.values()) <= set(range(model.k))
    pkeys, X = pipeline.read_profile_inputs(out / "profile_inputs.csv")
    assert X.shape == (6, 28) and np.all((X >= 0) & (X <= 1))
    ae = nn.AutoencoderModel.from_json((out / "weights.json").read_text())
    index = pipeline.read_encodings(out / "encodings.csv")
    assert index.keys == tuple(pkeys) and index.fingerprint == ae.fingerprint()
    assert np.allclose(nn.encode(ae, X), index.encodings, atol=1e-12)
    profiles.ProfileScaling.from_json((out / "profile_scaling.json").read_text())
    with open(out / "elbow.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["k"]) for r in rows] == list(range(2, 7))
    assert (out / "elbow.svg").read_text().startswith("<svg")
    with open(out / "pairwise.csv") as fh:
        M = [r[1:] for r in list(csv.reader(fh))[1:]]
    assert np.allclose(np.array(M, dtype=float), np.array(M, dtype=float).T)


def test_rerun_same_digests(reference_run, store_dir, tmp_path):
    cfg, manifest = reference_run
    again = pipeline.run_pipeline(small_cfg(store_dir, tmp_path))
    assert digests(again) == digests(manifest)


def test_worker_count_does_not_matter(reference_run, store_dir, tmp_path):
    _, manifest = reference_run
    assert digests(pipeline.run_pipeline(small_cfg(store_dir, tmp_path, workers=3))) == digests(manifest)


def test_subcommands_compose_to_run(reference_run, store_dir, tmp_path):
    _, manifest = reference_run
    cfg = small_cfg(store_dir, tmp_path)
    for name in pipeline.STAGES:
        pipeline.run_stage(name, cfg)
    assert digests(pipeline.load_manifest(tmp_path / "manifest.json")) == digests(manifest)


def test_rerun_from_manifest(reference_run, tmp_path):
    cfg, manifest = reference_run
    again = pipeline.config_from_manifest(cfg.out / "manifest.json", out_dir=str(tmp_path))
    assert digests(pipeline.run_pipeline(again)) == digests(manifest)


def test_too_many_clusters_fail_at_cluster_stage(store_dir, tmp_path):
    cfg = small_cfg(store_dir, tmp_path, k=5000, train=nn.TrainConfig(dims=(35000, 4, 2, 4, 35000)))
    with pytest.raises(TooFewPoints) as info:
        pipeline.run_pipeline(cfg, skip=("elbow",))
    assert info.value.stage == "cluster"
    assert "[cluster]" in str(info.value)


def test_config_validation():
    with pytest.raises(Exception):
        pipeline.PipelineConfig(k=4)  # autoencoder width still 70
    assert pipeline.default_config(k=4).train.dims == (28, 32, 5, 32, 28)


# ------------------------------------------------------------------ CLI

def _flags(store_dir, out):
    return ["--store", str(store_dir), "--out", str(out), "--k", "4", "--elbow-k-max", "6",
            "--restarts", "3", "--epochs", "150", "--hidden", "16"]


def test_cli_run_matches_library(reference_run, store_dir, tmp_path, capsys):
    _, manifest = reference_run
    assert cli.main(["run", *_flags(store_dir, tmp_path)]) == 0
    assert digests(pipeline.load_manifest(tmp_path / "manifest.json")) == digests(manifest)
    capsys.readouterr()

    assert cli.main(["query", *_flags(store_dir, tmp_path), "--coach", "C000", "--team", "T000", "--top", "3",
                     "--csv", str(tmp_path / "q.csv")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[0].startswith("1\t")
    assert len((tmp_path / "q.csv").read_text().splitlines()) == 4

    assert cli.main(["query", *_flags(store_dir, tmp_path), "--coach", "C000"]) == 0
    assert "*" in capsys.readouterr().out

    assert cli.main(["report", *_flags(store_dir, tmp_path), "--pairwise"]) == 0
    assert capsys.readouterr().out.startswith("key,C000@T000")


def test_cli_stage_by_stage(reference_run, store_dir, tmp_path, capsys):
    _, manifest = reference_run
    for name in pipeline.STAGES:
        assert cli.main([name, *_flags(store_dir, tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("2\t")
    assert digests(pipeline.load_manifest(tmp_path / "manifest.json")) == digests(manifest)


def test_cli_manifest_flag(reference_run, tmp_path):
    cfg, manifest = reference_run
    assert cli.main(["run", "--manifest", str(cfg.out / "manifest.json"), "--out", str(tmp_path), "--workers", "2"]) == 0
    assert digests(pipeline.load_manifest(tmp_path / "manifest.json")) == digests(manifest)


def test_cli_errors_name_stage(store_dir, tmp_path, capsys):
    code = cli.main(["run", "--store", str(tmp_path / "missing"), "--out", str(tmp_path / "o")])
    assert code != 0
    assert "stage ingest" in capsys.readouterr().err

    code = cli.main(["run", "--store", str(store_dir), "--out", str(tmp_path / "o2"), "--k", "5000",
                     "--elbow-k-max", "2"])
    assert code == 2
    assert "stage cluster" in capsys.readouterr().err

    assert cli.main(["query", *_flags(store_dir, tmp_path / "o3"), "--coach", "X"]) != 0


def test_cli_synth(tmp_path, capsys):
    dest = tmp_path / "corpus"
    assert cli.main(["synth", "--dest", str(dest), "--coaches-per-archetype", "1", "--matches-per-coach", "2",
                     "--possessions-per-match", "6"]) == 0
    store = read_store(dest / pipeline.EVENTS_FILE, dest / pipeline.MATCHES_FILE, strict=True)
    assert len(store.matches) == 6
    assert (dest / "ground_truth.csv").read_text().splitlines()[0] == "coach_id,archetype"
    assert "wrote" in capsys.readouterr().out


def test_store_env_default(monkeypatch, store_dir):
    monkeypatch.setenv(pipeline.STORE_ENV, str(store_dir))
    assert pipeline.PipelineConfig().store == str(store_dir)
    assert json.loads(json.dumps(pipeline.PipelineConfig().reproducible_dict()))["store"] == str(store_dir)
