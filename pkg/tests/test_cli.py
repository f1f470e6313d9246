"""CLI contract: catalog, exit codes, config handling, reproducibility."""

import filecmp
import json

import pytest

from szlab.cli import load_config, main
from szlab.errors import ConfigError
from szlab.experiments import REGISTRY, catalog


def test_catalog_covers_every_criterion_once():
    cat = catalog()
    assert len(cat["experiments"]) >= 10
    ids = sorted(c for e in cat["experiments"] for c in e["criteria"])
    assert ids == list(range(1, 15))


def test_catalog_is_valid_json(capsys):
    assert main(["list"]) == 0
    parsed = json.loads(capsys.readouterr().out)
    assert {e["name"] for e in parsed["experiments"]} == set(REGISTRY)


def test_every_stochastic_experiment_requires_seed():
    for exp in REGISTRY.values():
        if exp.stochastic:
            assert "seed" in exp.params and exp.params["seed"].required


def test_missing_seed_exits_1(tmp_path, capsys):
    code = main(["ball-volume", "--out", str(tmp_path)])
    assert code == 1
    assert "seed" in capsys.readouterr().err


def test_unknown_experiment_rejected():
    with pytest.raises(SystemExit):
        main(["no-such-experiment"])


def test_run_writes_manifest_and_csv(tmp_path, capsys):
    code = main(["hermite-trace", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS [criterion 3]" in out
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["experiment"] == "hermite-trace"
    assert manifest["criteria"] == [3]
    assert (tmp_path / "hermite_trace.csv").exists()


def test_config_file_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        'experiment = "toeplitz"\n'
        '[params]\n'
        'symbol = "2+cos"\n'
        'n = [16, 32]\n'
    )
    outdir = tmp_path / "out"
    code = main(["toeplitz", "--config", str(cfg), "--out", str(outdir)])
    assert code == 0
    raw = (outdir / "toeplitz.csv").read_bytes()
    assert raw.count(b"\r\n") == 3  # header + two rows, RFC 4180 endings


def test_config_unknown_key_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[params]\nnonsense = 3\n')
    code = main(["toeplitz", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "nonsense" in capsys.readouterr().err


def test_config_for_other_experiment_rejected(tmp_path, capsys):
    cfg = tmp_path / "other.toml"
    cfg.write_text('experiment = "plancherel"\n')
    code = main(["toeplitz", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 1


def test_load_config_subset_parser_values(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        '# comment\n'
        'experiment = "ball-volume"\n'
        'out = "somewhere"\n'
        '[params]\n'
        'seed = 9\n'
        'samples = 100000\n'
    )
    loaded = load_config(cfg)
    assert loaded["experiment"] == "ball-volume"
    assert loaded["params"]["seed"] == 9
    assert loaded["out"] == "somewhere"


def test_load_config_rejects_unknown_top_level(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('bogus = 1\n')
    with pytest.raises(ConfigError):
        load_config(cfg)


def test_divergent_run_exits_3(tmp_path, capsys):
    code = main(["phase-volume", "--seed", "5", "--mode", "plancherel",
                 "--out", str(tmp_path)])
    assert code == 3
    assert "DIVERGENCE" in capsys.readouterr().err


def test_seeded_rerun_byte_identical(tmp_path, capsys):
    args = ["ball-volume", "--seed", "123", "--samples", "50000"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert filecmp.cmp(tmp_path / "a" / "ball_volume.csv",
                       tmp_path / "b" / "ball_volume.csv", shallow=False)
    assert filecmp.cmp(tmp_path / "a" / "manifest.json",
                       tmp_path / "b" / "manifest.json", shallow=False)


def test_number_rendering_17_significant_digits():
    import math

    from szlab.reporting import format_number

    assert format_number(math.pi) == "3.1415926535897931"
    # 17 significant digits round-trip any float64 exactly
    import numpy as np

    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert float(format_number(float(x))) == float(x)


def test_szlab_threads_env(monkeypatch):
    from szlab.parallel import map_indexed, worker_count

    monkeypatch.setenv("SZLAB_THREADS", "3")
    assert worker_count() == 3
    assert map_indexed(lambda x: x * x, range(7)) == [x * x for x in range(7)]
    monkeypatch.setenv("SZLAB_THREADS", "junk")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.delenv("SZLAB_THREADS")
    assert worker_count() == 1


def test_threaded_sweep_matches_sequential(tmp_path, monkeypatch):
    import filecmp

    from szlab.experiments import run_experiment

    run_experiment("laptev-safarov", {"seed": 3, "trials": 12, "dim": 12},
                   tmp_path / "seq")
    monkeypatch.setenv("SZLAB_THREADS", "4")
    run_experiment("laptev-safarov", {"seed": 3, "trials": 12, "dim": 12},
                   tmp_path / "par")
    assert filecmp.cmp(tmp_path / "seq" / "laptev_safarov.csv",
                       tmp_path / "par" / "laptev_safarov.csv", shallow=False)
