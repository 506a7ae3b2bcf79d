import json

import numpy as np
import pytest

from spherediff import cli, noise
from spherediff.cli import ENV_OUT_DIR, main


@pytest.fixture(autouse=True)
def _isolated_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_OUT_DIR, str(tmp_path))
    return tmp_path


def _read_json(path):
    return json.loads(path.read_text())


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == cli.__version__


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify-operators"])
    assert exc.value.code == 1


def test_verify_operators_success(tmp_path):
    out = tmp_path / "verify.json"
    assert main(["verify-operators", "--L", "2", "--out", str(out)]) == 0
    rep = _read_json(out)
    assert rep["pass"] is True and rep["failures"] == []
    for v in rep["residuals"].values():
        assert v < 1e-10
    prov = rep["provenance"]
    assert prov["tool_version"] == cli.__version__
    assert len(prov["config_hash"]) == 64
    assert prov["seed"] == 0


def test_verify_operators_default_out_respects_env(tmp_path):
    assert main(["verify-operators", "--L", "1"]) == 0
    assert (tmp_path / "verify_operators_L1.json").exists()


def test_verify_operators_impossible_tolerance_fails(tmp_path, capsys):
    assert main(["verify-operators", "--L", "2", "--tol", "0"]) == 2
    assert "FAILED" in capsys.readouterr().err
    assert _read_json(tmp_path / "verify_operators_L2.json")["pass"] is False


def test_verify_operators_rejects_bad_band_limit():
    assert main(["verify-operators", "--L", "0"]) == 1


def test_covariance_outputs(tmp_path):
    out_dir = tmp_path / "cov"
    rc = main(["covariance", "--L", "2", "--samples", "2000", "--seed", "3",
               "--out-dir", str(out_dir)])
    assert rc == 0
    emp = (out_dir / "covariance_empirical.csv").read_text()
    assert emp.splitlines()[0].startswith("index,")  # chart-slot labelled header
    summary = _read_json(out_dir / "summary.json")
    assert summary["rel_frobenius_error"] < 0.3
    assert summary["samples"] == 2000


def test_covariance_usage_errors():
    assert main(["covariance", "--L", "2", "--samples", "1"]) == 1
    assert main(["covariance", "--L", "2", "--t", "0"]) == 1
    assert main(["covariance", "--L", "0"]) == 1


def test_diffuse_forward_writes_samples_and_sidecar(tmp_path):
    out = tmp_path / "fwd.csv"
    rc = main(["diffuse", "--L", "2", "--n", "5", "--steps", "3",
               "--domain", "frequency", "--direction", "forward",
               "--seed", "11", "--out", str(out)])
    assert rc == 0
    X, meta = noise.load_samples(out)
    assert X.shape == (5, 4)
    assert meta["t"] == 1.0 and meta["domain"] == "frequency"
    assert meta["provenance"]["seed"] == 11


def test_diffuse_reverse_requires_score():
    assert main(["diffuse", "--L", "2", "--direction", "reverse",
                 "--score", "none"]) == 1


def test_diffuse_reverse_recovers_and_reports(tmp_path):
    out = tmp_path / "rev.csv"
    rc = main(["diffuse", "--L", "2", "--n", "200", "--steps", "60",
               "--domain", "frequency", "--direction", "reverse",
               "--score", "gaussian-analytic", "--seed", "4", "--out", str(out)])
    assert rc == 0
    diag = _read_json(tmp_path / "rev.csv.diagnostics.json")
    assert diag["aborted_paths"] == []
    assert diag["mean_rel_error"] < 0.5  # tiny run; acceptance suite is strict
    X, _ = noise.load_samples(out)
    assert X.shape == (200, 4)


def test_diffuse_runs_are_byte_identical(tmp_path):
    args = ["diffuse", "--L", "2", "--n", "8", "--steps", "5", "--seed", "9"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    side1 = (tmp_path / "a.csv.json").read_bytes()
    side2 = (tmp_path / "b.csv.json").read_bytes()
    assert side1 == side2


def test_diffuse_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 7}))
    out = tmp_path / "cfg_run.csv"
    rc = main(["diffuse", "--L", "2", "--n", "3", "--steps", "2",
               "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    X, _ = noise.load_samples(out)
    assert X.shape[0] == 7  # config file wins over the --n 3 flag


def test_diffuse_config_section_and_defaults(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"diffuse": {"steps": 2, "n": 4, "L": 2}}))
    out = tmp_path / "sec.csv"
    assert main(["diffuse", "--config", str(cfg), "--out", str(out)]) == 0
    X, meta = noise.load_samples(out)
    assert X.shape == (4, 4)
    assert meta["domain"] == "frequency"  # built-in default survives


def test_diffuse_rejects_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["diffuse", "--config", str(bad)]) == 1
    assert main(["diffuse", "--config", str(tmp_path / "missing.json")]) == 1


def test_diffuse_usage_validation():
    assert main(["diffuse", "--L", "2", "--steps", "0"]) == 1
    assert main(["diffuse", "--L", "0"]) == 1
    with pytest.raises(SystemExit) as exc:  # argparse rejects the choice itself
        main(["diffuse", "--direction", "sideways"])
    assert exc.value.code == 1


def test_diffuse_blowup_exits_3(tmp_path, capsys):
    cfg = tmp_path / "explode.json"
    # a huge rate with a coarse grid makes Euler-Maruyama overshoot past the
    # non-finite guard within a few steps
    cfg.write_text(json.dumps({
        "beta_max": 2e4, "steps": 4, "n": 3, "L": 2, "domain": "spatial",
    }))
    rc = main(["diffuse", "--config", str(cfg), "--out", str(tmp_path / "x.csv")])
    assert rc == 3
    assert "aborted" in capsys.readouterr().err


def test_bound_check_success(tmp_path):
    out = tmp_path / "bound.json"
    rc = main(["bound-check", "--L", "2", "--trials", "50", "--seed", "1",
               "--out", str(out)])
    assert rc == 0
    rep = _read_json(out)
    assert rep["violations"] == 0
    assert rep["n_trials"] == 50
    assert rep["min_slack"] > 0
    for v in rep["identity_residuals"].values():
        assert np.isfinite(v)


def test_bound_check_usage_errors():
    assert main(["bound-check", "--L", "0"]) == 1
    assert main(["bound-check", "--L", "2", "--trials", "0"]) == 1


def test_sliced_w_identical_files(tmp_path):
    src = tmp_path / "s.csv"
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 4))
    noise.save_samples(src, X, {"L": 2, "t": 1.0, "n": 50, "seed": 0})
    out = tmp_path / "sw.json"
    rc = main(["sliced-w", "--a", str(src), "--b", str(src),
               "--n-proj", "10", "--out", str(out)])
    assert rc == 0
    rep = _read_json(out)
    assert rep["sw"] == 0.0 and rep["n_proj"] == 10


def test_sliced_w_dimension_mismatch_is_usage_error(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    noise.save_samples(a, np.zeros((5, 4)), {"L": 2, "t": 1.0, "n": 5, "seed": 0})
    noise.save_samples(b, np.zeros((5, 9)), {"L": 3, "t": 1.0, "n": 5, "seed": 0})
    assert main(["sliced-w", "--a", str(a), "--b", str(b)]) == 1


def test_sliced_w_missing_file_is_usage_error(tmp_path):
    assert main(["sliced-w", "--a", str(tmp_path / "no.csv"),
                 "--b", str(tmp_path / "no.csv")]) == 1


def test_sliced_w_reads_raw_samples(tmp_path):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    rng = np.random.default_rng(5)
    noise.save_samples(a, rng.standard_normal((30, 4)),
                       {"L": 2, "t": 1.0, "n": 30, "seed": 0}, raw=True)
    noise.save_samples(b, rng.standard_normal((30, 4)) + 1.0,
                       {"L": 2, "t": 1.0, "n": 30, "seed": 0}, raw=True)
    out = tmp_path / "sw.json"
    assert main(["sliced-w", "--a", str(a), "--b", str(b), "--n-proj", "8",
                 "--out", str(out)]) == 0
    assert _read_json(out)["sw"] > 0.5


def test_reports_are_byte_identical_across_runs(tmp_path):
    o1, o2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for o in (o1, o2):
        assert main(["bound-check", "--L", "2", "--trials", "20",
                     "--seed", "7", "--out", str(o)]) == 0
    assert o1.read_bytes() == o2.read_bytes()
