import json
import math

import pytest
from typer.testing import CliRunner

from app.cli.config import ExperimentConfig, load_config, resolve_seed
from app.cli.experiment_commands import EXIT_CONFIG, EXIT_IO, EXIT_RESOURCE, experiment_app
from app.core.errors import ConfigError, PreconditionError
from app.utils.report import CSV_NAME, JSONL_NAME, emit_report

runner = CliRunner()

THRESHOLDS_8 = {"hypothesis_class": {"kind": "thresholds", "n": 8}}

DESK_THRESHOLDS = {
    "hypothesis_class": {"kind": "thresholds", "n": 2},
    "distribution": {"target_id": 1},
    "regime": "desk-scale",
    "desk": {"leaf_size": 2, "n1": 2, "k": 4, "eta": 1.0},
    "trials": 120,
    "seed": 3,
}


def _records(out_dir):
    lines = (out_dir / JSONL_NAME).read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines]


def _invoke(*args):
    return runner.invoke(experiment_app, [str(a) for a in args])


def test_ldim_stage_writes_both_reports(write_config, tmp_path):
    out = tmp_path / "out"
    result = _invoke("ldim", "--config", write_config(THRESHOLDS_8), "--out", out)
    assert result.exit_code == 0, result.output
    (summary,) = _records(out)
    assert summary["ldim"] == 3
    assert summary["class_size"] == 9
    assert summary["stage"] == "ldim"
    csv_lines = (out / CSV_NAME).read_text(encoding="utf-8").splitlines()
    assert len(csv_lines) == 2
    assert csv_lines[0].startswith("stage,d,k,eta,n1")


def test_soa_stage_on_the_adversarial_sequence(write_config, tmp_path):
    config = {**THRESHOLDS_8, "soa_sequence": [[3, 0], [5, 0], [6, 1]], "game_horizon": 3}
    out = tmp_path / "out"
    result = _invoke("soa", "--config", write_config(config), "--out", out, "--format", "json")
    assert result.exit_code == 0, result.output
    (summary,) = _records(out)
    assert summary["mistakes"] == 3
    assert summary["output_bits"] == "00000011"
    assert summary["worst_case_mistakes"] == 3
    assert not (out / CSV_NAME).exists()


def test_bounds_stage_for_d1(write_config, tmp_path):
    out = tmp_path / "out"
    config = {"hypothesis_class": {"kind": "thresholds", "n": 2}, "epsilon": 0.5, "delta": 0.05}
    result = _invoke("bounds", "--config", write_config(config), "--out", out)
    assert result.exit_code == 0, result.output
    (summary,) = _records(out)
    assert summary["d"] == 1
    assert summary["n"] == 131072
    assert summary["k"] == 192
    assert summary["eta"] == 0.0625
    assert summary["theorem2_rhs"] == pytest.approx(7.5924, abs=5e-4)


def test_stability_reruns_are_byte_identical_across_thread_counts(write_config, tmp_path):
    config = write_config(DESK_THRESHOLDS)
    first, second = tmp_path / "a", tmp_path / "b"
    assert _invoke("stability", "--config", config, "--out", first, "--threads", 1).exit_code == 0
    assert _invoke("stability", "--config", config, "--out", second, "--threads", 3).exit_code == 0
    for name in (JSONL_NAME, CSV_NAME):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    summary = _records(first)[-1]
    assert summary["record"] == "summary"
    assert summary["trials"] == 120


def test_seed_flag_changes_the_run(write_config, tmp_path):
    config = write_config(DESK_THRESHOLDS)
    _invoke("boost", "--config", config, "--out", tmp_path / "a")
    _invoke("boost", "--config", config, "--out", tmp_path / "b", "--seed", 99)
    assert _records(tmp_path / "a")[-1]["seed"] == 3
    assert _records(tmp_path / "b")[-1]["seed"] == 99


def test_boost_and_mi_stages(write_config, tmp_path):
    config = write_config(DESK_THRESHOLDS)
    result = _invoke("boost", "--config", config, "--out", tmp_path / "boost")
    assert result.exit_code == 0, result.output
    records = _records(tmp_path / "boost")
    assert sum(r["record"] == "trial" for r in records) == 120
    summary = records[-1]
    assert summary["threshold"] == 2
    assert 0 < summary["eta_hat"] <= 1
    # the failure bound uses the measured stability, not the configured eta
    assert summary["failure_bound"] == pytest.approx(math.exp(-4 * summary["eta_hat"] ** 2 / 2), rel=1e-9)
    assert summary["failure_bound_eta"] == pytest.approx(math.exp(-2), rel=1e-9)
    assert summary["failure_ok"] == (
        summary["failure_rate"] <= summary["failure_bound"] + 3 * summary["failure_sigma"]
    )

    result = _invoke("mi", "--config", config, "--out", tmp_path / "mi")
    assert result.exit_code == 0, result.output
    summary = _records(tmp_path / "mi")[-1]
    assert summary["entropy_hat"] >= 0
    assert summary["theorem1_rhs"] > summary["entropy_hat"]
    assert 0 < summary["eta_hat"] <= 1
    if summary["eta_hat"] * 4 / 2 >= 2:
        assert summary["theorem1_rhs_eta_hat"] is not None
    else:
        assert summary["theorem1_rhs_eta_hat"] is None
        assert summary["within_bound"] is None


def test_affine_stage(write_config, tmp_path):
    config = {
        "hypothesis_class": {"kind": "affine", "q": 3, "l": 2, "d": 1},
        "regime": "desk-scale",
        "desk": {"leaf_size": 2, "n1": 2, "k": 8, "eta": 0.5},
        "trials": 100,
    }
    result = _invoke("affine", "--config", write_config(config), "--out", tmp_path / "out")
    assert result.exit_code == 0, result.output
    summary = _records(tmp_path / "out")[-1]
    assert summary["domain_size"] == 9
    assert summary["proposition_rhs"] == pytest.approx(4.5924, abs=5e-4)
    assert 0 < summary["eta_hat"] <= 1


def test_invalid_configs_exit_with_config_error(write_config, tmp_path):
    bad_schema = write_config({**THRESHOLDS_8, "schema_version": 2}, "schema.json")
    missing_desk = write_config({**THRESHOLDS_8, "regime": "desk-scale"}, "desk.json")
    small_k = write_config(
        {**THRESHOLDS_8, "regime": "desk-scale", "desk": {"leaf_size": 1, "n1": 1, "k": 3, "eta": 1.0}}, "k.json"
    )
    not_json = tmp_path / "broken.json"
    not_json.write_text("{", encoding="utf-8")
    for path in (bad_schema, missing_desk, small_k, not_json, tmp_path / "missing.json"):
        assert _invoke("ldim", "--config", path, "--out", tmp_path / "out").exit_code == EXIT_CONFIG, path
    assert _invoke("ldim", "--config", write_config(THRESHOLDS_8), "--format", "xml").exit_code == EXIT_CONFIG


def test_pmf_of_the_wrong_length_is_a_config_error(write_config, tmp_path):
    config = {"hypothesis_class": {"kind": "thresholds", "n": 2}, "distribution": {"pmf": [1.0]}}
    result = _invoke("ldim", "--config", write_config(config), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG
    assert not (tmp_path / "out").exists()


def test_declared_d_below_the_class_dimension_is_a_config_error(write_config, tmp_path):
    config = {**DESK_THRESHOLDS, **THRESHOLDS_8, "distribution": {"target_id": 0}, "d": 1}
    result = _invoke("stability", "--config", write_config(config), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG


def test_affine_target_above_d_is_a_config_error(write_config, tmp_path):
    config = {
        "hypothesis_class": {"kind": "affine", "q": 3, "l": 2, "d": 1},
        "distribution": {"target_subspace": {"basepoint": [0, 0], "basis": [[1, 0], [0, 1]]}},
        "regime": "desk-scale",
        "desk": {"leaf_size": 2, "n1": 2, "k": 8, "eta": 0.5},
    }
    result = _invoke("affine", "--config", write_config(config), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG


def test_faithful_regime_beyond_desk_scale_is_a_config_error(write_config, tmp_path):
    config = {"hypothesis_class": {"kind": "inline", "rows": ["000", "001", "011", "111"]}}
    # d = 2 needs n = 2^28 examples
    result = _invoke("stability", "--config", write_config(config), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG


def test_resource_guard_exit_code(write_config, tmp_path):
    config = {"hypothesis_class": {"kind": "affine", "q": 2, "l": 7, "d": 1}, "desk": {"leaf_size": 1, "n1": 1}}
    result = _invoke("ldim", "--config", write_config(config), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_RESOURCE


def test_unwritable_output_exits_with_io_error(write_config, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    result = _invoke("ldim", "--config", write_config(THRESHOLDS_8), "--out", blocker / "out")
    assert result.exit_code == EXIT_IO


def test_env_seed_sits_between_flag_and_config(write_config, monkeypatch):
    cfg = load_config(write_config({**THRESHOLDS_8, "seed": 5}))
    assert resolve_seed(None, cfg) == 5
    monkeypatch.setenv("EXPERIMENT_SEED", "8")
    assert resolve_seed(None, cfg) == 8
    assert resolve_seed(1, cfg) == 1
    monkeypatch.setenv("EXPERIMENT_SEED", "eight")
    with pytest.raises(ConfigError):
        resolve_seed(None, cfg)


def test_config_hash_is_stable():
    first = ExperimentConfig.model_validate(THRESHOLDS_8)
    second = ExperimentConfig.model_validate(json.loads(json.dumps(THRESHOLDS_8)))
    assert first.config_hash() == second.config_hash()
    assert first.config_hash() != ExperimentConfig.model_validate({**THRESHOLDS_8, "seed": 1}).config_hash()


def test_emit_report_requires_records(tmp_path):
    with pytest.raises(PreconditionError):
        emit_report([], tmp_path)
    paths = emit_report([{"record": "summary", "stage": "ldim", "eta": 1 / 3}], tmp_path, "both")
    assert [p.name for p in paths] == [JSONL_NAME, CSV_NAME]
    assert json.loads((tmp_path / JSONL_NAME).read_text(encoding="utf-8"))["eta"] == 0.333333333333
    assert not list(tmp_path.glob("*.tmp"))
