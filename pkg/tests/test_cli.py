import json
import math
import os

import pytest

from aperiodic.cli import (EXIT_CHECK_FAILURES, EXIT_CONFIG_ERROR, EXIT_OK,
                           ExperimentConfig, main)
from aperiodic.errors import ConfigError


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def torus_profile_config(tmp_path, **grid):
    return write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "torus", "alpha": "golden"},
        "grid": grid or {"eps_max": 0.5, "ratio": 0.5, "count": 10},
        "horizons": {"N": 500, "s_max": 20000},
    })


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# Config validation
# ---------------------------------------------------------------------------

def test_schema_version_required():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"system": {"kind": "torus"}})
    assert err.value.field == "schema_version"


def test_increasing_grid_rejected(tmp_path):
    path = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "torus", "alpha": "golden"},
        "grid": {"epsilons": [0.1, 0.2, 0.4]},
    })
    code = main(["profile", "--config", path, "--out", str(tmp_path)])
    assert code == EXIT_CONFIG_ERROR


def test_config_error_names_field(capsys, tmp_path):
    path = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "torus"},
        "grid": {"ratio": 1.5},
    })
    code = main(["profile", "--config", path, "--out", str(tmp_path)])
    assert code == EXIT_CONFIG_ERROR
    assert "grid.ratio" in capsys.readouterr().err


def test_unknown_system_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"schema_version": 1,
                                    "system": {"kind": "weird"}})


def test_missing_config_flag(tmp_path):
    assert main(["profile", "--out", str(tmp_path)]) == EXIT_CONFIG_ERROR


# ---------------------------------------------------------------------------
# Profile runs
# ---------------------------------------------------------------------------

def test_profile_emits_files_and_estimates(tmp_path):
    out = tmp_path / "run"
    cfg = torus_profile_config(tmp_path, eps_max=0.5, ratio=0.5, count=12)
    code = main(["profile", "--config", cfg, "--out", str(out)])
    assert code == EXIT_OK
    assert (out / "profile.csv").exists()
    assert (out / "plotdata.csv").exists()
    estimates = json.loads((out / "estimates.json").read_text())
    assert estimates["scale_growth"]["slope"] == pytest.approx(1.0, abs=0.1)


def test_determinism_byte_identical(tmp_path):
    cfg = torus_profile_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["profile", "--config", cfg, "--seed", "9", "--out", str(out1)]) == EXIT_OK
    assert main(["profile", "--config", cfg, "--seed", "9", "--out", str(out2)]) == EXIT_OK
    for name in ("profile.csv", "estimates.json", "plotdata.csv"):
        assert read(out1 / name) == read(out2 / name)


def test_threads_do_not_change_output(tmp_path):
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "torus", "alpha": "golden"},
        "grid": {"eps_max": 0.5, "ratio": 0.5, "count": 8},
        "horizons": {"N": 100, "s_max": 5000},
        "lengths": [0, 1, 2],
    })
    out1, out2 = tmp_path / "t1", tmp_path / "t4"
    assert main(["profile", "--config", cfg, "--out", str(out1)]) == EXIT_OK
    assert main(["profile", "--config", cfg, "--out", str(out2),
                 "--threads", "4"]) == EXIT_OK
    assert read(out1 / "profile.csv") == read(out2 / "profile.csv")


def test_report_reproduces_estimates(tmp_path, capsys):
    cfg = torus_profile_config(tmp_path)
    out = tmp_path / "run"
    main(["profile", "--config", cfg, "--out", str(out)])
    code = main(["report", "--out", str(out)])
    assert code == EXIT_OK
    assert "reproduced" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Estimator subcommands
# ---------------------------------------------------------------------------

def test_dimension_bernoulli(tmp_path):
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "bernoulli", "n": 2},
        "grid": {"epsilons": [math.exp(-k) for k in range(1, 9)]},
        "options": {"candidates": 30000},
    })
    out = tmp_path / "dim"
    assert main(["dimension", "--config", cfg, "--out", str(out)]) == EXIT_OK
    est = json.loads((out / "estimates.json").read_text())
    assert est["box_dimension"]["slope"] == pytest.approx(math.log(2), rel=0.05)
    code = main(["report", "--out", str(out)])
    assert code == EXIT_OK


def test_entropy_bernoulli(tmp_path):
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "bernoulli", "n": 2},
        "lengths": list(range(2, 11)),
        "options": {"candidates": 30000},
    })
    out = tmp_path / "ent"
    assert main(["entropy", "--config", cfg, "--out", str(out)]) == EXIT_OK
    est = json.loads((out / "estimates.json").read_text())
    assert est["topological_entropy"]["slope"] == pytest.approx(math.log(2),
                                                                rel=0.05)


def test_torus_subcommand(tmp_path):
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "torus", "alpha": "golden"},
        "horizons": {"s_max": 100000},
    })
    out = tmp_path / "torus"
    assert main(["torus", "--config", cfg, "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "torus.json").read_text())
    assert 0.4471 <= payload["badly_approximable_constant"] <= 0.4473
    assert len(payload["closing_witnesses"]) == 5


def test_bernoulli_subcommand(tmp_path):
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "bernoulli", "n": 2},
        "options": {"delta": 0.5, "target_length": 120},
    })
    out = tmp_path / "bern"
    assert main(["bernoulli", "--config", cfg, "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "bernoulli.json").read_text())
    assert payload["status"] == "holds-on-window"
    assert len(payload["word"].split("|")[0]) == 120


def test_hyperbolic_subcommand(tmp_path):
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "hyperbolic"},
        "options": {"instances": 40},
    })
    out = tmp_path / "hyp"
    assert main(["hyperbolic", "--config", cfg, "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "checks.json").read_text())
    assert payload["conclusion_failures"] == 0
    assert payload["checked"] >= 30


def test_check_closing_both_systems(tmp_path):
    for kind, extra in (("torus", {"alpha": "golden"}), ("bernoulli", {"n": 2})):
        cfg = write_config(tmp_path, {
            "schema_version": 1,
            "system": {"kind": kind, **extra},
            "options": {"events": 150},
            "registry": {"max_period": 6},
        }, name=f"cc-{kind}.json")
        out = tmp_path / f"cc-{kind}"
        assert main(["check-closing", "--config", cfg, "--out", str(out)]) == EXIT_OK
        payload = json.loads((out / "checks.json").read_text())
        assert payload["ok"] is True
        assert "registry" in payload["note"]


def test_check_closing_accepts_registry_file(tmp_path):
    from aperiodic.bernoulli import BernoulliShift
    from aperiodic.periodic import registry_to_json
    sys_b = BernoulliShift(2)
    reg_path = tmp_path / "registry.json"
    reg_path.write_text(registry_to_json(sys_b, sys_b.periodic_registry(4)))
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "bernoulli", "n": 2},
        "options": {"events": 60},
        "registry": {"max_period": 6, "path": str(reg_path)},
    })
    out = tmp_path / "ccr"
    assert main(["check-closing", "--config", cfg, "--out", str(out)]) == EXIT_OK


def test_run_experiment_programmatic(tmp_path):
    from aperiodic.cli import run_experiment
    cfg = ExperimentConfig.from_dict({
        "schema_version": 1,
        "system": {"kind": "torus", "alpha": "golden"},
        "grid": {"eps_max": 0.5, "ratio": 0.5, "count": 8},
        "horizons": {"N": 100, "s_max": 5000},
    })
    out = tmp_path / "prog"
    assert run_experiment(cfg, "profile", str(out)) == EXIT_OK
    assert (out / "profile.csv").exists()
    with pytest.raises(ConfigError):
        run_experiment(cfg, "nope", str(out))


def test_hyperbolic_generators_payload(tmp_path):
    e = math.exp(1.5)
    cfg = write_config(tmp_path, {
        "schema_version": 1,
        "system": {"kind": "hyperbolic"},
        "options": {"instances": 10,
                    "generators": [[e, 0.0, 0.0, 1.0 / e]],
                    "word_radius": 4},
    })
    out = tmp_path / "hypg"
    assert main(["hyperbolic", "--config", cfg, "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "checks.json").read_text())
    assert payload["min_translation_length"] == pytest.approx(3.0)
    assert "orbital_growth" in payload
