import json
import textwrap

import pytest
import yaml

from wastefree import cli

NESTED = textwrap.dedent(
    """\
    problem:
      name: nested_uniform
      r: 0.5
      p: 0.5
      T: 5
    sampler:
      name: wastefree
      M: 10
      P: 100
    seed: 1
    """
)


def write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_defaults():
    cfg = cli.parse_config(NESTED)
    assert cfg.data["alpha"] == 0.5
    assert cfg.data["variance_estimator"] == "geyer"
    assert cfg.sampler["N"] == 1000
    assert cfg.data["output"]["format"] == "json"


def test_config_round_trip_idempotent():
    cfg = cli.parse_config(NESTED)
    text = cli.dump_config(cfg)
    again = cli.parse_config(text)
    assert again.data == cfg.data
    assert cli.dump_config(again) == text
    assert again.config_hash() == cfg.config_hash()


def test_hash_ignores_seed_and_output():
    cfg = cli.parse_config(NESTED)
    assert cfg.with_seed(7).config_hash() == cfg.config_hash()
    other = cli.parse_config(NESTED.replace("P: 100", "P: 101"))
    assert other.config_hash() != cfg.config_hash()


@pytest.mark.parametrize(
    "old,new,field,line",
    [
        ("r: 0.5", "r: 1.5", "problem.r", 3),
        ("P: 100", "P: 1", "sampler.P", 9),
        ("name: wastefree", "name: mcmc", "sampler.name", 7),
        ("seed: 1", "seed: -1", "seed", 10),
        ("T: 5", "T: 5\n  extra: 1", "problem.extra", 6),
    ],
)
def test_config_errors_name_field_and_line(old, new, field, line):
    with pytest.raises(cli.ConfigError) as info:
        cli.parse_config(NESTED.replace(old, new))
    assert info.value.field == field
    assert info.value.line == line


def test_wastefree_N_consistency():
    with pytest.raises(cli.ConfigError, match="M\\*P"):
        cli.parse_config(NESTED.replace("P: 100", "P: 100\n  N: 999"))
    assert cli.parse_config(NESTED.replace("P: 100", "P: 100\n  N: 1000")).sampler["N"] == 1000


def test_invalid_yaml():
    with pytest.raises(cli.ConfigError, match="YAML"):
        cli.parse_config("problem: [unclosed")


def test_run_experiment_deterministic():
    cfg = cli.parse_config(NESTED)
    a, b = cli.run_experiment(cfg), cli.run_experiment(cfg)
    assert a == b
    assert a["final"]["budget"] == 5 * 10 * 99
    assert a["final"]["wall_ms"] is None
    assert [it["t"] for it in a["iterations"]] == list(range(6))


def test_standard_budget():
    text = NESTED.replace("name: wastefree\n  M: 10\n  P: 100", "name: standard\n  N: 1000\n  k: 2")
    rec = cli.run_experiment(cli.parse_config(text))
    assert rec["final"]["budget"] == 5 * 1000 * 2


def test_latin_run():
    text = textwrap.dedent(
        """\
        problem: {name: latin, d: 4}
        sampler: {name: wastefree, M: 20, P: 500}
        seed: 3
        """
    )
    import math

    rec = cli.run_experiment(cli.parse_config(text))
    est = math.exp(rec["final"]["log_L"] + 4 * math.lgamma(5))
    assert est == pytest.approx(576, rel=0.2)


def test_orthant_and_logistic_configs(tmp_path):
    (tmp_path / "sigma.csv").write_text("1,0.5\n0.5,1\n")
    orth = write(
        tmp_path,
        "problem: {name: orthant, a: [1, 1], sigma: {csv: sigma.csv}}\n"
        "sampler: {name: wastefree_growing, M: 20, P: 10, ess_threshold: 0.5}\n"
        "variance_estimator: tukey_hanning\n",
    )
    rec = cli.run_experiment(cli.load_config(orth))
    assert rec["final"]["log_L"] < 0
    ar = cli.parse_config("problem: {name: orthant, a: 0.0, d: 4, sigma: {ar1: 0.3}}\nsampler: {name: wastefree_growing, M: 5, P: 4}\n")
    assert ar.problem["a"] == [0.0] * 4
    logit = cli.parse_config(
        "problem: {name: logistic, synthetic: {n: 20, predictors: 1}}\n"
        "sampler: {name: wastefree_adaptive, M: 20, kappa: 4, initial_P: 8, max_P: 64}\n"
    )
    rec = cli.run_experiment(logit)
    assert rec["iterations"][-1]["exponent"] == 1.0
    with pytest.raises(cli.ConfigError):
        cli.build_model(cli.parse_config("problem: {name: orthant, a: [0, 0], sigma: {csv: missing.csv}}\nsampler: {name: wastefree_growing, M: 5, P: 4}\n"))


def test_replicate_seeds_and_summary():
    cfg = cli.parse_config(NESTED)
    ens = cli.replicate(cfg, 3)
    assert [run["seed"] for run in ens["runs"]] == [1, 2, 3]
    single = cli.replicate(cfg, 1)
    assert single["summary"]["log_L"]["mean"] == single["runs"][0]["final"]["log_L"]
    assert single["summary"]["log_L"]["variance"] == 0.0


def test_summary_of_constant_outputs():
    s = cli._summarize([2.0] * 100)
    assert s["variance"] == 0.0 and s["mean"] == 2.0


def test_workers_do_not_change_output(tmp_path):
    cfg = cli.parse_config(NESTED)
    one = cli.to_json(cli.replicate(cfg, 4, workers=1))
    two = cli.to_json(cli.replicate(cfg, 4, workers=2))
    assert one == two


def test_emit_round_trip_and_csv(tmp_path):
    ens = cli.replicate(cli.parse_config(NESTED), 2)
    paths = cli.emit(ens, tmp_path, "ens", "both")
    parsed = json.loads(paths[0].read_text())
    assert parsed == ens
    assert parsed["runs"][0]["final"]["log_L"] == ens["runs"][0]["final"]["log_L"]
    raw = paths[1].read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "run,seed,estimand,value,var_estimate,log_L,budget"
    assert len(lines) == 3
    assert float(lines[1].split(",")[5]) == ens["runs"][0]["final"]["log_L"]
    again = cli.emit(ens, tmp_path / "b", "ens", "both")
    assert again[0].read_bytes() == paths[0].read_bytes()


def test_emit_empty():
    assert json.loads(cli.to_json([])) == []
    assert cli.to_csv([]) == "run,seed,estimand,value,var_estimate,log_L,budget\n"


def test_main_exit_codes(tmp_path, capsys, monkeypatch):
    good = write(tmp_path, NESTED)
    bad = write(tmp_path, NESTED.replace("r: 0.5", "r: -1"), "bad.yaml")
    assert cli.main(["validate", str(good)]) == 0
    assert yaml.safe_load(capsys.readouterr().out)["sampler"]["M"] == 10
    assert cli.main(["validate", str(bad)]) == 2
    assert "problem.r (line 3)" in capsys.readouterr().err
    assert cli.main(["run", str(good), "--seed", "4", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "run_seed4.json").exists()
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert cli.main(["replicate", str(good), "--runs", "2"]) == 0
    assert list((tmp_path / "env").glob("ensemble_*.json"))


def test_main_runtime_and_partial_failures(tmp_path, monkeypatch):
    good = write(tmp_path, NESTED)
    from wastefree.core import AllWeightsZero

    real = cli._run_trace

    def flaky(config):
        if config.seed % 2 == 0:
            raise AllWeightsZero("all particles died")
        return real(config)

    monkeypatch.setattr(cli, "_run_trace", flaky)
    assert cli.main(["replicate", str(good), "--runs", "3", "--out", str(tmp_path / "p")]) == 4
    ens = json.loads(next((tmp_path / "p").glob("*.json")).read_text())
    assert ens["failed"] == 1 and "error" in ens["runs"][1]
    assert cli.main(["run", str(good), "--seed", "2", "--out", str(tmp_path / "q")]) == 3
