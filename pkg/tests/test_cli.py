import csv
import json
from pathlib import Path

import numpy as np
import pytest

from dirmh.cli import main
from dirmh.config import load_config, parse_config
from dirmh.diagnostics import diagnose
from dirmh.exceptions import ConfigError, ExperimentFailed, IoError
from dirmh.experiment import run_experiment
from dirmh.io import emit_chain_csv, read_chain_csv
from dirmh.kernels import Flavor
from dirmh.targets import simulate_glm_data, write_glm_csv

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = {
    "target": {"kind": "banana", "B": 0.03, "d": 2},
    "kernels": [{"label": "dmh", "flavor": "DMH", "h": 0.1, "s": 0.5, "t": 1.0}],
    "seeds": [42],
    "n_steps": 2000,
}


def doc(**changes):
    d = json.loads(json.dumps(MINIMAL))
    d.update(changes)
    return d


def parse(d, base_dir=None):
    return parse_config(json.dumps(d), base_dir)


def error_of(d, base_dir=None) -> ConfigError:
    with pytest.raises(ConfigError) as info:
        parse(d, base_dir)
    return info.value


# ---------------------------------------------------------------- parse_config

def test_minimal_document_with_defaults():
    cfg = parse(MINIMAL)
    assert cfg.burn_in == 0 and cfg.thin == 1
    assert cfg.adaptation.a == 0.45 and cfg.adaptation.batch_size == 100 and cfg.adaptation.M == 2.0
    assert cfg.kernels[0].config.flavor is Flavor.DMH
    assert cfg.kernels[0].config.shape.s == 0.5
    assert cfg.seeds == (42,) and cfg.target.dim == 2


def test_missing_seeds():
    d = doc()
    del d["seeds"]
    err = error_of(d)
    assert err.path == "seeds"


def test_zero_s():
    d = doc(kernels=[{"label": "dmh", "flavor": "DMH", "h": 0.1, "s": 0, "t": 1.0}])
    assert str(error_of(d)) == "kernels[0].s must be > 0"


@pytest.mark.parametrize("where", ["top", "target", "kernel", "adaptation"])
def test_unknown_keys_rejected(where):
    d = doc(adaptation={})
    if where == "top":
        d["extra"] = 1
    elif where == "target":
        d["target"]["colour"] = "red"
    elif where == "kernel":
        d["kernels"][0]["sigma"] = 1
    else:
        d["adaptation"]["rate"] = 0.3
    assert "not a recognised field" in str(error_of(d))


@pytest.mark.parametrize("kernel,path", [
    ({"label": "m", "flavor": "MALA", "h": 0.2, "t": 0.5}, "kernels[0].t"),
    ({"label": "r", "flavor": "RWMH", "h": 0.2, "t": 0.5}, "kernels[0].h"),
    ({"label": "r", "flavor": "RWMH", "s": 2.0, "t": 0.5}, "kernels[0].s"),
    ({"label": "d", "flavor": "DMH", "h": 0.2}, "kernels[0].t"),
    ({"label": "x", "flavor": "HMC", "t": 1.0}, "kernels[0].flavor"),
    ({"label": "a/b", "flavor": "RWMH", "t": 1.0}, "kernels[0].label"),
])
def test_kernel_errors(kernel, path):
    assert error_of(doc(kernels=[kernel])).path == path


def test_mala_preset_defaults():
    cfg = parse(doc(kernels=[{"label": "m", "flavor": "mala", "h": 0.3}]))
    assert cfg.kernels[0].config.effective_shape.t == pytest.approx(0.09)


def test_structural_errors():
    assert error_of(doc(seeds=[1, 1])).path == "seeds"
    assert error_of(doc(seeds=[-1])).path == "seeds[0]"
    assert error_of(doc(burn_in=2000)).path == "burn_in"
    assert error_of(doc(x0=[0.0])).path == "x0"
    assert error_of(doc(kernels=[])).path == "kernels"
    assert error_of(doc(adaptation={"a": 1.5})).path == "adaptation.a"
    assert error_of(doc(adaptation={"M": 1, "log_sigma": 2})).path == "adaptation.log_sigma"
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_gaussian_target_errors():
    assert error_of(doc(target={"kind": "gaussian", "mean": [0, 0], "cov": [[1, 2], [2, 1]]})).path == "target.cov"
    assert error_of(doc(target={"kind": "cauchy"})).path == "target.kind"


def test_glm_csv_must_exist(tmp_path):
    d = doc(target={"kind": "glm", "family": "Normal", "csv": "missing.csv"})
    assert error_of(d, tmp_path).path == "target.csv"


def test_glm_csv_relative_to_config(tmp_path):
    data = simulate_glm_data(np.random.default_rng(0), "Poisson", n=20, p=2)
    write_glm_csv(data, tmp_path / "d.csv")
    (tmp_path / "c.json").write_text(json.dumps(doc(target={"kind": "glm", "family": "Poisson", "csv": "d.csv"})))
    cfg = load_config(tmp_path / "c.json")
    assert cfg.target.dim == 3
    assert np.array_equal(cfg.target.glm_data().y, data.y)


def test_shipped_configs_parse():
    paths = sorted(CONFIGS.glob("*.json"))
    assert paths
    for p in paths:
        load_config(p)


# ---------------------------------------------------------------- chain CSV

def test_emit_single_state(tmp_path):
    path = tmp_path / "c.csv"
    emit_chain_csv(np.array([[0.5]]), path)
    assert path.read_text() == "x1\n0.5\n"


def test_emit_roundtrip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    states = np.concatenate([rng.standard_normal((50, 3)) * 10.0 ** rng.integers(-300, 300, (50, 3)),
                             [[0.1, 1 / 3, -2.0 ** -1074]]])
    path = tmp_path / "c.csv"
    emit_chain_csv(states, path)
    assert np.array_equal(read_chain_csv(path), states)


def test_emit_line_count(tmp_path):
    path = tmp_path / "c.csv"
    emit_chain_csv(np.zeros((100_000, 5)), path)
    text = path.read_text()
    assert text.count("\n") == 100_001
    assert text.startswith("x1,x2,x3,x4,x5\n")


# ---------------------------------------------------------------- run_experiment

def two_seed_config(tmp_path, **extra):
    d = doc(seeds=[1, 2], n_steps=500, output_dir=str(tmp_path / "out"), **extra)
    return parse(d)


def test_two_seeds_two_chains(tmp_path):
    cfg = two_seed_config(tmp_path)
    rows = run_experiment(cfg, plots=False)
    out = tmp_path / "out"
    assert len(rows) == 2
    for seed in (1, 2):
        chain = read_chain_csv(out / "dmh" / f"seed-{seed}" / "chain.csv")
        assert chain.shape == (500, 2)
    with open(out / "summary.csv") as fh:
        summary = list(csv.DictReader(fh))
    assert [r["seed"] for r in summary] == ["1", "2"]
    assert list(summary[0]) == ["label", "seed", "status", "acceptance", "mess", "msjd",
                                "ess_1", "ess_2", "iact_1", "iact_2"]


def test_experiment_is_byte_deterministic(tmp_path):
    cfg = parse(doc(seeds=[3], n_steps=400, kernels=[
        {"label": "admh", "flavor": "DMH", "h": 0.1, "s": 0.5, "t": 1.0, "adaptive": True},
        {"label": "rw", "flavor": "RWMH", "t": 1.0},
    ], adaptation={"batch_size": 50}))
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert {f.name for f in files} >= {"chain.csv", "report.json", "trace.svg", "acf.svg", "adaptation.csv",
                                       "sigma.svg", "summary.csv"}
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_parallel_matches_serial(tmp_path, monkeypatch):
    cfg = two_seed_config(tmp_path)
    run_experiment(cfg, tmp_path / "serial", plots=False)
    monkeypatch.setenv("DIRMH_THREADS", "2")
    run_experiment(cfg, tmp_path / "par", plots=False)
    for f in ("summary.csv", "dmh/seed-1/chain.csv", "dmh/seed-2/report.json"):
        assert (tmp_path / "serial" / f).read_bytes() == (tmp_path / "par" / f).read_bytes()


def test_report_recomputes_from_chain_csv(tmp_path):
    cfg = two_seed_config(tmp_path)
    run_experiment(cfg, plots=False)
    where = tmp_path / "out" / "dmh" / "seed-1"
    stored = json.loads((where / "report.json").read_text())
    again = diagnose(read_chain_csv(where / "chain.csv"), stored["acceptance_rate"]).to_dict()
    assert again == stored


def test_failed_run_does_not_abort_others(tmp_path, monkeypatch):
    import dirmh.experiment as experiment

    real = experiment.run_chain

    def flaky(seed, *args, **kwargs):
        if seed == 2:
            raise RuntimeError("boom")
        return real(seed, *args, **kwargs)

    monkeypatch.setattr(experiment, "run_chain", flaky)
    cfg = parse(doc(seeds=[1, 2], n_steps=300, kernels=[
        {"label": "ok", "flavor": "RWMH", "t": 1.0},
        {"label": "bad", "flavor": "DMH", "h": 0.1, "s": 1.0, "t": 1.0},
    ]))
    with pytest.raises(ExperimentFailed) as info:
        run_experiment(cfg, tmp_path / "o", plots=False)
    assert sorted(info.value.failures)[0][:2] == ("bad", 2) and len(info.value.failures) == 2
    with open(tmp_path / "o" / "summary.csv") as fh:
        status = {(r["label"], r["seed"]): r["status"] for r in csv.DictReader(fh)}
    assert status == {("ok", "1"): "ok", ("ok", "2"): "error", ("bad", "1"): "ok", ("bad", "2"): "error"}
    assert (tmp_path / "o" / "bad" / "seed-1" / "chain.csv").is_file()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(IoError):
        run_experiment(parse(MINIMAL), blocker / "sub", plots=False)


# ---------------------------------------------------------------- CLI

def write_config(tmp_path, d) -> Path:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(d))
    return path


def test_cli_run_ok(tmp_path, capsys):
    path = write_config(tmp_path, doc(n_steps=300))
    assert main(["run", str(path), "--out", str(tmp_path / "o"), "--no-plots"]) == 0
    assert (tmp_path / "o" / "dmh" / "seed-42" / "chain.csv").is_file()
    assert not (tmp_path / "o" / "dmh" / "seed-42" / "trace.svg").exists()


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = write_config(tmp_path, doc(seeds=[]))
    assert main(["run", str(path)]) == 1
    assert "seeds" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "nope.json")]) == 1


def test_cli_runtime_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    path = write_config(tmp_path, doc(n_steps=300))
    assert main(["run", str(path), "--out", str(blocker / "o")]) == 2
    assert main(["diagnose", str(tmp_path / "missing.csv")]) == 2


def test_cli_diagnose(tmp_path, capsys):
    states = np.random.default_rng(0).standard_normal((1000, 2))
    emit_chain_csv(states, tmp_path / "c.csv")
    assert main(["diagnose", str(tmp_path / "c.csv"), "--batch-size", "20"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert list(report) == ["acceptance_rate", "iact", "ess", "mess", "msjd", "n"]
    assert report["n"] == 1000 and report["acceptance_rate"] == 1.0
    assert report["ess"] == diagnose(states, 1.0, 20).ess


def test_cli_plot(tmp_path):
    emit_chain_csv(np.random.default_rng(0).standard_normal((300, 2)), tmp_path / "c.csv")
    assert main(["plot", str(tmp_path / "c.csv"), "--out", str(tmp_path / "p")]) == 0
    for name in ("trace.svg", "acf.svg"):
        text = (tmp_path / "p" / name).read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text
