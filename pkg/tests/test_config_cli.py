import json
import os
from pathlib import Path

import pytest

from ids_lab import config as cfgmod
from ids_lab.cli import main
from ids_lab.errors import ConfigError
from ids_lab.output import read_csv
from ids_lab.parallel import derive_seeds, pmap, resolve_workers

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = {
    "model": {
        "cell": {"dimension": 1, "vertices": 1, "cross_bonds": [[0, [1], 0]]},
        "potential": {"coupling": {"kind": "uniform", "a": 0.0, "b": 1.0}, "single_site": [[[0], 0, 1.0]]},
    },
    "experiments": [
        {"name": "ex", "estimator": "ids", "lambdas": {"start": -0.5, "stop": 5.5, "num": 13}, "radii": [2, 4]},
        {"name": "br", "estimator": "bracket", "lambdas": [0.0, 1.0, 2.0, 3.0, 4.0, 5.0], "samples": 20},
        {"name": "sa", "estimator": "selfavg", "lambda": 2.0, "radii": [2, 4], "samples": 10},
    ],
    "run": {"seed": 3},
}


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.name)
def test_bundled_configs_validate(path):
    cfg = cfgmod.load(path)
    again = cfgmod.loads(cfg.dumps())
    assert again.digest() == cfg.digest()
    assert main(["validate", str(path)]) == 0


def test_roundtrip_preserves_fields():
    cfg = cfgmod.parse_config(SMALL)
    d = cfg.to_dict()
    assert d["experiments"][2]["lambda"] == 2.0
    assert cfgmod.parse_config(d).to_dict() == d


def test_grid_forms():
    assert cfgmod.parse_grid([0, 1, 2], "g") == (0.0, 1.0, 2.0)
    assert cfgmod.parse_grid({"start": 0, "stop": 1, "num": 3}, "g") == (0.0, 0.5, 1.0)
    with pytest.raises(ConfigError) as err:
        cfgmod.parse_grid([0, 2, 1], "experiments[0].lambdas")
    assert err.value.field == "experiments[0].lambdas"


@pytest.mark.parametrize("mutate, field", [
    (lambda c: c["experiments"][0].update(lambdas=[1.0, 0.0]), "experiments[0].lambdas"),
    (lambda c: c["experiments"][0].update(estimator="magic"), "experiments[0].estimator"),
    (lambda c: c["experiments"][0].update(colour="red"), "experiments[0].colour"),
    (lambda c: c["experiments"][2].update(samples=3), "experiments[2].samples"),
    (lambda c: c["model"]["potential"]["coupling"].update(kind="cauchy"), "model.potential.coupling.kind"),
    (lambda c: c["model"]["cell"].pop("dimension"), "model.cell.dimension"),
    (lambda c: c.update(extra=1), "extra"),
])
def test_invalid_configs_name_the_field(tmp_path, mutate, field, capsys):
    obj = json.loads(json.dumps(SMALL))
    mutate(obj)
    with pytest.raises(ConfigError) as err:
        cfgmod.parse_config(obj)
    assert err.value.field == field
    assert main(["validate", write(tmp_path, obj)]) == 2
    assert field in capsys.readouterr().err


def test_json_syntax_error_reports_line(tmp_path):
    path = write(tmp_path, '{\n  "model": {,\n}')
    with pytest.raises(ConfigError) as err:
        cfgmod.load(path)
    assert err.value.line == 2
    assert main(["run", path]) == 2


def test_missing_file_exit_code(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_run_writes_csvs_and_manifest(tmp_path):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, SMALL), "--out", str(out), "--no-plots"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    digest = cfgmod.parse_config(SMALL).digest()
    assert manifest["config_sha256"] == digest and manifest["seed"] == 3
    for name in ("ex.csv", "ex_convergence.csv", "br.csv", "sa.csv"):
        comment, header, rows = read_csv(out / name)
        assert comment == f"# config_sha256={digest}"
    _, header, rows = read_csv(out / "br.csv")
    assert header == ["lambda", "lower", "lower_se", "upper", "upper_se"]
    assert all(r[1] <= r[3] for r in rows)
    _, header, rows = read_csv(out / "ex.csv")
    assert header == ["j", "lambda", "N_value"] and len(rows) == 26


def test_plots_are_written(tmp_path):
    out = tmp_path / "out"
    assert main(["bracket", write(tmp_path, SMALL), "--out", str(out)]) == 0
    assert (out / "br.svg").read_text().lstrip().startswith("<?xml")


def test_single_estimator_and_seed_override(tmp_path):
    path = write(tmp_path, SMALL)
    a, b, c = (tmp_path / x for x in "abc")
    assert main(["selfavg", path, "--out", str(a), "--no-plots"]) == 0
    assert sorted(os.listdir(a)) == ["manifest.json", "sa.csv"]
    assert main(["selfavg", path, "--out", str(b), "--no-plots"]) == 0
    assert main(["selfavg", path, "--out", str(c), "--no-plots", "--seed", "4"]) == 0
    assert (a / "sa.csv").read_bytes() == (b / "sa.csv").read_bytes()
    assert (a / "sa.csv").read_bytes() != (c / "sa.csv").read_bytes()


def test_default_experiment_when_absent(tmp_path):
    out = tmp_path / "o"
    assert main(["wegner", write(tmp_path, SMALL), "--out", str(out), "--no-plots"]) == 0
    fit = json.loads((out / "wegner_fit.json").read_text())
    assert {"alpha", "beta", "alpha_ci", "beta_ci", "r2", "holder_continuity"} <= set(fit)


def test_runtime_failures_exit_3(tmp_path, capsys):
    path = write(tmp_path, SMALL)
    assert main(["oracle", path, "--out", str(tmp_path / "o"), "--no-plots"]) == 3
    assert "NotPeriodic" in capsys.readouterr().err
    gap = json.loads(json.dumps(SMALL))
    gap["experiments"] = [{"name": "w", "estimator": "wegner", "energies": [-10.0],
                           "epsilons": [0.1, 0.2], "sides": [4, 8], "samples": 5}]
    assert main(["run", write(tmp_path, gap, "g.json"), "--out", str(tmp_path / "g"), "--no-plots"]) == 3
    assert "InsufficientData" in capsys.readouterr().err


def test_worker_count_does_not_change_output(tmp_path):
    path = write(tmp_path, SMALL)
    outs = []
    for w in ("1", "3"):
        out = tmp_path / f"w{w}"
        assert main(["run", path, "--out", str(out), "--no-plots", "--workers", w]) == 0
        outs.append(out)
    for name in ("ex.csv", "br.csv", "sa.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_resolve_workers(monkeypatch):
    monkeypatch.delenv("IDS_LAB_WORKERS", raising=False)
    assert resolve_workers(None, None) == 1
    assert resolve_workers(None, 3) == 3
    monkeypatch.setenv("IDS_LAB_WORKERS", "5")
    assert resolve_workers(None, 3) == 5
    assert resolve_workers(2, 3) == 2


def test_derive_seeds_are_stable_and_distinct():
    a = derive_seeds(1, "x", 50)
    assert a == derive_seeds(1, "x", 50)
    assert len(set(a)) == 50
    assert a[:10] == derive_seeds(1, "x", 10)
    assert a != derive_seeds(1, "y", 50) and a != derive_seeds(2, "x", 50)


def _square(x):
    return x * x


def test_pmap_preserves_order():
    assert pmap(_square, range(20), 1) == pmap(_square, range(20), 4) == [x * x for x in range(20)]
