import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from artifact import cli
from artifact.cli import ExperimentConfig, main, replica_seed, run, splitmix64, verify_manifest
from artifact.errors import SingularPivot, ValidationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, data, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return str(p)


def test_splitmix_reference_values():
    # first outputs of the reference generator seeded with 0 (state advances by the golden gamma)
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4
    assert replica_seed(5, 3) == splitmix64(6)


def test_unknown_key_named(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", str(CONFIGS / "bad_key.yaml"), "--out", str(out)])
    assert code == 2
    assert "'lamda'" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("data,fragment", [
    ({"pipeline": "product", "model": {"kind": "scalar", "phse": 1}}, "'phse'"),
    ({"pipeline": "nope", "model": {"kind": "scalar"}}, "pipeline"),
    ({"pipeline": "product", "model": {"kind": "scalar"}, "lambda": -1, "n": 5}, "lambda"),
    ({"pipeline": "product", "model": {"kind": "scalar"}, "lambda": 0.1, "n": 0}, "n"),
])
def test_validation_errors(data, fragment):
    with pytest.raises(ValidationError, match=fragment):
        ExperimentConfig.from_mapping(data)


def test_describe_goe(capsys):
    assert main(["describe", str(CONFIGS / "goe_describe.yaml")]) == 0
    text = capsys.readouterr().out
    assert "d_h=1  d_e=1" in text
    assert "hyperbolic  -0.500000" in text
    assert "q (sine-basis closed form): -0.222222222222" in text


def test_describe_parabolic(tmp_path, capsys):
    p = write(tmp_path, {"pipeline": "strip-spectrum", "model": {"kind": "strip", "d": 1, "E": 2.0}, "n": 10,
                           "sigma": 1.0})
    assert main(["describe", p]) == 0
    assert "parabolic" in capsys.readouterr().out


def test_describe_block(capsys):
    assert main(["describe", str(CONFIGS / "coefficients.yaml")]) == 0
    text = capsys.readouterr().out
    assert "d0=1 d1=2 d2=1" in text and "spectral radius Gamma2: 0.4" in text


def test_describe_band_edge(capsys):
    assert main(["describe", str(CONFIGS / "band_edge.yaml")]) == 0
    assert "alpha: 2/7" in capsys.readouterr().out


def product_cfg(replicas=130):
    return {"pipeline": "product", "model": {"kind": "scalar"}, "lambda": 0.1, "n": 100,
            "replicas": replicas, "seed": 11}


def test_output_independent_of_workers(tmp_path):
    a = run(ExperimentConfig.from_mapping({**product_cfg(), "workers": 1}), tmp_path / "a")
    b = run(ExperimentConfig.from_mapping({**product_cfg(), "workers": 2}), tmp_path / "b")
    assert a["checksums"] == b["checksums"]
    assert (tmp_path / "a" / "final.csv").read_bytes() == (tmp_path / "b" / "final.csv").read_bytes()


def test_manifest_round_trip(tmp_path):
    man = run(ExperimentConfig.from_mapping(product_cfg(10)), tmp_path)
    assert verify_manifest(tmp_path)
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["seeds"]["3"] == replica_seed(11, 3)
    assert set(man["checksums"]) == {"final.csv", "summary.txt"}
    (tmp_path / "final.csv").write_text("tampered\n")
    assert not verify_manifest(tmp_path)


def test_product_csv_columns(tmp_path):
    run(ExperimentConfig.from_mapping(product_cfg(3)), tmp_path)
    lines = (tmp_path / "final.csv").read_text().splitlines()
    assert lines[0] == "replica,seed,x0_re,x0_im,log_abs,arg"
    row = [float(v) for v in lines[1].split(",")]
    assert row[4] == pytest.approx(np.log(abs(row[2] + 1j * row[3])))
    assert "log_abs_mean" in (tmp_path / "summary.txt").read_text()


def test_partial_failure_exit_code(tmp_path, monkeypatch, capsys):
    real = cli._replica_work

    def flaky(cfg, objs, replica, seed):
        if replica == 1:
            raise SingularPivot("injected")
        return real(cfg, objs, replica, seed)

    monkeypatch.setattr(cli, "_replica_work", flaky)
    data = yaml.safe_load((CONFIGS / "band_edge.yaml").read_text())
    data["replicas"] = 3
    p = write(tmp_path, data)
    assert main(["run", p, "--out", str(tmp_path / "out")]) == 3
    man = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert list(man["failed_replicas"]) == ["1"]
    assert len((tmp_path / "out" / "final.csv").read_text().splitlines()) == 3


def test_seed_flag_overrides(tmp_path):
    p = write(tmp_path, product_cfg(2))
    assert main(["run", p, "--seed", "99", "--out", str(tmp_path / "o")]) == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["seeds"]["0"] == replica_seed(99, 0)


@pytest.mark.parametrize("name", ["coefficients.yaml", "flag.yaml", "sde.yaml", "strip_spectrum.yaml"])
def test_shipped_configs_run(name, tmp_path):
    data = yaml.safe_load((CONFIGS / name).read_text())
    data["replicas"] = min(data.get("replicas", 1), 2)
    assert main(["run", write(tmp_path, data), "--out", str(tmp_path / "o")]) == 0
    assert verify_manifest(tmp_path / "o")
