import json

import pytest
from click.testing import CliRunner

from plab.cli import main, parse_config, registry_path
from plab.errors import ParameterError

SMALL = {"box": "small_1d", "space": "lebesgue2", "weight": "smoothness1", "battery": "quick",
         "spec": {"window": [0, 6]}}


def _run(tmp_path, command, cfg, *extra):
    path = tmp_path / f"{command}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / f"out_{command}"
    res = CliRunner().invoke(main, [command, "--config", str(path), "--out", str(out), *extra])
    return res, out


def test_norm_outputs(tmp_path):
    res, out = _run(tmp_path, "norm", dict(SMALL, command="norm"))
    assert res.exit_code == 0, res.output
    lines = (out / "results.tsv").read_text().splitlines()
    assert lines[0].split("\t") == ["function_id", "scale", "characterization", "value"]
    assert len(lines) == 4
    summ = json.loads((out / "summary.json").read_text())
    assert summ["passed"] and "timestamp" not in summ
    # runs.jsonl is append-only
    _run(tmp_path, "norm", dict(SMALL, command="norm"))
    assert len((out / "runs.jsonl").read_text().splitlines()) == 2


def test_equiv_writes_plotdata(tmp_path):
    cfg = dict(SMALL, characterizations=["default", "alt_system"])
    res, out = _run(tmp_path, "equiv", cfg, "--seed", "2")
    assert res.exit_code == 0, res.output
    assert (out / "plotdata" / "ratio_vs_function.csv").is_file()
    summ = json.loads((out / "summary.json").read_text())["summary"]
    assert summ["spreads"]["default"] == 1.0


def test_axioms_and_wavelet(tmp_path):
    res, out = _run(tmp_path, "axioms", {"spaces": ["lebesgue2", "morrey"], "box": "small_1d"})
    assert res.exit_code == 0, res.output
    assert len((out / "results.tsv").read_text().splitlines()) == 1 + 2 * 6
    res, out = _run(tmp_path, "wavelet", {"box": "small_1d", "presets": ["db2", "bior2.2"], "levels": [1, 3]})
    assert res.exit_code == 0, res.output


def test_decompose(tmp_path):
    res, out = _run(tmp_path, "decompose", dict(SMALL))
    assert res.exit_code == 0, res.output
    assert "ok" in (out / "results.tsv").read_text()


def test_witness_and_report(tmp_path):
    cfg = {"target": "proper_subspace", "box": {"dim": 1, "half_width": 2.0, "samples": 1024},
           "space": {"kind": "lebesgue", "p": 1.0}, "weight": "constant",
           "spec": {"q": 2.0, "tau": 1.0, "a": 10.0, "window": [0, 6]}, "params": {"J": [2, 4]}}
    res, out = _run(tmp_path, "witness", cfg)
    assert res.exit_code == 0, res.output
    assert (out / "plotdata" / "n_norm_vs_J.csv").is_file()
    rep_cfg = {"inputs": [str(out), str(out / "runs.jsonl")], "format": "plotdata"}
    res, rout = _run(tmp_path, "report", rep_cfg)
    assert res.exit_code == 0, res.output
    rows = (rout / "results.tsv").read_text().splitlines()
    assert len(rows) == 1 + 4
    Js = [int(r.split("\t")[0]) for r in rows[1:]]
    assert Js == sorted(Js)


def test_report_rejects_mixed_inputs(tmp_path):
    _, a = _run(tmp_path, "norm", dict(SMALL, command="norm"))
    _, b = _run(tmp_path, "wavelet", {"box": "small_1d", "presets": ["db2"], "levels": [1]})
    res, _ = _run(tmp_path, "report", {"inputs": [str(a), str(b)]})
    assert res.exit_code != 0 and "AggregationError" in res.output


def test_validation_errors(tmp_path):
    res, _ = _run(tmp_path, "norm", dict(SMALL, bogus=1))
    assert res.exit_code != 0 and "unknown config keys" in res.output
    res, _ = _run(tmp_path, "norm", dict(SMALL, spec={"window": [0, 9]}))
    assert res.exit_code != 0 and "ResolutionError" in res.output
    res, _ = _run(tmp_path, "norm", dict(SMALL, spec={"window": [0, 6], "a": 0.5}))
    assert res.exit_code != 0 and "HypothesisError" in res.output
    res, _ = _run(tmp_path, "norm", dict(SMALL, space="nope"))
    assert res.exit_code != 0 and "unknown space preset" in res.output
    res, _ = _run(tmp_path, "witness", {"target": "nope"})
    assert res.exit_code != 0 and "witness target" in res.output
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    res = CliRunner().invoke(main, ["norm", "--config", str(bad)])
    assert res.exit_code != 0 and "not valid JSON" in res.output


def test_config_hash_stable():
    a = parse_config("norm", dict(SMALL), seed=1)
    b = parse_config("norm", dict(SMALL), seed=1)
    c = parse_config("norm", dict(SMALL), seed=2)
    assert a.hash() == b.hash() != c.hash()


def test_data_dir_override(tmp_path, monkeypatch):
    reg = json.loads(registry_path().read_text())
    reg["spaces"]["custom"] = {"kind": "lebesgue", "p": 3.0}
    (tmp_path / "presets.json").write_text(json.dumps(reg))
    monkeypatch.setenv("PLAB_DATA_DIR", str(tmp_path))
    job = parse_config("norm", dict(SMALL, space="custom"))
    assert job.resolved["space"]["p"] == 3.0
    monkeypatch.setenv("PLAB_DATA_DIR", str(tmp_path / "missing"))
    with pytest.raises(ParameterError):
        parse_config("norm", dict(SMALL))
