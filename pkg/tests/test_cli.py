import json

import pytest

from floquet_memory.cli import config_hash, main, parse_grid, parse_size


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parsers():
    assert parse_size("3x4") == (3, 4)
    assert parse_grid("0:0.1:3") == [0.0, 0.05, 0.1]
    assert parse_grid("0.1,0.2") == [0.1, 0.2]


def test_diagnostics_csv_header_and_rows(capsys, tmp_path):
    js = tmp_path / "s.json"
    code, out, _ = run(["diagnostics", "--size", "1x1", "--p", "0,0.5", "--json", str(js)], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# floquet-memory ")
    assert lines[1].startswith("# config-hash ")
    assert any(l.startswith("# rng ") for l in lines[:5])
    assert lines[4] == "# command diagnostics"
    assert lines[5].split(",")[:4] == ["p", "n", "variant", "size"]
    assert len(lines) == 8
    doc = json.loads(js.read_text())
    assert doc["header"]["command"] == "diagnostics"


def test_outputs_independent_of_workers(capsys):
    argv = ["decode-sweep", "--sizes", "2x2", "--p", "0.01,0.05", "--trials", "20", "--seed", "7"]
    _, a, _ = run(argv + ["--workers", "1"], capsys)
    _, b, _ = run(argv + ["--workers", "2"], capsys)
    assert a == b


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"size": "1x1", "p": "0.1"}))
    code, out, _ = run(["diagnostics", "--config", str(cfg)], capsys)
    assert code == 0 and "0.1,2,floquet,1x1" in out
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["diagnostics", "--config", str(cfg)], capsys)[0] == 1


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["decode-sweep", "--sizes", "2x2"],  # seed is mandatory for sampling commands
    ["diagnostics", "--p", "0.7"],
    ["diagnostics", "--n", "1"],
    ["diagnostics", "--size", "2by2"],
])
def test_invalid_exit_code(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_budget_exit_code(capsys):
    assert run(["diagnostics", "--size", "9x9", "--p", "0.1"], capsys)[0] == 3


def test_verify(capsys):
    argv = ["verify", "--sizes", "1x1", "--p", "0.02,0.3", "--n", "2"]
    assert run(argv, capsys)[0] == 0
    assert run(argv + ["--perturb", "1e-3"], capsys)[0] == 2


def test_dump_lattice(capsys, tmp_path):
    js = tmp_path / "lat.json"
    assert run(["dump-lattice", "--size", "1x1", "--json", str(js)], capsys)[0] == 0
    doc = json.loads(js.read_text())
    assert len(doc["plaquettes"]) == 6 and set(doc["superlattices"]) == {"R", "G", "B"}


def test_config_hash_ignores_output_paths():
    assert config_hash({"a": 1, "csv": "x"}) == config_hash({"a": 1, "csv": "y", "workers": 4})
