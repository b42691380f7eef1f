import json
import math
import subprocess
import sys

import pytest

from dirichlet_lab import cli


def _body(path):
    return "".join(line for line in path.read_text().splitlines(True) if not line.startswith("#"))


def _rows(path):
    lines = _body(path).splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, line.split(","))) for line in lines[1:]]


def _run(tmp_path, command, cfg, *extra):
    conf = tmp_path / f"{command}.json"
    conf.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    code = cli.main([command, "--config", str(conf), "--out", str(out), *extra])
    return code, out


def test_capacity_circle(tmp_path):
    code, out = _run(tmp_path, "capacity", {"K": "circle", "panel_count": 64})
    assert code == 0
    row = _rows(out / "capacity.csv")[0]
    assert abs(float(row["energy"]) - 1) < 1e-6
    assert float(row["energy_fourier"]) == 1
    assert abs(float(row["capacity"]) - math.exp(-1)) < 1e-6


def test_header_echoes_config(tmp_path):
    cfg = {"K": "circle", "panel_count": 64}
    _, out = _run(tmp_path, "capacity", cfg)
    head = [line for line in (out / "capacity.csv").read_text().splitlines() if line.startswith("#")]
    full = cli.validate("capacity", cfg)
    assert f"# config_sha256={cli.config_hash(full)}" in head
    assert any(line.startswith("# numpy=") for line in head)
    assert head[0].startswith("# dirlab 0.1.0")


def test_matrix_identity(tmp_path):
    code, out = _run(tmp_path, "matrix", {"symbol": {"kind": "identity"}, "N": 8})
    assert code == 0
    rows = _rows(out / "spectrum.csv")
    assert len(rows) == 8 and all(abs(float(r["sigma"]) - 1) < 1e-12 for r in rows)


def test_schatten_verdicts(tmp_path):
    cfg = {"symbol": {"kind": "separation", "p1": 2}, "p": [1.6, 2, 2.4], "n_max": 20}
    code, out = _run(tmp_path, "schatten", cfg)
    assert code == 0
    verdicts = [r["verdict"] for r in _rows(out / "verdicts.csv")]
    assert verdicts == ["diverging", "diverging", "converging"]


def test_byte_reproducible(tmp_path):
    cfg = {"symbol": {"kind": "cusp"}, "p": [1], "n_max": 5, "samples": 2000, "backend": "mc-image"}
    _, out = _run(tmp_path, "schatten", cfg, "--seed", "7")
    first = (out / "windows.csv").read_bytes()
    _, out = _run(tmp_path, "schatten", cfg, "--seed", "7")
    assert (out / "windows.csv").read_bytes() == first
    _, out = _run(tmp_path, "schatten", cfg, "--seed", "8")
    assert _body(out / "windows.csv") != first.decode()


def test_floats_have_17_digits(tmp_path):
    _, out = _run(tmp_path, "windows", {"symbol": {"kind": "identity"}, "h": [0.1]})
    row = _rows(out / "zorboska.csv")[0]
    assert row["h"] == "0.10000000000000001"


@pytest.mark.parametrize(
    "command,cfg",
    [
        ("capacity", {"K": "circle", "bogus": 1}),
        ("capacity", {}),
        ("matrix", {"symbol": {"kind": "nope"}}),
        ("matrix", {"symbol": {"kind": "identity"}, "N": "eight"}),
        ("capacity", {"K": {"junk": 1}}),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, command, cfg):
    code, _ = _run(tmp_path, command, cfg)
    assert code == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("dirlab: ") and "\n" not in err


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["capacity", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_evaluation_failure_exit_3(tmp_path):
    code, _ = _run(tmp_path, "peaking", {"K": "circle", "J": 1})
    assert code == 3
    code, _ = _run(tmp_path, "matrix", {"symbol": {"kind": "comb"}})
    assert code == 3


def test_symbol_scan_and_contact(tmp_path):
    code, out = _run(tmp_path, "symbol", {"symbol": {"kind": "cusp"}, "K": [0.0], "scan": 4096, "grid": 2000})
    assert code == 0
    data = json.loads((out / "symbol.json").read_text())["data"]
    scan = data["contact_scan"]
    # |chi| approaches 1 at the cusp only logarithmically, so no peak is visible at this resolution
    assert data["self_map"] and 0 < scan["eta"] < 1 and scan["sup_near"] < 1


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dirichlet_lab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
