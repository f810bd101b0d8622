"""Tests for the command-line report front door."""

import json

import pytest

from voablocks.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_virasoro_bounds_example(capsys):
    code, out = run(capsys, "virasoro", "bounds",
                    "-p", "4", "-q", "3", "-r", "1", "-s", "2")
    assert code == 0
    report = json.loads(out)
    assert report["result"] == {"c": "1/2", "h": "1/16",
                                "c2_vacuum_bound": 3, "b1_bound": 2}
    assert report["version"]
    assert len(report["config_sha256"]) == 64


def test_lattice_gamma_example(capsys):
    code, out = run(capsys, "lattice", "gamma",
                    "--gram", "[[2]]", "--lambda", "[0]")
    assert code == 0
    result = json.loads(out)["result"]
    assert result == {"gamma": ["0", "a1", "-a1"], "size": 3}


def test_check_identities_deterministic(capsys):
    args = ("check-identities", "--model", "ising", "--cutoff", "6",
            "--samples", "20")
    code1, out1 = run(capsys, *args)
    code2, out2 = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical report for the same config
    report = json.loads(out1)
    assert report["result"]["failures"] == 0
    assert report["result"]["samples"] == 20
    assert report["seed"] == report["config"]["seed"]


def test_virasoro_singular_command(capsys):
    code, out = run(capsys, "virasoro", "singular",
                    "-p", "4", "-q", "3", "-r", "1", "-s", "2",
                    "--level", "2")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["dimension"] == 1
    assert result["h"] == "1/16"


def test_quotient_command(capsys):
    code, out = run(capsys, "quotient", "--space", "c2",
                    "--model", "ising", "--cutoff", "8")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["cumulative"] == 3
    assert result["stabilized"] is True


def test_ff_verify_command(capsys):
    code, out = run(capsys, "virasoro", "ff-verify",
                    "-p", "4", "-q", "3", "-r", "2", "-s", "2")
    assert code == 0
    assert json.loads(out)["result"] == {"alpha": "1", "ok": True}


def test_rr_gaps_command(capsys):
    code, out = run(capsys, "rr", "gaps", "--genus", "1", "--r-u", "2")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["M"] == 2
    assert result["gaps"]["1"] == [1]


def test_blocks_dim_command(tmp_path, capsys):
    config = {
        "points": ["0"],
        "voa": {"kind": "virasoro-irreducible", "p": 4, "q": 3, "r": 1, "s": 1},
        "labels": ["vacuum"],
        "D": 10,
        "P": 4,
    }
    path = tmp_path / "blocks.json"
    path.write_text(json.dumps(config))
    code, out = run(capsys, "blocks", "dim", "--config", str(path))
    assert code == 0
    result = json.loads(out)["result"]
    assert result["total"] == 1
    assert result["stabilized"] is True
    assert result["total"] <= result["theorem_bound"]


def test_schema_violations_exit_one(capsys):
    assert main(["quotient", "--space", "nope"]) == 1
    assert main(["lattice", "gamma", "--gram", "not-json"]) == 1
    assert main(["virasoro", "singular", "--level", "2"]) == 1  # no c/h
    assert main(["check-identities", "--model", "{bad json"]) == 1


def test_out_and_table_flags(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out = run(capsys, "virasoro", "bounds",
                    "-p", "4", "-q", "3", "-r", "1", "-s", "1",
                    "--table", "--out", str(out_path))
    assert code == 0
    assert "c2_vacuum_bound" in out and "{" not in out.splitlines()[0]
    saved = json.loads(out_path.read_text())
    assert saved["result"]["c2_vacuum_bound"] == 3
