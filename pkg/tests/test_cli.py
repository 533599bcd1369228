"""CLI contracts: subcommands, formats, exit codes, byte determinism."""
import json
import subprocess
import sys

import pytest

from hypising import cli

RUN = [sys.executable, "-m", "hypising.cli"]


def invoke(args, **kw):
    return subprocess.run(RUN + args, capture_output=True, text=True, **kw)


def test_constants_json():
    r = invoke(["constants", "--p", "4", "--q", "5"])
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert d["T"] == [[2, 3], [1, 2]]
    assert abs(d["h_limit"] - 3 ** 0.5) < 1e-9


def test_window_json_fields():
    r = invoke(["window", "--p", "5", "--q", "5", "--N", "3", "--h", "56/25"])
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert d["h1"] == {"num": 47, "den": 21, "decimal": float(47) / 21}
    assert d["rstar"] == 1
    assert d["region"] == "METASTABLE"
    assert set(d) >= {"p", "q", "N", "h1", "h2", "h3", "h4", "h_limit", "rstar", "region"}


def test_window_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    r = invoke(["window", "--p", "5", "--q", "5", "--sweep", "1..4",
                "--format", "csv", "--out", str(out)])
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "N,h1,h2,h3,h4"
    assert len(lines) == 5


def test_lattice_build_and_validate():
    r = invoke(["lattice", "build", "--p", "4", "--q", "5", "--N", "1"])
    d = json.loads(r.stdout)
    assert d["layers"] == [{"size": 4, "i_count": 0, "e_count": 4},
                           {"size": 20, "i_count": 12, "e_count": 8}]
    r = invoke(["lattice", "validate", "--p", "5", "--q", "4", "--N", "2"])
    assert r.returncode == 0
    assert json.loads(r.stdout)["valid"] is True


def test_lattice_embed_csv(tmp_path):
    out = tmp_path / "embed.csv"
    r = invoke(["lattice", "embed", "--p", "4", "--q", "5", "--N", "1",
                "--format", "csv", "--out", str(out)])
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "layer,index,class,x,y"
    assert len(lines) == 25


def test_path_profile_csv_columns(tmp_path):
    out = tmp_path / "trace.csv"
    r = invoke(["path", "profile", "--p", "5", "--q", "5", "--N", "3",
                "--h", "56/25", "--r", "1", "--format", "csv", "--out", str(out)])
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,layer,index,class,du,dn,cum_u,cum_n,cum_value"
    assert len(lines) == 41
    step13 = lines[13].split(",")
    assert step13[6] == "31" and step13[7] == "13"


def test_droplet_json():
    r = invoke(["droplet", "--p", "5", "--q", "5", "--N", "3", "--h", "56/25",
                "--window-n", "21"])
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert d["strip_len"] == 32 and d["area"] == 37
    assert d["energy"] == {"u": 89, "n": 37, "decimal": 6.12}


def test_oracle_exit_and_fields():
    r = invoke(["oracle", "--p", "4", "--q", "5", "--N", "0", "--h", "2/1"])
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert d["n_states"] == 16
    assert d["x_m"] == [15]
    assert d["gamma_max"] == {"u": -1, "n": -1, "decimal": 1.0}


def test_oracle_extra_phi_request():
    r = invoke(["oracle", "--p", "4", "--q", "5", "--N", "0", "--h", "2/1",
                "--phi", "5:10"])
    d = json.loads(r.stdout)
    pairs = {(e["a"], e["b"]) for e in d["phi"]}
    assert (5, 10) in pairs and (0, 15) in pairs


def test_minperim():
    r = invoke(["minperim", "--p", "4", "--q", "5", "--N", "1", "--max-area", "5"])
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert d["table"]["4"]["perimeter"] == 12


def test_simulate_hit_csv_deterministic(tmp_path):
    args = ["simulate", "hit", "--p", "4", "--q", "5", "--N", "1", "--h", "19/10",
            "--beta", "2.0", "--replicas", "8", "--seed", "7",
            "--max-steps", "1000000", "--target", "all_minus", "--start", "all_plus",
            "--format", "csv"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert invoke(args + ["--out", str(out1)]).returncode == 0
    assert invoke(args + ["--out", str(out2)]).returncode == 0
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    assert b1 == b2
    assert b1.splitlines()[0] == b"replica,seed,steps,censored"


def test_simulate_hit_json_summary():
    r = invoke(["simulate", "hit", "--p", "4", "--q", "5", "--N", "1",
                "--h", "19/10", "--beta", "2.0", "--replicas", "6", "--seed", "3",
                "--max-steps", "1000000", "--target", "all_minus", "--start", "all_plus"])
    d = json.loads(r.stdout)
    assert d["censored"] == 0
    assert d["ln_mean"] is not None and d["mean_ln"] is not None
    assert d["columns"] == ["replica", "seed", "steps", "censored"]
    assert len(d["rows"]) == 6


def test_repro_appendix1_pass_no_flags():
    r = invoke(["repro", "appendix1"])
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert d["status"] == "PASS"
    assert d["flags"] == []
    assert all(c["passed"] for c in d["checks"])


def test_repro_appendix2_exit_2_with_flag():
    r = invoke(["repro", "appendix2"])
    assert r.returncode == 2
    d = json.loads(r.stdout)
    assert d["status"] == "PASS-WITH-FLAGS"
    assert any("55" in f and "|L_1| = 40" in f for f in d["flags"])


def test_unknown_example_usage_error():
    r = invoke(["repro", "appendix3"])
    assert r.returncode == 1


def test_domain_error_exit_1():
    r = invoke(["constants", "--p", "4", "--q", "4"])
    assert r.returncode == 1
    assert "error" in json.loads(r.stdout)


def test_capacity_error_exit_1():
    r = invoke(["lattice", "build", "--p", "7", "--q", "7", "--N", "6"])
    assert r.returncode == 1


def test_spec_round_trip():
    spec = cli.ExperimentSpec("window", {"p": 5, "q": 5, "N": 3, "h": "56/25",
                                         "sweep": None})
    again = cli.ExperimentSpec.from_json(spec.to_json())
    assert again.command == spec.command and again.options == spec.options
