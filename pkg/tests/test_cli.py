import json
import subprocess
import sys

import pytest

from pfcsim.cli import EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_inner_product_coset_example(capsys):
    code, out, err = run(capsys, "inner-product", "--n", "4", "--d", "2", "--trials", "20", "--seed", "0")
    assert code == EXIT_OK
    summary = json.loads(out)["summary"]
    assert summary["mean"] == pytest.approx(0.5, abs=1e-12)
    assert json.loads(err)["manifest"]["subcommand"] == "inner-product"


def test_usage_errors(capsys):
    assert run(capsys)[0] == EXIT_USAGE
    assert run(capsys, "welch", "--bogus")[0] == EXIT_USAGE
    assert run(capsys, "eval", "-x", "11")[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE


def test_threshold_failure_exit(capsys):
    code, out, _ = run(capsys, "dim1-attack", "--n", "8", "--dim", "4", "--trials", "10")
    assert code == EXIT_THRESHOLD
    assert json.loads(out)["summary"]["dim"] == 4


def test_manifest_written(tmp_path, capsys):
    out = tmp_path / "res" / "welch.json"
    code, stdout, _ = run(capsys, "welch", "--trials", "30", "--seed", "2", "--out", str(out))
    assert code == EXIT_OK and stdout == ""
    manifest = json.loads((tmp_path / "res" / "welch.json.manifest.json").read_text())
    assert set(manifest) == {"subcommand", "config", "seed", "git_describe", "outputs", "wall_time", "passed"}
    assert manifest["seed"] == 2 and manifest["passed"] and manifest["outputs"] == [str(out)]
    assert json.loads(out.read_text())["summary"]["violations"] == 0


def test_same_seed_same_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "pv-run", "--instance", "and2", "-x", "11", "--seed", "5", "--out", str(path))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_csv_output(capsys):
    code, out, _ = run(capsys, "robustness", "--trials", "500", "--csv")
    assert code == EXIT_OK
    header, values = out.strip().splitlines()
    assert "bound_violations" in header.split(",")
    assert len(header.split(",")) == len(values.split(","))


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 6, "trials": 7, "family": "a0-uniform"}))
    code, out, _ = run(capsys, "inner-product", "--config", str(cfg))
    assert code == EXIT_OK
    s = json.loads(out)["summary"]
    assert (s["n"], s["trials"], s["family"]) == (6, 7, "a0-uniform")
    # explicit flags win over the file
    code, out, _ = run(capsys, "inner-product", "--config", str(cfg), "--trials", "3")
    assert json.loads(out)["summary"]["trials"] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(capsys, "inner-product", "--config", str(bad))[0] == EXIT_USAGE


def test_obfuscate_then_eval(tmp_path, capsys):
    bundle = tmp_path / "and2.bundle.json"
    assert run(capsys, "obfuscate", "-q", "and2", "-o", str(bundle), "--seed", "1")[0] == EXIT_OK
    assert bundle.exists()
    code, out, _ = run(capsys, "eval", "-b", str(bundle), "-x", "11")
    assert code == EXIT_OK and json.loads(out)["output"] == 1


@pytest.mark.parametrize("argv", [
    ["pfc-correctness", "--basis", "both", "--n", "4", "--trials", "200"],
    ["pfc-rotation", "--n-max", "4"],
    ["token-demo", "--trials", "200"],
    ["tcf-decode", "--trials", "2000"],
    ["cv-run", "--instance", "bell_xor", "-x", "01"],
    ["pv-run", "--instance", "and2", "-x", "10", "--trials", "3"],
    ["binding-game", "--committer", "coset", "--opener", "identity", "--n", "4"],
])
def test_subcommands_succeed(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    json.loads(out)


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "pfcsim.cli", "welch", "--trials", "5"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["summary"]["configs"] == 5
