import json
import subprocess
import sys

import pytest

from rotclt.cli import main, parse_angle, parse_series


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_no_command_and_bad_flag(capsys):
    assert run([], capsys)[0] == 1
    assert run(["spectrum", "--bogus"], capsys)[0] == 1
    assert run(["exact", "--n", "25"], capsys)[0] == 1


def test_spectrum_json_and_csv(capsys):
    code, out, _ = run(["spectrum"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["command"] == "spectrum" and "threads" not in d["config"] and d["config"]["angle"] == "golden"
    code, out, _ = run(["spectrum", "--format", "csv"], capsys)
    lines = out.strip().splitlines()
    assert lines[0].startswith("n,eigenvalue") and len(lines) == 2


def test_resonance_exit_code(capsys):
    code, _, err = run(["spectrum", "--angle", "1/3", "--series", "3:1"], capsys)
    assert code == 2 and "resonance" in err


def test_unknown_preset(capsys):
    code, _, err = run(["preset", "nope"], capsys)
    assert code == 1 and "golden-c1" in err and "theorem1-toy" in err


def test_construct_verify_and_corruption(tmp_path, capsys):
    out = tmp_path / "run"
    assert run(["construct", "--theorem", "1", "--depth", "2", "--out", str(out)], capsys)[0] == 0
    for name in ("ledger.json", "angle.json", "series.json"):
        assert (out / name).exists()
    ledger = out / "ledger.json"
    code, stdout, _ = run(["verify", str(ledger)], capsys)
    assert code == 0 and json.loads(stdout)["result"]["ok"]

    d = json.loads(ledger.read_text())
    d["ledger"]["levels"][1]["N"] = str(int(d["ledger"]["levels"][1]["N"]) - 1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    code, _, err = run(["verify", str(bad)], capsys)
    assert code == 3 and "FAIL" in err

    # the stored angle feeds back into other commands
    a = parse_angle(str(out / "angle.json"))
    assert a.value() == parse_angle(str(ledger)).value()
    assert parse_series(str(out / "series.json")).terms[0][0] == 3


def test_construct_infeasible(capsys):
    code, _, err = run(["construct", "--theorem", "1", "--faithful", "--depth", "2"], capsys)
    assert code == 2 and "infeasible" in err


def test_construct_theorem2_and_3(tmp_path, capsys):
    for th in ("2", "3"):
        out = tmp_path / th
        assert run(["construct", "--theorem", th, "--depth", "2", "--out", str(out)], capsys)[0] == 0
        assert run(["verify", str(out / "ledger.json")], capsys)[0] == 0


def test_config_rerun_is_byte_identical(tmp_path, capsys):
    first = tmp_path / "a.json"
    args = ["tail", "--angle", "golden", "--series", "1:1", "--n", "200", "--m", "3000", "--s", "3/5",
            "--t", "1/2", "--seed", "7"]
    assert run(args + ["--out", str(first)], capsys)[0] == 0
    second = tmp_path / "b.json"
    assert run(["tail", "--config", str(first), "--threads", "2", "--out", str(second)], capsys)[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run(["chain", "--config", str(cfg)], capsys)[0] == 1


def test_exact_with_mc(capsys):
    code, out, _ = run(["exact", "--angle", "golden", "--n", "8", "--t", "1/8", "--mc", "20000"], capsys)
    d = json.loads(out)["result"]
    assert code == 0 and d["agree"] and 0 < d["exact"] < 1


def test_chain(capsys):
    code, out, _ = run(["chain", "--q", "7", "--horizon", "20"], capsys)
    assert code == 0 and json.loads(out)["result"]["all_ok"]


def test_parse_angle_forms():
    from fractions import Fraction as F
    assert parse_angle("2/7").value() == F(2, 7)
    assert [parse_angle("liouville:k:5").convergent(k)[1] for k in range(1, 6)] == [1, 2, 3, 11, 1334]
    assert parse_series("3:1/8,5:1/4").terms == ((3, F(1, 8)), (5, F(1, 4)))
    assert parse_series("zero").terms == ()


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "rotclt.cli", "chain", "--q", "3", "--horizon", "4",
                        "--format", "csv"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("n,deviation")
