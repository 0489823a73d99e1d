import json

import pytest

from tplab import cli


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds_json(capsys):
    code, out, _ = run(capsys, "bounds", "--alpha", "1", "--L", "1,8,64")
    assert code == 0
    d = json.loads(out)
    assert d["capacity"] == pytest.approx(0.367879, abs=1e-6)
    assert len(d["converse"]) == 3


def test_bounds_csv_range(capsys):
    code, out, _ = run(capsys, "bounds", "--alpha", "0.5:1.5:0.5", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4 and lines[0].startswith("alpha,capacity")


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--kind", "alpha", "--grid", "0.1:3.0:0.1")
    assert code == 0 and len(out.splitlines()) == 31
    assert run(capsys, "sweep", "--kind", "L", "--grid", "")[0] == 2


def test_tear_decode_end_to_end(capsys, tmp_path):
    code_file, dump, truth = tmp_path / "c.json", tmp_path / "d.txt", tmp_path / "t.txt"
    assert run(capsys, "make-code", "--n", "64", "--m", "4", "--delta", "0", "--M", "8",
               "--out", str(code_file))[0] == 0
    assert run(capsys, "tear", "--code", str(code_file), "--message", "1,2,3", "--p", "0.01",
               "--seed", "7", "--out", str(dump), "--truth", str(truth))[0] == 0
    code, out, _ = run(capsys, "decode", "--code", str(code_file), "--fragments", str(dump),
                       "--truth", str(truth))
    rep = json.loads(out)
    assert code == 0 and rep["misalignments"] == 0 and rep["conflicts"] == 0
    assert rep["message"] in ([1, 2, 3], None)


def test_tear_random_input_then_decode(capsys, tmp_path):
    code_file, dump = tmp_path / "c.json", tmp_path / "d.txt"
    run(capsys, "make-code", "--n", "64", "--delta", "0", "--M", "4", "--out", str(code_file))
    assert run(capsys, "tear", "--n", "64", "--p", "0.1", "--seed", "7", "--out", str(dump))[0] == 0
    assert dump.read_text().startswith("n=64 p=0.1 seed=7\n")
    code, out, _ = run(capsys, "decode", "--code", str(code_file), "--fragments", str(dump))
    assert code == 0 and "coverage_recovered" in json.loads(out)


def test_tear_stdout_deterministic(capsys):
    a = run(capsys, "tear", "--input", "0110100110", "--p", "0.3", "--seed", "3")[1]
    b = run(capsys, "tear", "--input", "0110100110", "--p", "0.3", "--seed", "3")[1]
    assert a == b and sorted("".join(a.splitlines()[1:])) == sorted("0110100110")


def test_encode(capsys, tmp_path):
    code_file = tmp_path / "c.json"
    run(capsys, "make-code", "--n", "64", "--delta", "0", "--M", "8", "--out", str(code_file))
    code, out, _ = run(capsys, "encode", "--code", str(code_file), "--message", "0,1,2")
    assert code == 0 and len(json.loads(out)["codeword"]) == 64
    assert run(capsys, "encode", "--code", str(code_file), "--message", "0,1,9")[0] == 2


def test_oracle_tiling_mode(capsys, tmp_path):
    (tmp_path / "cb.txt").write_text("0000\n1111\n")
    (tmp_path / "f.txt").write_text("n=4 p=0.5 seed=0\n00\n00\n")
    code, out, _ = run(capsys, "oracle", "--codebook", str(tmp_path / "cb.txt"),
                       "--fragments", str(tmp_path / "f.txt"), "--gamma", "0")
    assert code == 0 and json.loads(out) == {"status": "decoded", "index": 0}


def test_oracle_experiment(capsys):
    code, out, err = run(capsys, "oracle", "--n", "48", "--rate", "0.05", "--alpha", "1",
                         "--gamma", "1", "--trials", "20")
    assert code == 0
    rows = out.splitlines()
    assert rows[0].startswith("experiment,statistic") and rows[1].startswith("oracle,ambiguity")
    assert "[PASS] oracle/no_match" in err


def test_strict_exit_code(capsys):
    # two trials at a tiny n cannot meet the limits
    assert run(capsys, "verify-lemmas", "--n", "16", "--alpha", "1", "--trials", "2", "--strict")[0] == 1
    assert run(capsys, "verify-lemmas", "--n", "16", "--alpha", "1", "--trials", "2")[0] == 0


def test_codec_exp(capsys):
    code, out, _ = run(capsys, "codec-exp", "--n", "1024", "--M", "4", "--alpha", "0.1",
                       "--trials", "3", "--format", "json")
    assert code == 0 and json.loads(out)[0]["statistic"] == "aligned_fraction"
    assert run(capsys, "codec-exp", "--n", "1024", "--trials", "3")[0] == 2


def test_parameter_errors(capsys):
    assert run(capsys, "make-code", "--n", "16", "--delta", "0")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "bounds")[0] == 2
    assert run(capsys, "bounds", "--alpha", "1", "--nope")[0] == 2
    assert run(capsys, "tear", "--n", "8", "--p", "0")[0] == 2
    assert run(capsys, "tear", "--n", "8", "--p", "0.5", "--truth", "x")[0] == 2


def test_pilot(capsys):
    assert run(capsys, "pilot", "--order", "3")[1].strip() == "00010111"


def test_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("TPLAB_SEED", "5")
    a = run(capsys, "tear", "--n", "32", "--p", "0.2")[1]
    assert a.splitlines()[0] == "n=32 p=0.2 seed=5"
    monkeypatch.delenv("TPLAB_SEED")
    assert run(capsys, "tear", "--n", "32", "--p", "0.2")[1].splitlines()[0].endswith(
        f"seed={cli.DEFAULT_SEED}")
