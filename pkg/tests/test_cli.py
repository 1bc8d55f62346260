import subprocess
import sys

import pytest

from msac.cli import main
from msac.seqcore import BitSeq, read_bits, write_bits


@pytest.fixture
def files(tmp_path):
    def make(name, bits):
        path = tmp_path / name
        write_bits(path, BitSeq(bits))
        return str(path)
    return make


def test_encode_decode_worked_example(files, tmp_path, capsys):
    x, y = files("x.bits", "0100101"), files("y.bits", "10110001011")
    msg, out = str(tmp_path / "m"), str(tmp_path / "o.bits")
    assert main(["encode", x, y, msg, "--verbose"]) == 0
    text = capsys.readouterr().out
    assert "mode=pure" in text and "rate=" in text
    assert "((1, 0, 0, 0), (1, 1), (1,))" in text
    assert main(["decode", msg, y, out]) == 0
    assert read_bits(out) == BitSeq("0100101")


def test_identical_files_give_empty_payload(files, tmp_path, capsys):
    x = files("x.bits", "0110100111")
    assert main(["encode", x, x, str(tmp_path / "m")]) == 0
    assert "mode=pure payload_bits=0" in capsys.readouterr().out


def test_empty_side_information(files, tmp_path, capsys):
    x, y = files("x.bits", "0110"), files("y.bits", "")
    msg, out = str(tmp_path / "m"), str(tmp_path / "o.bits")
    assert main(["encode", x, y, msg, "-v"]) == 0
    text = capsys.readouterr().out
    assert "mode=general" in text and "bursts: [(0, '0110')]" in text
    assert main(["decode", msg, y, out]) == 0 and read_bits(out) == BitSeq("0110")


def test_corrupt_inputs_exit_3(files, tmp_path, capsys):
    x, y = files("x.bits", "0100101"), files("y.bits", "10110001011")
    msg = tmp_path / "m"
    main(["encode", x, y, str(msg)])
    (tmp_path / "t").write_bytes(msg.read_bytes()[:5])
    assert main(["decode", str(tmp_path / "t"), y, str(tmp_path / "o")]) == 3
    assert "header" in capsys.readouterr().err
    (tmp_path / "bad.bits").write_bytes(b"\x05")
    assert main(["encode", str(tmp_path / "bad.bits"), y, str(msg)]) == 3
    assert main(["encode", files("z.bits", "11"), files("w.bits", "010"), str(msg), "--mode", "pure"]) == 3


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "s"), "--p", "1.5"]) == 2
    assert main(["bench", "table1", "--trials", "0"]) == 2
    assert main(["bench", "sweep", "--d", "a,b"]) == 2
    assert main(["decode", str(tmp_path / "missing"), str(tmp_path / "missing"), str(tmp_path / "o")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_simulate_is_deterministic(tmp_path, capsys):
    for prefix in ("a", "b"):
        assert main(["simulate", str(tmp_path / prefix), "--n", "500", "--dx", "0.05", "--seed", "3"]) == 0
    for name in ("x", "y", "zx", "zy", "dx", "dy"):
        assert (tmp_path / f"a.{name}.bits").read_bytes() == (tmp_path / f"b.{name}.bits").read_bytes()
    assert read_bits(tmp_path / "a.y.bits") == read_bits(tmp_path / "a.zx.bits")
    assert "d_x=0.05" in (tmp_path / "a.params").read_text()


def test_encode_is_deterministic(tmp_path, capsys):
    main(["simulate", str(tmp_path / "s"), "--n", "2000", "--q", "0.01", "--dx", "0.01", "--dy", "0.01"])
    x, y = str(tmp_path / "s.x.bits"), str(tmp_path / "s.y.bits")
    main(["encode", x, y, str(tmp_path / "m1")])
    main(["encode", x, y, str(tmp_path / "m2")])
    assert (tmp_path / "m1").read_bytes() == (tmp_path / "m2").read_bytes()
    assert main(["decode", str(tmp_path / "m1"), y, str(tmp_path / "o")]) == 0
    assert read_bits(tmp_path / "o") == read_bits(x)


def test_bench_outputs(capsys):
    assert main(["bench", "table1", "--n", "20000", "--trials", "1"]) == 0
    text = capsys.readouterr().out
    assert "No SI" in text and "0.1" in text
    assert main(["bench", "sweep", "--n", "20000", "--trials", "1", "--format", "csv"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0].startswith("codec,p,d,n,mean_rate") and len(rows) == 4
    rates = [float(r.split(",")[4]) for r in rows[1:]]
    assert rates == sorted(rates)


def test_analyze(capsys):
    assert main(["analyze", "--n", "12", "--dx", "0.1", "--trials", "50"]) == 0
    text = capsys.readouterr().out
    assert "exact H(X|Y)/n = 0.35866" in text and "c = 1.2885" in text


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "msac.cli", "simulate", str(tmp_path / "s"), "--n", "10"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "len X = 10" in proc.stdout
