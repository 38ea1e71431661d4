import subprocess
import sys

import numpy as np
import pytest

from rowstream import read_sidecar, write_sidecar
from rowstream.cli import main


def run(argv, capsysbinary):
    code = main(argv)
    captured = capsysbinary.readouterr()
    return code, captured.out, captured.err.decode()


def test_parse_worked_example(tmp_path, capsysbinary):
    src = tmp_path / "a.csv"
    src.write_bytes(b"1,a\n")
    code, out, err = run(["parse", str(src), "--schema", "i,c", "--out", "-"],
                         capsysbinary)
    assert code == 0
    assert out == b"1,a\n"
    assert "rows: 1" in err


def test_parse_to_file_and_reparse(tmp_path, capsysbinary):
    src = tmp_path / "in.csv"
    src.write_bytes(b"1,x\nNA,y\n2,\n")
    dst = tmp_path / "out.csv"
    code, out, _ = run(
        ["parse", str(src), "--schema", "i,c", "--out", str(dst)], capsysbinary
    )
    assert code == 0 and out == b""
    first = dst.read_bytes()
    # parse output is always a valid parse input, and re-parsing is stable
    again = tmp_path / "again.csv"
    code, _, _ = run(
        ["parse", str(dst), "--schema", "i,c", "--out", str(again)], capsysbinary
    )
    assert code == 0
    assert again.read_bytes() == first


def test_parse_infer_reports_types(tmp_path, capsysbinary):
    src = tmp_path / "b.csv"
    src.write_bytes(b"n,f\n1,1.5\n2,2.5\n")
    code, out, err = run(
        ["parse", str(src), "--schema", "infer", "--header"], capsysbinary
    )
    assert code == 0
    assert "inferred schema: i,r" in err
    assert out == b"n,f\n1,1.5\n2,2.5\n"


def test_parse_schema_compact_letters(tmp_path, capsysbinary):
    src = tmp_path / "c.csv"
    src.write_bytes(b"1,2.5,x\n")
    code, out, _ = run(["parse", str(src), "--schema", "irc", "--out", "-"],
                       capsysbinary)
    assert code == 0
    assert out == b"1,2.5,x\n"


def test_parse_skip_and_sep(tmp_path, capsysbinary):
    src = tmp_path / "d.tsv"
    src.write_bytes(b"garbage line\n1\t2\n")
    code, out, _ = run(
        ["parse", str(src), "--schema", "i,i", "--sep", "\\t", "--skip", "1"],
        capsysbinary,
    )
    assert code == 0
    assert out == b"1\t2\n"


def test_parse_strict_exit_two(tmp_path, capsysbinary):
    src = tmp_path / "bad.csv"
    src.write_bytes(b"notanint\n")
    code, _, err = run(
        ["parse", str(src), "--schema", "i", "--strict", "--out", "-"],
        capsysbinary,
    )
    assert code == 2
    assert "error:" in err


def test_parse_missing_file_exit_one(capsysbinary):
    code, _, err = run(["parse", "/no/such/file.csv", "--schema", "i"],
                       capsysbinary)
    assert code == 1
    assert "error:" in err


def test_parse_bad_schema_letter(tmp_path, capsysbinary):
    src = tmp_path / "e.csv"
    src.write_bytes(b"1\n")
    code, _, err = run(["parse", str(src), "--schema", "q"], capsysbinary)
    assert code == 1
    assert "unknown column type letter" in err


def write_toy_input(path):
    rows = [b"y,g,x\n"]
    for i in range(1, 9):
        level = b"a" if i % 2 else b"b"
        rows.append(b"%d.5,%s,%d\n" % (i, level, i))
    path.write_bytes(b"".join(rows))


def test_mm_builds_checkpoint(tmp_path, capsysbinary):
    src = tmp_path / "toy.csv"
    write_toy_input(src)
    ckpt = tmp_path / "toy.mm"
    code, _, err = run(
        [
            "mm", str(src), "--header", "--response", "y",
            "--factor", "g=a,b", "--numeric", "x", "--out", str(ckpt),
        ],
        capsysbinary,
    )
    assert code == 0
    assert read_sidecar(ckpt) == ["(Intercept)", "y", "gb", "x"]
    lines = ckpt.read_bytes().splitlines()
    assert len(lines) == 8
    assert lines[0] == b"1.0,1.5,0.0,1.0"
    assert lines[1] == b"1.0,2.5,1.0,2.0"
    assert not (tmp_path / "toy.mm.partial").exists()
    assert "8 rows in, 8 written" in err


def test_mm_term_order_follows_flags(tmp_path, capsysbinary):
    src = tmp_path / "toy.csv"
    write_toy_input(src)
    ckpt = tmp_path / "ordered.mm"
    code, _, _ = run(
        [
            "mm", str(src), "--header", "--response", "y",
            "--numeric", "x", "--factor", "g=a,b", "--out", str(ckpt),
        ],
        capsysbinary,
    )
    assert code == 0
    assert read_sidecar(ckpt) == ["(Intercept)", "y", "x", "gb"]


def test_mm_concatenation_property(tmp_path, capsysbinary):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_bytes(b"2.0,5\n3.0,6\n")
    b.write_bytes(b"4.0,7\n")
    both = tmp_path / "both.mm"
    split = tmp_path / "split.mm"
    args = ["--response", "V1", "--numeric", "V2", "--schema", "r,i"]
    code, _, _ = run(["mm", str(a), str(b), "--out", str(both)] + args,
                     capsysbinary)
    assert code == 0
    code, _, _ = run(["mm", str(a), "--out", str(split)] + args, capsysbinary)
    assert code == 0
    code, _, _ = run(["mm", str(b), "--out", str(split)] + args, capsysbinary)
    assert code == 0
    assert split.read_bytes() == both.read_bytes()
    assert read_sidecar(split) == read_sidecar(both)


def test_mm_rejects_mismatched_existing_sidecar(tmp_path, capsysbinary):
    src = tmp_path / "toy.csv"
    write_toy_input(src)
    ckpt = tmp_path / "clash.mm"
    write_sidecar(ckpt, ["(Intercept)", "other", "columns"])
    code, _, err = run(
        ["mm", str(src), "--header", "--response", "y", "--numeric", "x",
         "--out", str(ckpt)],
        capsysbinary,
    )
    assert code == 1
    assert "different columns" in err


def test_mm_unknown_levels_dropped_and_reported(tmp_path, capsysbinary):
    src = tmp_path / "lv.csv"
    src.write_bytes(b"1.0,a\n2.0,weird\n3.0,b\n")
    ckpt = tmp_path / "lv.mm"
    code, _, err = run(
        ["mm", str(src), "--response", "V1", "--factor", "V2=a,b",
         "--schema", "r,c", "--out", str(ckpt)],
        capsysbinary,
    )
    assert code == 0
    assert "1 dropped (unknown level)" in err
    assert len(ckpt.read_bytes().splitlines()) == 2


def test_mm_bad_factor_syntax(tmp_path, capsysbinary):
    src = tmp_path / "x.csv"
    src.write_bytes(b"1.0,a\n")
    code, _, err = run(
        ["mm", str(src), "--response", "V1", "--factor", "V2", "--out",
         str(tmp_path / "o.mm")],
        capsysbinary,
    )
    assert code == 1
    assert "--factor expects" in err


def test_mm_requires_terms(tmp_path, capsysbinary):
    src = tmp_path / "x.csv"
    src.write_bytes(b"1.0\n")
    code, _, err = run(
        ["mm", str(src), "--response", "V1", "--out", str(tmp_path / "o.mm")],
        capsysbinary,
    )
    assert code == 1
    assert "no model terms" in err


def write_toy_checkpoint(tmp_path):
    ckpt = tmp_path / "line.mm"
    rows = []
    for x in range(1, 7):
        rows.append(b"1.0,%r,%r\n" % (2.0 * x, float(x)))
    ckpt.write_bytes(b"".join(rows))
    write_sidecar(ckpt, ["(Intercept)", "y", "x"])
    return ckpt


def test_fit_recovers_exact_line(tmp_path, capsysbinary):
    ckpt = write_toy_checkpoint(tmp_path)
    code, out, err = run(["fit", str(ckpt), "--response", "y"], capsysbinary)
    assert code == 0
    lines = out.decode().splitlines()
    coef = {}
    for line in lines:
        name, value = line.rsplit(None, 1)
        coef[name.strip()] = float(value)
    assert abs(coef["x"] - 2.0) < 1e-10
    assert abs(coef["(Intercept)"]) < 1e-10
    assert "aliased" not in out.decode()
    assert "rows: 6" in err


def test_fit_modes_byte_identical(tmp_path, capsysbinary, monkeypatch):
    monkeypatch.setenv("CHUNK_TARGET_BYTES", "64")
    ckpt = write_toy_checkpoint(tmp_path)
    outputs = set()
    for extra in (
        ["--mode", "seq"],
        ["--mode", "pipeline", "--parallel", "2"],
        ["--mode", "pipeline", "--parallel", "8"],
        ["--mode", "split", "--parallel", "8"],
    ):
        code, out, _ = run(["fit", str(ckpt), "--response", "y"] + extra,
                           capsysbinary)
        assert code == 0
        outputs.add(out)
    assert len(outputs) == 1


def test_fit_reports_aliased_column(tmp_path, capsysbinary):
    ckpt = tmp_path / "alias.mm"
    rows = []
    rng = np.random.default_rng(2)
    for _ in range(30):
        x = rng.normal()
        y = 3.0 * x + rng.normal() * 0.1
        rows.append(b"1.0,%r,%r,%r\n" % (y, x, x))
    ckpt.write_bytes(b"".join(rows))
    write_sidecar(ckpt, ["(Intercept)", "y", "x", "x_dup"])
    code, out, _ = run(["fit", str(ckpt), "--response", "y"], capsysbinary)
    assert code == 0
    text = out.decode()
    assert "aliased: x_dup" in text
    assert "x_dup " not in text.split("aliased")[0]


def test_fit_missing_response(tmp_path, capsysbinary):
    ckpt = write_toy_checkpoint(tmp_path)
    code, _, err = run(["fit", str(ckpt), "--response", "nope"], capsysbinary)
    assert code == 1
    assert "not in" in err


def test_fit_chunk_count_respects_env(tmp_path, capsysbinary, monkeypatch):
    ckpt = write_toy_checkpoint(tmp_path)
    monkeypatch.setenv("CHUNK_TARGET_BYTES", "32")
    code, _, err = run(["fit", str(ckpt), "--response", "y"], capsysbinary)
    assert code == 0
    chunks = int(err.split("chunks: ")[1].split(",")[0])
    assert chunks > 1


def test_bench_synthetic_smoke(capsysbinary):
    code, out, _ = run(["bench", "--size-mb", "1", "--trials", "1"],
                       capsysbinary)
    assert code == 0
    text = out.decode()
    assert "bulk parse" in text and "naive parse" in text and "raw read" in text
    assert "frames identical: yes" in text


def test_bench_real_input(tmp_path, capsysbinary):
    src = tmp_path / "real.csv"
    src.write_bytes(b"".join(b"%d,%r\n" % (i, i / 3.0) for i in range(2000)))
    code, out, _ = run(
        ["bench", str(src), "--schema", "i,r", "--trials", "1"], capsysbinary
    )
    assert code == 0
    assert b"frames identical: yes" in out


def test_bench_argument_validation(tmp_path, capsysbinary):
    code, _, err = run(["bench"], capsysbinary)
    assert code == 1
    src = tmp_path / "real.csv"
    src.write_bytes(b"1\n")
    code, _, err = run(["bench", str(src)], capsysbinary)
    assert code == 1
    assert "--schema is required" in err
    code, _, _ = run(["bench", str(src), "--size-mb", "1"], capsysbinary)
    assert code == 1


def test_console_script_entry_point(tmp_path):
    src = tmp_path / "tiny.csv"
    src.write_bytes(b"5,hello\n")
    proc = subprocess.run(
        [sys.executable, "-m", "rowstream", "parse", str(src),
         "--schema", "i,c", "--out", "-"],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert proc.stdout == b"5,hello\n"
    assert b"rows: 1" in proc.stderr
