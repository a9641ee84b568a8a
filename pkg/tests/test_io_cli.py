import json
import subprocess
import sys

import numpy as np
import pytest

from loewnerkit.cli import main
from loewnerkit.core import DrivingTerm
from loewnerkit.errors import FormatError
from loewnerkit.explicit import params_from_kappa, trace_explicit
from loewnerkit.io import (fmt, read_curve, read_driving, read_json, read_trace, write_curve,
                           write_driving, write_json, write_trace)


# files

def test_driving_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    t = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, 50)), [1.0]])
    lam = DrivingTerm(t, rng.normal(size=t.size))
    p = tmp_path / "d.csv"
    write_driving(p, lam)
    assert p.read_text().splitlines()[0] == "t,lambda"
    back = read_driving(p)
    assert np.array_equal(back.t, lam.t) and np.array_equal(back.values, lam.values)


def test_trace_and_curve_round_trip(tmp_path):
    tr = trace_explicit(params_from_kappa(2.0), np.linspace(0.0, 3.0, 40))
    write_trace(tmp_path / "t.csv", tr)
    assert (tmp_path / "t.csv").read_text().startswith("t,re,im\n")
    back = read_trace(tmp_path / "t.csv")
    assert np.array_equal(back.z, tr.z)
    write_curve(tmp_path / "c.csv", tr.z)
    assert (tmp_path / "c.csv").read_text().startswith("re,im\n")
    assert np.array_equal(read_curve(tmp_path / "c.csv").points, tr.z)


def test_fmt_digits():
    for x in (0.1, 1 / 3, 2.0 ** -40, 12345.678901234567):
        assert float(fmt(x)) == x
        assert len(fmt(x).replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_headerless_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,1\n0.5,1\n1,1\n")
    assert read_driving(p).total_capacity == 1.0


@pytest.mark.parametrize("body, line", [("t,lambda\n0,0\n0.5,x\n1,0\n", 3),
                                        ("t,lambda\n0,0\n0.5,1,2\n", 3),
                                        ("t,lambda\n0,0\n1,nan\n", 3)])
def test_malformed_csv_reports_line(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(FormatError, match=f"line {line}"):
        read_driving(p)


def test_invalid_driving_data(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,lambda\n0,0\n0.5,0\n0.5,0\n")
    with pytest.raises(FormatError):
        read_driving(p)


def test_json_round_trip(tmp_path):
    write_json(tmp_path / "a.json", {"z": 1 + 2j, "x": np.float64(0.5), "v": np.arange(3),
                                     "nan": float("nan")})
    assert read_json(tmp_path / "a.json") == {"z": [1.0, 2.0], "x": 0.5, "v": [0, 1, 2],
                                              "nan": None}
    (tmp_path / "b.json").write_text("{\n  oops\n}")
    with pytest.raises(FormatError, match="line 2"):
        read_json(tmp_path / "b.json")


# command line

def _csv(path, rows, header):
    path.write_text(header + "\n" + "".join(",".join(repr(float(v)) for v in r) + "\n" for r in rows))
    return str(path)


def test_cli_exact(tmp_path):
    assert main(["exact", "--kappa", "5", "--samples", "100", "--out", str(tmp_path),
                 "--svg"]) == 0
    d = json.loads((tmp_path / "exact_params.json").read_text())
    assert d["theta"] == pytest.approx(0.75) and d["A"] == pytest.approx(4.0)
    assert d["B"] == pytest.approx(1.0)
    assert d["flags"]["kappa"] == 5.0
    rows = (tmp_path / "exact_trace.csv").read_text().splitlines()
    assert rows[0] == "t,re,im" and len(rows) == 101
    assert 'data-format="loewnerkit-svg/1"' in (tmp_path / "exact_trace.svg").read_text()


def test_cli_trace_of_zero(tmp_path):
    f = _csv(tmp_path / "const0.csv", [(0.0, 0.0), (1.0, 0.0)], "t,lambda")
    assert main(["trace", "--driving", f, "--steps", "1024", "--out", str(tmp_path)]) == 0
    last = (tmp_path / "trace.csv").read_text().splitlines()[-1]
    t, x, y = map(float, last.split(","))
    assert abs(t - 1) + abs(x) + abs(y - 2) <= 2e-3


def test_cli_drive(tmp_path):
    y = np.linspace(0.0, 2.0, 200)
    f = _csv(tmp_path / "slit.csv", [(0.0, v) for v in y], "re,im")
    assert main(["drive", "--curve", f, "--out", str(tmp_path)]) == 0
    lam = read_driving(tmp_path / "driving.csv")
    assert lam.total_capacity == pytest.approx(1.0, abs=1e-2)


def test_cli_analyze_sqrt(tmp_path):
    t = np.linspace(0.0, 1.0, 4097)
    f = _csv(tmp_path / "sqrt4.csv", zip(t, 4 * np.sqrt(1 - t)), "t,lambda")
    assert main(["analyze", "--driving", f, "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["kappa_limit"] == pytest.approx(4.0, abs=1e-6)
    assert d["flags"]["a"] == 0.5
    assert len(d["local_lip_norms"]) == 3


def test_cli_analyze_with_geometry(tmp_path):
    t = np.linspace(0.0, 1.0, 4097)
    f = _csv(tmp_path / "sqrt5.csv", zip(t, 5 * np.sqrt(1 - t)), "t,lambda")
    assert main(["analyze", "--driving", f, "--steps", "4096", "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["regime"] == "collision"


def test_cli_spiral_is_deterministic(tmp_path):
    s = tmp_path / "A.json"
    s.write_text('{"kind":"disk","center":[0,2],"radius":0.5}')
    outs = []
    for k in range(2):
        o = tmp_path / f"run{k}"
        assert main(["spiral", "--set", str(s), "--tmax", str(1 - 2 ** -8), "--samples", "600",
                     "--out", str(o)]) == 0
        outs.append([(o / n).read_bytes() for n in
                     ("spiral_curve.csv", "spiral_driving.csv", "spiral.json")])
    assert outs[0] == outs[1]
    d = json.loads((tmp_path / "run0" / "spiral.json").read_text())
    assert d["set"]["radius"] == 0.5 and d["turns"] > 1


def test_cli_malformed_csv(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("t,lambda\n0,0\n0.5,abc\n")
    assert main(["trace", "--driving", str(p), "--out", str(tmp_path)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_cli_domain_error(tmp_path, capsys):
    s = tmp_path / "A.json"
    s.write_text('{"kind":"disk","center":[0,0.2],"radius":0.5}')
    assert main(["spiral", "--set", str(s), "--out", str(tmp_path)]) == 1
    assert main(["trace", "--driving", str(tmp_path / "missing.csv")]) == 1


def test_cli_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["exact", "--kappa", "5", "--bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_cli_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("LOEWNERKIT_OUT", str(tmp_path / "env"))
    assert main(["exact", "--kappa", "2", "--samples", "10"]) == 0
    assert (tmp_path / "env" / "exact_trace.csv").exists()
    assert main(["exact", "--kappa", "2", "--samples", "10", "--out",
                 str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "exact_trace.csv").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "loewnerkit", "exact", "--nope"],
                       capture_output=True, text=True)
    assert r.returncode == 2


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "1", "9"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] criterion 1" in out and "[PASS] criterion 9" in out
