import csv
import io
import json

import pytest

from adelheat.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def header(text):
    return next(csv.reader(io.StringIO(text)))


def test_kernel_table(capsys):
    code, out, _ = run(capsys, "kernel", "--filtration", "factorial", "--alpha", "1", "--t", "0.1,1,10", "--m=-5:5")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "m", "radius", "Z", "lower_bound_check", "upper_bound_check", "shell_mass"]
    assert len(rows) == 1 + 3 * 11
    assert all(r[4] == "pass" and r[5] == "pass" for r in rows[1:])


def test_kernel_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["kernel", "--out", str(a)]) == 0
    assert main(["kernel", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    ["kernel", "--t", ""],
    ["kernel", "--m", ""],
    ["kernel", "--tolerance", "-1"],
    ["kernel", "--alpha", "0"],
    ["arch", "--beta", "3"],
    ["kernel", "--filtration", "nonsense"],
    ["kernel", "--t", "a,b"],
    ["nosuchcommand"],
    ["verify", "--tolerance", "-1e-10"],
    ["verify", "--check", "nosuchcheck"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2


@pytest.mark.parametrize("cmd", ["sample", "path"])
def test_sampling_requires_seed(capsys, cmd):
    assert run(capsys, cmd, "--t", "1")[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"filtration": "lcm", "alpha": 2.0, "t": [1.0], "m": [0, 1]}))
    code, out, _ = run(capsys, "cdf", "--config", str(cfg), "--alpha", "0.5")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "k", "radial_cdf", "tail", "tail_bound"]
    assert len(rows) == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "cdf", "--config", str(bad))[0] == 2
    assert run(capsys, "cdf", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_shells(capsys):
    code, out, _ = run(capsys, "shells", "--t", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "m", "shell_mass", "cumulative", "lower_tail_bound", "upper_tail_bound"]
    assert abs(float(rows[-1][3]) + float(rows[-1][4]) + float(rows[-1][5]) - 1) < 1e-10


def test_sample_deterministic(tmp_path, capsys):
    paths = []
    for tag in "ab":
        out, summ = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.json"
        assert main(["sample", "--seed", "5", "--t", "1", "--draws", "20000", "--out", str(out),
                     "--summary", str(summ)]) == 0
        paths.append((out, summ))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()
    assert header(paths[0][0].read_text()) == ["t", "norm_index", "norm", "gamma", "digits_prefix", "x_real"]
    summary = json.loads(paths[0][1].read_text())
    assert summary["schema_version"] == 1
    assert sum(summary["counts"]) == 20000
    assert summary["p_value"] > 1e-3
    other = tmp_path / "c.csv"
    main(["sample", "--seed", "6", "--t", "1", "--draws", "20000", "--out", str(other), "--summary", str(tmp_path / "c.json")])
    assert other.read_bytes() != paths[0][0].read_bytes()


def test_sample_summary_to_stderr(capsys):
    code, out, err = run(capsys, "sample", "--seed", "1", "--draws", "100")
    assert code == 0
    assert json.loads(err)["draws"] == 100
    assert len(out.splitlines()) == 101


def test_path(capsys):
    code, out, _ = run(capsys, "path", "--seed", "3", "--t", "0.5,1,2")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "norm_index", "norm", "gamma", "digits_prefix", "x_real"]
    assert [r[0] for r in rows[1:]] == ["0.0", "0.5", "1.0", "2.0"]
    assert run(capsys, "path", "--seed", "3", "--t", "0.5,1,2")[1] == out


def test_spectrum_arch_adelic(capsys):
    code, out, _ = run(capsys, "spectrum", "--m=-1:1", "--t", "1")
    assert code == 0 and header(out) == ["n", "eigenvalue", "t", "semigroup_factor", "m", "eigenfunction"]
    code, out, _ = run(capsys, "arch", "--beta", "1.5", "--t", "1", "--x", "0,1")
    assert code == 0 and header(out) == ["x", "t", "beta", "Z_inf", "bound_rhs"]
    code, out, _ = run(capsys, "adelic", "--t", "1", "--x", "0", "--m=0:1")
    assert code == 0 and header(out) == ["t", "x_real", "norm_index", "Z_A"]
    assert len(out.splitlines()) == 3


def test_precision_error_exit_code(capsys):
    # a window too narrow to certify the tails
    assert run(capsys, "shells", "--filtration", json.dumps({"type": "factorial", "window": [-8, 8]}), "--t", "1e-6")[0] == 3


def test_verify_single_check(capsys):
    code, out, _ = run(capsys, "verify", "--check", "parseval", "--check", "eigenpair")
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == 1
    assert [c["name"] for c in report["checks"]] == ["parseval", "eigenpair"]
    assert all(c["pass"] for c in report["checks"])


@pytest.mark.parametrize("name", ["factorial", "prime_power(2)", "lcm"])
def test_verify_default_passes(capsys, name):
    code, out, _ = run(capsys, "verify", "--filtration", name)
    report = json.loads(out)
    assert code == 0, [c for c in report["checks"] if not c["pass"]]
    assert len(report["checks"]) == 12
