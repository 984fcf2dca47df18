import numpy as np
import pytest

from implicitcoin.cli import main
from implicitcoin.data_io import make_synthetic_regression, serialize_libsvm
from implicitcoin.harness import read_csv


@pytest.fixture()
def libsvm_file(tmp_path):
    ds = make_synthetic_regression(n=60, dim=4, seed=13)
    path = tmp_path / "data.libsvm"
    path.write_text(serialize_libsvm(ds))
    return path


def run_cli(tmp_path, libsvm_file, *extra):
    out = tmp_path / "out.csv"
    code = main(["run", "--algo", "implicit-coin", "--data", str(libsvm_file),
                 "--format", "libsvm", "--task", "reg", "--epochs", "2",
                 "--reps", "2", "--out", str(out), *extra])
    return code, out


def test_run_writes_csv_and_metadata(tmp_path, libsvm_file):
    code, out = run_cli(tmp_path, libsvm_file)
    assert code == 0
    rows = read_csv(out)
    assert {r["repetition"] for r in rows} == {"0", "1", "mean"}
    assert (tmp_path / "out.csv.meta.txt").exists()


def test_check_bounds_appends_diagnostics_block(tmp_path, libsvm_file):
    code, out = run_cli(tmp_path, libsvm_file, "--check-bounds")
    assert code == 0
    text = out.read_text()
    assert "# DIAGNOSTICS" in text
    assert "check=no_overshoot pass" in text
    assert "check=wealth_lower_bound pass" in text


def test_trace_wealth_stream(tmp_path, libsvm_file):
    trace = tmp_path / "trace.csv"
    code, _ = run_cli(tmp_path, libsvm_file, "--trace-wealth", str(trace))
    assert code == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "t,h,wealth,beta_norm,residual"
    assert len(lines) > 42
    h = float(lines[1].split(",")[1])
    assert 0.0 <= h <= 1.0


def test_trace_wealth_rejected_for_baseline(tmp_path, libsvm_file, capsys):
    out = tmp_path / "out.csv"
    code = main(["run", "--algo", "sgd", "--data", str(libsvm_file),
                 "--format", "libsvm", "--task", "reg", "--out", str(out),
                 "--trace-wealth", str(tmp_path / "t.csv")])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_grid_rejected_for_parameter_free(tmp_path, libsvm_file, capsys):
    out = tmp_path / "out.csv"
    code = main(["run", "--algo", "cocob", "--data", str(libsvm_file),
                 "--format", "libsvm", "--task", "reg", "--grid", "0.1,1",
                 "--out", str(out)])
    assert code == 1
    assert "parameter-free" in capsys.readouterr().err


def test_missing_file_is_one_line_error(tmp_path, capsys):
    code = main(["run", "--algo", "sgd", "--data", str(tmp_path / "nope.libsvm"),
                 "--format", "libsvm", "--task", "reg",
                 "--out", str(tmp_path / "out.csv")])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_csv_dataset_via_target_column(tmp_path):
    rng = np.random.default_rng(5)
    lines = ["f1,f2,label"]
    for _ in range(40):
        lines.append(f"{rng.normal()},{rng.normal()},{rng.normal()}")
    data = tmp_path / "data.csv"
    data.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out.csv"
    code = main(["run", "--algo", "coin", "--data", str(data), "--format", "csv",
                 "--task", "reg", "--epochs", "1", "--reps", "1",
                 "--target-col", "label", "--out", str(out)])
    assert code == 0
    assert len(read_csv(out)) == 2  # one epoch row + one mean row
