import io
import json

import numpy as np
import pytest

from rothe1d import Gaussian1D, GridWavefunction, LCGState, UniformGrid
from rothe1d.formats import (
    append_report_jsonl,
    read_gwf,
    read_lcg,
    write_csv,
    write_gwf,
    write_lcg,
    write_wavefunction_csv,
)
from rothe1d.rothe import RotheStepReport


def _sample_wavefunction():
    grid = UniformGrid(25.0, 128)
    rng = np.random.default_rng(11)
    return GridWavefunction(grid, rng.standard_normal(128) + 1j * rng.standard_normal(128))


def test_gwf_round_trip(tmp_path):
    psi = _sample_wavefunction()
    path = tmp_path / "state.gwf"
    write_gwf(path, psi, t=12.25)
    loaded, t = read_gwf(path)
    assert t == 12.25
    assert loaded.grid == psi.grid
    assert np.array_equal(loaded.values, psi.values)


def test_gwf_layout(tmp_path):
    psi = _sample_wavefunction()
    path = tmp_path / "state.gwf"
    write_gwf(path, psi, t=1.0)
    raw = path.read_bytes()
    assert len(raw) == 32 + 16 * psi.grid.n
    assert raw[:4] == b"GWF1"
    assert np.frombuffer(raw[4:28], dtype="<f8").tolist() == [128.0, 25.0, 1.0]


def test_gwf_bad_magic(tmp_path):
    path = tmp_path / "bad.gwf"
    path.write_bytes(b"NOPE" + bytes(28))
    with pytest.raises(ValueError, match="bad magic"):
        read_gwf(path)


def test_gwf_truncated_payload(tmp_path):
    psi = _sample_wavefunction()
    path = tmp_path / "state.gwf"
    write_gwf(path, psi, t=0.0)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError, match="payload"):
        read_gwf(path)


def test_lcg_round_trip(tmp_path):
    state = LCGState(
        (Gaussian1D(a=0.37745**2), Gaussian1D(a=1.3, b=-0.25, q=4.5, p=0.125)),
        np.array([0.08719 + 0.0j, -0.5 + 0.25j]),
        time_label=7.5,
    )
    path = tmp_path / "state.lcg"
    write_lcg(path, state)
    loaded = read_lcg(path)
    assert loaded.time_label == state.time_label
    assert np.array_equal(loaded.coeffs, state.coeffs)
    assert loaded.gaussians == state.gaussians
    header = path.read_text().splitlines()[0]
    assert header.startswith("LCG1 K=2 t=")


def test_lcg_header_mismatch(tmp_path):
    path = tmp_path / "bad.lcg"
    path.write_text("LCG1 K=3 t=0.0\n1.0 0.0 0.0 0.0 1.0 0.0\n")
    with pytest.raises(ValueError, match="K=3"):
        read_lcg(path)
    path.write_text("not a header\n")
    with pytest.raises(ValueError, match="LCG1"):
        read_lcg(path)


def test_csv_deterministic_and_exact(tmp_path):
    values = np.array([1.0 / 3.0, -2.75e-13, 5.0])
    counts = np.array([1, 2, 3])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(a, ["v", "n"], [values, counts])
    write_csv(b, ["v", "n"], [values, counts])
    assert a.read_bytes() == b.read_bytes()
    rows = a.read_text().splitlines()
    assert rows[0] == "v,n"
    assert [float(r.split(",")[0]) for r in rows[1:]] == values.tolist()


def test_csv_rejects_ragged_columns(tmp_path):
    with pytest.raises(ValueError, match="equal length"):
        write_csv(tmp_path / "x.csv", ["a", "b"], [np.arange(3), np.arange(4)])


def test_wavefunction_csv(tmp_path):
    psi = _sample_wavefunction()
    path = tmp_path / "psi.csv"
    write_wavefunction_csv(path, psi)
    rows = path.read_text().splitlines()
    assert rows[0] == "x,re,im,density"
    assert len(rows) == 1 + psi.grid.n


def test_report_jsonl_schema():
    report = RotheStepReport(
        t=0.125, objective=3e-8, gn_iterations=1, backtracks=0, k_before=4, k_after=5,
        added=((0.5, 0.0, 1.0, -0.5),),
    )
    buffer = io.StringIO()
    append_report_jsonl(buffer, report)
    record = json.loads(buffer.getvalue())
    assert record == {
        "t": 0.125,
        "F": 3e-8,
        "gn_iters": 1,
        "backtracks": 0,
        "K": 5,
        "added": [[0.5, 0.0, 1.0, -0.5]],
    }
