import cmath
import json

import numpy as np
import pytest

import capshock
from capshock import formats


def test_params_and_profile():
    p = capshock.GasParams(5 / 3, 0.1, 0.2)
    assert p.d_star == pytest.approx(0.258539050767453, abs=1e-12)
    prof = capshock.solve_profile(p)
    assert prof.classification == "monotone"
    v = np.asarray(prof.v)
    assert v[0] == pytest.approx(1.0, abs=1e-6)
    assert v[-1] == pytest.approx(0.1, abs=1e-6)
    assert capshock.validate(prof).passed
    with pytest.raises(capshock.DomainError):
        capshock.GasParams(1.4, 1.5, 0.2)


def test_evans_conjugate_symmetry_and_winding():
    prof = capshock.solve_profile(capshock.GasParams(1.4, 0.45, 0.45))
    up = capshock.evans(prof, 2 + 3j)
    down = capshock.evans(prof, 2 - 3j)
    assert abs(down - up.conjugate()) <= 1e-8 * abs(up)
    w, lambdas, values = capshock.winding(prof)
    assert w == 0
    assert len(lambdas) == len(values) == 138
    total = sum(cmath.phase(b / a) for a, b in zip(values, values[1:] + values[:1]))
    assert abs(total) < 1e-6


def test_emitted_files_read_back(tmp_path):
    written = capshock.emit_figure_data(1.4, 0.6, 0.45, tmp_path)
    assert {p.name for p in written} == {"profile.dat", "phase.dat", "contour.dat",
                                         "real_scan.dat", "record.jsonl"}
    prof = formats.read_table(tmp_path / "profile.dat", "profile")
    assert prof.meta["classification"] in ("monotone", "oscillatory")
    assert np.all(np.diff(prof["x"]) > 0)
    phase = formats.read_table(tmp_path / "phase.dat", "phase_portrait")
    assert phase.data.shape[1] == 3
    contour = formats.read_table(tmp_path / "contour.dat", "contour")
    assert int(contour.meta["winding"]) == 0
    record = formats.read_record(tmp_path / "record.jsonl")
    assert record["winding"] == 0 and record["v_plus"] == 0.6


def test_readers_pin_the_version(tmp_path):
    capshock.emit_figure_data(1.4, 0.6, 0.45, tmp_path)
    text = (tmp_path / "profile.dat").read_text().replace(" v1\n", " v2\n", 1)
    (tmp_path / "future.dat").write_text(text)
    with pytest.raises(formats.FormatError):
        formats.read_table(tmp_path / "future.dat", "profile")
    with pytest.raises(formats.FormatError):
        formats.read_table(tmp_path / "profile.dat", "contour")
    record = (tmp_path / "record.jsonl").read_text().replace('"version":1', '"version":2', 1)
    with pytest.raises(formats.FormatError):
        formats.parse_record(record)


def test_run_point_record():
    rec = formats.parse_record(capshock.run_point(1.4, 0.8, 0.25))
    assert rec["failure_stage"] == ""
    assert rec["winding"] == 0
    assert rec["C_within_gamma"]
    json.dumps(rec)


def test_summary_reader(tmp_path):
    path = tmp_path / "summary.tsv"
    path.write_text("# capshock summary v1\n" + "\t".join(formats.SUMMARY_COLUMNS) + "\n"
                    "0.4500\t0.4500\t1.4\toscillatory\t0\t1.0e-02\t0.5\tNA\tyes\t-\n")
    rows = formats.read_summary(path)
    assert rows[0]["winding"] == "0" and rows[0]["pass"] == "yes"
