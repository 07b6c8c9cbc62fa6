import json

import numpy as np
import pytest

from monokin.core import RunConfig, validate_config
from monokin.io import (atomic_write_text, read_csv_columns, write_csv,
                        write_diagnostics, write_eas_snapshot, write_metadata,
                        write_profile_snapshot, write_sweep_report)


class TestAtomicWrite:
    def test_writes_and_leaves_no_temp(self, tmp_path):
        p = tmp_path / "a" / "b.txt"
        atomic_write_text(p, "hello\n")
        assert p.read_text() == "hello\n"
        assert list(p.parent.glob(".tmp-*")) == []

    def test_overwrite_replaces_content(self, tmp_path):
        p = tmp_path / "f.txt"
        atomic_write_text(p, "one\n")
        atomic_write_text(p, "two\n")
        assert p.read_text() == "two\n"


class TestCsvRoundTrip:
    def test_columns_round_trip(self, tmp_path):
        p = tmp_path / "t.csv"
        x = np.linspace(0, 1, 7)
        y = np.sin(x)
        write_csv(p, ["x", "y"], zip(x, y))
        cols = read_csv_columns(p)
        assert np.allclose(cols["x"], x, atol=1e-12)
        assert np.allclose(cols["y"], y, atol=1e-12)

    def test_idempotent_byte_identical(self, tmp_path):
        p = tmp_path / "t.csv"
        rows = [(0.1, 2.0 / 3.0), (0.2, np.pi)]
        write_csv(p, ["a", "b"], rows)
        first = p.read_bytes()
        write_csv(p, ["a", "b"], rows)
        assert p.read_bytes() == first

    def test_blank_fields_read_as_nan(self, tmp_path):
        p = tmp_path / "d"
        p.mkdir()
        write_diagnostics(p, [{"t": 0.0, "mass": 1.0},
                              {"t": 0.5, "mass": 1.0, "fisher": 0.3}])
        cols = read_csv_columns(p / "diagnostics.csv")
        assert np.isnan(cols["fisher"][0])
        assert cols["fisher"][1] == pytest.approx(0.3)
        assert np.isnan(cols["w1_rho"]).all()


class TestSnapshots:
    def test_eas_snapshot_name_and_content(self, tmp_path):
        x = np.linspace(0, 1, 4, endpoint=False)
        path = write_eas_snapshot(tmp_path, 0.25, x, np.ones(4),
                                  np.zeros(4), np.ones(4))
        assert path.name == "eas_t0.2500.csv"
        cols = read_csv_columns(path)
        assert np.allclose(cols["rho"], 1.0)

    def test_profile_snapshot_with_sidecar(self, tmp_path):
        cfg = validate_config(RunConfig(scenario="profile", nx=8, nxi=6,
                                        xi_max=3.0, t_final=0.1))
        pg = cfg.phase_grid()
        g = np.arange(48, dtype=float).reshape(8, 6)
        path = write_profile_snapshot(tmp_path, 0.1, g, pg)
        data = np.loadtxt(path, delimiter=",")
        assert np.allclose(data, g, atol=1e-10)
        meta = json.loads((tmp_path / "g_t0.1000.json").read_text())
        assert meta["nx"] == 8 and meta["nxi"] == 6
        assert meta["xi_max"] == 3.0

    def test_metadata_round_trip(self, tmp_path):
        cfg = validate_config(RunConfig(scenario="eas", nx=16, nxi=4,
                                        xi_max=4.0, t_final=0.5))
        path = write_metadata(tmp_path, cfg, {"status": "done"})
        meta = json.loads(path.read_text())
        assert meta["scenario"] == "eas"
        assert meta["nx"] == 16
        assert meta["status"] == "done"


class TestSweepReport:
    def test_footer_skipped_by_reader(self, tmp_path):
        p = tmp_path / "sweep.csv"
        rows = [{"eps": 0.2, "err": 0.04}, {"eps": 0.1, "err": 0.01}]
        slopes = {"err": {"slope": 2.0, "floor": 0.0, "r2": 1.0}}
        write_sweep_report(p, ["eps", "err"], rows, slopes)
        cols = read_csv_columns(p)
        assert len(cols["eps"]) == 2
        text = p.read_text()
        assert "# slope,err,2" in text
