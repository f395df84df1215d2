import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dbbwell as d
from dbbwell.cli import main
from dbbwell.cli_io import (
    ConfigError,
    emit_report_csv,
    emit_run_csv,
    parse_config,
    read_report_csv,
)


class TestParseConfig:
    def test_empty_document_gives_paper_defaults(self):
        spec = parse_config("")
        cfg = spec.config
        assert cfg.half_width == 10.0
        assert cfg.n_interior == 199
        assert cfg.mass == 1.0
        assert cfg.resolved_dt() == pytest.approx(0.0025)
        assert cfg.collapse_threshold == 0.95
        assert len(cfg.detectors) == 1
        det = cfg.detectors[0]
        assert (det.center, det.half_width) == (5.0, 1.0)
        assert (det.coupling, det.dof_count, det.pointer_mass) == (0.01, 1, 1.0)
        assert cfg.r0 == 5.5
        assert spec.csv_precision == 12

    def test_scan_kind_defaults_to_ten_detector_array(self):
        spec = parse_config("", kind="scan")
        centers = [det.center for det in spec.config.detectors]
        assert centers == pytest.approx([-9, -7, -5, -3, -1, 1, 3, 5, 7, 9])

    def test_nsweep_kind_defaults_to_central_detector(self):
        spec = parse_config("", kind="n_sweep")
        assert [det.center for det in spec.config.detectors] == [0.0]
        assert spec.config.r0 == 0.5
        assert spec.n_values == (2, 4, 6, 8, 10)

    def test_threshold_override_propagates(self):
        spec = parse_config("collapse_threshold = 0.75\n")
        assert spec.config.collapse_threshold == 0.75

    def test_threshold_out_of_range_names_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("# comment\ncollapse_threshold = 1.5\n")
        assert err.value.line == 2
        assert "collapse_threshold" in str(err.value)

    def test_unknown_key_rejected_with_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("mass = 1.0\nwibble = 3\n")
        assert err.value.line == 2
        assert "wibble" in str(err.value)

    def test_type_error_names_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("max_steps = soon\n")
        assert err.value.line == 1

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config("mass = 1.0\nmass = 2.0\n")
        assert err.value.line == 2

    def test_missing_equals_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("just some words\n")

    def test_r0_outside_well_anchors_to_r0_line(self):
        with pytest.raises(ConfigError) as err:
            parse_config("r0 = 25\n")
        assert err.value.line == 1

    def test_detector_list_and_comments(self):
        text = """
        # two detectors
        detector_centers = 0.0, 1.0   # overlapping pair
        detector_half_width = 1.0
        dof_count = 2
        """
        spec = parse_config("\n".join(l.strip() for l in text.splitlines()))
        assert [det.center for det in spec.config.detectors] == [0.0, 1.0]
        assert all(det.dof_count == 2 for det in spec.config.detectors)

    def test_decreasing_centers_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("detector_centers = 1.0, 0.0\n")

    @given(st.floats(0.05, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_valid_thresholds_round_trip(self, threshold):
        spec = parse_config(f"collapse_threshold = {threshold!r}\n")
        assert spec.config.collapse_threshold == threshold


@pytest.fixture(scope="module")
def short_run():
    return d.run(d.SimConfig(max_steps=2500, record_every=1000))


class TestEmitRunCsv:
    def test_row_count_follows_stride_arithmetic(self, short_run, tmp_path):
        path = tmp_path / "run.csv"
        emit_run_csv(short_run.series, short_run, path)
        lines = path.read_text().splitlines()
        # header + step 0 + floor(2500/1000) stride rows + terminal row
        assert len(lines) == 1 + 1 + 2 + 1
        assert lines[0] == "step,t,r,y_0,P_0"

    def test_byte_determinism(self, short_run, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_run_csv(short_run.series, short_run, a)
        emit_run_csv(short_run.series, short_run, b)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes().endswith(b"\n")

    def test_no_detection_run_has_single_row_block(self, tmp_path):
        out = d.run(d.SimConfig(r0=-5.0))
        path = tmp_path / "nd.csv"
        emit_run_csv(out.series, out, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2  # header + the single recorded row
        assert lines[1].startswith("0,")


class TestReportCsv:
    @pytest.fixture()
    def report(self):
        return d.EnsembleReport(
            p=np.array([0.3, 0.45, 0.05]),
            p0=np.array([0.25, 0.5, 0.05]),
            p_no_detection=0.1, p_absorbed=0.06, p_timeout=0.04,
        )

    @pytest.fixture()
    def dets(self):
        return d.DetectorArray([
            d.Detector(center=-3.0), d.Detector(center=0.0),
            d.Detector(center=3.0),
        ])

    def test_round_trip_is_exact_at_precision(self, report, dets, tmp_path):
        path = tmp_path / "report.csv"
        emit_report_csv(report, dets, path)
        parsed, x0 = read_report_csv(path)
        assert np.allclose(parsed.p, report.p, rtol=1e-11)
        assert np.allclose(parsed.p0, report.p0, rtol=1e-11)
        assert parsed.p_no_detection == pytest.approx(0.1, rel=1e-11)
        assert list(x0) == [-3.0, 0.0, 3.0]
        # re-emitting the parsed report reproduces the bytes
        path2 = tmp_path / "again.csv"
        emit_report_csv(parsed, dets, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_summary_row_is_schema(self, report, dets, tmp_path):
        path = tmp_path / "report.csv"
        emit_report_csv(report, dets, path)
        last = path.read_text().splitlines()[-1]
        assert last.startswith("summary,")

    def test_rejects_foreign_csv(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_report_csv(path)


class TestCliEndToEnd:
    def test_run_subcommand_writes_outputs(self, tmp_path, capsys):
        config = tmp_path / "exp.conf"
        config.write_text("max_steps = 2000\nrecord_every = 500\n")
        code = main(["run", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 0
        assert (tmp_path / "o" / "single_run.csv").exists()
        assert (tmp_path / "o" / "single_detectors.csv").exists()
        assert "timeout" in capsys.readouterr().out

    def test_validation_failure_exits_one(self, tmp_path, capsys):
        config = tmp_path / "exp.conf"
        config.write_text("collapse_threshold = 7\n")
        code = main(["run", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "line 1" in capsys.readouterr().err

    def test_nsweep_non_collapse_exits_two(self, tmp_path, capsys):
        config = tmp_path / "exp.conf"
        config.write_text("max_steps = 200\nn_values = 2\n")
        code = main(["nsweep", "--config", str(config),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert "did not collapse" in capsys.readouterr().err

    def test_baseline_subcommand(self, tmp_path):
        code = main(["baseline", "--out", str(tmp_path / "o")])
        assert code == 0
        lines = (tmp_path / "o" / "baseline.csv").read_text().splitlines()
        assert lines[0] == "detector_index,x0,p_n0"
        assert len(lines) == 11

    def test_scan_subcommand_instant_collapse(self, tmp_path, capsys):
        config = tmp_path / "exp.conf"
        config.write_text(
            "detector_centers = 0.0\ndetector_half_width = 10.0\n"
            "scan_stride = 10\nr0 = 0.0\n"
        )
        code = main(["scan", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 0
        report, _ = read_report_csv(tmp_path / "o" / "report.csv")
        assert report.p[0] == pytest.approx(1.0, abs=1e-12)
        assert (tmp_path / "o" / "scan.csv").exists()

    def test_scan_sampling_mode_uses_seed(self, tmp_path):
        config = tmp_path / "exp.conf"
        config.write_text(
            "detector_centers = 0.0\ndetector_half_width = 10.0\n"
            "sample_count = 10\nr0 = 0.0\n"
        )
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["scan", "--config", str(config), "--out", str(out_a),
                     "--seed", "99"]) == 0
        assert main(["scan", "--config", str(config), "--out", str(out_b),
                     "--seed", "99"]) == 0
        assert (out_a / "scan.csv").read_bytes() == (out_b / "scan.csv").read_bytes()

    def test_suite_subcommand_smoke(self, tmp_path):
        config = tmp_path / "exp.conf"
        config.write_text("max_steps = 1000\nrecord_every = 500\n")
        code = main(["suite", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 0
        summary = (tmp_path / "o" / "suite.csv").read_text().splitlines()
        assert len(summary) == 5
        assert (tmp_path / "o" / "suite_overlapping_run.csv").exists()

    def test_record_every_flag_overrides(self, tmp_path):
        config = tmp_path / "exp.conf"
        config.write_text("max_steps = 2000\n")
        code = main(["run", "--config", str(config), "--out", str(tmp_path / "o"),
                     "--record-every", "400"])
        assert code == 0
        lines = (tmp_path / "o" / "single_run.csv").read_text().splitlines()
        assert len(lines) == 1 + 6  # header + steps 0,400,...,2000
