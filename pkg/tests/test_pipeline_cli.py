import json

import numpy as np
import pytest

from pushproc import errors
from pushproc.cli import main
from pushproc.pipeline import PipelineConfig, QualityReport, quicklook, report_timing, run_pipeline
from pushproc.raster import BandId, RawScene, load_raw, save_calibration, save_raw
from pushproc.synthscene import SynthSpec, generate
from pushproc.georef.metadata import save_metadata

WARP = {"order": 2, "coeff_dx": [1.5, -2.0, 1.0, 0.5, -0.5, 0.3],
        "coeff_dy": [-1.0, 1.5, -2.0, 0.3, 0.8, -0.5]}


@pytest.fixture(scope="module")
def synth_inputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("inputs")
    spec = SynthSpec(seed=21, width=512, lines=512, texture="urban-blocks",
                     vignette_falloff=40.0, dark_level=5.0,
                     band_warp={"nir": WARP})
    raw, truth = generate(spec)
    save_raw(raw, out / "scene.l3raw")
    save_calibration(truth.calib, out / "calib.json")
    save_metadata(truth.metadata, out / "metadata.json")
    (out / "spec.json").write_text(json.dumps(spec.to_dict()))
    return out


def base_config(synth_inputs, out_dir, **kw):
    cfg = PipelineConfig(
        raw_path=str(synth_inputs / "scene.l3raw"),
        calib_path=str(synth_inputs / "calib.json"),
        meta_path=str(synth_inputs / "metadata.json"),
        out_dir=str(out_dir),
    )
    for key, value in kw.items():
        setattr(cfg, key, value)
    return cfg


class TestRunPipeline:
    def test_full_run_products_and_metrics(self, synth_inputs, tmp_path):
        report = run_pipeline(base_config(synth_inputs, tmp_path / "run"))
        assert set(report.timing) == {"vignetting", "coreg", "georef", "total"}
        assert report.stages["vignetting"]["after"]["red"]["falloff_pct"] < \
            report.stages["vignetting"]["before"]["red"]["falloff_pct"]
        nir = report.stages["coreg"]["bands"]["nir"]
        assert nir["residual_rms_px"] <= 0.5
        assert report.stages["georef"]["mean_gsd_m"] == pytest.approx(15.0, rel=0.05)
        for name in ("corrected.l3raw", "report.json", "grid.json", "grid.wld"):
            assert (tmp_path / "run" / name).exists()
        # total >= sum of stage times (small overhead allowance)
        stage_sum = sum(v for k, v in report.timing.items() if k != "total")
        assert report.timing["total"] >= 0.99 * stage_sum

    def test_vignetting_only_identity_calib(self, tmp_path):
        scene, truth = generate(SynthSpec(seed=22, width=128, lines=128,
                                          texture="checkerboard", vignette_falloff=0.0))
        raw_path = tmp_path / "s.l3raw"
        save_raw(scene, raw_path)
        calib_path = tmp_path / "c.json"
        save_calibration(truth.calib, calib_path)  # identity (falloff 0, dark 0)
        cfg = PipelineConfig(raw_path=str(raw_path), calib_path=str(calib_path),
                             out_dir=str(tmp_path / "out"), coreg=False, georef=False)
        report = run_pipeline(cfg)
        out_scene = load_raw(tmp_path / "out" / "corrected.l3raw")
        np.testing.assert_array_equal(out_scene.planes, scene.planes)
        before = report.stages["vignetting"]["before"]["red"]["falloff_pct"]
        after = report.stages["vignetting"]["after"]["red"]["falloff_pct"]
        assert after == pytest.approx(before, abs=1e-9)

    def test_stage_isolation_matches_manual_composition(self, synth_inputs, tmp_path):
        from pushproc import radiometry
        from pushproc.raster import load_calibration

        cfg = base_config(synth_inputs, tmp_path / "vign_only",
                          coreg=False, georef=False)
        run_pipeline(cfg)
        pipeline_scene = load_raw(tmp_path / "vign_only" / "corrected.l3raw")
        manual = radiometry.correct_vignetting(
            load_raw(synth_inputs / "scene.l3raw"),
            load_calibration(synth_inputs / "calib.json"),
        )
        np.testing.assert_array_equal(pipeline_scene.planes, manual.planes)

    def test_truth_comparison_adds_error_stats(self, tmp_path):
        from pushproc.synthscene import save_truth

        spec = SynthSpec(seed=25, width=256, lines=128, texture="flat",
                         vignette_falloff=0.0, grid_step=64)
        raw, truth = generate(spec)
        save_raw(raw, tmp_path / "scene.l3raw")
        save_metadata(truth.metadata, tmp_path / "metadata.json")
        save_truth(truth, tmp_path / "truth.json")
        cfg = PipelineConfig(
            raw_path=str(tmp_path / "scene.l3raw"),
            meta_path=str(tmp_path / "metadata.json"),
            truth_path=str(tmp_path / "truth.json"),
            out_dir=str(tmp_path / "out"),
            vignetting=False, coreg=False, grid_step=64,
        )
        report = run_pipeline(cfg)
        stats = report.stages["georef"]["error_stats"]
        assert abs(stats["rms_total_km"]) < 1e-6  # exact metadata, no bias

    def test_missing_metadata_fails_georef_stage(self, synth_inputs, tmp_path):
        cfg = base_config(synth_inputs, tmp_path / "nometa")
        cfg.meta_path = None
        with pytest.raises(errors.StageFailure) as err:
            run_pipeline(cfg)
        assert err.value.stage == "georef"

    def test_no_stages_invalid(self, synth_inputs, tmp_path):
        cfg = base_config(synth_inputs, tmp_path / "none",
                          vignetting=False, coreg=False, georef=False)
        with pytest.raises(errors.StageFailure) as err:
            run_pipeline(cfg)
        assert err.value.stage == "input"

    def test_determinism_and_worker_independence(self, synth_inputs, tmp_path):
        def run(workers, out):
            cfg = base_config(synth_inputs, out, workers=workers)
            run_pipeline(cfg)
            report = json.loads((out / "report.json").read_text())
            report.pop("timing")
            report.pop("outputs")  # paths differ between run dirs by design
            return ((out / "corrected.l3raw").read_bytes(),
                    (out / "grid.json").read_bytes(), report)

        first = run(1, tmp_path / "d1")
        second = run(1, tmp_path / "d2")
        threaded = run(4, tmp_path / "d4")
        assert first == second == threaded


class TestQuicklook:
    def test_constant_scene_constant_gray(self, tmp_path):
        planes = np.full((4, 8, 8), 120, dtype=np.uint16)
        scene = RawScene(planes, np.arange(8, dtype=float), 8)
        path = tmp_path / "gray.pgm"
        quicklook(scene, [BandId.RED], path)
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n8 8\n255\n")
        body = blob.split(b"255\n", 1)[1]
        assert len(set(body)) == 1

    def test_three_band_ppm(self, tmp_path):
        scene, _ = generate(SynthSpec(seed=23, width=32, lines=16, texture="checkerboard"))
        path = tmp_path / "rgb.ppm"
        quicklook(scene, [BandId.RED, BandId.GREEN, BandId.BLUE], path)
        blob = path.read_bytes()
        assert blob.startswith(b"P6\n32 16\n255\n")
        assert len(blob.split(b"255\n", 1)[1]) == 32 * 16 * 3

    def test_bad_band_selection(self, tmp_path):
        scene, _ = generate(SynthSpec(seed=24, width=16, lines=16, texture="flat"))
        with pytest.raises(errors.BadBandSelection):
            quicklook(scene, [BandId.RED, BandId.GREEN], tmp_path / "x.ppm")

    def test_percentile_stretch_on_known_histogram(self, tmp_path):
        # 1000 samples 0..999: 2nd percentile ~ 20, 98th ~ 979; values at or
        # below the low cut map to 0 and at or above the high cut to 255
        values = np.arange(1000, dtype=np.uint16).reshape(25, 40)
        planes = np.stack([values] * 4)
        scene = RawScene(planes, np.arange(25, dtype=float), 16)
        path = tmp_path / "hist.pgm"
        quicklook(scene, [BandId.BLUE], path)
        body = np.frombuffer(path.read_bytes().split(b"255\n", 1)[1], dtype=np.uint8)
        lo = float(np.percentile(values, 2))
        hi = float(np.percentile(values, 98))
        assert body[values.ravel() <= lo].max(initial=0) == 0
        assert body[values.ravel() >= hi].min(initial=255) == 255
        mid_idx = 500
        expected_mid = round((500 - lo) / (hi - lo) * 255)
        assert abs(int(body[mid_idx]) - expected_mid) <= 1


class TestReportTiming:
    def test_breakdown_and_flag(self):
        report = QualityReport(timing={"vignetting": 10.0, "coreg": 30.0,
                                       "georef": 10.0, "total": 50.0})
        text = report_timing(report)
        assert "coreg" in text and "60.0%" in text
        assert "exceeds half" in text

    def test_single_stage_hundred_percent(self):
        report = QualityReport(timing={"vignetting": 4.0, "total": 4.0})
        text = report_timing(report)
        assert "100.0%" in text
        assert "exceeds half" not in text


class TestCli:
    def run_cli(self, *argv):
        return main(list(argv))

    def test_synth_and_preprocess_roundtrip(self, synth_inputs, tmp_path, capsys):
        out = tmp_path / "cli_synth"
        rc = self.run_cli("synth", "--spec", str(synth_inputs / "spec.json"),
                          "--out", str(out))
        assert rc == 0
        assert (out / "scene.l3raw").exists()
        run_dir = tmp_path / "cli_run"
        rc = self.run_cli(
            "preprocess", "--raw", str(out / "scene.l3raw"),
            "--calib", str(out / "calib.json"), "--meta", str(out / "metadata.json"),
            "--out", str(run_dir), "--skip-coreg",
        )
        assert rc == 0
        assert (run_dir / "report.json").exists()
        report = json.loads((run_dir / "report.json").read_text())
        assert "coreg" not in report["stages"]
        rc = self.run_cli("report", "--in", str(run_dir / "report.json"))
        assert rc == 0
        assert "vignetting" in capsys.readouterr().out

    def test_missing_input_exit_2(self, tmp_path, capsys):
        rc = self.run_cli("preprocess", "--raw", str(tmp_path / "ghost.l3raw"),
                          "--out", str(tmp_path / "o"), "--skip-vignetting",
                          "--skip-georef")
        assert rc == 2
        err = json.loads(capsys.readouterr().out.strip().splitlines()[0])
        assert err["error"]["stage"] == "input"

    def test_stage_failure_exit_3_names_stage(self, synth_inputs, tmp_path, capsys):
        # georef without metadata: the error names the georef stage
        rc = self.run_cli("preprocess", "--raw", str(synth_inputs / "scene.l3raw"),
                          "--out", str(tmp_path / "o3"),
                          "--skip-vignetting", "--skip-coreg")
        assert rc == 3
        err = json.loads(capsys.readouterr().out.strip().splitlines()[0])
        assert err["error"]["stage"] == "georef"

    def test_config_file_with_cli_override(self, synth_inputs, tmp_path):
        cfg_doc = {
            "raw_path": str(synth_inputs / "scene.l3raw"),
            "calib_path": str(synth_inputs / "calib.json"),
            "meta_path": str(synth_inputs / "metadata.json"),
            "out_dir": str(tmp_path / "from_file"),
            "coreg": False,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg_doc))
        rc = self.run_cli("preprocess", "--config", str(cfg_path),
                          "--out", str(tmp_path / "overridden"), "--skip-georef")
        assert rc == 0
        assert (tmp_path / "overridden" / "report.json").exists()
        assert not (tmp_path / "from_file").exists()

    def test_bad_spec_exit_2(self, tmp_path, capsys):
        spec_path = tmp_path / "bad_spec.json"
        spec_path.write_text(json.dumps({"texture": "marble"}))
        rc = self.run_cli("synth", "--spec", str(spec_path), "--out", str(tmp_path / "s"))
        assert rc == 2
