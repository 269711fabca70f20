import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pushproc import errors
from pushproc.raster import (
    BandId,
    CalibrationTable,
    RawScene,
    extract_tile,
    line_stats,
    load_calibration,
    load_raw,
    save_calibration,
    save_raw,
    scene_stats,
)

from conftest import make_scene


class TestL3RawRoundtrip:
    @pytest.mark.parametrize("bit_depth", [8, 16])
    def test_roundtrip_identity(self, tmp_path, bit_depth):
        scene = make_scene(seed=bit_depth, width=17, lines=9, bit_depth=bit_depth)
        path = tmp_path / "scene.l3raw"
        save_raw(scene, path)
        loaded = load_raw(path)
        assert loaded.bit_depth == bit_depth
        np.testing.assert_array_equal(loaded.planes, scene.planes)
        np.testing.assert_array_equal(loaded.line_times, scene.line_times)

    def test_save_is_deterministic(self, tmp_path, small_scene):
        p1, p2 = tmp_path / "a.l3raw", tmp_path / "b.l3raw"
        save_raw(small_scene, p1)
        save_raw(small_scene, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_file_size_arithmetic(self, tmp_path):
        scene = RawScene(np.zeros((4, 1, 1), dtype=np.uint16), np.array([0.0]), 8)
        path = tmp_path / "tiny.l3raw"
        save_raw(scene, path)
        assert path.stat().st_size == 20 + 8 * 1 + 4 * 1 * 1 * 1

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), width=st.integers(1, 24), lines=st.integers(1, 24))
    def test_roundtrip_property(self, tmp_path_factory, seed, width, lines):
        scene = make_scene(seed=seed, width=width, lines=lines)
        path = tmp_path_factory.mktemp("rt") / "s.l3raw"
        save_raw(scene, path)
        loaded = load_raw(path)
        np.testing.assert_array_equal(loaded.planes, scene.planes)
        np.testing.assert_array_equal(loaded.line_times, scene.line_times)


class TestL3RawErrors:
    def test_bad_magic(self, tmp_path, small_scene):
        path = tmp_path / "bad.l3raw"
        save_raw(small_scene, path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(errors.BadMagic):
            load_raw(path)

    def test_truncated_payload(self, tmp_path, small_scene):
        path = tmp_path / "short.l3raw"
        save_raw(small_scene, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-small_scene.width])  # drop part of the last line
        with pytest.raises(errors.Truncated):
            load_raw(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "stub.l3raw"
        path.write_bytes(b"L3RW\x01")
        with pytest.raises(errors.Truncated):
            load_raw(path)

    def test_header_invalid_bit_depth(self, tmp_path, small_scene):
        path = tmp_path / "depth.l3raw"
        save_raw(small_scene, path)
        blob = bytearray(path.read_bytes())
        blob[14] = 12  # bit_depth byte
        path.write_bytes(bytes(blob))
        with pytest.raises(errors.HeaderInvalid):
            load_raw(path)

    def test_dn_range_violation_refused_before_write(self, tmp_path):
        planes = np.zeros((4, 2, 2), dtype=np.uint16)
        planes[0, 0, 0] = 300  # exceeds 8-bit range
        scene = RawScene(planes, np.array([0.0, 1.0]), 8)
        path = tmp_path / "refuse.l3raw"
        with pytest.raises(errors.HeaderInvalid):
            save_raw(scene, path)
        assert not path.exists()

    def test_non_monotonic_times_refused(self, tmp_path):
        scene = make_scene(width=4, lines=3)
        scene.line_times[2] = scene.line_times[0]
        with pytest.raises(errors.HeaderInvalid):
            save_raw(scene, tmp_path / "times.l3raw")

    def test_missing_file(self, tmp_path):
        with pytest.raises(errors.IoFailure):
            load_raw(tmp_path / "nope.l3raw")


class TestExtractTile:
    def test_full_plane(self, small_scene):
        tile = extract_tile(small_scene, BandId.GREEN, 0, 0, small_scene.width, small_scene.lines)
        np.testing.assert_array_equal(tile, small_scene.band(BandId.GREEN))

    def test_zero_width_rejected(self, small_scene):
        with pytest.raises(errors.OutOfBounds):
            extract_tile(small_scene, BandId.RED, 0, 0, 0, 4)

    def test_out_of_bounds_rejected(self, small_scene):
        with pytest.raises(errors.OutOfBounds):
            extract_tile(small_scene, BandId.RED, small_scene.width - 2, 0, 4, 4)

    def test_matches_direct_indexing(self):
        # checkerboard oracle: tile contents equal brute-force indexing
        scene = make_scene(seed=5, width=16, lines=12)
        xx, yy = np.meshgrid(np.arange(16), np.arange(12))
        scene.planes[0] = ((xx // 2 + yy // 2) % 2 * 200).astype(np.uint16)
        tile = extract_tile(scene, BandId.BLUE, 3, 2, 5, 7)
        expected = np.empty((7, 5), dtype=np.uint16)
        for dy in range(7):
            for dx in range(5):
                expected[dy, dx] = scene.planes[0][2 + dy, 3 + dx]
        np.testing.assert_array_equal(tile, expected)

    def test_never_aliases(self, small_scene):
        tile = extract_tile(small_scene, BandId.NIR, 0, 0, 4, 4)
        before = small_scene.band(BandId.NIR).copy()
        tile[:] = 0
        np.testing.assert_array_equal(small_scene.band(BandId.NIR), before)


class TestLineStats:
    def test_constant_line(self):
        scene = make_scene(width=8, lines=2)
        scene.planes[2, 0, :] = 50
        assert line_stats(scene, BandId.RED, 0) == (50.0, 0.0)

    def test_two_point_population_std(self):
        scene = make_scene(width=2, lines=1)
        scene.planes[1, 0] = [0, 100]
        mean, std = line_stats(scene, BandId.GREEN, 0)
        assert mean == 50.0
        assert std == 50.0  # population, not sample

    def test_matches_two_pass_oracle(self, rng):
        scene = make_scene(seed=9, width=101, lines=3)
        mean, std = line_stats(scene, BandId.NIR, 1)
        row = [float(v) for v in scene.planes[3, 1]]
        m = sum(row) / len(row)
        var = sum((v - m) ** 2 for v in row) / len(row)
        assert mean == pytest.approx(m, rel=1e-9)
        assert std == pytest.approx(var ** 0.5, rel=1e-9)

    def test_line_out_of_range(self, small_scene):
        with pytest.raises(errors.OutOfBounds):
            line_stats(small_scene, BandId.RED, small_scene.lines)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 1000))
    def test_std_invariant_under_reversal(self, seed):
        scene = make_scene(seed=seed, width=33, lines=2)
        _, std = line_stats(scene, BandId.BLUE, 0)
        reversed_scene = make_scene(seed=seed, width=33, lines=2)
        reversed_scene.planes[0, 0] = reversed_scene.planes[0, 0][::-1]
        _, std_rev = line_stats(reversed_scene, BandId.BLUE, 0)
        assert std == pytest.approx(std_rev, rel=1e-12)

    def test_scene_stats_region(self, small_scene):
        stats = scene_stats(small_scene, BandId.RED, (slice(0, 4), slice(0, 8)))
        sub = small_scene.band(BandId.RED)[:4, :8].astype(float)
        assert stats.region_mean == pytest.approx(sub.mean())
        assert stats.region_std == pytest.approx(sub.std())
        assert stats.line_mean.shape == (small_scene.lines,)


class TestCalibrationIo:
    def test_roundtrip(self, tmp_path, rng):
        table = CalibrationTable(
            response=1.0 + rng.uniform(0, 1, (4, 7)),
            dark=rng.uniform(0, 10, (4, 7)),
        )
        path = tmp_path / "calib.json"
        save_calibration(table, path)
        loaded = load_calibration(path)
        np.testing.assert_allclose(loaded.response, table.response)
        np.testing.assert_allclose(loaded.dark, table.dark)

    def test_nonpositive_response_rejected(self):
        table = CalibrationTable(response=np.zeros((4, 3)), dark=np.zeros((4, 3)))
        with pytest.raises(errors.NonPositiveResponse):
            table.validate()

    def test_width_mismatch(self):
        table = CalibrationTable(response=np.ones((4, 3)), dark=np.zeros((4, 3)))
        with pytest.raises(errors.WidthMismatch):
            table.validate(scene_width=5)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"bands": {"blue": {}}}')
        with pytest.raises(errors.HeaderInvalid):
            load_calibration(path)
