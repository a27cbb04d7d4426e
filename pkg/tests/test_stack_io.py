"""On-disk format round-trips and validation."""
import numpy as np
import pytest
from PIL import Image

from fieldseg.errors import DataError
from fieldseg.raster import MultispectralStack, RgbSnapshot
from fieldseg.stack_io import (
    load_exclusion_list,
    read_label_raster,
    read_snapshot_png,
    read_stack_msst,
    read_stack_tiff_dir,
    write_label_raster,
    write_snapshot_png,
    write_stack_msst,
)


def sample_stack(t=3, h=4, w=5, c=2, tile_id="t"):
    rng = np.random.default_rng(0)
    data = rng.uniform(0, 1, (t, h, w, c)).astype(np.float32)
    return MultispectralStack(data=data, band_names=[f"B{i}" for i in range(c)],
                              tile_id=tile_id)


class TestMsst:
    def test_round_trip(self, tmp_path):
        stack = sample_stack()
        path = tmp_path / "t.msst"
        write_stack_msst(stack, path)
        loaded = read_stack_msst(path)
        assert loaded.tile_id == "t"
        assert loaded.band_names == stack.band_names
        assert np.array_equal(loaded.data, stack.data)

    def test_directory_concatenates_sorted(self, tmp_path):
        d = tmp_path / "tile"
        d.mkdir()
        s1 = sample_stack(t=2, tile_id="a")
        s2 = MultispectralStack(data=s1.data[:1] + 0.1, band_names=s1.band_names,
                                tile_id="b")
        # write out of order; sorted filename order must win
        write_stack_msst(s2, d / "part_2.msst")
        write_stack_msst(s1, d / "part_1.msst")
        loaded = read_stack_msst(d)
        assert loaded.shape[0] == 3
        assert np.array_equal(loaded.data[:2], s1.data)
        assert np.array_equal(loaded.data[2:], s2.data)
        assert loaded.tile_id == "tile"

    def test_directory_rejects_mismatched_parts(self, tmp_path):
        d = tmp_path / "tile"
        d.mkdir()
        write_stack_msst(sample_stack(h=4), d / "a.msst")
        write_stack_msst(sample_stack(h=5), d / "b.msst")
        with pytest.raises(DataError, match="do not match"):
            read_stack_msst(d)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.msst"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(DataError, match="magic"):
            read_stack_msst(path)

    def test_truncated_body(self, tmp_path):
        path = tmp_path / "t.msst"
        write_stack_msst(sample_stack(), path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(DataError, match="body"):
            read_stack_msst(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_stack_msst(tmp_path / "nope.msst")

    def test_empty_directory(self, tmp_path):
        d = tmp_path / "empty"
        d.mkdir()
        with pytest.raises(DataError):
            read_stack_msst(d)


class TestSnapshotPng:
    def test_round_trip_with_provenance(self, tmp_path):
        pixels = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3)
        snap = RgbSnapshot(pixels=pixels, source_timestep=7, tile_id="tile_9")
        path = tmp_path / "s.png"
        write_snapshot_png(snap, path)
        loaded = read_snapshot_png(path)
        assert np.array_equal(loaded.pixels, pixels)
        assert loaded.source_timestep == 7
        assert loaded.tile_id == "tile_9"

    def test_plain_png_defaults(self, tmp_path):
        path = tmp_path / "plain.png"
        Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(path)
        loaded = read_snapshot_png(path)
        assert loaded.tile_id == "plain"
        assert loaded.source_timestep == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_snapshot_png(tmp_path / "nope.png")

    def test_corrupt_file(self, tmp_path):
        path = tmp_path / "bad.png"
        path.write_bytes(b"\x89PNG\r\n\x1a\nnot really a png")
        with pytest.raises(DataError):
            read_snapshot_png(path)


class TestLabelRaster:
    def test_round_trip(self, tmp_path):
        labels = np.array([[0, 1], [2, 2]], dtype=np.int32)
        path = tmp_path / "t.npy"
        write_label_raster(labels, path, legend={"1": "corn", "2": "soy"})
        assert np.array_equal(read_label_raster(path), labels)
        assert (tmp_path / "t.legend.json").exists()

    def test_rejects_negative(self, tmp_path):
        with pytest.raises(DataError):
            write_label_raster(np.array([[-1]]), tmp_path / "x.npy")

    def test_rejects_float(self, tmp_path):
        path = tmp_path / "f.npy"
        np.save(path, np.zeros((2, 2)))
        with pytest.raises(DataError):
            read_label_raster(path)

    def test_missing(self, tmp_path):
        with pytest.raises(DataError):
            read_label_raster(tmp_path / "none.npy")


class TestExclusionList:
    def test_parses_lines(self, tmp_path):
        path = tmp_path / "exclusions.txt"
        path.write_text("tile_a\n\n  tile_b  \n")
        assert load_exclusion_list(path) == frozenset({"tile_a", "tile_b"})

    def test_missing_is_empty(self, tmp_path):
        assert load_exclusion_list(tmp_path / "none.txt") == frozenset()


class TestTiffAdapter:
    def test_reads_single_band_tiffs(self, tmp_path):
        d = tmp_path / "scene"
        d.mkdir()
        rng = np.random.default_rng(1)
        frames = [rng.uniform(0, 1, (3, 4)).astype(np.float32) for _ in range(2)]
        for i, frame in enumerate(frames):
            Image.fromarray(frame).save(d / f"t{i}.tif")
        stack = read_stack_tiff_dir(d, ["B0"])
        assert stack.shape == (2, 3, 4, 1)
        assert np.allclose(stack.data[0, :, :, 0], frames[0])

    def test_band_count_mismatch(self, tmp_path):
        d = tmp_path / "scene"
        d.mkdir()
        Image.fromarray(np.zeros((2, 2), dtype=np.float32)).save(d / "a.tif")
        with pytest.raises(DataError):
            read_stack_tiff_dir(d, ["B0", "B1"])

    def test_empty_dir(self, tmp_path):
        d = tmp_path / "scene"
        d.mkdir()
        with pytest.raises(DataError):
            read_stack_tiff_dir(d, ["B0"])
