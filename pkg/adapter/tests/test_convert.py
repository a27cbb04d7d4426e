"""Segmentation decoding, row-major re-encoding, and entry building."""
import numpy as np
import pytest

from sam_adapter.convert import (
    bitmap_from_segmentation,
    is_valid_interchange_file,
    mask_entry,
    rle_row_major,
    write_interchange,
)
from sam_adapter.errors import JobError

from conftest import column_major_counts


class TestRleRowMajor:
    def test_empty(self):
        assert rle_row_major(np.zeros((3, 4), bool)) == [12]

    def test_full(self):
        assert rle_row_major(np.ones((2, 2), bool)) == [0, 4]

    def test_leading_set_pixel(self):
        bitmap = np.array([[1, 0], [0, 1]], bool)
        assert rle_row_major(bitmap) == [0, 1, 2, 1]

    def test_row_major_order(self):
        bitmap = np.array([[0, 0, 1], [1, 0, 0]], bool)
        assert rle_row_major(bitmap) == [2, 2, 2]

    def test_runs_sum_to_pixel_count(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            h, w = int(rng.integers(1, 15)), int(rng.integers(1, 15))
            bitmap = rng.random((h, w)) < rng.random()
            runs = rle_row_major(bitmap)
            assert sum(runs) == h * w
            assert sum(runs[1::2]) == int(bitmap.sum())


class TestBitmapFromSegmentation:
    def test_ndarray_passthrough(self):
        bitmap = np.array([[1, 0], [1, 1]], bool)
        assert np.array_equal(bitmap_from_segmentation(bitmap), bitmap)

    def test_column_major_rle_transposed(self):
        # row-major [[1,0],[1,1]] reads down columns as 1,1,0,1
        seg = {"size": [2, 2], "counts": [0, 2, 1, 1]}
        expected = np.array([[1, 0], [1, 1]], bool)
        assert np.array_equal(bitmap_from_segmentation(seg), expected)

    def test_round_trip_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            h, w = int(rng.integers(1, 12)), int(rng.integers(1, 12))
            bitmap = rng.random((h, w)) < rng.random()
            seg = {"size": [h, w], "counts": column_major_counts(bitmap)}
            assert np.array_equal(bitmap_from_segmentation(seg), bitmap)

    def test_bad_sum_rejected(self):
        with pytest.raises(JobError, match="sum"):
            bitmap_from_segmentation({"size": [2, 2], "counts": [3]})

    def test_compressed_counts_rejected(self):
        with pytest.raises(JobError, match="compressed"):
            bitmap_from_segmentation({"size": [2, 2], "counts": "abc"})

    def test_negative_run_rejected(self):
        with pytest.raises(JobError):
            bitmap_from_segmentation({"size": [2, 2], "counts": [-1, 5]})

    def test_wrong_type_rejected(self):
        with pytest.raises(JobError, match="unsupported"):
            bitmap_from_segmentation([1, 2, 3])

    def test_3d_array_rejected(self):
        with pytest.raises(JobError, match="2-D"):
            bitmap_from_segmentation(np.zeros((2, 2, 2), bool))


class TestMaskEntry:
    def test_area_recomputed_not_trusted(self):
        bitmap = np.array([[1, 1], [0, 0]], bool)
        entry = mask_entry({"segmentation": bitmap, "area": 999,
                            "predicted_iou": 0.7}, 2, 2)
        assert entry == {"predicted_iou": 0.7, "area": 2, "rle": [0, 2, 2]}

    def test_shape_mismatch_rejected(self):
        with pytest.raises(JobError, match="shape"):
            mask_entry({"segmentation": np.ones((3, 3), bool),
                        "predicted_iou": 0.5}, 2, 2)

    def test_missing_segmentation_rejected(self):
        with pytest.raises(JobError, match="segmentation"):
            mask_entry({"predicted_iou": 0.5}, 2, 2)

    def test_non_finite_iou_rejected(self):
        with pytest.raises(JobError, match="finite"):
            mask_entry({"segmentation": np.ones((1, 1), bool),
                        "predicted_iou": float("nan")}, 1, 1)


class TestInterchangeFile:
    def _write(self, path, entries=None):
        entries = entries if entries is not None else [
            {"predicted_iou": 0.5, "area": 2, "rle": [0, 2, 2]}]
        return write_interchange(path, "tile", 2, 2, 3, 10, 0.01, 0.001, entries)

    def test_written_file_is_valid(self, tmp_path):
        path = self._write(tmp_path / "m.json")
        assert is_valid_interchange_file(path)

    def test_canonical_key_order(self, tmp_path):
        text = self._write(tmp_path / "m.json").read_text()
        assert text.index('"version"') < text.index('"image_id"') \
            < text.index('"height"') < text.index('"width"') \
            < text.index('"generator"') < text.index('"masks"')
        assert text.endswith("\n")

    def test_validator_rejects_bad_sum(self, tmp_path):
        path = self._write(tmp_path / "m.json",
                           [{"predicted_iou": 0.5, "area": 2, "rle": [0, 2]}])
        assert not is_valid_interchange_file(path)

    def test_validator_rejects_area_mismatch(self, tmp_path):
        path = self._write(tmp_path / "m.json",
                           [{"predicted_iou": 0.5, "area": 3, "rle": [0, 2, 2]}])
        assert not is_valid_interchange_file(path)

    def test_validator_rejects_garbage(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("not json")
        assert not is_valid_interchange_file(path)
        assert not is_valid_interchange_file(tmp_path / "missing.json")
