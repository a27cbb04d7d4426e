"""Shared stub generator: emits generator-library-shaped mask dicts without
the model, alternating between boolean-array and column-major-RLE
segmentation encodings so both decode paths stay exercised."""
import numpy as np
import pytest
from PIL import Image


def column_major_counts(bitmap):
    """Uncompressed COCO-style runs: down columns, starting with background."""
    flat = np.asarray(bitmap, dtype=bool).ravel(order="F")
    counts, current, run = [], False, 0
    for value in flat:
        if value == current:
            run += 1
        else:
            counts.append(run)
            current, run = value, 1
    counts.append(run)
    return counts


def stub_builder(pps, mmra):
    """One mask per distinct color, capped at pps**2, smallest-first drop
    below mmra — enough structure to make the parameters observable."""

    def generate(image):
        h, w = image.shape[:2]
        colors = np.unique(image.reshape(-1, 3), axis=0)
        masks = []
        for i, color in enumerate(colors):
            bitmap = np.all(image == color, axis=2)
            area = int(bitmap.sum())
            if area < mmra:
                continue
            if i % 2:
                segmentation = {"size": [h, w],
                                "counts": column_major_counts(bitmap)}
            else:
                segmentation = bitmap
            masks.append({
                "segmentation": segmentation,
                "area": area,
                "bbox": [0, 0, w, h],
                "predicted_iou": float(0.9 - 0.1 * (i % 5)),
                "point_coords": [[w / 2, h / 2]],
                "stability_score": 0.95,
                "crop_box": [0, 0, w, h],
            })
        return masks[: pps * pps]

    return generate


class CountingBuilder:
    """Wraps stub_builder and counts generate() invocations (resume tests)."""

    def __init__(self):
        self.calls = 0

    def __call__(self, pps, mmra):
        inner = stub_builder(pps, mmra)

        def generate(image):
            self.calls += 1
            return inner(image)

        return generate


@pytest.fixture
def three_band_png(tmp_path):
    """A 24x24 RGB snapshot with three flat vertical color bands."""
    rgb = np.zeros((24, 24, 3), dtype=np.uint8)
    rgb[:, :8] = (200, 40, 40)
    rgb[:, 8:16] = (40, 200, 40)
    rgb[:, 16:] = (40, 40, 200)
    path = tmp_path / "snap.png"
    Image.fromarray(rgb).save(path)
    return path
