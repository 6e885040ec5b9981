import numpy as np
import pytest
from PIL import Image as PILImage

from objctrl import tensor_io


@pytest.fixture
def write_gray_png(tmp_path):
    """Write an 8-bit grayscale PNG from a uint8 array, return its path."""

    def _write(samples, name="img.png"):
        path = tmp_path / name
        PILImage.fromarray(np.asarray(samples, dtype=np.uint8), mode="L").save(path)
        return path

    return _write


@pytest.fixture
def write_depth_png(tmp_path):
    """Write a 16-bit depth PNG with its min/max sidecar, return its path."""

    def _write(samples, lo, hi, name="depth.png"):
        path = tmp_path / name
        PILImage.fromarray(np.asarray(samples, dtype=np.uint16)).save(path)
        tensor_io.write_json(tensor_io.depth_sidecar_path(path), {"min": lo, "max": hi})
        return path

    return _write


def disk_mask(h, w, cy, cx, radius):
    ys, xs = np.mgrid[0:h, 0:w]
    return ((ys - cy) ** 2 + (xs - cx) ** 2 <= radius**2).astype(np.uint8)
