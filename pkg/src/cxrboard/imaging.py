"""Image loading and the in-memory image record.

PNG and JPEG are the mainline formats.  Grayscale is the working color
space: color inputs are converted to luma at load, 16-bit PNG depth is
preserved.  Inverted-scale sources (see :mod:`cxrboard.dicom`) are
normalized so that a higher stored value always means brighter.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import UnreadableFile, UnsupportedFormat, ZeroDimension

PHOTOMETRICS = ("MONOCHROME1", "MONOCHROME2", "UNKNOWN")
VIEW_POSITIONS = ("PA", "AP", "UNKNOWN")


@dataclass
class ImageRecord:
    """A decoded grayscale study image plus acquisition metadata.

    ``pixels`` is row-major, shape ``(height, width)``, dtype uint8 or
    uint16 matching ``bit_depth``.  Records are treated as immutable after
    construction and may be shared across threads.
    """

    image_id: str
    width: int
    height: int
    bit_depth: int
    pixels: np.ndarray = field(repr=False)
    photometric: str = "UNKNOWN"
    view_position: str = "UNKNOWN"
    source_path: str = ""
    source_format: str = ""

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ZeroDimension(
                f"{self.image_id}: image dimensions {self.width}x{self.height}"
            )
        if self.bit_depth not in (8, 16):
            raise UnsupportedFormat(f"bit depth {self.bit_depth} not supported")
        if self.pixels.shape != (self.height, self.width):
            raise ZeroDimension(
                f"{self.image_id}: pixel buffer shape {self.pixels.shape} "
                f"!= (height={self.height}, width={self.width})"
            )
        self.pixels.setflags(write=False)

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


def invert_pixels(pixels: np.ndarray, bit_depth: int) -> np.ndarray:
    """Map every value v to max-v.  Applying twice restores the input."""
    max_value = (1 << bit_depth) - 1
    return (max_value - pixels.astype(np.int64)).astype(pixels.dtype)


def load_image(path: str, image_id: str | None = None) -> ImageRecord:
    """Decode a PNG or JPEG file into an :class:`ImageRecord`.

    Color inputs are converted to 8-bit luma; 16-bit grayscale PNG keeps
    its full depth.  ``image_id`` defaults to the filename stem.

    Raises:
        UnreadableFile: missing file or decode failure.
        UnsupportedFormat: any container other than PNG/JPEG.
        ZeroDimension: zero-area image.
    """
    if image_id is None:
        image_id = os.path.splitext(os.path.basename(path))[0]
    try:
        img = Image.open(path)
        img.load()
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as e:
        raise UnreadableFile(f"{path}: {e}") from e
    except UnidentifiedImageError as e:
        raise UnreadableFile(f"{path}: not a decodable image: {e}") from e

    fmt = (img.format or "").upper()
    if fmt not in ("PNG", "JPEG"):
        raise UnsupportedFormat(f"{path}: format {fmt or 'unknown'}; expected PNG or JPEG")
    if img.width == 0 or img.height == 0:
        raise ZeroDimension(f"{path}: {img.width}x{img.height}")

    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(img, dtype=np.int64)
        if arr.min() < 0 or arr.max() > 0xFFFF:
            raise UnsupportedFormat(f"{path}: integer samples outside 16-bit range")
        pixels = arr.astype(np.uint16)
        bit_depth = 16
    elif img.mode == "L":
        pixels = np.asarray(img, dtype=np.uint8)
        bit_depth = 8
    else:
        # color or palette input: collapse to 8-bit luma
        pixels = np.asarray(img.convert("L"), dtype=np.uint8)
        bit_depth = 8

    return ImageRecord(
        image_id=image_id,
        width=img.width,
        height=img.height,
        bit_depth=bit_depth,
        pixels=np.ascontiguousarray(pixels),
        photometric="UNKNOWN",
        view_position="UNKNOWN",
        source_path=str(path),
        source_format=fmt,
    )
