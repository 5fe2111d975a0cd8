"""Shared fixture builders: synthetic images, annotation rows, DICOM bytes."""

from __future__ import annotations

import struct

import numpy as np
from PIL import Image

from cxrboard import Rect
from cxrboard.regions import ThoraxGeometry, derive_thorax_geometry

EXPLICIT_VR_LE = "1.2.840.10008.1.2.1"
_LONG_VRS = {"OB", "OW", "OF", "SQ", "UT", "UN"}


def write_png(path, array: np.ndarray) -> None:
    if array.dtype == np.uint16:
        Image.fromarray(array).save(path)
    else:
        Image.fromarray(array.astype(np.uint8), mode="L").save(path)


def lung_image(
    width: int,
    height: int,
    lungs: tuple[Rect, ...] = (),
    lung_value: int = 120,
    background: int = 40,
) -> np.ndarray:
    """Flat background with brighter lung-field rectangles."""
    arr = np.full((height, width), background, dtype=np.uint8)
    for lung in lungs:
        arr[lung.y0 : lung.y1, lung.x0 : lung.x1] = lung_value
    return arr


def annotation_line(image_id, label, class_id, rad_id, bbox: Rect | None) -> str:
    if bbox is None:
        return f"{image_id},{label},{class_id},{rad_id},,,,"
    return f"{image_id},{label},{class_id},{rad_id},{bbox.x0},{bbox.y0},{bbox.x1},{bbox.y1}"


def simple_geometry(
    lung_right: Rect, lung_left: Rect, width: int, height: int
) -> ThoraxGeometry:
    return derive_thorax_geometry(lung_right, lung_left, width, height)


def bare_geometry(
    thorax: Rect, midline_x: int, lung_right: Rect | None = None,
    lung_left: Rect | None = None, width: int = 512, height: int = 512,
    diaphragm_y: int | None = None,
) -> ThoraxGeometry:
    """Hand-assembled landmarks, bypassing derivation (exact-value tests)."""
    if lung_right is None:
        lung_right = Rect(thorax.x0, thorax.y0, midline_x - 1, thorax.y1)
    if lung_left is None:
        lung_left = Rect(midline_x + 1, thorax.y0, thorax.x1, thorax.y1)
    return ThoraxGeometry(
        thorax_bbox=thorax,
        lung_right_img=lung_right,
        lung_left_img=lung_left,
        midline_x=midline_x,
        diaphragm_y=diaphragm_y if diaphragm_y is not None else thorax.y1,
        image_width=width,
        image_height=height,
    )


# --- DICOM byte assembly -------------------------------------------------------

def dicom_element(group: int, elem: int, vr: str, value: bytes) -> bytes:
    if len(value) % 2:
        value += b"\x00" if vr in ("OB", "UI", "UN") else b" "
    head = struct.pack("<HH", group, elem) + vr.encode("ascii")
    if vr in _LONG_VRS:
        return head + b"\x00\x00" + struct.pack("<I", len(value)) + value
    return head + struct.pack("<H", len(value)) + value


def dicom_file_meta(transfer_syntax: str = EXPLICIT_VR_LE) -> bytes:
    return dicom_element(0x0002, 0x0010, "UI", transfer_syntax.encode("ascii"))


def build_dicom(
    rows: int,
    cols: int,
    bits: int = 8,
    photometric: str = "MONOCHROME2",
    view_position: str = "PA",
    pixels: np.ndarray | None = None,
    transfer_syntax: str = EXPLICIT_VR_LE,
    extra_dataset: bytes = b"",
    include_meta: bool = True,
) -> bytes:
    """Assemble a minimal Part-10 explicit-VR-LE file for parser tests."""
    if pixels is None:
        rng = np.random.default_rng(0)
        high = 256 if bits == 8 else 65536
        pixels = rng.integers(0, high, size=(rows, cols))
    dtype = np.uint8 if bits == 8 else np.dtype("<u2")
    payload = np.ascontiguousarray(pixels, dtype=dtype).tobytes()

    out = b"\x00" * 128 + b"DICM"
    if include_meta:
        out += dicom_file_meta(transfer_syntax)
    out += extra_dataset
    out += dicom_element(0x0008, 0x0020, "DA", b"20240101")  # skipped tag
    out += dicom_element(0x0028, 0x0004, "CS", photometric.encode("ascii"))
    out += dicom_element(0x0018, 0x5101, "CS", view_position.encode("ascii"))
    out += dicom_element(0x0028, 0x0010, "US", struct.pack("<H", rows))
    out += dicom_element(0x0028, 0x0011, "US", struct.pack("<H", cols))
    out += dicom_element(0x0028, 0x0100, "US", struct.pack("<H", bits))
    out += dicom_element(0x7FE0, 0x0010, "OW" if bits == 16 else "OB", payload)
    return out
