"""Minimal DICOM Part-10 metadata reader.

Deliberately small: explicit VR little endian only, six consumed tags,
every other element skipped by exact VR-driven length arithmetic.  This
exists so studies exported with acquisition metadata keep their view
position and photometric interpretation; PNG/JPEG remains the mainline
image path and full DICOM support is a non-goal.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    NotDicom,
    TruncatedElement,
    UnreadableFile,
    UnsupportedTransferSyntax,
)
from .imaging import ImageRecord, invert_pixels

EXPLICIT_VR_LITTLE_ENDIAN = "1.2.840.10008.1.2.1"

# VRs whose explicit-VR header is 12 bytes (2-byte VR + 2 reserved + u32 len);
# everything else uses the 8-byte form (2-byte VR + u16 len).
_LONG_VRS = frozenset({"OB", "OW", "OF", "SQ", "UT", "UN"})

TAG_ROWS = (0x0028, 0x0010)
TAG_COLUMNS = (0x0028, 0x0011)
TAG_BITS_ALLOCATED = (0x0028, 0x0100)
TAG_PHOTOMETRIC = (0x0028, 0x0004)
TAG_VIEW_POSITION = (0x0018, 0x5101)
TAG_PIXEL_DATA = (0x7FE0, 0x0010)
TAG_TRANSFER_SYNTAX = (0x0002, 0x0010)

_UNDEFINED_LENGTH = 0xFFFFFFFF


@dataclass(frozen=True)
class DicomMetadata:
    """The consumed-tag subset plus the pixel payload location."""

    rows: int | None = None
    columns: int | None = None
    bits_allocated: int | None = None
    photometric: str = "UNKNOWN"
    view_position: str = "UNKNOWN"
    pixel_data_offset: int | None = None
    pixel_data_length: int | None = None
    transfer_syntax: str = EXPLICIT_VR_LITTLE_ENDIAN


def _decode_text(raw: bytes) -> str:
    # DICOM strings are even-padded with a trailing space (or NUL in the wild)
    return raw.decode("ascii", errors="replace").rstrip(" \x00")


def _read_element_header(buf: bytes, pos: int) -> tuple[tuple[int, int], str, int, int]:
    """Return (tag, vr, value_length, value_offset) for the element at pos."""
    if pos + 8 > len(buf):
        tag = struct.unpack_from("<HH", buf, pos) if pos + 4 <= len(buf) else (0, 0)
        raise TruncatedElement((tag[0], tag[1]), "element header cut short")
    group, element = struct.unpack_from("<HH", buf, pos)
    tag = (group, element)
    vr = buf[pos + 4 : pos + 6].decode("ascii", errors="replace")
    if not vr.isalpha() or not vr.isupper():
        # implicit-VR stream (or garbage): we only speak explicit VR
        raise UnsupportedTransferSyntax(
            f"element ({group:04X},{element:04X}) lacks an explicit VR"
        )
    if vr in _LONG_VRS:
        if pos + 12 > len(buf):
            raise TruncatedElement(tag, "long-form length cut short")
        (length,) = struct.unpack_from("<I", buf, pos + 8)
        value_offset = pos + 12
    else:
        (length,) = struct.unpack_from("<H", buf, pos + 6)
        value_offset = pos + 8
    if length == _UNDEFINED_LENGTH:
        # undefined-length values (encapsulated pixel data, nested sequences)
        # cannot be skipped by length arithmetic
        raise UnsupportedTransferSyntax(
            f"element ({group:04X},{element:04X}) has undefined length"
        )
    return tag, vr, length, value_offset


def parse_dicom_metadata(path: str) -> DicomMetadata:
    """Extract the supported tag subset from a Part-10 file.

    Raises:
        NotDicom: no "DICM" magic at offset 128.
        UnsupportedTransferSyntax: anything but explicit VR little endian,
            or undefined-length elements.
        TruncatedElement: declared element length exceeds the file.
    """
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as e:
        raise UnreadableFile(f"{path}: {e}") from e
    if len(buf) < 132 or buf[128:132] != b"DICM":
        raise NotDicom(f"{path}: missing DICM magic at offset 128")

    pos = 132
    transfer_syntax: str | None = None
    # file meta group (0002,xxxx): always explicit VR little endian
    while pos < len(buf):
        tag, vr, length, value_offset = _read_element_header(buf, pos)
        if tag[0] != 0x0002:
            break
        if value_offset + length > len(buf):
            raise TruncatedElement(tag, f"declared length {length} exceeds file")
        if tag == TAG_TRANSFER_SYNTAX:
            transfer_syntax = _decode_text(buf[value_offset : value_offset + length])
        pos = value_offset + length
    if transfer_syntax is None:
        raise UnsupportedTransferSyntax(f"{path}: no transfer syntax element in file meta")
    if transfer_syntax != EXPLICIT_VR_LITTLE_ENDIAN:
        raise UnsupportedTransferSyntax(f"{path}: {transfer_syntax}")

    meta = {
        "rows": None,
        "columns": None,
        "bits_allocated": None,
        "photometric": "UNKNOWN",
        "view_position": "UNKNOWN",
        "pixel_data_offset": None,
        "pixel_data_length": None,
    }
    while pos < len(buf):
        tag, vr, length, value_offset = _read_element_header(buf, pos)
        if value_offset + length > len(buf):
            raise TruncatedElement(tag, f"declared length {length} exceeds file")
        value = buf[value_offset : value_offset + length]
        if tag == TAG_ROWS:
            meta["rows"] = struct.unpack("<H", value[:2])[0]
        elif tag == TAG_COLUMNS:
            meta["columns"] = struct.unpack("<H", value[:2])[0]
        elif tag == TAG_BITS_ALLOCATED:
            meta["bits_allocated"] = struct.unpack("<H", value[:2])[0]
        elif tag == TAG_PHOTOMETRIC:
            meta["photometric"] = _decode_text(value) or "UNKNOWN"
        elif tag == TAG_VIEW_POSITION:
            vp = _decode_text(value)
            meta["view_position"] = vp if vp in ("PA", "AP") else "UNKNOWN"
        elif tag == TAG_PIXEL_DATA:
            meta["pixel_data_offset"] = value_offset
            meta["pixel_data_length"] = length
            break
        pos = value_offset + length

    return DicomMetadata(transfer_syntax=transfer_syntax, **meta)


def load_dicom_image(path: str, image_id: str | None = None) -> ImageRecord:
    """Decode uncompressed pixel data using the parsed metadata.

    MONOCHROME1 buffers (higher value = darker) are inverted so every
    stored image follows the brighter-is-higher convention; the record
    then reports MONOCHROME2.
    """
    if image_id is None:
        image_id = os.path.splitext(os.path.basename(path))[0]
    meta = parse_dicom_metadata(path)
    if meta.rows is None or meta.columns is None:
        raise TruncatedElement(TAG_ROWS, "no Rows/Columns in dataset")
    if meta.pixel_data_offset is None or meta.pixel_data_length is None:
        raise TruncatedElement(TAG_PIXEL_DATA, "no PixelData element in dataset")
    bits = meta.bits_allocated or 8
    if bits not in (8, 16):
        raise UnsupportedTransferSyntax(f"{path}: BitsAllocated {bits}")
    dtype = np.uint8 if bits == 8 else np.dtype("<u2")
    count = meta.rows * meta.columns
    with open(path, "rb") as fh:
        fh.seek(meta.pixel_data_offset)
        raw = fh.read(meta.pixel_data_length)
    needed = count * dtype.itemsize if bits == 16 else count
    if len(raw) < needed:
        raise TruncatedElement(TAG_PIXEL_DATA, f"{len(raw)} bytes < {needed} needed")
    pixels = np.frombuffer(raw[:needed], dtype=dtype).reshape(meta.rows, meta.columns)
    pixels = pixels.astype(np.uint8 if bits == 8 else np.uint16)
    photometric = meta.photometric
    if photometric == "MONOCHROME1":
        pixels = invert_pixels(pixels, bits)
        photometric = "MONOCHROME2"
    elif photometric not in ("MONOCHROME2", "UNKNOWN"):
        raise UnsupportedTransferSyntax(f"{path}: photometric {photometric}")
    return ImageRecord(
        image_id=image_id,
        width=meta.columns,
        height=meta.rows,
        bit_depth=bits,
        pixels=np.ascontiguousarray(pixels),
        photometric=photometric,
        view_position=meta.view_position,
        source_path=str(path),
        source_format="DICOM",
    )
