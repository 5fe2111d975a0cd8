"""External region masks: loading, writing, and equivalence checks.

When a segmentation pipeline has produced real region masks they fully
replace the geometric construction.  Files follow the pattern
``<image_id>.<region>.png`` (8-bit, nonzero = member pixel) for the five
named regions; extras is always derived, never read from disk.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DimensionMismatch,
    EmptyRegion,
    OverlappingLungs,
    PartialMaskSet,
    UnreadableFile,
)
from .geometry import Rect
from .regions import (
    AIRWAY,
    BREATHING_LEFT,
    BREATHING_RIGHT,
    CIRCULATION,
    DIAPHRAGM,
    EXTERNAL,
    EXTRAS,
    Region,
    RegionSet,
)

MASK_REGIONS = (
    ("airway", AIRWAY),
    ("breathing_left", BREATHING_LEFT),
    ("breathing_right", BREATHING_RIGHT),
    ("circulation", CIRCULATION),
    ("diaphragm", DIAPHRAGM),
)


def _mask_path(directory: str, image_id: str, suffix: str) -> str:
    return os.path.join(directory, f"{image_id}.{suffix}.png")


def load_region_masks(
    directory: str,
    image_id: str,
    expected_size: tuple[int, int] | None = None,
) -> RegionSet | None:
    """Load the five-mask set for an image, or None when absent.

    The set is all-or-nothing: a partial set is an error, not a silent
    fallback, because it usually means a broken export.  ``expected_size``
    is (width, height) of the study image when known.

    Raises:
        PartialMaskSet: some but not all five files exist.
        DimensionMismatch: masks disagree in size with each other or the image.
        OverlappingLungs: the two lobe masks share pixels.
        EmptyRegion: all five masks are empty.
    """
    paths = {mid: _mask_path(directory, image_id, suffix) for suffix, mid in MASK_REGIONS}
    present = [mid for mid, p in paths.items() if os.path.exists(p)]
    if not present:
        return None
    if len(present) < len(paths):
        missing = [mid for mid in paths if mid not in present]
        raise PartialMaskSet(image_id, present, missing)

    loaded: dict[str, np.ndarray] = {}
    size: tuple[int, int] | None = expected_size
    for mid, path in paths.items():
        try:
            img = Image.open(path)
            img.load()
        except (OSError, UnidentifiedImageError) as e:
            raise UnreadableFile(f"{path}: {e}") from e
        if size is None:
            size = (img.width, img.height)
        elif (img.width, img.height) != size:
            raise DimensionMismatch(
                f"{path}: {img.width}x{img.height} != expected {size[0]}x{size[1]}"
            )
        loaded[mid] = np.asarray(img.convert("L")) != 0

    if not (loaded[BREATHING_LEFT] & loaded[BREATHING_RIGHT]).sum() == 0:
        raise OverlappingLungs(f"{image_id}: lobe masks overlap")

    union = np.zeros_like(loaded[AIRWAY])
    for m in loaded.values():
        union |= m
    ys, xs = np.nonzero(union)
    if len(ys) == 0:
        raise EmptyRegion(f"{image_id}: all five region masks are empty")
    thorax = Rect(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)
    extras = np.zeros_like(union)
    extras[thorax.y0 : thorax.y1, thorax.x0 : thorax.x1] = True
    extras &= ~union

    return RegionSet(
        airway=Region(AIRWAY, mask=loaded[AIRWAY]),
        breathing_left=Region(BREATHING_LEFT, mask=loaded[BREATHING_LEFT]),
        breathing_right=Region(BREATHING_RIGHT, mask=loaded[BREATHING_RIGHT]),
        circulation=Region(CIRCULATION, mask=loaded[CIRCULATION]),
        diaphragm=Region(DIAPHRAGM, mask=loaded[DIAPHRAGM]),
        extras=Region(EXTRAS, mask=extras),
        provenance=EXTERNAL,
        thorax_bbox=thorax,
    )


def write_region_masks(
    regions: RegionSet,
    directory: str,
    image_id: str,
    width: int,
    height: int,
) -> list[str]:
    """Write the five named regions as 0/255 PNG masks; returns the paths."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for suffix, mid in MASK_REGIONS:
        m = regions.by_id(mid).to_mask(height, width)
        path = _mask_path(directory, image_id, suffix)
        Image.fromarray(np.where(m, 255, 0).astype(np.uint8), mode="L").save(path)
        written.append(path)
    return written


def region_sets_equal(a: RegionSet, b: RegionSet, width: int, height: int) -> bool:
    """Pixel-exact equality over all six regions (provenance ignored)."""
    if a.thorax_bbox != b.thorax_bbox:
        return False
    for rid in (AIRWAY, BREATHING_LEFT, BREATHING_RIGHT, CIRCULATION, DIAPHRAGM, EXTRAS):
        if not np.array_equal(
            a.by_id(rid).to_mask(height, width), b.by_id(rid).to_mask(height, width)
        ):
            return False
    return True
