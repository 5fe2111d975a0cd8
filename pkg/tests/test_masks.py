import numpy as np
import pytest

from cxrboard.errors import (
    DimensionMismatch,
    EmptyRegion,
    OverlappingLungs,
    PartialMaskSet,
    UnreadableFile,
)
from cxrboard.geometry import Rect
from cxrboard.masks import load_region_masks, region_sets_equal, write_region_masks
from cxrboard.regions import EXTERNAL, build_regions, derive_thorax_geometry

from util import write_png

LUNG_R = Rect(10, 10, 40, 90)
LUNG_L = Rect(60, 10, 90, 90)
SUFFIXES = ("airway", "breathing_left", "breathing_right", "circulation", "diaphragm")


@pytest.fixture
def geometric():
    return build_regions(derive_thorax_geometry(LUNG_R, LUNG_L, 100, 100))


def _write_blank_set(directory, image_id, size=100, skip=()):
    for suffix in SUFFIXES:
        if suffix in skip:
            continue
        write_png(directory / f"{image_id}.{suffix}.png", np.zeros((size, size), np.uint8))


def test_absent_masks_load_as_none(tmp_path):
    assert load_region_masks(str(tmp_path), "nothing-here") is None


def test_write_then_load_round_trip(tmp_path, geometric):
    paths = write_region_masks(geometric, str(tmp_path), "img", 100, 100)
    assert len(paths) == 5
    loaded = load_region_masks(str(tmp_path), "img", expected_size=(100, 100))
    assert loaded is not None
    assert loaded.provenance == EXTERNAL
    assert loaded.thorax_bbox == geometric.thorax_bbox
    assert region_sets_equal(geometric, loaded, 100, 100)
    # every loaded region is mask-backed and write-protected
    with pytest.raises(ValueError):
        loaded.airway.mask[0, 0] = True


def test_partial_set_is_an_error(tmp_path, geometric):
    write_region_masks(geometric, str(tmp_path), "img", 100, 100)
    (tmp_path / "img.circulation.png").unlink()
    with pytest.raises(PartialMaskSet):
        load_region_masks(str(tmp_path), "img")


def test_masks_must_agree_in_size(tmp_path, geometric):
    write_region_masks(geometric, str(tmp_path), "img", 100, 100)
    write_png(tmp_path / "img.diaphragm.png", np.full((50, 100), 255, np.uint8))
    with pytest.raises(DimensionMismatch):
        load_region_masks(str(tmp_path), "img")


def test_masks_must_match_the_image_size(tmp_path, geometric):
    write_region_masks(geometric, str(tmp_path), "img", 100, 100)
    with pytest.raises(DimensionMismatch):
        load_region_masks(str(tmp_path), "img", expected_size=(128, 128))


def test_overlapping_lobes_rejected(tmp_path):
    _write_blank_set(tmp_path, "img", skip=("breathing_left", "breathing_right"))
    lobe = np.zeros((100, 100), np.uint8)
    lobe[20:60, 20:60] = 255
    write_png(tmp_path / "img.breathing_left.png", lobe)
    write_png(tmp_path / "img.breathing_right.png", lobe)
    with pytest.raises(OverlappingLungs):
        load_region_masks(str(tmp_path), "img")


def test_all_empty_masks_rejected(tmp_path):
    _write_blank_set(tmp_path, "img")
    with pytest.raises(EmptyRegion):
        load_region_masks(str(tmp_path), "img")


def test_undecodable_mask_file(tmp_path):
    _write_blank_set(tmp_path, "img", skip=("airway",))
    (tmp_path / "img.airway.png").write_bytes(b"not a png at all")
    with pytest.raises(UnreadableFile):
        load_region_masks(str(tmp_path), "img")


def test_thorax_and_extras_come_from_the_union(tmp_path):
    # two small blobs; thorax must be their joint bbox, extras the remainder
    _write_blank_set(tmp_path, "img", skip=("breathing_left", "breathing_right"))
    right = np.zeros((100, 100), np.uint8)
    right[10:30, 10:30] = 255
    left = np.zeros((100, 100), np.uint8)
    left[40:70, 50:80] = 255
    write_png(tmp_path / "img.breathing_right.png", right)
    write_png(tmp_path / "img.breathing_left.png", left)
    loaded = load_region_masks(str(tmp_path), "img")
    assert loaded.thorax_bbox == Rect(10, 10, 80, 70)
    expect_extras = loaded.thorax_bbox.area() - 20 * 20 - 30 * 30
    assert loaded.extras.area() == expect_extras
    assert (loaded.extras.mask & (loaded.breathing_right.mask | loaded.breathing_left.mask)).sum() == 0


def test_region_sets_equal_detects_differences(tmp_path, geometric):
    write_region_masks(geometric, str(tmp_path), "img", 100, 100)
    loaded = load_region_masks(str(tmp_path), "img")
    assert region_sets_equal(loaded, loaded, 100, 100)
    other = build_regions(
        derive_thorax_geometry(Rect(10, 10, 40, 91), LUNG_L, 100, 100)
    )
    assert not region_sets_equal(loaded, other, 100, 100)
