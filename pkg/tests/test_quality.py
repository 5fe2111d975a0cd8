import numpy as np
import pytest

from cxrboard.geometry import Rect
from cxrboard.imaging import ImageRecord
from cxrboard.quality import (
    MANUAL,
    PASS,
    UNEVALUATED,
    WARN,
    QualityThresholds,
    build_quality_report,
    check_exposure,
    check_inspiration,
    check_projection,
    check_rotation,
)
from cxrboard.regions import build_regions, derive_thorax_geometry

from util import lung_image

LUNG_R = Rect(10, 10, 40, 90)
LUNG_L = Rect(60, 10, 90, 90)


def _record(pixels, view_position="PA"):
    h, w = pixels.shape
    return ImageRecord(
        image_id="img", width=w, height=h, bit_depth=8, pixels=pixels,
        view_position=view_position,
    )


def _env(lung_value=128, view_position="PA"):
    pixels = lung_image(100, 100, lungs=(LUNG_R, LUNG_L), lung_value=lung_value)
    geom = derive_thorax_geometry(LUNG_R, LUNG_L, 100, 100)
    return _record(pixels, view_position), geom, build_regions(geom)


def test_rotation_symmetric_is_zero():
    _, geom, _ = _env()
    check = check_rotation(geom)
    assert check.score == 0.0
    assert check.status == PASS


def test_rotation_asymmetry_scores():
    # widths 30 vs 40, thorax (8,8,102,92) center 55, midline 50
    geom = derive_thorax_geometry(Rect(10, 10, 40, 90), Rect(60, 10, 100, 90), 110, 100)
    expected = 5 / 94 + 10 / 40
    check = check_rotation(geom)
    assert check.score == expected
    assert check.status == WARN
    # the comparison is strict: a score exactly at the limit passes
    at_limit = check_rotation(geom, QualityThresholds(rotation_warn=expected))
    assert at_limit.status == PASS


def test_rotation_width_term_is_clamped():
    # widths 10 vs 40: raw imbalance 0.75 clamps to 0.5
    geom = derive_thorax_geometry(Rect(10, 10, 20, 90), Rect(60, 10, 100, 90), 110, 100)
    check = check_rotation(geom)
    assert check.score == 0.5 + 15 / 94
    assert check.score <= 1.0


def test_exposure_nominal():
    record, _, regions = _env(lung_value=128)
    check = check_exposure(record, regions)
    assert check.mean_lung_intensity == pytest.approx(128 / 255)
    assert check.saturated_fraction == 0.0
    assert check.status == PASS


def test_exposure_underpenetrated_warns():
    record, _, regions = _env(lung_value=30)
    check = check_exposure(record, regions)
    assert check.mean_lung_intensity == pytest.approx(30 / 255)
    assert check.status == WARN


def test_exposure_overpenetrated_warns():
    record, _, regions = _env(lung_value=230)
    assert check_exposure(record, regions).status == WARN


def test_saturation_threshold_is_strict():
    # lung area 4800 px; 240 saturated = exactly the 5% limit, still a pass
    pixels = lung_image(100, 100, lungs=(LUNG_R, LUNG_L), lung_value=128).copy()
    pixels[10:18, 10:40] = 255  # 8*30 = 240 px inside the right lobe
    record = _record(pixels)
    regions = build_regions(derive_thorax_geometry(LUNG_R, LUNG_L, 100, 100))
    check = check_exposure(record, regions)
    assert check.saturated_fraction == 0.05
    assert check.status == PASS

    pixels2 = lung_image(100, 100, lungs=(LUNG_R, LUNG_L), lung_value=128).copy()
    pixels2[10:26, 10:34] = 255  # 16*24 = 384 px -> 8%
    check2 = check_exposure(_record(pixels2), regions)
    assert check2.saturated_fraction == pytest.approx(0.08)
    assert check2.status == WARN


def test_projection_values():
    pa = check_projection(_record(lung_image(100, 100), "PA"))
    assert (pa.value, pa.status, pa.note) == ("PA", PASS, "")
    ap = check_projection(_record(lung_image(100, 100), "AP"))
    assert (ap.value, ap.status) == ("AP", PASS)
    assert "magnified" in ap.note
    unk = check_projection(_record(lung_image(100, 100), "UNKNOWN"))
    assert (unk.value, unk.status, unk.note) == ("UNKNOWN", WARN, "projection unverified")


def test_inspiration_is_manual_only():
    blank = check_inspiration()
    assert blank.status == UNEVALUATED
    assert blank.adequate is None
    assert blank.note != ""
    yes = check_inspiration(True)
    assert (yes.status, yes.adequate) == (MANUAL, True)
    no = check_inspiration(False)
    assert (no.status, no.adequate) == (MANUAL, False)


def test_overall_rollup():
    record, geom, regions = _env()
    report = build_quality_report(record, geom, regions)
    # unevaluated inspiration alone must not warn
    assert report.inspiration.status == UNEVALUATED
    assert report.overall == PASS

    unknown_vp, _, _ = _env(view_position="UNKNOWN")
    report2 = build_quality_report(unknown_vp, geom, regions)
    assert report2.projection.status == WARN
    assert report2.overall == WARN


def test_report_serializes_to_plain_dict():
    record, geom, regions = _env()
    d = build_quality_report(record, geom, regions, inspiration_adequate=True).to_dict()
    assert d["rotation"]["status"] == PASS
    assert d["inspiration"] == {
        "status": MANUAL,
        "note": "confirmed adequate by reviewer",
        "adequate": True,
    }
    assert set(d) == {"rotation", "inspiration", "projection", "exposure", "overall"}
