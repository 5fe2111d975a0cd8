import pytest
from hypothesis import given, settings, strategies as st

from cxrboard.errors import EmptyIntersection, ZeroViewport
from cxrboard.geometry import Rect
from cxrboard.triage import FULL_THORAX, REGIONAL, TIGHT
from cxrboard.viewport import (
    ASPECT_TOLERANCE,
    ViewportFactors,
    solve_region_viewport,
    solve_viewport,
)
from cxrboard.regions import derive_thorax_geometry

LUNG_R = Rect(10, 10, 40, 90)
LUNG_L = Rect(60, 10, 90, 90)


@pytest.fixture
def geom():
    return derive_thorax_geometry(LUNG_R, LUNG_L, 100, 100)


def _aspect_error(crop, vw, vh):
    ar = vw / vh
    return abs(crop.width / crop.height - ar) / ar


def test_tight_crop_worked_example(geom):
    spec = solve_viewport(Rect(40, 40, 60, 60), TIGHT, geom, 100, 100)
    # 20x20 box grows by round(2.5)=3 px per side, already square
    assert spec.crop == Rect(37, 37, 63, 63)
    assert spec.zoom == 100 / 26
    assert spec.aspect_waived is False
    assert spec.focus_bbox == Rect(40, 40, 60, 60)
    assert spec.context_class == TIGHT


def test_full_thorax_crop_is_the_thorax(geom):
    spec = solve_viewport(Rect(40, 40, 60, 60), FULL_THORAX, geom, 512, 512)
    assert spec.crop == geom.thorax_bbox
    assert spec.zoom == 512 / 84
    assert spec.aspect_waived is False


def test_regional_crop_includes_the_whole_region(geom):
    spec = solve_viewport(Rect(20, 20, 30, 30), REGIONAL, geom, 100, 100)
    # region bbox is the right lobe (10,10,40,90); square fit slides left to 0
    assert spec.crop == Rect(0, 10, 80, 90)
    assert spec.crop.contains_rect(LUNG_R)
    assert spec.zoom == 1.25
    assert spec.aspect_waived is False


def test_margin_factors_are_configurable(geom):
    wide = solve_viewport(
        Rect(40, 40, 60, 60), TIGHT, geom, 100, 100,
        factors=ViewportFactors(tight_margin=2.0),
    )
    assert wide.crop == Rect(30, 30, 70, 70)


def test_aspect_waived_on_short_image():
    flat = derive_thorax_geometry(Rect(2, 2, 45, 18), Rect(55, 2, 98, 18), 100, 20)
    spec = solve_viewport(Rect(10, 5, 20, 10), FULL_THORAX, flat, 100, 100)
    assert spec.aspect_waived is True
    assert spec.crop == Rect(0, 0, 100, 20)
    assert spec.zoom == 1.0


def test_out_of_image_bbox_keeps_visible_part(geom):
    # bbox hangs off the right edge; the crop still covers the visible part
    bbox = Rect(80, 40, 130, 60)
    spec = solve_viewport(bbox, TIGHT, geom, 100, 100)
    visible = Rect(80, 40, 100, 60)
    assert spec.crop.contains_rect(visible)
    assert Rect(0, 0, 100, 100).contains_rect(spec.crop)


def test_solver_guards(geom):
    with pytest.raises(ZeroViewport):
        solve_viewport(Rect(40, 40, 60, 60), TIGHT, geom, 0, 100)
    with pytest.raises(EmptyIntersection):
        solve_viewport(Rect(200, 200, 300, 300), TIGHT, geom, 100, 100)
    with pytest.raises(ValueError):
        solve_viewport(Rect(40, 40, 60, 60), "PANORAMIC", geom, 100, 100)


def test_region_overview_solver(geom):
    spec = solve_region_viewport(Rect(10, 10, 40, 90), 100, 100, 100, 100)
    assert spec.crop == Rect(0, 10, 80, 90)
    assert spec.focus_bbox == Rect(10, 10, 40, 90)
    assert spec.context_class == REGIONAL
    with pytest.raises(ZeroViewport):
        solve_region_viewport(Rect(10, 10, 40, 90), 100, 100, 100, -5)
    with pytest.raises(EmptyIntersection):
        solve_region_viewport(Rect(500, 500, 600, 600), 100, 100, 100, 100)


def test_spec_to_dict(geom):
    d = solve_viewport(Rect(40, 40, 60, 60), TIGHT, geom, 100, 100).to_dict()
    assert d == {
        "crop": [37, 37, 63, 63],
        "zoom": 100 / 26,
        "focus_bbox": [40, 40, 60, 60],
        "context_class": TIGHT,
        "aspect_waived": False,
    }


case = st.tuples(
    st.integers(60, 400),   # image w
    st.integers(60, 400),   # image h
    st.floats(0.02, 0.9),   # bbox x0 frac
    st.floats(0.02, 0.9),   # bbox y0 frac
    st.floats(0.02, 0.6),   # bbox w frac
    st.floats(0.02, 0.6),   # bbox h frac
    st.integers(16, 1024),  # viewport w
    st.integers(16, 1024),  # viewport h
    st.sampled_from((TIGHT, REGIONAL, FULL_THORAX)),
)


def _layout(w, h):
    return derive_thorax_geometry(
        Rect(w // 10, h // 10, w // 10 + w // 4, h // 10 + 3 * h // 5),
        Rect(w // 2 + w // 20, h // 10 + 1, w // 2 + w // 20 + w // 4, h // 10 + 1 + 3 * h // 5),
        w, h,
    )


@settings(max_examples=300, deadline=None)
@given(case)
def test_solver_invariants(args):
    w, h, fx, fy, fw, fh, vw, vh, cls = args
    x0 = min(int(fx * w), w - 2)
    y0 = min(int(fy * h), h - 2)
    bbox = Rect(x0, y0, min(w, x0 + 1 + int(fw * w)), min(h, y0 + 1 + int(fh * h)))
    geom = _layout(w, h)

    spec = solve_viewport(bbox, cls, geom, vw, vh)
    image = Rect(0, 0, w, h)
    assert image.contains_rect(spec.crop)
    assert spec.crop.area() > 0
    assert spec.crop.contains_rect(bbox.intersect(image))
    if not spec.aspect_waived:
        assert _aspect_error(spec.crop, vw, vh) <= ASPECT_TOLERANCE
    assert spec.zoom == vw / spec.crop.width
    assert solve_viewport(bbox, cls, geom, vw, vh) == spec


@settings(max_examples=200, deadline=None)
@given(case)
def test_tight_never_wider_than_full_thorax(args):
    w, h, fx, fy, fw, fh, vw, vh, _ = args
    geom = _layout(w, h)
    x0 = min(int(fx * w), w - 2)
    y0 = min(int(fy * h), h - 2)
    bbox = Rect(x0, y0, min(w, x0 + 1 + int(fw * w)), min(h, y0 + 1 + int(fh * h)))
    if not geom.thorax_bbox.contains_rect(bbox.expand(1.25)):
        return  # interior findings only
    tight = solve_viewport(bbox, TIGHT, geom, vw, vh)
    full = solve_viewport(bbox, FULL_THORAX, geom, vw, vh)
    if tight.aspect_waived or full.aspect_waived:
        return
    assert tight.crop.area() <= full.crop.area()
    assert tight.zoom >= full.zoom
