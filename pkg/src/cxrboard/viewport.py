"""Crop/zoom solving: show a finding with the right amount of context.

Three presentation levels exist per context class: TIGHT magnifies the
finding with a small margin, REGIONAL shows the finding plus its whole
review region, FULL_THORAX shows the entire thorax.  The chosen base
rect is grown (never shrunk) to the client viewport's aspect ratio and
translated to stay inside the image; when the image itself is too
narrow or short to honor the aspect ratio, the crop pins to the image
extent and says so via ``aspect_waived``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyIntersection, ZeroViewport
from .geometry import Rect, image_rect, round_half_up
from .regions import RegionSet, ThoraxGeometry, build_regions, region_of_bbox
from .triage import FULL_THORAX, REGIONAL, TIGHT

ASPECT_TOLERANCE = 0.01


@dataclass(frozen=True)
class ViewportFactors:
    tight_margin: float = 1.25
    regional_margin: float = 3.0


@dataclass(frozen=True)
class ViewportSpec:
    crop: Rect
    zoom: float  # display pixels per image pixel
    focus_bbox: Rect
    context_class: str
    aspect_waived: bool = False

    def to_dict(self) -> dict:
        return {
            "crop": list(self.crop.as_tuple()),
            "zoom": self.zoom,
            "focus_bbox": list(self.focus_bbox.as_tuple()),
            "context_class": self.context_class,
            "aspect_waived": self.aspect_waived,
        }


def _aspect_error(w: int, h: int, ar: float) -> float:
    return abs(w / h - ar) / ar


def _fit_aspect(
    w0: int, h0: int, image_w: int, image_h: int, ar: float
) -> tuple[int, int, bool]:
    """Smallest integer (w, h) ⊇ (w0, h0) within tolerance of ratio ar.

    Scans heights upward taking the closest admissible width for each.
    Heights below both w0/(ar(1+tol)) and (w0-0.5)/ar provably fail the
    tolerance (the width would have to stay pinned at w0 while the ratio
    overshoots), so the scan may start there instead of at h0.
    """
    lower = min((w0 - 0.5) / ar, w0 / (ar * (1.0 + ASPECT_TOLERANCE)))
    start = max(h0, int(math.floor(lower)))
    for hp in range(start, image_h + 1):
        wp = max(w0, round_half_up(ar * hp))
        if wp > image_w:
            break
        if _aspect_error(wp, hp, ar) <= ASPECT_TOLERANCE:
            return wp, hp, False
    # the aspect ratio cannot be honored inside the image: pin one axis
    # to the full image extent and grow the other as far as it can go
    hp_a = min(image_h, max(h0, round_half_up(image_w / ar)))
    cand_a = (min(image_w, max(w0, round_half_up(ar * hp_a))), hp_a)
    wp_b = min(image_w, max(w0, round_half_up(ar * image_h)))
    cand_b = (wp_b, image_h)
    best = min((cand_a, cand_b), key=lambda c: _aspect_error(c[0], c[1], ar))
    return best[0], best[1], True


def _anchor(base_lo: int, base_len: int, crop_len: int, image_len: int) -> int:
    """Center the crop on the base, then slide it inside the image."""
    lo = base_lo - round_half_up((crop_len - base_len) / 2.0)
    return min(max(lo, 0), image_len - crop_len)


def fit_rect_to_viewport(
    base: Rect,
    image_w: int,
    image_h: int,
    viewport_w: int,
    viewport_h: int,
    focus_bbox: Rect,
    context_class: str,
) -> ViewportSpec:
    """Aspect-fit a base rect and package the result."""
    ar = viewport_w / viewport_h
    w, h, waived = _fit_aspect(base.width, base.height, image_w, image_h, ar)
    x0 = _anchor(base.x0, base.width, w, image_w)
    y0 = _anchor(base.y0, base.height, h, image_h)
    crop = Rect(x0, y0, x0 + w, y0 + h)
    return ViewportSpec(
        crop=crop,
        zoom=viewport_w / crop.width,
        focus_bbox=focus_bbox,
        context_class=context_class,
        aspect_waived=waived,
    )


def solve_viewport(
    bbox: Rect,
    context_class: str,
    geom: ThoraxGeometry,
    viewport_w: int,
    viewport_h: int,
    regions: RegionSet | None = None,
    factors: ViewportFactors = ViewportFactors(),
) -> ViewportSpec:
    """Compute the crop rect and zoom for one finding.

    Base rect per class: TIGHT expands the bbox by the tight margin
    factor about its center; REGIONAL expands by the regional factor and
    unions in the dominant review region's bbox so the whole region
    stays visible; FULL_THORAX uses the thorax bbox.  The union with the
    in-image part of the bbox keeps the containment guarantee even for
    boxes outside the thorax.

    Raises:
        EmptyIntersection: the bbox misses the image entirely.
        ZeroViewport: non-positive viewport dimensions.
    """
    if viewport_w <= 0 or viewport_h <= 0:
        raise ZeroViewport(f"viewport {viewport_w}x{viewport_h}")
    bounds = image_rect(geom.image_width, geom.image_height)
    visible = bbox.intersect(bounds)
    if visible.is_empty:
        raise EmptyIntersection(
            f"bbox {bbox.as_tuple()} outside {geom.image_width}x{geom.image_height} image"
        )

    if context_class == TIGHT:
        base = bbox.expand(factors.tight_margin)
    elif context_class == REGIONAL:
        if regions is None:
            regions = build_regions(geom)
        region_id, _ = region_of_bbox(bbox, regions)
        base = bbox.expand(factors.regional_margin).union_bbox(
            regions.by_id(region_id).bbox()
        )
    elif context_class == FULL_THORAX:
        base = geom.thorax_bbox
    else:
        raise ValueError(f"unknown context class {context_class!r}")

    base = base.union_bbox(visible).intersect(bounds)
    return fit_rect_to_viewport(
        base,
        geom.image_width,
        geom.image_height,
        viewport_w,
        viewport_h,
        focus_bbox=bbox,
        context_class=context_class,
    )


def solve_region_viewport(
    region_bbox: Rect,
    image_w: int,
    image_h: int,
    viewport_w: int,
    viewport_h: int,
) -> ViewportSpec:
    """Aspect-fit crop showing a whole review region (stage overview)."""
    if viewport_w <= 0 or viewport_h <= 0:
        raise ZeroViewport(f"viewport {viewport_w}x{viewport_h}")
    bounds = image_rect(image_w, image_h)
    base = region_bbox.intersect(bounds)
    if base.is_empty:
        raise EmptyIntersection(f"region bbox {region_bbox.as_tuple()} outside image")
    return fit_rect_to_viewport(
        base, image_w, image_h, viewport_w, viewport_h,
        focus_bbox=base, context_class=REGIONAL,
    )
