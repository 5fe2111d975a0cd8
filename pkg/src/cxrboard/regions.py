"""Thorax geometry and the five-region image decomposition.

The systematic reading order walks five named regions: Airway, the two
Breathing lobes, Circulation, Diaphragm, plus Extras for everything else
inside the thorax.  Regions are built either geometrically from two lung
rects (this module) or from external label masks (:mod:`cxrboard.masks`).
Geometric regions are axis-aligned rect unions: cheap, exact to count,
and sufficient for crop and stage routing.

All derived fractions (airway strip width, circulation top, diaphragm
band, thorax margin) are configuration with the defaults below; they are
display-calibration constants, not measured truths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annotations import Finding
from .errors import EmptyRegion, NoBBox, OutOfBounds, OverlappingLungs
from .geometry import (
    Rect,
    image_rect,
    intersect_area_with_rects,
    rects_union_area,
    round_half_up,
)

AIRWAY = "AIRWAY"
BREATHING_LEFT = "BREATHING_LEFT"
BREATHING_RIGHT = "BREATHING_RIGHT"
CIRCULATION = "CIRCULATION"
DIAPHRAGM = "DIAPHRAGM"
EXTRAS = "EXTRAS"

# fixed tie-break order for region assignment (A, B, C, D, then extras)
REGION_ORDER = (AIRWAY, BREATHING_LEFT, BREATHING_RIGHT, CIRCULATION, DIAPHRAGM, EXTRAS)

# review stage owning each region
REGION_STAGE = {
    AIRWAY: "A",
    BREATHING_LEFT: "B",
    BREATHING_RIGHT: "B",
    CIRCULATION: "C",
    DIAPHRAGM: "D",
    EXTRAS: "E",
}

GEOMETRIC = "GEOMETRIC"
EXTERNAL = "EXTERNAL"


@dataclass(frozen=True)
class RegionFractions:
    """Geometric construction constants, as fractions of thorax size."""

    airway_halfwidth: float = 0.05
    airway_depth: float = 0.50
    circulation_halfwidth: float = 0.15
    circulation_top: float = 0.40
    diaphragm_band: float = 0.08
    thorax_margin: float = 0.02


@dataclass(frozen=True)
class ThoraxGeometry:
    """Lung/thorax landmarks every downstream measurement hangs off."""

    thorax_bbox: Rect
    lung_right_img: Rect  # lung on the image's left side (patient right)
    lung_left_img: Rect
    midline_x: int
    diaphragm_y: int
    image_width: int
    image_height: int


@dataclass(frozen=True)
class Region:
    """A pixel region backed by either a rect list or a boolean mask."""

    region_id: str
    rects: tuple[Rect, ...] = ()
    mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.mask is not None:
            self.mask.setflags(write=False)

    @property
    def is_mask_backed(self) -> bool:
        return self.mask is not None

    def area(self) -> int:
        if self.mask is not None:
            return int(self.mask.sum())
        return rects_union_area(list(self.rects))

    @property
    def is_empty(self) -> bool:
        return self.area() == 0

    def overlap_area(self, rect: Rect) -> int:
        """Exact pixel count of ``rect`` ∩ this region."""
        if self.mask is not None:
            h, w = self.mask.shape
            c = rect.intersect(image_rect(w, h))
            if c.is_empty:
                return 0
            return int(self.mask[c.y0 : c.y1, c.x0 : c.x1].sum())
        return intersect_area_with_rects(rect, list(self.rects))

    def bbox(self) -> Rect:
        if self.mask is not None:
            ys, xs = np.nonzero(self.mask)
            if len(ys) == 0:
                return Rect(0, 0, 0, 0)
            return Rect(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)
        out = Rect(0, 0, 0, 0)
        for r in self.rects:
            out = out.union_bbox(r)
        return out

    def to_mask(self, height: int, width: int) -> np.ndarray:
        if self.mask is not None:
            if self.mask.shape != (height, width):
                raise ValueError(
                    f"mask shape {self.mask.shape} != ({height}, {width})"
                )
            return self.mask.copy()
        m = np.zeros((height, width), dtype=bool)
        bounds = image_rect(width, height)
        for r in self.rects:
            c = r.intersect(bounds)
            if not c.is_empty:
                m[c.y0 : c.y1, c.x0 : c.x1] = True
        return m


@dataclass(frozen=True)
class RegionSet:
    airway: Region
    breathing_left: Region
    breathing_right: Region
    circulation: Region
    diaphragm: Region
    extras: Region
    provenance: str  # GEOMETRIC or EXTERNAL
    thorax_bbox: Rect

    def by_id(self, region_id: str) -> Region:
        return {
            AIRWAY: self.airway,
            BREATHING_LEFT: self.breathing_left,
            BREATHING_RIGHT: self.breathing_right,
            CIRCULATION: self.circulation,
            DIAPHRAGM: self.diaphragm,
            EXTRAS: self.extras,
        }[region_id]

    def named(self) -> list[tuple[str, Region]]:
        return [(rid, self.by_id(rid)) for rid in REGION_ORDER]


def subtract_rects(outer: Rect, holes: list[Rect]) -> list[Rect]:
    """Decompose ``outer`` minus the union of ``holes`` into disjoint rects.

    Row-band sweep: split the y extent at every hole edge, then take the
    x-interval complement inside each band.
    """
    if outer.is_empty:
        return []
    clipped = [h.intersect(outer) for h in holes]
    clipped = [h for h in clipped if not h.is_empty]
    if not clipped:
        return [outer]
    ys = sorted({outer.y0, outer.y1, *(v for h in clipped for v in (h.y0, h.y1))})
    out: list[Rect] = []
    for ya, yb in zip(ys, ys[1:]):
        if ya < outer.y0 or yb > outer.y1:
            continue
        spans = sorted(
            (h.x0, h.x1) for h in clipped if h.y0 <= ya and yb <= h.y1
        )
        x = outer.x0
        for lo, hi in spans:
            if lo > x:
                out.append(Rect(x, ya, lo, yb))
            x = max(x, hi)
        if x < outer.x1:
            out.append(Rect(x, ya, outer.x1, yb))
    return out


def derive_thorax_geometry(
    lung_a: Rect,
    lung_b: Rect,
    image_width: int,
    image_height: int,
    margin_frac: float = 0.02,
) -> ThoraxGeometry:
    """Build thorax landmarks from two lung-field rects.

    The thorax bbox is the lungs' bounding rect padded by ``margin_frac``
    of its own width/height per side (rounded half-up), clamped to the
    image.  The midline is the midpoint of the inter-lung gap; the
    diaphragm line is the lower of the two lung bottoms.

    Raises:
        OutOfBounds: a lung rect is empty or leaves the image.
        OverlappingLungs: the medial edges cross (or share a left edge).
    """
    bounds = image_rect(image_width, image_height)
    for name, lung in (("first", lung_a), ("second", lung_b)):
        if lung.is_empty:
            raise OutOfBounds(f"{name} lung rect {lung.as_tuple()} is empty")
        if not bounds.contains_rect(lung):
            raise OutOfBounds(
                f"{name} lung rect {lung.as_tuple()} leaves the "
                f"{image_width}x{image_height} image"
            )
    if lung_a.x0 == lung_b.x0:
        raise OverlappingLungs(
            f"lung rects share left edge x={lung_a.x0}; cannot order sides"
        )
    right, left = (lung_a, lung_b) if lung_a.x0 < lung_b.x0 else (lung_b, lung_a)
    if right.x1 > left.x0:
        raise OverlappingLungs(
            f"medial edges cross: image-left lung ends at x={right.x1}, "
            f"image-right lung starts at x={left.x0}"
        )
    bbox = right.union_bbox(left)
    mx = round_half_up(margin_frac * bbox.width)
    my = round_half_up(margin_frac * bbox.height)
    thorax = Rect(bbox.x0 - mx, bbox.y0 - my, bbox.x1 + mx, bbox.y1 + my).clamp(bounds)
    return ThoraxGeometry(
        thorax_bbox=thorax,
        lung_right_img=right,
        lung_left_img=left,
        midline_x=round_half_up((right.x1 + left.x0) / 2.0),
        diaphragm_y=max(right.y1, left.y1),
        image_width=image_width,
        image_height=image_height,
    )


def build_regions(
    geom: ThoraxGeometry, fractions: RegionFractions = RegionFractions()
) -> RegionSet:
    """Construct the geometric five-region decomposition.

    Airway and circulation are vertical strips around the inter-lung gap
    (the gap padded by a fraction of thorax width), the lobes are the
    lung rects themselves, the diaphragm is a horizontal band around the
    diaphragm line, and extras is the exact remainder of the thorax bbox.
    Regions other than the two lobes may overlap; everything is clipped
    to the thorax bbox so the coverage identity holds by construction.
    """
    thorax = geom.thorax_bbox
    tw, th = thorax.width, thorax.height
    gap_x0 = geom.lung_right_img.x1
    gap_x1 = geom.lung_left_img.x0

    a_half = round_half_up(fractions.airway_halfwidth * tw)
    a_depth = round_half_up(fractions.airway_depth * th)
    airway = Rect(gap_x0 - a_half, thorax.y0, gap_x1 + a_half, thorax.y0 + a_depth)

    c_half = round_half_up(fractions.circulation_halfwidth * tw)
    c_top = thorax.y0 + round_half_up(fractions.circulation_top * th)
    circulation = Rect(gap_x0 - c_half, c_top, gap_x1 + c_half, geom.diaphragm_y)

    d_band = round_half_up(fractions.diaphragm_band * th)
    diaphragm = Rect(thorax.x0, geom.diaphragm_y - d_band, thorax.x1, thorax.y1)

    named = [
        (AIRWAY, airway.clamp(thorax)),
        (BREATHING_LEFT, geom.lung_left_img.clamp(thorax)),
        (BREATHING_RIGHT, geom.lung_right_img.clamp(thorax)),
        (CIRCULATION, circulation.clamp(thorax)),
        (DIAPHRAGM, diaphragm.clamp(thorax)),
    ]
    extras_rects = subtract_rects(thorax, [r for _, r in named])
    return RegionSet(
        airway=Region(AIRWAY, (named[0][1],)),
        breathing_left=Region(BREATHING_LEFT, (named[1][1],)),
        breathing_right=Region(BREATHING_RIGHT, (named[2][1],)),
        circulation=Region(CIRCULATION, (named[3][1],)),
        diaphragm=Region(DIAPHRAGM, (named[4][1],)),
        extras=Region(EXTRAS, tuple(extras_rects)),
        provenance=GEOMETRIC,
        thorax_bbox=thorax,
    )


def region_of_bbox(bbox: Rect, regions: RegionSet) -> tuple[str, float]:
    """Assign a box to the region holding most of its area.

    The fraction is |bbox ∩ region| / |bbox|.  Ties go to the earlier
    region in the fixed A, B, C, D, E order; a box overlapping nothing is
    filed under extras with fraction 0.
    """
    denom = bbox.area()
    if denom <= 0:
        raise NoBBox(f"degenerate box {bbox.as_tuple()}")
    best_id, best_frac = EXTRAS, 0.0
    for rid, region in regions.named():
        frac = region.overlap_area(bbox) / denom
        if frac > best_frac:
            best_id, best_frac = rid, frac
    return best_id, best_frac


def region_of(finding: Finding, regions: RegionSet) -> tuple[str, float]:
    """:func:`region_of_bbox` for a finding; "No finding" rows have no box."""
    if finding.bbox is None:
        raise NoBBox(f"finding {finding.label!r} carries no bounding box")
    return region_of_bbox(finding.bbox, regions)


def stage_of_region(region_id: str) -> str:
    return REGION_STAGE[region_id]


def _distance_to_rect_boundary(box: Rect, rect: Rect) -> float:
    """Distance from a box to the boundary of a rect (0 when touching)."""
    inter = box.intersect(rect)
    if not inter.is_empty:
        if rect.contains_rect(box):
            return float(
                min(
                    box.x0 - rect.x0,
                    rect.x1 - box.x1,
                    box.y0 - rect.y0,
                    rect.y1 - box.y1,
                )
            )
        return 0.0
    dx = max(0, rect.x0 - box.x1, box.x0 - rect.x1)
    dy = max(0, rect.y0 - box.y1, box.y0 - rect.y1)
    return float(np.hypot(dx, dy))


def lung_border_distance(bbox: Rect, geom: ThoraxGeometry) -> float:
    """Min distance from a box to the nearer lung-field border.

    Zero when the box touches or crosses a lung edge; for boxes strictly
    inside a lobe it is the gap to the nearest edge of that lobe.
    """
    return min(
        _distance_to_rect_boundary(bbox, geom.lung_right_img),
        _distance_to_rect_boundary(bbox, geom.lung_left_img),
    )


def breathing_mask(regions: RegionSet, height: int, width: int) -> np.ndarray:
    """Boolean union of the two lobes; raises when both are empty."""
    m = regions.breathing_left.to_mask(height, width) | regions.breathing_right.to_mask(
        height, width
    )
    if not m.any():
        raise EmptyRegion("both breathing regions are empty")
    return m
