"""Cardio-thoracic ratio measurement and its display overlay.

The ratio is (MRD + MLD) / ID: the two maximal cardiac border distances
from the spine midline, over the internal thoracic diameter.  A ratio of
0.50 or more flags an enlarged cardiac silhouette.  ID is approximated
by the thorax bounding-box width and the cardiac borders by the heart
bbox edges; both approximations are deterministic on annotation data.
Severity bands past the 0.50 flag are reviewer-facing guidance with
configurable edges, not a validated grading scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateThorax
from .geometry import Rect, round_half_up
from .regions import ThoraxGeometry

NORMAL = "NORMAL"
BORDERLINE = "BORDERLINE"
MODERATE = "MODERATE"
SEVERE = "SEVERE"


@dataclass(frozen=True)
class CtrBands:
    """Severity band lower edges; flag threshold doubles as the first edge."""

    borderline: float = 0.50
    moderate: float = 0.55
    severe: float = 0.60


@dataclass(frozen=True)
class CtrResult:
    mrd: int  # midline to patient-right cardiac border (image-left side)
    mld: int  # midline to patient-left cardiac border (image-right side)
    id: int  # internal thoracic diameter
    ratio: float
    cardiomegaly_flag: bool
    severity: str
    midline_x: int
    heart_bbox: Rect
    thorax_bbox: Rect

    def to_dict(self) -> dict:
        return {
            "mrd": self.mrd,
            "mld": self.mld,
            "id": self.id,
            "ratio": self.ratio,
            "cardiomegaly_flag": self.cardiomegaly_flag,
            "severity": self.severity,
            "midline_x": self.midline_x,
            "heart_bbox": list(self.heart_bbox.as_tuple()),
            "thorax_bbox": list(self.thorax_bbox.as_tuple()),
        }


@dataclass(frozen=True)
class ScaleSegment:
    kind: str  # mrd, mld, or id
    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def length_px(self) -> int:
        return abs(self.x1 - self.x0) + abs(self.y1 - self.y0)


@dataclass(frozen=True)
class CtrScaleSpec:
    segments: tuple[ScaleSegment, ...]
    band_label: str

    def to_dict(self) -> dict:
        return {
            "segments": [
                {
                    "kind": s.kind,
                    "x0": s.x0,
                    "y0": s.y0,
                    "x1": s.x1,
                    "y1": s.y1,
                    "length_px": s.length_px,
                }
                for s in self.segments
            ],
            "band_label": self.band_label,
        }


def severity_band(ratio: float, bands: CtrBands = CtrBands()) -> str:
    if ratio < bands.borderline:
        return NORMAL
    if ratio < bands.moderate:
        return BORDERLINE
    if ratio < bands.severe:
        return MODERATE
    return SEVERE


def compute_ctr(
    heart_bbox: Rect, geom: ThoraxGeometry, bands: CtrBands = CtrBands()
) -> CtrResult:
    """Measure the ratio from a heart bbox and thorax landmarks.

    Border distances clamp at zero when the heart sits entirely on one
    side of the midline, so mrd + mld equals the heart width exactly
    whenever the box spans the midline.
    """
    internal_diameter = geom.thorax_bbox.width
    if internal_diameter <= 0:
        raise DegenerateThorax("thorax bbox has zero width")
    mrd = max(0, geom.midline_x - heart_bbox.x0)
    mld = max(0, heart_bbox.x1 - geom.midline_x)
    ratio = (mrd + mld) / internal_diameter
    return CtrResult(
        mrd=mrd,
        mld=mld,
        id=internal_diameter,
        ratio=ratio,
        cardiomegaly_flag=ratio >= bands.borderline,
        severity=severity_band(ratio, bands),
        midline_x=geom.midline_x,
        heart_bbox=heart_bbox,
        thorax_bbox=geom.thorax_bbox,
    )


def ctr_scale_annotation(result: CtrResult) -> CtrScaleSpec:
    """Drawable overlay: the two cardiac segments and the diameter bar.

    Segments run horizontally at the heart's vertical center; each one's
    pixel length equals the corresponding measured value (clamped
    measurements give zero-length stubs at the midline).
    """
    yc = round_half_up((result.heart_bbox.y0 + result.heart_bbox.y1) / 2.0)
    return CtrScaleSpec(
        segments=(
            ScaleSegment("mrd", result.midline_x - result.mrd, yc, result.midline_x, yc),
            ScaleSegment("mld", result.midline_x, yc, result.midline_x + result.mld, yc),
            ScaleSegment("id", result.thorax_bbox.x0, yc, result.thorax_bbox.x1, yc),
        ),
        band_label=result.severity,
    )
