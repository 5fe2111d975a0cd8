"""Image-quality pre-check: rotation, inspiration, projection, exposure.

These are screening heuristics with configurable thresholds, not
validated clinical measurements; they exist to make the reviewer look at
acquisition quality before any finding is shown.  Inspiration (rib
counting) needs structure detection this package does not attempt, so it
is surfaced as an explicit manual checkbox rather than silently skipped.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .imaging import ImageRecord
from .regions import RegionSet, ThoraxGeometry, breathing_mask

PASS = "PASS"
WARN = "WARN"
UNEVALUATED = "UNEVALUATED"
MANUAL = "MANUAL"


@dataclass(frozen=True)
class QualityThresholds:
    rotation_warn: float = 0.15
    exposure_mean_low: float = 0.2
    exposure_mean_high: float = 0.8
    saturated_max: float = 0.05


@dataclass(frozen=True)
class RotationCheck:
    score: float
    status: str


@dataclass(frozen=True)
class InspirationCheck:
    status: str  # UNEVALUATED or MANUAL
    note: str
    adequate: bool | None = None


@dataclass(frozen=True)
class ProjectionCheck:
    value: str  # PA, AP, or UNKNOWN
    status: str
    note: str


@dataclass(frozen=True)
class ExposureCheck:
    mean_lung_intensity: float
    saturated_fraction: float
    status: str


@dataclass(frozen=True)
class QualityReport:
    rotation: RotationCheck
    inspiration: InspirationCheck
    projection: ProjectionCheck
    exposure: ExposureCheck
    overall: str

    def to_dict(self) -> dict:
        return asdict(self)


def check_rotation(
    geom: ThoraxGeometry, thresholds: QualityThresholds = QualityThresholds()
) -> RotationCheck:
    """Symmetry score from midline offset plus lobe width imbalance.

    Each term is clamped to [0, 0.5] so the total stays in [0, 1].  The
    threshold comparison is strict: a score exactly at the limit passes.
    """
    thorax = geom.thorax_bbox
    center_x = (thorax.x0 + thorax.x1) / 2.0
    offset_term = abs(geom.midline_x - center_x) / thorax.width
    wr = geom.lung_right_img.width
    wl = geom.lung_left_img.width
    width_term = abs(wr - wl) / max(wr, wl)
    score = min(offset_term, 0.5) + min(width_term, 0.5)
    return RotationCheck(
        score=score, status=WARN if score > thresholds.rotation_warn else PASS
    )


def check_exposure(
    image: ImageRecord,
    regions: RegionSet,
    thresholds: QualityThresholds = QualityThresholds(),
) -> ExposureCheck:
    """Mean normalized lung intensity and fraction of saturated pixels."""
    m = breathing_mask(regions, image.height, image.width)
    values = image.pixels[m]
    mean = float(values.mean(dtype=np.float64)) / image.max_value
    saturated = float((values == image.max_value).mean(dtype=np.float64))
    bad = (
        mean < thresholds.exposure_mean_low
        or mean > thresholds.exposure_mean_high
        or saturated > thresholds.saturated_max
    )
    return ExposureCheck(
        mean_lung_intensity=mean,
        saturated_fraction=saturated,
        status=WARN if bad else PASS,
    )


def check_projection(image: ImageRecord) -> ProjectionCheck:
    """Echo the recorded view position; absence of metadata is a warning."""
    vp = image.view_position
    if vp == "PA":
        return ProjectionCheck(value="PA", status=PASS, note="")
    if vp == "AP":
        return ProjectionCheck(
            value="AP", status=PASS, note="AP view: cardiac silhouette magnified"
        )
    return ProjectionCheck(value="UNKNOWN", status=WARN, note="projection unverified")


def check_inspiration(adequate: bool | None = None) -> InspirationCheck:
    """Never auto-evaluated; reflects the clinician's checkbox when set."""
    if adequate is None:
        return InspirationCheck(
            status=UNEVALUATED, note="requires manual rib-count confirmation"
        )
    return InspirationCheck(
        status=MANUAL,
        note="confirmed adequate by reviewer" if adequate else "marked inadequate by reviewer",
        adequate=adequate,
    )


def build_quality_report(
    image: ImageRecord,
    geom: ThoraxGeometry,
    regions: RegionSet,
    thresholds: QualityThresholds = QualityThresholds(),
    inspiration_adequate: bool | None = None,
) -> QualityReport:
    rotation = check_rotation(geom, thresholds)
    exposure = check_exposure(image, regions, thresholds)
    projection = check_projection(image)
    inspiration = check_inspiration(inspiration_adequate)
    evaluated = (rotation.status, exposure.status, projection.status)
    return QualityReport(
        rotation=rotation,
        inspiration=inspiration,
        projection=projection,
        exposure=exposure,
        overall=WARN if WARN in evaluated else PASS,
    )
