"""Disease registry, display-context derivation, and miss-risk ordering.

Two data-driven ideas live here.  First, each disease gets a display
context class chosen by which training resolution scored the best AUC
for it: diseases detected best at low resolution need the whole thorax
in view, diseases detected best at high resolution need magnification.
Second, findings inside a review stage are ordered by a miss-risk
priority built from registry attributes (urgency, border affinity,
subtlety, rarity) and per-finding geometry (smallness, border
proximity), so the easiest findings to miss are shown first.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, replace

from .annotations import Finding
from .errors import (
    AucOutOfRange,
    BadWeights,
    ConfigError,
    EmptyProfile,
    MalformedRow,
    MissingColumn,
    NoBBox,
    NonNumericAuc,
    UnreadableFile,
)
from .geometry import Rect
from .regions import (
    RegionSet,
    ThoraxGeometry,
    lung_border_distance,
    region_of_bbox,
    stage_of_region,
)

FULL_THORAX = "FULL_THORAX"
REGIONAL = "REGIONAL"
TIGHT = "TIGHT"
CONTEXT_CLASSES = (FULL_THORAX, REGIONAL, TIGHT)

SUMMARY_STAGE = "SUMMARY"

_AUC_COLUMN = re.compile(r"^auc_(\d+)$")


@dataclass(frozen=True)
class ResolutionProfile:
    """Per-disease AUC at each square training resolution, ascending."""

    label: str
    aucs: tuple[tuple[int, float], ...]  # (resolution, auc)

    def __post_init__(self) -> None:
        resolutions = [r for r, _ in self.aucs]
        if resolutions != sorted(set(resolutions)):
            raise ConfigError(
                f"{self.label}: resolutions {resolutions} not strictly increasing"
            )


@dataclass(frozen=True)
class DiseaseProfile:
    label: str
    context_class: str = REGIONAL
    region_hint: str = "E"
    urgency: float = 0.5
    border_affinity: float = 0.5
    subtlety: float = 0.5
    rarity: float = 0.5
    notes: str = ""

    def __post_init__(self) -> None:
        if self.context_class not in CONTEXT_CLASSES:
            raise ConfigError(f"{self.label}: context class {self.context_class!r}")
        if self.region_hint not in ("A", "B", "C", "D", "E"):
            raise ConfigError(f"{self.label}: region hint {self.region_hint!r}")
        for name in ("urgency", "border_affinity", "subtlety", "rarity"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{self.label}: {name}={v} outside [0,1]")


@dataclass(frozen=True)
class TriageWeights:
    """Priority mixing weights; a valid config block sums to 1."""

    urgency: float = 0.4
    border: float = 0.2
    smallness: float = 0.2
    subtlety: float = 0.1
    rarity: float = 0.1

    def validate(self, require_unit_sum: bool = True) -> None:
        vals = (self.urgency, self.border, self.smallness, self.subtlety, self.rarity)
        if any(v < 0 for v in vals):
            raise BadWeights(f"negative weight in {vals}")
        if require_unit_sum and abs(sum(vals) - 1.0) > 1e-9:
            raise BadWeights(f"weights {vals} sum to {sum(vals)}, expected 1")


@dataclass(frozen=True)
class TriagedFinding:
    finding: Finding
    profile: DiseaseProfile
    smallness: float
    border_proximity: float
    priority: float
    region_id: str
    region_fraction: float
    stage: str
    finding_id: str = ""


def derive_context_class(profile: ResolutionProfile) -> str:
    """Map the best-AUC resolution to a display context class.

    The argmax resolution's rank among the profile's sorted resolutions
    is split into thirds: lowest third FULL_THORAX, middle REGIONAL, top
    TIGHT.  For the canonical 256/512/1024 sweep that is exactly
    256 -> FULL_THORAX, 512 -> REGIONAL, 1024 -> TIGHT.  AUC ties go to
    the lower resolution: when the signal is ambiguous, more context is
    the safer display.
    """
    if not profile.aucs:
        raise EmptyProfile(f"{profile.label}: no resolutions")
    best_index = 0
    best_auc = profile.aucs[0][1]
    for i, (_, auc) in enumerate(profile.aucs):
        if auc > best_auc:
            best_index, best_auc = i, auc
    n = len(profile.aucs)
    if n == 1:
        return FULL_THORAX
    if 3 * best_index <= (n - 1):
        return FULL_THORAX
    if 3 * best_index <= 2 * (n - 1):
        return REGIONAL
    return TIGHT


def load_auc_table(path: str) -> list[ResolutionProfile]:
    """Parse a resolution-AUC CSV: header `finding,auc_<N>,...`.

    Resolution columns are discovered by the `auc_<N>` pattern and read
    in ascending resolution order regardless of file order.  Aggregate
    rows (label starting with "overall") are filtered out: they describe
    the whole table, not a disease.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise UnreadableFile(f"{path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyProfile(f"{path}: empty file") from None
        if not header or header[0] != "finding":
            raise MissingColumn(f"{path}: first column must be 'finding', got {header[:1]}")
        columns: list[tuple[int, int]] = []  # (resolution, column index)
        for idx, name in enumerate(header[1:], start=1):
            m = _AUC_COLUMN.match(name)
            if not m:
                raise MissingColumn(f"{path}: column {name!r} does not match auc_<N>")
            columns.append((int(m.group(1)), idx))
        resolutions = [r for r, _ in columns]
        if len(set(resolutions)) != len(resolutions):
            raise MissingColumn(f"{path}: duplicate resolution columns {resolutions}")
        if len(columns) < 2:
            raise MissingColumn(f"{path}: need at least two auc_<N> columns")
        columns.sort()

        profiles: list[ResolutionProfile] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(
                    line_no, f"expected {len(header)} cells, got {len(row)}"
                )
            label = row[0].strip()
            if not label:
                raise MalformedRow(line_no, "empty finding label")
            if label.casefold().startswith("overall"):
                continue
            aucs = []
            for resolution, idx in columns:
                cell = row[idx].strip()
                try:
                    value = float(cell)
                except ValueError:
                    raise NonNumericAuc(line_no, f"{header[idx]}={cell!r}") from None
                if not (0.0 <= value <= 1.0):
                    raise AucOutOfRange(line_no, f"{header[idx]}={value}")
                aucs.append((resolution, value))
            profiles.append(ResolutionProfile(label=label, aucs=tuple(aucs)))
    if not profiles:
        raise EmptyProfile(f"{path}: no disease rows")
    return profiles


def load_registry(path: str) -> dict[str, DiseaseProfile]:
    """Load the disease registry (JSON array of profile objects)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise UnreadableFile(f"{path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(raw, list):
        raise ConfigError(f"{path}: expected a JSON array of profiles")
    registry: dict[str, DiseaseProfile] = {}
    for entry in raw:
        try:
            profile = DiseaseProfile(**entry)
        except TypeError as e:
            raise ConfigError(f"{path}: bad profile entry {entry!r}: {e}") from e
        if profile.label in registry:
            raise ConfigError(f"{path}: duplicate label {profile.label!r}")
        registry[profile.label] = profile
    return registry


def save_registry(registry: dict[str, DiseaseProfile], path: str) -> None:
    rows = [
        {
            "label": p.label,
            "context_class": p.context_class,
            "region_hint": p.region_hint,
            "urgency": p.urgency,
            "border_affinity": p.border_affinity,
            "subtlety": p.subtlety,
            "rarity": p.rarity,
            "notes": p.notes,
        }
        for p in sorted(registry.values(), key=lambda p: p.label)
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def apply_context_classes(
    registry: dict[str, DiseaseProfile], profiles: list[ResolutionProfile]
) -> list[tuple[str, str]]:
    """Set each registry entry's context class from its AUC profile.

    Labels absent from the registry are added with neutral attributes so
    a fresh registry can be bootstrapped from a table alone.  Returns
    (label, class) pairs in table order.
    """
    derived: list[tuple[str, str]] = []
    for profile in profiles:
        cls = derive_context_class(profile)
        derived.append((profile.label, cls))
        existing = registry.get(profile.label)
        if existing is None:
            registry[profile.label] = DiseaseProfile(
                label=profile.label,
                context_class=cls,
                notes="bootstrapped from resolution-AUC table; attributes are neutral defaults",
            )
        else:
            registry[profile.label] = replace(existing, context_class=cls)
    return derived


def fallback_profile(label: str) -> DiseaseProfile:
    """Neutral profile for labels the registry does not know."""
    return DiseaseProfile(label=label, notes="unregistered label; neutral defaults")


def score_finding(
    finding: Finding,
    profile: DiseaseProfile,
    geom: ThoraxGeometry,
    regions: RegionSet,
    weights: TriageWeights = TriageWeights(),
    smallness_area_frac: float = 0.05,
    border_dist_frac: float = 0.05,
    finding_id: str = "",
) -> TriagedFinding:
    """Score one boxed finding's miss risk.

    smallness: 1 for vanishing boxes, 0 once the box reaches
    ``smallness_area_frac`` of the thorax area.  border_proximity: 1 when
    the box touches a lung border, 0 beyond ``border_dist_frac`` of the
    thorax width away.  priority mixes profile attributes with these two
    geometric terms and is clamped to [0, 1].
    """
    if finding.bbox is None:
        raise NoBBox(f"finding {finding.label!r} carries no bounding box")
    weights.validate(require_unit_sum=False)
    bbox = finding.bbox
    thorax = geom.thorax_bbox

    area_limit = smallness_area_frac * thorax.area()
    smallness = 1.0 - min(1.0, bbox.area() / area_limit) if area_limit > 0 else 0.0

    distance = lung_border_distance(bbox, geom)
    distance_limit = border_dist_frac * thorax.width
    border_proximity = (
        1.0 - min(1.0, distance / distance_limit) if distance_limit > 0 else 0.0
    )

    region_id, fraction = region_of_bbox(bbox, regions)
    priority = (
        weights.urgency * profile.urgency
        + weights.border * max(profile.border_affinity, border_proximity)
        + weights.smallness * smallness
        + weights.subtlety * profile.subtlety
        + weights.rarity * profile.rarity
    )
    return TriagedFinding(
        finding=finding,
        profile=profile,
        smallness=smallness,
        border_proximity=border_proximity,
        priority=min(1.0, max(0.0, priority)),
        region_id=region_id,
        region_fraction=fraction,
        stage=stage_of_region(region_id),
        finding_id=finding_id,
    )


def summary_placeholder(
    finding: Finding, profile: DiseaseProfile, finding_id: str = ""
) -> TriagedFinding:
    """Wrap a "No finding" row for the summary stage (nothing to score)."""
    return TriagedFinding(
        finding=finding,
        profile=profile,
        smallness=0.0,
        border_proximity=0.0,
        priority=0.0,
        region_id="",
        region_fraction=0.0,
        stage=SUMMARY_STAGE,
        finding_id=finding_id,
    )


def _order_key(tf: TriagedFinding) -> tuple:
    bbox_area = tf.finding.bbox.area() if tf.finding.bbox is not None else 0
    return (-tf.priority, tf.finding.label, -bbox_area, tf.finding.rad_id, tf.finding_id)


def order_stage_findings(findings: list[TriagedFinding]) -> list[TriagedFinding]:
    """Deterministic stage ordering: priority desc, then label, area desc,
    annotator id, and finally finding id as an absolute tie-breaker."""
    return sorted(findings, key=_order_key)
