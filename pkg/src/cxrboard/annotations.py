"""Annotation table ingestion.

The input is a CSV of per-annotator disease boxes, one row per finding:

    image_id,class_name,class_id,rad_id,x_min,y_min,x_max,y_max

Coordinates may be decimal; they are rounded half-up to integers at parse
time because all downstream geometry is pixel-integer.  A row labeled
"No finding" carries empty coordinate cells and is kept (not dropped):
those rows drive the review summary's "machine saw nothing here" display.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import InvalidBBox, MalformedRow, MissingColumn, UnreadableFile
from .geometry import Rect, round_half_up

EXPECTED_HEADER = [
    "image_id",
    "class_name",
    "class_id",
    "rad_id",
    "x_min",
    "y_min",
    "x_max",
    "y_max",
]

NO_FINDING_LABEL = "No finding"


@dataclass(frozen=True)
class Finding:
    """One annotated disease box (or a "No finding" attestation row)."""

    image_id: str
    label: str
    class_id: int
    rad_id: str
    bbox: Rect | None
    line_no: int = 0

    @property
    def is_no_finding(self) -> bool:
        return self.bbox is None


def _parse_row(row: list[str], line_no: int) -> Finding:
    if len(row) != len(EXPECTED_HEADER):
        raise MalformedRow(
            line_no, f"expected {len(EXPECTED_HEADER)} cells, got {len(row)}"
        )
    image_id, label, class_id_s, rad_id = (c.strip() for c in row[:4])
    coords = [c.strip() for c in row[4:8]]
    if not image_id:
        raise MalformedRow(line_no, "empty image_id")
    if not label:
        raise MalformedRow(line_no, "empty class_name")
    try:
        class_id = int(class_id_s)
    except ValueError:
        raise MalformedRow(line_no, f"class_id {class_id_s!r} is not an integer") from None

    empties = [c == "" for c in coords]
    if label == NO_FINDING_LABEL:
        if not all(empties):
            raise MalformedRow(line_no, f'"{NO_FINDING_LABEL}" row carries coordinates')
        return Finding(image_id, label, class_id, rad_id, None, line_no)
    if any(empties):
        raise MalformedRow(line_no, f"empty coordinate cell for label {label!r}")
    try:
        vals = [round_half_up(float(c)) for c in coords]
    except ValueError:
        raise MalformedRow(line_no, f"non-numeric coordinate in {coords!r}") from None
    x_min, y_min, x_max, y_max = vals
    if x_min < 0 or y_min < 0:
        raise InvalidBBox(line_no, f"negative coordinate in ({x_min},{y_min},{x_max},{y_max})")
    if x_min >= x_max or y_min >= y_max:
        raise InvalidBBox(
            line_no, f"degenerate box ({x_min},{y_min},{x_max},{y_max})"
        )
    return Finding(image_id, label, class_id, rad_id, Rect(x_min, y_min, x_max, y_max), line_no)


def scan_annotations(path: str) -> tuple[list[Finding], list[MalformedRow | InvalidBBox]]:
    """Parse every data row, collecting per-row errors instead of raising.

    Totality contract: len(findings) + len(errors) equals the number of
    data rows.  Row order is preserved.  Header problems still raise.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise UnreadableFile(f"{path}: {e}") from e
    findings: list[Finding] = []
    errors: list[MalformedRow | InvalidBBox] = []
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path}: empty file, no header") from None
        header = [h.strip() for h in header]
        if header != EXPECTED_HEADER:
            missing = [c for c in EXPECTED_HEADER if c not in header]
            raise MissingColumn(
                f"{path}: header {header} does not match {EXPECTED_HEADER}"
                + (f" (missing {missing})" if missing else "")
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                findings.append(_parse_row(row, line_no))
            except (MalformedRow, InvalidBBox) as e:
                errors.append(e)
    return findings, errors


def load_annotations(path: str) -> list[Finding]:
    """Strict variant of :func:`scan_annotations`: first bad row raises."""
    findings, errors = scan_annotations(path)
    if errors:
        raise errors[0]
    return findings


def validate_against_image(finding: Finding, width: int, height: int) -> str | None:
    """Return a message when a parsed bbox falls outside image bounds."""
    if finding.bbox is None:
        return None
    b = finding.bbox
    if b.x0 < 0 or b.y0 < 0 or b.x1 > width or b.y1 > height:
        return (
            f"line {finding.line_no}: bbox ({b.x0},{b.y0},{b.x1},{b.y1}) "
            f"outside {width}x{height} image {finding.image_id!r}"
        )
    return None
