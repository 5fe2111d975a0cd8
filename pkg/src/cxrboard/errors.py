"""Exception types raised across the workbench.

Every error carries enough structure (line numbers, tags, blocker lists) for
the CLI and the HTTP layer to produce actionable diagnostics without string
parsing.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all workbench errors."""

    code = "WORKBENCH_ERROR"


# --- ingestion ---------------------------------------------------------------

class UnreadableFile(WorkbenchError):
    code = "UNREADABLE_FILE"


class UnsupportedFormat(WorkbenchError):
    code = "UNSUPPORTED_FORMAT"


class ZeroDimension(WorkbenchError):
    code = "ZERO_DIMENSION"


class MissingColumn(WorkbenchError):
    code = "MISSING_COLUMN"


class MalformedRow(WorkbenchError):
    code = "MALFORMED_ROW"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidBBox(WorkbenchError):
    code = "INVALID_BBOX"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NotDicom(WorkbenchError):
    code = "NOT_DICOM"


class UnsupportedTransferSyntax(WorkbenchError):
    code = "UNSUPPORTED_TRANSFER_SYNTAX"


class TruncatedElement(WorkbenchError):
    code = "TRUNCATED_ELEMENT"

    def __init__(self, tag: tuple[int, int], message: str = ""):
        detail = f" {message}" if message else ""
        super().__init__(f"truncated element ({tag[0]:04X},{tag[1]:04X}){detail}")
        self.tag = tag


class DimensionMismatch(WorkbenchError):
    code = "DIMENSION_MISMATCH"


class PartialMaskSet(WorkbenchError):
    code = "PARTIAL_MASK_SET"

    def __init__(self, image_id: str, present: list[str], missing: list[str]):
        super().__init__(
            f"{image_id}: region masks present for {present} but missing {missing}"
        )
        self.present = present
        self.missing = missing


# --- geometry / regions -------------------------------------------------------

class OverlappingLungs(WorkbenchError):
    code = "OVERLAPPING_LUNGS"


class OutOfBounds(WorkbenchError):
    code = "OUT_OF_BOUNDS"


class NoBBox(WorkbenchError):
    code = "NO_BBOX"


class EmptyRegion(WorkbenchError):
    code = "EMPTY_REGION"


class DegenerateThorax(WorkbenchError):
    code = "DEGENERATE_THORAX"


# --- triage -------------------------------------------------------------------

class EmptyProfile(WorkbenchError):
    code = "EMPTY_PROFILE"


class NonNumericAuc(WorkbenchError):
    code = "NON_NUMERIC_AUC"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class AucOutOfRange(WorkbenchError):
    code = "AUC_OUT_OF_RANGE"

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class BadWeights(WorkbenchError):
    code = "BAD_WEIGHTS"


# --- viewport / rendering -----------------------------------------------------

class EmptyIntersection(WorkbenchError):
    code = "EMPTY_INTERSECTION"


class ZeroViewport(WorkbenchError):
    code = "ZERO_VIEWPORT"


class SpecImageMismatch(WorkbenchError):
    code = "SPEC_IMAGE_MISMATCH"


# --- sessions / service -------------------------------------------------------

class UnknownStudy(WorkbenchError):
    code = "UNKNOWN_STUDY"


class MissingGeometry(WorkbenchError):
    code = "MISSING_GEOMETRY"


class StageNotReachable(WorkbenchError):
    code = "STAGE_NOT_REACHABLE"


class UnknownFinding(WorkbenchError):
    code = "UNKNOWN_FINDING"


class SessionFinalized(WorkbenchError):
    code = "SESSION_FINALIZED"


class UnknownSession(WorkbenchError):
    code = "UNKNOWN_SESSION"


class IncompleteReview(WorkbenchError):
    """Finalize guard: lists every stage not yet visited and every finding
    without a verdict so nothing can be signed off unseen."""

    code = "INCOMPLETE_REVIEW"

    def __init__(self, missing_stages: list[str], unverdicted: list[str]):
        parts = []
        if missing_stages:
            parts.append(f"stages not visited: {', '.join(missing_stages)}")
        if unverdicted:
            parts.append(f"findings without verdict: {', '.join(unverdicted)}")
        super().__init__("; ".join(parts) or "incomplete review")
        self.missing_stages = missing_stages
        self.unverdicted = unverdicted


class ConfigError(WorkbenchError):
    code = "CONFIG_ERROR"
