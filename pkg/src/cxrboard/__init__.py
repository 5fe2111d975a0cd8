"""cxrboard: a chest X-ray review workbench.

Staged systematic reading (quality pre-check, orientation, then the five
named regions) over machine findings, with miss-risk triage ordering,
per-disease display-context selection driven by resolution-AUC tables,
cardio-thoracic ratio measurement, server-side crop rendering, and
event-sourced review sessions behind an HTTP/JSON service and a CLI.
"""

from .annotations import Finding, load_annotations, scan_annotations
from .config import ServiceConfig, load_config, packaged_data_path
from .dicom import DicomMetadata, load_dicom_image, parse_dicom_metadata
from .geometry import Rect, round_half_up
from .imaging import ImageRecord, load_image
from .masks import load_region_masks, region_sets_equal, write_region_masks
from .measurements import CtrBands, CtrResult, compute_ctr, ctr_scale_annotation
from .quality import QualityReport, QualityThresholds, build_quality_report
from .regions import (
    Region,
    RegionFractions,
    RegionSet,
    ThoraxGeometry,
    build_regions,
    derive_thorax_geometry,
    region_of,
    region_of_bbox,
)
from .render import encode_png, render_crop
from .session import SessionEvent, SessionState, SessionStore, fold_events
from .triage import (
    DiseaseProfile,
    ResolutionProfile,
    TriagedFinding,
    TriageWeights,
    apply_context_classes,
    derive_context_class,
    load_auc_table,
    load_registry,
    order_stage_findings,
    save_registry,
    score_finding,
)
from .viewport import ViewportFactors, ViewportSpec, solve_viewport
from .workbench import StudyBundle, Workbench

__version__ = "0.1.0"

__all__ = [
    "CtrBands",
    "CtrResult",
    "DicomMetadata",
    "DiseaseProfile",
    "Finding",
    "ImageRecord",
    "QualityReport",
    "QualityThresholds",
    "Rect",
    "Region",
    "RegionFractions",
    "RegionSet",
    "ResolutionProfile",
    "ServiceConfig",
    "SessionEvent",
    "SessionState",
    "SessionStore",
    "StudyBundle",
    "ThoraxGeometry",
    "TriageWeights",
    "TriagedFinding",
    "ViewportFactors",
    "ViewportSpec",
    "Workbench",
    "apply_context_classes",
    "build_quality_report",
    "build_regions",
    "compute_ctr",
    "ctr_scale_annotation",
    "derive_context_class",
    "derive_thorax_geometry",
    "encode_png",
    "fold_events",
    "load_annotations",
    "load_auc_table",
    "load_config",
    "load_dicom_image",
    "load_image",
    "load_region_masks",
    "load_registry",
    "order_stage_findings",
    "packaged_data_path",
    "parse_dicom_metadata",
    "region_of",
    "region_of_bbox",
    "region_sets_equal",
    "render_crop",
    "round_half_up",
    "save_registry",
    "scan_annotations",
    "score_finding",
    "solve_viewport",
    "write_region_masks",
    "__version__",
]
