"""Study catalog and review orchestration.

The workbench owns the loaded configuration, the disease registry, the
study catalog, and the session store, and exposes every operation the
HTTP layer and the CLI need: ingest/validate the data directory, build
per-study bundles (image + findings + geometry + regions + quality +
triage), drive staged sessions, solve viewports, and render crops.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

from .annotations import Finding, scan_annotations, validate_against_image
from .config import ServiceConfig
from .errors import (
    IncompleteReview,
    MissingGeometry,
    StageNotReachable,
    UnknownFinding,
    UnknownStudy,
    WorkbenchError,
)
from .geometry import Rect
from .imaging import ImageRecord, load_image
from .dicom import load_dicom_image
from .masks import load_region_masks
from .measurements import CtrResult, compute_ctr, ctr_scale_annotation
from .quality import QualityReport, build_quality_report
from .regions import (
    RegionSet,
    ThoraxGeometry,
    build_regions,
    derive_thorax_geometry,
)
from .render import encode_png, render_crop
from .report import build_report
from .session import STAGES, SessionState, SessionStore
from .triage import (
    DiseaseProfile,
    TriagedFinding,
    fallback_profile,
    load_registry,
    order_stage_findings,
    score_finding,
    summary_placeholder,
)
from .viewport import (
    ViewportFactors,
    ViewportSpec,
    solve_region_viewport,
    solve_viewport,
)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".dcm")


@dataclass
class StudyBundle:
    """Everything derivable for one study, computed once and cached."""

    image: ImageRecord
    findings: list[Finding]
    geometry: ThoraxGeometry | None
    regions: RegionSet | None
    quality: QualityReport | None
    triaged: dict[str, TriagedFinding]
    stage_findings: dict[str, list[TriagedFinding]]
    ctr: CtrResult | None
    warnings: list[str]
    viewport_factors: ViewportFactors = field(default_factory=ViewportFactors)

    @property
    def finding_ids(self) -> list[str]:
        return list(self.triaged.keys())


def _load_image_any(path: str, image_id: str) -> ImageRecord:
    if path.lower().endswith(".dcm"):
        return load_dicom_image(path, image_id)
    return load_image(path, image_id)


def _parse_rect(value, what: str) -> Rect:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 4
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise MissingGeometry(f"{what}: expected [x0, y0, x1, y1], got {value!r}")
    return Rect(int(value[0]), int(value[1]), int(value[2]), int(value[3]))


class Workbench:
    def __init__(self, config: ServiceConfig):
        config.validate()
        self.config = config
        self.registry: dict[str, DiseaseProfile] = load_registry(config.registry_path)
        self.sessions = SessionStore(config.sessions_dir)
        self._bundles: dict[str, StudyBundle] = {}
        self._lock = threading.Lock()
        self._catalog: dict[str, dict] | None = None
        self._findings_by_image: dict[str, list[Finding]] | None = None
        self._annotation_errors: list[str] = []
        self._geometry_sidecar: dict[str, dict] | None = None

    # --- raw inputs -----------------------------------------------------

    def _annotations(self) -> dict[str, list[Finding]]:
        if self._findings_by_image is None:
            by_image: dict[str, list[Finding]] = {}
            errors: list[str] = []
            if os.path.exists(self.config.annotations_csv):
                findings, row_errors = scan_annotations(self.config.annotations_csv)
                errors = [str(e) for e in row_errors]
                for f in findings:
                    by_image.setdefault(f.image_id, []).append(f)
            self._findings_by_image = by_image
            self._annotation_errors = errors
        return self._findings_by_image

    def _geometry_entries(self) -> dict[str, dict]:
        if self._geometry_sidecar is None:
            entries: dict[str, dict] = {}
            path = self.config.geometry_json
            if path and os.path.exists(path):
                with open(path, "r", encoding="utf-8") as fh:
                    raw = json.load(fh)
                if isinstance(raw, dict):
                    entries = raw
            self._geometry_sidecar = entries
        return self._geometry_sidecar

    def _scan_image_files(self) -> dict[str, str]:
        found: dict[str, str] = {}
        directory = self.config.images_dir
        if not os.path.isdir(directory):
            return found
        for name in sorted(os.listdir(directory)):
            stem, ext = os.path.splitext(name)
            if ext.lower() in IMAGE_EXTENSIONS:
                found.setdefault(stem, os.path.join(directory, name))
        return found

    # --- catalog ----------------------------------------------------------

    def catalog(self) -> dict[str, dict]:
        if self._catalog is None:
            path = self.config.catalog_path
            if os.path.exists(path):
                with open(path, "r", encoding="utf-8") as fh:
                    self._catalog = json.load(fh).get("studies", {})
            else:
                self._catalog, _ = self._build_catalog()
        return self._catalog

    def _build_catalog(self) -> tuple[dict[str, dict], list[str]]:
        errors = []
        studies: dict[str, dict] = {}
        annotations = self._annotations()
        errors.extend(self._annotation_errors)
        geometry = self._geometry_entries()
        for image_id, path in self._scan_image_files().items():
            entry = {
                "path": path,
                "format": os.path.splitext(path)[1].lstrip(".").upper(),
                "finding_count": len(annotations.get(image_id, [])),
                "has_geometry": image_id in geometry,
                "ripe_overall": "UNKNOWN",
            }
            try:
                bundle = self._load_bundle(image_id, path)
                if bundle.quality is not None:
                    entry["ripe_overall"] = bundle.quality.overall
                entry["has_geometry"] = bundle.geometry is not None
                errors.extend(f"{image_id}: {w}" for w in bundle.warnings)
            except WorkbenchError as e:
                errors.append(f"{image_id}: {e}")
            studies[image_id] = entry
        orphans = set(annotations) - set(studies)
        for image_id in sorted(orphans):
            errors.append(f"{image_id}: annotations reference a missing image file")
        return studies, errors

    def ingest(self) -> dict:
        """Build and persist the catalog; returns a summary with errors."""
        studies, errors = self._build_catalog()
        self._catalog = studies
        os.makedirs(os.path.dirname(self.config.catalog_path) or ".", exist_ok=True)
        with open(self.config.catalog_path, "w", encoding="utf-8") as fh:
            json.dump({"version": 1, "studies": studies}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return {
            "studies": len(studies),
            "findings": sum(s["finding_count"] for s in studies.values()),
            "errors": errors,
        }

    def validate(self) -> list[str]:
        """All ingestion diagnostics, without writing anything."""
        _, errors = self._build_catalog()
        return errors

    # --- study bundles ------------------------------------------------------

    def get_study(self, image_id: str) -> StudyBundle:
        with self._lock:
            bundle = self._bundles.get(image_id)
        if bundle is not None:
            return bundle
        entry = self.catalog().get(image_id)
        if entry is None:
            raise UnknownStudy(image_id)
        bundle = self._load_bundle(image_id, entry["path"])
        with self._lock:
            return self._bundles.setdefault(image_id, bundle)

    def _load_bundle(self, image_id: str, path: str) -> StudyBundle:
        cfg = self.config
        warnings: list[str] = []
        image = _load_image_any(path, image_id)

        rows = list(self._annotations().get(image_id, []))
        findings: list[Finding] = []
        for f in rows:
            msg = validate_against_image(f, image.width, image.height)
            if msg is None:
                findings.append(f)
            else:
                warnings.append(msg)

        regions: RegionSet | None = None
        geometry: ThoraxGeometry | None = None
        if cfg.masks_dir:
            regions = load_region_masks(
                cfg.masks_dir, image_id, expected_size=(image.width, image.height)
            )
        sidecar = self._geometry_entries().get(image_id)
        if sidecar is not None:
            geometry = derive_thorax_geometry(
                _parse_rect(sidecar.get("lung_right_img"), f"{image_id} lung_right_img"),
                _parse_rect(sidecar.get("lung_left_img"), f"{image_id} lung_left_img"),
                image.width,
                image.height,
                margin_frac=cfg.fractions.thorax_margin,
            )
        elif regions is not None:
            # no sidecar: recover lung rects from the external lobe masks
            geometry = derive_thorax_geometry(
                regions.breathing_right.bbox(),
                regions.breathing_left.bbox(),
                image.width,
                image.height,
                margin_frac=cfg.fractions.thorax_margin,
            )
        if regions is None and geometry is not None:
            regions = build_regions(geometry, cfg.fractions)

        quality = None
        if geometry is not None and regions is not None:
            quality = build_quality_report(image, geometry, regions, cfg.thresholds)

        triaged: dict[str, TriagedFinding] = {}
        for idx, f in enumerate(rows):
            fid = f"{image_id}:{idx}"
            if f not in findings:
                continue
            profile = self.registry.get(f.label) or fallback_profile(f.label)
            if f.bbox is None:
                triaged[fid] = summary_placeholder(f, profile, finding_id=fid)
            elif geometry is not None and regions is not None:
                triaged[fid] = score_finding(
                    f,
                    profile,
                    geometry,
                    regions,
                    cfg.weights,
                    smallness_area_frac=cfg.smallness_area_frac,
                    border_dist_frac=cfg.border_dist_frac,
                    finding_id=fid,
                )
            else:
                warnings.append(
                    f"finding {fid} ({f.label}) not triaged: study has no geometry"
                )

        stage_findings: dict[str, list[TriagedFinding]] = {}
        for tf in triaged.values():
            stage_findings.setdefault(tf.stage, []).append(tf)
        for stage in stage_findings:
            stage_findings[stage] = order_stage_findings(stage_findings[stage])

        ctr = None
        if geometry is not None:
            candidates = [
                tf
                for tf in stage_findings.get("C", [])
                if tf.finding.label in cfg.ctr_labels
            ] or sorted(
                (
                    tf
                    for tf in triaged.values()
                    if tf.finding.label in cfg.ctr_labels and tf.finding.bbox
                ),
                key=lambda tf: tf.finding_id,
            )
            if candidates:
                ctr = compute_ctr(candidates[0].finding.bbox, geometry, cfg.ctr_bands)

        return StudyBundle(
            image=image,
            findings=findings,
            geometry=geometry,
            regions=regions,
            quality=quality,
            triaged=triaged,
            stage_findings=stage_findings,
            ctr=ctr,
            warnings=warnings,
            viewport_factors=cfg.viewport_factors,
        )

    # --- study views ---------------------------------------------------------

    def list_studies(self) -> list[dict]:
        return [
            {
                "image_id": image_id,
                "finding_count": entry["finding_count"],
                "ripe_overall": entry.get("ripe_overall", "UNKNOWN"),
                "has_geometry": entry.get("has_geometry", False),
            }
            for image_id, entry in sorted(self.catalog().items())
        ]

    def study_detail(self, image_id: str) -> dict:
        bundle = self.get_study(image_id)
        regions_meta = None
        if bundle.regions is not None:
            regions_meta = {
                "provenance": bundle.regions.provenance,
                "thorax_bbox": list(bundle.regions.thorax_bbox.as_tuple()),
                "regions": {
                    rid: {
                        "bbox": list(region.bbox().as_tuple()),
                        "area": region.area(),
                    }
                    for rid, region in bundle.regions.named()
                },
            }
        return {
            "image_id": image_id,
            "width": bundle.image.width,
            "height": bundle.image.height,
            "bit_depth": bundle.image.bit_depth,
            "view_position": bundle.image.view_position,
            "source_format": bundle.image.source_format,
            "finding_count": len(bundle.triaged),
            "findings": [self._finding_dict(tf, None) for tf in bundle.triaged.values()],
            "regions": regions_meta,
            "quality": bundle.quality.to_dict() if bundle.quality else None,
            "ctr": bundle.ctr.to_dict() if bundle.ctr else None,
            "warnings": bundle.warnings,
        }

    # --- sessions -------------------------------------------------------------

    def start_session(self, image_id: str, clinician_id: str) -> SessionState:
        bundle = self.get_study(image_id)  # raises UnknownStudy
        if bundle.geometry is None or bundle.regions is None:
            raise MissingGeometry(
                f"{image_id}: no lung geometry or region masks; review needs regions"
            )
        return self.sessions.start(image_id, clinician_id)

    def session_state(self, session_id: str) -> SessionState:
        return self.sessions.get(session_id)

    def _finding_dict(self, tf: TriagedFinding, state: SessionState | None) -> dict:
        verdict = state.verdicts.get(tf.finding_id) if state is not None else None
        return {
            "finding_id": tf.finding_id,
            "label": tf.finding.label,
            "class_id": tf.finding.class_id,
            "rad_id": tf.finding.rad_id,
            "bbox": list(tf.finding.bbox.as_tuple()) if tf.finding.bbox else None,
            "priority": tf.priority,
            "smallness": tf.smallness,
            "border_proximity": tf.border_proximity,
            "region": tf.region_id,
            "region_fraction": tf.region_fraction,
            "stage": tf.stage,
            "context_class": tf.profile.context_class,
            "verdict": verdict["verdict"] if verdict else None,
            "note": verdict["note"] if verdict else "",
        }

    def _stage_region_bbox(self, bundle: StudyBundle, stage: str) -> Rect:
        regions = bundle.regions
        assert regions is not None
        if stage == "A":
            box = regions.airway.bbox()
        elif stage == "B":
            box = regions.breathing_left.bbox().union_bbox(
                regions.breathing_right.bbox()
            )
        elif stage == "C":
            box = regions.circulation.bbox()
        elif stage == "D":
            box = regions.diaphragm.bbox()
        elif stage == "E":
            box = regions.extras.bbox()
        else:
            box = regions.thorax_bbox
        return box if not box.is_empty else regions.thorax_bbox

    def stage_view(
        self, session_id: str, stage: str, viewport_w: int = 0, viewport_h: int = 0
    ) -> dict:
        state = self.sessions.get(session_id)
        if stage not in state.reachable_stages():
            raise StageNotReachable(
                f"stage {stage!r} not reachable from {state.stage_cursor}"
            )
        bundle = self.get_study(state.image_id)
        vw = viewport_w or self.config.report_viewport[0]
        vh = viewport_h or self.config.report_viewport[1]

        region_bbox = self._stage_region_bbox(bundle, stage)
        region_crop = solve_region_viewport(
            region_bbox, bundle.image.width, bundle.image.height, vw, vh
        )

        listed = bundle.stage_findings.get(stage, [])
        findings = []
        for tf in listed:
            d = self._finding_dict(tf, state)
            if tf.finding.bbox is not None:
                d["viewport"] = self.solve_finding_viewport(bundle, tf, vw, vh).to_dict()
            findings.append(d)

        view: dict = {
            "session_id": session_id,
            "stage": stage,
            "stage_cursor": state.stage_cursor,
            "visited": [s for s in STAGES if s in state.visited],
            "region_crop": region_crop.to_dict(),
            "findings": findings,
        }
        if stage == "QUALITY":
            view["quality"] = bundle.quality.to_dict() if bundle.quality else None
            view["manual_checks"] = dict(sorted(state.manual_checks.items()))
        elif stage == "ORIENTATION":
            view["orientation"] = {
                "view_position": bundle.image.view_position,
                "marking_status": "no laterality markers decoded; metadata only",
                "identified_sides": {
                    "patient_right_lung": "image left",
                    "patient_left_lung": "image right",
                },
                "thorax_bbox": list(bundle.regions.thorax_bbox.as_tuple()),
            }
        elif stage == "C":
            if bundle.ctr is not None:
                view["ctr"] = bundle.ctr.to_dict()
                view["ctr_scale"] = ctr_scale_annotation(bundle.ctr).to_dict()
        elif stage == "SUMMARY":
            all_findings = [
                self._finding_dict(tf, state)
                for s in ("A", "B", "C", "D", "E", "SUMMARY")
                for tf in bundle.stage_findings.get(s, [])
            ]
            unverdicted = [
                f["finding_id"] for f in all_findings if f["verdict"] is None
            ]
            view["all_findings"] = all_findings
            view["blockers"] = {
                "missing_stages": [s for s in STAGES if s not in state.visited],
                "unverdicted": unverdicted,
            }
        return view

    def set_verdict(
        self, session_id: str, finding_id: str, verdict: str, note: str = ""
    ) -> SessionState:
        state = self.sessions.get(session_id)
        bundle = self.get_study(state.image_id)
        tf = bundle.triaged.get(finding_id)
        if tf is None:
            raise UnknownFinding(finding_id)
        return self.sessions.set_verdict(
            session_id, finding_id, verdict, note, finding_stage=tf.stage
        )

    def set_manual_check(self, session_id: str, key: str, value: bool) -> SessionState:
        return self.sessions.set_manual_check(session_id, key, value)

    def advance(self, session_id: str) -> SessionState:
        return self.sessions.advance(session_id)

    def back(self, session_id: str, stage: str) -> SessionState:
        return self.sessions.back(session_id, stage)

    def build_report_for_state(self, state: SessionState) -> dict:
        bundle = self.get_study(state.image_id)
        return build_report(state, bundle, self.config.report_viewport)

    def finalize(self, session_id: str) -> dict:
        state = self.sessions.get(session_id)
        bundle = self.get_study(state.image_id)
        return self.sessions.finalize(
            session_id, bundle.finding_ids, self.build_report_for_state
        )

    def get_report(self, session_id: str) -> dict:
        state = self.sessions.get(session_id)
        if state.report is None:
            missing = [s for s in STAGES if s not in state.visited]
            bundle = self.get_study(state.image_id)
            unverdicted = [f for f in bundle.finding_ids if f not in state.verdicts]
            raise IncompleteReview(missing, unverdicted)
        return state.report

    # --- viewports and crops ------------------------------------------------

    def solve_finding_viewport(
        self, bundle: StudyBundle, tf: TriagedFinding, vw: int, vh: int
    ) -> ViewportSpec:
        assert bundle.geometry is not None
        return solve_viewport(
            tf.finding.bbox,
            tf.profile.context_class,
            bundle.geometry,
            vw,
            vh,
            regions=bundle.regions,
            factors=self.config.viewport_factors,
        )

    def viewport_for_finding(self, finding_id: str, vw: int, vh: int) -> ViewportSpec:
        image_id = finding_id.rsplit(":", 1)[0]
        if image_id not in self.catalog():
            raise UnknownFinding(finding_id)
        bundle = self.get_study(image_id)
        tf = bundle.triaged.get(finding_id)
        if tf is None or tf.finding.bbox is None:
            raise UnknownFinding(finding_id)
        if bundle.geometry is None:
            raise MissingGeometry(f"{image_id}: no geometry for viewport solving")
        return self.solve_finding_viewport(bundle, tf, vw, vh)

    def crop_png(
        self, image_id: str, x0: int, y0: int, x1: int, y1: int, out_w: int, out_h: int
    ) -> bytes:
        bundle = self.get_study(image_id)
        buffer = render_crop(bundle.image, Rect(x0, y0, x1, y1), out_w, out_h)
        return encode_png(buffer)
