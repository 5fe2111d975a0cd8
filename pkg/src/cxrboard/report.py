"""Finalized-review report: structured JSON plus a plain-text rendering.

The report is a pure function of the folded session state and the
immutable study bundle, so re-running the builder over a replayed event
log reproduces it byte for byte.  The attestation line makes the
completeness guarantee explicit: all seven pre-summary stages were
opened by the reviewer.
"""

from __future__ import annotations

from .measurements import ctr_scale_annotation
from .session import PRE_SUMMARY_STAGES, SessionState
from .viewport import solve_viewport

REVIEW_STAGES = ("A", "B", "C", "D", "E")
STAGE_REGION_TITLES = {
    "A": "airway",
    "B": "breathing",
    "C": "circulation",
    "D": "diaphragm",
    "E": "extras",
}


def _finding_entry(tf, state: SessionState, bundle, viewport_dims) -> dict:
    verdict = state.verdicts.get(tf.finding_id, {})
    entry = {
        "finding_id": tf.finding_id,
        "label": tf.finding.label,
        "rad_id": tf.finding.rad_id,
        "bbox": list(tf.finding.bbox.as_tuple()) if tf.finding.bbox else None,
        "priority": tf.priority,
        "context_class": tf.profile.context_class,
        "region": tf.region_id,
        "verdict": verdict.get("verdict"),
        "note": verdict.get("note", ""),
    }
    if tf.finding.bbox is not None and bundle.geometry is not None:
        spec = solve_viewport(
            tf.finding.bbox,
            tf.profile.context_class,
            bundle.geometry,
            viewport_dims[0],
            viewport_dims[1],
            regions=bundle.regions,
            factors=bundle.viewport_factors,
        )
        entry["viewport"] = spec.to_dict()
    return entry


def build_report(
    state: SessionState, bundle, viewport_dims: tuple[int, int] = (1024, 768)
) -> dict:
    """Assemble the structured report for a completed session."""
    reviewed = [s for s in PRE_SUMMARY_STAGES if s in state.visited]
    attestation = f"regions reviewed: {len(reviewed)}/{len(PRE_SUMMARY_STAGES)}"

    stages = []
    counts = {"ACCEPT": 0, "REJECT": 0, "UNCERTAIN": 0, "PENDING": 0}
    for stage in REVIEW_STAGES:
        listed = bundle.stage_findings.get(stage, [])
        section = {"stage": stage, "region": STAGE_REGION_TITLES[stage],
                   "accepted": [], "rejected": [], "uncertain": []}
        for tf in listed:
            entry = _finding_entry(tf, state, bundle, viewport_dims)
            verdict = entry["verdict"]
            if verdict == "ACCEPT":
                section["accepted"].append(entry)
            elif verdict == "REJECT":
                section["rejected"].append(entry)
            elif verdict == "UNCERTAIN":
                section["uncertain"].append(entry)
            else:
                section.setdefault("pending", []).append(entry)
            counts[verdict if verdict in counts else "PENDING"] += 1
        stages.append(section)

    no_finding = []
    for tf in bundle.stage_findings.get("SUMMARY", []):
        verdict = state.verdicts.get(tf.finding_id, {})
        counts[verdict.get("verdict") if verdict.get("verdict") in counts else "PENDING"] += 1
        no_finding.append(
            {
                "finding_id": tf.finding_id,
                "rad_id": tf.finding.rad_id,
                "verdict": verdict.get("verdict"),
                "note": verdict.get("note", ""),
            }
        )

    measurements = {}
    if bundle.ctr is not None:
        measurements["ctr"] = bundle.ctr.to_dict()
        measurements["ctr_scale"] = ctr_scale_annotation(bundle.ctr).to_dict()

    quality = bundle.quality.to_dict() if bundle.quality is not None else None
    if quality is not None and "inspiration_ok" in state.manual_checks:
        adequate = state.manual_checks["inspiration_ok"]
        quality["inspiration"] = {
            "status": "MANUAL",
            "note": "confirmed adequate by reviewer"
            if adequate
            else "marked inadequate by reviewer",
            "adequate": adequate,
        }

    return {
        "attestation": attestation,
        "session": {
            "session_id": state.session_id,
            "image_id": state.image_id,
            "clinician_id": state.clinician_id,
            "created_at": state.created_at,
            "completed_at": state.updated_at,
        },
        "quality": quality,
        "orientation": {
            "view_position": bundle.image.view_position,
            "identified_sides": {
                "patient_right_lung": "image left",
                "patient_left_lung": "image right",
            },
        },
        "stages": stages,
        "measurements": measurements,
        "summary": {"no_finding": no_finding, "verdict_counts": counts},
        "manual_checks": dict(sorted(state.manual_checks.items())),
    }


def render_text(report: dict) -> str:
    """Deterministic plain-text rendering of a structured report."""
    lines = []
    s = report["session"]
    lines.append(f"REVIEW REPORT  study={s['image_id']}  session={s['session_id']}")
    lines.append(f"reviewer: {s['clinician_id']}")
    lines.append(report["attestation"])
    lines.append("")

    q = report.get("quality")
    if q:
        lines.append("image quality")
        lines.append(
            f"  rotation: {q['rotation']['status']} (score {q['rotation']['score']:.4f})"
        )
        lines.append(f"  inspiration: {q['inspiration']['status']} - {q['inspiration']['note']}")
        proj_note = f" - {q['projection']['note']}" if q["projection"]["note"] else ""
        lines.append(
            f"  projection: {q['projection']['value']} {q['projection']['status']}{proj_note}"
        )
        lines.append(
            "  exposure: {status} (mean {mean:.4f}, saturated {sat:.4f})".format(
                status=q["exposure"]["status"],
                mean=q["exposure"]["mean_lung_intensity"],
                sat=q["exposure"]["saturated_fraction"],
            )
        )
        lines.append(f"  overall: {q['overall']}")
        lines.append("")

    for section in report["stages"]:
        lines.append(f"stage {section['stage']} ({section['region']})")
        for key in ("accepted", "rejected", "uncertain"):
            for e in section[key]:
                note = f"  note: {e['note']}" if e["note"] else ""
                lines.append(
                    f"  [{key.upper()}] {e['label']} "
                    f"({e['finding_id']}, {e['rad_id']}, {e['context_class']}, "
                    f"priority {e['priority']:.3f}){note}"
                )
        if not (section["accepted"] or section["rejected"] or section["uncertain"]):
            lines.append("  no findings")
        lines.append("")

    m = report.get("measurements") or {}
    if "ctr" in m:
        c = m["ctr"]
        lines.append(
            "cardio-thoracic ratio: {ratio:.4f} (mrd {mrd} + mld {mld}) / id {id} "
            "-> {severity}".format(
                ratio=c["ratio"], mrd=c["mrd"], mld=c["mld"], id=c["id"],
                severity=c["severity"],
            )
        )
        lines.append("")

    summary = report["summary"]
    if summary["no_finding"]:
        lines.append("no-finding attestations")
        for e in summary["no_finding"]:
            lines.append(f"  {e['finding_id']} ({e['rad_id']}): {e['verdict']}")
        lines.append("")
    counts = summary["verdict_counts"]
    lines.append(
        "verdicts: {a} accepted, {r} rejected, {u} uncertain".format(
            a=counts["ACCEPT"], r=counts["REJECT"], u=counts["UNCERTAIN"]
        )
    )
    return "\n".join(lines) + "\n"
