import io

import numpy as np
from PIL import Image

from cxrboard.session import STAGES


def _start(client, image_id="chest01"):
    resp = client.post("/sessions", json={"image_id": image_id, "clinician_id": "drX"})
    assert resp.status_code == 201
    return resp.json()["session_id"]


def _walk_to_summary(client, sid):
    for _ in range(len(STAGES) - 1):
        assert client.post(f"/sessions/{sid}/advance").status_code == 200


def test_healthz(client, check_schema):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    check_schema("health", resp.json())


def test_list_studies(client, check_schema):
    resp = client.get("/studies")
    assert resp.status_code == 200
    body = resp.json()
    check_schema("study_list", body)
    assert [s["image_id"] for s in body] == ["chest01", "chest02"]
    assert body[0]["finding_count"] == 4
    assert body[0]["has_geometry"] is True


def test_study_detail(client, check_schema):
    resp = client.get("/studies/chest01")
    assert resp.status_code == 200
    body = resp.json()
    check_schema("study_detail", body)
    assert body["ctr"]["severity"] == "BORDERLINE"

    missing = client.get("/studies/chest99")
    assert missing.status_code == 404
    check_schema("error", missing.json())
    assert missing.json()["code"] == "UNKNOWN_STUDY"


def test_session_lifecycle_over_http(client, check_schema):
    sid = _start(client)
    state = client.get(f"/sessions/{sid}").json()
    check_schema("session_state", state)
    assert state["stage_cursor"] == "QUALITY"
    assert state["visited"] == ["QUALITY"]

    adv = client.post(f"/sessions/{sid}/advance")
    assert adv.status_code == 200
    check_schema("navigation_result", adv.json())
    assert adv.json()["stage_cursor"] == "ORIENTATION"

    back = client.post(f"/sessions/{sid}/back", json={"stage": "QUALITY"})
    assert back.status_code == 200
    assert back.json()["stage_cursor"] == "QUALITY"
    assert back.json()["visited"] == ["QUALITY", "ORIENTATION"]

    bad_back = client.post(f"/sessions/{sid}/back", json={"stage": "E"})
    assert bad_back.status_code == 409
    assert bad_back.json()["code"] == "STAGE_NOT_REACHABLE"


def test_session_needs_geometry(client):
    resp = client.post(
        "/sessions", json={"image_id": "chest02", "clinician_id": "drX"}
    )
    assert resp.status_code == 409
    assert resp.json()["code"] == "MISSING_GEOMETRY"
    missing = client.post(
        "/sessions", json={"image_id": "chest99", "clinician_id": "drX"}
    )
    assert missing.status_code == 404


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/advance").status_code == 404
    assert client.get("/sessions/nope/report").status_code == 404


def test_stage_view_routes(client, check_schema):
    sid = _start(client)
    quality = client.get(f"/sessions/{sid}/stages/QUALITY")
    assert quality.status_code == 200
    check_schema("stage_view", quality.json())
    assert quality.json()["quality"]["overall"] == "WARN"

    blocked = client.get(f"/sessions/{sid}/stages/C")
    assert blocked.status_code == 409

    for _ in range(4):
        client.post(f"/sessions/{sid}/advance")
    c_view = client.get(f"/sessions/{sid}/stages/C", params={"vw": 640, "vh": 480})
    assert c_view.status_code == 200
    body = c_view.json()
    check_schema("stage_view", body)
    assert body["ctr"]["cardiomegaly_flag"] is True
    assert body["ctr_scale"]["band_label"] == "BORDERLINE"
    for f in body["findings"]:
        check_schema("finding", f)
        assert f["viewport"]["crop"][2] <= 512


def test_verdict_routes(client):
    sid = _start(client)
    for _ in range(4):
        client.post(f"/sessions/{sid}/advance")
    ok = client.post(
        f"/sessions/{sid}/verdicts",
        json={"finding_id": "chest01:0", "verdict": "ACCEPT", "note": "clear"},
    )
    assert ok.status_code == 200
    assert ok.json()["verdicts"]["chest01:0"]["verdict"] == "ACCEPT"

    invalid_value = client.post(
        f"/sessions/{sid}/verdicts",
        json={"finding_id": "chest01:0", "verdict": "MAYBE"},
    )
    assert invalid_value.status_code == 422  # schema-level rejection

    unknown = client.post(
        f"/sessions/{sid}/verdicts",
        json={"finding_id": "chest01:9", "verdict": "ACCEPT"},
    )
    assert unknown.status_code == 404
    assert unknown.json()["code"] == "UNKNOWN_FINDING"

    unreachable = client.post(
        f"/sessions/{sid}/verdicts",
        json={"finding_id": "chest01:3", "verdict": "ACCEPT"},
    )
    assert unreachable.status_code == 409  # SUMMARY stage not visited yet


def test_manual_check_route(client):
    sid = _start(client)
    resp = client.post(
        f"/sessions/{sid}/manual-checks",
        json={"key": "inspiration_ok", "value": True},
    )
    assert resp.status_code == 200
    assert resp.json()["manual_checks"] == {"inspiration_ok": True}
    empty_key = client.post(
        f"/sessions/{sid}/manual-checks", json={"key": "", "value": True}
    )
    assert empty_key.status_code == 422


def test_finalize_and_report(client, check_schema):
    sid = _start(client)
    premature = client.post(f"/sessions/{sid}/finalize")
    assert premature.status_code == 409
    body = premature.json()
    check_schema("error", body)
    assert body["code"] == "INCOMPLETE_REVIEW"
    assert body["details"]["missing_stages"]
    assert body["details"]["unverdicted"]

    _walk_to_summary(client, sid)
    for fid in ("chest01:0", "chest01:1", "chest01:2", "chest01:3"):
        client.post(
            f"/sessions/{sid}/verdicts", json={"finding_id": fid, "verdict": "ACCEPT"}
        )
    final = client.post(f"/sessions/{sid}/finalize")
    assert final.status_code == 200
    report = final.json()
    check_schema("report", report)
    assert report["attestation"] == "regions reviewed: 7/7"

    again = client.get(f"/sessions/{sid}/report")
    assert again.status_code == 200
    assert again.json() == report

    sealed = client.post(f"/sessions/{sid}/advance")
    assert sealed.status_code == 409
    assert sealed.json()["code"] == "SESSION_FINALIZED"


def test_crop_endpoint(client):
    resp = client.get(
        "/images/chest01/crop",
        params={"x0": 100, "y0": 100, "x1": 200, "y1": 150, "w": 64, "h": 32},
    )
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    img = Image.open(io.BytesIO(resp.content))
    assert (img.width, img.height) == (64, 32)
    assert np.asarray(img).dtype == np.uint8

    bad = client.get(
        "/images/chest01/crop",
        params={"x0": 0, "y0": 0, "x1": 900, "y1": 900, "w": 64, "h": 64},
    )
    assert bad.status_code == 400
    assert bad.json()["code"] == "SPEC_IMAGE_MISMATCH"

    absent = client.get(
        "/images/chest99/crop",
        params={"x0": 0, "y0": 0, "x1": 10, "y1": 10, "w": 8, "h": 8},
    )
    assert absent.status_code == 404


def test_viewport_endpoint(client, check_schema):
    resp = client.get("/findings/chest01:2/viewport", params={"vw": 800, "vh": 600})
    assert resp.status_code == 200
    spec = resp.json()
    check_schema("viewport_spec", spec)
    assert spec["context_class"] == "REGIONAL"
    crop = spec["crop"]
    assert crop[0] <= 100 and crop[2] >= 124  # nodule stays inside

    no_box = client.get("/findings/chest01:3/viewport", params={"vw": 800, "vh": 600})
    assert no_box.status_code == 404
    missing_params = client.get("/findings/chest01:2/viewport")
    assert missing_params.status_code == 422


def test_session_state_schema_all_routes(client, check_schema):
    sid = _start(client)
    for resp in (
        client.get(f"/sessions/{sid}"),
        client.post(
            f"/sessions/{sid}/manual-checks", json={"key": "rotation_ok", "value": False}
        ),
    ):
        assert resp.status_code == 200
        check_schema("session_state", resp.json())
