from __future__ import annotations

import json
import os
import sys

import jsonschema
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from util import annotation_line, lung_image, write_png  # noqa: E402

from cxrboard import Rect, ServiceConfig, Workbench, packaged_data_path  # noqa: E402
from cxrboard.server import create_app  # noqa: E402

# the standard synthetic study: 512x512, symmetric lungs, findings in
# circulation (heart and aorta), breathing (small nodule), plus one
# "No finding" attestation row from a fourth annotator
LUNG_R = Rect(60, 60, 220, 420)
LUNG_L = Rect(290, 60, 450, 420)
HEART = Rect(150, 280, 370, 400)
AORTA = Rect(230, 220, 300, 290)
NODULE = Rect(100, 100, 124, 124)

CHEST01_ROWS = [
    ("chest01", "Aortic enlargement", 0, "R9", AORTA),
    ("chest01", "Cardiomegaly", 3, "R8", HEART),
    ("chest01", "Nodule/Mass", 14, "R10", NODULE),
    ("chest01", "No finding", 22, "R11", None),
]


@pytest.fixture
def study_env(tmp_path):
    """Two-study data directory: chest01 (full geometry) and chest02 (none)."""
    images = tmp_path / "images"
    images.mkdir()
    write_png(images / "chest01.png", lung_image(512, 512, (LUNG_R, LUNG_L)))
    write_png(images / "chest02.png", lung_image(300, 300))

    rows = [annotation_line(*r) for r in CHEST01_ROWS]
    rows.append(annotation_line("chest02", "Pneumothorax", 17, "R1", Rect(50, 50, 100, 100)))
    csv_path = tmp_path / "annotations.csv"
    csv_path.write_text(
        "image_id,class_name,class_id,rad_id,x_min,y_min,x_max,y_max\n"
        + "\n".join(rows)
        + "\n"
    )

    geometry_path = tmp_path / "geometry.json"
    geometry_path.write_text(
        json.dumps(
            {
                "chest01": {
                    "lung_right_img": list(LUNG_R.as_tuple()),
                    "lung_left_img": list(LUNG_L.as_tuple()),
                }
            }
        )
    )

    cfg = ServiceConfig(
        images_dir=str(images),
        annotations_csv=str(csv_path),
        geometry_json=str(geometry_path),
        sessions_dir=str(tmp_path / "sessions"),
        catalog_path=str(tmp_path / "catalog.json"),
    )
    return cfg


@pytest.fixture
def bench(study_env):
    return Workbench(study_env)


@pytest.fixture
def client(bench):
    from fastapi.testclient import TestClient

    return TestClient(create_app(bench), raise_server_exceptions=False)


@pytest.fixture(scope="session")
def api_schema():
    with open(packaged_data_path("api_schema.json"), "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def check_schema(api_schema):
    def check(name: str, instance) -> None:
        schema = {"$defs": api_schema["$defs"], "$ref": f"#/$defs/{name}"}
        jsonschema.validate(instance=instance, schema=schema)

    return check
