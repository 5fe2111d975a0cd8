"""Service configuration: paths, thresholds, fractions, and weights.

Everything tunable lives here with the shipped defaults, loadable from a
single JSON file.  A packaged disease registry and resolution-AUC table
are used when the config names none, so a data directory with images,
an annotation CSV and a geometry sidecar is enough to serve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError
from .measurements import CtrBands
from .quality import QualityThresholds
from .regions import RegionFractions
from .triage import TriageWeights
from .viewport import ViewportFactors


def packaged_data_path(name: str) -> str:
    """Filesystem path of a data file shipped inside the package."""
    return str(resources.files("cxrboard").joinpath("data", name))


@dataclass
class ServiceConfig:
    images_dir: str = "data/images"
    annotations_csv: str = "data/annotations.csv"
    masks_dir: str | None = None
    geometry_json: str | None = None
    sessions_dir: str = "data/sessions"
    catalog_path: str = "data/catalog.json"
    registry_path: str = field(default_factory=lambda: packaged_data_path("registry.json"))
    auc_table_path: str = field(
        default_factory=lambda: packaged_data_path("resolution_auc.csv")
    )
    host: str = "127.0.0.1"
    port: int = 8570
    ctr_labels: tuple[str, ...] = ("Cardiomegaly",)
    report_viewport: tuple[int, int] = (1024, 768)
    smallness_area_frac: float = 0.05
    border_dist_frac: float = 0.05
    fractions: RegionFractions = field(default_factory=RegionFractions)
    thresholds: QualityThresholds = field(default_factory=QualityThresholds)
    ctr_bands: CtrBands = field(default_factory=CtrBands)
    weights: TriageWeights = field(default_factory=TriageWeights)
    viewport_factors: ViewportFactors = field(default_factory=ViewportFactors)

    def validate(self) -> None:
        self.weights.validate(require_unit_sum=True)
        if self.report_viewport[0] <= 0 or self.report_viewport[1] <= 0:
            raise ConfigError(f"report viewport {self.report_viewport}")
        if not (0 < self.smallness_area_frac <= 1):
            raise ConfigError(f"smallness_area_frac {self.smallness_area_frac}")
        if not (0 < self.border_dist_frac <= 1):
            raise ConfigError(f"border_dist_frac {self.border_dist_frac}")
        bands = self.ctr_bands
        if not (0 < bands.borderline < bands.moderate < bands.severe):
            raise ConfigError(
                f"ctr bands must increase: {bands.borderline}, "
                f"{bands.moderate}, {bands.severe}"
            )


_BLOCKS = {
    "fractions": RegionFractions,
    "thresholds": QualityThresholds,
    "ctr_bands": CtrBands,
    "weights": TriageWeights,
    "viewport_factors": ViewportFactors,
}

_SCALARS = (
    "images_dir",
    "annotations_csv",
    "masks_dir",
    "geometry_json",
    "sessions_dir",
    "catalog_path",
    "registry_path",
    "auc_table_path",
    "host",
    "port",
    "smallness_area_frac",
    "border_dist_frac",
)


def config_from_dict(raw: dict) -> ServiceConfig:
    cfg = ServiceConfig()
    known = set(_SCALARS) | set(_BLOCKS) | {"ctr_labels", "report_viewport"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in _SCALARS:
        if key in raw:
            setattr(cfg, key, raw[key])
    if "ctr_labels" in raw:
        cfg.ctr_labels = tuple(raw["ctr_labels"])
    if "report_viewport" in raw:
        vw, vh = raw["report_viewport"]
        cfg.report_viewport = (int(vw), int(vh))
    for key, cls in _BLOCKS.items():
        if key in raw:
            block = raw[key]
            if not isinstance(block, dict):
                raise ConfigError(f"config block {key!r} must be an object")
            try:
                setattr(cfg, key, cls(**block))
            except TypeError as e:
                raise ConfigError(f"config block {key!r}: {e}") from e
    cfg.validate()
    return cfg


def load_config(path: str) -> ServiceConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"{path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(raw)
