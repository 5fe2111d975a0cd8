"""Command-line entry points: serve, ingest, validate, derive-context, report."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ServiceConfig, load_config
from .errors import WorkbenchError
from .report import render_text
from .session import REPORT_FINALIZED, SessionEvent
from .triage import apply_context_classes, load_auc_table, load_registry, save_registry


_ARG_TO_CONFIG = {
    "images": "images_dir",
    "annotations": "annotations_csv",
    "masks": "masks_dir",
    "geometry": "geometry_json",
    "sessions": "sessions_dir",
    "catalog": "catalog_path",
}


def _config_from_args(args) -> ServiceConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ServiceConfig()
    for arg_name, attr in _ARG_TO_CONFIG.items():
        value = getattr(args, arg_name, None)
        if value:
            setattr(cfg, attr, value)
    return cfg


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="service config JSON")
    parser.add_argument("--images", help="images directory")
    parser.add_argument("--annotations", help="annotation CSV")
    parser.add_argument("--masks", help="external region-mask directory")
    parser.add_argument("--geometry", help="lung-geometry sidecar JSON")
    parser.add_argument("--sessions", help="session log directory")
    parser.add_argument("--catalog", help="catalog index output path")


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app
    from .workbench import Workbench

    cfg = _config_from_args(args)
    if args.host:
        cfg.host = args.host
    if args.port:
        cfg.port = args.port
    app = create_app(Workbench(cfg))
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


def cmd_ingest(args) -> int:
    from .workbench import Workbench

    cfg = _config_from_args(args)
    summary = Workbench(cfg).ingest()
    print(f"studies: {summary['studies']}")
    print(f"findings: {summary['findings']}")
    for err in summary["errors"]:
        print(f"error: {err}", file=sys.stderr)
    print(f"catalog written: {cfg.catalog_path}")
    return 1 if summary["errors"] else 0


def cmd_validate(args) -> int:
    from .workbench import Workbench

    cfg = _config_from_args(args)
    errors = Workbench(cfg).validate()
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    print(f"{len(errors)} problem(s) found")
    return 1 if errors else 0


def cmd_derive_context(args) -> int:
    profiles = load_auc_table(args.auc_table)
    registry = load_registry(args.registry) if os.path.exists(args.registry) else {}
    derived = apply_context_classes(registry, profiles)
    width = max(len(label) for label, _ in derived)
    for label, cls in derived:
        print(f"{label:<{width}}  {cls}")
    if args.write:
        save_registry(registry, args.registry)
        print(f"registry updated: {args.registry}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    if args.log:
        log_path = args.log
    else:
        cfg = _config_from_args(args)
        log_path = os.path.join(cfg.sessions_dir, f"{args.session}.jsonl")
    try:
        with open(log_path, "r", encoding="utf-8") as fh:
            events = [SessionEvent.from_line(line) for line in fh if line.strip()]
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    final = [e for e in events if e.kind == REPORT_FINALIZED]
    if not final:
        print(f"error: {log_path}: session has no finalized report", file=sys.stderr)
        return 1
    report = final[-1].payload["report"]
    if args.json:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        print()
    else:
        sys.stdout.write(render_text(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cxrboard",
        description="Chest X-ray review workbench: staged systematic reading "
        "of machine findings with miss-risk triage and context-aware crops.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_data_args(p)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ingest", help="validate inputs and build the catalog index")
    _add_data_args(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", help="run all ingestion checks, write nothing")
    _add_data_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "derive-context",
        help="derive display context classes from a resolution-AUC table",
    )
    p.add_argument("--auc-table", required=True, help="CSV: finding,auc_<N>,...")
    p.add_argument("--registry", required=True, help="disease registry JSON")
    p.add_argument("--write", action="store_true", help="update the registry file")
    p.set_defaults(func=cmd_derive_context)

    p = sub.add_parser("report", help="re-render a finalized report from its log")
    p.add_argument("--session", help="session id (looked up in sessions dir)")
    p.add_argument("--log", help="explicit path to a session JSONL log")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    _add_data_args(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report" and not (args.session or args.log):
        print("error: report needs --session or --log", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except WorkbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
