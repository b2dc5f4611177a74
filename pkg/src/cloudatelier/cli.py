"""Command line entry point.

    cloudatelier convert scan.las -o out/           index + byproduct
    cloudatelier info out/                          manifest summary
    cloudatelier segment out/ --epsilon 0.02        redo plane segmentation
    cloudatelier export-layer notes.json -o notes.dxf
    cloudatelier import-layer notes.json
    cloudatelier serve project.json --http 8080 --collab 8081

Exit codes: 0 success, 1 usage, 2 data error, 3 I/O. Every failure prints
one machine-parsable line: ``ERROR <code>: <detail>``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
import time
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CloudAtelierError, OutOfDiskSpace, TileCorrupt

log = logging.getLogger("cloudatelier.cli")

BYPRODUCT_TARGET = 500_000
CONFIG_ENV = "CLOUDATELIER_CONFIG"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1
    def error(self, message: str):
        raise _UsageError(message)


class _NdjsonFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps({
            "ts": round(record.created, 3),
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        }, sort_keys=True)


def _setup_logging(json_logs: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(_NdjsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("cloudatelier")
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO)


# ----------------------------------------------------------------- commands


def _default_threads() -> int:
    return os.cpu_count() or 1


def cmd_convert(args) -> int:
    from .ingest import open_source
    from .octree import BuildConfig, build_index, decimate
    from .planes import SegmenterConfig, segment_planes
    from .planes.byproduct import write_byproduct
    from .planes.segment import SegmentationResult

    t0 = time.monotonic()
    source = open_source(args.input)
    cfg = BuildConfig(
        root_spacing_divisor=args.spacing_div,
        node_capacity=args.node_capacity,
        chunk_threshold=args.chunk_threshold,
        threads=args.threads,
    ).validated()
    out = Path(args.output)
    manifest = build_index(source, cfg, out)
    log.info("indexed %d points into %d nodes (%.1fs)",
             manifest.total_points, len(manifest.nodes),
             time.monotonic() - t0)

    decimated = decimate(source.chunks(), BYPRODUCT_TARGET, seed=0)
    seg_cfg = SegmenterConfig()
    if len(decimated) >= 3:
        result = segment_planes(decimated, seg_cfg)
    else:
        result = SegmentationResult(
            points=decimated,
            assignment=np.zeros(len(decimated), dtype=np.uint16),
            planes=(), seed=seg_cfg.seed, config=seg_cfg)
    write_byproduct(out, result, manifest.aabb)
    log.info("byproduct: %d points, %d planes",
             len(result.points), len(result.planes))
    return 0


def cmd_info(args) -> int:
    # summary comes from manifest.json alone; tiles are never opened
    path = Path(args.directory) / "manifest.json"
    obj = json.loads(path.read_text(encoding="utf-8"))
    try:
        points = obj["totalPoints"]
        nodes = len(obj["nodes"])
        spacing = obj["rootSpacing"]
    except (KeyError, TypeError) as exc:
        raise TileCorrupt(f"manifest.json is missing {exc}") from exc
    print(f"points: {points}, nodes: {nodes}, spacing: {spacing}")
    return 0


def cmd_segment(args) -> int:
    from .octree import load_manifest
    from .planes import SegmenterConfig, segment_planes
    from .planes.byproduct import read_byproduct, write_byproduct

    out = Path(args.directory)
    manifest = load_manifest(out)
    points, _, _, _ = read_byproduct(out)
    cfg = SegmenterConfig(epsilon=args.epsilon, min_inliers=args.min_inliers,
                          seed=args.seed).validated()
    result = segment_planes(points, cfg)
    write_byproduct(out, result, manifest.aabb)
    log.info("segmented %d points into %d planes",
             len(points), len(result.planes))
    return 0


def _infer_format(path: Path, explicit: Optional[str]) -> str:
    if explicit:
        return explicit
    suffix = path.suffix.lower().lstrip(".")
    return suffix if suffix in ("json", "dxf") else "json"


def cmd_export_layer(args) -> int:
    from .measure import export_layer, import_layer

    doc = import_layer(Path(args.input).read_bytes(), format="json")
    out = Path(args.output)
    data = export_layer(doc, format=_infer_format(out, args.format))
    out.write_bytes(data)
    log.info("wrote %s (%d series)", out, len(doc.series))
    return 0


def cmd_import_layer(args) -> int:
    from .measure import export_layer, import_layer

    doc = import_layer(Path(args.input).read_bytes(), format="json")
    if args.output:
        Path(args.output).write_bytes(export_layer(doc, format="json"))
    print(f"layer: {doc.id}, series: {len(doc.series)}")
    return 0


def cmd_serve(args) -> int:
    from .collab import CollabService, load_project_config

    config_path = args.config or os.environ.get(CONFIG_ENV)
    if not config_path:
        raise _UsageError(
            f"a project config is required (argument or ${CONFIG_ENV})")
    cfg = load_project_config(config_path)

    # handlers go in before the ready line is printed, so a signal sent
    # right after seeing it cannot hit the default handler
    stop = threading.Event()

    def _on_signal(signum, frame):
        stop.set()

    signal.signal(signal.SIGINT, _on_signal)
    signal.signal(signal.SIGTERM, _on_signal)

    service = CollabService([cfg], collab_port=args.collab,
                            http_port=args.http)
    service.start()
    log.info("project %s: collab port %d, tile port %d",
             cfg.project_id, service.collab_port, service.http_port)
    try:
        stop.wait()
    finally:
        service.stop()
        log.info("stopped")
    return 0


# -------------------------------------------------------------------- wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="cloudatelier", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--json-logs", action="store_true",
                        help="emit NDJSON logs on stderr")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("convert", help="build an octree index + byproduct")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--spacing-div", type=float, default=250.0,
                   help="root spacing = cube diagonal / N (default 250)")
    p.add_argument("--node-capacity", type=int, default=20_000)
    p.add_argument("--chunk-threshold", type=int, default=100_000_000,
                   help="points above which the build shards to disk")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker threads; output is byte-identical "
                        "regardless of N")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("info", help="print a manifest summary")
    p.add_argument("directory")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("segment", help="redo byproduct plane segmentation")
    p.add_argument("directory")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--min-inliers", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("export-layer",
                       help="rewrite a layer document as JSON or DXF")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("json", "dxf"))
    p.set_defaults(func=cmd_export_layer)

    p = sub.add_parser("import-layer",
                       help="validate a layer document, optionally "
                            "canonicalize it")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_import_layer)

    p = sub.add_parser("serve", help="run the tile + collab servers")
    p.add_argument("config", nargs="?")
    p.add_argument("--http", type=int, default=8080)
    p.add_argument("--collab", type=int, default=8081)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"ERROR USAGE: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help prints and stops
        return 0 if not exc.code else 1

    _setup_logging(args.json_logs)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"ERROR USAGE: {exc}", file=sys.stderr)
        return 1
    except OutOfDiskSpace as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 3
    except CloudAtelierError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR IO: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"ERROR VALUE: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    raise SystemExit(main())
