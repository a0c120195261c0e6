"""Command-line front door: serve, engineer, stats, validate.

Exit codes: 0 success, 1 runtime failure (including validation
violations), 2 usage errors. Machine-readable results go to stdout;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .dataset import DatasetRoot, validate_dataset
from .engineer import generate_composites, load_spec
from .errors import MaskStackError
from .service import DEFAULT_PORT, AnnotationSession, make_server
from .sources import MAX_DEVICES, SourceRegistry, open_source


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskstack",
        description="Headless image-annotation engine: HTTP service, "
                    "synthetic dataset generation, dataset statistics "
                    "and validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser(
        "serve", help="run the local annotation service",
        description="Serve the annotation API on 127.0.0.1 and write "
                    "annotations into the given dataset directory.",
    )
    serve.add_argument("--dataset", required=True, metavar="DIR",
                       help="dataset root (created if missing)")
    serve.add_argument("--source", action="append", default=[], metavar="SPEC",
                       help="frame source: dir:<path> | mjpeg:<url> | "
                            "synthetic[:seed]; repeat for up to "
                            f"{MAX_DEVICES} device slots")
    serve.add_argument("--port", type=int, default=DEFAULT_PORT, metavar="N",
                       help=f"TCP port (default {DEFAULT_PORT})")
    serve.add_argument("--ui", metavar="DIR", default=None,
                       help="directory with a built browser UI to serve at /")
    serve.add_argument("--verbose", action="store_true",
                       help="log each request to stderr")
    serve.set_defaults(func=_cmd_serve)

    engineer = sub.add_parser(
        "engineer", help="generate a synthetic dataset from cutouts",
        description="Composite annotated cutouts onto backgrounds into "
                    "image/mask pairs, deterministically from a seed.",
    )
    engineer.add_argument("--spec", required=True, metavar="FILE",
                          help="JSON spec with config, cutouts, backgrounds")
    engineer.add_argument("--out", required=True, metavar="DIR",
                          help="output dataset root")
    engineer.add_argument("--count", required=True, type=int, metavar="N",
                          help="number of pairs to generate")
    engineer.add_argument("--seed", type=int, default=0, metavar="S",
                          help="RNG seed (default 0)")
    engineer.set_defaults(func=_cmd_engineer)

    stats = sub.add_parser(
        "stats", help="print per-label pixel frequencies",
        description="Pool every mask in the dataset and print the "
                    "fraction of pixels per label as JSON.",
    )
    stats.add_argument("--dataset", required=True, metavar="DIR")
    stats.add_argument("--include-background", action="store_true",
                       help="count unlabeled pixels as a background entry")
    stats.set_defaults(func=_cmd_stats)

    validate = sub.add_parser(
        "validate", help="check dataset integrity",
        description="Verify pairing, dimensions, mask colors, and config "
                    "schema; exit 0 only when the dataset is clean.",
    )
    validate.add_argument("--dataset", required=True, metavar="DIR")
    validate.set_defaults(func=_cmd_validate)
    return parser


def _cmd_serve(args, parser: argparse.ArgumentParser) -> int:
    if len(args.source) > MAX_DEVICES:
        parser.error(
            f"{len(args.source)} sources requested; at most {MAX_DEVICES} "
            "camera device slots are supported"
        )
    sources = []
    for spec in args.source:
        try:
            sources.append(open_source(spec))
        except (ValueError, OSError) as exc:
            for source in sources:
                source.close()
            parser.error(str(exc))
    registry = SourceRegistry(sources)
    dataset = DatasetRoot.open_or_create(args.dataset)
    session = AnnotationSession(registry, dataset)
    try:
        server = make_server(session, port=args.port, static_dir=args.ui,
                             verbose=args.verbose)
    except OSError as exc:
        session.close()
        print(f"error: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return 1
    host, port = server.server_address[:2]
    print(f"http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        session.close()
    return 0


def _cmd_engineer(args, parser: argparse.ArgumentParser) -> int:
    if args.count <= 0:
        parser.error("--count must be a positive integer")
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must fit in 64 bits")
    spec = load_spec(args.spec, count=args.count, seed=args.seed)
    started = time.perf_counter()
    _, manifest_path = generate_composites(spec, args.out)
    elapsed = time.perf_counter() - started
    print(json.dumps({
        "manifest": str(manifest_path),
        "pairs": args.count,
        "seconds": round(elapsed, 3),
        "pairs_per_second": round(args.count / elapsed, 2) if elapsed else None,
    }))
    return 0


def _cmd_stats(args, parser: argparse.ArgumentParser) -> int:
    dataset = DatasetRoot.open(args.dataset)
    frequencies = dataset.class_frequencies(
        include_background=args.include_background
    )
    print(json.dumps(frequencies, indent=2, sort_keys=True))
    return 0


def _cmd_validate(args, parser: argparse.ArgumentParser) -> int:
    root = Path(args.dataset)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return 1
    violations = validate_dataset(root)
    print(json.dumps({"valid": not violations, "violations": violations},
                     indent=2))
    for violation in violations:
        print(f"violation: {violation}", file=sys.stderr)
    return 0 if not violations else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (MaskStackError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
