"""Command-line interface: ingest, compute, serve, analyze, export-graph.

``ingest`` validates raw files and stages canonical copies under
``<store>/inputs/``; ``compute`` builds the relevance graph, composes a
snapshot from the staged inputs, and publishes it; ``serve`` runs the HTTP
service over the store.  Exit codes: 0 success, 2 validation error,
1 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
from pathlib import Path

from . import composer, relevance, stats
from .ingestion import (
    ParseError,
    parse_engagement_csv,
    parse_grade_scale,
    parse_grades_csv,
    parse_layout,
    serialize_layout,
)
from .service import ServiceConfig, create_app
from .store import SnapshotStore

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2

logger = logging.getLogger(__name__)


class ValidationFailure(Exception):
    """User-input problem; rendered to stderr and mapped to exit code 2."""


def _snapshot_config_from_args(args, base: composer.SnapshotConfig) -> composer.SnapshotConfig:
    values = base.to_dict()
    for key in values:
        arg = getattr(args, key, None)
        if arg is not None:
            values[key] = arg
    return composer.SnapshotConfig.from_dict(values)


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", dest="min_similarity", type=float, default=None,
                        help="similarity floor for relevance edges (default 0.2)")
    parser.add_argument("--top-k", dest="top_k", type=int, default=None,
                        help="keep only each course's k strongest edges")
    parser.add_argument("--tokenizer-mode", dest="tokenizer_mode",
                        choices=["word", "cjk_bigram", "auto"], default=None)


def _load_service_config(args) -> ServiceConfig:
    config = ServiceConfig.load(config_file=getattr(args, "config", None))
    return config


def cmd_ingest(args) -> int:
    store = SnapshotStore(args.store)
    inputs = store.inputs_dir
    inputs.mkdir(parents=True, exist_ok=True)

    layout_bytes = Path(args.layout).read_bytes()
    layout = parse_layout(layout_bytes)
    known = layout.course_ids()
    summary: dict = {"courses": len(layout.courses), "rejects": {}}
    (inputs / "layout.json").write_bytes(serialize_layout(layout))

    if args.grade_scale:
        scale_bytes = Path(args.grade_scale).read_bytes()
        parse_grade_scale(scale_bytes)  # validate before staging
        (inputs / "grade_scale.json").write_bytes(scale_bytes)
    elif args.grades:
        raise ValidationFailure("--grades requires --grade-scale")

    if args.engagement:
        data = Path(args.engagement).read_bytes()
        parse = parse_engagement_csv(data, known)
        (inputs / "engagement.csv").write_bytes(data)
        summary["engagement_records"] = len(parse.records)
        summary["rejects"]["engagement"] = [
            {"line": r.line, "reason": r.reason} for r in parse.rejects
        ]
    if args.grades:
        data = Path(args.grades).read_bytes()
        scale = parse_grade_scale((inputs / "grade_scale.json").read_bytes())
        parse = parse_grades_csv(data, scale, known)
        (inputs / "grades.csv").write_bytes(data)
        summary["grade_records"] = len(parse.records)
        summary["rejects"]["grades"] = [
            {"line": r.line, "reason": r.reason} for r in parse.rejects
        ]

    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def _load_staged(store: SnapshotStore):
    inputs = store.inputs_dir
    layout_path = inputs / "layout.json"
    if not layout_path.exists():
        raise ValidationFailure(f"no staged inputs under {inputs}; run 'palm ingest' first")
    layout = parse_layout(layout_path.read_bytes())
    known = layout.course_ids()

    engagement = ()
    if (inputs / "engagement.csv").exists():
        engagement = parse_engagement_csv((inputs / "engagement.csv").read_bytes(), known).records

    grades = ()
    if (inputs / "grades.csv").exists():
        scale = parse_grade_scale((inputs / "grade_scale.json").read_bytes())
        grades = parse_grades_csv((inputs / "grades.csv").read_bytes(), scale, known).records
    return layout, engagement, grades


def _build_graph(layout, config: composer.SnapshotConfig) -> relevance.RelevanceGraph:
    corpus = layout.syllabus_corpus()
    policy = config.render_policy()
    if len(corpus) < 2:
        return relevance.RelevanceGraph(policy=policy, edges=())
    vectors = relevance.build_tfidf(corpus, mode=config.tokenizer_mode)
    return relevance.build_graph(vectors, policy)


def cmd_compute(args) -> int:
    store = SnapshotStore(args.store)
    base = _load_service_config(args).snapshot
    config = _snapshot_config_from_args(args, base)
    layout, engagement, grades = _load_staged(store)
    graph = _build_graph(layout, config)
    snapshot = composer.compose(layout, graph, engagement, grades, config)
    store.save(snapshot)
    store.publish(snapshot.snapshot_id)
    print(snapshot.snapshot_id)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    config = _load_service_config(args)
    overrides = {}
    if args.store is not None:
        overrides["store_path"] = Path(args.store)
    if args.port is not None:
        overrides["listen_port"] = args.port
    if args.admin_token is not None:
        overrides["admin_token"] = args.admin_token
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)

    app = create_app(config)
    host = args.host
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, config.listen_port))
    sock.listen(128)
    bound_port = sock.getsockname()[1]
    print(f"serving on http://{host}:{bound_port}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="info"))
    server.run(sockets=[sock])
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.instrument_file:
        instrument = stats.InstrumentDefinition.from_json(Path(args.instrument_file).read_bytes())
    else:
        instrument = stats.get_instrument(args.instrument)
    pre, post = stats.parse_survey_pair(
        Path(args.pre).read_bytes(), Path(args.post).read_bytes(), instrument
    )
    reports = stats.run_comparison(pre, post, instrument, args.alpha)
    if args.format == "md":
        print(stats.render_markdown(reports), end="")
    else:
        print(
            json.dumps(
                {
                    "instrument_id": instrument.instrument_id,
                    "sd_basis": stats.SD_BASIS,
                    "reports": stats.reports_to_json(reports),
                },
                indent=2,
                sort_keys=True,
            )
        )
    return EXIT_OK


def cmd_export_graph(args) -> int:
    config = composer.SnapshotConfig()
    config = _snapshot_config_from_args(args, config)
    if args.layout:
        layout = parse_layout(Path(args.layout).read_bytes())
    elif args.store:
        layout, _, _ = _load_staged(SnapshotStore(args.store))
    else:
        raise ValidationFailure("one of --layout or --store is required")
    graph = _build_graph(layout, config)
    payload = json.dumps(relevance.graph_export_dict(graph), indent=2, sort_keys=True)
    if args.out and args.out != "-":
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="palm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate raw files and stage them in the store")
    p.add_argument("--layout", required=True)
    p.add_argument("--engagement")
    p.add_argument("--grades")
    p.add_argument("--grade-scale", dest="grade_scale")
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("compute", help="compose and publish a snapshot from staged inputs")
    p.add_argument("--store", required=True)
    p.add_argument("--config")
    _add_policy_flags(p)
    p.add_argument("--cohort-mode", dest="cohort_mode",
                   choices=["before_viewer", "range", "all"], default=None)
    p.add_argument("--min-cohort-n", dest="min_cohort_n", type=int, default=None)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store")
    p.add_argument("--port", type=int, default=None, help="0 binds an ephemeral port")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--admin-token", dest="admin_token")
    p.add_argument("--config")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("analyze", help="run the pre/post survey comparison")
    p.add_argument("--instrument", default="tpb", help="preset name (tpb, lads)")
    p.add_argument("--instrument-file", dest="instrument_file",
                   help="custom instrument definition JSON")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--alpha", type=float, default=0.05,
                   help="normality-screen significance level")
    p.add_argument("--format", choices=["md", "json"], default="md")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export-graph", help="compute and export the relevance graph JSON")
    p.add_argument("--layout")
    p.add_argument("--store")
    p.add_argument("--out", default="-")
    _add_policy_flags(p)
    p.set_defaults(func=cmd_export_graph)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationFailure, ParseError, composer.IntegrityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
