#!/usr/bin/env python3
"""Regenerate the frontend test fixtures from real API responses.

Builds a seeded 12-course dataset, publishes a snapshot into a temporary
store, and captures /api/v1/map and /api/v1/courses/{id} payloads into
frontend/test/fixtures/.  Requires the test extra (httpx).
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from palm import demo
from palm.composer import SnapshotConfig, compose
from palm.ingestion import (
    parse_engagement_csv,
    parse_grade_scale,
    parse_grades_csv,
    parse_layout,
)
from palm.relevance import build_graph, build_tfidf
from palm.service import ServiceConfig, create_app
from palm.store import SnapshotStore

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "frontend" / "test" / "fixtures"
VIEWER = "stu001"


def main() -> int:
    layout_doc = demo.make_layout(n_courses=12, n_rows=4, n_columns=3, seed=3)
    engagement_csv = demo.make_engagement_csv(
        layout_doc, n_students=10, courses_per_student=8, seed=4
    )
    grades_csv = demo.make_grades_csv(engagement_csv, seed=5)
    scale = parse_grade_scale(json.dumps(demo.make_grade_scale()).encode())

    layout = parse_layout(json.dumps(layout_doc).encode())
    known = layout.course_ids()
    records = parse_engagement_csv(engagement_csv.encode(), known).records
    grades = parse_grades_csv(grades_csv.encode(), scale, known).records

    config = SnapshotConfig(min_similarity=0.15, cohort_mode="all", min_cohort_n=3)
    graph = build_graph(build_tfidf(layout.syllabus_corpus()), config.render_policy())
    snapshot = compose(
        layout, graph, records, grades, config, created_at="2026-08-09T00:00:00+00:00"
    )

    with tempfile.TemporaryDirectory() as tmp:
        store = SnapshotStore(tmp)
        store.save(snapshot)
        store.publish(snapshot.snapshot_id)
        app = create_app(ServiceConfig(store_path=Path(tmp)))
        with TestClient(app) as client:
            mapview = client.get("/api/v1/map", params={"student": VIEWER}).json()
            course_id = sorted(mapview["individual"]["values"])[0]
            card = client.get(
                f"/api/v1/courses/{course_id}", params={"student": VIEWER}
            ).json()

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    (FIXTURE_DIR / "mapview.json").write_text(
        json.dumps(mapview, indent=2, sort_keys=True) + "\n"
    )
    (FIXTURE_DIR / "hovercard.json").write_text(
        json.dumps(card, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {FIXTURE_DIR / 'mapview.json'}")
    print(f"wrote {FIXTURE_DIR / 'hovercard.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
