"""Immutable map snapshots and their query-time views.

A snapshot materializes the base map plus all four data layers from
validated inputs.  Its id is a content hash over inputs and configuration,
so identical inputs always produce the identical id; the creation
timestamp is metadata and never enters the hash.  Serving never mutates a
snapshot: :func:`view` projects it through display settings, recomputing
engagement composites for the selected metrics and masking cohort values
below the minimum cohort size.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Mapping, Sequence

from .engagement import (
    DEFAULT_MIN_COHORT_N,
    METRICS,
    CohortFilter,
    DisplaySettings,
    EngagementComposite,
    cohort_composite,
    composite_of_parts,
    format_grade,
    mask_small_cohort,
    viewer_cohort_year,
)
from .ingestion import (
    Course,
    CurriculumLayout,
    EngagementRecord,
    GradeRecord,
)
from .relevance import RelevanceGraph, RelevanceEdge, RenderPolicy, graph_export_dict


class IntegrityError(ValueError):
    pass


@dataclass(frozen=True)
class SnapshotConfig:
    """Effective configuration captured inside a snapshot."""

    min_similarity: float = 0.2
    top_k: int | None = None
    tokenizer_mode: str = "word"
    cohort_mode: str = "before_viewer"
    cohort_first_year: int | None = None
    cohort_last_year: int | None = None
    min_cohort_n: int = DEFAULT_MIN_COHORT_N

    def render_policy(self) -> RenderPolicy:
        return RenderPolicy(min_similarity=self.min_similarity, top_k=self.top_k)

    def cohort_filter(self) -> CohortFilter:
        return CohortFilter(
            mode=self.cohort_mode,
            first_year=self.cohort_first_year,
            last_year=self.cohort_last_year,
        )

    def to_dict(self) -> dict:
        return {
            "min_similarity": self.min_similarity,
            "top_k": self.top_k,
            "tokenizer_mode": self.tokenizer_mode,
            "cohort_mode": self.cohort_mode,
            "cohort_first_year": self.cohort_first_year,
            "cohort_last_year": self.cohort_last_year,
            "min_cohort_n": self.min_cohort_n,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SnapshotConfig":
        return cls(**{k: doc[k] for k in cls().to_dict() if k in doc})


@dataclass(frozen=True)
class MapSnapshot:
    snapshot_id: str
    layout: CurriculumLayout
    relevance: RelevanceGraph
    individual_engagement: Mapping[str, Mapping[str, EngagementComposite]]
    cohort_engagement: Mapping[str, EngagementComposite]
    grades: Mapping[str, Mapping[str, GradeRecord]]
    engagement_records: tuple[EngagementRecord, ...]
    config: SnapshotConfig
    created_at: str


def _canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _course_dict(c: Course) -> dict:
    entry = {
        "course_id": c.course_id,
        "title": c.title,
        "semester_index": c.semester_index,
        "objective_row": c.objective_row,
        "credits": c.credits,
        "overview_text": c.overview_text,
        "lecture_plan_text": c.lecture_plan_text,
    }
    if c.cell_order is not None:
        entry["cell_order"] = c.cell_order
    return entry


def _record_dict(r: EngagementRecord) -> dict:
    return {
        "student_id": r.student_id,
        "course_id": r.course_id,
        "attendance_rate": r.attendance_rate,
        "quiz_score": r.quiz_score,
        "assignment_submission_rate": r.assignment_submission_rate,
        "cohort_year": r.cohort_year,
    }


def snapshot_id_for(
    layout: CurriculumLayout,
    graph: RelevanceGraph,
    engagement: Sequence[EngagementRecord],
    grades: Sequence[GradeRecord],
    config: SnapshotConfig,
) -> str:
    """Deterministic content hash over inputs and configuration."""
    payload = {
        "layout": {
            "curriculum_id": layout.curriculum_id,
            "rows": list(layout.rows),
            "columns": list(layout.columns),
            "courses": [_course_dict(c) for c in sorted(layout.courses, key=lambda c: c.course_id)],
        },
        "relevance": graph_export_dict(graph),
        "engagement": sorted(
            (_record_dict(r) for r in engagement),
            key=lambda d: (d["student_id"], d["course_id"]),
        ),
        "grades": sorted(
            (
                {
                    "student_id": g.student_id,
                    "course_id": g.course_id,
                    "letter": g.letter,
                    "grade_point": g.grade_point,
                }
                for g in grades
            ),
            key=lambda d: (d["student_id"], d["course_id"]),
        ),
        "config": config.to_dict(),
    }
    return hashlib.sha256(_canonical_json(payload).encode("utf-8")).hexdigest()


def compose(
    layout: CurriculumLayout,
    graph: RelevanceGraph,
    engagement: Sequence[EngagementRecord],
    grades: Sequence[GradeRecord],
    config: SnapshotConfig = SnapshotConfig(),
    created_at: str | None = None,
) -> MapSnapshot:
    """Assemble the immutable snapshot with all layers materialized.

    Raises :class:`IntegrityError` when any edge or record references a
    course that is not on the layout.
    """
    known = layout.course_ids()
    for e in graph.edges:
        for cid in (e.course_a, e.course_b):
            if cid not in known:
                raise IntegrityError(f"relevance edge references unknown course '{cid}'")
    for r in engagement:
        if r.course_id not in known:
            raise IntegrityError(f"engagement record references unknown course '{r.course_id}'")
    for g in grades:
        if g.course_id not in known:
            raise IntegrityError(f"grade record references unknown course '{g.course_id}'")

    all_metrics = DisplaySettings()
    individual: dict[str, dict[str, EngagementComposite]] = {}
    for r in sorted(engagement, key=lambda r: (r.student_id, r.course_id)):
        parts = {m: r.metric(m) for m in METRICS}
        individual.setdefault(r.student_id, {})[r.course_id] = EngagementComposite(
            course_id=r.course_id,
            kind="individual",
            student_id=r.student_id,
            value=composite_of_parts(parts),
            parts=parts,
        )

    cohort: dict[str, EngagementComposite] = {}
    for cid in sorted({r.course_id for r in engagement}):
        composite = cohort_composite(
            engagement, cid, all_metrics, config.cohort_filter(), viewer_year=None
        )
        if composite.n_contributors:
            cohort[cid] = composite

    grade_map: dict[str, dict[str, GradeRecord]] = {}
    for g in sorted(grades, key=lambda g: (g.student_id, g.course_id)):
        grade_map.setdefault(g.student_id, {})[g.course_id] = g

    return MapSnapshot(
        snapshot_id=snapshot_id_for(layout, graph, engagement, grades, config),
        layout=layout,
        relevance=graph,
        individual_engagement=individual,
        cohort_engagement=cohort,
        grades=grade_map,
        engagement_records=tuple(engagement),
        config=config,
        created_at=created_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


@dataclass(frozen=True)
class MapView:
    """Filtered projection of a snapshot for one viewer and settings choice."""

    snapshot_id: str
    curriculum_id: str
    student_id: str | None
    settings: DisplaySettings
    base: dict
    relevance: dict | None
    individual: dict | None
    cohort: dict | None
    grades: dict | None

    def to_dict(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "curriculum_id": self.curriculum_id,
            "student_id": self.student_id,
            "settings": {
                "layers": sorted(self.settings.show_layers),
                "metrics": sorted(self.settings.metrics_included),
                "grade_mode": self.settings.grade_mode,
            },
            "base": self.base,
            "relevance": self.relevance,
            "individual": self.individual,
            "cohort": self.cohort,
            "grades": self.grades,
        }

    def to_json(self) -> str:
        return _canonical_json(self.to_dict())


def view(
    snapshot: MapSnapshot, student_id: str | None, settings: DisplaySettings
) -> MapView:
    """Project a snapshot through display settings for one viewer.

    Pure: identical arguments serialize byte-identically.  An unknown
    student yields empty individual and grade layers while the cohort
    layer still renders.
    """
    layout = snapshot.layout
    base = {
        "rows": list(layout.rows),
        "columns": list(layout.columns),
        "blocks": [
            {
                "course_id": c.course_id,
                "title": c.title,
                "objective_row": c.objective_row,
                "semester_index": c.semester_index,
                "credits": c.credits,
                "cell_order": c.cell_order,
            }
            for c in sorted(layout.courses, key=lambda c: c.course_id)
        ],
    }

    relevance = None
    if "relevance" in settings.show_layers:
        relevance = graph_export_dict(snapshot.relevance)

    ordered_metrics = [m for m in METRICS if m in settings.metrics_included]

    individual = None
    if "individual" in settings.show_layers:
        values: dict[str, dict] = {}
        if student_id is not None:
            for cid, composite in sorted(
                snapshot.individual_engagement.get(student_id, {}).items()
            ):
                parts = {m: composite.parts.get(m) for m in ordered_metrics}
                values[cid] = {"value": composite_of_parts(parts), "parts": parts}
        individual = {"values": values}

    cohort = None
    if "cohort" in settings.show_layers:
        viewer_year = viewer_cohort_year(snapshot.engagement_records, student_id)
        values = {}
        for cid in sorted({r.course_id for r in snapshot.engagement_records}):
            composite = cohort_composite(
                snapshot.engagement_records,
                cid,
                settings,
                snapshot.config.cohort_filter(),
                viewer_year=viewer_year,
            )
            if not composite.n_contributors:
                continue
            composite = mask_small_cohort(composite, snapshot.config.min_cohort_n)
            values[cid] = composite.to_dict()
        cohort = {"values": values}

    grades = None
    if "grades" in settings.show_layers:
        pins: dict[str, str | float] = {}
        if settings.grade_mode != "none" and student_id is not None:
            for cid, record in sorted(snapshot.grades.get(student_id, {}).items()):
                formatted = format_grade(record, settings.grade_mode)
                if formatted is not None:
                    pins[cid] = formatted
        grades = {"mode": settings.grade_mode, "pins": pins}

    return MapView(
        snapshot_id=snapshot.snapshot_id,
        curriculum_id=layout.curriculum_id,
        student_id=student_id,
        settings=settings,
        base=base,
        relevance=relevance,
        individual=individual,
        cohort=cohort,
        grades=grades,
    )


def snapshot_to_dict(snapshot: MapSnapshot) -> dict:
    return {
        "snapshot_id": snapshot.snapshot_id,
        "created_at": snapshot.created_at,
        "config": snapshot.config.to_dict(),
        "layout": {
            "curriculum_id": snapshot.layout.curriculum_id,
            "rows": list(snapshot.layout.rows),
            "columns": list(snapshot.layout.columns),
            "courses": [
                _course_dict(c)
                for c in sorted(snapshot.layout.courses, key=lambda c: c.course_id)
            ],
        },
        "relevance": graph_export_dict(snapshot.relevance),
        "individual_engagement": {
            sid: {cid: comp.to_dict() for cid, comp in sorted(by_course.items())}
            for sid, by_course in sorted(snapshot.individual_engagement.items())
        },
        "cohort_engagement": {
            cid: comp.to_dict() for cid, comp in sorted(snapshot.cohort_engagement.items())
        },
        "grades": {
            sid: {
                cid: {"letter": g.letter, "grade_point": g.grade_point}
                for cid, g in sorted(by_course.items())
            }
            for sid, by_course in sorted(snapshot.grades.items())
        },
        "engagement_records": [
            _record_dict(r)
            for r in sorted(
                snapshot.engagement_records, key=lambda r: (r.student_id, r.course_id)
            )
        ],
    }


def snapshot_from_dict(doc: Mapping) -> MapSnapshot:
    layout = CurriculumLayout(
        curriculum_id=doc["layout"]["curriculum_id"],
        rows=tuple(doc["layout"]["rows"]),
        columns=tuple(doc["layout"]["columns"]),
        courses=tuple(
            Course(
                course_id=c["course_id"],
                title=c["title"],
                semester_index=c["semester_index"],
                objective_row=c["objective_row"],
                credits=c["credits"],
                overview_text=c["overview_text"],
                lecture_plan_text=c["lecture_plan_text"],
                cell_order=c.get("cell_order"),
            )
            for c in doc["layout"]["courses"]
        ),
    )
    config = SnapshotConfig.from_dict(doc["config"])
    graph = RelevanceGraph(
        policy=config.render_policy(),
        edges=tuple(
            RelevanceEdge(e["a"], e["b"], e["similarity"]) for e in doc["relevance"]["edges"]
        ),
    )
    records = tuple(
        EngagementRecord(
            student_id=r["student_id"],
            course_id=r["course_id"],
            attendance_rate=r["attendance_rate"],
            quiz_score=r["quiz_score"],
            assignment_submission_rate=r["assignment_submission_rate"],
            cohort_year=r["cohort_year"],
        )
        for r in doc["engagement_records"]
    )
    individual = {
        sid: {
            cid: EngagementComposite(
                course_id=cid,
                kind="individual",
                student_id=sid,
                value=comp["value"],
                parts=comp["parts"],
            )
            for cid, comp in by_course.items()
        }
        for sid, by_course in doc["individual_engagement"].items()
    }
    cohort = {
        cid: EngagementComposite(
            course_id=cid,
            kind="cohort",
            student_id=None,
            value=comp["value"],
            parts=comp["parts"],
            n_contributors=comp["n_contributors"],
        )
        for cid, comp in doc["cohort_engagement"].items()
    }
    grades = {
        sid: {
            cid: GradeRecord(sid, cid, entry["letter"], entry["grade_point"])
            for cid, entry in by_course.items()
        }
        for sid, by_course in doc["grades"].items()
    }
    return MapSnapshot(
        snapshot_id=doc["snapshot_id"],
        layout=layout,
        relevance=graph,
        individual_engagement=individual,
        cohort_engagement=cohort,
        grades=grades,
        engagement_records=records,
        config=config,
        created_at=doc["created_at"],
    )
