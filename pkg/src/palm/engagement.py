"""Individual and cohort engagement composites plus the hover-card payload.

A composite is the arithmetic mean of the included, non-missing metrics;
missing data is averaged over, never imputed as zero.  Cohort values are
means of per-metric means so that students with partial data still
contribute where they have data.  Privacy masking (minimum cohort size)
applies at presentation surfaces, not inside the aggregation itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .ingestion import CurriculumLayout, EngagementRecord, GradeRecord
from .relevance import RelevanceGraph

METRICS = ("attendance", "quiz", "assignment")
LAYERS = ("relevance", "individual", "cohort", "grades")
GRADE_MODES = ("letter", "grade_point", "none")

DEFAULT_MIN_COHORT_N = 3


class UnknownCourseError(LookupError):
    pass


@dataclass(frozen=True)
class DisplaySettings:
    """User-facing display choices: metrics, grade rendering, visible layers."""

    metrics_included: frozenset[str] = frozenset(METRICS)
    grade_mode: str = "letter"
    show_layers: frozenset[str] = frozenset(LAYERS)

    def __post_init__(self) -> None:
        unknown = self.metrics_included - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        unknown = self.show_layers - set(LAYERS)
        if unknown:
            raise ValueError(f"unknown layers: {sorted(unknown)}")
        if self.grade_mode not in GRADE_MODES:
            raise ValueError(f"unknown grade_mode '{self.grade_mode}'")
        if not self.metrics_included and (
            "individual" in self.show_layers or "cohort" in self.show_layers
        ):
            raise ValueError("metrics_included must be non-empty when engagement layers are shown")


@dataclass(frozen=True)
class CohortFilter:
    """Which cohort years feed the past-takers layer.

    ``before_viewer`` admits records strictly older than the viewing
    student's cohort year (all records when no viewer year is known);
    ``range`` admits first_year..last_year inclusive (None = unbounded);
    ``all`` admits everything.
    """

    mode: str = "before_viewer"
    first_year: int | None = None
    last_year: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("before_viewer", "range", "all"):
            raise ValueError(f"unknown cohort filter mode '{self.mode}'")

    def admits(self, cohort_year: int, viewer_year: int | None = None) -> bool:
        if self.mode == "all":
            return True
        if self.mode == "range":
            if self.first_year is not None and cohort_year < self.first_year:
                return False
            if self.last_year is not None and cohort_year > self.last_year:
                return False
            return True
        return viewer_year is None or cohort_year < viewer_year


@dataclass(frozen=True)
class EngagementComposite:
    course_id: str
    kind: str  # "individual" | "cohort"
    student_id: str | None
    value: float | None
    parts: Mapping[str, float | None]
    n_contributors: int | None = None  # cohort only

    def to_dict(self) -> dict:
        payload: dict = {"value": self.value, "parts": dict(self.parts)}
        if self.kind == "cohort":
            payload["n_contributors"] = self.n_contributors
        return payload


def _mean(values: list[float]) -> float | None:
    if not values:
        return None
    values.sort()  # fixed summation order: result independent of record order
    return math.fsum(values) / len(values)


def composite_of_parts(parts: Mapping[str, float | None]) -> float | None:
    """Mean of the non-missing part values; None when all are missing."""
    return _mean([v for v in parts.values() if v is not None])


def _ordered_metrics(settings: DisplaySettings) -> list[str]:
    return [m for m in METRICS if m in settings.metrics_included]


def individual_composite(
    records: Iterable[EngagementRecord],
    student_id: str,
    course_id: str,
    settings: DisplaySettings,
) -> EngagementComposite:
    """Mean of the student's included, non-missing metrics for one course."""
    record = next(
        (r for r in records if r.student_id == student_id and r.course_id == course_id), None
    )
    parts: dict[str, float | None] = {
        m: (record.metric(m) if record is not None else None) for m in _ordered_metrics(settings)
    }
    return EngagementComposite(
        course_id=course_id,
        kind="individual",
        student_id=student_id,
        value=composite_of_parts(parts),
        parts=parts,
    )


def cohort_composite(
    records: Iterable[EngagementRecord],
    course_id: str,
    settings: DisplaySettings,
    cohort_filter: CohortFilter = CohortFilter(),
    viewer_year: int | None = None,
) -> EngagementComposite:
    """Mean of per-metric means over the filtered past takers of a course."""
    cohort = [
        r
        for r in records
        if r.course_id == course_id and cohort_filter.admits(r.cohort_year, viewer_year)
    ]
    metrics = _ordered_metrics(settings)
    parts: dict[str, float | None] = {}
    for m in metrics:
        parts[m] = _mean([r.metric(m) for r in cohort if r.metric(m) is not None])
    contributors = {
        r.student_id for r in cohort if any(r.metric(m) is not None for m in metrics)
    }
    value = composite_of_parts(parts)
    return EngagementComposite(
        course_id=course_id,
        kind="cohort",
        student_id=None,
        value=value,
        parts=parts,
        n_contributors=len(contributors),
    )


def mask_small_cohort(
    composite: EngagementComposite, min_cohort_n: int = DEFAULT_MIN_COHORT_N
) -> EngagementComposite:
    """Blank aggregate values when too few students contributed (privacy)."""
    if composite.kind != "cohort":
        return composite
    if (composite.n_contributors or 0) >= min_cohort_n:
        return composite
    return replace(
        composite, value=None, parts={m: None for m in composite.parts}
    )


def viewer_cohort_year(
    records: Iterable[EngagementRecord], student_id: str | None
) -> int | None:
    """The viewing student's cohort year: earliest year on their records."""
    if student_id is None:
        return None
    years = [r.cohort_year for r in records if r.student_id == student_id]
    return min(years) if years else None


@dataclass(frozen=True)
class NeighborLink:
    course_id: str
    title: str
    similarity: float


@dataclass(frozen=True)
class HoverCard:
    course_id: str
    title: str
    objective_row: int
    semester_index: int
    objective_label: str
    semester_label: str
    credits: float
    individual: EngagementComposite | None
    cohort: EngagementComposite
    grade: str | float | None
    neighbors: tuple[NeighborLink, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "course_id": self.course_id,
            "title": self.title,
            "objective_row": self.objective_row,
            "semester_index": self.semester_index,
            "objective_label": self.objective_label,
            "semester_label": self.semester_label,
            "credits": self.credits,
            "individual": self.individual.to_dict() if self.individual else None,
            "cohort": self.cohort.to_dict(),
            "grade": self.grade,
            "neighbors": [
                {"course_id": n.course_id, "title": n.title, "similarity": n.similarity}
                for n in self.neighbors
            ],
        }


def format_grade(record: GradeRecord | None, grade_mode: str) -> str | float | None:
    if record is None or grade_mode == "none":
        return None
    if grade_mode == "letter":
        return record.letter
    return record.grade_point


def hover_payload(
    layout: CurriculumLayout,
    graph: RelevanceGraph,
    records: Sequence[EngagementRecord],
    grades: Iterable[GradeRecord],
    course_id: str,
    student_id: str | None = None,
    settings: DisplaySettings = DisplaySettings(),
    cohort_filter: CohortFilter = CohortFilter(),
    min_cohort_n: int = DEFAULT_MIN_COHORT_N,
) -> HoverCard:
    """Detail popup payload for one course block.

    Contains course metadata, the viewer's per-metric values, cohort means
    (masked below the minimum cohort size), the grade formatted per the
    grade mode, and relevance neighbors sorted by similarity.
    """
    try:
        course = layout.course(course_id)
    except KeyError:
        raise UnknownCourseError(course_id) from None

    individual = (
        individual_composite(records, student_id, course_id, settings)
        if student_id is not None
        else None
    )
    cohort = cohort_composite(
        records,
        course_id,
        settings,
        cohort_filter,
        viewer_year=viewer_cohort_year(records, student_id),
    )
    cohort = mask_small_cohort(cohort, min_cohort_n)

    grade_record = None
    if student_id is not None:
        grade_record = next(
            (g for g in grades if g.student_id == student_id and g.course_id == course_id), None
        )

    titles = {c.course_id: c.title for c in layout.courses}
    neighbors = tuple(
        NeighborLink(course_id=other, title=titles.get(other, other), similarity=s)
        for other, s in graph.neighbors(course_id)
    )
    return HoverCard(
        course_id=course.course_id,
        title=course.title,
        objective_row=course.objective_row,
        semester_index=course.semester_index,
        objective_label=layout.rows[course.objective_row],
        semester_label=layout.columns[course.semester_index],
        credits=course.credits,
        individual=individual,
        cohort=cohort,
        grade=format_grade(grade_record, settings.grade_mode),
        neighbors=neighbors,
    )
