"""Parsers for curriculum, engagement, grade, and survey files.

All parsers are pure functions over byte buffers and are safe to call from
any thread.  Structural problems (bad encoding, malformed JSON, wrong CSV
header) raise :class:`ParseError` with a location.  Row-level problems in
CSV inputs never fail silently: every data row either becomes a domain
record or a :class:`RowReject` naming its physical line, and accepted plus
rejected always equals the number of data rows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:  # InstrumentDefinition lives in palm.stats; avoid the import cycle
    from .stats import InstrumentDefinition

ENGAGEMENT_COLUMNS = (
    "student_id",
    "course_id",
    "attendance_rate",
    "quiz_score",
    "assignment_submission_rate",
    "cohort_year",
)
GRADES_COLUMNS = ("student_id", "course_id", "letter")


class ParseError(ValueError):
    """Structural parse failure. ``location`` names the JSON path or file line."""

    def __init__(self, message: str, location: str | None = None):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@dataclass(frozen=True)
class RowReject:
    """One rejected CSV row: 1-based physical line number plus the reason."""

    line: int
    reason: str


@dataclass(frozen=True)
class Course:
    course_id: str
    title: str
    semester_index: int
    objective_row: int
    credits: float
    overview_text: str
    lecture_plan_text: str
    cell_order: int | None = None

    @property
    def syllabus_text(self) -> str:
        return self.overview_text + " " + self.lecture_plan_text


@dataclass(frozen=True)
class CurriculumLayout:
    curriculum_id: str
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    courses: tuple[Course, ...]

    def course_ids(self) -> frozenset[str]:
        return frozenset(c.course_id for c in self.courses)

    def course(self, course_id: str) -> Course:
        for c in self.courses:
            if c.course_id == course_id:
                return c
        raise KeyError(course_id)

    def syllabus_corpus(self) -> list[tuple[str, str]]:
        """(course_id, overview + lecture plan) pairs for vectorization."""
        return [(c.course_id, c.syllabus_text) for c in self.courses]


@dataclass(frozen=True)
class EngagementRecord:
    student_id: str
    course_id: str
    attendance_rate: float | None
    quiz_score: float | None
    assignment_submission_rate: float | None
    cohort_year: int

    def metric(self, name: str) -> float | None:
        """Value for one of the canonical metric names; None means missing."""
        if name == "attendance":
            return self.attendance_rate
        if name == "quiz":
            return self.quiz_score
        if name == "assignment":
            return self.assignment_submission_rate
        raise KeyError(name)


@dataclass(frozen=True)
class GradeScale:
    scale_name: str
    points: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        letters = [letter for letter, _ in self.points]
        if not letters:
            raise ValueError("grade scale must define at least one letter")
        if len(set(letters)) != len(letters):
            raise ValueError("grade scale letters must be unique")

    def __contains__(self, letter: str) -> bool:
        return any(letter == known for known, _ in self.points)

    def grade_point(self, letter: str) -> float:
        for known, point in self.points:
            if known == letter:
                return point
        raise KeyError(letter)


@dataclass(frozen=True)
class GradeRecord:
    student_id: str
    course_id: str
    letter: str
    grade_point: float


@dataclass(frozen=True)
class SurveyResponseSet:
    respondent_id: str
    phase: str  # "pre" | "post"
    instrument_id: str
    answers: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class EngagementParse:
    records: tuple[EngagementRecord, ...]
    rejects: tuple[RowReject, ...]
    row_count: int


@dataclass(frozen=True)
class GradesParse:
    records: tuple[GradeRecord, ...]
    rejects: tuple[RowReject, ...]
    row_count: int


@dataclass(frozen=True)
class SurveyParse:
    responses: tuple[SurveyResponseSet, ...]
    rejects: tuple[RowReject, ...]
    row_count: int
    unpaired: tuple[str, ...]  # respondents present in exactly one phase


def _decode(data: bytes, what: str) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8: {exc}", location=what) from exc


def _require(doc: dict, key: str, kind: type, location: str):
    if key not in doc:
        raise ParseError(f"missing required key '{key}'", location)
    value = doc[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"'{key}' must be a number", location)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"'{key}' must be an integer", location)
        return value
    if not isinstance(value, kind):
        raise ParseError(f"'{key}' must be a {kind.__name__}", location)
    return value


def parse_layout(data: bytes) -> CurriculumLayout:
    """Parse and fully validate a curriculum layout JSON document."""
    text = _decode(data, "layout")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed JSON: {exc.msg}", location=f"line {exc.lineno} column {exc.colno}"
        ) from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object", "$")

    curriculum_id = _require(doc, "curriculum_id", str, "$")
    rows = _str_list(doc, "rows")
    columns = _str_list(doc, "columns")
    raw_courses = doc.get("courses")
    if not isinstance(raw_courses, list):
        raise ParseError("'courses' must be an array", "$")

    courses: list[Course] = []
    seen: set[str] = set()
    for idx, entry in enumerate(raw_courses):
        loc = f"courses[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError("course entry must be an object", loc)
        course_id = _require(entry, "course_id", str, loc)
        if not course_id:
            raise ParseError("course_id must be non-empty", loc)
        if course_id in seen:
            raise ParseError(f"duplicate course_id '{course_id}'", loc)
        seen.add(course_id)
        semester_index = _require(entry, "semester_index", int, loc)
        objective_row = _require(entry, "objective_row", int, loc)
        if not 0 <= semester_index < len(columns):
            raise ParseError(
                f"out-of-grid semester_index {semester_index} (grid has {len(columns)} columns)", loc
            )
        if not 0 <= objective_row < len(rows):
            raise ParseError(
                f"out-of-grid objective_row {objective_row} (grid has {len(rows)} rows)", loc
            )
        credits = _require(entry, "credits", float, loc)
        if credits < 0:
            raise ParseError("credits must be non-negative", loc)
        cell_order = None
        if entry.get("cell_order") is not None:
            cell_order = _require(entry, "cell_order", int, loc)
        courses.append(
            Course(
                course_id=course_id,
                title=_require(entry, "title", str, loc),
                semester_index=semester_index,
                objective_row=objective_row,
                credits=credits,
                overview_text=_require(entry, "overview_text", str, loc),
                lecture_plan_text=_require(entry, "lecture_plan_text", str, loc),
                cell_order=cell_order,
            )
        )

    _check_cells(courses)
    return CurriculumLayout(
        curriculum_id=curriculum_id,
        rows=tuple(rows),
        columns=tuple(columns),
        courses=tuple(courses),
    )


def _str_list(doc: dict, key: str) -> list[str]:
    value = doc.get(key)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(f"'{key}' must be an array of strings", "$")
    if not value:
        raise ParseError(f"'{key}' must be non-empty", "$")
    return value


def _check_cells(courses: Iterable[Course]) -> None:
    # A shared cell is legal only when every occupant declares a distinct cell_order.
    cells: dict[tuple[int, int], list[Course]] = {}
    for c in courses:
        cells.setdefault((c.objective_row, c.semester_index), []).append(c)
    for (row, col), occupants in cells.items():
        if len(occupants) == 1:
            continue
        orders = [c.cell_order for c in occupants]
        if any(o is None for o in orders) or len(set(orders)) != len(orders):
            ids = ", ".join(sorted(c.course_id for c in occupants))
            raise ParseError(
                f"cell (row {row}, column {col}) holds multiple courses [{ids}] "
                "without distinct cell_order values",
                "$.courses",
            )


def serialize_layout(layout: CurriculumLayout) -> bytes:
    """Canonical layout serialization; parse/serialize round-trips byte-exactly."""
    courses = []
    for c in sorted(layout.courses, key=lambda c: c.course_id):
        entry: dict = {
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
        courses.append(entry)
    doc = {
        "curriculum_id": layout.curriculum_id,
        "rows": list(layout.rows),
        "columns": list(layout.columns),
        "courses": courses,
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _csv_rows(data: bytes, what: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header plus (physical line, cells) pairs. Dialect: UTF-8, comma, LF, header row."""
    text = _decode(data, what)
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file: missing header row", what) from None
    rows = []
    for row in reader:
        if not row or (len(row) == 1 and row[0].strip() == ""):
            continue  # ignore blank trailing lines
        rows.append((reader.line_num, row))
    return header, rows


def _parse_fraction(cell: str, column: str) -> float | None:
    """Empty cell means missing; otherwise a fraction in [0, 1]."""
    cell = cell.strip()
    if cell == "":
        return None
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(f"{column} '{cell}' is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{column} {cell} outside [0, 1]")
    return value


def parse_engagement_csv(
    data: bytes, known_courses: Iterable[str] | None = None
) -> EngagementParse:
    """Parse the engagement CSV.

    An optional trailing ``max_score`` column carries a raw quiz maximum; when
    present and non-empty the quiz cell is a raw score divided by it.  Missing
    cells become missing markers, never zeros.
    """
    header, rows = _csv_rows(data, "engagement.csv")
    has_max = tuple(header) == ENGAGEMENT_COLUMNS + ("max_score",)
    if not has_max and tuple(header) != ENGAGEMENT_COLUMNS:
        raise ParseError(
            f"unexpected header {header!r}; expected {list(ENGAGEMENT_COLUMNS)}"
            " with optional trailing 'max_score'",
            "engagement.csv line 1",
        )
    known = frozenset(known_courses) if known_courses is not None else None

    records: list[EngagementRecord] = []
    rejects: list[RowReject] = []
    seen: set[tuple[str, str]] = set()
    width = len(ENGAGEMENT_COLUMNS) + (1 if has_max else 0)
    for line, row in rows:
        if len(row) != width:
            rejects.append(RowReject(line, f"expected {width} fields, found {len(row)}"))
            continue
        student_id, course_id = row[0].strip(), row[1].strip()
        if not student_id or not course_id:
            rejects.append(RowReject(line, "student_id and course_id must be non-empty"))
            continue
        if known is not None and course_id not in known:
            rejects.append(RowReject(line, f"unknown course_id '{course_id}'"))
            continue
        if (student_id, course_id) in seen:
            rejects.append(RowReject(line, f"duplicate record for ({student_id}, {course_id})"))
            continue
        try:
            attendance = _parse_fraction(row[2], "attendance_rate")
            assignment = _parse_fraction(row[4], "assignment_submission_rate")
            quiz = _parse_quiz(row[3], row[6] if has_max else "")
            cohort_year = _parse_year(row[5])
        except ValueError as exc:
            rejects.append(RowReject(line, str(exc)))
            continue
        seen.add((student_id, course_id))
        records.append(
            EngagementRecord(
                student_id=student_id,
                course_id=course_id,
                attendance_rate=attendance,
                quiz_score=quiz,
                assignment_submission_rate=assignment,
                cohort_year=cohort_year,
            )
        )
    return EngagementParse(tuple(records), tuple(rejects), len(rows))


def _parse_quiz(cell: str, max_cell: str) -> float | None:
    cell, max_cell = cell.strip(), max_cell.strip()
    if max_cell == "":
        return _parse_fraction(cell, "quiz_score")
    if cell == "":
        return None
    try:
        raw = float(cell)
        maximum = float(max_cell)
    except ValueError:
        raise ValueError(f"quiz_score '{cell}' / max_score '{max_cell}' is not numeric") from None
    if maximum <= 0:
        raise ValueError(f"max_score {max_cell} must be positive")
    if raw < 0 or raw > maximum:
        raise ValueError(f"quiz_score {cell} outside [0, max_score={max_cell}]")
    return raw / maximum


def _parse_year(cell: str) -> int:
    cell = cell.strip()
    try:
        return int(cell)
    except ValueError:
        raise ValueError(f"cohort_year '{cell}' is not an integer") from None


def parse_grade_scale(data: bytes) -> GradeScale:
    """Parse the deployment grade-scale configuration (letter to grade point)."""
    text = _decode(data, "grade_scale")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"malformed JSON: {exc.msg}", location=f"line {exc.lineno} column {exc.colno}"
        ) from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level value must be an object", "$")
    scale_name = _require(doc, "scale_name", str, "$")
    raw = doc.get("letters")
    if not isinstance(raw, list) or not raw:
        raise ParseError("'letters' must be a non-empty array", "$")
    points = []
    for idx, entry in enumerate(raw):
        loc = f"letters[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError("letter entry must be an object", loc)
        letter = _require(entry, "letter", str, loc)
        point = _require(entry, "grade_point", float, loc)
        if point < 0:
            raise ParseError("grade_point must be non-negative", loc)
        points.append((letter, point))
    try:
        return GradeScale(scale_name=scale_name, points=tuple(points))
    except ValueError as exc:
        raise ParseError(str(exc), "$.letters") from exc


def parse_grades_csv(
    data: bytes, scale: GradeScale, known_courses: Iterable[str] | None = None
) -> GradesParse:
    """Parse the grades CSV; grade points come from the configured scale."""
    header, rows = _csv_rows(data, "grades.csv")
    if tuple(header) != GRADES_COLUMNS:
        raise ParseError(
            f"unexpected header {header!r}; expected {list(GRADES_COLUMNS)}", "grades.csv line 1"
        )
    known = frozenset(known_courses) if known_courses is not None else None

    records: list[GradeRecord] = []
    rejects: list[RowReject] = []
    seen: set[tuple[str, str]] = set()
    for line, row in rows:
        if len(row) != 3:
            rejects.append(RowReject(line, f"expected 3 fields, found {len(row)}"))
            continue
        student_id, course_id, letter = (cell.strip() for cell in row)
        if not student_id or not course_id:
            rejects.append(RowReject(line, "student_id and course_id must be non-empty"))
            continue
        if known is not None and course_id not in known:
            rejects.append(RowReject(line, f"unknown course_id '{course_id}'"))
            continue
        if letter not in scale:
            rejects.append(RowReject(line, f"letter '{letter}' not in scale '{scale.scale_name}'"))
            continue
        if (student_id, course_id) in seen:
            rejects.append(RowReject(line, f"duplicate grade for ({student_id}, {course_id})"))
            continue
        seen.add((student_id, course_id))
        records.append(GradeRecord(student_id, course_id, letter, scale.grade_point(letter)))
    return GradesParse(tuple(records), tuple(rejects), len(rows))


def parse_survey_csv(data: bytes, instrument: "InstrumentDefinition") -> SurveyParse:
    """Parse Likert survey responses for one instrument.

    The header must carry exactly the instrument's item ids after
    ``respondent_id,phase``.  Respondents present in only one phase are
    accepted but flagged for the analysis stage to exclude.
    """
    header, rows = _csv_rows(data, "survey.csv")
    expected = ("respondent_id", "phase") + tuple(instrument.item_ids())
    if tuple(header) != expected:
        raise ParseError(
            f"unexpected header {header!r}; expected {list(expected)} "
            f"for instrument '{instrument.instrument_id}'",
            "survey.csv line 1",
        )

    lo, hi = instrument.scale_min, instrument.scale_max
    responses: list[SurveyResponseSet] = []
    rejects: list[RowReject] = []
    seen: set[tuple[str, str]] = set()
    phases: dict[str, set[str]] = {}
    item_ids = instrument.item_ids()
    for line, row in rows:
        if len(row) != len(expected):
            rejects.append(RowReject(line, f"expected {len(expected)} fields, found {len(row)}"))
            continue
        respondent_id, phase = row[0].strip(), row[1].strip()
        if not respondent_id:
            rejects.append(RowReject(line, "respondent_id must be non-empty"))
            continue
        if phase not in ("pre", "post"):
            rejects.append(RowReject(line, f"phase '{phase}' must be 'pre' or 'post'"))
            continue
        if (respondent_id, phase) in seen:
            rejects.append(RowReject(line, f"duplicate row for ({respondent_id}, {phase})"))
            continue
        answers = []
        bad = None
        for item_id, cell in zip(item_ids, row[2:]):
            cell = cell.strip()
            try:
                value = int(cell)
            except ValueError:
                bad = f"{item_id}: value '{cell}' is not an integer"
                break
            if not lo <= value <= hi:
                bad = f"{item_id}: Likert value {value} outside {{{lo}..{hi}}}"
                break
            answers.append((item_id, value))
        if bad is not None:
            rejects.append(RowReject(line, bad))
            continue
        seen.add((respondent_id, phase))
        phases.setdefault(respondent_id, set()).add(phase)
        responses.append(
            SurveyResponseSet(
                respondent_id=respondent_id,
                phase=phase,
                instrument_id=instrument.instrument_id,
                answers=tuple(answers),
            )
        )
    unpaired = tuple(sorted(r for r, p in phases.items() if len(p) == 1))
    return SurveyParse(tuple(responses), tuple(rejects), len(rows), unpaired)
