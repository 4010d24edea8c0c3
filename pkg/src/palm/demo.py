"""Synthetic dataset builders for demos and desk-scale end-to-end tests.

Everything is seeded and deterministic.  Syllabus texts are drawn from
per-track vocabularies with a shared filler pool, which gives the TF-IDF
graph realistic within-track structure.  Survey fixtures apply engineered
pre-to-post shifts so the comparison pipeline has known, large effects to
find (the planning/reflection-control factor is pushed hardest).
"""

from __future__ import annotations

import csv
import io
import json
import random
from pathlib import Path

from .stats import InstrumentDefinition, LADS_INSTRUMENT, TPB_INSTRUMENT

_TRACKS = [
    ("programming", "software programming algorithms data structures compilers typing recursion testing debugging objects"),
    ("mathematics", "calculus algebra analysis proofs linear matrices vectors probability statistics theorem"),
    ("circuits", "circuits voltage current transistor amplifier semiconductor signal impedance capacitor layout"),
    ("systems", "operating systems networks protocols concurrency scheduling memory storage distributed latency"),
    ("intelligence", "learning inference models classification optimization neural features clustering evaluation agents"),
    ("communication", "writing presentation seminar discussion teamwork project ethics research literacy argument"),
    ("physics", "mechanics waves thermodynamics quantum fields energy momentum optics measurement relativity"),
    ("design", "design prototyping usability interfaces interaction requirements evaluation sketching iteration studio"),
]

_FILLER = (
    "course introduces students practical weekly exercises covering fundamental "
    "concepts through lectures assignments exams review sessions"
).split()


def make_layout(
    n_courses: int = 180,
    n_rows: int = 8,
    n_columns: int = 8,
    seed: int = 7,
    curriculum_id: str = "demo-curriculum",
) -> dict:
    """Layout JSON document with themed syllabus texts."""
    rng = random.Random(seed)
    rows = [f"Objective {track}" for track, _ in _TRACKS[:n_rows]]
    columns = [f"Semester {i + 1}" for i in range(n_columns)]
    courses = []
    per_cell: dict[tuple[int, int], int] = {}
    for idx in range(n_courses):
        row = idx % n_rows
        col = (idx // n_rows) % n_columns
        track, vocab = _TRACKS[row % len(_TRACKS)]
        words = vocab.split()
        overview = " ".join(rng.choices(words, k=8) + rng.choices(_FILLER, k=6))
        plan = " ".join(rng.choices(words, k=10) + rng.choices(_FILLER, k=4))
        order = per_cell.get((row, col), 0)
        per_cell[(row, col)] = order + 1
        courses.append(
            {
                "course_id": f"c{idx:03d}",
                "title": f"{track.title()} {idx // n_rows + 1}",
                "semester_index": col,
                "objective_row": row,
                "credits": float(rng.choice([1, 2, 2, 3])),
                "overview_text": overview,
                "lecture_plan_text": plan,
                "cell_order": order,
            }
        )
    return {
        "curriculum_id": curriculum_id,
        "rows": rows,
        "columns": columns,
        "courses": courses,
    }


def make_engagement_csv(
    layout_doc: dict,
    n_students: int = 50,
    courses_per_student: int = 20,
    years: tuple[int, ...] = (2019, 2020, 2021, 2022, 2023),
    seed: int = 11,
    missing_rate: float = 0.08,
) -> str:
    rng = random.Random(seed)
    course_ids = [c["course_id"] for c in layout_doc["courses"]]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        [
            "student_id",
            "course_id",
            "attendance_rate",
            "quiz_score",
            "assignment_submission_rate",
            "cohort_year",
        ]
    )
    for s in range(n_students):
        student_id = f"stu{s:03d}"
        year = years[s % len(years)]
        diligence = rng.uniform(0.45, 0.95)
        taken = rng.sample(course_ids, min(courses_per_student, len(course_ids)))
        for course_id in taken:
            cells = []
            for _ in range(3):
                if rng.random() < missing_rate:
                    cells.append("")
                else:
                    value = min(1.0, max(0.0, rng.gauss(diligence, 0.12)))
                    cells.append(f"{value:.3f}")
            writer.writerow([student_id, course_id, *cells, year])
    return out.getvalue()


def make_grade_scale() -> dict:
    return {
        "scale_name": "five-letter",
        "letters": [
            {"letter": "A", "grade_point": 4.0},
            {"letter": "B", "grade_point": 3.0},
            {"letter": "C", "grade_point": 2.0},
            {"letter": "D", "grade_point": 1.0},
            {"letter": "F", "grade_point": 0.0},
        ],
    }


def make_grades_csv(engagement_csv: str, seed: int = 13) -> str:
    """One letter grade per engagement row, loosely tracking the metrics."""
    rng = random.Random(seed)
    reader = csv.DictReader(io.StringIO(engagement_csv))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["student_id", "course_id", "letter"])
    for row in reader:
        values = [
            float(row[k])
            for k in ("attendance_rate", "quiz_score", "assignment_submission_rate")
            if row[k] != ""
        ]
        level = sum(values) / len(values) if values else rng.uniform(0.3, 0.9)
        level = min(1.0, max(0.0, level + rng.gauss(0, 0.1)))
        letter = "ABCDF"[min(4, int((1.0 - level) * 5))]
        writer.writerow([row["student_id"], row["course_id"], letter])
    return out.getvalue()


def _survey_csv(instrument: InstrumentDefinition, rows: list[tuple[str, str, list[int]]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["respondent_id", "phase", *instrument.item_ids()])
    for respondent_id, phase, answers in rows:
        writer.writerow([respondent_id, phase, *answers])
    return out.getvalue()


def _clamp_likert(value: float, lo: int = 1, hi: int = 7) -> int:
    return min(hi, max(lo, round(value)))


def make_survey_pair(
    instrument: InstrumentDefinition,
    shifts: dict[str, float],
    baselines: dict[str, float],
    n_respondents: int = 29,
    seed: int = 23,
) -> tuple[str, str]:
    """(pre_csv, post_csv) with per-factor engineered mean shifts."""
    rng = random.Random(seed)
    pre_rows = []
    post_rows = []
    for r in range(n_respondents):
        respondent_id = f"r{r:02d}"
        leniency = rng.gauss(0, 0.5)
        pre_answers: list[int] = []
        post_answers: list[int] = []
        for factor_name, item_ids in instrument.factors:
            base = baselines.get(factor_name, 4.0) + leniency
            shift = shifts.get(factor_name, 0.0)
            for _ in item_ids:
                pre_value = rng.gauss(base, 0.9)
                pre_answers.append(_clamp_likert(pre_value))
                post_answers.append(_clamp_likert(pre_value + shift + rng.gauss(0, 0.6)))
        pre_rows.append((respondent_id, "pre", pre_answers))
        post_rows.append((respondent_id, "post", post_answers))
    return _survey_csv(instrument, pre_rows), _survey_csv(instrument, post_rows)


def make_tpb_surveys(n_respondents: int = 29, seed: int = 23) -> tuple[str, str]:
    baselines = {
        "intention": 5.1,
        "attitude": 5.0,
        "subjective_norm": 3.9,
        "behavioral_control": 4.1,
    }
    shifts = {
        "intention": 0.6,
        "attitude": 0.6,
        "subjective_norm": 0.5,
        "behavioral_control": 1.2,
    }
    return make_survey_pair(TPB_INSTRUMENT, shifts, baselines, n_respondents, seed)


def make_lads_surveys(n_respondents: int = 29, seed: int = 29) -> tuple[str, str]:
    baselines = {
        "visual_attraction": 3.4,
        "usability": 3.7,
        "understanding_level": 3.8,
        "perceived_usefulness": 4.0,
        "behavioral_changes": 3.7,
    }
    shifts = {
        "visual_attraction": 2.5,
        "usability": 2.2,
        "understanding_level": 2.3,
        "perceived_usefulness": 1.7,
        "behavioral_changes": 1.6,
    }
    return make_survey_pair(LADS_INSTRUMENT, shifts, baselines, n_respondents, seed)


def write_demo_dataset(target: str | Path, n_courses: int = 180, seed: int = 7) -> dict[str, Path]:
    """Write the full synthetic dataset; returns the file paths."""
    target = Path(target)
    target.mkdir(parents=True, exist_ok=True)
    layout_doc = make_layout(n_courses=n_courses, seed=seed)
    engagement = make_engagement_csv(layout_doc, seed=seed + 2)
    grades = make_grades_csv(engagement, seed=seed + 3)
    tpb_pre, tpb_post = make_tpb_surveys(seed=seed + 5)
    lads_pre, lads_post = make_lads_surveys(seed=seed + 7)

    paths = {
        "layout": target / "layout.json",
        "engagement": target / "engagement.csv",
        "grades": target / "grades.csv",
        "grade_scale": target / "grade_scale.json",
        "tpb_pre": target / "tpb_pre.csv",
        "tpb_post": target / "tpb_post.csv",
        "lads_pre": target / "lads_pre.csv",
        "lads_post": target / "lads_post.csv",
    }
    paths["layout"].write_text(json.dumps(layout_doc, indent=2, sort_keys=True) + "\n")
    paths["engagement"].write_text(engagement)
    paths["grades"].write_text(grades)
    paths["grade_scale"].write_text(json.dumps(make_grade_scale(), indent=2) + "\n")
    paths["tpb_pre"].write_text(tpb_pre)
    paths["tpb_post"].write_text(tpb_post)
    paths["lads_pre"].write_text(lads_pre)
    paths["lads_post"].write_text(lads_post)
    return paths
