import json
from pathlib import Path

import pytest

from palm import demo

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def stats_oracles() -> dict:
    with open(FIXTURES / "stats_oracles.json") as fh:
        return json.load(fh)


def tiny_layout_doc() -> dict:
    return {
        "curriculum_id": "tiny",
        "rows": ["Foundations", "Applications"],
        "columns": ["S1", "S2"],
        "courses": [
            {
                "course_id": "c1",
                "title": "Intro Programming",
                "semester_index": 0,
                "objective_row": 0,
                "credits": 2.0,
                "overview_text": "programming basics variables loops",
                "lecture_plan_text": "weekly programming exercises",
            },
            {
                "course_id": "c2",
                "title": "Advanced Programming",
                "semester_index": 1,
                "objective_row": 0,
                "credits": 2.0,
                "overview_text": "programming patterns objects",
                "lecture_plan_text": "weekly programming projects",
            },
            {
                "course_id": "c3",
                "title": "Applied Statistics",
                "semester_index": 1,
                "objective_row": 1,
                "credits": 2.0,
                "overview_text": "statistics inference estimation",
                "lecture_plan_text": "weekly statistics labs",
            },
        ],
    }


@pytest.fixture()
def tiny_layout_bytes() -> bytes:
    return json.dumps(tiny_layout_doc()).encode()


@pytest.fixture(scope="session")
def demo_dataset(tmp_path_factory) -> dict[str, Path]:
    target = tmp_path_factory.mktemp("demo-data")
    return demo.write_demo_dataset(target)
