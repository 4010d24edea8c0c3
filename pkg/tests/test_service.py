import json

import pytest
from fastapi.testclient import TestClient

from palm import demo
from palm.composer import SnapshotConfig
from palm.engagement import DisplaySettings, hover_payload
from palm.service import ADMIN_TOKEN_HEADER, ServiceConfig, create_app
from palm.stats import TPB_INSTRUMENT, parse_survey_pair, run_comparison

from conftest import tiny_layout_doc

TOKEN = "secret-token"


@pytest.fixture()
def client(tmp_path):
    config = ServiceConfig(
        store_path=tmp_path / "store",
        admin_token=TOKEN,
        snapshot=SnapshotConfig(min_similarity=0.0),
    )
    app = create_app(config)
    with TestClient(app) as c:
        yield c


def ingest_files(engagement_rows=None, grades_rows=None):
    engagement_rows = engagement_rows if engagement_rows is not None else [
        "s1,c1,0.9,0.8,0.7,2023",
        "old1,c1,0.5,0.5,0.5,2020",
        "old2,c1,0.7,,0.9,2021",
        "old3,c1,0.6,0.4,,2021",
    ]
    grades_rows = grades_rows if grades_rows is not None else ["s1,c1,A"]
    files = {
        "layout": ("layout.json", json.dumps(tiny_layout_doc()), "application/json"),
        "engagement": (
            "engagement.csv",
            "student_id,course_id,attendance_rate,quiz_score,assignment_submission_rate,cohort_year\n"
            + "\n".join(engagement_rows)
            + "\n",
            "text/csv",
        ),
        "grades": (
            "grades.csv",
            "student_id,course_id,letter\n" + "\n".join(grades_rows) + "\n",
            "text/csv",
        ),
        "grade_scale": (
            "grade_scale.json",
            json.dumps(demo.make_grade_scale()),
            "application/json",
        ),
    }
    return files


def publish_fixture(client):
    response = client.post(
        "/api/v1/ingest", files=ingest_files(), headers={ADMIN_TOKEN_HEADER: TOKEN}
    )
    assert response.status_code == 201, response.text
    return response.json()


class TestIngest:
    def test_valid_triplet_publishes(self, client):
        body = publish_fixture(client)
        assert body["counts"]["courses"] == 3
        assert body["counts"]["engagement_records"] == 4
        assert body["counts"]["grade_records"] == 1
        assert body["rejects"] == {"engagement": [], "grades": []}
        # CURRENT now serves this snapshot
        assert client.get("/api/v1/map").json()["snapshot_id"] == body["snapshot_id"]

    def test_missing_token_is_401(self, client):
        response = client.post("/api/v1/ingest", files=ingest_files())
        assert response.status_code == 401

    def test_wrong_token_is_401(self, client):
        response = client.post(
            "/api/v1/ingest", files=ingest_files(), headers={ADMIN_TOKEN_HEADER: "nope"}
        )
        assert response.status_code == 401

    def test_broken_csv_is_422_and_current_unchanged(self, client):
        before = publish_fixture(client)
        files = ingest_files()
        files["engagement"] = ("engagement.csv", "not,a,valid,header\n1,2,3,4\n", "text/csv")
        response = client.post(
            "/api/v1/ingest", files=files, headers={ADMIN_TOKEN_HEADER: TOKEN}
        )
        assert response.status_code == 422
        assert "unexpected header" in json.dumps(response.json())
        assert client.get("/api/v1/map").json()["snapshot_id"] == before["snapshot_id"]

    def test_broken_layout_is_422(self, client):
        files = ingest_files()
        files["layout"] = ("layout.json", "{broken", "application/json")
        response = client.post(
            "/api/v1/ingest", files=files, headers={ADMIN_TOKEN_HEADER: TOKEN}
        )
        assert response.status_code == 422

    def test_row_rejects_reported_not_fatal(self, client):
        files = ingest_files(engagement_rows=["s1,c1,0.9,0.8,0.7,2023", "s2,c1,1.5,0.8,0.7,2023"])
        response = client.post(
            "/api/v1/ingest", files=files, headers={ADMIN_TOKEN_HEADER: TOKEN}
        )
        assert response.status_code == 201
        body = response.json()
        assert body["counts"]["engagement_records"] == 1
        assert len(body["rejects"]["engagement"]) == 1


class TestMapEndpoint:
    def test_503_before_any_snapshot(self, client):
        assert client.get("/api/v1/map").status_code == 503

    def test_default_view(self, client):
        publish_fixture(client)
        body = client.get("/api/v1/map").json()
        assert len(body["base"]["blocks"]) == 3
        assert body["relevance"] is not None
        assert body["cohort"] is not None

    def test_layers_param_filters(self, client):
        publish_fixture(client)
        body = client.get("/api/v1/map", params={"layers": "relevance"}).json()
        assert body["relevance"] is not None
        assert body["individual"] is None and body["cohort"] is None and body["grades"] is None

    def test_unknown_student_gets_empty_personal_layers(self, client):
        publish_fixture(client)
        body = client.get("/api/v1/map", params={"student": "ghost"}).json()
        assert body["individual"] == {"values": {}}
        assert body["grades"]["pins"] == {}
        assert body["cohort"]["values"]

    def test_bad_layer_name_is_400(self, client):
        publish_fixture(client)
        assert client.get("/api/v1/map", params={"layers": "bogus"}).status_code == 400

    def test_bad_grade_mode_is_400(self, client):
        publish_fixture(client)
        assert client.get("/api/v1/map", params={"grade_mode": "percent"}).status_code == 400

    def test_metrics_param_changes_individual_values(self, client):
        publish_fixture(client)
        body = client.get(
            "/api/v1/map", params={"student": "s1", "metrics": "attendance"}
        ).json()
        assert body["individual"]["values"]["c1"]["value"] == 0.9

    def test_read_does_not_mutate_store(self, client, tmp_path):
        publish_fixture(client)
        store_dir = tmp_path / "store"
        before = sorted(p.name for p in store_dir.iterdir())
        client.get("/api/v1/map")
        client.get("/api/v1/courses/c1")
        after = sorted(p.name for p in store_dir.iterdir())
        assert before == after


class TestCourseEndpoint:
    def test_matches_module_output(self, client):
        publish_fixture(client)
        body = client.get("/api/v1/courses/c1", params={"student": "s1"}).json()
        snapshot_id = body.pop("snapshot_id")
        assert snapshot_id == client.get("/api/v1/map").json()["snapshot_id"]

        from palm.ingestion import EngagementRecord, GradeRecord, parse_layout
        from palm.relevance import RenderPolicy, build_graph, build_tfidf

        layout = parse_layout(json.dumps(tiny_layout_doc()).encode())
        graph = build_graph(
            build_tfidf(layout.syllabus_corpus()), RenderPolicy(min_similarity=0.0)
        )
        records = [
            EngagementRecord("s1", "c1", 0.9, 0.8, 0.7, 2023),
            EngagementRecord("old1", "c1", 0.5, 0.5, 0.5, 2020),
            EngagementRecord("old2", "c1", 0.7, None, 0.9, 2021),
            EngagementRecord("old3", "c1", 0.6, 0.4, None, 2021),
        ]
        grades = [GradeRecord("s1", "c1", "A", 4.0)]
        card = hover_payload(
            layout, graph, records, grades, "c1", student_id="s1", settings=DisplaySettings()
        )
        assert body == card.to_dict()

    def test_unknown_course_is_404(self, client):
        publish_fixture(client)
        assert client.get("/api/v1/courses/zz").status_code == 404

    def test_course_with_no_data(self, client):
        publish_fixture(client)
        body = client.get("/api/v1/courses/c3").json()
        assert body["individual"] is None
        assert body["cohort"]["value"] is None
        assert body["grade"] is None


class TestAnalyzeEndpoint:
    def test_tpb_reports_in_factor_order(self, client):
        pre, post = demo.make_tpb_surveys()
        response = client.post(
            "/api/v1/analyze/survey",
            json={"instrument": "tpb", "pre_csv": pre, "post_csv": post},
        )
        assert response.status_code == 200
        body = response.json()
        assert [r["factor_name"] for r in body["reports"]] == [
            "intention",
            "attitude",
            "subjective_norm",
            "behavioral_control",
        ]
        assert "snapshot_id" in body

    def test_lads_yields_five_reports(self, client):
        pre, post = demo.make_lads_surveys()
        response = client.post(
            "/api/v1/analyze/survey",
            json={"instrument": "lads", "pre_csv": pre, "post_csv": post},
        )
        assert len(response.json()["reports"]) == 5

    def test_values_match_stats_module(self, client):
        pre, post = demo.make_tpb_surveys()
        response = client.post(
            "/api/v1/analyze/survey",
            json={"instrument": "tpb", "pre_csv": pre, "post_csv": post},
        )
        pre_r, post_r = parse_survey_pair(pre.encode(), post.encode(), TPB_INSTRUMENT)
        expected = run_comparison(pre_r, post_r, TPB_INSTRUMENT)
        got = response.json()["reports"]
        for report, row in zip(expected, got):
            assert row["t_stat"] == pytest.approx(report.t_stat, abs=1e-12)
            assert row["effect"]["d_abs"] == pytest.approx(report.effect.d_abs, abs=1e-12)
            assert row["stars"] == report.stars

    def test_bad_likert_is_422(self, client):
        pre, post = demo.make_tpb_surveys()
        header, first, rest = pre.split("\n", 2)
        cells = first.split(",")
        cells[2] = "9"
        broken_pre = "\n".join([header, ",".join(cells), rest])
        response = client.post(
            "/api/v1/analyze/survey",
            json={"instrument": "tpb", "pre_csv": broken_pre, "post_csv": post},
        )
        assert response.status_code == 422

    def test_unknown_instrument_is_422(self, client):
        response = client.post(
            "/api/v1/analyze/survey",
            json={"instrument": "zzz", "pre_csv": "x", "post_csv": "y"},
        )
        assert response.status_code == 422

    def test_custom_instrument_dict(self, client):
        instrument = {
            "instrument_id": "mini",
            "factors": [{"name": "only", "items": ["i01", "i02"]}],
        }
        pre = "respondent_id,phase,i01,i02\nr1,pre,3,4\nr2,pre,2,5\nr3,pre,4,4\n"
        post = "respondent_id,phase,i01,i02\nr1,post,5,6\nr2,post,4,6\nr3,post,6,5\n"
        response = client.post(
            "/api/v1/analyze/survey",
            json={"instrument": instrument, "pre_csv": pre, "post_csv": post},
        )
        assert response.status_code == 200
        assert response.json()["instrument_id"] == "mini"


class TestServiceConfig:
    def test_file_plus_env_overrides(self, tmp_path):
        config_file = tmp_path / "palm.toml"
        config_file.write_text(
            'store = "filestore"\nport = 7001\nmin_similarity = 0.3\nmin_cohort_n = 4\n'
        )
        config = ServiceConfig.load(config_file=config_file, env={})
        assert str(config.store_path) == "filestore"
        assert config.listen_port == 7001
        assert config.snapshot.min_similarity == 0.3
        assert config.snapshot.min_cohort_n == 4

        config = ServiceConfig.load(
            config_file=config_file,
            env={"PALM_PORT": "7002", "PALM_STORE": "envstore", "PALM_ADMIN_TOKEN": "tok"},
        )
        assert config.listen_port == 7002
        assert str(config.store_path) == "envstore"
        assert config.admin_token == "tok"

    def test_defaults_without_file(self):
        config = ServiceConfig.load(env={})
        assert config.admin_token is None
        assert config.snapshot.min_similarity == 0.2


class TestSwapDuringServing:
    def test_readers_see_old_then_new(self, client):
        first = publish_fixture(client)
        assert client.get("/api/v1/map").json()["snapshot_id"] == first["snapshot_id"]
        files = ingest_files(engagement_rows=["s1,c1,1.0,1.0,1.0,2023"])
        second = client.post(
            "/api/v1/ingest", files=files, headers={ADMIN_TOKEN_HEADER: TOKEN}
        ).json()
        assert second["snapshot_id"] != first["snapshot_id"]
        body = client.get("/api/v1/map").json()
        assert body["snapshot_id"] == second["snapshot_id"]
