"""Session API tests: the six-phase flow, status codes, isolation, expiry."""

import threading

import pytest
from fastapi.testclient import TestClient

from cascom.service import create_app


@pytest.fixture()
def client(d1):
    return TestClient(create_app(d1))


def _new_session(client):
    response = client.post("/sessions")
    assert response.status_code == 201
    body = response.json()
    assert body["phase"] == "ANSWERING"
    return body["id"]


def test_full_flow_produces_golden_bundle(client, golden_d1_dir):
    sid = _new_session(client)

    question = client.get(f"/sessions/{sid}/question").json()
    assert question["question"]["facet"] == "phenomenon"
    assert question["remaining"] == 2

    answered = client.post(f"/sessions/{sid}/answers", json={"facet": "phenomenon", "value": "comfort"})
    assert answered.status_code == 200
    assert answered.json()["remaining"] == 1

    tasks = client.get(f"/sessions/{sid}/tasks").json()["tasks"]
    assert [t["id"] for t in tasks] == ["taskComfort"]

    selected = client.post(f"/sessions/{sid}/task", json={"taskId": "taskComfort"})
    assert selected.status_code == 200
    body = selected.json()
    assert body["phase"] == "SOLUTIONS_READY"
    assert len(body["solutions"]) == 1
    assert body["solutions"][0]["root"] == "comfort"

    extras = client.get(f"/sessions/{sid}/extras").json()["extras"]
    assert {e["property_id"] for e in extras} == {"Humidity", "Temperature"}

    chosen = client.post(f"/sessions/{sid}/extras", json={"properties": []})
    assert chosen.status_code == 200
    assert chosen.json()["phase"] == "EXTRAS_SELECTED"

    ranked = client.get(f"/sessions/{sid}/solutions", params={"model": "lowest-total"}).json()
    assert ranked["solutions"][0]["cost"] == 48.5

    done = client.post(f"/sessions/{sid}/select", json={"index": 0, "model": "lowest-total"})
    assert done.status_code == 200
    assert done.json()["phase"] == "BUNDLE_READY"

    bundle = client.get(f"/sessions/{sid}/bundle").json()
    assert set(bundle) == {
        "taskComfort.vsd.xml",
        "taskComfort.wrappers.properties",
        "taskComfort.plan.txt",
    }
    for filename, content in bundle.items():
        assert content.encode() == (golden_d1_dir / filename).read_bytes()


def test_select_before_task_conflicts(client):
    sid = _new_session(client)
    response = client.post(f"/sessions/{sid}/select", json={"index": 0, "model": "lowest-total"})
    assert response.status_code == 409


def test_answers_after_task_conflict(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/task", json={"taskId": "taskTemp"})
    response = client.post(f"/sessions/{sid}/answers", json={"facet": "domain", "value": "building"})
    assert response.status_code == 409


def test_unknown_session_404(client):
    assert client.get("/sessions/doesnotexist/question").status_code == 404


def test_unknown_endpoint_404_with_json_body(client):
    response = client.get("/nope")
    assert response.status_code == 404
    assert response.json()


def test_invalid_body_400_with_field(client):
    sid = _new_session(client)
    response = client.post(f"/sessions/{sid}/answers", json={"facet": "phenomenon"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "invalid body"
    assert any("value" in d["field"] for d in body["details"])


def test_unknown_facet_value_422(client):
    sid = _new_session(client)
    response = client.post(f"/sessions/{sid}/answers", json={"facet": "phenomenon", "value": "rain"})
    assert response.status_code == 422


def test_unknown_task_422(client):
    sid = _new_session(client)
    assert client.post(f"/sessions/{sid}/task", json={"taskId": "nope"}).status_code == 422


def test_filtered_out_task_422(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/answers", json={"facet": "phenomenon", "value": "comfort"})
    assert client.post(f"/sessions/{sid}/task", json={"taskId": "taskTemp"}).status_code == 422


def test_unknown_model_422(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/task", json={"taskId": "taskTemp"})
    response = client.get(f"/sessions/{sid}/solutions", params={"model": "nope"})
    assert response.status_code == 422


def test_bad_solution_index_422(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/task", json={"taskId": "taskTemp"})
    response = client.post(f"/sessions/{sid}/select", json={"index": 5, "model": "lowest-total"})
    assert response.status_code == 422


def test_unknown_extra_422(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/task", json={"taskId": "taskComfort"})
    response = client.post(f"/sessions/{sid}/extras", json={"properties": ["Pressure"]})
    assert response.status_code == 422


def test_no_solution_path_with_recommendations(d2):
    client = TestClient(create_app(d2))
    sid = _new_session(client)

    # Recommendations are phase-gated.
    assert client.get(f"/sessions/{sid}/recommendations").status_code == 409

    selected = client.post(f"/sessions/{sid}/task", json={"taskId": "taskComfort"})
    assert selected.json()["phase"] == "NO_SOLUTION"

    recs = client.get(f"/sessions/{sid}/recommendations").json()["recommendations"]
    assert len(recs) == 1
    assert recs[0]["missing"] == [
        {"property_id": "Humidity", "unit": "percent", "location": None}
    ]
    assert recs[0]["present_cost"] == 29.5


def test_selecting_solution_allowed_without_extras_step(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/task", json={"taskId": "taskTemp"})
    response = client.post(f"/sessions/{sid}/select", json={"index": 0, "model": "cheapest"})
    assert response.status_code == 200
    assert response.json()["phase"] == "BUNDLE_READY"


def test_reads_are_idempotent(client):
    sid = _new_session(client)
    first = client.get(f"/sessions/{sid}/question").json()
    second = client.get(f"/sessions/{sid}/question").json()
    assert first == second
    state = client.get(f"/sessions/{sid}").json()
    assert state["phase"] == "ANSWERING" and state["answers"] == {}


def test_sessions_are_isolated(client):
    a = _new_session(client)
    b = _new_session(client)
    client.post(f"/sessions/{a}/answers", json={"facet": "phenomenon", "value": "comfort"})
    client.post(f"/sessions/{b}/answers", json={"facet": "phenomenon", "value": "temperature"})
    tasks_a = client.get(f"/sessions/{a}/tasks").json()["tasks"]
    tasks_b = client.get(f"/sessions/{b}/tasks").json()["tasks"]
    assert [t["id"] for t in tasks_a] == ["taskComfort"]
    assert [t["id"] for t in tasks_b] == ["taskTemp"]


def test_concurrent_sessions_do_not_interfere(d1):
    client = TestClient(create_app(d1))
    results = {}

    def run(name, value, task_id):
        sid = _new_session(client)
        client.post(f"/sessions/{sid}/answers", json={"facet": "phenomenon", "value": value})
        client.post(f"/sessions/{sid}/task", json={"taskId": task_id})
        client.post(f"/sessions/{sid}/select", json={"index": 0, "model": "lowest-total"})
        results[name] = client.get(f"/sessions/{sid}/bundle").json()

    threads = [
        threading.Thread(target=run, args=(f"comfort{i}", "comfort", "taskComfort"))
        for i in range(4)
    ] + [
        threading.Thread(target=run, args=(f"temp{i}", "temperature", "taskTemp"))
        for i in range(4)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for name, bundle in results.items():
        expected_task = "taskComfort" if name.startswith("comfort") else "taskTemp"
        assert set(bundle) == {
            f"{expected_task}.vsd.xml",
            f"{expected_task}.wrappers.properties",
            f"{expected_task}.plan.txt",
        }


def test_cross_origin_requests_allowed(client):
    response = client.post("/sessions", headers={"Origin": "http://localhost:5173"})
    assert response.status_code == 201
    assert response.headers["access-control-allow-origin"] == "*"


def test_sessions_expire_after_idle(d1):
    now = {"t": 0.0}
    app = create_app(d1, session_ttl_seconds=60.0, clock=lambda: now["t"])
    client = TestClient(app)
    sid = _new_session(client)
    now["t"] = 30.0
    assert client.get(f"/sessions/{sid}/question").status_code == 200
    now["t"] = 200.0  # 170s idle > 60s ttl
    assert client.get(f"/sessions/{sid}/question").status_code == 404
