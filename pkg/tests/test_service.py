"""HTTP gateway: session lifecycle, answer guards, persistence, privacy."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from fairdiv import AdditiveValuation, Instance, run_instance
from fairdiv.model import parse_rational
from fairdiv.service import EventStore, SessionService, build_app

LABELS6 = ["lamp", "vase", "sofa", "desk", "rug", "fan"]


@pytest.fixture()
def client():
    return TestClient(build_app())


def create(client, **over):
    body = {"protocol": "two_agent_ef1", "n": 2, "m": 6, "labels": LABELS6, "seed": 0}
    body.update(over)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()


def answer_with_weights(client, sid, weights_by_agent, labels):
    """Drive a session to completion with additive oracle answers."""
    index = {lab: g for g, lab in enumerate(labels)}
    state = client.get(f"/sessions/{sid}").json()
    hops = 0
    while state["status"] == "awaiting_answer":
        q = state["pending"]
        w = weights_by_agent[q["agent"]]
        value = sum(w[index[lab]] for lab in q["goods"])
        resp = client.post(f"/sessions/{sid}/answers",
                           json={"agent": q["agent"], "value": str(value)})
        assert resp.status_code == 200, resp.text
        state = resp.json()
        hops += 1
        assert hops < 500
    return state


def test_create_session_shape(client):
    view = create(client)
    assert set(view) >= {"id", "protocol", "n", "m", "labels", "status",
                         "pending", "answered", "per_agent", "abort_reason"}
    assert view["status"] == "awaiting_answer"
    assert view["answered"] == 0 and view["per_agent"] == [1, 0]
    pending = view["pending"]
    assert set(pending) == {"agent", "goods", "rendered", "size"}
    assert pending["agent"] == 0
    assert all(lab in LABELS6 for lab in pending["goods"])


def test_full_session_matches_in_memory_run(client):
    weights = [[3, 1, 4, 1, 5, 9], [2, 7, 1, 8, 2, 8]]
    view = create(client, seed=11)
    sid = view["id"]
    state = answer_with_weights(client, sid, weights, LABELS6)
    assert state["status"] == "completed"

    result = client.get(f"/sessions/{sid}/result")
    assert result.status_code == 200
    result = result.json()

    inst = Instance([AdditiveValuation(w) for w in weights])
    direct = run_instance("two_agent_ef1", inst, seed=11)
    assert result["allocation"] == [sorted(b.goods) for b in direct.allocation.bundles]
    assert result["queries"] == direct.queries
    assert result["tie_break_seed"] == 11
    assert sum(result["per_agent"]) == result["queries"]
    assert len(result["bundles"]) == 2 and all(isinstance(s, str) for s in result["bundles"])


def test_empty_market_completes_immediately(client):
    view = create(client, m=0, labels=[])
    assert view["status"] == "completed" and view["pending"] is None
    result = client.get(f"/sessions/{view['id']}/result").json()
    assert result["allocation"] == [[], []] and result["queries"] == 0


def test_rational_values_accepted_verbatim(client):
    view = create(client, m=2, labels=["a", "b"])
    sid = view["id"]
    state = view
    while state["status"] == "awaiting_answer":
        q = state["pending"]
        value = "1/3" if q["size"] == 1 else str(Fraction(len(q["goods"]), 3))
        resp = client.post(f"/sessions/{sid}/answers",
                           json={"agent": q["agent"], "value": value})
        assert resp.status_code == 200, resp.text
        state = resp.json()
    assert state["status"] == "completed"


# -- monotonicity guard -------------------------------------------------------


def test_guard_rejects_cheaper_superset(client):
    # with constant answers the third probe is a superset of the first:
    # lamp..sofa (8) then desk..fan (8) then lamp..rug
    view = create(client, seed=0)
    sid = view["id"]
    first = set(view["pending"]["goods"])
    state = view
    for _ in range(2):
        state = client.post(f"/sessions/{sid}/answers",
                            json={"agent": 0, "value": "8"}).json()
    nxt = state["pending"]
    assert nxt["agent"] == 0 and first < set(nxt["goods"])
    before = state["answered"]

    resp = client.post(f"/sessions/{sid}/answers", json={"agent": 0, "value": "2"})
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert "monotonicity" in detail and "cannot be worth less" in detail

    after = client.get(f"/sessions/{sid}").json()
    assert after["answered"] == before and after["pending"] == nxt
    assert after["status"] == "awaiting_answer"
    # a consistent value is accepted afterwards: no state was corrupted
    resp = client.post(f"/sessions/{sid}/answers", json={"agent": 0, "value": "9"})
    assert resp.status_code == 200


def test_guard_unit_cases():
    svc = SessionService()
    session = svc.create_session(2, 6, "envy_cycle_elimination", labels=LABELS6)
    sid = session.id
    q = session.machine.pending
    svc.submit_answer(sid, q.agent, "8")
    agent = q.agent
    seen = frozenset(q.bundle.goods)

    import fairdiv.service as service_mod
    # a superset cannot be cheaper
    with pytest.raises(service_mod.ApiError) as err:
        session._guard(agent, seen | {5}, parse_rational("7"))
    assert err.value.status == 400 and "cannot be worth less" in err.value.message
    # a subset cannot be dearer
    if seen:
        smaller = seen - {next(iter(seen))}
        with pytest.raises(service_mod.ApiError) as err:
            session._guard(agent, smaller, parse_rational("9"))
        assert "cannot be worth more" in err.value.message
    # the same bundle must repeat its value
    with pytest.raises(service_mod.ApiError) as err:
        session._guard(agent, seen, parse_rational("3"))
    assert "already valued" in err.value.message
    # consistent answers pass
    session._guard(agent, seen | {5}, parse_rational("9"))


# -- error paths ----------------------------------------------------------------


def test_unknown_session_and_agent_are_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.get("/sessions/nope/result").status_code == 404
    view = create(client)
    assert client.get(f"/sessions/{view['id']}/agents/7").status_code == 404
    resp = client.post(f"/sessions/{view['id']}/answers", json={"agent": 7, "value": "1"})
    assert resp.status_code == 404


def test_malformed_answers_are_400(client):
    view = create(client)
    sid = view["id"]
    for agent, value in [(True, "1"), ("zero", "1"), (0, "-3"), (0, "1/0"), (0, "abc"), (0, None)]:
        resp = client.post(f"/sessions/{sid}/answers", json={"agent": agent, "value": value})
        assert resp.status_code == 400, (agent, value, resp.status_code)
    resp = client.post(f"/sessions/{sid}/answers", json={"agent": 0})
    assert resp.status_code == 400
    fresh = client.get(f"/sessions/{sid}").json()
    assert fresh["answered"] == 0


def test_wrong_turn_and_completion_conflicts(client):
    view = create(client, m=1, labels=["lamp"])
    sid = view["id"]
    assert client.get(f"/sessions/{sid}/result").status_code == 409
    q = view["pending"]
    other = 1 - q["agent"]
    resp = client.post(f"/sessions/{sid}/answers", json={"agent": other, "value": "1"})
    assert resp.status_code == 409
    state = answer_with_weights(client, sid, [[1], [1]], ["lamp"])
    assert state["status"] == "completed"
    resp = client.post(f"/sessions/{sid}/answers", json={"agent": 0, "value": "1"})
    assert resp.status_code == 409


def test_create_rejections(client):
    bad = [
        {"protocol": "nope"},
        {"protocol": "three_additive_ef1", "n": 2, "m": 3, "labels": ["a", "b", "c"]},
        {"labels": ["a", "a", "b", "c", "d", "e"]},
        {"labels": ["onlyone"]},
        {"m": "many"},
        {"protocol": "separate_designated_goods", "n": 3},
    ]
    for over in bad:
        body = {"protocol": "two_agent_ef1", "n": 2, "m": 6, "labels": LABELS6}
        body.update(over)
        resp = client.post("/sessions", json=body)
        assert resp.status_code == 400, (over, resp.status_code, resp.text)


# -- privacy ---------------------------------------------------------------------


def test_agent_views_hide_other_agents_answers(client):
    weights = [[3, 1, 4, 1, 5, 9], [2, 7, 1, 8, 2, 8]]
    view = create(client)
    sid = view["id"]
    answer_with_weights(client, sid, weights, LABELS6)

    a0 = client.get(f"/sessions/{sid}/agents/0").json()
    a1 = client.get(f"/sessions/{sid}/agents/1").json()
    assert a0["history"] and all(set(h) == {"goods", "rendered", "value"} for h in a0["history"])
    total = len(a0["history"]) + len(a1["history"])
    state = client.get(f"/sessions/{sid}").json()
    assert total == state["answered"]
    assert "value" not in json.dumps(state), "organizer view must not leak values"


def test_agent_view_turn_status(client):
    view = create(client)
    sid = view["id"]
    turn = view["pending"]["agent"]
    mine = client.get(f"/sessions/{sid}/agents/{turn}").json()
    other = client.get(f"/sessions/{sid}/agents/{1 - turn}").json()
    assert mine["status"] == "answer_pending" and mine["pending"] is not None
    assert other["status"] == "waiting" and other["pending"] is None


# -- rendering --------------------------------------------------------------------


def test_bundle_rendering_ranges():
    svc = SessionService()
    session = svc.create_session(2, 6, "two_agent_ef1", labels=LABELS6)
    assert session.render_bundle(set()) == "(nothing)"
    assert session.render_bundle({0}) == "lamp"
    assert session.render_bundle({0, 1}) == "lamp, vase"
    assert session.render_bundle({0, 1, 2}) == "lamp..sofa"
    assert session.render_bundle({0, 2}) == "lamp, sofa"
    assert session.render_bundle({0, 1, 2, 4}) == "lamp..sofa, rug"
    assert session.render_bundle({0, 1, 3, 4, 5}) == "lamp, vase, desk..fan"


def test_bundle_rendering_follows_the_line():
    svc = SessionService()
    session = svc.create_session(2, 6, "two_agent_ef1", labels=LABELS6,
                                 line=[5, 4, 3, 2, 1, 0])
    # goods 3,4,5 are adjacent on the reversed line, leftmost first
    assert session.render_bundle({3, 4, 5}) == "fan..desk"


# -- persistence --------------------------------------------------------------------


def test_event_log_replay_resumes_sessions(tmp_path):
    store_path = str(tmp_path / "events.jsonl")
    weights = [[3, 1, 4, 1, 5, 9], [2, 7, 1, 8, 2, 8]]

    svc = SessionService(EventStore(store_path))
    session = svc.create_session(2, 6, "two_agent_ef1", labels=LABELS6, seed=4)
    sid = session.id
    index = {lab: g for g, lab in enumerate(LABELS6)}
    for _ in range(3):
        q = session.machine.pending
        value = sum(weights[q.agent][g] for g in q.bundle.goods)
        svc.submit_answer(sid, q.agent, str(value))

    lines = [json.loads(l) for l in open(store_path)]
    assert lines[0]["type"] == "create"
    assert set(lines[0]) == {"type", "session", "n", "m", "protocol",
                             "labels", "seed", "options", "line"}
    assert all(set(l) == {"type", "session", "agent", "value"} for l in lines[1:])

    revived = SessionService(EventStore(store_path))
    copy = revived.get(sid)
    assert copy.machine.answers == session.machine.answers
    assert copy.status == session.status

    while copy.machine.pending is not None:
        q = copy.machine.pending
        value = sum(weights[q.agent][g] for g in q.bundle.goods)
        revived.submit_answer(sid, q.agent, str(value))
    assert copy.status == "completed"

    direct = run_instance("two_agent_ef1",
                          Instance([AdditiveValuation(w) for w in weights]), seed=4)
    assert copy.machine.result.as_index_lists() == [
        sorted(b.goods) for b in direct.allocation.bundles
    ]
    assert len(copy.machine.answers) == direct.queries


def test_http_sessions_replay_through_the_same_store(tmp_path):
    store_path = str(tmp_path / "events.jsonl")
    with TestClient(build_app(store_path)) as client1:
        view = create(client1, m=1, labels=["lamp"])
        sid = view["id"]
    with TestClient(build_app(store_path)) as client2:
        state = client2.get(f"/sessions/{sid}").json()
        assert state["status"] == "awaiting_answer"
        q = state["pending"]
        resp = client2.post(f"/sessions/{sid}/answers",
                            json={"agent": q["agent"], "value": "1"})
        assert resp.status_code == 200
        assert client2.get(f"/sessions/{sid}/result").status_code == 200
