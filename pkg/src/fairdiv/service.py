"""Resumable protocol sessions over an append-only event store.

A session wraps a protocol machine whose pending value queries are
answered over HTTP instead of by in-memory oracles.  The store records
only immutable events (one create, then one event per accepted answer),
so every session's state is derived by replay and never persisted
mutably.  Submissions that would contradict monotonicity are rejected
with a diagnostic and leave the session untouched.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from typing import Iterable

from fairdiv.model import (
    ContractViolation,
    FairdivError,
    LineArrangement,
    Value,
    format_rational,
    parse_rational,
)
from fairdiv.machine import Query
from fairdiv.protocols import REGISTRY, make_machine

__all__ = ["ApiError", "EventStore", "Session", "SessionService", "build_app"]


class ApiError(FairdivError):
    """An error with an HTTP status attached."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _default_labels(m: int) -> list[str]:
    return [f"g{i + 1}" for i in range(m)]


class EventStore:
    """Append-only JSONL event log; one file holds every session."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._lock = threading.Lock()
        self._memory: list[dict] = []
        if path and os.path.exists(path):
            with open(path) as fh:
                for raw in fh:
                    raw = raw.strip()
                    if raw:
                        self._memory.append(json.loads(raw))

    def append(self, event: dict) -> None:
        with self._lock:
            self._memory.append(event)
            if self.path:
                with open(self.path, "a") as fh:
                    fh.write(json.dumps(event, sort_keys=True) + "\n")

    def events(self) -> list[dict]:
        with self._lock:
            return list(self._memory)


class Session:
    """Protocol machine state derived from a create event plus answers."""

    def __init__(self, sid: str, n: int, m: int, protocol: str, labels: list[str],
                 seed: int, options: dict, line: list[int] | None):
        self.id = sid
        self.n = n
        self.m = m
        self.protocol = protocol
        self.labels = labels
        self.seed = seed
        self.options = options
        self.line = LineArrangement(line) if line is not None else LineArrangement.identity(m)
        self.machine = make_machine(protocol, n, m, line=self.line, seed=seed, **options)
        self.machine.start()
        self.status = "completed" if self.machine.done else "awaiting_answer"
        self.abort_reason: str | None = None
        self._lock = threading.Lock()

    # -- views ----------------------------------------------------------

    def pending_view(self) -> dict | None:
        q: Query | None = self.machine.pending
        if q is None:
            return None
        return {
            "agent": q.agent,
            "goods": [self.labels[g] for g in q.bundle.sorted_goods()],
            "rendered": self.render_bundle(q.bundle.goods),
            "size": len(q.bundle),
        }

    def render_bundle(self, goods: Iterable[int]) -> str:
        """Human form: labels, with runs of line-adjacent goods as ranges."""
        positions = sorted(self.line.position_of(g) for g in goods)
        if not positions:
            return "(nothing)"
        parts: list[str] = []
        start = prev = positions[0]
        for p in positions[1:] + [None]:  # type: ignore[list-item]
            if p is not None and p == prev + 1:
                prev = p
                continue
            lo, hi = self.line.good_at(start), self.line.good_at(prev)
            if prev - start >= 2:
                parts.append(f"{self.labels[lo]}..{self.labels[hi]}")
            elif prev == start:
                parts.append(self.labels[lo])
            else:
                parts.append(f"{self.labels[lo]}, {self.labels[hi]}")
            if p is not None:
                start = prev = p
        return ", ".join(parts)

    def _history(self, agent: int) -> list[dict]:
        out = []
        for q, v in zip(self.machine.asked, self.machine.answers):
            if q.agent == agent:
                out.append({
                    "goods": [self.labels[g] for g in q.bundle.sorted_goods()],
                    "rendered": self.render_bundle(q.bundle.goods),
                    "value": format_rational(v),
                })
        return out

    def _per_agent_counts(self) -> list[int]:
        counts = [0] * self.n
        for q in self.machine.asked:
            if q.agent < self.n:
                counts[q.agent] += 1
        return counts

    def state_view(self) -> dict:
        # organizer view: progress but no answer values, so knowing the
        # session id alone never leaks a valuation
        answered = len(self.machine.answers)
        return {
            "id": self.id,
            "protocol": self.protocol,
            "n": self.n,
            "m": self.m,
            "labels": self.labels,
            "status": self.status,
            "pending": self.pending_view(),
            "answered": answered,
            "per_agent": self._per_agent_counts(),
            "abort_reason": self.abort_reason,
        }

    def agent_view(self, agent: int) -> dict:
        if not 0 <= agent < self.n:
            raise ApiError(404, f"agent {agent} is not part of this session")
        q = self.machine.pending
        mine = q is not None and q.agent == agent
        status = self.status
        if status == "awaiting_answer":
            status = "answer_pending" if mine else "waiting"
        return {
            "id": self.id,
            "agent": agent,
            "status": status,
            "pending": self.pending_view() if mine else None,
            "history": self._history(agent),
        }

    def result_view(self) -> dict:
        if self.status != "completed":
            raise ApiError(409, f"session is {self.status}, not completed")
        alloc = self.machine.result
        return {
            "id": self.id,
            "protocol": self.protocol,
            "allocation": alloc.as_index_lists(),
            "bundles": [self.render_bundle(b.goods) for b in alloc.bundles],
            "queries": len(self.machine.asked),
            "per_agent": self._per_agent_counts(),
            "tie_break_seed": self.seed,
        }

    # -- mutation ---------------------------------------------------------

    def _guard(self, agent: int, goods: frozenset, value: Value) -> None:
        """Reject answers that contradict monotonicity against this
        agent's own earlier answers: a superset can never be worth
        strictly less, and re-asked bundles must repeat their value."""
        # asked includes the still-pending query; zip with answers skips it
        for q, v in zip(self.machine.asked, self.machine.answers):
            if q.agent != agent:
                continue
            other = q.bundle.goods
            if other == goods and value != v:
                raise ApiError(400, f"this exact bundle was already valued {format_rational(v)}")
            if other <= goods and v > value:
                raise ApiError(
                    400,
                    f"monotonicity: {self.render_bundle(goods)} contains "
                    f"{self.render_bundle(other)} already valued {format_rational(v)}, "
                    f"so it cannot be worth less")
            if goods <= other and value > v:
                raise ApiError(
                    400,
                    f"monotonicity: {self.render_bundle(goods)} lies inside "
                    f"{self.render_bundle(other)} already valued {format_rational(v)}, "
                    f"so it cannot be worth more")

    def submit(self, agent: int, raw_value) -> None:
        with self._lock:
            if self.status == "completed":
                raise ApiError(409, "session already completed")
            if self.status == "aborted":
                raise ApiError(409, f"session aborted: {self.abort_reason}")
            q = self.machine.pending
            assert q is not None  # awaiting_answer implies a pending query
            if agent != q.agent:
                raise ApiError(409, f"it is agent {q.agent}'s turn, not agent {agent}'s")
            try:
                value = parse_rational(raw_value)
            except (FairdivError, ValueError, TypeError) as exc:
                raise ApiError(400, f"not a rational value: {exc}") from None
            if value < 0:
                raise ApiError(400, "values are nonnegative")
            self._guard(agent, q.bundle.goods, value)
            try:
                self.machine.answer(value)
            except FairdivError as exc:
                self.status = "aborted"
                self.abort_reason = str(exc)
                raise ApiError(400, f"protocol rejected the answer: {exc}") from None
            if self.machine.done:
                self.status = "completed"


class SessionService:
    """Create, answer, and view sessions; everything replays from the store."""

    def __init__(self, store: EventStore | None = None):
        self.store = store or EventStore()
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        for event in self.store.events():
            self._apply(event, replaying=True)

    # -- event replay ---------------------------------------------------

    def _apply(self, event: dict, replaying: bool) -> None:
        if event["type"] == "create":
            session = Session(
                sid=event["session"],
                n=event["n"],
                m=event["m"],
                protocol=event["protocol"],
                labels=event["labels"],
                seed=event.get("seed", 0),
                options=event.get("options", {}),
                line=event.get("line"),
            )
            self.sessions[session.id] = session
        elif event["type"] == "answer":
            session = self.sessions[event["session"]]
            session.submit(event["agent"], event["value"])
        else:
            raise ContractViolation(f"unknown event type {event['type']!r}")

    # -- operations -------------------------------------------------------

    def create_session(self, n: int, m: int, protocol: str, *,
                       labels: list[str] | None = None, seed: int = 0,
                       options: dict | None = None,
                       line: list[int] | None = None) -> Session:
        if protocol not in REGISTRY:
            raise ApiError(400, f"unknown protocol {protocol!r}")
        if labels is None:
            labels = _default_labels(m)
        if len(labels) != m or len(set(labels)) != m:
            raise ApiError(400, "need exactly m distinct good labels")
        event = {
            "type": "create",
            "session": uuid.uuid4().hex,
            "n": n,
            "m": m,
            "protocol": protocol,
            "labels": labels,
            "seed": seed,
            "options": options or {},
            "line": line,
        }
        try:
            with self._lock:
                self._apply(event, replaying=False)
        except FairdivError as exc:
            raise ApiError(400, str(exc)) from None
        self.store.append(event)
        return self.sessions[event["session"]]

    def get(self, sid: str) -> Session:
        session = self.sessions.get(sid)
        if session is None:
            raise ApiError(404, f"no session {sid!r}")
        return session

    def submit_answer(self, sid: str, agent, raw_value) -> Session:
        session = self.get(sid)
        if not isinstance(agent, int) or isinstance(agent, bool):
            raise ApiError(400, "agent must be an integer index")
        if not 0 <= agent < session.n:
            raise ApiError(404, f"agent {agent} is not part of this session")
        value_str = raw_value if isinstance(raw_value, str) else format_rational(
            parse_rational(raw_value))
        session.submit(agent, value_str)
        self.store.append({
            "type": "answer",
            "session": sid,
            "agent": agent,
            "value": value_str,
        })
        return session


def build_app(store_path: str | None = None, service: SessionService | None = None):
    """The HTTP face of the gateway.  FastAPI is imported here so the
    rest of the package works without it installed."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    svc = service or SessionService(EventStore(store_path))
    app = FastAPI(title="fairdiv session gateway")
    app.state.service = svc

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.message})

    @app.exception_handler(FairdivError)
    async def _contract_error(_request: Request, exc: FairdivError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict):
        try:
            n, m = int(body["n"]), int(body["m"])
            protocol = body["protocol"]
        except (KeyError, TypeError, ValueError):
            raise ApiError(400, "need integer n, integer m, and a protocol id") from None
        session = svc.create_session(
            n, m, protocol,
            labels=body.get("labels"),
            seed=int(body.get("seed", 0)),
            options=body.get("options") or {},
            line=body.get("line"),
        )
        return session.state_view()

    @app.get("/sessions/{sid}")
    async def get_session(sid: str):
        return svc.get(sid).state_view()

    @app.get("/sessions/{sid}/agents/{agent}")
    async def get_agent_view(sid: str, agent: int):
        return svc.get(sid).agent_view(agent)

    @app.post("/sessions/{sid}/answers")
    async def post_answer(sid: str, body: dict):
        if "agent" not in body or "value" not in body:
            raise ApiError(400, "need agent and value")
        agent = body["agent"]
        if isinstance(agent, str) and agent.isdigit():
            agent = int(agent)
        session = svc.submit_answer(sid, agent, body["value"])
        return session.state_view()

    @app.get("/sessions/{sid}/result")
    async def get_result(sid: str):
        return svc.get(sid).result_view()

    return app
