"""HTTP API exposing the six-phase configuration wizard as per-session state.

One immutable KnowledgeBase is shared by all sessions; each session is an
in-memory state machine (ANSWERING -> TASK_SELECTED -> SOLUTIONS_READY or
NO_SOLUTION -> EXTRAS_SELECTED -> BUNDLE_READY) with exclusive per-session
locking, so interleaved requests to different sessions never interact.
Sessions expire after an idle timeout; nothing is persisted.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import qa
from .advisor import Recommendation, derivable_context, recommend_deployments
from .codegen import ConfigBundle
from .costs import CostModel, rank_solutions, resolve_model
from .model import KnowledgeBase, PropertyRef, Question, TaskDescription
from .planner import Goal, SearchLimits, Solution, plan
from .wizard import WizardError, build_bundle, resolve_extra_property

ANSWERING = "ANSWERING"
TASK_SELECTED = "TASK_SELECTED"
SOLUTIONS_READY = "SOLUTIONS_READY"
NO_SOLUTION = "NO_SOLUTION"
EXTRAS_SELECTED = "EXTRAS_SELECTED"
BUNDLE_READY = "BUNDLE_READY"


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


@dataclass
class Session:
    id: str
    last_seen: float
    phase: str = ANSWERING
    answers: dict[str, str] = field(default_factory=dict)
    task: TaskDescription | None = None
    solutions: list[Solution] = field(default_factory=list)
    recommendations: list[Recommendation] | None = None
    extras: list[PropertyRef] = field(default_factory=list)
    model: str = "lowest-total"
    bundle: ConfigBundle | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Thread-safe session registry with lazy idle expiry."""

    def __init__(self, ttl_seconds: float, clock=time.monotonic):
        self._ttl = ttl_seconds
        self._clock = clock
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _purge(self, now: float) -> None:
        expired = [sid for sid, s in self._sessions.items() if now - s.last_seen > self._ttl]
        for sid in expired:
            del self._sessions[sid]

    def create(self) -> Session:
        now = self._clock()
        session = Session(id=uuid.uuid4().hex, last_seen=now)
        with self._lock:
            self._purge(now)
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        now = self._clock()
        with self._lock:
            self._purge(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise ApiError(404, f"unknown session '{session_id}'")
            session.last_seen = now
            return session


# -- JSON views --------------------------------------------------------------


def _ref_json(ref: PropertyRef) -> dict:
    return {"property_id": ref.property_id, "unit": ref.unit}


def _question_json(question: Question) -> dict:
    return {
        "facet": question.facet_key,
        "text": question.text,
        "options": list(question.options),
    }


def _task_json(task: TaskDescription) -> dict:
    return {
        "id": task.id,
        "label": task.label,
        "produces": _ref_json(task.produces),
        "location": task.location,
        "facets": dict(sorted(task.facets.items())),
    }


def _solution_json(solution: Solution, index: int, cost: float) -> dict:
    return {
        "index": index,
        "cost": cost,
        "root": solution.root,
        "nodes": sorted(solution.nodes),
        "edges": [list(e) for e in sorted(solution.edges)],
    }


def _recommendation_json(rec: Recommendation) -> dict:
    return {
        "missing": [
            {**_ref_json(ref), "location": loc} for ref, loc in rec.missing
        ],
        "present_cost": rec.present_cost,
        "partial": {
            "root": rec.partial.root,
            "nodes": sorted(rec.partial.nodes),
            "edges": [list(e) for e in sorted(rec.partial.edges)],
        },
    }


# -- application -------------------------------------------------------------


class AnswerIn(BaseModel):
    facet: str
    value: str


class TaskIn(BaseModel):
    taskId: str


class ExtrasIn(BaseModel):
    properties: list[str]


class SelectIn(BaseModel):
    index: int
    model: str = "lowest-total"


def create_app(
    kb: KnowledgeBase,
    *,
    limits: SearchLimits | None = None,
    session_ttl_seconds: float = 1800.0,
    clock=time.monotonic,
    extra_models: tuple[CostModel, ...] = (),
) -> FastAPI:
    limits = limits or SearchLimits()
    store = SessionStore(session_ttl_seconds, clock)
    app = FastAPI(title="cascom configuration service")
    # The browser wizard is served statically, so cross-origin calls are normal.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _bad_body(request: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"error": "invalid body", "details": details})

    def _require_phase(session: Session, *phases: str) -> None:
        if session.phase not in phases:
            raise ApiError(
                409,
                f"not allowed in phase {session.phase} (expected {' or '.join(phases)})",
            )

    def _model_or_422(name: str) -> CostModel:
        try:
            return resolve_model(name, list(extra_models))
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None

    def _ranked(session: Session, model: CostModel) -> list[tuple[Solution, float]]:
        return rank_solutions(kb, session.solutions, model)

    @app.post("/sessions", status_code=201)
    def create_session():
        session = store.create()
        return {"id": session.id, "phase": session.phase}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return {
                "id": session.id,
                "phase": session.phase,
                "answers": dict(session.answers),
                "task": _task_json(session.task) if session.task else None,
                "extras": [_ref_json(r) for r in session.extras],
                "model": session.model,
            }

    @app.get("/sessions/{session_id}/question")
    def next_question(session_id: str):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, ANSWERING)
            question = qa.next_question(kb, session.answers)
            remaining = len(qa.filter_tasks(kb, session.answers))
            return {
                "question": _question_json(question) if question else None,
                "remaining": remaining,
            }

    @app.post("/sessions/{session_id}/answers")
    def add_answer(session_id: str, body: AnswerIn):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, ANSWERING)
            attempt = dict(session.answers)
            attempt[body.facet] = body.value
            try:
                remaining = qa.filter_tasks(kb, attempt)
            except qa.UnknownAnswerError as exc:
                raise ApiError(422, str(exc)) from None
            session.answers = attempt
            return {"remaining": len(remaining), "answers": dict(session.answers)}

    @app.get("/sessions/{session_id}/tasks")
    def list_tasks(session_id: str):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, ANSWERING)
            return {"tasks": [_task_json(t) for t in qa.filter_tasks(kb, session.answers)]}

    @app.post("/sessions/{session_id}/task")
    def select_task(session_id: str, body: TaskIn):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, ANSWERING)
            matching = [t for t in qa.filter_tasks(kb, session.answers) if t.id == body.taskId]
            if not matching:
                raise ApiError(422, f"unknown or filtered-out task id '{body.taskId}'")
            task = matching[0]
            session.task = task
            session.phase = TASK_SELECTED
            session.solutions = plan(kb, Goal(task.produces, task.location), limits)
            if session.solutions:
                session.phase = SOLUTIONS_READY
                model = _model_or_422(session.model)
                return {
                    "phase": session.phase,
                    "solutions": [
                        _solution_json(s, i, c) for i, (s, c) in enumerate(_ranked(session, model))
                    ],
                }
            session.phase = NO_SOLUTION
            session.recommendations = recommend_deployments(
                kb, Goal(task.produces, task.location), limits
            )
            return {"phase": session.phase, "solutions": []}

    @app.get("/sessions/{session_id}/recommendations")
    def recommendations(session_id: str):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, NO_SOLUTION)
            recs = session.recommendations or []
            return {"recommendations": [_recommendation_json(r) for r in recs]}

    @app.get("/sessions/{session_id}/extras")
    def list_extras(session_id: str):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, SOLUTIONS_READY, EXTRAS_SELECTED)
            derivable = [
                ref
                for ref in derivable_context(kb, session.task.location)
                if ref != session.task.produces
            ]
            return {"extras": [_ref_json(r) for r in derivable]}

    @app.post("/sessions/{session_id}/extras")
    def select_extras(session_id: str, body: ExtrasIn):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, SOLUTIONS_READY)
            try:
                refs = [
                    resolve_extra_property(kb, session.task, pid) for pid in body.properties
                ]
                for ref in sorted(set(refs)):
                    if not plan(kb, Goal(ref, session.task.location), limits):
                        raise WizardError(f"no solution for extra '{ref.property_id}'")
            except WizardError as exc:
                raise ApiError(422, str(exc)) from None
            session.extras = refs
            session.phase = EXTRAS_SELECTED
            return {"phase": session.phase, "extras": [_ref_json(r) for r in refs]}

    @app.get("/sessions/{session_id}/solutions")
    def list_solutions(session_id: str, model: str = "lowest-total"):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, SOLUTIONS_READY, EXTRAS_SELECTED, BUNDLE_READY)
            cost_model = _model_or_422(model)
            return {
                "model": cost_model.name,
                "solutions": [
                    _solution_json(s, i, c)
                    for i, (s, c) in enumerate(_ranked(session, cost_model))
                ],
            }

    @app.post("/sessions/{session_id}/select")
    def select_solution(session_id: str, body: SelectIn):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, SOLUTIONS_READY, EXTRAS_SELECTED)
            cost_model = _model_or_422(body.model)
            ranked = _ranked(session, cost_model)
            if not 0 <= body.index < len(ranked):
                raise ApiError(422, f"solution index {body.index} out of range")
            primary, cost = ranked[body.index]
            try:
                session.bundle = build_bundle(
                    kb, session.task, primary, session.extras, cost_model, limits
                )
            except (WizardError, ValueError) as exc:
                raise ApiError(422, str(exc)) from None
            session.model = cost_model.name
            session.phase = BUNDLE_READY
            return {
                "phase": session.phase,
                "index": body.index,
                "model": cost_model.name,
                "cost": cost,
            }

    @app.get("/sessions/{session_id}/bundle")
    def get_bundle(session_id: str):
        session = store.get(session_id)
        with session.lock:
            _require_phase(session, BUNDLE_READY)
            return session.bundle.as_dict()

    return app
