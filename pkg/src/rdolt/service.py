"""HTTP control plane: start runs, stream tier events, accept human scores."""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .backend import resolve_backend
from .errors import ConfigError, RdoltError, ScoringTimeoutError, SessionClosedError
from .model import RunConfig, Task, Thought, default_run_config
from .pipeline import run_variant
from .scoring import make_scorer

SERVICE_TOKEN_ENV = "RDOLT_SERVICE_TOKEN"

TERMINAL_EVENTS = {"final_answer", "error"}


class HumanGate:
    """One-at-a-time scoring gate between a blocked run and the scores endpoint."""

    def __init__(self, emit):
        self._emit = emit
        self._cond = threading.Condition()
        self._pending: Optional[list[Thought]] = None
        self._delivery: Optional[dict[str, tuple[int, int, int, int]]] = None
        self._closed = False

    def request_scores(self, thoughts: list[Thought], timeout: float):
        with self._cond:
            self._pending = list(thoughts)
            self._delivery = None
        self._emit("scores_requested", {
            "thought_ids": [t.id for t in thoughts],
            "tier": thoughts[0].tier.value if thoughts else None,
            "round": thoughts[0].round if thoughts else None,
        })
        with self._cond:
            self._cond.wait_for(lambda: self._delivery is not None or self._closed,
                                timeout=timeout)
            self._pending = None
            if self._delivery is not None:
                delivery, self._delivery = self._delivery, None
                return delivery
            if self._closed:
                raise SessionClosedError("scoring session closed")
            raise ScoringTimeoutError(f"no scores submitted within {timeout:.0f}s")

    def submit(self, scores: dict[str, dict]) -> tuple[int, str]:
        """Validate and deliver a submission; returns (http_status, detail)."""
        with self._cond:
            if self._pending is None or self._delivery is not None:
                return 409, "run is not awaiting scores"
            pending_ids = {t.id for t in self._pending}
            if set(scores) != pending_ids:
                return 422, (f"submission must cover exactly the pending thoughts "
                             f"{sorted(pending_ids)}")
            delivery = {}
            for tid, components in scores.items():
                if not isinstance(components, dict):
                    return 422, f"scores for {tid} must be an object"
                values = []
                for key in ("lv", "coh", "sim", "adp"):
                    if key not in components:
                        return 422, f"scores for {tid} missing component {key!r}"
                    value = components[key]
                    if not isinstance(value, int) or isinstance(value, bool):
                        return 422, f"component {key!r} of {tid} must be an integer"
                    if not 0 <= value <= 10:
                        return 422, f"component {key!r} of {tid} outside [0, 10]"
                    values.append(value)
                delivery[tid] = tuple(values)
            # the gate closes the moment a valid submission is staged
            self._delivery = delivery
            self._pending = None
            self._cond.notify_all()
            return 200, "accepted"

    def close(self):
        with self._cond:
            self._closed = True
            self._cond.notify_all()


class RunHandle:
    """Everything the service tracks for one run; single event-log writer."""

    def __init__(self, run_id: str, task: Task, config: RunConfig):
        self.id = run_id
        self.task = task
        self.config = config
        self.status = "running"
        self.error: Optional[str] = None
        self.record = None
        self.events: list[tuple[str, dict]] = []
        self.done = False
        self.cond = threading.Condition()
        self.gate = HumanGate(self.emit)
        self._plan: Optional[dict] = None
        self._rounds: list[dict] = []

    def emit(self, kind: str, payload: dict) -> None:
        with self.cond:
            if kind == "plan":
                self._plan = payload
            elif kind == "round_outcome":
                self._rounds.append(payload)
            if kind == "scores_requested":
                self.status = "awaiting_scores"
            elif self.status == "awaiting_scores":
                self.status = "running"
            self.events.append((kind, payload))
            self.cond.notify_all()

    def finish(self, status: str, record, error: Optional[str] = None) -> None:
        with self.cond:
            self.status = status
            self.record = record
            self.error = error
            self.done = True
            self.cond.notify_all()

    def snapshot(self) -> dict[str, Any]:
        with self.cond:
            if self.record is not None:
                d = self.record.to_dict()
                d["status"] = self.status if self.status != "running" else d["status"]
                return d
            return {
                "run_id": self.id,
                "status": self.status,
                "task": self.task.to_dict(),
                "config": self.config.to_dict(),
                "plan": self._plan,
                "kpm": {"run_id": self.id, "rounds": list(self._rounds)},
                "transcript": [],
                "final_answer": None,
                "normalized_answer": None,
                "grade": None,
                "error": self.error,
            }


class RunRegistry:
    def __init__(self, store_path: Optional[str] = None):
        self._lock = threading.Lock()
        self._runs: dict[str, RunHandle] = {}
        self._idempotency: dict[str, str] = {}
        self.store_path = store_path

    def get(self, run_id: str) -> Optional[RunHandle]:
        with self._lock:
            return self._runs.get(run_id)

    def start(self, task: Task, config: RunConfig,
              idempotency_key: Optional[str] = None) -> RunHandle:
        with self._lock:
            if idempotency_key and idempotency_key in self._idempotency:
                return self._runs[self._idempotency[idempotency_key]]
            run_id = uuid.uuid4().hex[:16]
            handle = RunHandle(run_id, task, config)
            self._runs[run_id] = handle
            if idempotency_key:
                self._idempotency[idempotency_key] = run_id
        thread = threading.Thread(target=self._execute, args=(handle,), daemon=True)
        thread.start()
        return handle

    def _execute(self, handle: RunHandle) -> None:
        try:
            backend = resolve_backend(handle.config.endpoint)
            scorer = make_scorer(handle.config, sink=handle.gate)
            record = run_variant(handle.task, backend, scorer, handle.config,
                                 on_event=handle.emit, run_id=handle.id)
            if self.store_path:
                from .store import append_run_record
                append_run_record(self.store_path, record)
            handle.finish("completed", record)
        except RdoltError as exc:
            record = getattr(exc, "record", None)
            if record is not None and self.store_path:
                from .store import append_run_record
                append_run_record(self.store_path, record)
            handle.finish("failed", record, error=str(exc))
        except Exception as exc:  # surface unexpected bugs through the event log
            handle.emit("error", {"message": f"internal error: {exc}"})
            handle.finish("failed", None, error=str(exc))
        finally:
            handle.gate.close()


def create_app(store_path: Optional[str] = None,
               registry: Optional[RunRegistry] = None,
               frontend_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="rdolt control service")
    runs = registry or RunRegistry(store_path=store_path)
    app.state.registry = runs

    @app.middleware("http")
    async def bearer_auth(request: Request, call_next):
        token = os.environ.get(SERVICE_TOKEN_ENV, "")
        if token and request.url.path.startswith("/api/") \
                and request.url.path != "/api/health":
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {token}":
                return JSONResponse({"detail": "unauthorized"}, status_code=401)
        return await call_next(request)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "defaults": default_run_config().to_dict()}

    @app.post("/api/runs", status_code=202)
    async def start_run(request: Request):
        body = await request.json()
        statement = (body.get("statement") or body.get("question") or "").strip()
        if not statement:
            return JSONResponse({"detail": "statement is required"}, status_code=400)
        task = Task(
            id=body.get("id", f"svc-{uuid.uuid4().hex[:8]}"),
            statement=statement,
            instructions=body.get("instructions", ""),
            gold_answer=body.get("gold_answer"),
            source=body.get("source", "generic"),
        )
        values = default_run_config().to_dict()
        overrides = body.get("config") or {}
        if not isinstance(overrides, dict):
            return JSONResponse({"detail": "config must be an object"}, status_code=400)
        values.update(overrides)
        try:
            config = RunConfig.from_dict(values)
            config.validate()
            if not config.endpoint:
                raise ConfigError("config.endpoint is required")
        except (ConfigError, ValueError) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)
        handle = runs.start(task, config, idempotency_key=body.get("idempotency_key"))
        return {"run_id": handle.id, "status": handle.status}

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        handle = runs.get(run_id)
        if handle is None:
            return JSONResponse({"detail": "unknown run"}, status_code=404)
        return handle.snapshot()

    @app.post("/api/runs/{run_id}/scores")
    def submit_scores(run_id: str, body: dict):
        handle = runs.get(run_id)
        if handle is None:
            return JSONResponse({"detail": "unknown run"}, status_code=404)
        scores = body.get("scores")
        if not isinstance(scores, dict) or not scores:
            return JSONResponse({"detail": "body must carry a 'scores' object"},
                                status_code=422)
        status, detail = handle.gate.submit(scores)
        if status != 200:
            return JSONResponse({"detail": detail}, status_code=status)
        return {"accepted": True}

    @app.get("/api/runs/{run_id}/events")
    def stream_events(run_id: str):
        handle = runs.get(run_id)
        if handle is None:
            return JSONResponse({"detail": "unknown run"}, status_code=404)

        def event_stream():
            index = 0
            while True:
                with handle.cond:
                    handle.cond.wait_for(
                        lambda: len(handle.events) > index or handle.done, timeout=1.0)
                    batch = handle.events[index:]
                    done = handle.done
                index += len(batch)
                for kind, payload in batch:
                    yield f"event: {kind}\ndata: {json.dumps(payload)}\n\n"
                if done and not batch:
                    return
                if not batch:
                    # a regular yield point so closed connections unwind promptly
                    yield ": keep-alive\n\n"

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    _mount_frontend(app, frontend_dir)
    return app


def _mount_frontend(app: FastAPI, frontend_dir: Optional[str]) -> None:
    root = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[2] / "frontend"
    if (root / "index.html").exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(root), html=True), name="ui")
