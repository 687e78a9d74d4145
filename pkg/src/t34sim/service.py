"""Event-API service: one live session behind a FIFO lock, plus a push stream.

Every route funnels through a single asyncio lock, so concurrent posts apply
in arrival order and a reader never sees a half-applied step. Malformed
input is rejected before the session is touched.
"""

import asyncio
import contextlib

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from . import config
from .sim import (
    LogEntry,
    Scenario,
    ScenarioError,
    Session,
    decode_event,
    render_log_entry,
    step_record,
)

# largest single time jump the API accepts, ~16 virtual weeks
MAX_ADVANCE_SECONDS = 10_000_000


class SessionState:
    """Serialized access to one live Session plus its subscribers."""

    def __init__(self, session: Session):
        self.session = session
        self.lock = asyncio.Lock()
        self.subscribers = []

    def step_message(self, step) -> dict:
        message = step_record(step)
        message["log"] = [
            render_log_entry(LogEntry(step.t * 100, line), self.session.epoch)
            for line in step.logs
        ]
        return message

    def snapshot(self) -> dict:
        live = self.session
        return {
            "t": live.now,
            "event": None,
            "prev": live.state.previous.name,
            "curr": live.state.current.name,
            "line1": live.ui.line1,
            "line2": live.ui.line2,
            "line3": live.ui.line3,
            "light": live.ui.light.name,
            "emphasis": live.ui.emphasis,
            "log": [render_log_entry(entry, live.epoch) for entry in live.log],
            "locked": live.state.keypad_lock,
            "battery": live.state.hardware.battery_level,
            "position": live.state.hardware.actuator_position,
            "supported_syringes": live.state.supported_syringe_count,
            "mutations": list(live.mutations),
        }

    def publish(self, steps) -> list:
        messages = [self.step_message(step) for step in steps]
        for message in messages:
            for queue in list(self.subscribers):
                queue.put_nowait(message)
        return messages

    def subscribe(self) -> asyncio.Queue:
        queue = asyncio.Queue()
        self.subscribers.append(queue)
        return queue

    def unsubscribe(self, queue):
        if queue in self.subscribers:
            self.subscribers.remove(queue)


async def _pace(state: SessionState):
    """Background pacing: one virtual second per real second."""
    while True:
        await asyncio.sleep(1)
        async with state.lock:
            state.publish(state.session.advance(1))


def default_session() -> Session:
    return Session(Scenario(
        hardware={"battery_level": config.DEFAULT_BATTERY_LEVEL},
        name="<service>",
    ))


def create_app(session: Session = None, paced: bool = False) -> FastAPI:
    state = SessionState(session if session is not None else default_session())

    @contextlib.asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(_pace(state)) if paced else None
        try:
            yield
        finally:
            if task is not None:
                task.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await task

    app = FastAPI(title="t34sim", lifespan=lifespan)
    # the operator console is served from its own origin (or a local file)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.session_state = state

    @app.get("/session")
    async def get_session():
        async with state.lock:
            return state.snapshot()

    @app.post("/events")
    async def post_event(payload: dict):
        if payload.get("kind") == "advance":
            extra = set(payload) - {"kind", "seconds"}
            seconds = payload.get("seconds")
            if (extra or isinstance(seconds, bool) or not isinstance(seconds, int)
                    or not 0 <= seconds <= MAX_ADVANCE_SECONDS):
                raise HTTPException(status_code=422,
                                    detail=f"bad advance request: {payload!r}")
            async with state.lock:
                messages = state.publish(state.session.advance(seconds))
                return {"t": state.session.now, "steps": messages}
        try:
            event = decode_event(payload)
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        async with state.lock:
            messages = state.publish(state.session.inject(event))
            return {"t": state.session.now, "steps": messages}

    @app.websocket("/stream")
    async def stream(websocket: WebSocket):
        await websocket.accept()
        async with state.lock:
            snapshot = state.snapshot()
            queue = state.subscribe()
        try:
            await websocket.send_json(snapshot)
            drain = asyncio.create_task(_drain_incoming(websocket))
            try:
                while True:
                    await websocket.send_json(await queue.get())
            finally:
                drain.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await drain
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            state.unsubscribe(queue)

    return app


async def _drain_incoming(websocket: WebSocket):
    """The stream is push-only; swallow whatever the client sends."""
    with contextlib.suppress(WebSocketDisconnect, RuntimeError):
        while True:
            await websocket.receive_text()
