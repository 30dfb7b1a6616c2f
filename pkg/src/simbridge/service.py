"""Network face of the bridge.

WebSocket /ws streams TelemetryMessage frames and accepts CommandMessage
frames; HTTP endpoints expose the scenario document, the run report and
a health check. All interaction with the simulation funnels through
SimBridge.enqueue / SimBridge.snapshot; per-client send queues are
bounded and drop the oldest message under backpressure, so a slow or
dead client never stalls the loop.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
import threading
from collections import deque

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from . import protocol
from .errors import DescriptionError, ProtocolError
from .scenario import command_to_dict, make_bridge

log = logging.getLogger(__name__)

CLIENT_QUEUE_CAPACITY = 64


class _Client:
    def __init__(self):
        self.queue: deque[str] = deque(maxlen=CLIENT_QUEUE_CAPACITY)  # drop-oldest
        self.wakeup = asyncio.Event()

    def push(self, text: str):
        self.queue.append(text)
        self.wakeup.set()


class BridgeServer:
    """Owns the bridge thread and fans telemetry out to clients."""

    def __init__(self, scenario_doc: dict, telemetry_hz: float = 50.0,
                 speed: float = 1.0):
        self.telemetry_hz = telemetry_hz
        self.speed = speed
        self.scenario_doc = scenario_doc
        self.bridge = make_bridge(scenario_doc, speed=speed)
        self.seq = 0
        self.clients: set[_Client] = set()
        self._thread: threading.Thread | None = None
        self._broadcast_task: asyncio.Task | None = None
        self._report = None
        self._lock = threading.Lock()

    def start(self):
        self._thread = threading.Thread(target=self._run_bridge, daemon=True)
        self._thread.start()

    def _run_bridge(self):
        report = self.bridge.run(stop_on_terminal=False)
        with self._lock:
            self._report = report

    def stop(self):
        self.bridge.request_stop()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def load_scenario(self, doc: dict):
        """Swap in a new scenario (stops the current run, starts fresh)."""
        bridge = make_bridge(doc, speed=self.speed)  # validate before stopping
        self.stop()
        self.scenario_doc = doc
        self.bridge = bridge
        with self._lock:
            self._report = None
        self.start()

    def report(self) -> dict:
        with self._lock:
            if self._report is not None:
                return self._report.to_dict()
        snap = self.bridge.snapshot()
        return {
            "substeps": snap.step_count, "ticks": snap.tick_count,
            "final_t": snap.t, "dt_sim": self.bridge.config.dt_sim,
            "ctrl_divisor": self.bridge.config.ctrl_divisor,
            "pd_hz": 1.0 / self.bridge.config.dt_sim,
            "ctrl_hz": 1.0 / self.bridge.config.dt_ctrl,
            "fsm_state": snap.fsm_state, "terminal": snap.fsm_terminal,
            "max_overrun": snap.max_overrun, "running": True,
        }

    def broadcast_now(self) -> int:
        """Send a fresh state message to every client; returns its seq."""
        snap = self.bridge.snapshot()
        self.seq += 1
        text = protocol.encode_state_text(snap, self.seq)
        for client in list(self.clients):
            client.push(text)
        return self.seq

    async def broadcast_loop(self):
        period = 1.0 / self.telemetry_hz
        while True:
            self.broadcast_now()
            await asyncio.sleep(period)


def create_app(scenario_doc: dict, telemetry_hz: float = 50.0,
               speed: float = 1.0, panel_dir: str | None = None) -> FastAPI:
    server = BridgeServer(scenario_doc, telemetry_hz=telemetry_hz, speed=speed)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        server.start()
        task = asyncio.create_task(server.broadcast_loop())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
            server.stop()

    app = FastAPI(lifespan=lifespan)
    app.state.server = server

    @app.get("/healthz")
    async def healthz():
        return {"ok": True}

    @app.get("/api/scenario")
    async def get_scenario():
        return server.scenario_doc

    @app.post("/api/scenario")
    async def post_scenario(doc: dict):
        try:
            server.load_scenario(doc)
        except DescriptionError as e:
            return JSONResponse({"ok": False, "problems": e.problems}, status_code=422)
        return {"ok": True}

    @app.get("/api/report")
    async def get_report():
        return server.report()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        client = _Client()
        server.clients.add(client)
        # greet with the current state so clients render immediately
        snap = server.bridge.snapshot()
        server.seq += 1
        client.push(protocol.encode_state_text(snap, server.seq))

        async def sender():
            while True:
                await client.wakeup.wait()
                client.wakeup.clear()
                while client.queue:
                    await ws.send_text(client.queue.popleft())

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg_id, cmd = protocol.decode_command(text)
                except ProtocolError as e:
                    await ws.send_text(json.dumps(protocol.encode_error(str(e))))
                    continue
                accepted, reason = server.bridge.enqueue(cmd)
                ack = protocol.encode_ack(msg_id, accepted, reason, seq=server.seq)
                await ws.send_text(json.dumps(ack))
                if accepted:
                    # state-changing commands are reflected immediately
                    kind = command_to_dict(cmd)["kind"]
                    if kind in protocol.STATE_CHANGING:
                        await asyncio.sleep(0.02)  # let the loop apply it
                        server.broadcast_now()
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await send_task
            server.clients.discard(client)

    if panel_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=panel_dir, html=True), name="panel")

    return app
