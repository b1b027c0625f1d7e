"""Live session endpoint: line-delimited JSON over a local TCP socket.

One spectator at a time: the first connection is the session client and
concurrent connections are refused; after a disconnect a new client may
attach and resynchronizes from the next snapshot.  Client lines are user
events (tick omitted means "stamp at arrival"); the server replies with a
hello line, then snapshots at the snapshot rate, and ``{"error": ...}``
for malformed lines (the connection stays up).

The engine runs on its own fixed-rate tick thread and is the only thread
touching simulation state; socket I/O talks to it through queues.  Under
send backpressure snapshots are dropped (and counted) — events never are.
The whole run is logged and written as a trace file on stop, so every
live session is replayable.
"""

from __future__ import annotations

import json
import queue
import socket
import threading
import time
from pathlib import Path

from .scenario import Scenario, canonical_json
from .session import (
    EventError,
    SessionEngine,
    Trace,
    event_from_obj,
    event_to_obj,
    make_trace_header,
)

PROTOCOL_SCHEMA_VERSION = 1
_OUTBOUND_CAPACITY = 256


class SessionServer:
    """Single-session TCP server around a :class:`SessionEngine`."""

    def __init__(
        self,
        scenario: Scenario,
        host: str = "127.0.0.1",
        port: int = 0,
        snapshot_every: int | None = None,
        tick_rate: float = 60.0,
        max_ticks: int | None = None,
        trace_path: str | Path | None = None,
    ):
        if tick_rate <= 0.0:
            raise ValueError("tick_rate must be positive")
        self.scenario = scenario
        self.host = host
        self.requested_port = port
        self.tick_rate = tick_rate
        self.max_ticks = max_ticks
        self.trace_path = Path(trace_path) if trace_path else None
        self.engine = SessionEngine(scenario, snapshot_every)
        self.snapshot_drops = 0
        self._snapshots: list[dict] = [self.engine.snapshot_obj()]
        self._script_log: list[dict] = []
        self._inbound: queue.Queue = queue.Queue()
        self._outbound: queue.Queue = queue.Queue(maxsize=_OUTBOUND_CAPACITY)
        self._client: socket.socket | None = None
        self._client_lock = threading.Lock()
        self._last_snapshot_line = canonical_json(self._snapshots[0])
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._listener: socket.socket | None = None
        self._finalized = threading.Event()

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._listener = socket.create_server(
            (self.host, self.requested_port), reuse_port=False
        )
        self._listener.settimeout(0.1)
        for target in (self._accept_loop, self._tick_loop, self._send_loop):
            t = threading.Thread(target=target, daemon=True)
            t.start()
            self._threads.append(t)

    @property
    def port(self) -> int:
        assert self._listener is not None, "server not started"
        return self._listener.getsockname()[1]

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5.0)
        with self._client_lock:
            if self._client is not None:
                try:
                    self._client.close()
                except OSError:
                    pass
                self._client = None
        if self._listener is not None:
            self._listener.close()
        self._finalize_trace()

    def wait(self, timeout: float | None = None) -> bool:
        """Block until the tick loop finishes (max_ticks reached or stop)."""
        return self._finalized.wait(timeout)

    def trace(self) -> Trace:
        header = make_trace_header(
            self.scenario,
            self._script_log,
            self.engine.tick,
            self.engine.snapshot_every,
        )
        return Trace(header, list(self._snapshots))

    def hello_obj(self) -> dict:
        """First line sent to a client: protocol meta plus the static
        layout a renderer needs (stage bounds, cage geometry, decors)."""
        scn = self.scenario
        rect = scn.sim.stage_rect
        from .director import SceneKind

        decors = {
            node.id: [edge.decor_id for edge in node.decor_edges]
            for node in scn.graph.nodes.values()
            if node.kind is SceneKind.RECIT_MOMENT and node.decor_edges
        }
        return {
            "hello": {
                "schema_version": PROTOCOL_SCHEMA_VERSION,
                "scenario_hash": scn.hash(),
                "snapshot_every": self.engine.snapshot_every,
                "tick_rate": self.tick_rate,
                "stage_rect": [rect.xmin, rect.ymin, rect.xmax, rect.ymax],
                "cage": {
                    "box": [list(scn.cage.box.min_corner), list(scn.cage.box.max_corner)],
                    "objects": [
                        {
                            "id": o.id,
                            "box": [list(o.box.min_corner), list(o.box.max_corner)],
                        }
                        for o in scn.cage.objects
                    ],
                },
                "decors": decors,
            }
        }

    def _finalize_trace(self) -> None:
        if self.trace_path is not None:
            self.trace_path.parent.mkdir(parents=True, exist_ok=True)
            self.trace().save(self.trace_path)

    # -- socket side -----------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            with self._client_lock:
                if self._client is not None:
                    try:
                        conn.sendall(
                            (canonical_json({"error": "session already has a spectator"}) + "\n").encode()
                        )
                        conn.close()
                    except OSError:
                        pass
                    continue
                self._client = conn
            self._send_line(canonical_json(self.hello_obj()), is_snapshot=False)
            self._send_line(self._last_snapshot_line, is_snapshot=True)
            threading.Thread(target=self._read_loop, args=(conn,), daemon=True).start()

    def _read_loop(self, conn: socket.socket) -> None:
        buf = b""
        conn.settimeout(0.1)
        while not self._stop.is_set():
            try:
                chunk = conn.recv(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            if not chunk:
                break
            buf += chunk
            while b"\n" in buf:
                line, buf = buf.split(b"\n", 1)
                if line.strip():
                    self._handle_line(line)
        with self._client_lock:
            if self._client is conn:
                self._client = None
        try:
            conn.close()
        except OSError:
            pass

    def _handle_line(self, line: bytes) -> None:
        try:
            obj = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._send_line(
                canonical_json({"error": f"malformed message: {exc}"}), is_snapshot=False
            )
            return
        self._inbound.put(obj)

    def _send_line(self, line: str, is_snapshot: bool) -> None:
        try:
            self._outbound.put_nowait(line)
        except queue.Full:
            if is_snapshot:
                self.snapshot_drops += 1
                return
            try:  # make room for a non-droppable line
                self._outbound.get_nowait()
                self.snapshot_drops += 1
            except queue.Empty:
                pass
            try:
                self._outbound.put_nowait(line)
            except queue.Full:
                pass

    def _send_loop(self) -> None:
        while not self._stop.is_set():
            try:
                line = self._outbound.get(timeout=0.1)
            except queue.Empty:
                continue
            with self._client_lock:
                conn = self._client
            if conn is None:
                continue
            try:
                conn.sendall((line + "\n").encode("utf-8"))
            except OSError:
                with self._client_lock:
                    if self._client is conn:
                        self._client = None

    # -- engine side ---------------------------------------------------------

    def _tick_loop(self) -> None:
        period = 1.0 / self.tick_rate
        next_deadline = time.monotonic() + period
        pending: list = []
        while not self._stop.is_set():
            if self.max_ticks is not None and self.engine.tick >= self.max_ticks:
                break
            now = time.monotonic()
            if now < next_deadline:
                time.sleep(min(next_deadline - now, 0.05))
                continue
            next_deadline += period
            t = self.engine.next_tick
            while True:
                try:
                    obj = self._inbound.get_nowait()
                except queue.Empty:
                    break
                try:
                    pending.append(event_from_obj(obj, default_tick=t))
                except EventError as exc:
                    self._send_line(canonical_json({"error": str(exc)}), is_snapshot=False)
            due = [ev for ev in pending if ev.tick <= t]
            pending = [ev for ev in pending if ev.tick > t]
            for ev in due:
                # log at the tick it is actually applied so replay matches
                self._script_log.append({**event_to_obj(ev), "tick": t})
            snap = self.engine.process_tick(due)
            if snap is not None:
                self._snapshots.append(snap)
                self._last_snapshot_line = canonical_json(snap)
                self._send_line(self._last_snapshot_line, is_snapshot=True)
        # trailing partial snapshot keeps the trace aligned with run_session
        if self.engine.tick % self.engine.snapshot_every != 0:
            snap = self.engine.snapshot_obj()
            self._snapshots.append(snap)
            self._last_snapshot_line = canonical_json(snap)
            self._send_line(self._last_snapshot_line, is_snapshot=True)
        self._finalized.set()


def serve(
    scenario: Scenario,
    port: int,
    host: str = "127.0.0.1",
    snapshot_every: int | None = None,
    tick_rate: float = 60.0,
    max_ticks: int | None = None,
    trace_path: str | Path | None = None,
) -> None:
    """Run a live session until ``max_ticks`` (or interrupt); blocking."""
    server = SessionServer(
        scenario,
        host=host,
        port=port,
        snapshot_every=snapshot_every,
        tick_rate=tick_rate,
        max_ticks=max_ticks,
        trace_path=trace_path,
    )
    server.start()
    try:
        while not server.wait(timeout=0.2):
            pass
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
