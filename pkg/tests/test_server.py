import json
import socket
import time

import pytest

from duetto.server import SessionServer
from duetto.session import replay


class Client:
    def __init__(self, port, timeout=5.0):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=timeout)
        self.buf = b""

    def send(self, obj):
        self.sock.sendall((json.dumps(obj) + "\n").encode("utf-8"))

    def send_raw(self, data: bytes):
        self.sock.sendall(data)

    def next_msg(self, timeout=5.0):
        deadline = time.monotonic() + timeout
        while b"\n" not in self.buf:
            self.sock.settimeout(max(deadline - time.monotonic(), 0.01))
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("server closed the connection")
            self.buf += chunk
        line, self.buf = self.buf.split(b"\n", 1)
        return json.loads(line)

    def wait_for(self, predicate, timeout=5.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            msg = self.next_msg(timeout=max(deadline - time.monotonic(), 0.01))
            if predicate(msg):
                return msg
        raise TimeoutError("no matching message")

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


@pytest.fixture()
def server(countryside, tmp_path):
    srv = SessionServer(
        countryside,
        port=0,
        snapshot_every=2,
        tick_rate=200.0,
        max_ticks=2000,
        trace_path=tmp_path / "live.trace.jsonl",
    )
    srv.start()
    yield srv
    srv.stop()


def is_snapshot(msg):
    return "tick" in msg and "characters" in msg


def test_hello_then_snapshots(server):
    client = Client(server.port)
    hello = client.next_msg()
    assert hello["hello"]["schema_version"] == 1
    assert hello["hello"]["snapshot_every"] == 2
    assert hello["hello"]["stage_rect"] == [-8.0, -5.0, 8.0, 5.0]
    assert len(hello["hello"]["cage"]["objects"]) == 4
    assert "sentier" in hello["hello"]["decors"]["moment_campagne"]
    first = client.wait_for(is_snapshot)
    later = client.wait_for(lambda m: is_snapshot(m) and m["tick"] > first["tick"])
    assert later["scene"]["node"] == "moment_campagne"
    client.close()


def test_click_relaunch_reaches_full_intensity_within_two_periods(server):
    client = Client(server.port)
    client.next_msg()  # hello
    # let the voice fade a little first
    client.wait_for(lambda m: is_snapshot(m) and m["tick"] >= 100)
    client.send({"kind": "relaunch_character", "character": "femme"})
    ack = client.wait_for(
        lambda m: is_snapshot(m)
        and any(
            e["event"]["kind"] == "relaunch_character" and e["accepted"]
            for e in m["events"]
        ),
        timeout=5.0,
    )
    applied_tick = ack["events"][0]["event"]["tick"]
    assert ack["tick"] - applied_tick < 2 * server.engine.snapshot_every
    assert ack["characters"]["femme"]["intensity"] > 0.99
    client.close()


def test_malformed_message_error_reply_connection_kept(server):
    client = Client(server.port)
    client.next_msg()
    client.send_raw(b"this is not json\n")
    err = client.wait_for(lambda m: "error" in m)
    assert "malformed" in err["error"]
    client.send_raw(b'{"kind": "explode"}\n')
    err2 = client.wait_for(lambda m: "error" in m)
    assert "kind" in err2["error"]
    # still receiving snapshots afterwards
    client.wait_for(is_snapshot)
    client.close()


def test_second_concurrent_client_refused(server):
    first = Client(server.port)
    first.next_msg()
    second = Client(server.port)
    msg = second.next_msg()
    assert "error" in msg and "spectator" in msg["error"]
    with pytest.raises((ConnectionError, OSError)):
        for _ in range(10):
            second.next_msg(timeout=1.0)
    first.wait_for(is_snapshot)
    first.close()
    second.close()


def test_reconnect_after_disconnect_resynchronizes(server):
    first = Client(server.port)
    first.next_msg()
    snap = first.wait_for(is_snapshot)
    first.close()
    time.sleep(0.3)  # let the server notice the disconnect
    second = Client(server.port)
    hello = second.next_msg()
    assert "hello" in hello
    resynced = second.wait_for(is_snapshot)
    assert resynced["tick"] >= snap["tick"]
    second.close()


def test_live_trace_replays_identically(countryside, tmp_path):
    trace_path = tmp_path / "live.trace.jsonl"
    srv = SessionServer(
        countryside,
        port=0,
        snapshot_every=2,
        tick_rate=400.0,
        max_ticks=300,
        trace_path=trace_path,
    )
    srv.start()
    client = Client(srv.port)
    client.next_msg()
    client.send({"kind": "set_lambda", "value": 0.2})
    client.send({"kind": "relaunch_character", "character": "homme"})
    client.wait_for(
        lambda m: is_snapshot(m)
        and any(e["event"]["kind"] == "set_lambda" for e in m["events"]),
    )
    assert srv.wait(timeout=10.0), "server did not finish its tick budget"
    srv.stop()
    client.close()
    report = replay(trace_path)
    assert report.identical, report.detail
    # the live events are embedded in the header at their applied ticks
    header = json.loads(trace_path.read_text().split("\n")[0])
    kinds = [e["kind"] for e in header["script"]]
    assert "set_lambda" in kinds and "relaunch_character" in kinds


def test_scheduled_future_event_applies_at_its_tick(server):
    client = Client(server.port)
    client.next_msg()
    snap = client.wait_for(is_snapshot)
    target = snap["tick"] + 100
    client.send({"tick": target, "kind": "set_lambda", "value": 0.75})
    ack = client.wait_for(
        lambda m: is_snapshot(m)
        and any(e["event"]["kind"] == "set_lambda" for e in m["events"]),
    )
    applied = [e for e in ack["events"] if e["event"]["kind"] == "set_lambda"]
    assert applied[0]["event"]["tick"] == target
    assert applied[0]["accepted"]
    client.close()
