"""UDP endpoints for the live stack, plus the UDP<->WebSocket bridge.

Receive loops run on daemon threads and talk to the engine only through
its bounded inbox queues. Telemetry is fire-and-forget snapshots; command
receipt is acknowledged so the operator console can show delivery.
"""

from __future__ import annotations

import json
import logging
import queue
import socket
import threading

from .commands import Command
from .gesture.features import KeypointFrame
from .netproto import (
    DedupeWindow,
    Kind,
    WireMessage,
    decode,
    encode,
    now_ms,
    telemetry_snapshot,
)

logger = logging.getLogger(__name__)


class UdpListener(threading.Thread):
    """Base receive loop: decode datagrams, hand valid messages over."""

    def __init__(self, host: str, port: int, name: str):
        super().__init__(name=name, daemon=True)
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((host, port))
        self.sock.settimeout(0.2)
        self._stop = threading.Event()
        self.rejected = 0

    @property
    def port(self) -> int:
        return self.sock.getsockname()[1]

    def stop(self) -> None:
        self._stop.set()

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                data, addr = self.sock.recvfrom(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            result = decode(data, self._window_for(addr))
            if not result.ok:
                self.rejected += 1
                logger.debug("dropped datagram from %s: %s", addr, result.error)
                continue
            self.handle(result.message, addr, result.duplicate)
        self.sock.close()

    def _window_for(self, addr) -> DedupeWindow | None:
        return None

    def handle(self, msg: WireMessage, addr, duplicate: bool) -> None:
        raise NotImplementedError


class CommandListener(UdpListener):
    """Command intake: dedupe per sender, ack receipt, feed the engine."""

    def __init__(self, engine, host: str = "0.0.0.0", port: int = 47801):
        super().__init__(host, port, "udp-commands")
        self.engine = engine
        self._windows: dict = {}

    def _window_for(self, addr) -> DedupeWindow:
        if addr not in self._windows:
            self._windows[addr] = DedupeWindow()
        return self._windows[addr]

    def handle(self, msg: WireMessage, addr, duplicate: bool) -> None:
        if msg.kind is not Kind.COMMAND:
            self.rejected += 1
            return
        ack = WireMessage(
            kind=Kind.ACK,
            seq=msg.seq,
            payload={"ack_seq": msg.seq, "duplicate": duplicate},
            ts_ms=now_ms(),
        )
        try:
            self.sock.sendto(encode(ack)[0], addr)
        except OSError:
            pass
        if duplicate:
            logger.info("duplicate command seq %d from %s dropped", msg.seq, addr)
            return
        try:
            cmd = Command.from_payload(msg.payload, seq=msg.seq, source=f"udp:{addr[0]}:{addr[1]}")
        except (KeyError, ValueError) as exc:
            self.rejected += 1
            logger.info("bad command payload from %s: %s", addr, exc)
            return
        self.engine.submit(cmd)


class KeypointListener(UdpListener):
    """Keypoint intake for the gesture pipeline."""

    def __init__(self, engine, host: str = "0.0.0.0", port: int = 47803):
        super().__init__(host, port, "udp-keypoints")
        self.engine = engine

    def handle(self, msg: WireMessage, addr, duplicate: bool) -> None:
        if msg.kind is not Kind.KEYPOINTS:
            self.rejected += 1
            return
        frame = KeypointFrame(
            frame_index=msg.payload["frame_index"],
            points=msg.payload["points"],
            detection_confidence=msg.payload["confidence"],
        )
        try:
            self.engine.keypoint_inbox.put_nowait(frame)
        except queue.Full:
            pass  # stale frames are droppable


class TelemetryPublisher:
    """Pushes snapshots (and dispatch echoes) to the operator station."""

    def __init__(self, dest: tuple[str, int]):
        self.dest = dest
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._seq = 0
        self._last_echo_seq: int | None = None

    def __call__(self, engine) -> None:
        self._seq += 1
        stats = engine.recognizer.telemetry_stats() if engine.recognizer else None
        msg = telemetry_snapshot(engine.world, engine.state, self._seq, stats)
        try:
            for datagram in encode(msg):
                self.sock.sendto(datagram, self.dest)
        except OSError as exc:
            logger.debug("telemetry send failed: %s", exc)
        echo = engine.state.last_echo
        if echo is not None and echo.seq != self._last_echo_seq:
            self._last_echo_seq = echo.seq
            wire_echo = WireMessage(kind=Kind.ECHO, seq=self._seq, payload=echo.to_dict(),
                                    ts_ms=now_ms())
            try:
                self.sock.sendto(encode(wire_echo)[0], self.dest)
            except OSError:
                pass

    def close(self) -> None:
        self.sock.close()


class Bridge:
    """Relays UDP telemetry to WebSocket consoles and console commands back.

    The bridge binds the operator-side telemetry port, forwards every
    telemetry/ack/echo message to connected consoles as JSON text frames,
    and sends console command frames to the controller's command port.
    """

    def __init__(
        self,
        controller_addr: tuple[str, int],
        telemetry_port: int = 47802,
        ws_port: int = 47810,
        host: str = "0.0.0.0",
    ):
        from .wsmin import WebSocketServer

        self.controller_addr = controller_addr
        self.udp = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.udp.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.udp.bind((host, telemetry_port))
        self.udp.settimeout(0.2)
        self.ws = WebSocketServer(host, ws_port, self._client_loop)
        self._stop = threading.Event()
        self._udp_thread = threading.Thread(target=self._udp_loop, name="bridge-udp", daemon=True)
        self.forwarded = 0

    @property
    def ws_port(self) -> int:
        return self.ws.port

    @property
    def telemetry_port(self) -> int:
        return self.udp.getsockname()[1]

    def start(self) -> None:
        self.ws.start()
        self._udp_thread.start()
        logger.info(
            "bridge up: telemetry udp :%d -> ws :%d, commands -> %s",
            self.telemetry_port, self.ws_port, self.controller_addr,
        )

    def _udp_loop(self) -> None:
        while not self._stop.is_set():
            try:
                data, _addr = self.udp.recvfrom(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            result = decode(data)
            if not result.ok:
                continue
            self.forwarded += 1
            self.ws.broadcast(data.decode("utf-8"))

    def _client_loop(self, ws) -> None:
        while True:
            text = ws.recv_text()
            try:
                doc = json.loads(text)
            except json.JSONDecodeError:
                ws.send_text(json.dumps({"error": "invalid JSON"}))
                continue
            data = json.dumps(doc, separators=(",", ":"), sort_keys=True).encode()
            result = decode(data)
            if not result.ok:
                ws.send_text(json.dumps({"error": result.error}))
                continue
            if result.message.kind is Kind.COMMAND:
                self.udp.sendto(data, self.controller_addr)
            else:
                ws.send_text(json.dumps({"error": f"bridge rejects kind {result.message.kind.value}"}))

    def stop(self) -> None:
        self._stop.set()
        self.ws.stop()
        try:
            self.udp.close()
        except OSError:
            pass
