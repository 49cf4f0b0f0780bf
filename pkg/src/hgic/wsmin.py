"""Minimal RFC 6455 WebSocket server on stdlib sockets.

Covers exactly what the operator-console bridge needs: HTTP upgrade
handshake, masked client text frames in, unmasked server text frames out,
ping/pong, and close. No extensions, no fragmentation of outgoing frames.
Exists because no WebSocket package is available in this deployment; swap
for a real library when one is.
"""

from __future__ import annotations

import base64
import hashlib
import logging
import socket
import struct
import threading

logger = logging.getLogger(__name__)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WebSocketClosed(Exception):
    pass


def _recv_exact(conn: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            raise WebSocketClosed("peer closed")
        buf += chunk
    return buf


class WebSocketConnection:
    def __init__(self, conn: socket.socket, addr):
        self.conn = conn
        self.addr = addr
        self._send_lock = threading.Lock()
        self.open = True

    def handshake(self) -> None:
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = self.conn.recv(4096)
            if not chunk:
                raise WebSocketClosed("closed during handshake")
            data += chunk
            if len(data) > 65536:
                raise WebSocketClosed("oversized handshake")
        headers: dict[str, str] = {}
        for line in data.split(b"\r\n")[1:]:
            if b":" in line:
                k, v = line.split(b":", 1)
                headers[k.decode().strip().lower()] = v.decode().strip()
        key = headers.get("sec-websocket-key")
        if not key or "websocket" not in headers.get("upgrade", "").lower():
            self.conn.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            raise WebSocketClosed("not a websocket upgrade")
        accept = base64.b64encode(hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        self.conn.sendall(
            (
                "HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
            ).encode()
        )

    def send_text(self, text: str) -> None:
        payload = text.encode()
        length = len(payload)
        if length < 126:
            header = struct.pack("!BB", 0x80 | OP_TEXT, length)
        elif length < 65536:
            header = struct.pack("!BBH", 0x80 | OP_TEXT, 126, length)
        else:
            header = struct.pack("!BBQ", 0x80 | OP_TEXT, 127, length)
        with self._send_lock:
            self.conn.sendall(header + payload)

    def _send_control(self, opcode: int, payload: bytes = b"") -> None:
        with self._send_lock:
            self.conn.sendall(struct.pack("!BB", 0x80 | opcode, len(payload)) + payload)

    def recv_text(self) -> str:
        """Next complete text message; handles ping and close inline."""
        fragments: list[bytes] = []
        while True:
            b1, b2 = _recv_exact(self.conn, 2)
            opcode = b1 & 0x0F
            fin = bool(b1 & 0x80)
            masked = bool(b2 & 0x80)
            length = b2 & 0x7F
            if length == 126:
                (length,) = struct.unpack("!H", _recv_exact(self.conn, 2))
            elif length == 127:
                (length,) = struct.unpack("!Q", _recv_exact(self.conn, 8))
            mask = _recv_exact(self.conn, 4) if masked else b"\x00" * 4
            payload = _recv_exact(self.conn, length)
            if masked:
                payload = bytes(c ^ mask[i % 4] for i, c in enumerate(payload))
            if opcode == OP_CLOSE:
                try:
                    self._send_control(OP_CLOSE)
                finally:
                    self.open = False
                raise WebSocketClosed("close frame")
            if opcode == OP_PING:
                self._send_control(OP_PONG, payload)
                continue
            if opcode == OP_PONG:
                continue
            fragments.append(payload)
            if fin:
                return b"".join(fragments).decode("utf-8", errors="replace")

    def close(self) -> None:
        if self.open:
            self.open = False
            try:
                self._send_control(OP_CLOSE)
            except OSError:
                pass
        try:
            self.conn.close()
        except OSError:
            pass


class WebSocketServer:
    """Accept loop spawning one handler thread per client."""

    def __init__(self, host: str, port: int, on_client):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(8)
        self._on_client = on_client
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, name="ws-accept", daemon=True)
        self.clients: list[WebSocketConnection] = []
        self._clients_lock = threading.Lock()

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def start(self) -> None:
        self._thread.start()

    def _loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, addr = self._sock.accept()
            except OSError:
                break
            threading.Thread(
                target=self._handle, args=(conn, addr), name=f"ws-{addr}", daemon=True
            ).start()

    def _handle(self, conn: socket.socket, addr) -> None:
        ws = WebSocketConnection(conn, addr)
        try:
            ws.handshake()
        except (WebSocketClosed, OSError) as exc:
            logger.debug("handshake with %s failed: %s", addr, exc)
            conn.close()
            return
        with self._clients_lock:
            self.clients.append(ws)
        logger.info("console connected from %s", addr)
        try:
            self._on_client(ws)
        except (WebSocketClosed, OSError):
            pass
        finally:
            with self._clients_lock:
                if ws in self.clients:
                    self.clients.remove(ws)
            ws.close()
            logger.info("console %s disconnected", addr)

    def broadcast(self, text: str) -> None:
        with self._clients_lock:
            clients = list(self.clients)
        for ws in clients:
            try:
                ws.send_text(text)
            except OSError:
                pass

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        with self._clients_lock:
            for ws in list(self.clients):
                ws.close()
