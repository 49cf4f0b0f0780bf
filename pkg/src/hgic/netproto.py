"""Two-way UDP command/telemetry wire format.

One UTF-8 JSON message per datagram, at most 1400 bytes. Oversized
telemetry snapshots are chunked across datagrams (part/parts fields in the
payload, UAV list split); everything else must fit one datagram. Decoding
is strict: unknown versions or kinds, malformed JSON, and structurally
invalid payloads are rejected with a reason, never an exception.
"""

from __future__ import annotations

import json
import time
from collections import OrderedDict, deque
from dataclasses import dataclass, field
from enum import Enum

MAX_DATAGRAM = 1400
PROTOCOL_VERSION = 1
DEDUPE_WINDOW = 256

DEFAULT_COMMAND_PORT = 47801
DEFAULT_TELEMETRY_PORT = 47802
DEFAULT_KEYPOINTS_PORT = 47803
DEFAULT_BRIDGE_PORT = 47810


class Kind(str, Enum):
    COMMAND = "command"
    TELEMETRY = "telemetry"
    KEYPOINTS = "keypoints"
    ACK = "ack"
    ECHO = "echo"


class ProtocolError(ValueError):
    pass


@dataclass
class WireMessage:
    kind: Kind
    seq: int
    payload: dict
    ts_ms: int = 0
    version: int = PROTOCOL_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "kind": self.kind.value,
            "seq": self.seq,
            "ts_ms": self.ts_ms,
            "payload": self.payload,
        }


@dataclass
class DecodeResult:
    message: WireMessage | None = None
    error: str | None = None
    duplicate: bool = False

    @property
    def ok(self) -> bool:
        return self.message is not None


def now_ms() -> int:
    return int(time.time() * 1000)


def _dumps(obj: dict) -> bytes:
    # sort_keys + compact separators: encoding is byte-deterministic.
    return json.dumps(obj, separators=(",", ":"), sort_keys=True, allow_nan=False).encode()


def encode(msg: WireMessage) -> list[bytes]:
    """Encode a message into one or more datagrams.

    Raises:
        ProtocolError: message over 1400 bytes and not chunkable.
    """
    try:
        data = _dumps(msg.to_dict())
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"unencodable message: {exc}") from exc
    if len(data) <= MAX_DATAGRAM:
        return [data]
    if msg.kind is not Kind.TELEMETRY or "uavs" not in msg.payload:
        raise ProtocolError(f"{msg.kind.value} message of {len(data)} bytes cannot be chunked")
    uavs = msg.payload["uavs"]
    per = max(len(uavs), 1)
    while per >= 1:
        slices = [uavs[i : i + per] for i in range(0, len(uavs), per)] or [[]]
        datagrams = []
        for i, part in enumerate(slices):
            payload = dict(msg.payload, uavs=part, part=i, parts=len(slices))
            doc = dict(msg.to_dict(), payload=payload)
            datagrams.append(_dumps(doc))
        if all(len(d) <= MAX_DATAGRAM for d in datagrams):
            return datagrams
        if per == 1:
            break
        per //= 2
    raise ProtocolError("telemetry entries too large to fit a datagram even one per part")


_MODES = {"navigation", "formation", "task", "configuration", "safety"}
_VERBS = {
    "move_dir", "set_formation", "scale_formation", "start_search", "start_track",
    "start_coverage", "set_group_count", "set_param", "split", "merge", "hold",
    "land", "emergency_stop", "switch_mode",
}


def _is_vec3(v) -> bool:
    return (
        isinstance(v, list)
        and len(v) == 3
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    )


def _validate_payload(kind: Kind, p: dict) -> str | None:
    if kind is Kind.COMMAND:
        if p.get("verb") not in _VERBS:
            return f"unknown verb {p.get('verb')!r}"
        if p.get("mode") not in _MODES:
            return f"unknown mode {p.get('mode')!r}"
        if p.get("scope") not in ("local", "global"):
            return f"unknown scope {p.get('scope')!r}"
        if not isinstance(p.get("args", {}), dict):
            return "args must be an object"
    elif kind is Kind.KEYPOINTS:
        pts = p.get("points")
        if not isinstance(pts, list) or len(pts) != 21:
            return "keypoints payload needs exactly 21 points"
        for pt in pts:
            if not (isinstance(pt, list) and len(pt) == 2
                    and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pt)):
                return "each keypoint must be an [x, y] pair"
        if not isinstance(p.get("frame_index"), int) or p["frame_index"] < 0:
            return "frame_index must be a non-negative integer"
        conf = p.get("confidence")
        if not isinstance(conf, (int, float)) or isinstance(conf, bool) or not 0 <= conf <= 1:
            return "confidence must lie in [0, 1]"
    elif kind is Kind.TELEMETRY:
        for name in ("tick", "size", "collisions"):
            if not isinstance(p.get(name), int) or p[name] < 0:
                return f"telemetry field {name} must be a non-negative integer"
        if p.get("mode") not in _MODES:
            return f"unknown mode {p.get('mode')!r}"
        uavs = p.get("uavs")
        if not isinstance(uavs, list):
            return "telemetry needs a uavs list"
        for u in uavs:
            if not isinstance(u, dict) or not isinstance(u.get("id"), int):
                return "uav entries need an integer id"
            if not _is_vec3(u.get("p")) or not _is_vec3(u.get("v")):
                return "uav entries need 3-vector p and v"
        if "parts" in p:
            if not isinstance(p["parts"], int) or not isinstance(p.get("part"), int):
                return "part/parts must be integers"
            if not 0 <= p["part"] < p["parts"]:
                return "part index out of range"
    elif kind is Kind.ACK:
        if not isinstance(p.get("ack_seq"), int):
            return "ack needs an integer ack_seq"
    elif kind is Kind.ECHO:
        if p.get("status") not in ("accepted", "rejected", "duplicate"):
            return f"unknown echo status {p.get('status')!r}"
        if not isinstance(p.get("seq"), int) or not isinstance(p.get("verb"), str):
            return "echo needs integer seq and string verb"
    return None


class DedupeWindow:
    """Remembers the last-seen seqs of one sender stream; flags replays."""

    def __init__(self, size: int = DEDUPE_WINDOW):
        self._size = size
        self._seen: OrderedDict[int, None] = OrderedDict()

    def seen(self, seq: int) -> bool:
        if seq in self._seen:
            return True
        self._seen[seq] = None
        while len(self._seen) > self._size:
            self._seen.popitem(last=False)
        return False


def decode(data: bytes, window: DedupeWindow | None = None) -> DecodeResult:
    """Parse and validate one datagram; never raises on bad input."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        return DecodeResult(error=f"malformed JSON: {exc}")
    if not isinstance(doc, dict):
        return DecodeResult(error="datagram is not a JSON object")
    if doc.get("version") != PROTOCOL_VERSION:
        return DecodeResult(error=f"unsupported version {doc.get('version')!r}")
    try:
        kind = Kind(doc.get("kind"))
    except ValueError:
        return DecodeResult(error=f"unknown kind {doc.get('kind')!r}")
    seq = doc.get("seq")
    ts = doc.get("ts_ms")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        return DecodeResult(error="seq must be a non-negative integer")
    if not isinstance(ts, int) or isinstance(ts, bool) or ts < 0:
        return DecodeResult(error="ts_ms must be a non-negative integer")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        return DecodeResult(error="payload must be an object")
    problem = _validate_payload(kind, payload)
    if problem:
        return DecodeResult(error=problem)
    msg = WireMessage(kind=kind, seq=seq, payload=payload, ts_ms=ts)
    dup = window.seen(seq) if window is not None else False
    return DecodeResult(message=msg, duplicate=dup)


class Reassembler:
    """Collects chunked telemetry parts until a snapshot completes."""

    def __init__(self, max_pending: int = 8):
        self._pending: OrderedDict[int, dict[int, WireMessage]] = OrderedDict()
        self._max_pending = max_pending

    def add(self, msg: WireMessage) -> WireMessage | None:
        payload = msg.payload
        if "parts" not in payload:
            return msg
        parts = payload["parts"]
        bucket = self._pending.setdefault(msg.seq, {})
        bucket[payload["part"]] = msg
        while len(self._pending) > self._max_pending:
            self._pending.popitem(last=False)
        if len(bucket) < parts:
            return None
        self._pending.pop(msg.seq, None)
        uavs: list = []
        for i in range(parts):
            uavs.extend(bucket[i].payload["uavs"])
        merged = dict(bucket[0].payload, uavs=uavs)
        merged.pop("part", None)
        merged.pop("parts", None)
        return WireMessage(kind=msg.kind, seq=msg.seq, payload=merged, ts_ms=msg.ts_ms)


def telemetry_snapshot(world, controller_state, seq: int, gesture_stats: dict | None = None,
                       ts_ms: int | None = None) -> WireMessage:
    """Stateless snapshot of the swarm for the operator station."""
    formation = None
    for gid in sorted(controller_state.transitions):
        formation = controller_state.transitions[gid].spec.kind.value
        break
    echo = controller_state.last_echo.to_dict() if controller_state.last_echo else None
    payload = {
        "tick": world.tick,
        "t": world.tick * world.dt,
        "size": len(world.uavs),
        "mode": controller_state.current_mode.value,
        "formation": formation,
        "collisions": world.metrics.collision_count,
        "uavs": [
            {
                "id": u.id,
                "p": [float(x) for x in u.position],
                "v": [float(x) for x in u.velocity],
                "g": u.group_id,
            }
            for u in world.uavs
        ],
        "echo": echo,
        "gesture": gesture_stats,
    }
    return WireMessage(kind=Kind.TELEMETRY, seq=seq, payload=payload,
                       ts_ms=now_ms() if ts_ms is None else ts_ms)
