"""Online-batch TCP server.

Framing (all integers little-endian):

    magic   4 bytes  b"SG53"
    version u8       1
    type    u8       1 = batch request, 2 = batch response, 255 = error
    length  u32      payload byte count

Request payload is a JSON object; unset fields fall back to the server's
defaults: {"batch_size": int (1..4096), "variant": str, "seed": int,
"start_index": int, "frame_len": int}.

Response payload is a JSON header line — {"count", "frame_len",
"dtype": "f32le-interleaved", "meta_bytes"} — terminated by "\n", then
count*frame_len*8 bytes of interleaved float32 IQ, then meta_bytes bytes
of JSONL metadata.

Example k of a batch is generate_example(start_index+k, (start_index+k)
mod 53, derive_stream(seed, start_index+k)): the response is a pure
function of the request, so identical requests get identical bytes no
matter which client sends them or when. A malformed header draws an
error frame and a close; a well-framed but invalid request draws an
error frame and the connection stays usable.
"""

from __future__ import annotations

import json
import socket
import socketserver
import struct

from sigforge.dataset import (
    DatasetConfig,
    VARIANTS,
    frame_to_bytes,
    generate_example,
    meta_to_line,
)
from sigforge.frame import FRAME_LEN
from sigforge.registry import NUM_CLASSES
from sigforge.rng import derive_stream

MAGIC = b"SG53"
PROTOCOL_VERSION = 1
MSG_REQUEST = 1
MSG_RESPONSE = 2
MSG_ERROR = 255
MAX_BATCH = 4096
_MAX_REQUEST_BYTES = 1 << 20

HEADER = struct.Struct("<4sBBI")


class ProtocolError(Exception):
    """Framing violation; the connection is beyond saving."""


class RequestError(Exception):
    """Bad request content on an intact connection."""


def pack_frame(message_type: int, payload: bytes) -> bytes:
    return HEADER.pack(MAGIC, PROTOCOL_VERSION, message_type, len(payload)) + payload


def recv_exact(sock: socket.socket, count: int) -> bytes:
    chunks = []
    remaining = count
    while remaining:
        chunk = sock.recv(min(remaining, 1 << 16))
        if not chunk:
            raise ConnectionError("peer closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    """Read one (type, payload) frame; raises ProtocolError on bad framing."""
    header = recv_exact(sock, HEADER.size)
    magic, version, message_type, length = HEADER.unpack(header)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported version {version}")
    if length > _MAX_REQUEST_BYTES:
        raise ProtocolError(f"payload of {length} bytes exceeds limit")
    return message_type, recv_exact(sock, length)


def build_batch(request: dict, defaults: "ServerDefaults") -> bytes:
    """Generate the response payload for a validated request dict."""
    batch_size = int(request.get("batch_size", defaults.batch_size))
    variant = request.get("variant", defaults.variant)
    seed = int(request.get("seed", defaults.seed))
    start_index = int(request.get("start_index", 0))
    frame_len = int(request.get("frame_len", defaults.frame_len))
    if not 1 <= batch_size <= MAX_BATCH:
        raise RequestError(f"batch_size must be in [1, {MAX_BATCH}], got {batch_size}")
    if variant not in VARIANTS:
        raise RequestError(f"unknown variant {variant!r}")
    if start_index < 0:
        raise RequestError("start_index must be >= 0")
    if frame_len < 64:
        raise RequestError("frame_len must be >= 64")
    config = DatasetConfig(variant=variant, examples_per_class=1,
                           dataset_seed=seed, frame_len=frame_len)
    iq_parts = []
    meta_parts = []
    for k in range(batch_size):
        index = start_index + k
        frame, meta = generate_example(
            index, index % NUM_CLASSES, derive_stream(seed, index), config)
        iq_parts.append(frame_to_bytes(frame))
        meta_parts.append(meta_to_line(meta))
    meta_blob = b"".join(meta_parts)
    header = json.dumps({
        "count": batch_size,
        "frame_len": frame_len,
        "dtype": "f32le-interleaved",
        "meta_bytes": len(meta_blob),
    }, sort_keys=True, separators=(",", ":")) + "\n"
    return header.encode("utf-8") + b"".join(iq_parts) + meta_blob


class ServerDefaults:
    def __init__(self, variant: str = "impaired-train", seed: int = 0,
                 frame_len: int = FRAME_LEN, batch_size: int = 32):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.seed = seed
        self.frame_len = frame_len
        self.batch_size = batch_size


class _Handler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        sock = self.request
        defaults = self.server.defaults
        while True:
            try:
                message_type, payload = read_frame(sock)
            except ConnectionError:
                return
            except ProtocolError as exc:
                self._send_error(sock, str(exc))
                return
            try:
                if message_type != MSG_REQUEST:
                    raise RequestError(f"unexpected message type {message_type}")
                try:
                    request = json.loads(payload.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    raise RequestError(f"request is not valid JSON: {exc}") from exc
                if not isinstance(request, dict):
                    raise RequestError("request must be a JSON object")
                response = build_batch(request, defaults)
            except RequestError as exc:
                self._send_error(sock, str(exc))
                continue
            try:
                sock.sendall(pack_frame(MSG_RESPONSE, response))
            except OSError:
                return

    @staticmethod
    def _send_error(sock: socket.socket, message: str) -> None:
        payload = json.dumps({"error": message}).encode("utf-8")
        try:
            sock.sendall(pack_frame(MSG_ERROR, payload))
        except OSError:
            pass


class BatchServer(socketserver.ThreadingTCPServer):
    """One thread per connection; a connection handles one batch at a time,
    which bounds buffered memory per client."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], defaults: ServerDefaults | None = None):
        super().__init__(address, _Handler)
        self.defaults = defaults if defaults is not None else ServerDefaults()

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve(host: str, port: int, defaults: ServerDefaults | None = None) -> None:
    """Run until interrupted."""
    with BatchServer((host, port), defaults) as server:
        server.serve_forever()


def request_batch(host: str, port: int, **fields) -> tuple[dict, bytes, bytes]:
    """Client helper: one request, returns (header, iq bytes, meta bytes)."""
    with socket.create_connection((host, port)) as sock:
        sock.sendall(pack_frame(MSG_REQUEST, json.dumps(fields).encode("utf-8")))
        message_type, payload = read_frame(sock)
    if message_type == MSG_ERROR:
        raise RequestError(json.loads(payload.decode("utf-8"))["error"])
    if message_type != MSG_RESPONSE:
        raise ProtocolError(f"unexpected message type {message_type}")
    newline = payload.index(b"\n")
    header = json.loads(payload[:newline].decode("utf-8"))
    body = payload[newline + 1:]
    iq_len = header["count"] * header["frame_len"] * 8
    iq = body[:iq_len]
    meta = body[iq_len:iq_len + header["meta_bytes"]]
    return header, iq, meta
