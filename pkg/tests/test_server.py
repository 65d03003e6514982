"""Wire protocol framing, request handling, and statelessness."""

import json
import socket
import struct
import threading

import numpy as np
import pytest

from sigforge.dataset import (
    DatasetConfig,
    bytes_to_frames,
    frame_to_bytes,
    generate_example,
)
from sigforge.registry import NUM_CLASSES
from sigforge.rng import derive_stream
from sigforge.server import (
    HEADER,
    MAGIC,
    MAX_BATCH,
    MSG_ERROR,
    MSG_REQUEST,
    MSG_RESPONSE,
    PROTOCOL_VERSION,
    BatchServer,
    RequestError,
    ServerDefaults,
    build_batch,
    pack_frame,
    read_frame,
    request_batch,
)


@pytest.fixture
def server():
    srv = BatchServer(("127.0.0.1", 0))
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def test_header_layout():
    frame = pack_frame(MSG_REQUEST, b"{}")
    assert frame[:4] == b"SG53"
    assert frame[4] == 1
    assert frame[5] == 1
    assert struct.unpack("<I", frame[6:10])[0] == 2
    assert HEADER.size == 10
    assert MAGIC == b"SG53" and PROTOCOL_VERSION == 1


def test_round_trip_matches_direct_generation(server):
    header, iq, meta = request_batch(
        "127.0.0.1", server.port,
        batch_size=4, variant="impaired-train", seed=9, frame_len=256)
    assert header == {"count": 4, "frame_len": 256,
                      "dtype": "f32le-interleaved", "meta_bytes": len(meta)}
    frames = bytes_to_frames(iq, 256)
    assert frames.shape == (4, 256)
    config = DatasetConfig(variant="impaired-train", examples_per_class=1,
                           dataset_seed=9, frame_len=256)
    for k in range(4):
        want_frame, want_meta = generate_example(
            k, k % NUM_CLASSES, derive_stream(9, k), config)
        assert frame_to_bytes(want_frame) == iq[k * 256 * 8:(k + 1) * 256 * 8]
        got_meta = json.loads(meta.splitlines()[k])
        assert got_meta == json.loads(json.dumps(want_meta))


def test_start_index_offsets_the_stream(server):
    _, iq_a, _ = request_batch("127.0.0.1", server.port, batch_size=2,
                               variant="clean-train", seed=3,
                               start_index=7, frame_len=128)
    _, iq_b, _ = request_batch("127.0.0.1", server.port, batch_size=1,
                               variant="clean-train", seed=3,
                               start_index=8, frame_len=128)
    assert iq_a[128 * 8:] == iq_b  # example 8 is example 8, however asked


def test_identical_requests_get_identical_bytes(server):
    kwargs = dict(batch_size=3, variant="impaired-val", seed=5, frame_len=192)
    a = request_batch("127.0.0.1", server.port, **kwargs)
    b = request_batch("127.0.0.1", server.port, **kwargs)
    assert a == b


def test_three_concurrent_clients_agree(server):
    kwargs = dict(batch_size=6, variant="impaired-train", seed=11, frame_len=256)
    results = [None] * 3

    def worker(i):
        results[i] = request_batch("127.0.0.1", server.port, **kwargs)

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=30)
    assert results[0] is not None
    assert results[0] == results[1] == results[2]


def test_defaults_fill_unset_fields(server):
    header, iq, meta = request_batch("127.0.0.1", server.port, batch_size=1,
                                     frame_len=64)
    # defaults: impaired-train, seed 0
    config = DatasetConfig(variant="impaired-train", examples_per_class=1,
                           dataset_seed=0, frame_len=64)
    want, _ = generate_example(0, 0, derive_stream(0, 0), config)
    assert iq == frame_to_bytes(want)
    assert header["count"] == 1


def test_bad_request_keeps_connection_alive(server):
    with socket.create_connection(("127.0.0.1", server.port)) as sock:
        sock.sendall(pack_frame(MSG_REQUEST,
                                json.dumps({"batch_size": 0}).encode()))
        message_type, payload = read_frame(sock)
        assert message_type == MSG_ERROR
        assert "batch_size" in json.loads(payload)["error"]
        # same connection, valid request
        sock.sendall(pack_frame(MSG_REQUEST,
                                json.dumps({"batch_size": 1, "frame_len": 64}).encode()))
        message_type, payload = read_frame(sock)
        assert message_type == MSG_RESPONSE


@pytest.mark.parametrize("request_blob", [
    b"not json at all",
    b"[1,2,3]",
    json.dumps({"variant": "p25"}).encode(),
    json.dumps({"batch_size": 5000}).encode(),
    json.dumps({"start_index": -1}).encode(),
    json.dumps({"frame_len": 32}).encode(),
])
def test_invalid_requests_draw_errors(server, request_blob):
    with socket.create_connection(("127.0.0.1", server.port)) as sock:
        sock.sendall(pack_frame(MSG_REQUEST, request_blob))
        message_type, _ = read_frame(sock)
        assert message_type == MSG_ERROR


def test_bad_magic_closes_connection(server):
    with socket.create_connection(("127.0.0.1", server.port)) as sock:
        sock.sendall(b"XX53" + bytes([1, 1]) + struct.pack("<I", 0))
        message_type, _ = read_frame(sock)
        assert message_type == MSG_ERROR
        # server hangs up after a framing violation
        assert sock.recv(1) == b""


def test_wrong_version_rejected(server):
    with socket.create_connection(("127.0.0.1", server.port)) as sock:
        sock.sendall(MAGIC + bytes([9, MSG_REQUEST]) + struct.pack("<I", 0))
        message_type, _ = read_frame(sock)
        assert message_type == MSG_ERROR


def test_unexpected_message_type_is_request_error(server):
    with socket.create_connection(("127.0.0.1", server.port)) as sock:
        sock.sendall(pack_frame(MSG_RESPONSE, b"{}"))
        message_type, _ = read_frame(sock)
        assert message_type == MSG_ERROR
        sock.sendall(pack_frame(MSG_REQUEST,
                                json.dumps({"batch_size": 1, "frame_len": 64}).encode()))
        message_type, _ = read_frame(sock)
        assert message_type == MSG_RESPONSE  # still alive


def test_build_batch_validation():
    defaults = ServerDefaults()
    with pytest.raises(RequestError):
        build_batch({"batch_size": MAX_BATCH + 1}, defaults)
    with pytest.raises(RequestError):
        build_batch({"variant": "dirty"}, defaults)
    with pytest.raises(RequestError):
        build_batch({"frame_len": 8}, defaults)
    with pytest.raises(RequestError):
        build_batch({"start_index": -3}, defaults)


def test_server_defaults_validation():
    with pytest.raises(ValueError):
        ServerDefaults(variant="raw")


def test_request_batch_raises_on_error(server):
    with pytest.raises(RequestError):
        request_batch("127.0.0.1", server.port, variant="bogus")


def test_batch_crosses_class_wraparound(server):
    """Indices 52 and 53 map to the last and first class respectively."""
    _, iq, meta = request_batch("127.0.0.1", server.port, batch_size=2,
                                variant="clean-train", seed=1,
                                start_index=52, frame_len=64)
    lines = [json.loads(line) for line in meta.splitlines()]
    assert lines[0]["class_index"] == 52
    assert lines[1]["class_index"] == 0
    assert np.all(np.isfinite(bytes_to_frames(iq, 64)))
