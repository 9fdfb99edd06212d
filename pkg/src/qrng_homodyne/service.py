"""HTTP endpoint serving extracted random bytes from a bounded buffer.

``GET /random?bytes=N`` (1 <= N <= 4096) returns N fresh bytes, hex
encoded, with a UTC timestamp; ``GET /health`` reports buffer fill and
producer throughput. Served bytes are removed from the buffer, so no
byte is ever returned twice.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import secrets
import threading
import time
from collections import deque
from datetime import datetime, timezone
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from .entropy import choose_m, min_entropy_gaussian
from .optics import detector_variances
from .pipeline import PipelineConfig, PipelineError, extractor_input, quantized_channels
from .sampler import TraceConfig
from .toeplitz import ToeplitzExtractor

log = logging.getLogger(__name__)

MAX_REQUEST = 4096


class ByteBuffer:
    """Bounded FIFO of bytes shared by one producer and many readers."""

    def __init__(self, capacity: int):
        if capacity < MAX_REQUEST:
            raise ValueError(f"capacity must be at least {MAX_REQUEST} bytes")
        self.capacity = capacity
        self._chunks: deque[bytes] = deque()
        self._level = 0
        self._cond = threading.Condition()
        self.served = 0

    @property
    def level(self) -> int:
        with self._cond:
            return self._level

    def put(self, data: bytes, stop: threading.Event | None = None) -> bool:
        """Append ``data``, waiting for room. False if stopped first."""
        view = memoryview(data)
        while view:
            with self._cond:
                while self._level >= self.capacity:
                    if stop is not None and stop.is_set():
                        return False
                    self._cond.wait(0.1)
                room = self.capacity - self._level
                piece = bytes(view[:room])
                self._chunks.append(piece)
                self._level += len(piece)
            view = view[len(piece):]
        return True

    def take(self, n: int) -> bytes | None:
        """Remove and return exactly ``n`` bytes, or None if not enough are buffered."""
        with self._cond:
            if n > self._level:
                return None
            out = bytearray()
            while len(out) < n:
                chunk = self._chunks.popleft()
                need = n - len(out)
                if len(chunk) > need:
                    self._chunks.appendleft(chunk[need:])
                    chunk = chunk[:need]
                out += chunk
            self._level -= n
            self.served += n
            self._cond.notify_all()
            return bytes(out)


class PipelineSource:
    """Endless extracted bytes from simulated detector chunks.

    Chunk ``i`` is sampled with seed ``(base_seed << 32) | i``; the
    Toeplitz matrix is fixed for the life of the source.
    """

    def __init__(self, cfg: PipelineConfig, chunk_samples: int = 60_000, base_seed: int | None = None):
        cfg.validate()
        dv = detector_variances(cfg.lo_power, cfg.detector)
        h_min = min_entropy_gaussian(math.sqrt(dv.sigma_q_sq), cfg.adc.w_bin) if dv.sigma_q_sq > 0 else 0.0
        if cfg.hash.m > choose_m(h_min, cfg.hash.s, cfg.epsilon_target):
            raise PipelineError(f"m = {cfg.hash.m} is not supported by H_min = {h_min:.3f} bits")
        self.cfg = cfg
        self.chunk_samples = chunk_samples
        self.base_seed = secrets.randbits(32) if base_seed is None else base_seed
        self.extractor = ToeplitzExtractor(cfg.hash, cfg.load_seed(), backend=cfg.backend)
        self._index = 0
        self._carry = np.zeros(0, dtype=np.uint8)

    def next_chunk(self) -> bytes:
        cfg = self.cfg
        trace = TraceConfig(
            num_samples=self.chunk_samples,
            sample_rate=cfg.trace.sample_rate,
            rng_seed=(self.base_seed << 32) | self._index,
        )
        self._index += 1
        x, p, _, _ = quantized_channels(dataclasses.replace(cfg, trace=trace))
        bits = self.extractor.feed(extractor_input(x, p, cfg.quadrature_mode, cfg.adc.bits))
        bits = np.concatenate([self._carry, bits])
        whole = (bits.size // 8) * 8
        self._carry = bits[whole:]
        return np.packbits(bits[:whole]).tobytes()


class Producer(threading.Thread):
    def __init__(self, source, buffer: ByteBuffer):
        super().__init__(daemon=True, name="qrng-producer")
        self.source = source
        self.buffer = buffer
        self.stop_event = threading.Event()
        self.produced = 0
        self.started_at = time.monotonic()
        self.error: str | None = None

    def run(self):
        try:
            while not self.stop_event.is_set():
                data = self.source.next_chunk()
                if not self.buffer.put(data, self.stop_event):
                    break
                self.produced += len(data)
        except Exception as exc:
            log.exception("producer stopped")
            self.error = str(exc)

    @property
    def throughput(self) -> float:
        return self.produced / max(time.monotonic() - self.started_at, 1e-9)


def _make_handler(service: "RandomService"):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):
            log.debug("%s - " + fmt, self.address_string(), *args)

        def _send(self, status: int, body: dict):
            payload = json.dumps(body).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def do_GET(self):
            url = urlparse(self.path)
            if url.path == "/health":
                self._send(HTTPStatus.OK, service.health())
            elif url.path == "/random":
                raw = parse_qs(url.query).get("bytes", ["32"])[0]
                try:
                    n = int(raw)
                except ValueError:
                    n = -1
                if not 1 <= n <= MAX_REQUEST:
                    self._send(HTTPStatus.BAD_REQUEST, {"error": f"bytes must be in [1, {MAX_REQUEST}]"})
                    return
                data = service.buffer.take(n)
                if data is None:
                    self._send(HTTPStatus.SERVICE_UNAVAILABLE, {"error": "not enough random bytes buffered"})
                    return
                self._send(
                    HTTPStatus.OK,
                    {
                        "bytes": n,
                        "hex": data.hex(),
                        "timestamp": datetime.now(timezone.utc).isoformat(),
                    },
                )
            else:
                self._send(HTTPStatus.NOT_FOUND, {"error": "not found"})

    return Handler


class RandomService:
    def __init__(self, source, capacity: int = 1 << 20, host: str = "127.0.0.1", port: int = 0):
        self.buffer = ByteBuffer(capacity)
        self.producer = Producer(source, self.buffer)
        self.server = ThreadingHTTPServer((host, port), _make_handler(self))
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True, name="qrng-http")

    @property
    def address(self) -> tuple[str, int]:
        return self.server.server_address[:2]

    def health(self) -> dict:
        level = self.buffer.level
        return {
            "buffer_bytes": level,
            "capacity": self.buffer.capacity,
            "fill": level / self.buffer.capacity,
            "produced_bytes": self.producer.produced,
            "served_bytes": self.buffer.served,
            "throughput_bytes_per_s": self.producer.throughput,
            "producer_alive": self.producer.is_alive(),
            "producer_error": self.producer.error,
        }

    def start(self) -> "RandomService":
        self.producer.start()
        self._thread.start()
        return self

    def stop(self) -> None:
        self.producer.stop_event.set()
        self.server.shutdown()
        self.server.server_close()
        self.producer.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve_random(port: int, cfg: PipelineConfig, capacity: int = 1 << 20, host: str = "127.0.0.1") -> None:
    """Run the service until interrupted."""
    service = RandomService(PipelineSource(cfg), capacity=capacity, host=host, port=port).start()
    log.info("serving random bytes on http://%s:%d", *service.address)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
