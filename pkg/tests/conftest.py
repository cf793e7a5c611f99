import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from exprscore.audio import AudioClip, save_wav

SR = 16000


def tone(freq=220.0, duration=2.0, amplitude=0.5, sr=SR, source_id="tone"):
    t = np.arange(int(duration * sr)) / sr
    return AudioClip(amplitude * np.sin(2 * np.pi * freq * t), sr, source_id)


def silence(duration=1.0, sr=SR):
    return AudioClip(np.zeros(int(duration * sr)), sr, "silence")


def tone_gap_tone(gap_s=0.6, tone_s=1.0, freq=220.0, amplitude=0.8, sr=SR):
    t = np.arange(int(tone_s * sr)) / sr
    part = amplitude * np.sin(2 * np.pi * freq * t)
    samples = np.concatenate([part, np.zeros(int(gap_s * sr)), part])
    return AudioClip(samples, sr, "tone-gap-tone")


@pytest.fixture
def wav_file(tmp_path):
    def write(clip, name="clip.wav"):
        path = tmp_path / name
        save_wav(clip, path)
        return path

    return write


class MockEndpoint:
    """Tiny HTTP server whose responses are driven by a callable."""

    def __init__(self, respond):
        self.respond = respond  # (handler) -> (status, content_type, body_bytes)
        self.requests = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _handle(self):
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length) if length else b""
                outer.requests.append(
                    {"path": self.path, "body": body, "headers": dict(self.headers)}
                )
                status, ctype, payload = outer.respond(self, body)
                self.send_response(status)
                self.send_header("Content-Type", ctype)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            do_POST = _handle
            do_GET = _handle

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}/"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def mock_endpoint():
    created = []

    def factory(respond):
        ep = MockEndpoint(respond)
        created.append(ep)
        return ep

    yield factory
    for ep in created:
        ep.close()


def json_response(payload, status=200):
    return status, "application/json", json.dumps(payload).encode()
