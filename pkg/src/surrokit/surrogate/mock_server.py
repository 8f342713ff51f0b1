"""Threaded HTTP wrapper around the in-process mock model.

Implements the wire protocol so optimizer runs and uncertainty studies can
be tested hermetically with no model checkpoint: POST /predict,
POST /predict_batch (order preserving) and GET /health. Malformed requests
get 400, unknown task metadata 404, unparseable generations 422.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import DimMismatch, PortInUse, UnparseableOutput
from .mock import DecodeSpec, MockMetaModel


def _prediction_to_wire(pred) -> dict:
    doc = {"y": pred.y, "raw_text": pred.raw_text}
    if pred.tokens is not None:
        doc["tokens"] = list(pred.tokens)
    if pred.step_probs is not None:
        doc["step_probs"] = [
            [{"token": tok, "p": p} for tok, p in row] for row in pred.step_probs
        ]
    if pred.uncertainty is not None:
        doc["uncertainty"] = pred.uncertainty.as_dict()
    return doc


class _Handler(BaseHTTPRequestHandler):
    model: MockMetaModel = None  # set on the server class

    def log_message(self, *args):  # quiet test output
        pass

    def _send(self, status: int, doc: dict) -> None:
        body = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path.rstrip("/") == "/health" or self.path == "/health":
            self._send(200, {"status": "ok", "model": self.server.model.model_name})
        else:
            self._send(404, {"error": "not found"})

    def _read_json(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        return json.loads(raw)

    def _predict_one(self, doc: dict) -> tuple[int, dict]:
        if not isinstance(doc, dict) or "metadata" not in doc or "x" not in doc:
            return 400, {"error": "request needs 'metadata' and 'x'", "status": 400}
        model = self.server.model
        if model.lookup(doc["metadata"]) is None:
            return 404, {"error": "unknown task metadata", "status": 404}
        try:
            pred = model.answer(
                doc["metadata"],
                doc["x"],
                decode=DecodeSpec.from_wire(doc.get("decode")),
                return_probs=bool(doc.get("return_probs", False)),
                top_k_probs=int(doc.get("top_k_probs", 5)),
                gamma=doc.get("gamma"),
            )
        except UnparseableOutput as err:
            return 422, {"error": str(err), "status": 422}
        except (DimMismatch, ValueError, TypeError) as err:
            return 400, {"error": str(err), "status": 400}
        return 200, _prediction_to_wire(pred)

    def do_POST(self):
        try:
            doc = self._read_json()
        except (ValueError, UnicodeDecodeError):
            self._send(400, {"error": "body is not valid JSON", "status": 400})
            return
        path = self.path.rstrip("/")
        if path == "/predict":
            status, reply = self._predict_one(doc)
            self._send(status, reply)
        elif path == "/predict_batch":
            items = doc.get("items")
            if not isinstance(items, list):
                self._send(400, {"error": "batch body needs 'items'", "status": 400})
                return
            replies = [self._predict_one(item)[1] for item in items]
            self._send(200, {"items": replies})
        else:
            self._send(404, {"error": "not found", "status": 404})


class MockServer:
    """Owns the HTTP server thread; use as a context manager in tests."""

    def __init__(self, model: MockMetaModel, port: int = 0, host: str = "127.0.0.1"):
        try:
            self._httpd = ThreadingHTTPServer((host, port), _Handler)
        except OSError as err:
            raise PortInUse(f"cannot bind {host}:{port}: {err}") from None
        self._httpd.model = model
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MockServer":
        if not self._thread.is_alive():
            self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "MockServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def mock_serve(tasks, noise_sigma_rel: float = 0.0, port: int = 0, seed: int = 0,
               codec=None) -> MockServer:
    """Start a mock server for a task set; returns the running server."""
    model = MockMetaModel(tasks, noise_sigma_rel=noise_sigma_rel, codec=codec, seed=seed)
    return MockServer(model, port=port).start()
