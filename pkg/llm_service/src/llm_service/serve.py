"""HTTP serving of a trained checkpoint over the shared wire protocol.

POST /predict, POST /predict_batch (order preserving), GET /health.
Status codes: 400 malformed request, 422 unparseable generation, 503
before the model is loaded. Requests are handled one at a time behind a
lock: the model is read-only but not reentrant-safe under torch threads.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .decode import DecodeRequest, run_decode, uncertainty_from_steps
from .modeling import load_checkpoint
from .numeric import UnparseableOutput, encode_vector, parse_fitness
from .tokenizer import WordTokenizer


class ModelRunner:
    """Owns the checkpoint and turns wire requests into replies."""

    def __init__(self, checkpoint_dir: str | Path | None = None, name: str = "llm-service"):
        self.name = name
        self.model = None
        self.tokenizer: WordTokenizer | None = None
        self._lock = threading.Lock()
        if checkpoint_dir is not None:
            self.load(checkpoint_dir)

    def load(self, checkpoint_dir: str | Path) -> None:
        self.model, self.tokenizer = load_checkpoint(checkpoint_dir)
        self.name = Path(checkpoint_dir).name or self.name

    @property
    def ready(self) -> bool:
        return self.model is not None

    def _exponent_range(self) -> tuple[int, int]:
        ks = []
        for tok in self.tokenizer.entries:
            if tok.startswith("<10^") and tok.endswith(">"):
                try:
                    ks.append(int(tok[4:-1]))
                except ValueError:
                    continue
        return (min(ks), max(ks)) if ks else (-12, 12)

    def answer(self, doc: dict) -> dict:
        metadata = doc["metadata"]
        x = [float(v) for v in doc["x"]]
        gamma = int(doc.get("gamma", 15))
        k_min, k_max = self._exponent_range()
        input_text = metadata + "; x=" + encode_vector(x, gamma, k_min, k_max)
        input_ids = self.tokenizer.encode(input_text, add_eos=True)

        d = doc.get("decode") or {}
        req = DecodeRequest(
            strategy=d.get("strategy", "greedy"),
            width=int(d.get("width", 3)),
            k=int(d.get("k", 5)),
            p=float(d.get("p", 0.9)),
            t=float(d.get("t", 1.0)),
            seed=int(d.get("seed", 0)),
        )
        with self._lock:
            ids, dists, beam_values = run_decode(self.model, self.tokenizer, input_ids, req)

        content = [(i, dist) for i, dist in zip(ids, dists) if i != self.tokenizer.eos_id]
        raw_text = self.tokenizer.decode([i for i, _ in content])
        y = parse_fitness(raw_text)  # UnparseableOutput -> 422 upstream

        reply = {"y": y, "raw_text": raw_text,
                 "tokens": [self.tokenizer.token_of(i) for i, _ in content]}
        if content:
            reply["uncertainty"] = uncertainty_from_steps(
                [d_ for _, d_ in content], [i for i, _ in content], beam_values
            )
        if doc.get("return_probs"):
            top_k = max(1, int(doc.get("top_k_probs", 5)))
            rows = []
            for _, dist in content:
                keep = np.argsort(-dist, kind="stable")[:top_k]
                mass = float(dist[keep].sum())
                rows.append(
                    [{"token": self.tokenizer.token_of(int(i)), "p": float(dist[i]) / mass}
                     for i in keep]
                )
            reply["step_probs"] = rows
        return reply


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _send(self, status: int, doc: dict) -> None:
        body = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path.rstrip("/") == "/health":
            runner = self.server.runner
            if not runner.ready:
                self._send(503, {"status": "loading", "model": runner.name})
            else:
                self._send(200, {"status": "ok", "model": runner.name})
        else:
            self._send(404, {"error": "not found"})

    def _one(self, doc) -> tuple[int, dict]:
        runner = self.server.runner
        if not runner.ready:
            return 503, {"error": "model not loaded", "status": 503}
        if not isinstance(doc, dict) or "metadata" not in doc or "x" not in doc:
            return 400, {"error": "request needs 'metadata' and 'x'", "status": 400}
        try:
            return 200, runner.answer(doc)
        except UnparseableOutput as err:
            return 422, {"error": str(err), "status": 422}
        except (ValueError, TypeError, KeyError) as err:
            return 400, {"error": str(err), "status": 400}

    def do_POST(self):
        try:
            length = int(self.headers.get("Content-Length", 0))
            doc = json.loads(self.rfile.read(length))
        except (ValueError, UnicodeDecodeError):
            self._send(400, {"error": "body is not valid JSON", "status": 400})
            return
        path = self.path.rstrip("/")
        if path == "/predict":
            status, reply = self._one(doc)
            self._send(status, reply)
        elif path == "/predict_batch":
            items = doc.get("items")
            if not isinstance(items, list):
                self._send(400, {"error": "batch body needs 'items'", "status": 400})
                return
            self._send(200, {"items": [self._one(item)[1] for item in items]})
        else:
            self._send(404, {"error": "not found", "status": 404})


class Server:
    def __init__(self, runner: ModelRunner, port: int = 0, host: str = "127.0.0.1"):
        self._httpd = ThreadingHTTPServer((host, port), _Handler)
        self._httpd.runner = runner
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "Server":
        if not self._thread.is_alive():
            self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "Server":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(checkpoint_dir: str | Path, port: int = 8035) -> Server:
    return Server(ModelRunner(checkpoint_dir), port=port).start()
