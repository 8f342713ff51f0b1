"""HTTP client for the fitness-prediction wire protocol.

Requests are JSON over POST. There are no retries by default: under an
offline evaluation budget a silent replay would distort call accounting,
so failures surface as typed errors instead.
"""

from __future__ import annotations

import os

import requests

from ..errors import ProtocolError, RemoteUnavailable, ServerError, UnparseableOutput
from ..prompts import PromptTemplate, TaskMetadata, render_metadata
from ..uncertainty import UncertaintyReport
from .base import SurrogatePrediction
from .mock import DecodeSpec

DEFAULT_TIMEOUT = 30.0
URL_ENV_VAR = "SURROKIT_REMOTE_URL"


def build_request(
    metadata_text: str,
    x,
    gamma: int,
    template: PromptTemplate = PromptTemplate.SMALL,
    decode: DecodeSpec | None = None,
    return_probs: bool = False,
    top_k_probs: int = 5,
) -> dict:
    decode = decode or DecodeSpec()
    return {
        "metadata": metadata_text,
        "x": [float(v) for v in x],
        "gamma": int(gamma),
        "template": PromptTemplate(template).value,
        "decode": {
            "strategy": decode.strategy,
            "width": decode.width,
            "k": decode.k,
            "p": decode.p,
            "t": decode.t,
            "seed": decode.seed,
        },
        "return_probs": bool(return_probs),
        "top_k_probs": int(top_k_probs),
    }


def parse_reply(doc: dict) -> SurrogatePrediction:
    if not isinstance(doc, dict) or "y" not in doc or "raw_text" not in doc:
        raise ProtocolError(f"reply missing required fields: {doc!r}")
    y = doc["y"]
    if not isinstance(y, (int, float)) or isinstance(y, bool):
        raise ProtocolError(f"reply y is not a number: {y!r}")
    tokens = tuple(doc["tokens"]) if doc.get("tokens") is not None else None
    step_probs = None
    if doc.get("step_probs") is not None:
        try:
            step_probs = tuple(
                tuple((cell["token"], float(cell["p"])) for cell in row)
                for row in doc["step_probs"]
            )
        except (KeyError, TypeError) as err:
            raise ProtocolError(f"malformed step_probs: {err}") from None
    uncertainty = None
    if doc.get("uncertainty") is not None:
        u = doc["uncertainty"]
        try:
            uncertainty = UncertaintyReport(
                nll=float(u["nll"]),
                imsp=float(u["imsp"]),
                ent=float(u["ent"]),
                itpm=float(u["itpm"]),
                beam_std=float(u["beam_std"]) if u.get("beam_std") is not None else None,
            )
        except (KeyError, TypeError) as err:
            raise ProtocolError(f"malformed uncertainty report: {err}") from None
    return SurrogatePrediction(
        y=float(y),
        raw_text=doc["raw_text"],
        tokens=tokens,
        step_probs=step_probs,
        uncertainty=uncertainty,
    )


def _raise_for_status(status: int, body: str) -> None:
    if status == 422:
        raise UnparseableOutput(f"server could not parse its own generation: {body}")
    if status >= 500:
        raise ServerError(f"server error {status}: {body}")
    if status >= 400:
        raise ProtocolError(f"request rejected ({status}): {body}")


def _post(url: str, payload: dict, timeout: float) -> dict:
    try:
        resp = requests.post(url, json=payload, timeout=timeout)
    except (requests.ConnectionError, requests.Timeout) as err:
        raise RemoteUnavailable(f"cannot reach {url}: {err}") from None
    _raise_for_status(resp.status_code, resp.text[:200])
    try:
        return resp.json()
    except ValueError:
        raise ProtocolError(f"reply is not JSON: {resp.text[:200]!r}") from None


def remote_predict(endpoint: str, request: dict, timeout: float = DEFAULT_TIMEOUT) -> SurrogatePrediction:
    """One POST /predict round trip against a serving endpoint."""
    return parse_reply(_post(endpoint.rstrip("/") + "/predict", request, timeout))


def remote_predict_batch(endpoint: str, requests_docs, timeout: float = DEFAULT_TIMEOUT):
    """POST /predict_batch; replies come back in request order.

    Items that failed server-side come back as the error dict
    {"error": ..., "status": ...} instead of a prediction.
    """
    doc = _post(endpoint.rstrip("/") + "/predict_batch", {"items": list(requests_docs)}, timeout)
    if "items" not in doc or len(doc["items"]) != len(requests_docs):
        raise ProtocolError("batch reply items missing or wrong length")
    out = []
    for item in doc["items"]:
        if isinstance(item, dict) and "error" in item:
            out.append(item)
        else:
            out.append(parse_reply(item))
    return out


def health(endpoint: str, timeout: float = DEFAULT_TIMEOUT) -> dict:
    try:
        resp = requests.get(endpoint.rstrip("/") + "/health", timeout=timeout)
    except (requests.ConnectionError, requests.Timeout) as err:
        raise RemoteUnavailable(f"cannot reach {endpoint}: {err}") from None
    _raise_for_status(resp.status_code, resp.text[:200])
    return resp.json()


class RemoteSurrogate:
    """Surrogate facade over a serving endpoint."""

    def __init__(
        self,
        endpoint: str | None = None,
        gamma: int = 15,
        template: PromptTemplate = PromptTemplate.SMALL,
        decode: DecodeSpec | None = None,
        return_probs: bool = False,
        top_k_probs: int = 5,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        endpoint = endpoint or os.environ.get(URL_ENV_VAR)
        if not endpoint:
            raise RemoteUnavailable(
                f"no endpoint given and {URL_ENV_VAR} is not set"
            )
        self.endpoint = endpoint
        self.gamma = gamma
        self.template = PromptTemplate(template)
        self.decode = decode or DecodeSpec()
        self.return_probs = return_probs
        self.top_k_probs = top_k_probs
        self.timeout = timeout

    def _request(self, meta: TaskMetadata, x) -> dict:
        return build_request(
            render_metadata(meta, self.template),
            x,
            self.gamma,
            self.template,
            self.decode,
            self.return_probs,
            self.top_k_probs,
        )

    def predict(self, meta: TaskMetadata, x) -> SurrogatePrediction:
        return remote_predict(self.endpoint, self._request(meta, x), self.timeout)

    def predict_batch(self, meta: TaskMetadata, xs) -> list[SurrogatePrediction]:
        docs = [self._request(meta, x) for x in xs]
        out = remote_predict_batch(self.endpoint, docs, self.timeout)
        for item in out:
            if isinstance(item, dict):
                raise UnparseableOutput(f"batch item failed: {item}")
        return out
