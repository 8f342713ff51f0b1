"""Step-wise decoding over the model: greedy, beam, top-k, top-p, temperature.

All strategies draw from full next-token distributions so the server can
report per-step probabilities and sequence-level uncertainty. Ties break
deterministically (lowest token id; lexicographic among equal beam scores).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

from .numeric import UnparseableOutput, parse_fitness
from .tokenizer import WordTokenizer


@dataclass(frozen=True)
class DecodeRequest:
    strategy: str = "greedy"
    width: int = 3
    k: int = 5
    p: float = 0.9
    t: float = 1.0
    seed: int = 0
    max_len: int = 50


class StepScorer:
    """Next-token distributions for one encoded input, encoder precomputed."""

    def __init__(self, model, tokenizer: WordTokenizer, input_ids: list[int]):
        self.model = model
        self.tokenizer = tokenizer
        ids = torch.tensor([input_ids], dtype=torch.long)
        with torch.no_grad():
            self.encoder_outputs = model.get_encoder()(input_ids=ids)
        self.attention = torch.ones_like(ids)
        self.start_id = model.config.decoder_start_token_id

    def probs(self, prefix: tuple[int, ...]) -> np.ndarray:
        decoder_ids = torch.tensor([[self.start_id, *prefix]], dtype=torch.long)
        with torch.no_grad():
            out = self.model(
                encoder_outputs=self.encoder_outputs,
                attention_mask=self.attention,
                decoder_input_ids=decoder_ids,
            )
        return torch.softmax(out.logits[0, -1], dim=-1).numpy()


def _greedy(scorer: StepScorer, max_len: int, end_id: int):
    ids, dists = [], []
    for _ in range(max_len):
        probs = scorer.probs(tuple(ids))
        tok = int(np.argmax(probs))
        dists.append(probs)
        ids.append(tok)
        if tok == end_id:
            break
    return ids, dists


def _beam(scorer: StepScorer, width: int, max_len: int, end_id: int):
    live = [(0.0, ())]
    done = []
    for _ in range(max_len):
        if not live:
            break
        candidates = []
        for score, prefix in live:
            probs = scorer.probs(prefix)
            top = np.argsort(-probs, kind="stable")[: max(2 * width, width)]
            for tok in top:
                p = float(probs[tok])
                if p <= 0.0:
                    continue
                candidates.append((score + math.log(p), prefix + (int(tok),)))
        candidates.sort(key=lambda c: (-c[0], c[1]))
        candidates = candidates[:width]
        live = []
        for score, seq in candidates:
            (done if seq[-1] == end_id else live).append((score, seq))
    done.extend(live)
    done.sort(key=lambda c: (-c[0], c[1]))
    return [list(seq) for _, seq in done[:width]]


def _truncate(probs: np.ndarray, req: DecodeRequest) -> np.ndarray:
    if req.strategy == "top_k":
        keep = np.argsort(-probs, kind="stable")[: max(1, min(req.k, probs.size))]
        out = np.zeros_like(probs)
        out[keep] = probs[keep]
    elif req.strategy == "top_p":
        order = np.argsort(-probs, kind="stable")
        cutoff = int(np.searchsorted(np.cumsum(probs[order]), req.p)) + 1
        out = np.zeros_like(probs)
        out[order[:cutoff]] = probs[order[:cutoff]]
    else:  # temperature
        with np.errstate(divide="ignore"):
            logits = np.where(probs > 0, np.log(probs), -np.inf) / req.t
        logits -= logits.max()
        out = np.exp(logits)
        out[probs == 0] = 0.0
    return out / out.sum()


def _sample(scorer: StepScorer, req: DecodeRequest, max_len: int, end_id: int):
    if req.strategy == "temperature" and req.t == 0.0:
        return _greedy(scorer, max_len, end_id)
    rng = np.random.default_rng(req.seed)
    ids, dists = [], []
    for _ in range(max_len):
        probs = scorer.probs(tuple(ids))
        dists.append(probs)
        tok = int(rng.choice(probs.size, p=_truncate(probs, req)))
        ids.append(tok)
        if tok == end_id:
            break
    return ids, dists


def run_decode(model, tokenizer: WordTokenizer, input_ids: list[int], req: DecodeRequest):
    """Returns (generated ids, per-step full dists, beam float values or None)."""
    scorer = StepScorer(model, tokenizer, input_ids)
    end_id = tokenizer.eos_id
    beam_values = None
    if req.strategy == "greedy":
        ids, dists = _greedy(scorer, req.max_len, end_id)
    elif req.strategy == "beam":
        hyps = _beam(scorer, req.width, req.max_len, end_id)
        ids = hyps[0]
        dists = [scorer.probs(tuple(ids[:t])) for t in range(len(ids))]
        beam_values = []
        for seq in hyps[:3]:
            try:
                beam_values.append(parse_fitness(tokenizer.decode(seq)))
            except UnparseableOutput:
                continue
    elif req.strategy in ("top_k", "top_p", "temperature"):
        ids, dists = _sample(scorer, req, req.max_len, end_id)
    else:
        raise ValueError(f"unknown strategy {req.strategy!r}")
    return ids, dists, beam_values


def uncertainty_from_steps(dists, ids, beam_values=None) -> dict:
    """nll / imsp / ent / itpm averaged over the generated steps."""
    steps = list(zip(dists, ids))
    if not steps:
        raise ValueError("need at least one generated step")
    n = len(steps)
    nll = imsp = ent = itpm = 0.0
    for dist, tok in steps:
        p = float(dist[tok])
        nll += -math.log(max(p, 1e-300))
        top2 = np.partition(dist, -2)[-2:]
        imsp += float(top2[1])
        itpm += float(top2[1] - top2[0])
        nz = dist[dist > 0]
        ent += float(-(nz * np.log(nz)).sum())
    out = {
        "nll": nll / n,
        "imsp": 1.0 - imsp / n,
        "ent": ent / n,
        "itpm": 1.0 - itpm / n,
    }
    if beam_values is not None:
        finite = [v for v in beam_values if math.isfinite(v)]
        if len(finite) >= 2:
            out["beam_std"] = float(np.std(finite))
    return out


def greedy_decode_batch(model, tokenizer: WordTokenizer, inputs: list[list[int]],
                        max_len: int = 50) -> list[list[int]]:
    """Batched greedy decoding used by training-time evaluation."""
    pad = tokenizer.pad_id
    width = max(len(r) for r in inputs)
    input_ids = torch.full((len(inputs), width), pad, dtype=torch.long)
    for i, row in enumerate(inputs):
        input_ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
    attention = (input_ids != pad).long()
    with torch.no_grad():
        encoder_outputs = model.get_encoder()(input_ids=input_ids, attention_mask=attention)
        decoder = torch.full((len(inputs), 1), model.config.decoder_start_token_id, dtype=torch.long)
        finished = torch.zeros(len(inputs), dtype=torch.bool)
        for _ in range(max_len):
            out = model(
                encoder_outputs=encoder_outputs,
                attention_mask=attention,
                decoder_input_ids=decoder,
            )
            nxt = out.logits[:, -1].argmax(dim=-1)
            nxt[finished] = pad
            decoder = torch.cat([decoder, nxt.unsqueeze(1)], dim=1)
            finished |= nxt == tokenizer.eos_id
            if bool(finished.all()):
                break
    outs = []
    for row in decoder[:, 1:].tolist():
        ids = []
        for tok in row:
            ids.append(tok)
            if tok == tokenizer.eos_id:
                break
        outs.append(ids)
    return outs
