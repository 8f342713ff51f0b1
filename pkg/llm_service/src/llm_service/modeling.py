"""Model construction: scratch presets and pretrained checkpoints.

The hermetic presets build a randomly initialized encoder-decoder sized
for desk-scale runs. When a pretrained checkpoint name is given (and the
weights are fetchable), its tokenizer is extended with the numeric tokens
from the shared vocabulary and the embeddings resized to match.
"""

from __future__ import annotations

import json
from pathlib import Path

from transformers import T5Config, T5ForConditionalGeneration

from .tokenizer import WordTokenizer

PRESETS = {
    "tiny": dict(d_model=64, d_kv=16, d_ff=256, num_layers=2, num_heads=4),
    "small-scratch": dict(d_model=256, d_kv=32, d_ff=1024, num_layers=4, num_heads=4),
}

MODEL_SIZE_RULE_THRESHOLD = 1000  # per-task training size below this -> small variant


def pick_pretrained_size(per_task_train_size: int) -> str:
    return "t5-small" if per_task_train_size < MODEL_SIZE_RULE_THRESHOLD else "t5-base"


def build_model(base: str, tokenizer: WordTokenizer):
    if base in PRESETS:
        cfg = T5Config(
            vocab_size=len(tokenizer),
            decoder_start_token_id=tokenizer.pad_id,
            pad_token_id=tokenizer.pad_id,
            eos_token_id=tokenizer.eos_id,
            **PRESETS[base],
        )
        return T5ForConditionalGeneration(cfg)
    model = T5ForConditionalGeneration.from_pretrained(base)
    model.resize_token_embeddings(len(tokenizer))
    model.config.decoder_start_token_id = tokenizer.pad_id
    model.config.pad_token_id = tokenizer.pad_id
    model.config.eos_token_id = tokenizer.eos_id
    return model


def save_checkpoint(model, tokenizer: WordTokenizer, out_dir: str | Path, extra: dict | None = None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out)
    tokenizer.save(out / "tokenizer.json")
    if extra is not None:
        (out / "training_summary.json").write_text(json.dumps(extra, indent=1) + "\n")
    return out


def load_checkpoint(ckpt_dir: str | Path):
    ckpt = Path(ckpt_dir)
    tokenizer = WordTokenizer.load(ckpt / "tokenizer.json")
    model = T5ForConditionalGeneration.from_pretrained(ckpt)
    model.eval()
    return model, tokenizer
