"""Word-level tokenizer over the shared numeric vocabulary.

Inputs are pre-split on spaces (one token per digit or symbol); brackets
and commas attach to neighbours in the text form and are peeled off during
lexing. The shared vocabulary JSON written next to every dataset pins the
id order of all numeric tokens, so exported probabilities line up with the
consumer side token for token; metadata words are appended after it.
"""

from __future__ import annotations

import json
from pathlib import Path

PAD, BOS, EOS, UNK = "<pad>", "<s>", "</s>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)


def lex(text: str) -> list[str]:
    out: list[str] = []
    for chunk in text.split():
        buf = ""
        for ch in chunk:
            if ch in "[],":
                if buf:
                    out.append(buf)
                    buf = ""
                out.append(ch)
            else:
                buf += ch
        if buf:
            out.append(buf)
    return out


def detokenize(tokens) -> str:
    text = ""
    for tok in tokens:
        if tok == "[":
            text += "[" if not text else " ["
        elif tok in ("]", ","):
            text += tok
        elif not text or text.endswith("["):
            text += tok
        else:
            text += " " + tok
    return text


class WordTokenizer:
    def __init__(self, entries: list[str]):
        if len(set(entries)) != len(entries):
            raise ValueError("duplicate tokenizer entries")
        self.entries = list(entries)
        self._index = {tok: i for i, tok in enumerate(self.entries)}
        for special in SPECIALS:
            if special not in self._index:
                raise ValueError(f"tokenizer must contain {special}")

    @classmethod
    def build(cls, shared_vocab_path: str | Path, corpus_texts) -> "WordTokenizer":
        """Shared numeric vocabulary first (id order preserved), then any
        metadata words seen in the corpus, then <unk>."""
        shared = json.loads(Path(shared_vocab_path).read_text())
        entries = list(shared)
        seen = set(entries)
        for special in SPECIALS:
            if special not in seen:
                entries.append(special)
                seen.add(special)
        extra = []
        for text in corpus_texts:
            for tok in lex(text):
                if tok not in seen:
                    seen.add(tok)
                    extra.append(tok)
        return cls(entries + sorted(extra))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def pad_id(self) -> int:
        return self._index[PAD]

    @property
    def eos_id(self) -> int:
        return self._index[EOS]

    @property
    def unk_id(self) -> int:
        return self._index[UNK]

    def id_of(self, token: str) -> int:
        return self._index.get(token, self._index[UNK])

    def token_of(self, token_id: int) -> str:
        return self.entries[token_id]

    def encode(self, text: str, add_eos: bool = False) -> list[int]:
        ids = [self.id_of(tok) for tok in lex(text)]
        if add_eos:
            ids.append(self.eos_id)
        return ids

    def decode(self, ids, skip_special: bool = True) -> str:
        toks = [self.entries[i] for i in ids if 0 <= i < len(self.entries)]
        if skip_special:
            toks = [t for t in toks if t not in SPECIALS]
        return detokenize(toks)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.entries, indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "WordTokenizer":
        return cls(json.loads(Path(path).read_text()))
