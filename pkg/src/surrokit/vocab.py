"""Token vocabulary for encoded numbers and its JSON interchange form.

The ordered entry list is the cross-component contract: the serving side
loads the same JSON file so token ids agree byte for byte in golden tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import MalformedToken

START_TOKEN = "<s>"
END_TOKEN = "</s>"
PAD_TOKEN = "<pad>"
OPEN_TOKEN = "["
CLOSE_TOKEN = "]"
COMMA_TOKEN = ","
SIGN_TOKENS = ("+", "-")
DIGIT_TOKENS = tuple(str(d) for d in range(10))


def exponent_token(k: int) -> str:
    return f"<10^{k}>"


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token set covering every symbol an encoded number can emit."""

    entries: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("vocabulary entries must be unique")
        object.__setattr__(
            self, "_index", {tok: i for i, tok in enumerate(self.entries)}
        )

    @classmethod
    def build(cls, k_min: int = -12, k_max: int = 12) -> "Vocabulary":
        if k_min > k_max:
            raise ValueError("k_min must not exceed k_max")
        entries = (
            (PAD_TOKEN, START_TOKEN, END_TOKEN, OPEN_TOKEN, CLOSE_TOKEN, COMMA_TOKEN)
            + SIGN_TOKENS
            + DIGIT_TOKENS
            + tuple(exponent_token(k) for k in range(k_min, k_max + 1))
        )
        return cls(entries=entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise MalformedToken(f"token {token!r} not in vocabulary") from None

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.entries):
            raise MalformedToken(f"token id {token_id} out of range")
        return self.entries[token_id]

    @property
    def end_id(self) -> int:
        return self.id_of(END_TOKEN)

    @property
    def pad_id(self) -> int:
        return self.id_of(PAD_TOKEN)

    def encode(self, text: str) -> list[int]:
        return [self.id_of(tok) for tok in lex(text)]

    def decode(self, ids, skip_special: bool = True) -> str:
        toks = [self.token_of(i) for i in ids]
        if skip_special:
            toks = [t for t in toks if t not in (PAD_TOKEN, START_TOKEN, END_TOKEN)]
        return detokenize(toks)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(list(self.entries), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        entries = json.loads(Path(path).read_text())
        return cls(entries=tuple(entries))


def lex(text: str) -> list[str]:
    """Split encoded-number text into tokens.

    Brackets and commas attach to neighbouring symbols in the text form
    ("[+", "9,"), so whitespace splitting alone is not enough.
    """
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
    """Inverse of lex: rebuild the canonical spaced text form."""
    text = ""
    for tok in tokens:
        if tok == OPEN_TOKEN:
            text += "[" if not text else " ["
        elif tok in (CLOSE_TOKEN, COMMA_TOKEN):
            text += tok
        elif not text or text.endswith("["):
            text += tok
        else:
            text += " " + tok
    return text
