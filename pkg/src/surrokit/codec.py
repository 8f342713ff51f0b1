"""Deterministic scientific-notation text codec for real scalars and vectors.

A scalar is rendered as ``"<sign> <10^k> d1 d2 ... dg"``: an ASCII sign,
one exponent token holding the decimal exponent of the leading digit, and a
fixed count of mantissa digits. Encoding rounds half away from zero on the
last kept digit, so the absolute error never exceeds half a unit in the
last place and the relative error never exceeds ``0.5 * 10**(1 - gamma)``.
Vectors are bracketed, comma-separated lists of scalar encodings.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP, localcontext

from .errors import (
    BudgetExhausted,
    ExponentOutOfRange,
    MalformedToken,
    NonFinite,
)

_EXPONENT_RE = re.compile(r"^<10\^(-?\d+)>$")


@dataclass(frozen=True)
class CodecConfig:
    """Precision and exponent coverage of the codec.

    gamma: significant digits kept per scalar.
    k_min/k_max: inclusive range of decimal exponents with a vocabulary token.
    clamp_underflow: when True, nonzero magnitudes below ``10**k_min`` encode
        as canonical zero instead of raising ExponentOutOfRange.
    """

    gamma: int = 15
    k_min: int = -12
    k_max: int = 12
    clamp_underflow: bool = False

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if not (self.k_min <= 0 <= self.k_max):
            raise ValueError("exponent range must straddle zero (k_min <= 0 <= k_max)")


@dataclass(frozen=True)
class EncodedNumber:
    """One scalar in sign / exponent / mantissa-digit form."""

    sign: str  # "+" or "-"
    exponent_k: int
    mantissa: tuple[int, ...]
    gamma: int = field(init=False)

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise MalformedToken(f"sign must be '+' or '-', got {self.sign!r}")
        if not self.mantissa:
            raise MalformedToken("mantissa must hold at least one digit")
        if any(d < 0 or d > 9 for d in self.mantissa):
            raise MalformedToken(f"mantissa digits must be 0-9, got {self.mantissa}")
        object.__setattr__(self, "gamma", len(self.mantissa))

    @property
    def is_zero(self) -> bool:
        return all(d == 0 for d in self.mantissa)

    def tokens(self) -> list[str]:
        """Token sequence: sign, exponent token, then one token per digit."""
        return [self.sign, f"<10^{self.exponent_k}>"] + [str(d) for d in self.mantissa]

    def text(self) -> str:
        return " ".join(self.tokens())


def encode_scalar(z: float, cfg: CodecConfig) -> EncodedNumber:
    """Encode a finite real to the unique sign/exponent/mantissa triple.

    The mantissa is ``|z|`` rounded half away from zero to ``gamma``
    significant digits; a round-up to 10.0 carries into the exponent.
    Decimal arithmetic on ``repr(z)`` keeps the digit extraction exact, so
    equal inputs always yield byte-identical text.
    """
    z = float(z)
    if math.isnan(z) or math.isinf(z):
        raise NonFinite(f"cannot encode {z!r}")
    if z == 0.0:
        return _canonical_zero(cfg.gamma)

    with localcontext() as ctx:
        ctx.prec = 40
        mag = Decimal(repr(abs(z)))
        k = mag.adjusted()  # floor(log10 |z|), exact
        if k < cfg.k_min:
            if cfg.clamp_underflow:
                return _canonical_zero(cfg.gamma)
            raise ExponentOutOfRange(
                f"|z|={abs(z)!r} has exponent {k} below k_min={cfg.k_min}"
            )
        if k > cfg.k_max:
            raise ExponentOutOfRange(
                f"|z|={abs(z)!r} has exponent {k} above k_max={cfg.k_max}"
            )
        quantum = Decimal(1).scaleb(k - cfg.gamma + 1)
        rounded = mag.quantize(quantum, rounding=ROUND_HALF_UP)
        if rounded.adjusted() > k:  # mantissa rounded up to 10.00... : carry
            k += 1
            if k > cfg.k_max:
                raise ExponentOutOfRange(
                    f"rounding {abs(z)!r} carries to exponent {k} above k_max={cfg.k_max}"
                )
        digit_str = f"{rounded:.{max(cfg.gamma - 1, 0)}e}".split("e")[0]
        digits = tuple(int(c) for c in digit_str.replace(".", "")[: cfg.gamma])

    sign = "-" if z < 0 else "+"
    return EncodedNumber(sign=sign, exponent_k=k, mantissa=digits)


def _canonical_zero(gamma: int) -> EncodedNumber:
    return EncodedNumber(sign="+", exponent_k=0, mantissa=(0,) * gamma)


def decode_scalar(e: EncodedNumber) -> float:
    """Exact float value of an encoded scalar (nearest binary float)."""
    if e.is_zero:
        return 0.0
    if e.mantissa[0] == 0:
        raise MalformedToken(f"nonzero encoding must not lead with 0: {e.text()}")
    digits = "".join(str(d) for d in e.mantissa)
    value = float(Decimal(f"{digits}E{e.exponent_k - e.gamma + 1}"))
    return -value if e.sign == "-" else value


def parse_scalar_tokens(tokens: list[str]) -> EncodedNumber:
    """Rebuild an EncodedNumber from its token sequence."""
    if len(tokens) < 3:
        raise MalformedToken(f"need sign, exponent and digits, got {tokens}")
    sign, exp_tok, digit_toks = tokens[0], tokens[1], tokens[2:]
    if sign not in ("+", "-"):
        raise MalformedToken(f"bad sign token {sign!r}")
    m = _EXPONENT_RE.match(exp_tok)
    if m is None:
        raise MalformedToken(f"bad exponent token {exp_tok!r}")
    try:
        digits = tuple(int(t) for t in digit_toks)
    except ValueError:
        raise MalformedToken(f"bad digit among {digit_toks}") from None
    if any(d > 9 or d < 0 or len(t) != 1 for d, t in zip(digits, digit_toks)):
        raise MalformedToken(f"bad digit among {digit_toks}")
    return EncodedNumber(sign=sign, exponent_k=int(m.group(1)), mantissa=digits)


def decode_text(text: str) -> float:
    """Decode the space-separated token form of one scalar."""
    return decode_scalar(parse_scalar_tokens(text.split()))


def encode_vector(x, cfg: CodecConfig) -> str:
    """Bracketed, comma-separated encoding of a vector.

    Token count is ``D * (gamma + 3) + 1``: gamma+2 tokens per scalar, D-1
    commas, and the two brackets.
    """
    parts = []
    for i, z in enumerate(x):
        try:
            parts.append(encode_scalar(z, cfg).text())
        except (NonFinite, ExponentOutOfRange) as err:
            raise type(err)(f"component {i}: {err}") from None
    return "[" + ", ".join(parts) + "]"


def decode_vector(text: str, cfg: CodecConfig | None = None) -> list[float]:
    """Inverse of encode_vector; cfg is accepted for symmetry but unused."""
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise MalformedToken(f"vector text must be bracketed: {text!r}")
    body = body[1:-1].strip()
    if not body:
        return []
    return [decode_text(chunk.strip()) for chunk in body.split(",")]


def ulp(k: int, gamma: int) -> float:
    """Spacing of adjacent representable values near magnitude 10**k."""
    return 10.0 ** (k + 1 - gamma)


def abs_error_bound(k: int, gamma: int) -> float:
    """Worst-case absolute rounding error near magnitude 10**k (half a ULP)."""
    return 0.5 * ulp(k, gamma)


def rel_error_bound(gamma: int) -> float:
    """Scale-invariant worst-case relative rounding error."""
    return 0.5 * 10.0 ** (1 - gamma)


def representable_range(cfg: CodecConfig) -> tuple[float, float]:
    """Smallest and largest nonzero representable magnitudes."""
    lo = 10.0 ** cfg.k_min
    hi = (10.0 - 10.0 ** (1 - cfg.gamma)) * 10.0 ** cfg.k_max
    return lo, hi


def scalar_token_length(gamma: int) -> int:
    """Tokens per scalar: sign + exponent + gamma digits."""
    return gamma + 2


def array_token_length(dim: int, gamma: int) -> int:
    """Tokens per encoded vector, brackets and commas included."""
    return dim * (gamma + 3) + 1


def token_budget(l_max: int, l_m: int, gamma: int) -> int:
    """Largest vector dimensionality fitting an input cap of l_max tokens.

    l_m is the metadata token length. Raises BudgetExhausted when not even
    a one-dimensional vector fits.
    """
    if l_max <= l_m + 1:
        raise BudgetExhausted(f"l_max={l_max} leaves no room after metadata l_m={l_m}")
    d_max = (l_max - l_m - 1) // (gamma + 3)
    if d_max < 1:
        raise BudgetExhausted(
            f"no dimension fits: l_max={l_max}, l_m={l_m}, gamma={gamma}"
        )
    return d_max
