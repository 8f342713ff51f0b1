"""Minimal numeric-text helpers: fitness parsing and accuracy metrics.

The text format is the interchange contract with the consumer toolkit;
this module deliberately reimplements the few pieces the service needs so
the package stays self-contained (the cross-package parity tests compare
the two implementations).
"""

from __future__ import annotations

import math
import re
from decimal import Decimal, ROUND_HALF_UP, localcontext

import numpy as np

_SCALAR_RE = re.compile(
    r"^([+-])\s+<10\^(-?\d+)>((?:\s+\d)+)$"
)
_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")


class UnparseableOutput(ValueError):
    pass


def encode_scalar(z: float, gamma: int, k_min: int = -12, k_max: int = 12) -> str:
    """Sign + exponent token + gamma digits, rounding half away from zero."""
    z = float(z)
    if math.isnan(z) or math.isinf(z):
        raise ValueError(f"cannot encode {z!r}")
    if z == 0.0:
        return "+ <10^0> " + " ".join("0" * gamma)
    with localcontext() as ctx:
        ctx.prec = 40
        mag = Decimal(repr(abs(z)))
        k = mag.adjusted()
        if not k_min <= k <= k_max:
            raise ValueError(f"exponent {k} outside [{k_min}, {k_max}]")
        rounded = mag.quantize(Decimal(1).scaleb(k - gamma + 1), rounding=ROUND_HALF_UP)
        if rounded.adjusted() > k:
            k += 1
            if k > k_max:
                raise ValueError(f"rounding carries past k_max={k_max}")
        digits = f"{rounded:.{max(gamma - 1, 0)}e}".split("e")[0].replace(".", "")[:gamma]
    sign = "-" if z < 0 else "+"
    return f"{sign} <10^{k}> " + " ".join(digits)


def encode_vector(x, gamma: int, k_min: int = -12, k_max: int = 12) -> str:
    return "[" + ", ".join(encode_scalar(v, gamma, k_min, k_max) for v in x) + "]"


def parse_scalar(body: str) -> float:
    m = _SCALAR_RE.match(body.strip())
    if m is None:
        raise UnparseableOutput(f"not a scalar encoding: {body!r}")
    sign, k, digit_part = m.group(1), int(m.group(2)), m.group(3)
    digits = digit_part.split()
    if digits[0] == "0" and any(d != "0" for d in digits):
        raise UnparseableOutput(f"nonzero value with leading zero: {body!r}")
    value = float(f"{digits[0]}.{''.join(digits[1:]) or '0'}e{k}")
    if all(d == "0" for d in digits):
        return 0.0
    return -value if sign == "-" else value


def parse_fitness(text: str) -> float:
    for match in _BRACKET_RE.finditer(text):
        body = re.sub(r"</?s>", "", match.group(1)).strip()
        try:
            return parse_scalar(body)
        except UnparseableOutput:
            continue
    raise UnparseableOutput(f"no encoded scalar in {text!r}")


def smae(y_true, y_pred) -> float:
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    r = float(yt.max() - yt.min())
    if r <= 0:
        raise ValueError("degenerate target range")
    return float(np.abs(yt - yp).mean() / r)


def r2(y_true, y_pred) -> float:
    yt = np.asarray(y_true, dtype=float)
    yp = np.asarray(y_pred, dtype=float)
    ss_tot = float(((yt - yt.mean()) ** 2).sum())
    if ss_tot <= 0:
        raise ValueError("degenerate target variance")
    return 1.0 - float(((yt - yp) ** 2).sum()) / ss_tot


def position_errors(pred_tokens: list[str], true_tokens: list[str]):
    """(sign_err, exp_err, digit_errs) for one bracket-stripped pair, or
    None when the shapes do not line up."""
    strip = {"[", "]", "<s>", "</s>", "<pad>"}
    pred = [t for t in pred_tokens if t not in strip]
    true = [t for t in true_tokens if t not in strip]
    if len(pred) != len(true) or len(true) < 3:
        return None
    exp_re = re.compile(r"^<10\^(-?\d+)>$")
    mp, mt = exp_re.match(pred[1]), exp_re.match(true[1])
    if mp is None or mt is None:
        return None
    try:
        digits_p = [int(t) for t in pred[2:]]
        digits_t = [int(t) for t in true[2:]]
    except ValueError:
        return None
    sign_err = 0.0 if pred[0] == true[0] else 1.0
    exp_err = abs(int(mp.group(1)) - int(mt.group(1)))
    digit_errs = [abs(a - b) for a, b in zip(digits_p, digits_t)]
    return sign_err, float(exp_err), digit_errs
