"""Extended exponents in [1, inf] with exact reciprocal arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf

_INF_WORDS = {"inf", "infinity", "+inf", "oo", "∞"}


def parse_exponent(x) -> float:
    """Accept numbers or strings such as ``"2"``, ``"inf"``, ``"∞"``."""
    if isinstance(x, str):
        s = x.strip().lower()
        if s in _INF_WORDS:
            return INF
        try:
            x = float(s)
        except ValueError:
            raise ValueError(f"not an exponent: {x!r}") from None
    x = float(x)
    if math.isnan(x) or x < 1:
        raise ValueError(f"exponent must lie in [1, inf], got {x!r}")
    return x


def reciprocal(x: float) -> Fraction:
    """``1/x`` as an exact rational; ``1/inf = 0``."""
    if math.isinf(x):
        return Fraction(0)
    return 1 / Fraction(x)


def exponent_json(x: float):
    return "inf" if math.isinf(x) else x


@dataclass(frozen=True)
class ExponentPair:
    q: float
    p: float

    def __post_init__(self):
        q, p = parse_exponent(self.q), parse_exponent(self.p)
        if q > p:
            raise ValueError(f"need q <= p, got q={q!r}, p={p!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def inv_q(self) -> Fraction:
        return reciprocal(self.q)

    @property
    def inv_p(self) -> Fraction:
        return reciprocal(self.p)

    def to_json(self) -> dict:
        return {"q": exponent_json(self.q), "p": exponent_json(self.p)}
