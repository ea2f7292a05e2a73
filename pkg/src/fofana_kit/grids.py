"""Finite radius grids standing in for suprema over r > 0."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class RadiusGrid:
    radii: tuple[float, ...]
    spec: str = ""

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        if not r:
            raise ValueError("radius grid is empty")
        if any(not x > 0 or math.isinf(x) for x in r):
            raise ValueError("radii must be positive and finite")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("radii must be strictly increasing")
        object.__setattr__(self, "radii", r)
        if not self.spec:
            object.__setattr__(self, "spec", "list:" + ",".join(repr(x) for x in r))

    def __len__(self):
        return len(self.radii)

    def __iter__(self):
        return iter(self.radii)

    @classmethod
    def geometric(cls, r_min: float, r_max: float, count: int) -> RadiusGrid:
        """``count`` log-spaced radii from ``r_min`` to ``r_max`` inclusive.

        Exponents are exact fractions, so ``refined()`` reproduces every
        existing node bit-for-bit.
        """
        if count < 1 or not 0 < r_min <= r_max:
            raise ValueError("geometric grid needs 0 < r_min <= r_max and count >= 1")
        if count == 1 or r_min == r_max:
            return cls((r_min,), f"geometric:{r_min!r}:{r_min!r}:1")
        ratio = r_max / r_min
        radii = [r_min * ratio ** float(Fraction(i, count - 1)) for i in range(count)]
        radii[-1] = r_max
        return cls(tuple(radii), f"geometric:{r_min!r}:{r_max!r}:{count}")

    @classmethod
    def parse(cls, text: str) -> RadiusGrid:
        """``geometric:r_min:r_max:count`` or ``list:r1,r2,...``."""
        kind, _, rest = text.partition(":")
        try:
            if kind == "geometric":
                a, b, n = rest.split(":")
                return cls.geometric(float(a), float(b), int(n))
            if kind == "list":
                return cls(tuple(float(x) for x in rest.split(",")))
        except ValueError as exc:
            raise ValueError(f"radii: cannot parse {text!r} ({exc})") from None
        raise ValueError(f"radii: unknown grid kind in {text!r}")

    def refined(self) -> RadiusGrid:
        """Insert a geometric midpoint between neighbours (2m - 1 points)."""
        if self.spec.startswith("geometric:"):
            _, a, b, n = self.spec.split(":")
            return RadiusGrid.geometric(float(a), float(b), 2 * int(n) - 1)
        out = [self.radii[0]]
        for a, b in zip(self.radii, self.radii[1:]):
            out += [math.sqrt(a * b), b]
        return RadiusGrid(tuple(out))

    def aligned(self, h: float) -> RadiusGrid:
        """Snap every radius to the nearest positive multiple of ``h``."""
        snapped = sorted({max(1, round(r / h)) for r in self.radii})
        return RadiusGrid(tuple(k * h for k in snapped), f"{self.spec}@h={h!r}")

    def extended(self, extra: Sequence[float]) -> RadiusGrid:
        return RadiusGrid(tuple(sorted(set(self.radii) | {float(x) for x in extra})))
