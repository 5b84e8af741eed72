"""Ordinals below ω², written ω·a + b."""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Ordinal:
    omega: int = 0
    finite: int = 0

    def __post_init__(self):
        if self.omega < 0 or self.finite < 0:
            raise ValueError("ordinal components must be natural numbers")

    @classmethod
    def of(cls, v: Ordinal | int) -> Ordinal:
        return v if isinstance(v, Ordinal) else cls(0, int(v))

    @property
    def is_zero(self) -> bool:
        return self.omega == 0 and self.finite == 0

    @property
    def is_limit(self) -> bool:
        return self.omega > 0 and self.finite == 0

    @property
    def is_successor(self) -> bool:
        return self.finite > 0

    @property
    def is_finite(self) -> bool:
        return self.omega == 0

    def succ(self, k: int = 1) -> Ordinal:
        return Ordinal(self.omega, self.finite + k)

    def pred(self) -> Ordinal:
        if not self.is_successor:
            raise ValueError(f"{self} has no predecessor")
        return Ordinal(self.omega, self.finite - 1)

    def block(self) -> Ordinal:
        """The largest limit (or zero) not above self."""
        return Ordinal(self.omega, 0)

    def __add__(self, k: int) -> Ordinal:
        return self.succ(k)

    def __lt__(self, other):
        other = Ordinal.of(other)
        return (self.omega, self.finite) < (other.omega, other.finite)

    def __le__(self, other):
        other = Ordinal.of(other)
        return (self.omega, self.finite) <= (other.omega, other.finite)

    def __gt__(self, other):
        return Ordinal.of(other) < self

    def __ge__(self, other):
        return Ordinal.of(other) <= self

    def __str__(self) -> str:
        if self.omega == 0:
            return str(self.finite)
        head = f"w*{self.omega}"
        return head if self.finite == 0 else f"{head}+{self.finite}"


OMEGA = Ordinal(1, 0)

_LIT = re.compile(r"\s*(?:w(?:\*(\d+))?(?:\s*\+\s*(\d+))?|(\d+))\s*")


def parse_ordinal(text: str) -> Ordinal:
    """Accepts 'w*a+b', 'w*a', 'w+b', 'w' and bare naturals."""
    m = _LIT.fullmatch(text)
    if not m:
        raise ValueError(f"bad ordinal literal {text!r}")
    if m.group(3) is not None:
        return Ordinal(0, int(m.group(3)))
    a = int(m.group(1)) if m.group(1) is not None else 1
    b = int(m.group(2)) if m.group(2) is not None else 0
    return Ordinal(a, b)
