"""Two's-complement fixed-point scalars.

A value is a raw signed integer plus a format; the real value is
``raw * 2**-frac``.  All operations are pure and return new values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Overflow(str, enum.Enum):
    WRAP = "wrap"
    SATURATE = "saturate"
    TRAP = "trap"


class FxpOverflowError(ArithmeticError):
    """Raised when a result does not fit and the policy forbids wrapping."""


class FxpFormatError(ValueError):
    """Raised when operands carry different formats."""


@dataclass(frozen=True)
class FxpFormat:
    width: int
    frac: int = 0
    overflow: Overflow = Overflow.WRAP

    def __post_init__(self):
        if self.width < 2:
            raise ValueError(f"width must be >= 2, got {self.width}")
        if not 0 <= self.frac <= self.width - 1:
            raise ValueError(f"frac must be in [0, {self.width - 1}], got {self.frac}")
        object.__setattr__(self, "overflow", Overflow(self.overflow))

    @property
    def min_raw(self) -> int:
        return -(1 << (self.width - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.width - 1)) - 1

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.frac

    def contains(self, raw: int) -> bool:
        return self.min_raw <= raw <= self.max_raw

    def fit(self, raw: int) -> int:
        """Bring an unbounded integer into range according to the overflow policy."""
        if self.contains(raw):
            return raw
        if self.overflow is Overflow.WRAP:
            span = 1 << self.width
            return (raw - self.min_raw) % span + self.min_raw
        if self.overflow is Overflow.SATURATE:
            return self.max_raw if raw > 0 else self.min_raw
        raise FxpOverflowError(f"raw {raw} out of range for {self}")

    def with_overflow(self, overflow: Overflow | str) -> "FxpFormat":
        return FxpFormat(self.width, self.frac, Overflow(overflow))


@dataclass(frozen=True)
class FxpValue:
    raw: int
    fmt: FxpFormat

    def __post_init__(self):
        if not self.fmt.contains(self.raw):
            raise ValueError(f"raw {self.raw} not representable in {self.fmt}")

    @property
    def value(self) -> float:
        return self.raw * self.fmt.ulp

    @classmethod
    def from_real(cls, x: float, fmt: FxpFormat) -> "FxpValue":
        """Quantize by flooring to the format's grid, then apply the overflow policy."""
        scaled = x * (1 << fmt.frac)
        return cls(fmt.fit(int(scaled // 1)), fmt)

    def __repr__(self):
        return f"FxpValue(raw={self.raw}, width={self.fmt.width}, frac={self.fmt.frac})"


def _check_same(a: FxpValue, b: FxpValue) -> None:
    if a.fmt != b.fmt:
        raise FxpFormatError(f"format mismatch: {a.fmt} vs {b.fmt}")


def add(a: FxpValue, b: FxpValue, carry_in: int = 0) -> FxpValue:
    """Adder with a carry input worth one LSB."""
    _check_same(a, b)
    if carry_in not in (0, 1):
        raise ValueError("carry_in must be 0 or 1")
    return FxpValue(a.fmt.fit(a.raw + b.raw + carry_in), a.fmt)


def bitnot(a: FxpValue) -> FxpValue:
    """Bitwise complement over the full width: ``-raw - 1``."""
    return FxpValue(-a.raw - 1, a.fmt)


def sub(a: FxpValue, b: FxpValue) -> FxpValue:
    """``a - b`` the way hardware does it: ``a + ~b`` with the carry set."""
    return add(a, bitnot(b), carry_in=1)


def negate(a: FxpValue) -> FxpValue:
    """``-a`` computed as ``~a + 1``.

    The most negative value only negates under wrap (to itself).
    """
    if a.raw == a.fmt.min_raw and a.fmt.overflow is not Overflow.WRAP:
        raise FxpOverflowError(f"cannot negate most-negative value {a.raw} under {a.fmt.overflow.value}")
    inv = bitnot(a)
    return add(inv, FxpValue(0, a.fmt), carry_in=1)


def asr(a: FxpValue, k: int) -> FxpValue:
    """Arithmetic (floor) right shift by ``k`` bits within the same format."""
    if k < 0 or k >= a.fmt.width:
        raise ValueError(f"shift {k} outside [0, {a.fmt.width})")
    return FxpValue(a.raw >> k, a.fmt)


def resize(a: FxpValue, fmt: FxpFormat) -> FxpValue:
    """Re-express ``a`` in another format; dropped fraction bits are floored."""
    d = fmt.frac - a.fmt.frac
    raw = a.raw << d if d >= 0 else a.raw >> -d
    return FxpValue(fmt.fit(raw), fmt)
