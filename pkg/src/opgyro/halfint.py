"""Exact half-integer quantum numbers stored as doubled integers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidSpinError


@dataclass(frozen=True, order=True)
class HalfInt:
    """A value ``twice / 2``. Never round-trips through a float."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, int) or isinstance(self.twice, bool):
            raise TypeError(f"twice must be an int, got {self.twice!r}")

    @classmethod
    def parse(cls, text) -> HalfInt:
        """Accept ``"3/2"``, ``"2"``, ``"-1/2"``, ``"1.5"``, ints or HalfInt."""
        if isinstance(text, HalfInt):
            return text
        if isinstance(text, int) and not isinstance(text, bool):
            return cls(2 * text)
        try:
            frac = Fraction(str(text).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidSpinError(f"not a half-integer: {text!r}") from exc
        doubled = 2 * frac
        if doubled.denominator != 1:
            raise InvalidSpinError(f"not a half-integer: {text!r}")
        return cls(int(doubled))

    @classmethod
    def from_float(cls, value: float, tol: float = 1e-9) -> HalfInt:
        doubled = round(2 * value)
        if abs(2 * value - doubled) > tol:
            raise InvalidSpinError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2

    def __add__(self, other: HalfInt) -> HalfInt:
        return HalfInt(self.twice + HalfInt.parse(other).twice)

    def __sub__(self, other: HalfInt) -> HalfInt:
        return HalfInt(self.twice - HalfInt.parse(other).twice)

    def __neg__(self) -> HalfInt:
        return HalfInt(-self.twice)

    def __mul__(self, n: int) -> HalfInt:
        return HalfInt(self.twice * n)

    __rmul__ = __mul__

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"


def check_magnitude(j: HalfInt, what: str = "spin") -> HalfInt:
    if j.twice < 0:
        raise InvalidSpinError(f"{what} must be non-negative, got {j}")
    return j


def check_projection(j: HalfInt, m: HalfInt) -> None:
    """Raise unless ``m`` is a valid projection of magnitude ``j``."""
    if abs(m.twice) > j.twice or (j.twice - m.twice) % 2:
        raise InvalidSpinError(f"invalid projection {m} for magnitude {j}")
