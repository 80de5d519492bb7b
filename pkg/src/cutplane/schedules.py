"""Threshold sequences eps_k / delta_k that decide when a refresh happens."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidConfig, MissingContext


class Kind(str, enum.Enum):
    ZERO = "zero"
    GEOMETRIC = "geometric"
    ADAPTIVE = "adaptive_residual"


class Context(str, enum.Enum):
    """What the adaptive rule multiplies: F(x_k) or the gap f(x_k) - sigma_k."""

    RESIDUAL = "residual"
    GAP = "gap"


@dataclass
class Schedule:
    kind: Kind
    divisor: float = 1.0
    eps0: Optional[float] = None
    context: Context = Context.RESIDUAL
    code: str = ""
    k: int = 0
    current: float = 0.0

    def __post_init__(self):
        self.kind = Kind(self.kind)
        if self.kind is not Kind.ZERO and not self.divisor > 1.0:
            raise InvalidConfig(f"schedule divisor must exceed 1, got {self.divisor}")
        self.reset()

    def reset(self) -> "Schedule":
        self.k = 0
        if self.kind is Kind.ZERO:
            self.current = 0.0
        elif self.kind is Kind.GEOMETRIC:
            self.current = 1.0 if self.eps0 is None else float(self.eps0)
            if not self.current > 0:
                raise InvalidConfig("geometric schedules need a positive starting value")
        else:
            self.current = math.inf if self.eps0 is None else float(self.eps0)
        return self

    def fresh(self) -> "Schedule":
        """An unadvanced copy, so configurations can be reused between runs."""
        return Schedule(self.kind, self.divisor, self.eps0, self.context, self.code)

    @property
    def positive(self) -> bool:
        return self.kind is not Kind.ZERO

    @property
    def needs_context(self) -> bool:
        return self.kind is Kind.ADAPTIVE

    def alpha(self, k: Optional[int] = None) -> float:
        k = self.k if k is None else k
        return self.divisor ** (-k)

    def next_value(self, context: Optional[float] = None) -> float:
        """Advance k and return the new threshold."""
        if self.kind is Kind.ZERO:
            value = 0.0
        elif self.kind is Kind.GEOMETRIC:
            value = self.current / self.divisor
        else:
            if context is None:
                raise MissingContext(f"{self.kind.value} schedule needs a residual")
            if not context > 0:
                raise ValueError(f"adaptive schedules need a positive residual, got {context}")
            value = self.alpha() * float(context)
        self.k += 1
        self.current = value
        return value


def zero(code: str = "a1") -> Schedule:
    return Schedule(Kind.ZERO, code=code)


def geometric(divisor: float, eps0: Optional[float] = None, code: str = "",
              context: Context = Context.RESIDUAL) -> Schedule:
    return Schedule(Kind.GEOMETRIC, divisor, eps0, context, code)


def adaptive(divisor: float, context: Context = Context.RESIDUAL, eps0: Optional[float] = None,
             code: str = "") -> Schedule:
    return Schedule(Kind.ADAPTIVE, divisor, eps0, context, code)


EPS_CODES = ("a1", "a2", "a3", "a4", "a5", "a6", "a7")
GAP_CODES = ("c1", "c2", "c3", "c4")


def from_code(code: str, n: int, start: Optional[float] = None) -> Schedule:
    """Schedule for an experiment code; n feeds the divide-by-n variants."""
    code = code.strip().lower()
    table = {
        "a1": lambda: zero("a1"),
        "a2": lambda: geometric(1.1, start, "a2"),
        "a3": lambda: geometric(1.5, start, "a3"),
        "a4": lambda: geometric(2.0, start, "a4"),
        "a5": lambda: geometric(float(n), start, "a5"),
        "a6": lambda: adaptive(1.1, Context.RESIDUAL, start, "a6"),
        "a7": lambda: adaptive(2.0, Context.RESIDUAL, start, "a7"),
        "c1": lambda: geometric(1.1, start, "c1", Context.GAP),
        "c2": lambda: geometric(2.0, start, "c2", Context.GAP),
        "c3": lambda: geometric(float(n), start, "c3", Context.GAP),
        "c4": lambda: adaptive(2.0, Context.GAP, start, "c4"),
    }
    if code not in table:
        raise InvalidConfig(f"unknown schedule code {code!r}")
    if code in ("a5", "c3") and n < 2:
        raise InvalidConfig(f"code {code} divides by n and needs n >= 2")
    return table[code]()
