"""Exact arithmetic for weights of the form e^{-r.n}.

A rate is stored as ``a + ln(b)`` with rational ``a`` and positive rational
``b``.  Then e^{-r.n} = b^{-n} e^{-a n}, so every weight, measure value and
state value met in rational mode lies in the ring of finite sums
``sum_s c_s e^{-s}`` with rational ``c_s`` and ``s``.  Distinct rational
exponentials are linearly independent over Q, so equality in this ring is
decidable by comparing coefficients.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable

from .errors import NotExact


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"not a rational: {x!r}")


class ExpPoly:
    """Finite sum of rational multiples of e^{-s}, s rational."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Fraction, Fraction] | None = None):
        clean: Dict[Fraction, Fraction] = {}
        for s, c in (terms or {}).items():
            c = _as_fraction(c)
            if c:
                clean[_as_fraction(s)] = c
        self.terms = clean

    @classmethod
    def const(cls, q) -> "ExpPoly":
        return cls({Fraction(0): _as_fraction(q)})

    @classmethod
    def exp_neg(cls, s, coeff=1) -> "ExpPoly":
        return cls({_as_fraction(s): _as_fraction(coeff)})

    @staticmethod
    def lift(x) -> "ExpPoly":
        if isinstance(x, ExpPoly):
            return x
        return ExpPoly.const(x)

    def _binary(self, other):
        try:
            return ExpPoly.lift(other)
        except TypeError:
            return None

    def __add__(self, other):
        o = self._binary(other)
        if o is None:
            return float(self) + other
        out = dict(self.terms)
        for s, c in o.terms.items():
            out[s] = out.get(s, 0) + c
        return ExpPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly({s: -c for s, c in self.terms.items()})

    def __sub__(self, other):
        o = self._binary(other)
        if o is None:
            return float(self) - other
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._binary(other)
        if o is None:
            return float(self) * other
        out: Dict[Fraction, Fraction] = {}
        for s1, c1 in self.terms.items():
            for s2, c2 in o.terms.items():
                out[s1 + s2] = out.get(s1 + s2, 0) + c1 * c2
        return ExpPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = _as_fraction(other)
        return ExpPoly({s: c / q for s, c in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise NotExact("only single exponentials can be inverted")
            ((s, c),) = self.terms.items()
            return ExpPoly({s * n: c ** n})
        out = ExpPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self):
        return self

    def __eq__(self, other):
        o = self._binary(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __float__(self):
        return math.fsum(float(c) * math.exp(-float(s)) for s, c in self.terms.items())

    def __abs__(self):
        return abs(float(self))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for s, c in sorted(self.terms.items()):
            parts.append(str(c) if s == 0 else f"{c}*exp({-s})")
        return " + ".join(parts)


@dataclass(frozen=True)
class ExactRate:
    """The positive real ``offset + ln(log_arg)``."""

    offset: Fraction
    log_arg: Fraction = Fraction(1)

    def __float__(self):
        return float(self.offset) + math.log(self.log_arg)

    def is_log_of(self, rho) -> bool:
        return self.offset == 0 and self.log_arg == _as_fraction(rho)

    def scale(self, t: Fraction) -> "ExactRate":
        """t*(a + ln b) kept exact when b**t is rational."""
        t = _as_fraction(t)
        b = _rational_power(self.log_arg, t)
        return ExactRate(self.offset * t, b)

    def __str__(self):
        parts = []
        if self.offset:
            parts.append(str(self.offset))
        if self.log_arg != 1:
            parts.append(f"ln({self.log_arg})")
        return "+".join(parts) or "0"


def _int_root(n: int, q: int) -> int | None:
    if n < 0:
        return None
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    return None


def _rational_power(b: Fraction, t: Fraction) -> Fraction:
    if b == 1:
        return Fraction(1)
    p, q = t.numerator, t.denominator
    num, den = _int_root(b.numerator, q), _int_root(b.denominator, q)
    if num is None or den is None:
        raise NotExact(f"{b}^{t} is not rational")
    return Fraction(num, den) ** p


def weight(rates: Iterable[ExactRate], n) -> ExpPoly:
    """e^{-r.n} for exact rates; n may have negative entries."""
    s = Fraction(0)
    coeff = Fraction(1)
    for rate, ni in zip(rates, n):
        s += rate.offset * ni
        coeff *= rate.log_arg ** (-ni)
    return ExpPoly.exp_neg(s, coeff)


_LN = re.compile(r"^(?:(\d+)\s*\*?\s*)?(?:ln|log)\s*\(?\s*([0-9./]+)\s*\)?$")


def parse_rate(text: str) -> ExactRate:
    """Parse "1", "1/2", "0.5", "ln3", "ln(3/2)", "2*ln3", "1+ln(2)"."""
    offset = Fraction(0)
    arg = Fraction(1)
    for raw in text.replace(" ", "").split("+"):
        if not raw:
            raise ValueError(f"bad rate {text!r}")
        m = _LN.match(raw)
        if m:
            mult = int(m.group(1) or 1)
            arg *= Fraction(m.group(2)) ** mult
        else:
            offset += Fraction(raw)
    if arg <= 0:
        raise ValueError(f"logarithm of non-positive number in {text!r}")
    rate = ExactRate(offset, arg)
    if float(rate) <= 0:
        raise ValueError(f"rate must be positive: {text!r}")
    return rate


def to_float(x) -> float:
    if isinstance(x, complex):
        return x.real
    return float(x)
