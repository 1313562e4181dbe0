"""Partial commutative semirings of truth values and transition weights.

Four instances are provided:

* ``boolean``           carrier {0, 1}, plus = or, times = and
* ``probabilistic``     carrier [0, 1] as exact rationals, plus partial
                        (undefined when the sum exceeds 1), times = product
* ``tropical``          carrier naturals plus infinity, plus = min, times = +
* ``bounded_tropical``  carrier {0..B} plus infinity, times saturates to
                        infinity past the bound B

The order ``leq`` is the canonical one induced by the partial sum
(x below y iff x + z = y for some z): numeric <= for boolean and
probabilistic, reversed (numeric >=) for the tropical family.  The additive
unit is the bottom element and the multiplicative unit is the top.

``oslash`` is the offsetting operation, the residual of the product:
oslash(s, t) is the order-infimum of all u with u * t above s.  It is a
capped division for probabilistic values, truncated subtraction for the
tropical family, and the first projection for booleans.

All values are immutable and all operations are pure, so semirings can be
shared freely across concurrent evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import CarrierError, ParseError

INF = float("inf")


class _Undefined:
    """Singleton result of a partial sum falling outside the carrier."""

    __slots__ = ()

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        raise TypeError("UNDEFINED has no truth value; compare with `is UNDEFINED`")


UNDEFINED = _Undefined()

KINDS = ("boolean", "probabilistic", "tropical", "bounded_tropical")


@dataclass(frozen=True)
class SemiringDescriptor:
    """Names one of the four semiring instances (plus the bound, if any)."""

    kind: str
    bound: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown semiring kind {self.kind!r}")
        if self.kind == "bounded_tropical":
            if self.bound is None or self.bound < 1:
                raise ValueError("bounded_tropical requires bound >= 1")
        elif self.bound is not None:
            raise ValueError(f"{self.kind} takes no bound")

    @property
    def short_name(self) -> str:
        if self.kind == "boolean":
            return "bool"
        if self.kind == "probabilistic":
            return "prob"
        if self.kind == "tropical":
            return "trop"
        return f"trop[{self.bound}]"


class Semiring:
    """Operations of one semiring instance.

    `plus` and `sum` may return UNDEFINED (a value-level outcome, not an
    error); every other operation is total on the carrier.
    """

    kind: str

    def __init__(self, descriptor: SemiringDescriptor):
        self.descriptor = descriptor

    # subclasses set both units
    zero = None
    one = None

    def contains(self, v) -> bool:
        raise NotImplementedError

    def plus(self, a, b):
        raise NotImplementedError

    def times(self, a, b):
        raise NotImplementedError

    def leq(self, a, b) -> bool:
        """The induced order: a + z = b for some z."""
        raise NotImplementedError

    def sum(self, values):
        """Left fold of plus over `values`; the empty sum is zero."""
        acc = self.zero
        for v in values:
            acc = self.plus(acc, v)
            if acc is UNDEFINED:
                return UNDEFINED
        return acc

    def oslash(self, s, t):
        """Offset s by t: the order-infimum of {u | u * t above s}."""
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def render(self, v) -> str:
        raise NotImplementedError

    # metric used in cross-check reports; infinity if exactly one side is
    # the tropical infinity
    def distance(self, a, b):
        if a == b:
            return 0
        if a == INF or b == INF:
            return INF
        return abs(a - b)

    def __repr__(self):
        return f"Semiring({self.descriptor.short_name})"


class BooleanSemiring(Semiring):
    kind = "boolean"
    zero = 0
    one = 1

    def contains(self, v):
        return v in (0, 1) and not isinstance(v, float)

    def plus(self, a, b):
        return a | b

    def times(self, a, b):
        return a & b

    def leq(self, a, b):
        return a <= b

    def oslash(self, s, t):
        return s

    def parse(self, text):
        if text == "0":
            return 0
        if text == "1":
            return 1
        raise ParseError(f"boolean scalar must be 0 or 1, got {text!r}")

    def render(self, v):
        return str(v)


class ProbabilisticSemiring(Semiring):
    kind = "probabilistic"
    zero = Fraction(0)
    one = Fraction(1)

    def contains(self, v):
        return isinstance(v, (Fraction, int)) and 0 <= v <= 1

    def plus(self, a, b):
        s = a + b
        return s if s <= 1 else UNDEFINED

    def times(self, a, b):
        return a * b

    def leq(self, a, b):
        return a <= b

    def oslash(self, s, t):
        if s == 0:
            return Fraction(0)
        if t == 0:
            return Fraction(1)
        return min(Fraction(1), Fraction(s, 1) / t)

    def parse(self, text):
        try:
            v = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad probabilistic scalar {text!r}") from None
        if not 0 <= v <= 1:
            raise CarrierError(f"probability {text!r} outside [0, 1]")
        return v

    def render(self, v):
        return str(Fraction(v))


class TropicalSemiring(Semiring):
    kind = "tropical"
    zero = INF
    one = 0

    def contains(self, v):
        return v == INF or (isinstance(v, int) and not isinstance(v, bool) and v >= 0)

    def plus(self, a, b):
        return min(a, b)

    def times(self, a, b):
        if a == INF or b == INF:
            return INF
        return a + b

    def leq(self, a, b):
        return a >= b

    def oslash(self, s, t):
        if s == INF:
            return INF
        if t == INF:
            return 0
        return max(s - t, 0)

    def parse(self, text):
        if text == "inf":
            return INF
        try:
            v = int(text)
        except ValueError:
            raise ParseError(f"bad tropical scalar {text!r}") from None
        if v < 0:
            raise CarrierError(f"tropical scalar {text!r} is negative")
        return v

    def render(self, v):
        return "inf" if v == INF else str(v)


class BoundedTropicalSemiring(TropicalSemiring):
    kind = "bounded_tropical"

    def __init__(self, descriptor):
        super().__init__(descriptor)
        self.bound = descriptor.bound

    def contains(self, v):
        return v == INF or (isinstance(v, int) and not isinstance(v, bool) and 0 <= v <= self.bound)

    def times(self, a, b):
        if a == INF or b == INF:
            return INF
        s = a + b
        return s if s <= self.bound else INF

    def carrier(self):
        """The full (finite) carrier, bottom first in the induced order."""
        return [INF] + list(range(self.bound, -1, -1))

    def oslash(self, s, t):
        # direct minimisation over the finite carrier; the infimum of the
        # empty set is the top element (the unit 0)
        qualifying = [u for u in self.carrier() if self.leq(s, self.times(u, t))]
        if not qualifying:
            return 0
        return max(qualifying)

    def parse(self, text):
        v = super().parse(text)
        if v != INF and v > self.bound:
            raise CarrierError(f"scalar {text!r} exceeds bound {self.bound}")
        return v


def semiring_for(descriptor: SemiringDescriptor) -> Semiring:
    cls = {
        "boolean": BooleanSemiring,
        "probabilistic": ProbabilisticSemiring,
        "tropical": TropicalSemiring,
        "bounded_tropical": BoundedTropicalSemiring,
    }[descriptor.kind]
    return cls(descriptor)


def parse_scalar(text: str, descriptor: SemiringDescriptor):
    """Parse a scalar literal in the concrete syntax of `descriptor`.

    Rationals ("2/5") and decimal literals ("0.25") for probabilistic
    values, decimal naturals or "inf" for the tropical family, "0"/"1"
    for booleans.
    """
    text = text.strip()
    if not text:
        raise ParseError("empty scalar")
    return semiring_for(descriptor).parse(text)


def render_scalar(value, descriptor: SemiringDescriptor) -> str:
    return semiring_for(descriptor).render(value)


def render_certified(value, descriptor: SemiringDescriptor, epsilon: Fraction) -> str:
    """Render a scalar that is only known up to `epsilon`.

    Probabilistic values produced by converging iterations are printed as
    the simplest rational within epsilon of the iterate, which recovers
    the exact value whenever the limit is a small fraction.  Other
    semirings render exactly.
    """
    if descriptor.kind != "probabilistic":
        return render_scalar(value, descriptor)
    lo = max(Fraction(0), Fraction(value) - epsilon)
    hi = min(Fraction(1), Fraction(value) + epsilon)
    return render_scalar(simplest_in_interval(lo, hi), descriptor)


def simplest_in_interval(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational with the smallest denominator in the closed interval [lo, hi].

    Used to report epsilon-converged probabilistic values: among all
    rationals compatible with the certified precision this is the canonical
    representative.
    """
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_in_interval(-hi, -lo)
    return _simplest_positive(Fraction(lo), Fraction(hi))


def _simplest_positive(lo: Fraction, hi: Fraction) -> Fraction:
    # continued-fraction descent; 0 < lo <= hi
    a = lo.numerator // lo.denominator
    if lo.denominator == 1:
        return lo
    if a + 1 <= hi:
        return Fraction(a + 1)
    return a + 1 / _simplest_positive(1 / (hi - a), 1 / (lo - a))
