"""Exact fractions of polynomials and balanced-tree summation.

Used for the finite-level exact theorems (degree <= 2 prime sums), the
Carlitz identities, and symbolic specialization.  Tree summation never
reduces by gcd: zero-ness is read off the numerator and valuations off
degree differences, which is all the callers need, and reduction of
61000-degree intermediates would dominate the cost.
"""

from .errors import FieldMismatchError
from .ffield import Field
from .fqpoly import NEG_INF, Poly


class RatFun:
    """num/den with den != 0; exact arithmetic, no implicit reduction."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.field != den.field:
            raise FieldMismatchError("numerator/denominator field mismatch")
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, f: Poly) -> "RatFun":
        return cls(f, Poly.one(f.field))

    @classmethod
    def zero(cls, field: Field) -> "RatFun":
        return cls(Poly.zero(field), Poly.one(field))

    @classmethod
    def one(cls, field: Field) -> "RatFun":
        return cls(Poly.one(field), Poly.one(field))

    @property
    def field(self) -> Field:
        return self.num.field

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def valuation(self):
        """Valuation at infinity: deg den - deg num (inf for zero)."""
        if self.num.is_zero():
            return NEG_INF * -1  # +inf
        return self.den.degree - self.num.degree

    def __add__(self, other: "RatFun") -> "RatFun":
        return RatFun(self.num * other.den + other.num * self.den,
                      self.den * other.den)

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den)

    def __sub__(self, other: "RatFun") -> "RatFun":
        return self + (-other)

    def __mul__(self, other: "RatFun") -> "RatFun":
        return RatFun(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFun") -> "RatFun":
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFun(self.num * other.den, self.den * other.num)

    def __pow__(self, e: int) -> "RatFun":
        if e < 0:
            return RatFun(self.den, self.num) ** (-e)
        return RatFun(self.num**e, self.den**e)

    def reduced(self) -> "RatFun":
        """gcd-reduced with monic denominator."""
        if self.num.is_zero():
            return RatFun(Poly.zero(self.field), Poly.one(self.field))
        g = self.num.gcd(self.den)
        num = self.num // g
        den = self.den // g
        lead_inv = self.field.inv(den.leading())
        return RatFun(num.scale(lead_inv), den.scale(lead_inv))

    def __eq__(self, other):
        """Equality as rational functions (cross multiplication)."""
        if not isinstance(other, RatFun):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        r = self.reduced()
        return hash((r.num, r.den))

    def __repr__(self):
        return f"({self.num})/({self.den})"


def tree_sum(terms: list[RatFun]) -> RatFun:
    """Balanced pairwise summation; deterministic and gcd-free."""
    if not terms:
        raise ValueError("tree_sum of no terms")
    layer = list(terms)
    while len(layer) > 1:
        nxt = []
        for i in range(0, len(layer) - 1, 2):
            nxt.append(layer[i] + layer[i + 1])
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]
