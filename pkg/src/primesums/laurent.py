"""Truncated Laurent series at the infinite place of F_q(t).

A series is stored in powers of x = 1/t: index j holds the coefficient of
t^(-j).  Every series carries an explicit horizon N: coefficients with
j <= N are stored and trusted, nothing beyond the horizon exists.  The
valuation (minus the t-degree) is exact when a nonzero coefficient exists
at or below the horizon, otherwise only the lower bound "> N" is known.
Horizons propagate pessimistically through arithmetic so an unjustified
coefficient is structurally impossible.
"""

from dataclasses import dataclass

from .errors import FieldMismatchError, HorizonError
from .ffield import Field
from .fqpoly import Poly


@dataclass(frozen=True)
class ValuationReport:
    """Exact valuation with witness coefficient, or a "> value" lower bound."""

    kind: str              # "exact" | "lower-bound"
    value: int
    witness: int | None = None   # coefficient code for exact reports
    context: dict | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "lower-bound"):
            raise ValueError(f"bad valuation kind {self.kind!r}")
        if self.kind == "exact" and not self.witness:
            raise ValueError("exact valuation requires a nonzero witness")

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def __str__(self):
        return str(self.value) if self.is_exact else f">{self.value}"


def series_inv_coeffs(field: Field, u: list[int], m: int,
                      newton: bool = True) -> list[int]:
    """Inverse of a unit power series mod x^(m+1).

    Newton iteration doubling the precision; the schoolbook long division
    below is the test oracle.
    """
    if not u or u[0] == 0:
        raise ZeroDivisionError("series inversion needs a unit constant term")
    if not newton:
        return _series_inv_schoolbook(field, u, m)
    inv0 = field.inv(u[0])
    v = [inv0]
    prec = 1
    mul, add, neg = field.mul_table, field.add_table, field.neg_table
    while prec <= m:
        prec = min(2 * prec, m + 1)
        ut = u[:prec]
        # w = u*v mod x^prec
        w = [0] * prec
        for i, vi in enumerate(v):
            if vi:
                row = mul[vi]
                for j, uj in enumerate(ut):
                    if uj and i + j < prec:
                        w[i + j] = int(add[w[i + j], row[uj]])
        # v <- v*(2 - w)
        two_minus_w = [int(neg[c]) for c in w]
        two_minus_w[0] = field.add(two_minus_w[0], 2 % field.p)
        nv = [0] * prec
        for i, vi in enumerate(v):
            if vi:
                row = mul[vi]
                for j, cj in enumerate(two_minus_w):
                    if cj and i + j < prec:
                        nv[i + j] = int(add[nv[i + j], row[cj]])
        v = nv
    return v[:m + 1]


def _series_inv_schoolbook(field: Field, u: list[int], m: int) -> list[int]:
    inv0 = field.inv(u[0])
    v = [inv0] + [0] * m
    for j in range(1, m + 1):
        acc = 0
        for s in range(1, min(j, len(u) - 1) + 1):
            if u[s] and v[j - s]:
                acc = field.add(acc, field.mul(u[s], v[j - s]))
        v[j] = field.mul(field.neg(acc), inv0)
    return v


class LaurentSeries:
    """Immutable truncated expansion in 1/t with a knowledge horizon."""

    __slots__ = ("field", "horizon", "first", "coeffs")

    def __init__(self, field: Field, horizon: int, first: int | None,
                 coeffs=()):
        cs = [int(c) for c in coeffs]
        # normalize: strip leading zeros (advancing first) and trailing zeros
        if first is not None:
            while cs and cs[0] == 0:
                cs.pop(0)
                first += 1
            while cs and cs[-1] == 0:
                cs.pop()
            if first is not None and cs and first + len(cs) - 1 > horizon:
                raise HorizonError("coefficients stored beyond horizon")
        if not cs:
            first = None
        self.field = field
        self.horizon = int(horizon)
        self.first = first
        self.coeffs = tuple(cs)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def zero(cls, field: Field, horizon: int) -> "LaurentSeries":
        return cls(field, horizon, None)

    @classmethod
    def one(cls, field: Field, horizon: int) -> "LaurentSeries":
        return cls(field, horizon, 0, (1,))

    @classmethod
    def from_coeffs(cls, field: Field, horizon: int, first: int,
                    coeffs) -> "LaurentSeries":
        return cls(field, horizon, first, coeffs)

    @classmethod
    def from_poly(cls, f: Poly, horizon: int) -> "LaurentSeries":
        if f.is_zero():
            return cls.zero(f.field, horizon)
        return cls(f.field, horizon, -f.degree, tuple(reversed(f.coeffs)))

    @classmethod
    def from_rational(cls, num: Poly, den: Poly, horizon: int,
                      newton: bool = True) -> "LaurentSeries":
        """Expansion of num/den at infinity, correct through t^(-horizon)."""
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.field != den.field:
            raise FieldMismatchError("numerator and denominator fields differ")
        if num.is_zero():
            return cls.zero(num.field, horizon)
        v = den.degree - num.degree
        m = horizon - v
        if m < 0:
            return cls.zero(num.field, horizon)
        rnum = list(reversed(num.coeffs))
        rden = list(reversed(den.coeffs))
        inv_den = series_inv_coeffs(num.field, rden, m, newton=newton)
        f = num.field
        out = [0] * (m + 1)
        mul, add = f.mul_table, f.add_table
        for i, a in enumerate(rnum):
            if a and i <= m:
                row = mul[a]
                for j, b in enumerate(inv_den):
                    if b and i + j <= m:
                        out[i + j] = int(add[out[i + j], row[b]])
        return cls(f, horizon, v, out)

    # -- queries -----------------------------------------------------------------

    def is_zero_to_horizon(self) -> bool:
        return self.first is None

    def coefficient(self, j: int) -> int:
        if j > self.horizon:
            raise HorizonError(f"coefficient t^(-{j}) beyond horizon {self.horizon}")
        if self.first is None or j < self.first:
            return 0
        idx = j - self.first
        return self.coeffs[idx] if idx < len(self.coeffs) else 0

    def valuation_lower_bound(self) -> int:
        """Largest v such that the valuation is known to be >= v."""
        return self.first if self.first is not None else self.horizon + 1

    def valuation_report(self, context: dict | None = None) -> ValuationReport:
        if self.first is None:
            return ValuationReport("lower-bound", self.horizon, context=context)
        return ValuationReport("exact", self.first, witness=self.coeffs[0],
                               context=context)

    def support(self) -> list[int]:
        if self.first is None:
            return []
        return [self.first + i for i, c in enumerate(self.coeffs) if c]

    def __eq__(self, other):
        return (isinstance(other, LaurentSeries) and other.field == self.field
                and other.horizon == self.horizon and other.first == self.first
                and other.coeffs == self.coeffs)

    def __hash__(self):
        return hash((self.field.name, self.horizon, self.first, self.coeffs))

    def agrees_with(self, other: "LaurentSeries", through: int | None = None) -> bool:
        """Equality of coefficients through min(horizons) (or `through`)."""
        n = min(self.horizon, other.horizon)
        if through is not None:
            n = min(n, through)
        lo = min(self.first if self.first is not None else n + 1,
                 other.first if other.first is not None else n + 1)
        return all(self.coefficient(j) == other.coefficient(j)
                   for j in range(lo, n + 1))

    def __str__(self):
        if self.first is None:
            return f"O(t^-{self.horizon + 1})"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                j = self.first + i
                mono = "1" if j == 0 else (f"t^{-j}" if j < 0 else f"t^-{j}")
                parts.append(mono if c == 1 else f"{c}*{mono}")
            if len(parts) > 7:
                parts.append("...")
                break
        parts.append(f"+ O(t^-{self.horizon + 1})")
        return " + ".join(parts)

    def __repr__(self):
        return f"LaurentSeries({self.field.name}, N={self.horizon}, {self})"

    # -- arithmetic -----------------------------------------------------------------

    def _check(self, other: "LaurentSeries"):
        if self.field != other.field:
            raise FieldMismatchError(f"{self.field.name} vs {other.field.name}")

    def truncate(self, horizon: int) -> "LaurentSeries":
        if horizon >= self.horizon:
            return self
        if self.first is None:
            return LaurentSeries.zero(self.field, horizon)
        keep = [c for i, c in enumerate(self.coeffs)
                if self.first + i <= horizon]
        return LaurentSeries(self.field, horizon, self.first, keep)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by t^(-k): indices and horizon move by k."""
        return LaurentSeries(self.field, self.horizon + k,
                             None if self.first is None else self.first + k,
                             self.coeffs)

    def scale(self, c: int) -> "LaurentSeries":
        if c == 0:
            return LaurentSeries.zero(self.field, self.horizon)
        row = self.field.mul_table[c]
        return LaurentSeries(self.field, self.horizon, self.first,
                             (int(row[x]) for x in self.coeffs))

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        n = min(self.horizon, other.horizon)
        if self.first is None and other.first is None:
            return LaurentSeries.zero(self.field, n)
        lo = min(x for x in (self.first, other.first) if x is not None)
        add = self.field.add_table
        out = [int(add[self.coefficient(j), other.coefficient(j)])
               for j in range(lo, n + 1)]
        return LaurentSeries(self.field, n, lo, out)

    def __neg__(self) -> "LaurentSeries":
        neg = self.field.neg_table
        return LaurentSeries(self.field, self.horizon, self.first,
                             (int(neg[c]) for c in self.coeffs))

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        va = self.first if self.first is not None else self.horizon + 1
        vb = other.first if other.first is not None else other.horizon + 1
        n = min(self.horizon + vb, other.horizon + va)
        if self.first is None or other.first is None:
            return LaurentSeries.zero(self.field, n)
        f = self.field
        m = n - va - vb
        if m < 0:
            return LaurentSeries.zero(self.field, n)
        out = [0] * (m + 1)
        mul, add = f.mul_table, f.add_table
        for i, a in enumerate(self.coeffs):
            if a and i <= m:
                row = mul[a]
                for j, b in enumerate(other.coeffs):
                    if b and i + j <= m:
                        out[i + j] = int(add[out[i + j], row[b]])
        return LaurentSeries(f, n, va + vb, out)

    def inverse(self) -> "LaurentSeries":
        """Unit inverse; requires a witnessed valuation within the horizon."""
        if self.first is None:
            raise HorizonError(
                "valuation unknown: cannot invert a series that is zero to horizon")
        v = self.first
        m = self.horizon - 2 * v
        out_first = -v
        if m < 0:
            raise HorizonError("horizon too small to justify any inverse coefficient")
        inv = series_inv_coeffs(self.field, list(self.coeffs), m)
        return LaurentSeries(self.field, self.horizon - 2 * v, out_first, inv)

    def __pow__(self, e: int) -> "LaurentSeries":
        if e < 0:
            return self.inverse() ** (-e)
        if e == 0:
            return LaurentSeries.one(self.field, self.horizon)
        result = self
        # repeated multiplication keeps the horizon bookkeeping honest
        for _ in range(e - 1):
            result = result * self
        return result

    def frobenius_power(self, e: int = 1) -> "LaurentSeries":
        """p^e-th power: exact (indices spread, coefficients Frobenius'd)."""
        f = self.field
        pe = f.p**e
        new_horizon = pe * (self.horizon + 1) - 1
        if self.first is None:
            return LaurentSeries.zero(f, new_horizon)
        out = [0] * (pe * (len(self.coeffs) - 1) + 1)
        for i, c in enumerate(self.coeffs):
            x = c
            for _ in range(e):
                x = f.frobenius(x)
            out[pe * i] = x
        return LaurentSeries(f, new_horizon, pe * self.first, out)

    # -- serialization ------------------------------------------------------------------

    def to_json(self) -> dict:
        return {"field": self.field.name, "horizon": self.horizon,
                "first_index": self.first, "coeff_codes": list(self.coeffs)}

    @classmethod
    def from_json(cls, obj: dict, field: Field | None = None) -> "LaurentSeries":
        from .ffield import field_from_name
        f = field if field is not None else field_from_name(obj["field"])
        if f.name != obj["field"]:
            raise FieldMismatchError(
                f"series field {obj['field']} does not match {f.name}")
        return cls(f, obj["horizon"], obj["first_index"], obj["coeff_codes"])


# ---------------------------------------------------------------------------
# single prime-term expansions (reference path; the engine has a batch kernel)

def gp_numerator_coeffs(p: int) -> list[int]:
    """Integer coefficients of ((1-u^p) - (1-u)^p)/p, index = power of u."""
    from math import comb
    minus = [comb(p, i) * (-1)**i for i in range(p + 1)]  # (1-u)^p
    num = [-c for c in minus]
    num[0] += 1
    num[p] -= 1
    assert all(c % p == 0 for c in num)
    return [c // p for c in num]


def gp_term_fraction(prime: Poly, k: int) -> tuple[Poly, Poly]:
    """G_p(prime^-k) as an exact fraction of polynomials."""
    f = prime.field
    p = f.p
    coeffs = gp_numerator_coeffs(p)
    num = Poly.zero(f)
    for i in range(1, p + 1):
        c = coeffs[i] % p
        if c:
            num = num + (prime ** ((p - i) * k)).scale(c)
    den = (prime**k - Poly.one(f)) ** p
    return num, den


def term_fraction(prime: Poly, k: int, kind: str) -> tuple[Poly, Poly]:
    """The summand for one prime as an exact fraction (num, den)."""
    f = prime.field
    if kind == "CONJ_A":
        return Poly.one(f), Poly.one(f) + prime
    if kind == "PK":
        return Poly.one(f), Poly.one(f) - prime**k
    if kind == "GP":
        return gp_term_fraction(prime, k)
    raise ValueError(f"unknown term kind {kind!r}")


def reciprocal_prime_term(prime: Poly, k: int, kind: str,
                          horizon: int) -> LaurentSeries:
    """Series of 1/(1-prime^k), 1/(1+prime), or G_p(prime^-k) through t^-horizon."""
    if not prime.is_monic() or prime.degree < 1:
        raise ValueError("prime term requires a monic polynomial of degree >= 1")
    num, den = term_fraction(prime, k, kind)
    return LaurentSeries.from_rational(num, den, horizon)
