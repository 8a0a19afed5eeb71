"""Deformed zeta cross-check: an oracle for P(k) independent of prime sums.

zeta(x, k) truncated to monic a with deg a <= D is summed by direct
enumeration of ALL monic polynomials (exponential in D, so budgets are
small by design), with the x-exponent Omega(a) read from the
smallest-prime-factor table.  Its logarithmic derivative at x = 1 equals
-P(k) up to terms of valuation beyond k*(D+1)-1, and its slices must
match the Euler product over primes of degree <= D; both checks run in
the suite, making this a true independent oracle for the engine.
"""

import numpy as np

from .batch import VecField, batch_term_sum
from .errors import HorizonError, UsageError
from .ffield import Field, field_for_q
from .fqpoly import Poly
from .laurent import LaurentSeries, ValuationReport, reciprocal_prime_term
from .sieve import OmegaTable, encodings_to_digits
from .streams import PrimeStream

__all__ = ["OmegaTable", "ZetaTrunc", "omega_sieve", "zeta_truncated",
           "log_derivative_check", "euler_product_slices",
           "euler_product_matches"]


def omega_sieve(q: int, max_degree: int, field: Field | None = None) -> OmegaTable:
    """Smallest-prime-factor table over canonical encodings (spec alias)."""
    return OmegaTable(field if field is not None else field_for_q(q),
                      max_degree)


class ZetaTrunc:
    """x-slices of zeta(x, k) over monic a with deg a <= D, common horizon."""

    def __init__(self, field: Field, k: int, max_degree: int, horizon: int,
                 slices: dict[int, LaurentSeries]):
        self.field = field
        self.k = k
        self.max_degree = max_degree
        self.horizon = horizon
        self.slices = slices

    def slice(self, omega: int) -> LaurentSeries:
        return self.slices.get(omega,
                               LaurentSeries.zero(self.field, self.horizon))

    def at_x1(self) -> LaurentSeries:
        total = LaurentSeries.zero(self.field, self.horizon)
        for s in self.slices.values():
            total = total + s
        return total

    def derivative_at_x1(self) -> LaurentSeries:
        total = LaurentSeries.zero(self.field, self.horizon)
        for omega, s in self.slices.items():
            total = total + s.scale(omega % self.field.p)
        return total


def zeta_truncated(q: int, k: int, max_degree: int,
                   horizon: int | None = None,
                   field: Field | None = None,
                   omega_table: OmegaTable | None = None) -> ZetaTrunc:
    """Slices of sum_{deg a <= D} x^Omega(a) / a^k, coefficients through
    the determinable horizon (at most k*(D+1)-1)."""
    f = field if field is not None else field_for_q(q)
    determinable = k * (max_degree + 1) - 1
    n = determinable if horizon is None else horizon
    if n > determinable:
        raise HorizonError(
            f"horizon {n} not determinable from degree <= {max_degree}; "
            f"maximum is {determinable}")
    table = omega_table if omega_table is not None else OmegaTable(f, max_degree)
    vf = VecField(f)
    acc: dict[int, np.ndarray] = {0: None}
    slices = {0: LaurentSeries.one(f, n)}  # a = 1
    for d in range(1, max_degree + 1):
        omegas = table.omegas_for_degree(d)
        encs = np.arange(f.q**d, 2 * f.q**d, dtype=np.int64)
        for omega in sorted(set(int(w) for w in omegas)):
            sel = encs[omegas == omega]
            digits = encodings_to_digits(f.q, sel, d)
            arr, _ = batch_term_sum(f, digits, d, "INV_POWER", k, n)
            prev = acc.get(omega)
            acc[omega] = arr if prev is None else vf.add(prev, arr)
    for omega, arr in acc.items():
        if arr is None:
            continue
        ser = LaurentSeries(f, n, 0, [int(c) for c in arr])
        slices[omega] = slices.get(omega, LaurentSeries.zero(f, n)) + ser
    return ZetaTrunc(f, k, max_degree, n, slices)


def log_derivative_check(q: int, k: int, max_degree: int,
                         engine_cumulative: LaurentSeries | None = None,
                         field: Field | None = None) -> ValuationReport:
    """Valuation of (zeta'(1,k)/zeta(1,k) + P_{<=D}(k)); expected zero to
    horizon, reported as a lower bound.

    The division is valid since the omega=0 slice is the unit series.
    """
    f = field if field is not None else field_for_q(q)
    zt = zeta_truncated(q, k, max_degree, field=f)
    n = zt.horizon
    if engine_cumulative is None:
        from .engine import SumSpec, accumulate
        spec = SumSpec(f, "PK", k, max_degree, horizon=n)
        engine_cumulative = accumulate(spec).cumulative[max_degree]
    if engine_cumulative.horizon < n:
        raise HorizonError(
            f"engine horizon {engine_cumulative.horizon} below oracle {n}")
    ratio = zt.derivative_at_x1() * zt.at_x1().inverse()
    diff = (ratio + engine_cumulative.truncate(n)).truncate(n)
    return diff.valuation_report({"q": q, "k": k, "D": max_degree,
                                  "check": "log-derivative"})


def euler_product_slices(q: int, k: int, max_degree: int,
                         horizon: int | None = None,
                         field: Field | None = None) -> dict[int, LaurentSeries]:
    """Slices of prod_{deg P <= D} (1 - x/P^k)^(-1), truncated at x^D.

    Terms x^omega with omega <= D are exact: no monic a of degree <= D has
    more than D prime factors, and omitted a's only raise the x-degree.
    """
    f = field if field is not None else field_for_q(q)
    n = k * (max_degree + 1) - 1 if horizon is None else horizon
    slices = [LaurentSeries.one(f, n)] + \
        [LaurentSeries.zero(f, n) for _ in range(max_degree)]
    for d in range(1, max_degree + 1):
        for prime in PrimeStream(f, d):
            # factor = sum_i x^i / P^(ik), truncated at x-degree D and t-horizon n
            powers = {}
            inv_pk = LaurentSeries.from_rational(Poly.one(f), prime**k, n)
            powers[1] = inv_pk
            i = 2
            while i * k * d <= n and i <= max_degree:
                powers[i] = powers[i - 1] * inv_pk
                i += 1
            new = [LaurentSeries.zero(f, n) for _ in range(max_degree + 1)]
            for omega in range(max_degree + 1):
                acc = slices[omega]
                for i, pw in powers.items():
                    if i <= omega:
                        acc = acc + (slices[omega - i] * pw).truncate(n)
                new[omega] = acc.truncate(n)
            slices = new
    return {i: s for i, s in enumerate(slices)}


def euler_product_matches(q: int, k: int, max_degree: int,
                          field: Field | None = None) -> bool:
    """Slice-by-slice agreement of the direct sum and the Euler product."""
    f = field if field is not None else field_for_q(q)
    zt = zeta_truncated(q, k, max_degree, field=f)
    ep = euler_product_slices(q, k, max_degree, horizon=zt.horizon, field=f)
    for omega in range(max_degree + 1):
        if not zt.slice(omega).agrees_with(ep[omega]):
            return False
    return True
