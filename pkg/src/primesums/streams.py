"""Deterministic streams of monic irreducibles, splittable by encoding range.

A stream yields exactly the monic irreducibles of one degree, each once, in
ascending canonical encoding.  Splitting partitions the encoding range so
enumeration can be distributed or resumed; every split is independently
advanceable and the concatenation of splits equals the whole stream.
"""

import numpy as np

from .errors import BudgetError
from .ffield import Field, field_for_q
from .fqpoly import Poly, bracket, count_irreducibles, is_irreducible
from .sieve import (GENERAL_SIEVE_MAX_CELLS, SIEVE2_MAX_DEGREE, PrimeSieve2,
                    PrimeSieveQ, encodings_to_digits)

TEST_MODE_MAX_CANDIDATES = 1 << 22

_SIEVE2_CACHE: dict[int, PrimeSieve2] = {}
_SIEVEQ_CACHE: dict[tuple[str, int], PrimeSieveQ] = {}


def _sieve2(max_degree: int) -> PrimeSieve2:
    have = [d for d in _SIEVE2_CACHE if d >= max_degree]
    if have:
        return _SIEVE2_CACHE[min(have)]
    sv = PrimeSieve2(max_degree)
    _SIEVE2_CACHE.clear()
    _SIEVE2_CACHE[max_degree] = sv
    return sv


def _sieveq(field: Field, max_degree: int) -> PrimeSieveQ:
    for (name, d), sv in _SIEVEQ_CACHE.items():
        if name == field.name and d >= max_degree:
            return sv
    sv = PrimeSieveQ(field, max_degree)
    _SIEVEQ_CACHE[(field.name, max_degree)] = sv
    return sv


def resolve_mode(field: Field, d: int, mode: str = "auto") -> str:
    if mode not in ("auto", "sieve", "test"):
        raise ValueError(f"unknown enumeration mode {mode!r}")
    if mode != "auto":
        return mode
    if field.q == 2 and d <= SIEVE2_MAX_DEGREE:
        return "sieve"
    if field.q > 2 and field.q**d <= GENERAL_SIEVE_MAX_CELLS:
        return "sieve"
    return "test"


class PrimeStream:
    """Monic irreducibles of degree d over F_q in one encoding sub-range."""

    def __init__(self, field: Field, d: int, start: int | None = None,
                 stop: int | None = None, mode: str = "auto"):
        if d < 1:
            raise ValueError("degree must be >= 1")
        self.field = field
        self.d = d
        q = field.q
        self.start = q**d if start is None else max(start, q**d)
        self.stop = 2 * q**d if stop is None else min(stop, 2 * q**d)
        self.mode = resolve_mode(field, d, mode)

    def split(self, n: int) -> list["PrimeStream"]:
        """n contiguous sub-streams covering this range exactly."""
        span = self.stop - self.start
        bounds = [self.start + span * i // n for i in range(n + 1)]
        return [PrimeStream(self.field, self.d, bounds[i], bounds[i + 1],
                            self.mode) for i in range(n)]

    def encodings(self) -> np.ndarray:
        if self.mode == "sieve":
            if self.field.q == 2:
                enc = _sieve2(self.d).prime_encodings(self.d)
            else:
                enc = _sieveq(self.field, self.d).prime_encodings(self.d)
            return enc[(enc >= self.start) & (enc < self.stop)]
        n_candidates = self.stop - self.start
        if n_candidates > TEST_MODE_MAX_CANDIDATES:
            raise BudgetError(
                f"test-mode enumeration over {n_candidates} candidates "
                f"exceeds budget; use sieve mode or lower the degree")
        out = []
        for enc in range(self.start, self.stop):
            f = Poly.decode(self.field, enc)
            if is_irreducible(f):
                out.append(enc)
        return np.asarray(out, dtype=np.int64)

    def digit_matrix(self) -> np.ndarray:
        """(n, d+1) uint8 coefficient digits, ascending encoding."""
        return encodings_to_digits(self.field.q, self.encodings(), self.d)

    def __iter__(self):
        for enc in self.encodings():
            yield Poly.decode(self.field, int(enc))

    def count(self) -> int:
        return len(self.encodings())


def iter_irreducibles(q: int, d: int, mode: str = "auto",
                      field: Field | None = None) -> PrimeStream:
    """The full degree-d stream for F_q (spec: deterministic, splittable)."""
    return PrimeStream(field if field is not None else field_for_q(q), d,
                       mode=mode)


def product_primes_dividing(q: int, n: int, field: Field | None = None) -> Poly:
    """Product of all monic primes of degree dividing n; equals bracket(q, n)."""
    field = field if field is not None else field_for_q(q)
    acc = Poly.one(field)
    for d in range(1, n + 1):
        if n % d == 0:
            for p in iter_irreducibles(q, d, field=field):
                acc = acc * p
    return acc


def expected_count(q: int, d: int) -> int:
    return count_irreducibles(q, d)


__all__ = ["PrimeStream", "iter_irreducibles", "product_primes_dividing",
           "resolve_mode", "expected_count", "bracket"]
