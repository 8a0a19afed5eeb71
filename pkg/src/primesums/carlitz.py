"""Carlitz module sequences [n], D_n, L_n, A_n and the log/exp identities.

Standard recursions: D_0 = L_0 = 1, D_n = [n] * D_{n-1}^q, L_n = [n] * L_{n-1}.
The reciprocals 1/D_n and (-1)^n/L_n are the coefficients of the Carlitz
exponential and logarithm; composing the two and equating coefficients of
z^(q^n) yields the vanishing identity checked here.

All polynomials are exact; the q=2 budget (n <= 10, deg D_10 = 10240) is
comfortable.
"""

from .ffield import Field, field_for_q
from .fqpoly import Poly, bracket
from .ratfun import RatFun, tree_sum


class CarlitzSeq:
    """Memoized D_n and L_n for one field; build-once, read-only."""

    def __init__(self, field: Field):
        self.field = field
        self._d: dict[int, Poly] = {0: Poly.one(field)}
        self._l: dict[int, Poly] = {0: Poly.one(field)}

    def D(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("n must be >= 0")
        if n not in self._d:
            prev = self.D(n - 1)
            self._d[n] = bracket(self.field, n) * prev**self.field.q
        return self._d[n]

    def L(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("n must be >= 0")
        if n not in self._l:
            self._l[n] = bracket(self.field, n) * self.L(n - 1)
        return self._l[n]


_SEQS: dict[str, CarlitzSeq] = {}


def carlitz_seq(q: int = 2) -> CarlitzSeq:
    field = field_for_q(q)
    seq = _SEQS.get(field.name)
    if seq is None:
        seq = CarlitzSeq(field)
        _SEQS[field.name] = seq
    return seq


def carlitz_D(n: int, q: int = 2) -> Poly:
    return carlitz_seq(q).D(n)


def carlitz_L(n: int, q: int = 2) -> Poly:
    return carlitz_seq(q).L(n)


def carlitz_A(n: int) -> tuple[Poly, Poly]:
    """A_n = [n-1] / (L_n * [1]^(2^(n-1))) for q = 2, n >= 2; as (num, den)."""
    if n < 2:
        raise ValueError("A_n requires n >= 2")
    seq = carlitz_seq(2)
    f = seq.field
    num = bracket(f, n - 1)
    den = seq.L(n) * bracket(f, 1) ** (2 ** (n - 1))
    return num, den


def exp_log_identity_check(n: int, q: int = 2) -> bool:
    """Whether sum_{k=0..n} (+-1)/(D_{n-k}^(q^k) * L_k) vanishes exactly.

    For q = 2 this is the z^(2^n) coefficient of log(exp(z)) for n > 1.
    For odd characteristic the same operation runs with the alternating
    sign (-1)^k on the logarithm coefficients; that general-q form is an
    extension beyond the char-2 statement and is excluded from acceptance.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seq = carlitz_seq(q)
    f = seq.field
    terms = []
    for k in range(n + 1):
        num = Poly.one(f) if k % 2 == 0 else Poly.constant(f, -1)
        den = seq.D(n - k) ** (q**k) * seq.L(k)
        terms.append(RatFun(num, den))
    return tree_sum(terms).is_zero()


def telescoping_lemma_check(k: int) -> bool:
    """1/L_{k+1} + 1/(L_k*[1]^(2^k)) == [k]/(L_{k+1}*[1]^(2^k)), exactly (q=2).

    Equivalent single-step form of the A_n recursion: adding the two
    tail terms of the exp/log identity reproduces A_{k+1}.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    seq = carlitz_seq(2)
    f = seq.field
    one = Poly.one(f)
    b1 = bracket(f, 1)
    lhs = RatFun(one, seq.L(k + 1)) + RatFun(one, seq.L(k) * b1 ** (2**k))
    rhs = RatFun(bracket(f, k), seq.L(k + 1) * b1 ** (2**k))
    return lhs == rhs


def telescoping_variant_exponent_check(k: int) -> bool:
    """The same identity with [1]^(2^(k+1)) on the right; false already at k=1."""
    seq = carlitz_seq(2)
    f = seq.field
    one = Poly.one(f)
    b1 = bracket(f, 1)
    lhs = RatFun(one, seq.L(k + 1)) + RatFun(one, seq.L(k) * b1 ** (2**k))
    rhs = RatFun(bracket(f, k), seq.L(k + 1) * b1 ** (2 ** (k + 1)))
    return lhs == rhs
