"""Restricted Newton-Girard combinatorics mod 2 and mod 4.

Power sums are expanded in the elementary symmetric functions e_i and
restricted to indices of the form 2^k - 1 (variables E_k := e_{2^k-1});
the coefficient of the monomial prod E_k^{R_k} in p_m is the single term

    (-1)^(m+S) * m * (S-1)! / prod R_k!        with S = sum R_k,

taken over solutions of sum (2^k - 1) R_k = m.  Coefficients are reduced
mod 2 / mod 4 without big factorials: the 2-adic valuation comes from
Legendre's formula and the odd part mod 4 from the odd-factorial
recursion; a big-integer factorial oracle and the Lucas no-carry
criterion cross-check both in the test suite.

Hard budget: exponent vectors up to k <= 6 in partition enumeration,
weight up to 2*(2^6 - 1) = 126.
"""

from math import factorial

from .carlitz import carlitz_seq
from .errors import PrimeSumsError
from .fqpoly import Poly
from .ratfun import RatFun, tree_sum

K_MAX = 6
WEIGHT_CAP = 2 * (2**K_MAX - 1)


def _trim(exps: tuple[int, ...]) -> tuple[int, ...]:
    e = list(exps)
    while e and e[-1] == 0:
        e.pop()
    return tuple(e)


class SymPoly:
    """Sparse polynomial over Z/2 or Z/4 in the variables E_k = e_{2^k-1}.

    Keys are exponent tuples (R_1, R_2, ...) with trailing zeros trimmed;
    values are nonzero residues.
    """

    __slots__ = ("modulus", "terms")

    def __init__(self, modulus: int, terms=None):
        if modulus not in (2, 4):
            raise ValueError("modulus must be 2 or 4")
        self.modulus = modulus
        clean = {}
        for exps, c in (terms or {}).items():
            c %= modulus
            if c:
                clean[_trim(tuple(exps))] = c
        self.terms = clean

    @classmethod
    def zero(cls, modulus: int = 2) -> "SymPoly":
        return cls(modulus, {})

    @classmethod
    def one(cls, modulus: int = 2) -> "SymPoly":
        return cls(modulus, {(): 1})

    @classmethod
    def variable(cls, k: int, modulus: int = 2) -> "SymPoly":
        """E_k = e_{2^k - 1}."""
        exps = tuple(0 if i != k else 1 for i in range(1, k + 1))
        return cls(modulus, {exps: 1})

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> set[tuple[int, ...]]:
        return set(self.terms)

    def weight(self) -> int | None:
        """Common weight sum (2^k - 1) R_k if homogeneous, else None."""
        ws = {sum((2 ** (i + 1) - 1) * r for i, r in enumerate(m))
              for m in self.terms}
        if not ws:
            return 0
        return ws.pop() if len(ws) == 1 else None

    def __eq__(self, other):
        return (isinstance(other, SymPoly) and other.modulus == self.modulus
                and other.terms == self.terms)

    def __hash__(self):
        return hash((self.modulus, tuple(sorted(self.terms.items()))))

    def __add__(self, other: "SymPoly") -> "SymPoly":
        if other.modulus != self.modulus:
            raise ValueError("modulus mismatch")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = (out.get(m, 0) + c) % self.modulus
        return SymPoly(self.modulus, out)

    def __neg__(self) -> "SymPoly":
        return SymPoly(self.modulus,
                       {m: self.modulus - c for m, c in self.terms.items()})

    def __sub__(self, other: "SymPoly") -> "SymPoly":
        return self + (-other)

    def scale(self, c: int) -> "SymPoly":
        return SymPoly(self.modulus,
                       {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: "SymPoly") -> "SymPoly":
        if other.modulus != self.modulus:
            raise ValueError("modulus mismatch")
        out: dict[tuple, int] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                n = max(len(ma), len(mb))
                key = _trim(tuple((ma[i] if i < len(ma) else 0)
                                  + (mb[i] if i < len(mb) else 0)
                                  for i in range(n)))
                out[key] = (out.get(key, 0) + ca * cb) % self.modulus
        return SymPoly(self.modulus, out)

    def __pow__(self, e: int) -> "SymPoly":
        result = SymPoly.one(self.modulus)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def square_lifted_mod4(self) -> "SymPoly":
        """The square of a mod-2 polynomial, as a mod-4 polynomial.

        Valid because (sum a_i M_i)^2 mod 4 depends only on a_i mod 2.
        """
        if self.modulus != 2:
            raise ValueError("square lift starts from a mod-2 polynomial")
        items = sorted(self.terms)
        out: dict[tuple, int] = {}

        def addmono(ma, mb, c):
            n = max(len(ma), len(mb))
            key = _trim(tuple((ma[i] if i < len(ma) else 0)
                              + (mb[i] if i < len(mb) else 0)
                              for i in range(n)))
            out[key] = (out.get(key, 0) + c) % 4

        for i, m in enumerate(items):
            addmono(m, m, 1)
            for m2 in items[i + 1:]:
                addmono(m, m2, 2)
        return SymPoly(4, out)

    def halved(self) -> "SymPoly":
        """Exact division by 2: mod-4 with even coefficients -> mod-2."""
        if self.modulus != 4:
            raise ValueError("halving starts from a mod-4 polynomial")
        out = {}
        for m, c in self.terms.items():
            if c % 2:
                raise PrimeSumsError(
                    f"internal consistency error: odd coefficient {c} at {m}")
            out[m] = c // 2
        return SymPoly(2, out)

    def reduced_mod2(self) -> "SymPoly":
        return SymPoly(2, self.terms)

    def pretty(self) -> str:
        """e-notation, variables in descending index order."""
        if not self.terms:
            return "0"
        def key(m):
            return tuple(-(m[i] if i < len(m) else 0)
                         for i in range(K_MAX + 2, -1, -1))
        parts = []
        for m in sorted(self.terms, key=key):
            c = self.terms[m]
            factors = []
            for i in range(len(m) - 1, -1, -1):
                r = m[i]
                if r:
                    name = f"e_{2 ** (i + 1) - 1}"
                    factors.append(name if r == 1 else f"{name}^{r}")
            mono = "*".join(factors) if factors else "1"
            parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"SymPoly(mod {self.modulus}: {self.pretty()})"


# ---------------------------------------------------------------------------
# partitions and Newton-Girard coefficients

def restricted_partitions(m: int, k_max: int = K_MAX) -> list[tuple[int, ...]]:
    """Solutions (R_1, ..., R_k_max) of sum (2^k - 1) R_k = m.

    Deterministic order: lexicographic ascending in (R_k_max, ..., R_2);
    R_1 absorbs the remainder.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > WEIGHT_CAP:
        raise PrimeSumsError(f"weight {m} beyond hard budget {WEIGHT_CAP}")
    out: list[tuple[int, ...]] = []

    def outer(k: int, rest: int, acc: list[int]):
        if k == 1:
            out.append(tuple([rest] + acc))
            return
        nk = 2**k - 1
        for r in range(rest // nk + 1):
            outer(k - 1, rest - r * nk, [r] + acc)

    outer(k_max, m, [])
    # sort by (R_kmax, ..., R_2) ascending for a documented total order
    out.sort(key=lambda t: tuple(reversed(t[1:])))
    return out


def _v2_factorial(n: int) -> int:
    """Legendre: v_2(n!) = n - s_2(n)."""
    return n - bin(n).count("1") if n > 0 else 0


_ODDFACT4_CACHE = {0: 1, 1: 1}


def _oddfact4(n: int) -> int:
    """Odd part of n! modulo 4 (standard halving recursion)."""
    if n not in _ODDFACT4_CACHE:
        odd_run = 3 if ((n + 1) // 4) % 2 else 1  # product of odd i <= n, mod 4
        _ODDFACT4_CACHE[n] = _oddfact4(n // 2) * odd_run % 4
    return _ODDFACT4_CACHE[n]


def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1 if n else 0


def _odd4(n: int) -> int:
    return (n >> _v2(n)) % 4


def ng_coefficient(R, m: int, modulus: int = 2) -> int:
    """(-1)^(m+S) * m * (S-1)! / prod R_k!  reduced mod 2 or mod 4."""
    R = tuple(R)
    if sum((2 ** (k + 1) - 1) * r for k, r in enumerate(R)) != m:
        raise ValueError(f"partition {R} has weight != {m}")
    s = sum(R)
    v2 = _v2(m) + _v2_factorial(s - 1) - sum(_v2_factorial(r) for r in R)
    if modulus == 2:
        return 1 if v2 == 0 else 0
    if v2 >= 2:
        return 0
    if v2 == 1:
        return 2
    odd = _odd4(m) * _oddfact4(s - 1) % 4
    for r in R:
        inv = _oddfact4(r)  # odd residues are self-inverse mod 4
        odd = odd * inv % 4
    if (m + s) % 2:
        odd = (-odd) % 4
    return odd


def ng_coefficient_oracle(R, m: int) -> int:
    """Exact integer coefficient via big factorials (test oracle)."""
    R = tuple(R)
    s = sum(R)
    num = m * factorial(s - 1)
    den = 1
    for r in R:
        den *= factorial(r)
    assert num % den == 0
    val = num // den
    return -val if (m + s) % 2 else val


def lucas_no_carry(R) -> bool:
    """Lucas: the multinomial (sum R)! / prod R! is odd iff no base-2 clash."""
    acc = 0
    for r in R:
        if acc & r:
            return False
        acc |= r
    return True


def restricted_power_sum(m: int, modulus: int = 2,
                         k_max: int = K_MAX) -> SymPoly:
    """p_m restricted to E-variables, coefficients mod 2 or mod 4."""
    terms: dict[tuple, int] = {}
    for R in restricted_partitions(m, k_max):
        c = ng_coefficient(R, m, modulus)
        if c:
            key = _trim(R)
            terms[key] = (terms.get(key, 0) + c) % modulus
    return SymPoly(modulus, terms)


# ---------------------------------------------------------------------------
# the square-root identity: X_n, Y_n

def _x_and_f(n: int) -> tuple[list[SymPoly], list[SymPoly]]:
    """X_1..X_n together with the helper sequence f_0..f_{n-1} (mod 2)."""
    e1 = SymPoly.variable(1)
    X: list[SymPoly] = [SymPoly.zero(), SymPoly.zero()]  # X_0 (unused), X_1 = 0
    f: list[SymPoly] = [SymPoly.one()]
    for i in range(1, n + 1):
        if i >= 2:
            xi = SymPoly.zero()
            for k in range(i - 1):  # k = 0 .. i-2
                xi = xi + SymPoly.variable(i - k) ** (2**k) * f[k]
            X.append(xi)
        if len(f) <= i:
            f.append(f[i - 1] * e1 ** (2 ** (i - 1)) + X[i])
    return X, f


def x_n(n: int) -> SymPoly:
    """X_n = sum_{k=0}^{n-2} e_{2^(n-k)-1}^(2^k) f_k (f-recursion form)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _x_and_f(n)[0][n]


def x_n_nested(n: int) -> SymPoly:
    """Alternate nested form, recursing on X only.

    Bracket for index k is sum_{j=0}^{k} e_1^(2^k - 2^j) X~_j with the
    convention X~_0 = 1 (the empty exponent sum for j = k gives X_k).
    """
    memo: dict[int, SymPoly] = {1: SymPoly.zero()}
    e1 = SymPoly.variable(1)

    def X(i: int) -> SymPoly:
        if i not in memo:
            acc = SymPoly.zero()
            for k in range(i - 1):
                acc = acc + SymPoly.variable(i - k) ** (2**k) * bracket(k)
            memo[i] = acc
        return memo[i]

    def bracket(k: int) -> SymPoly:
        acc = e1 ** (2**k - 1)  # j = 0 term with X~_0 = 1
        for j in range(1, k + 1):
            acc = acc + e1 ** (2**k - 2**j) * X(j)
        return acc

    return X(n) if n >= 1 else SymPoly.zero()


def y_n(n: int) -> SymPoly:
    """(p_{2^n-1}^2 - p_{2(2^n-1)}) / 2 restricted, as a mod-2 polynomial.

    The square is lifted from the mod-2 power sum; the halving checks
    evenness of every coefficient and raises on violation.
    """
    if not 2 <= n:
        raise ValueError("n must be >= 2")
    m = 2**n - 1
    if 2 * m > WEIGHT_CAP:
        raise PrimeSumsError(f"Y_{n} weight {2*m} beyond budget {WEIGHT_CAP}")
    p_small = restricted_power_sum(m, 2)
    t1 = p_small.square_lifted_mod4()
    t2 = restricted_power_sum(2 * m, 4)
    return (t1 - t2).halved()


def second_half_monomials(n: int) -> set[tuple[int, ...]]:
    """Monomials of p_{2^n-1} mod 2 whose e_1 exponent is <= 2^(n-1) - 1."""
    p = restricted_power_sum(2**n - 1, 2)
    bound = 2 ** (n - 1) - 1
    return {m for m in p.monomials() if (m[0] if m else 0) <= bound}


def specialize_to_carlitz(s: SymPoly) -> RatFun:
    """Substitute E_i -> 1/D_i (q = 2) and sum exactly."""
    if s.modulus != 2:
        raise ValueError("specialization is defined for mod-2 polynomials")
    seq = carlitz_seq(2)
    f = seq.field
    if s.is_zero():
        return RatFun.zero(f)
    terms = []
    for mono in sorted(s.terms):
        den = Poly.one(f)
        for i, r in enumerate(mono):
            if r:
                den = den * seq.D(i + 1) ** r
        terms.append(RatFun(Poly.one(f), den))
    return tree_sum(terms)


# ---------------------------------------------------------------------------
# full Newton-Girard oracle over all e_i (integer coefficients, small m)

def full_power_sum(m: int) -> dict[tuple[int, ...], int]:
    """p_m in all elementary symmetric e_1..e_m with exact integer coefficients.

    Newton recurrence p_m = sum_{i<m} (-1)^(i-1) e_i p_{m-i} + (-1)^(m-1) m e_m.
    Keys are exponent tuples over e_1..e_m (trimmed).  Exponential in m;
    test scales only.
    """
    ps: list[dict[tuple[int, ...], int]] = [{(): 0}]

    def e_times(poly, i):
        out = {}
        for mono, c in poly.items():
            key = list(mono) + [0] * max(0, i - len(mono))
            key[i - 1] += 1
            out[_trim(tuple(key))] = c
        return out

    for mm in range(1, m + 1):
        acc: dict[tuple[int, ...], int] = {}
        for i in range(1, mm):
            sign = 1 if (i - 1) % 2 == 0 else -1
            for mono, c in e_times(ps[mm - i], i).items():
                acc[mono] = acc.get(mono, 0) + sign * c
        sign = 1 if (mm - 1) % 2 == 0 else -1
        em = tuple([0] * (mm - 1) + [1])
        acc[_trim(em)] = acc.get(_trim(em), 0) + sign * mm
        ps.append({k: v for k, v in acc.items() if v})
    return ps[m]


def restrict_full(poly: dict[tuple[int, ...], int]) -> dict[tuple[int, ...], int]:
    """Drop monomials containing e_i with i not of the form 2^k - 1."""
    allowed = {2**k - 1 for k in range(1, 20)}
    out = {}
    for mono, c in poly.items():
        rs = []
        ok = True
        for i, r in enumerate(mono, start=1):
            if r and i not in allowed:
                ok = False
                break
        if not ok:
            continue
        kmax = 0
        k = 1
        while 2**k - 1 <= len(mono):
            kmax = k
            k += 1
        rs = [0] * kmax
        for k in range(1, kmax + 1):
            idx = 2**k - 1
            rs[k - 1] = mono[idx - 1] if idx <= len(mono) else 0
        out[_trim(tuple(rs))] = c
    return out
