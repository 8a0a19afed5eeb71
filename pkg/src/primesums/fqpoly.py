"""Polynomials over F_q: the universe A = F_q[t].

Dense coefficient sequences (lowest degree first, trailing zeros trimmed)
with a canonical integer encoding: the base-q digit string of coefficient
codes, low to high.  The encoding is the single source of enumeration
order, range splitting and cache keys.

Multiplication has three routes: schoolbook (always available, the
oracle), a carry-less packed-integer path for characteristic 2, and a
Kronecker packed-integer path for odd prime fields (plus a coordinate
wrapper for quadratic extensions).  The fast paths are bit-identical to
schoolbook and tested for equality.
"""

import math

import numpy as np

from .errors import ConstructionError
from .ffield import Field, field_for_q

NEG_INF = -math.inf

_SCHOOLBOOK_CUTOFF = 2048  # coefficient-pair count below which schoolbook wins


# ---------------------------------------------------------------------------
# carry-less and Kronecker packed multiplication helpers

def _bits_from_int(n: int, length: int) -> np.ndarray:
    nbytes = (length + 7) // 8
    raw = n.to_bytes(max(nbytes, (n.bit_length() + 7) // 8), "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    if len(bits) < length:
        bits = np.concatenate([bits, np.zeros(length - len(bits), dtype=np.uint8)])
    return bits[:length]


def _int_from_bits(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def clmul_int(a: int, b: int) -> int:
    """Product in F_2[z] of bit-encoded polynomials."""
    if a == 0 or b == 0:
        return 0
    la, lb = a.bit_length(), b.bit_length()
    if la < lb:
        a, b, la, lb = b, a, lb, la
    if lb <= 512:
        acc = 0
        while b:
            low = b & -b
            acc ^= a << (low.bit_length() - 1)
            b ^= low
        return acc
    # spaced-integer multiply: stride-S lanes cannot carry into each other
    s = lb.bit_length() + 1
    sa = np.zeros(la * s, dtype=np.uint8)
    sa[::s] = _bits_from_int(a, la)
    sb = np.zeros(lb * s, dtype=np.uint8)
    sb[::s] = _bits_from_int(b, lb)
    prod = _int_from_bits(sa) * _int_from_bits(sb)
    out_len = la + lb - 1
    bits = _bits_from_int(prod, out_len * s)
    return _int_from_bits(bits[::s])


_REDUCE_TABLES: dict[str, np.ndarray] = {}


def _char2_reduce_table(field: Field) -> np.ndarray:
    """Map bit-encoded F_2[u] values of degree < 2m-1 to field codes."""
    tab = _REDUCE_TABLES.get(field.name)
    if tab is None:
        w = 2 * field.m - 1
        mod_bits = 0
        for i, c in enumerate(field.modulus):
            mod_bits |= (c & 1) << i
        out = np.zeros(1 << w, dtype=np.uint8)
        for v in range(1 << w):
            x = v
            for bit in range(w - 1, field.m - 1, -1):
                if x >> bit & 1:
                    x ^= mod_bits << (bit - field.m)
            out[v] = x
        tab = out
        _REDUCE_TABLES[field.name] = tab
    return tab


def _mul_packed_char2(field: Field, a: list[int], b: list[int]) -> list[int]:
    m = field.m
    w = 2 * m - 1
    la, lb = len(a), len(b)

    def pack(coeffs):
        bits = np.zeros(len(coeffs) * w, dtype=np.uint8)
        arr = np.asarray(coeffs, dtype=np.uint16)
        for j in range(m):
            bits[j::w] = (arr >> j) & 1
        return _int_from_bits(bits)

    prod = clmul_int(pack(a), pack(b))
    nt = la + lb - 1
    bits = _bits_from_int(prod, nt * w)
    vals = bits.reshape(nt, w).astype(np.uint32)
    vals = (vals << np.arange(w, dtype=np.uint32)).sum(axis=1)
    return [int(c) for c in _char2_reduce_table(field)[vals]]


def _mul_kronecker_fp(p: int, a: list[int], b: list[int]) -> list[int]:
    la, lb = len(a), len(b)
    maxval = (p - 1) * (p - 1) * min(la, lb)
    width = 2 if maxval < (1 << 16) else 4 if maxval < (1 << 32) else 8
    dtype = {2: "<u2", 4: "<u4", 8: "<u8"}[width]

    def pack(coeffs):
        return int.from_bytes(np.asarray(coeffs, dtype=dtype).tobytes(), "little")

    prod = pack(a) * pack(b)
    n = la + lb - 1
    raw = prod.to_bytes(n * width + width, "little")
    lanes = np.frombuffer(raw, dtype=dtype)[:n].astype(np.int64)
    return [int(c) for c in lanes % p]


def _mul_schoolbook(field: Field, a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    mul = field.mul_table
    add = field.add_table
    for i, ai in enumerate(a):
        if ai:
            row = mul[ai]
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = int(add[out[i + j], row[bj]])
    return out


def _mul_coeffs(field: Field, a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    if len(a) * len(b) <= _SCHOOLBOOK_CUTOFF:
        return _mul_schoolbook(field, a, b)
    if field.p == 2:
        return _mul_packed_char2(field, a, b)
    if field.m == 1:
        return _mul_kronecker_fp(field.p, a, b)
    if field.m == 2:
        return _mul_quadratic_ext(field, a, b)
    return _mul_schoolbook(field, a, b)


def _mul_quadratic_ext(field: Field, a: list[int], b: list[int]) -> list[int]:
    """Coordinate method over F_p for F_{p^2}: four Kronecker products."""
    p = field.p
    c0, c1 = field.modulus[0], field.modulus[1]  # u^2 = -c1*u - c0
    r0, r1 = (-c0) % p, (-c1) % p
    a0 = [x % p for x in a]
    a1 = [x // p for x in a]
    b0 = [x % p for x in b]
    b1 = [x // p for x in b]
    m00 = _mul_kronecker_fp(p, a0, b0)
    m11 = _mul_kronecker_fp(p, a1, b1)
    m01 = _mul_kronecker_fp(p, a0, b1)
    m10 = _mul_kronecker_fp(p, a1, b0)
    n = len(a) + len(b) - 1
    out0 = np.zeros(n, dtype=np.int64)
    out1 = np.zeros(n, dtype=np.int64)
    out0[: len(m00)] += m00
    out0[: len(m11)] += r0 * np.asarray(m11)
    out1[: len(m01)] += m01
    out1[: len(m10)] += m10
    out1[: len(m11)] += r1 * np.asarray(m11)
    codes = (out0 % p) + p * (out1 % p)
    return [int(c) for c in codes]


# ---------------------------------------------------------------------------

class Poly:
    """Dense polynomial over a Field; immutable value semantics."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: Field, coeffs=()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, field: Field) -> "Poly":
        return cls(field, ())

    @classmethod
    def one(cls, field: Field) -> "Poly":
        return cls(field, (1,))

    @classmethod
    def t(cls, field: Field) -> "Poly":
        return cls(field, (0, 1))

    @classmethod
    def monomial(cls, field: Field, deg: int, coeff: int = 1) -> "Poly":
        return cls(field, (0,) * deg + (coeff,))

    @classmethod
    def constant(cls, field: Field, n: int) -> "Poly":
        """Embed an integer via the prime subfield."""
        return cls(field, (n % field.p,))

    @classmethod
    def decode(cls, field: Field, enc: int) -> "Poly":
        cs = []
        q = field.q
        while enc:
            cs.append(enc % q)
            enc //= q
        return cls(field, cs)

    def encode(self) -> int:
        e = 0
        for c in reversed(self.coeffs):
            e = e * self.field.q + c
        return e

    # -- structure -----------------------------------------------------------

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def leading(self) -> int:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def monic(self) -> "Poly":
        if self.is_zero() or self.is_monic():
            return self
        inv = self.field.inv(self.coeffs[-1])
        row = self.field.mul_table[inv]
        return Poly(self.field, (int(row[c]) for c in self.coeffs))

    def __hash__(self):
        return hash((self.field.name, self.coeffs))

    def __eq__(self, other):
        return (isinstance(other, Poly) and other.field == self.field
                and other.coeffs == self.coeffs)

    def __repr__(self):
        return f"Poly({self.field.name}, {self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                var = "t" if i == 1 else f"t^{i}"
                parts.append(var if c == 1 else f"{c}*{var}")
        return " + ".join(parts)

    def _check(self, other: "Poly"):
        if self.field != other.field:
            from .errors import FieldMismatchError
            raise FieldMismatchError(f"{self.field.name} vs {other.field.name}")

    # -- ring operations -------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        add = self.field.add_table
        out = list(a)
        for i, c in enumerate(b):
            out[i] = int(add[out[i], c])
        return Poly(self.field, out)

    def __neg__(self) -> "Poly":
        neg = self.field.neg_table
        return Poly(self.field, (int(neg[c]) for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        return Poly(self.field,
                    _mul_coeffs(self.field, list(self.coeffs), list(other.coeffs)))

    def scale(self, c: int) -> "Poly":
        if c == 0:
            return Poly.zero(self.field)
        row = self.field.mul_table[c]
        return Poly(self.field, (int(row[x]) for x in self.coeffs))

    def shift(self, n: int) -> "Poly":
        """Multiply by t^n."""
        if self.is_zero():
            return self
        return Poly(self.field, (0,) * n + self.coeffs)

    def __divmod__(self, other: "Poly"):
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        f = self.field
        r = list(self.coeffs)
        db = len(other.coeffs) - 1
        inv_lead = f.inv(other.coeffs[-1])
        quo = [0] * max(len(r) - db, 0)
        add, mul, neg = f.add_table, f.mul_table, f.neg_table
        bc = other.coeffs
        while len(r) - 1 >= db and r:
            if r[-1] == 0:
                r.pop()
                continue
            c = int(mul[r[-1], inv_lead])
            shift_len = len(r) - 1 - db
            quo[shift_len] = c
            row = mul[c]
            for j in range(db + 1):
                if bc[j]:
                    r[shift_len + j] = int(add[r[shift_len + j], neg[row[bc[j]]]])
            r.pop()
        return Poly(f, quo), Poly(f, r)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative polynomial power")
        result = Poly.one(self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def pow_mod(self, e: int, mod: "Poly") -> "Poly":
        result = Poly.one(self.field) % mod
        base = self % mod
        while e:
            if e & 1:
                result = (result * base) % mod
            base = (base * base) % mod
            e >>= 1
        return result

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def evaluate(self, x: int) -> int:
        f = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = f.add(f.mul(acc, x), c)
        return acc

    def derivative(self) -> "Poly":
        f = self.field
        out = []
        for i in range(1, len(self.coeffs)):
            out.append(f.mul(self.coeffs[i], i % f.p))
        return Poly(f, out)

    def reverse(self, deg: int | None = None) -> "Poly":
        """Coefficient reversal x^deg * f(1/x); deg defaults to deg f."""
        if self.is_zero():
            return self
        d = self.degree if deg is None else deg
        if d < self.degree:
            raise ValueError("reversal degree below polynomial degree")
        cs = [0] * (d + 1)
        for i, c in enumerate(self.coeffs):
            cs[d - i] = c
        return Poly(self.field, cs)

    def frobenius_power(self, e: int = 1) -> "Poly":
        """p^e-th power: coefficient Frobenius plus exponent spreading."""
        f = self.field
        pe = f.p**e
        out = [0] * (pe * (len(self.coeffs) - 1) + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            x = c
            for _ in range(e):
                x = f.frobenius(x)
            out[pe * i] = x
        return Poly(f, out)


# ---------------------------------------------------------------------------
# irreducibility and counting

def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(f: Poly) -> bool:
    """Rabin's test: Frobenius powers plus gcd conditions.

    Requires deg f >= 1; constants are rejected.
    """
    d = f.degree
    if f.is_zero() or d < 1:
        raise ConstructionError("irreducibility is defined for degree >= 1")
    f = f.monic()
    if d == 1:
        return True
    if f.coeffs[0] == 0:  # divisible by t
        return False
    q = f.field.q
    t = Poly.t(f.field)
    # h[i] = t^(q^i) mod f, built by repeated q-th powers
    h = t
    powers = {}
    need = {d // r for r in _prime_divisors(d)} | {d}
    for i in range(1, d + 1):
        h = h.pow_mod(q, f)
        if i in need:
            powers[i] = h
        if i == d:
            break
    if powers[d] != t % f:
        return False
    for r in _prime_divisors(d):
        g = f.gcd(powers[d // r] - t)
        if g.degree != 0:
            return False
    return True


def is_irreducible_trial(f: Poly) -> bool:
    """Trial-division oracle, exponential; for tests at small degree."""
    d = f.degree
    if f.is_zero() or d < 1:
        raise ConstructionError("irreducibility is defined for degree >= 1")
    f = f.monic()
    q = f.field.q
    for dg in range(1, d // 2 + 1):
        for enc in range(q**dg, 2 * q**dg):
            g = Poly.decode(f.field, enc)
            if (f % g).is_zero():
                return False
    return True


def _mobius(n: int) -> int:
    mu = 1
    for p in _prime_divisors(n):
        if n % (p * p) == 0:
            return 0
        mu = -mu
    return mu


def count_irreducibles(q: int, d: int) -> int:
    """Number of monic irreducibles of degree d over F_q (Mobius formula)."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    total = 0
    for e in range(1, d + 1):
        if d % e == 0:
            total += _mobius(d // e) * q**e
    return total // d


def bracket(field: Field, n: int) -> Poly:
    """The polynomial t^(q^n) - t."""
    if n < 1:
        raise ValueError("bracket index must be >= 1")
    cs = [0] * (field.q**n + 1)
    cs[1] = field.neg(1)
    cs[field.q**n] = 1
    return Poly(field, cs)


def all_monic(field: Field, d: int):
    """All monic polynomials of degree d, ascending encoding."""
    q = field.q
    for enc in range(q**d, 2 * q**d):
        yield Poly.decode(field, enc)
