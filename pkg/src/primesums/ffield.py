"""Arithmetic in F_q = F_{p^m} for small prime powers q (q <= 256).

Elements are integer codes in [0, q): the code of an element with residue
digits (c_0, ..., c_{m-1}) in [0, p) is sum c_i * p^i.  Field construction is
canonical and reproducible: the default modulus is the monic irreducible of
degree m over F_p with the smallest canonical integer encoding (equivalently,
lexicographically smallest coefficients compared from the highest degree
down), so two runs agree bit for bit.

All operation tables are built once by schoolbook residue arithmetic and are
immutable afterwards; the log/antilog fast path is checked against the
schoolbook path in the test suite.
"""

import numpy as np

from .errors import ConstructionError, FieldMismatchError

MAX_Q = 256


def _is_probably_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in (2, 3, 5, 7, 11, 13):
        if n % d == 0:
            return n == d
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# tiny F_p[u] helpers used only for field construction (schoolbook, exact)

def _pp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pp_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _pp_trim(out)


def _pp_mod(a: list[int], mod: list[int], p: int) -> list[int]:
    a = list(a)
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], p - 2, p)
    while len(a) - 1 >= dm and a:
        a = _pp_trim(a)
        if not a or len(a) - 1 < dm:
            break
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for j, mj in enumerate(mod):
            a[shift + j] = (a[shift + j] - c * mj) % p
        a = _pp_trim(a)
    return a


def _pp_is_irreducible(f: list[int], p: int) -> bool:
    """Trial division by all monic polynomials of degree <= deg f / 2."""
    d = len(f) - 1
    if d <= 0:
        return False
    if d == 1:
        return True
    for deg_g in range(1, d // 2 + 1):
        for enc in range(p ** deg_g):
            g = [(enc // p**i) % p for i in range(deg_g)] + [1]
            if not _pp_mod(f, g, p):
                return False
    return True


def _digits(code: int, p: int, m: int) -> tuple[int, ...]:
    return tuple((code // p**i) % p for i in range(m))


def _code(digits, p: int) -> int:
    c = 0
    for d in reversed(list(digits)):
        c = c * p + d
    return c


def default_modulus(p: int, m: int) -> tuple[int, ...]:
    """Monic irreducible of degree m over F_p with smallest encoding."""
    if m == 1:
        return (0, 1)
    for enc in range(p**m):
        f = [(enc // p**i) % p for i in range(m)] + [1]
        if _pp_is_irreducible(f, p):
            return tuple(f)
    raise ConstructionError(f"no irreducible of degree {m} over F_{p}")


class Field:
    """F_{p^m} with precomputed operation tables and a canonical name.

    Tables are immutable after construction and safe to share across
    workers; all operations are pure functions of element codes.
    """

    def __init__(self, p: int, m: int, modulus=None):
        if not _is_probably_prime(p):
            raise ConstructionError(f"p={p} is not prime")
        if m < 1:
            raise ConstructionError(f"m={m} must be >= 1")
        q = p**m
        if q > MAX_Q:
            raise ConstructionError(f"q={q} exceeds supported maximum {MAX_Q}")
        if modulus is None:
            modulus = default_modulus(p, m)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != m + 1 or modulus[-1] != 1:
            raise ConstructionError(
                f"modulus {list(modulus)} is not monic of degree {m}")
        if m > 1 and not _pp_is_irreducible(list(modulus), p):
            raise ConstructionError(
                f"modulus {list(modulus)} is reducible over F_{p}")
        self.p = p
        self.m = m
        self.q = q
        self.modulus = modulus
        self.modulus_code = _code(modulus, p)
        self.name = f"{p}^{m}/{self.modulus_code}"
        self._build_tables()

    # -- construction ------------------------------------------------------

    def _residue_mul(self, a: int, b: int) -> int:
        """Schoolbook product of codes; the oracle for the mul table."""
        pa = _pp_trim([*_digits(a, self.p, self.m)])
        pb = _pp_trim([*_digits(b, self.p, self.m)])
        prod = _pp_mod(_pp_mul(pa, pb, self.p), list(self.modulus), self.p)
        prod += [0] * (self.m - len(prod))
        return _code(prod, self.p)

    def _build_tables(self):
        p, m, q = self.p, self.m, self.q
        add = np.zeros((q, q), dtype=np.uint8)
        codes = np.arange(q)
        if p == 2:
            add[:] = codes[:, None] ^ codes[None, :]
        else:
            # digitwise addition mod p on base-p codes
            acc = np.zeros((q, q), dtype=np.int64)
            for i in range(m):
                di = (codes // p**i) % p
                acc += ((di[:, None] + di[None, :]) % p) * p**i
            add[:] = acc
        mul = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(a, q):
                v = self._residue_mul(a, b)
                mul[a, b] = v
                mul[b, a] = v
        self.add_table = add
        self.mul_table = mul
        neg = np.zeros(q, dtype=np.uint8)
        for a in range(q):
            neg[a] = _code(((p - d) % p for d in _digits(a, p, m)), p)
        self.neg_table = neg
        # log/antilog relative to the smallest generator code
        gen = None
        for g in range(2, q):
            seen = 1
            x = g
            order = 1
            while x != 1:
                x = int(mul[x, g])
                order += 1
            if order == q - 1:
                gen = g
                break
        if gen is None:  # q = 2
            gen = 1
        self.generator = gen
        sent = 2 * (q - 1) if q > 2 else 4
        self.log_sentinel = sent
        log = np.full(q, sent, dtype=np.int32)
        exp_ext = np.zeros(2 * sent + 1, dtype=np.uint8)
        x = 1
        for i in range(max(q - 1, 1)):
            log[x] = i
            x = int(mul[x, gen])
        for s in range(min(sent, 2 * (q - 1) - 1 if q > 2 else 1)):
            exp_ext[s] = self._exp_of(s)
        self.log_table = log
        self.exp_ext = exp_ext
        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            inv[a] = self._exp_of((q - 1 - int(log[a])) % (q - 1)) if q > 2 else 1
        self.inv_table = inv
        frob = np.zeros(q, dtype=np.uint8)
        for a in range(q):
            frob[a] = self.pow(a, p)
        self.frob_table = frob

    def _exp_of(self, i: int) -> int:
        x = 1
        for _ in range(i % max(self.q - 1, 1)):
            x = int(self.mul_table[x, self.generator])
        return x

    # -- scalar operations on codes ----------------------------------------

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def sub(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in " + self.name)
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        """Square-and-multiply; exponents may be arbitrarily large."""
        if e < 0:
            return self.pow(self.inv(a), -e)
        if a == 0:
            return 1 if e == 0 else 0
        if self.q > 2:
            e %= self.q - 1
        result = 1
        base = a
        while e:
            if e & 1:
                result = int(self.mul_table[result, base])
            base = int(self.mul_table[base, base])
            e >>= 1
        return result

    def frobenius(self, a: int) -> int:
        return int(self.frob_table[a])

    def in_prime_subfield(self, a: int) -> bool:
        return int(self.frob_table[a]) == a

    def element_digits(self, a: int) -> tuple[int, ...]:
        return _digits(a, self.p, self.m)

    def element_from_digits(self, digits) -> int:
        return _code(digits, self.p)

    def elements(self):
        """Deterministic enumeration by ascending code."""
        return range(self.q)

    # -- misc ---------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Field) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"Field({self.name})"


_FIELD_CACHE: dict[tuple, Field] = {}


def field_make(p: int, m: int = 1, modulus=None) -> Field:
    """Construct (and cache) F_{p^m}; deterministic default modulus."""
    key = (p, m, tuple(modulus) if modulus is not None else None)
    f = _FIELD_CACHE.get(key)
    if f is None:
        f = Field(p, m, modulus)
        _FIELD_CACHE[key] = f
    return f


def field_for_q(q: int, modulus=None) -> Field:
    """F_q for a prime power q, factoring q as p^m."""
    for p in range(2, q + 1):
        if _is_probably_prime(p) and q % p == 0:
            m = 0
            qq = q
            while qq % p == 0:
                qq //= p
                m += 1
            if qq != 1:
                raise ConstructionError(f"q={q} is not a prime power")
            return field_make(p, m, modulus)
    raise ConstructionError(f"q={q} is not a prime power")


def field_from_name(name: str) -> Field:
    """Inverse of Field.name ("p^m/modulus-code")."""
    try:
        pm, code = name.split("/")
        p, m = pm.split("^")
        p, m, code = int(p), int(m), int(code)
    except ValueError as exc:
        raise ConstructionError(f"bad field name {name!r}") from exc
    modulus = _digits(code, p, m + 1)
    return field_make(p, m, modulus)


class FieldElement:
    """Typed wrapper over an element code; checks field compatibility.

    The engine works on raw codes for speed; this wrapper is the public
    element type for callers that want operator syntax and mismatch errors.
    """

    __slots__ = ("field", "code")

    def __init__(self, field: Field, code: int):
        if not 0 <= code < field.q:
            raise ValueError(f"code {code} out of range for {field.name}")
        self.field = field
        self.code = int(code)

    def _check(self, other):
        if not isinstance(other, FieldElement):
            raise TypeError("expected FieldElement")
        if other.field != self.field:
            raise FieldMismatchError(
                f"{self.field.name} vs {other.field.name}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FieldElement(self.field, self.field.add(self.code, other.code))

    def __sub__(self, other):
        other = self._check(other)
        return FieldElement(self.field, self.field.sub(self.code, other.code))

    def __mul__(self, other):
        other = self._check(other)
        return FieldElement(self.field, self.field.mul(self.code, other.code))

    def __truediv__(self, other):
        other = self._check(other)
        return FieldElement(self.field, self.field.div(self.code, other.code))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.code))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.code, e))

    def inverse(self):
        return FieldElement(self.field, self.field.inv(self.code))

    def frobenius(self):
        return FieldElement(self.field, self.field.frobenius(self.code))

    def in_prime_subfield(self) -> bool:
        return self.field.in_prime_subfield(self.code)

    def __eq__(self, other):
        return (isinstance(other, FieldElement)
                and other.field == self.field and other.code == self.code)

    def __hash__(self):
        return hash((self.field.name, self.code))

    def __repr__(self):
        return f"<{self.field.name}:{self.code}>"
