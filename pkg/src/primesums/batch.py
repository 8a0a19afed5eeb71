"""Vectorized expansion of prime-term series, batched over primes.

Every summand 1/(1-P^k), 1/(1+P), G_p(P^-k) or 1/a^k is a shifted ratio of
reversals: with g = rev(P) (so g(0) = 1) and a shift exponent a >= 1,

    1/(1 - P^k) = -x^(dk) * g^a * (g^(a+k) - x^(dk) g^a)^(-1),   x = 1/t.

The denominator reversal is a unit power series whose inverse satisfies a
linear recurrence with one tap per nonzero coefficient, so the cost per
coefficient is the tap count, vectorized across a whole chunk of primes.
The shift a is chosen to minimize the generic support of g^(a+k) plus
g^a (computed by Minkowski sums of exponent bitsets), which automatically
exploits the sparsity of P^(2^s) in characteristic 2.

Results are bit-identical to the per-prime reference in laurent.py; the
test suite asserts this.
"""

import numpy as np

from .ffield import Field
from .laurent import gp_numerator_coeffs


class VecField:
    """Elementwise field arithmetic on uint8 code arrays."""

    def __init__(self, field: Field):
        self.field = field
        self.q = field.q
        self.p = field.p
        self.char2 = field.p == 2
        self.prime_field = field.m == 1
        self._log = field.log_table.astype(np.int16)
        self._exp = field.exp_ext
        self._addflat = field.add_table.reshape(-1)
        self._frob = field.frob_table

    def mul(self, a, b):
        if self.q == 2:
            return a & b
        if self.char2 or not self.prime_field:
            return self._exp[self._log[a] + self._log[b]]
        return (a.astype(np.uint16) * b % self.p).astype(np.uint8)

    def mul_scalar(self, c: int, a):
        if c == 0:
            return np.zeros_like(a)
        if c == 1:
            return a
        return self.field.mul_table[c][a]

    def add(self, a, b):
        if self.char2:
            return a ^ b
        if self.prime_field:
            return ((a.astype(np.uint16) + b) % self.p).astype(np.uint8)
        return self._addflat[a.astype(np.int32) * self.q + b]

    def iadd(self, a, b):
        """a <- a + b elementwise; returns a."""
        if self.char2:
            a ^= b
            return a
        out = self.add(a, b)
        a[...] = out
        return a

    def neg(self, a):
        if self.char2:
            return a
        return self.field.neg_table[a]

    def add_reduce(self, mat, axis=0):
        if self.char2:
            return np.bitwise_xor.reduce(mat, axis=axis)
        if self.prime_field:
            return (mat.astype(np.int64).sum(axis=axis) % self.p).astype(np.uint8)
        acc = np.zeros(mat.shape[1 - axis], dtype=np.uint8)
        for i in range(mat.shape[axis]):
            row = mat[i] if axis == 0 else mat[:, i]
            acc = self.add(acc, row)
        return acc

    def frob_pow(self, a, e: int):
        out = a
        for _ in range(e % self.field.m if self.field.m > 1 else 0):
            out = self._frob[out]
        return out


# ---------------------------------------------------------------------------
# generic supports and shift selection

def _or_convolve(x: int, y: int) -> int:
    if x.bit_length() > y.bit_length():
        x, y = y, x
    acc = 0
    while x:
        low = x & -x
        acc |= y << (low.bit_length() - 1)
        x ^= low
    return acc


def generic_support(p: int, d: int, e: int) -> int:
    """Bitset of possible exponents of rev(P)^e for generic monic P, deg d."""
    acc = 1
    j = 0
    while e:
        digit = e % p
        if digit:
            block = 0
            step = p**j
            for i in range(d * digit + 1):
                block |= 1 << (step * i)
            acc = _or_convolve(acc, block)
        e //= p
        j += 1
    return acc


def choose_shift(p: int, d: int, k: int) -> int:
    """Shift a minimizing taps of g^(a+k) plus terms of g^a."""
    best_a, best_cost = 1, None
    hi = min(2 * k + 2, 130)
    for a in range(1, hi + 1):
        cost = (bin(generic_support(p, d, a + k)).count("1")
                + bin(generic_support(p, d, a)).count("1"))
        if best_cost is None or cost < best_cost:
            best_a, best_cost = a, cost
    return best_a


# ---------------------------------------------------------------------------
# sparse polynomial-of-vectors products

class SparseVec:
    """Positions (sorted ints) with per-prime value columns (n x npos)."""

    __slots__ = ("pos", "vals")

    def __init__(self, pos, vals):
        self.pos = list(pos)
        self.vals = vals

    @classmethod
    def one(cls, n: int):
        return cls([0], np.ones((n, 1), dtype=np.uint8))

    def spread(self, vf: VecField, factor: int, frob_e: int) -> "SparseVec":
        return SparseVec([p * factor for p in self.pos],
                         vf.frob_pow(self.vals, frob_e))

    def conv(self, vf: VecField, other: "SparseVec", cap: int) -> "SparseVec":
        buckets: dict[int, np.ndarray] = {}
        for i, pi in enumerate(self.pos):
            if pi > cap:
                continue
            for j, pj in enumerate(other.pos):
                s = pi + pj
                if s > cap:
                    continue
                prod = vf.mul(self.vals[:, i], other.vals[:, j])
                if s in buckets:
                    buckets[s] = vf.add(buckets[s], prod)
                else:
                    buckets[s] = prod
        pos = sorted(buckets)
        n = self.vals.shape[0]
        vals = np.zeros((n, len(pos)), dtype=np.uint8)
        for idx, s in enumerate(pos):
            vals[:, idx] = buckets[s]
        return SparseVec(pos, vals)


def _dense_small_powers(vf: VecField, ghat: np.ndarray, pmax: int) -> list:
    """[g^0 .. g^pmax] as SparseVec with dense positions (small degrees)."""
    n, w = ghat.shape
    out = [SparseVec.one(n), SparseVec(range(w), ghat.copy())]
    for _ in range(2, pmax + 1):
        prev = out[-1]
        base = out[1]
        out.append(prev.conv(vf, base, cap=prev.pos[-1] + w))
    return out


def g_power(vf: VecField, ghat: np.ndarray, e: int, cap: int) -> SparseVec:
    """rev(P)^e truncated to exponents <= cap, vectorized over primes.

    Base-p digit factorization: products of Frobenius spreads of small
    dense powers, so characteristic-p sparsity is exploited exactly.
    """
    n = ghat.shape[0]
    if e == 0 or cap < 0:
        return SparseVec.one(n) if cap >= 0 else SparseVec([], np.zeros((n, 0), dtype=np.uint8))
    p = vf.p
    digits = []
    ee = e
    while ee:
        digits.append(ee % p)
        ee //= p
    smalls = _dense_small_powers(vf, ghat, max(digits))
    acc = None
    for j, digit in enumerate(digits):
        if not digit:
            continue
        factor = smalls[digit].spread(vf, p**j, j * (1 if vf.field.m > 1 else 0))
        factor = SparseVec([pp for pp in factor.pos if pp <= cap],
                           factor.vals[:, [i for i, pp in enumerate(factor.pos)
                                           if pp <= cap]])
        acc = factor if acc is None else acc.conv(vf, factor, cap)
    return acc


# ---------------------------------------------------------------------------
# the batched term-series kernel

def _term_parts(vf: VecField, ghat: np.ndarray, d: int, k: int, kind: str,
                horizon: int):
    """(shift, sign, den SparseVec, num SparseVec) for one term kind."""
    n = ghat.shape[0]
    if kind == "CONJ_A":
        shift = d
        cap = horizon - shift
        den = SparseVec(range(d + 1), ghat.copy())
        if d in den.pos:
            idx = den.pos.index(d)
            den.vals[:, idx] = vf.add(den.vals[:, idx],
                                      np.ones(n, dtype=np.uint8))
        return shift, +1, den, SparseVec.one(n)
    if kind in ("PK", "INV_POWER"):
        shift = d * k
        cap = horizon - shift
        if kind == "INV_POWER":
            return shift, +1, g_power(vf, ghat, k, cap), SparseVec.one(n)
        a = choose_shift(vf.p, d, k)
        den = g_power(vf, ghat, a + k, cap)
        num = g_power(vf, ghat, a, cap)
        # den <- g^(a+k) - x^(dk) g^a
        merged: dict[int, np.ndarray] = {p: den.vals[:, i].copy()
                                         for i, p in enumerate(den.pos)}
        for i, p in enumerate(num.pos):
            pp = p + shift
            if pp > cap:
                continue
            contrib = vf.neg(num.vals[:, i])
            if pp in merged:
                merged[pp] = vf.add(merged[pp], contrib)
            else:
                merged[pp] = contrib.copy()
        pos = sorted(merged)
        vals = np.zeros((n, len(pos)), dtype=np.uint8)
        for idx, p in enumerate(pos):
            vals[:, idx] = merged[p]
        return shift, -1, SparseVec(pos, vals), num
    if kind == "GP":
        p = vf.p
        shift = d * k
        cap = horizon - shift
        gk = g_power(vf, ghat, k, cap // p if p > 1 else cap)
        den_pos = [p * s for s in gk.pos if p * s <= cap]
        den_vals = vf.frob_pow(gk.vals[:, :len(den_pos)], 1 if vf.field.m > 1 else 0)
        merged = {s: den_vals[:, i].copy() for i, s in enumerate(den_pos)}
        if d * k * p <= cap:
            c = merged.get(d * k * p)
            contrib = np.full(n, vf.field.neg(1), dtype=np.uint8)
            merged[d * k * p] = contrib if c is None else vf.add(c, contrib)
        pos = sorted(merged)
        vals = np.zeros((n, len(pos)), dtype=np.uint8)
        for idx, s in enumerate(pos):
            vals[:, idx] = merged[s]
        den = SparseVec(pos, vals)
        # numerator: sum_{i=1..p} c_i x^(dk(i-1)) g^((p-i)k)
        coeffs = gp_numerator_coeffs(p)
        num_buckets: dict[int, np.ndarray] = {}
        for i in range(1, p + 1):
            ci = coeffs[i] % p
            if not ci:
                continue
            base_shift = d * k * (i - 1)
            if base_shift > cap:
                continue
            gpow = g_power(vf, ghat, (p - i) * k, cap - base_shift)
            for idx, s in enumerate(gpow.pos):
                sp = s + base_shift
                contrib = vf.mul_scalar(ci, gpow.vals[:, idx])
                if sp in num_buckets:
                    num_buckets[sp] = vf.add(num_buckets[sp], contrib)
                else:
                    num_buckets[sp] = contrib
        pos = sorted(num_buckets)
        nvals = np.zeros((n, len(pos)), dtype=np.uint8)
        for idx, s in enumerate(pos):
            nvals[:, idx] = num_buckets[s]
        return shift, +1, den, SparseVec(pos, nvals)
    raise ValueError(f"unknown kind {kind!r}")


def _tap_inverse(vf: VecField, den: SparseVec, hw: int) -> np.ndarray:
    """w with den * w = 1 mod x^(hw+1); den has unit constant term."""
    n = den.vals.shape[0]
    w = np.zeros((n, hw + 1), dtype=np.uint8)
    w[:, 0] = 1
    taps = [(s, i) for i, s in enumerate(den.pos) if 0 < s <= hw]
    if vf.char2 and vf.q > 2:
        log = vf._log
        exp = vf._exp
        tap_logs = {i: log[den.vals[:, i]] for _, i in taps}
        w_logs = np.zeros((n, hw + 1), dtype=np.int16)
        w_logs[:, 0] = log[np.ones(n, dtype=np.uint8)]
        for j in range(1, hw + 1):
            acc = None
            for s, i in taps:
                if s > j:
                    break
                term = exp[tap_logs[i] + w_logs[:, j - s]]
                acc = term if acc is None else acc ^ term
            if acc is not None:
                w[:, j] = acc
            w_logs[:, j] = log[w[:, j]]
        return w
    if vf.q == 2:
        for j in range(1, hw + 1):
            acc = None
            for s, i in taps:
                if s > j:
                    break
                term = den.vals[:, i] & w[:, j - s]
                acc = term if acc is None else acc ^ term
            if acc is not None:
                w[:, j] = acc
        return w
    if vf.prime_field:
        p = vf.p
        vals16 = den.vals.astype(np.int32)
        w32 = np.zeros((n, hw + 1), dtype=np.int32)
        w32[:, 0] = 1
        for j in range(1, hw + 1):
            acc = np.zeros(n, dtype=np.int64)
            for s, i in taps:
                if s > j:
                    break
                acc += vals16[:, i] * w32[:, j - s]
            w32[:, j] = (-acc) % p
        return w32.astype(np.uint8)
    # odd-characteristic extension fields: gather-table route
    for j in range(1, hw + 1):
        acc = np.zeros(n, dtype=np.uint8)
        for s, i in taps:
            if s > j:
                break
            acc = vf.add(acc, vf.mul(den.vals[:, i], w[:, j - s]))
        w[:, j] = vf.neg(acc)
    return w


def batch_term_matrix(field: Field, digits: np.ndarray, d: int, kind: str,
                      k: int, horizon: int) -> np.ndarray:
    """(n, horizon+1) matrix of term-series coefficients, one row per prime.

    digits: (n, d+1) coefficient digits of monic primes, low degree first.
    """
    vf = VecField(field)
    n = digits.shape[0]
    out = np.zeros((n, horizon + 1), dtype=np.uint8)
    ghat = digits[:, ::-1].copy()  # rev(P): ghat[:,0] = 1
    shift, sign, den, num = _term_parts(vf, ghat, d, k, kind, horizon)
    hw = horizon - shift
    if hw < 0:
        return out
    w = _tap_inverse(vf, den, hw)
    for i, s in enumerate(num.pos):
        if s > hw:
            continue
        cols = hw - s + 1
        prod = vf.mul(num.vals[:, i][:, None], w[:, :cols])
        seg = out[:, shift + s: shift + s + cols]
        seg[...] = vf.add(seg, prod)
    if sign < 0:
        out = vf.neg(out)
    return out


def batch_term_sum(field: Field, digits: np.ndarray, d: int, kind: str, k: int,
                   horizon: int, count_index: int | None = None):
    """Sum of term series over the chunk, plus an optional histogram.

    Returns (coeff_array (horizon+1,), counts) where counts is the number
    of primes whose term coefficient at count_index is nonzero (None when
    count_index is None).
    """
    vf = VecField(field)
    mat = batch_term_matrix(field, digits, d, kind, k, horizon)
    total = vf.add_reduce(mat, axis=0) if mat.shape[0] else \
        np.zeros(horizon + 1, dtype=np.uint8)
    counts = None
    if count_index is not None:
        counts = int(np.count_nonzero(mat[:, count_index]))
    return total, counts


def batch_power_sum(field: Field, digits: np.ndarray, d: int, k: int) -> np.ndarray:
    """Sum over the chunk of P^k as exact polynomial coefficients (len dk+1)."""
    vf = VecField(field)
    n = digits.shape[0]
    out = np.zeros(d * k + 1, dtype=np.uint8)
    if n == 0:
        return out
    # work on t-coefficients directly: P^k via base-p digit products
    pw = g_power(vf, digits.copy(), k, cap=d * k)
    for i, s in enumerate(pw.pos):
        out[s] = vf.add(np.asarray([out[s]]),
                        vf.add_reduce(pw.vals[:, i][:, None], axis=0))[0]
    return out
