"""Sieve-based enumeration of monic irreducibles over canonical encodings.

Composites are generated as products prime * cofactor; a monic composite of
degree d always has a prime factor of degree <= d/2, so marking products of
primes of degree a <= d/2 with every monic cofactor of degree d - a covers
all composites of degree d.  Everything is vectorised over encodings; the
test-based enumeration (Rabin) is the reference the sieves are checked
against.

Budgets are deliberate: sieving is a fast path for small q^d, not a way to
push record degrees.
"""

import numpy as np

from .errors import BudgetError
from .ffield import Field

SIEVE2_MAX_DEGREE = 26          # bool array of 2^(D+1) encodings
GENERAL_SIEVE_MAX_CELLS = 1 << 25   # per-degree cells q^d
OMEGA_MAX_CELLS = 1 << 23       # spf/cofactor tables, uint32 each
_CHUNK = 1 << 20


def encodings_to_digits(q: int, encs: np.ndarray, d: int) -> np.ndarray:
    """Base-q digit matrix (n, d+1), low digit first."""
    out = np.empty((len(encs), d + 1), dtype=np.uint8)
    e = encs.astype(np.int64)
    for j in range(d + 1):
        out[:, j] = e % q
        e //= q
    return out


class PrimeSieve2:
    """Composite marks over F_2 encodings up to degree max_degree."""

    def __init__(self, max_degree: int):
        if max_degree > SIEVE2_MAX_DEGREE:
            raise BudgetError(
                f"q=2 sieve degree {max_degree} exceeds budget {SIEVE2_MAX_DEGREE}")
        self.max_degree = max_degree
        n = 1 << (max_degree + 1)
        comp = np.zeros(n, dtype=bool)
        for enc in range(2, 1 << (max_degree // 2 + 1)):
            if comp[enc]:
                continue
            a = enc.bit_length() - 1
            for lo in range(2, 1 << (max_degree + 1 - a), _CHUNK):
                hi = min(lo + _CHUNK, 1 << (max_degree + 1 - a))
                g = np.arange(lo, hi, dtype=np.uint32)
                prod = np.zeros_like(g)
                bits = enc
                while bits:
                    b = bits & -bits
                    prod ^= g << (b.bit_length() - 1)
                    bits ^= b
                comp[prod] = True
        self._comp = comp

    def prime_encodings(self, d: int) -> np.ndarray:
        if d > self.max_degree:
            raise BudgetError(f"degree {d} beyond sieved range {self.max_degree}")
        lo, hi = 1 << d, 1 << (d + 1)
        return (np.nonzero(~self._comp[lo:hi])[0] + lo).astype(np.int64)


class PrimeSieveQ:
    """Per-degree composite marks over monic F_q encodings (general q)."""

    def __init__(self, field: Field, max_degree: int):
        if field.q**max_degree > GENERAL_SIEVE_MAX_CELLS:
            raise BudgetError(
                f"sieve cells q^d = {field.q}**{max_degree} exceed budget")
        self.field = field
        self.max_degree = max_degree
        self._primes: dict[int, np.ndarray] = {}

    def prime_encodings(self, d: int) -> np.ndarray:
        if d > self.max_degree:
            raise BudgetError(f"degree {d} beyond sieved range {self.max_degree}")
        cached = self._primes.get(d)
        if cached is None:
            cached = self._sieve_degree(d)
            self._primes[d] = cached
        return cached

    def _sieve_degree(self, d: int) -> np.ndarray:
        q = self.field.q
        comp = np.zeros(q**d, dtype=bool)
        if d > 1:
            qpows = q ** np.arange(d, dtype=np.int64)
            for a in range(1, d // 2 + 1):
                pdigits = encodings_to_digits(q, self.prime_encodings(a), a)
                for row in pdigits:
                    self._mark(comp, row, a, d, qpows)
        offs = np.nonzero(~comp)[0].astype(np.int64)
        return offs + q**d

    def _mark(self, comp, p_digits, a, d, qpows):
        f = self.field
        q = f.q
        dg = d - a
        total = q**dg
        for lo in range(0, total, _CHUNK):
            hi = min(lo + _CHUNK, total)
            off = np.arange(lo, hi, dtype=np.int64)
            gd = np.empty((hi - lo, dg + 1), dtype=np.uint8)
            e = off.copy()
            for j in range(dg):
                gd[:, j] = e % q
                e //= q
            gd[:, dg] = 1
            out = self._convolve(p_digits, gd, a, dg)
            enc_off = (out[:, :d].astype(np.int64) * qpows).sum(axis=1)
            comp[enc_off] = True

    def _convolve(self, p_digits, gd, a, dg):
        f = self.field
        n = gd.shape[0]
        if f.p == 2:
            out = np.zeros((n, a + dg + 1), dtype=np.uint8)
            for i in range(a + 1):
                c = int(p_digits[i])
                if c:
                    out[:, i:i + dg + 1] ^= f.mul_table[c][gd]
            return out
        if f.m == 1:
            acc = np.zeros((n, a + dg + 1), dtype=np.uint16)
            for i in range(a + 1):
                c = int(p_digits[i])
                if c:
                    acc[:, i:i + dg + 1] += c * gd.astype(np.uint16)
            return (acc % f.p).astype(np.uint8)
        addf = f.add_table.reshape(-1)
        out = np.zeros((n, a + dg + 1), dtype=np.uint8)
        for i in range(a + 1):
            c = int(p_digits[i])
            if c:
                val = f.mul_table[c][gd]
                seg = out[:, i:i + dg + 1]
                out[:, i:i + dg + 1] = addf[seg.astype(np.int32) * f.q + val]
        return out


class OmegaTable:
    """Smallest-prime-factor table with Omega (prime factors with multiplicity).

    q=2 indexes all encodings < 2^(D+1); general q indexes monic encodings
    per degree.  Omega is recovered by one gather per degree layer from the
    stored cofactors.
    """

    def __init__(self, field: Field, max_degree: int):
        cells = (1 << (max_degree + 1)) if field.q == 2 else \
            sum(field.q**d for d in range(max_degree + 1))
        if cells > OMEGA_MAX_CELLS:
            raise BudgetError(f"omega table cells {cells} exceed budget {OMEGA_MAX_CELLS}")
        self.field = field
        self.max_degree = max_degree
        if field.q == 2:
            self._build_q2()
        else:
            self._build_general()

    # -- q = 2 ----------------------------------------------------------------

    def _build_q2(self):
        D = self.max_degree
        n = 1 << (D + 1)
        cof = np.zeros(n, dtype=np.uint32)
        for enc in range(2, 1 << (D // 2 + 1)):
            if cof[enc]:
                continue
            a = enc.bit_length() - 1
            for lo in range(2, 1 << (D + 1 - a), _CHUNK):
                hi = min(lo + _CHUNK, 1 << (D + 1 - a))
                g = np.arange(lo, hi, dtype=np.uint32)
                prod = np.zeros_like(g)
                bits = enc
                while bits:
                    b = bits & -bits
                    prod ^= g << (b.bit_length() - 1)
                    bits ^= b
                unset = cof[prod] == 0
                cof[prod[unset]] = g[unset]
        omega = np.zeros(n, dtype=np.uint8)
        if n > 1:
            omega[1] = 0
        for d in range(1, D + 1):
            lo, hi = 1 << d, 1 << (d + 1)
            seg = cof[lo:hi]
            vals = np.where(seg == 0, 1, omega[seg] + 1)
            omega[lo:hi] = vals
        self._omega = omega
        self._cof = cof

    # -- general q --------------------------------------------------------------

    def _build_general(self):
        f = self.field
        q = f.q
        D = self.max_degree
        sieve = PrimeSieveQ(f, D)
        cofs = {d: np.zeros(q**d, dtype=np.int64) for d in range(1, D + 1)}
        qpow_cache = {d: q ** np.arange(d, dtype=np.int64) for d in range(1, D + 1)}
        for a in range(1, D):
            pdigits = encodings_to_digits(q, sieve.prime_encodings(a), a)
            for row in pdigits:
                for d in range(a + 1, D + 1):
                    self._mark_cof(cofs[d], row, a, d, qpow_cache[d], sieve)
        omegas = {0: np.zeros(1, dtype=np.uint8)}
        for d in range(1, D + 1):
            seg = cofs[d]
            vals = np.ones(q**d, dtype=np.uint8)  # unmarked = prime
            nz = np.nonzero(seg)[0]
            if len(nz):
                g = seg[nz]
                gdeg = np.zeros(len(g), dtype=np.int64)
                gg = g.copy()
                while True:
                    big = gg >= q
                    if not big.any():
                        break
                    gdeg[big] += 1
                    gg[big] //= q
                add = np.zeros(len(g), dtype=np.uint8)
                for e in range(1, d):
                    sel = gdeg == e
                    if sel.any():
                        add[sel] = omegas[e][g[sel] - q**e]
                vals[nz] = 1 + add
            omegas[d] = vals
        self._omegas = omegas
        self._sieve = sieve

    def _mark_cof(self, cof_arr, p_digits, a, d, qpows, sieve):
        f = self.field
        q = f.q
        dg = d - a
        total = q**dg
        for lo in range(0, total, _CHUNK):
            hi = min(lo + _CHUNK, total)
            off = np.arange(lo, hi, dtype=np.int64)
            gd = np.empty((hi - lo, dg + 1), dtype=np.uint8)
            e = off.copy()
            for j in range(dg):
                gd[:, j] = e % q
                e //= q
            gd[:, dg] = 1
            out = sieve._convolve(p_digits, gd, a, dg)
            enc_off = (out[:, :d].astype(np.int64) * qpows).sum(axis=1)
            g_enc = off + q**dg
            unset = cof_arr[enc_off] == 0
            cof_arr[enc_off[unset]] = g_enc[unset]

    # -- queries ------------------------------------------------------------------

    def omega_of_encoding(self, enc: int) -> int:
        """Omega of the monic polynomial with this encoding."""
        if self.field.q == 2:
            if enc < 1:
                raise ValueError("encoding must be >= 1")
            return int(self._omega[enc]) if enc > 1 else 0
        if enc == 1:
            return 0
        d = 0
        e = enc
        while e >= self.field.q:
            e //= self.field.q
            d += 1
        return int(self._omegas[d][enc - self.field.q**d])

    def omegas_for_degree(self, d: int) -> np.ndarray:
        """Omega for every monic polynomial of degree d, ascending encoding."""
        if d == 0:
            return np.zeros(1, dtype=np.uint8)
        if self.field.q == 2:
            return self._omega[1 << d: 1 << (d + 1)].copy()
        return self._omegas[d].copy()
