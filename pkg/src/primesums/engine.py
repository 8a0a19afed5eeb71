"""The experiment engine: P_d(k), cumulative sums, valuations, caching.

Horizons are rigorous: a term over a degree-d prime has valuation exactly
k*d, so with the auto horizon N = k*(d_max+1) - 1 every reported
coefficient of the cumulative sum is final for the full infinite sum;
degrees beyond d_max cannot touch it.  Per-degree results are cached as
one JSON document per (field, kind, k, d, horizon) and reused by later
runs; resuming with a larger horizon recomputes the degree outright.

Summation is chunked over fixed-size slices of the ascending prime
stream and combined by a balanced pairwise reduction, so 1-worker and
n-worker runs are bit-identical.
"""

import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .batch import VecField, batch_power_sum, batch_term_sum
from .errors import BudgetError, CacheMismatchError, UsageError
from .ffield import Field, field_for_q
from .fqpoly import Poly
from .laurent import (LaurentSeries, ValuationReport, reciprocal_prime_term,
                      term_fraction)
from .ratfun import RatFun, tree_sum
from .streams import PrimeStream

KINDS = ("CONJ_A", "PK", "GP", "POWER")
CHUNK_PRIMES = 1 << 15
ENGINE_VERSION = 1
EXACT_DEGREE_BUDGET = 130_000  # max common-denominator degree for exact sums


def normalize_k(q: int, k: int) -> tuple[int, int]:
    """k = k0 * p^e with p (the characteristic) not dividing k0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = field_for_q(q).p
    e = 0
    while k % p == 0:
        k //= p
        e += 1
    return k, e


@dataclass(frozen=True)
class SumSpec:
    """What to sum: kind, exponent, degree range, horizon policy."""

    field: Field
    kind: str
    k: int
    d_max: int
    horizon: int | None = None  # None = auto = k*(d_max+1) - 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown kind {self.kind!r}")
        if self.k < 1 or self.d_max < 1:
            raise UsageError("k and d_max must be >= 1")
        if self.kind == "CONJ_A":
            if self.k != 1:
                raise UsageError("kind CONJ_A fixes k = 1")
            if self.field.p != 2:
                raise UsageError("kind CONJ_A requires characteristic 2")

    @property
    def auto_horizon(self) -> int:
        return self.k * (self.d_max + 1) - 1

    @property
    def resolved_horizon(self) -> int:
        return self.auto_horizon if self.horizon is None else self.horizon

    @property
    def determinability_horizon(self) -> int:
        """Largest index final for the infinite sum given d_max."""
        return min(self.resolved_horizon, self.auto_horizon)

    def cache_key(self, d: int) -> str:
        return (f"{self.field.name}|{self.kind}|k{self.k}|d{d}"
                f"|N{self.resolved_horizon}")


@dataclass
class DegreeSummary:
    d: int
    n_primes: int
    runtime_ms: float
    noop: bool = False
    cached: bool = False
    count_nonzero_at: int | None = None


@dataclass
class PartialSumResult:
    """Per-degree and cumulative series with valuation reports and flags."""

    spec: SumSpec
    horizon: int
    per_degree: dict = dc_field(default_factory=dict)
    cumulative: dict = dc_field(default_factory=dict)
    summaries: dict = dc_field(default_factory=dict)

    # -- valuations ---------------------------------------------------------

    def valuation_of(self, scope: str, d: int | None = None) -> ValuationReport:
        """Valuation for scope 'degree', 'cumulative' (partial sums as
        stored) or 'full' (a statement about the infinite sum)."""
        ctx = {"q": self.spec.field.q, "kind": self.spec.kind, "k": self.spec.k}
        if scope == "degree":
            return self.per_degree[d].valuation_report({**ctx, "d": d})
        if scope == "cumulative":
            return self.cumulative[d].valuation_report({**ctx, "d_max": d})
        if scope != "full":
            raise ValueError(f"unknown scope {scope!r}")
        ser = self.cumulative[self.spec.d_max]
        n_eff = min(self.horizon, self.spec.determinability_horizon)
        ser = ser.truncate(n_eff)
        return ser.valuation_report({**ctx, "d_max": self.spec.d_max,
                                     "final_through": n_eff})

    # -- Appendix-style flags, recomputed from stored coefficients -----------

    def degree_flags(self, d: int) -> dict:
        spec = self.spec
        q = spec.field.q
        k = spec.k
        ser = self.per_degree[d]
        rep = ser.valuation_report()
        flags = {
            "q": q, "kind": spec.kind, "k": k, "d": d,
            "p_d": rep.value if rep.is_exact else None,
            "exact": rep.is_exact,
            "lower_bound": None if rep.is_exact else rep.value,
        }
        applicable = k % (q - 1) == 0 if q > 2 else True
        flags["invariants_applicable"] = applicable
        if rep.is_exact:
            flags["div_q_qm1"] = rep.value % (q * (q - 1)) == 0 if q > 2 else \
                rep.value % 2 == 0
            flags["geq_kd"] = rep.value >= k * d
            flags["eq_kd"] = rep.value == k * d
        else:
            flags["div_q_qm1"] = None
            flags["geq_kd"] = rep.value >= k * d if rep.value >= k * d else None
            flags["eq_kd"] = False if rep.value >= k * d else None
        if ser.horizon >= d * k + 1:
            flags["has_dk_plus_1"] = ser.coefficient(d * k + 1) != 0
        else:
            flags["has_dk_plus_1"] = None
        return flags

    def prime_subfield_ok(self) -> bool:
        p = self.spec.field.p
        return all(c < p for ser in self.per_degree.values()
                   for c in ser.coeffs)

    def support_divisible_ok(self) -> bool:
        r = self.spec.field.q - 1
        if r <= 1:
            return True
        return all(j % r == 0 for ser in self.per_degree.values()
                   for j in ser.support())

    def to_report(self) -> dict:
        return {
            "engine_version": ENGINE_VERSION,
            "field": self.spec.field.name,
            "kind": self.spec.kind,
            "k": self.spec.k,
            "d_max": self.spec.d_max,
            "horizon": self.horizon,
            "determinability_horizon": self.spec.determinability_horizon,
            "per_degree": {str(d): s.to_json() for d, s in self.per_degree.items()},
            "cumulative": {str(d): s.to_json() for d, s in self.cumulative.items()},
            "flags": [self.degree_flags(d) for d in sorted(self.per_degree)],
            "n_primes": {str(d): s.n_primes for d, s in self.summaries.items()},
        }


# ---------------------------------------------------------------------------
# per-degree computation

def _reduce_pairwise(vf: VecField, arrays: list[np.ndarray]) -> np.ndarray:
    layer = arrays
    while len(layer) > 1:
        nxt = []
        for i in range(0, len(layer) - 1, 2):
            nxt.append(vf.add(layer[i], layer[i + 1]))
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def sum_over_degree(spec: SumSpec, d: int, mode: str = "auto",
                    workers: int = 1, use_batch: bool = True,
                    count_index: int | None = None,
                    progress=None) -> tuple[LaurentSeries, DegreeSummary]:
    """Sum of term series over all monic primes of degree d.

    Deterministic for any worker count: the prime stream is cut into
    fixed-size chunks and chunk sums are combined pairwise in index order.
    """
    t0 = time.perf_counter()
    f = spec.field
    h = spec.resolved_horizon
    if h < spec.k * d:
        summary = DegreeSummary(d, 0, 0.0, noop=True)
        if progress:
            progress(f"degree {d}: no-op (horizon {h} < k*d = {spec.k * d})")
        return LaurentSeries.zero(f, h), summary
    stream = PrimeStream(f, d, mode=mode)
    if not use_batch:
        total = LaurentSeries.zero(f, h)
        count = 0 if count_index is not None else None
        n = 0
        for prime in stream:
            ser = reciprocal_prime_term(prime, spec.k, spec.kind, h)
            if count_index is not None and ser.coefficient(count_index):
                count += 1
            total = total + ser
            n += 1
        summary = DegreeSummary(d, n, (time.perf_counter() - t0) * 1e3,
                                count_nonzero_at=count)
        return total.truncate(h), summary
    enc = stream.encodings()
    n = len(enc)
    chunks = [enc[i:i + CHUNK_PRIMES] for i in range(0, n, CHUNK_PRIMES)] or \
        [enc[:0]]
    vf = VecField(f)

    def job(chunk_enc):
        from .sieve import encodings_to_digits
        digits = encodings_to_digits(f.q, chunk_enc, d)
        return batch_term_sum(f, digits, d, spec.kind, spec.k, h,
                              count_index=count_index)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, chunks))
    else:
        results = [job(c) for c in chunks]
    arrays = [r[0] for r in results]
    counts = None
    if count_index is not None:
        counts = sum(r[1] or 0 for r in results)
    total_arr = _reduce_pairwise(vf, arrays)
    ser = LaurentSeries(f, h, 0, [int(c) for c in total_arr])
    summary = DegreeSummary(d, n, (time.perf_counter() - t0) * 1e3,
                            count_nonzero_at=counts)
    if progress:
        progress(f"degree {d}: {n} primes, {summary.runtime_ms:.0f} ms")
    return ser, summary


# ---------------------------------------------------------------------------
# caching

def _cache_path(cache_dir: str, spec: SumSpec, d: int) -> str:
    fld = spec.field.name.replace("/", "-")
    sub = f"{spec.kind}_k{spec.k}"
    return os.path.join(cache_dir, fld, sub,
                        f"d{d}_N{spec.resolved_horizon}.json")


def _cache_load(cache_dir: str, spec: SumSpec, d: int):
    path = _cache_path(cache_dir, spec, d)
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    for key, want in (("field", spec.field.name), ("kind", spec.kind),
                      ("k", spec.k), ("d", d),
                      ("horizon", spec.resolved_horizon)):
        if obj.get(key) != want:
            raise CacheMismatchError(
                f"cache entry {path} has {key}={obj.get(key)!r}, "
                f"expected {want!r}")
    ser = LaurentSeries.from_json(obj["series"], field=spec.field)
    summary = DegreeSummary(d, obj.get("n_primes", -1), 0.0,
                            noop=obj.get("noop", False), cached=True)
    return ser, summary


def _cache_store(cache_dir: str, spec: SumSpec, d: int, ser: LaurentSeries,
                 summary: DegreeSummary):
    path = _cache_path(cache_dir, spec, d)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    obj = {"engine_version": ENGINE_VERSION, "field": spec.field.name,
           "kind": spec.kind, "k": spec.k, "d": d,
           "horizon": spec.resolved_horizon, "series": ser.to_json(),
           "n_primes": summary.n_primes, "noop": summary.noop,
           "runtime_ms": summary.runtime_ms}
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# accumulation

def accumulate(spec: SumSpec, cache_dir: str | None = None, workers: int = 1,
               mode: str = "auto", use_batch: bool = True,
               normalize: bool = True, progress=None) -> PartialSumResult:
    """Cumulative sums for d = 1..d_max with per-degree caching.

    For kind PK with the characteristic dividing k, the engine computes
    the coprime exponent k0 and raises the series to the p^e power
    (P(k*p) = P(k)^p); direct computation must and does agree.
    """
    if spec.kind == "PK" and normalize:
        k0, e = normalize_k(spec.field.q, spec.k)
        if e:
            p = spec.field.p
            h = spec.resolved_horizon
            h0 = (h + 1 + p**e - 1) // p**e - 1
            base = SumSpec(spec.field, "PK", k0, spec.d_max, horizon=h0)
            inner = accumulate(base, cache_dir=cache_dir, workers=workers,
                               mode=mode, use_batch=use_batch,
                               normalize=False, progress=progress)
            out = PartialSumResult(spec, h)
            for d in range(1, spec.d_max + 1):
                ser = inner.per_degree[d].frobenius_power(e).truncate(h)
                out.per_degree[d] = ser
                out.cumulative[d] = \
                    inner.cumulative[d].frobenius_power(e).truncate(h)
                out.summaries[d] = inner.summaries[d]
            return out
    h = spec.resolved_horizon
    out = PartialSumResult(spec, h)
    running = LaurentSeries.zero(spec.field, h)
    for d in range(1, spec.d_max + 1):
        got = _cache_load(cache_dir, spec, d) if cache_dir else None
        if got is None:
            ser, summary = sum_over_degree(spec, d, mode=mode, workers=workers,
                                           use_batch=use_batch,
                                           progress=progress)
            if cache_dir:
                _cache_store(cache_dir, spec, d, ser, summary)
        else:
            ser, summary = got
            if progress:
                progress(f"degree {d}: cache hit")
        running = running + ser
        out.per_degree[d] = ser
        out.cumulative[d] = running
        out.summaries[d] = summary
    return out


# ---------------------------------------------------------------------------
# exact finite-level sums (degree <= 2 theorems)

def exact_degree_sum(field: Field, d: int, k: int, kind: str = "PK",
                     mode: str = "auto") -> RatFun:
    """Sum over degree-d primes as an exact rational function.

    Only for small scales: the common denominator has degree about
    N_d * deg(term denominator); guarded by EXACT_DEGREE_BUDGET.
    """
    stream = PrimeStream(field, d, mode=mode)
    primes = list(stream)
    if not primes:
        raise ValueError(f"no primes of degree {d}")
    per_term = d * k * (field.p if kind == "GP" else 1)
    if len(primes) * per_term > EXACT_DEGREE_BUDGET:
        raise BudgetError(
            f"exact degree sum would need denominator degree about "
            f"{len(primes) * per_term}, beyond budget {EXACT_DEGREE_BUDGET}")
    terms = [RatFun(*term_fraction(p, k, kind)) for p in primes]
    return tree_sum(terms)


# ---------------------------------------------------------------------------
# polynomial-valued power sums over primes

def power_sum_primes(q: int, d: int, k: int, mode: str = "auto",
                     field: Field | None = None) -> Poly:
    """P(d, k) = sum of P^k over monic primes of degree d, exactly."""
    f = field if field is not None else field_for_q(q)
    if d < 1 or k < 1:
        raise ValueError("d and k must be >= 1")
    stream = PrimeStream(f, d, mode=mode)
    enc = stream.encodings()
    vf = VecField(f)
    total = np.zeros(d * k + 1, dtype=np.uint8)
    for i in range(0, len(enc), CHUNK_PRIMES):
        from .sieve import encodings_to_digits
        digits = encodings_to_digits(f.q, enc[i:i + CHUNK_PRIMES], d)
        total = vf.add(total, batch_power_sum(f, digits, d, k))
    return Poly(f, [int(c) for c in total])


# ---------------------------------------------------------------------------
# adaptive per-degree valuation and Conjecture C(iv) predicate

def degree_valuation(field: Field, d: int, k: int, kind: str = "PK",
                     mode: str = "auto", workers: int = 1,
                     start_slack: int | None = None,
                     max_slack: int | None = None) -> ValuationReport:
    """Exact p_d(k) by growing the horizon until a witness appears.

    Degree <= 2 sums that are exactly zero are detected by the exact
    fraction route and reported as a lower bound at the final horizon.
    For PK with the characteristic dividing k, the valuation is computed
    at the coprime exponent and scaled (P_d(kp) = P_d(k)^p).
    """
    q = field.q
    if kind == "PK":
        k0, e = normalize_k(q, k)
        if e:
            pe = field.p**e
            rep0 = degree_valuation(field, d, k0, kind, mode, workers,
                                    start_slack, max_slack)
            ctx = dict(rep0.context or {}, k=k, scaled_from=k0)
            if rep0.is_exact:
                return ValuationReport("exact", rep0.value * pe,
                                       witness=field.pow(rep0.witness, pe),
                                       context=ctx)
            return ValuationReport("lower-bound", pe * (rep0.value + 1) - 1,
                                   context=ctx)
    base = k * d
    slack = start_slack if start_slack is not None else max(2 * q * (q - 1), 16)
    cap = max_slack if max_slack is not None else max(16 * q * (q - 1), 128)
    exact_zero = False
    if d <= 2:
        try:
            exact_zero = exact_degree_sum(field, d, k, kind).is_zero()
        except BudgetError:
            exact_zero = False
    while True:
        h = base + slack
        spec = SumSpec(field, kind, k, d, horizon=h)
        ser, _ = sum_over_degree(spec, d, mode=mode, workers=workers)
        rep = ser.valuation_report({"q": q, "k": k, "d": d,
                                    "exact_zero": exact_zero})
        if rep.is_exact or exact_zero or slack >= cap:
            return rep
        slack = min(2 * slack + 16, cap)


def vanishing_predicate_C4(q: int, k: int,
                           field: Field | None = None) -> tuple[ValuationReport, bool]:
    """(p_1(k) report, whether p_1(k) >= 2k) for q = 2^m, (q-1) | k."""
    f = field if field is not None else field_for_q(q)
    if f.p != 2:
        raise UsageError("the C(iv) predicate is about characteristic 2")
    if (q - 1) and k % (q - 1):
        raise UsageError("the C(iv) predicate requires (q-1) | k")
    exact_zero = exact_degree_sum(f, 1, k).is_zero()
    spec = SumSpec(f, "PK", k, 1, horizon=2 * k + q * (q - 1))
    ser, _ = sum_over_degree(spec, 1)
    rep = ser.valuation_report({"q": q, "k": k, "d": 1,
                                "exact_zero": exact_zero})
    predicate = exact_zero or (not rep.is_exact) or rep.value >= 2 * k
    return rep, predicate


def coefficient_parity_data(spec: SumSpec, j: int, mode: str = "auto") -> dict:
    """Count of primes (degree <= d_max) whose term has a nonzero t^-j
    coefficient, alongside the cumulative coefficient itself."""
    total_count = 0
    f = spec.field
    running = LaurentSeries.zero(f, spec.resolved_horizon)
    for d in range(1, spec.d_max + 1):
        ser, summary = sum_over_degree(spec, d, mode=mode, count_index=j)
        total_count += summary.count_nonzero_at or 0
        running = running + ser
    return {"index": j, "count_nonzero_terms": total_count,
            "cumulative_coefficient": running.coefficient(j)}


def progress_printer(enabled: bool = True):
    def emit(msg: str):
        if enabled:
            print(f"[primesums] {msg}", file=sys.stderr, flush=True)
    return emit
