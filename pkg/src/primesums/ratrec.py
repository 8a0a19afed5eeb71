"""Rational reconstruction from truncated series and the closed-form catalog.

Reconstruction runs the extended Euclidean algorithm on the pair
(x^(N+1), series-as-polynomial in x = 1/t) with the classic half-degree
stopping rule: if the series agrees with some rational function of
numerator/denominator degree <= B and at least 2B+1 coefficients are
known, that function is unique and is found here.

The catalog of conjectured closed forms ships as data
(primesums/catalog.json): formula strings over tokens [n], t, integer
constants, + - * / ^ and parentheses, parsed and evaluated per field.
Adding future guesses requires no code change.
"""

import json
import re
from dataclasses import dataclass
from importlib import resources

from .errors import HorizonError, UsageError
from .ffield import Field
from .fqpoly import Poly, bracket
from .laurent import LaurentSeries, ValuationReport


@dataclass
class RationalCandidate:
    """num/den over F_q[t] matching a series through a known horizon."""

    num: Poly
    den: Poly
    max_deg: int
    matched_through: int

    def as_series(self, horizon: int) -> LaurentSeries:
        return LaurentSeries.from_rational(self.num, self.den, horizon)

    def __str__(self):
        return f"({self.num}) / ({self.den})"


def _poly_from_x(field: Field, coeffs: list[int], m: int) -> Poly:
    """Interpret x-coefficients (x = 1/t) as a polynomial of formal degree m."""
    out = [0] * (m + 1)
    for i, c in enumerate(coeffs):
        if c:
            out[m - i] = c
    return Poly(field, out)


def reconstruct(series: LaurentSeries, max_deg: int) -> RationalCandidate | None:
    """The unique rational function with degrees <= max_deg matching the
    series, or None when no candidate fits.

    Requires horizon >= 2*max_deg + 1 (the uniqueness bound).
    """
    n = series.horizon
    if n < 2 * max_deg + 1:
        raise HorizonError(
            f"reconstruction with max_deg={max_deg} needs horizon "
            f">= {2 * max_deg + 1}, series has {n}")
    f = series.field
    if series.is_zero_to_horizon():
        return RationalCandidate(Poly.zero(f), Poly.one(f), max_deg, n)
    if series.first < 0:
        raise UsageError("reconstruction expects a series with valuation >= 0")
    # S(x) = sum c_j x^j as a polynomial in x, degree <= n
    sx = [0] * (n + 1)
    for i, c in enumerate(series.coeffs):
        sx[series.first + i] = c
    s_poly = Poly(f, sx)          # in the variable x
    mod = Poly.monomial(f, n + 1)  # x^(n+1)
    # extended Euclid, stopping when the remainder degree drops below the cut
    cut = n - max_deg  # deg r < n+1-max_deg ... stop at deg r <= n-max_deg-?
    r0, r1 = mod, s_poly
    t0, t1 = Poly.zero(f), Poly.one(f)
    while not r1.is_zero() and r1.degree > max_deg:
        quo, rem = divmod(r0, r1)
        r0, r1 = r1, rem
        t0, t1 = t1, t0 - quo * t1
    if r1.is_zero() or t1.is_zero():
        return None
    # r1(x)/t1(x) = S(x) mod x^(n+1); convert to polynomials in t
    a, b = r1, t1
    if b.coeffs[0] == 0:  # denominator with positive valuation in x: t | issues
        g = a.gcd(b)
        if g.degree > 0:
            a, b = a // g, b // g
        if b.coeffs[0] == 0:
            return None
    m = max(a.degree, b.degree)
    num_t = _poly_from_x(f, list(a.coeffs), m)
    den_t = _poly_from_x(f, list(b.coeffs), m)
    g = num_t.gcd(den_t)
    if g.degree > 0:
        num_t, den_t = num_t // g, den_t // g
    if den_t.is_zero():
        return None
    lead = f.inv(den_t.leading())
    num_t, den_t = num_t.scale(lead), den_t.scale(lead)
    if num_t.degree > max_deg or den_t.degree > max_deg:
        return None
    cand = RationalCandidate(num_t, den_t, max_deg, n)
    if not cand.as_series(n).agrees_with(series):
        return None
    return cand


# ---------------------------------------------------------------------------
# formula language: [n], t, integers, + - * / ^, parentheses

_TOKEN = re.compile(r"\s*(\[\d+\]|\d+|\*\*|[t+\-*/^()])")


def _tokenize(formula: str) -> list[str]:
    out, pos = [], 0
    while pos < len(formula):
        m = _TOKEN.match(formula, pos)
        if not m:
            raise UsageError(f"bad formula near {formula[pos:pos+12]!r}")
        tok = m.group(1)
        out.append("^" if tok == "**" else tok)
        pos = m.end()
    return out


class _FormulaParser:
    """Recursive descent onto exact rational functions."""

    def __init__(self, field: Field, tokens: list[str], params: dict):
        self.field = field
        self.toks = tokens
        self.i = 0
        self.params = params

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, tok=None):
        got = self.peek()
        if got is None or (tok is not None and got != tok):
            raise UsageError(f"formula parse error at token {got!r}")
        self.i += 1
        return got

    def parse(self):
        v = self.expr()
        if self.peek() is not None:
            raise UsageError(f"trailing tokens in formula: {self.toks[self.i:]}")
        return v

    def expr(self):
        from .ratfun import RatFun
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.power()
        while True:
            nxt = self.peek()
            if nxt in ("*", "/"):
                self.take()
                w = self.power()
                v = v * w if nxt == "*" else v / w
            elif nxt is not None and nxt not in ("+", "-", ")", "^"):
                v = v * self.power()  # juxtaposition, e.g. [1][3]
            else:
                return v

    def power(self):
        v = self.atom()
        if self.peek() == "^":
            self.take()
            e = self.exponent_value()
            v = v**e
        return v

    def exponent_value(self) -> int:
        if self.peek() == "(":
            self.take("(")
            val = self.int_expr()
            self.take(")")
            return val
        tok = self.take()
        if not tok.isdigit():
            raise UsageError(f"exponent must be an integer, got {tok!r}")
        return int(tok)

    def int_expr(self) -> int:
        """Integer arithmetic inside exponents, e.g. (2^n)."""
        val = self.int_atom()
        while self.peek() in ("^", "*", "+", "-"):
            op = self.take()
            rhs = self.int_atom()
            val = {"^": lambda a, b: a**b, "*": lambda a, b: a * b,
                   "+": lambda a, b: a + b, "-": lambda a, b: a - b}[op](val, rhs)
        return val

    def int_atom(self) -> int:
        tok = self.take()
        if tok.isdigit():
            return int(tok)
        if tok in self.params:
            return int(self.params[tok])
        raise UsageError(f"unknown integer token {tok!r}")

    def atom(self):
        from .ratfun import RatFun
        tok = self.take()
        if tok == "(":
            v = self.expr()
            self.take(")")
            return v
        if tok == "t":
            return RatFun.from_poly(Poly.t(self.field))
        if tok.isdigit():
            return RatFun.from_poly(Poly.constant(self.field, int(tok)))
        if tok.startswith("["):
            n = int(tok[1:-1])
            if n == 0:
                return RatFun.zero(self.field)
            return RatFun.from_poly(bracket(self.field, n))
        raise UsageError(f"unexpected token {tok!r}")


def evaluate_formula(field: Field, formula: str, params: dict | None = None):
    """Formula string -> exact rational function over F_q[t].

    Substitutes integer parameters (like n) before parsing.
    """
    params = params or {}
    text = formula
    for name, val in params.items():
        text = re.sub(rf"(?<![0-9a-zA-Z]){name}(?![0-9a-zA-Z])", str(int(val)), text)
    # bracket arguments may now contain arithmetic, e.g. [n-1] -> [2-1]
    def fold_bracket(m):
        return f"[{eval_int(m.group(1))}]"

    def eval_int(s: str) -> int:
        if not re.fullmatch(r"[\d+\-*^ ]+", s):
            raise UsageError(f"bad bracket index expression {s!r}")
        return int(eval(s.replace("^", "**"), {"__builtins__": {}}))  # noqa: S307

    text = re.sub(r"\[([^\[\]]+)\]", fold_bracket, text)
    text = re.sub(r"\^\(([^()]+)\)", lambda m: "^" + str(eval_int(m.group(1))), text)
    return _FormulaParser(field, _tokenize(text), {}).parse()


# ---------------------------------------------------------------------------
# catalog

@dataclass
class CatalogEntry:
    q: int
    kind: str            # "PK" or "GP"
    k: int | None        # explicit k, or None for a family
    family: dict | None  # {"param": "n", "k_formula": "...", "range": [lo, hi]}
    formula: str
    note: str = ""

    def instantiate(self, field: Field, k: int):
        if self.k is not None:
            if k != self.k:
                raise UsageError(f"catalog entry is for k={self.k}, not {k}")
            return evaluate_formula(field, self.formula)
        n = self._solve_param(k)
        if n is None:
            raise UsageError(f"k={k} is not in the family {self.family}")
        return evaluate_formula(field, self.formula,
                                {self.family["param"]: n})

    def _solve_param(self, k: int):
        lo, hi = self.family.get("range", [1, 64])
        for n in range(lo, hi + 1):
            if _int_formula(self.family["k_formula"], {"q": self.q,
                                                       self.family["param"]: n}) == k:
                return n
        return None

    def matches_k(self, k: int) -> bool:
        if self.k is not None:
            return self.k == k
        return self._solve_param(k) is not None


def _int_formula(s: str, params: dict) -> int:
    text = s
    for name, val in params.items():
        text = re.sub(rf"(?<![0-9a-zA-Z]){name}(?![0-9a-zA-Z])", str(int(val)), text)
    if not re.fullmatch(r"[\d+\-*^() ]+", text):
        raise UsageError(f"bad integer formula {s!r}")
    return int(eval(text.replace("^", "**"), {"__builtins__": {}}))  # noqa: S307


_CATALOG: list[CatalogEntry] | None = None


def load_catalog() -> list[CatalogEntry]:
    global _CATALOG
    if _CATALOG is None:
        with resources.files("primesums").joinpath("catalog.json").open() as fh:
            raw = json.load(fh)
        _CATALOG = [CatalogEntry(**e) for e in raw]
    return _CATALOG


def catalog_lookup(q: int, k: int, kind: str = "PK") -> CatalogEntry | None:
    """The catalogued closed form for (q, k), or None."""
    for entry in load_catalog():
        if entry.q == q and entry.kind == kind and entry.matches_k(k):
            return entry
    return None


def error_valuation(sum_series: LaurentSeries, candidate,
                    context: dict | None = None) -> ValuationReport:
    """Valuation of (sum - candidate); zero-to-horizon is the conjecture-
    consistent outcome, reported as a lower bound."""
    if isinstance(candidate, RationalCandidate):
        num, den = candidate.num, candidate.den
    else:  # RatFun or (num, den)
        num, den = (candidate.num, candidate.den) if hasattr(candidate, "num") \
            else candidate
    cand = LaurentSeries.from_rational(num, den, sum_series.horizon)
    return (sum_series - cand).valuation_report(context)
