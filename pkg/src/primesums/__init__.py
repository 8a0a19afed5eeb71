"""Exact-arithmetic sums over monic irreducible polynomials of F_q[t]."""

__version__ = "0.1.0"

from .errors import (BudgetError, CacheMismatchError, ConstructionError,
                     FieldMismatchError, HorizonError, PrimeSumsError,
                     UsageError)
from .ffield import Field, FieldElement, field_for_q, field_from_name, field_make
from .fqpoly import Poly, bracket, count_irreducibles, is_irreducible
from .streams import PrimeStream, iter_irreducibles, product_primes_dividing
