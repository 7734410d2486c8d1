"""Fox free differential calculus and its two evaluations.

A group ring element is evaluated either through ``Ad o rho`` (3x3 real
blocks) or through the abelianization ``S_j -> t^(n_j)`` (integer Laurent
polynomials).  The abelian branch is exact throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import _bareiss
from .errors import NotKnotLike
from .presentation import (
    GroupPresentation,
    Representation,
    Word,
    abelianization_exponents,
    evaluate_word,
)
from .su2 import adjoint_matrix


@dataclass(frozen=True)
class GroupRingElement:
    """Finite integer combination of freely reduced words."""

    terms: tuple = ()

    def __post_init__(self):
        acc = {}
        for c, w in self.terms:
            acc[w] = acc.get(w, 0) + int(c)
        object.__setattr__(
            self, "terms", tuple((c, w) for w, c in acc.items() if c != 0)
        )

    @classmethod
    def of(cls, w: Word, coefficient: int = 1) -> "GroupRingElement":
        return cls(((coefficient, w),))

    def __add__(self, other):
        return GroupRingElement(self.terms + other.terms)

    def __neg__(self):
        return GroupRingElement(tuple((-c, w) for c, w in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return GroupRingElement(
            tuple((c1 * c2, w1 * w2) for c1, w1 in self.terms for c2, w2 in other.terms)
        )

    def as_dict(self) -> dict:
        return {w: c for c, w in self.terms}

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.as_dict().items()))


def fox_derivative(w: Word, gen: int) -> GroupRingElement:
    terms = []
    prefix = Word()
    for g, step in w.syllables():
        if g == gen:
            if step == 1:
                terms.append((1, prefix))
            else:
                terms.append((-1, prefix * Word.gen(g, -1)))
        prefix = prefix * Word.gen(g, step)
    return GroupRingElement(tuple(terms))


def evaluate_adjoint(e: GroupRingElement, rho: Representation) -> np.ndarray:
    out = np.zeros((3, 3))
    for c, w in e.terms:
        out += c * adjoint_matrix(evaluate_word(w, rho))
    return out


# -- Laurent polynomials -------------------------------------------------------

@dataclass(frozen=True)
class LaurentPolynomial:
    """Integer Laurent polynomial in ``t``; ``coefficients`` maps exponent -> coefficient."""

    coefficients: tuple = ()

    def __init__(self, coefficients=()):
        if isinstance(coefficients, Mapping):
            items = coefficients.items()
        else:
            items = coefficients
        acc = {}
        for k, v in items:
            acc[int(k)] = acc.get(int(k), 0) + v
        clean = []
        for k, v in sorted(acc.items()):
            if v != 0:
                if isinstance(v, Fraction):
                    if v.denominator != 1:
                        raise ValueError("non-integer Laurent coefficient")
                    v = v.numerator
                clean.append((k, int(v)))
        object.__setattr__(self, "coefficients", tuple(clean))

    @classmethod
    def constant(cls, c: int) -> "LaurentPolynomial":
        return cls({0: c})

    @classmethod
    def monomial(cls, exponent: int, c: int = 1) -> "LaurentPolynomial":
        return cls({exponent: c})

    @classmethod
    def from_ascending(cls, coeffs, low: int = 0) -> "LaurentPolynomial":
        return cls({low + i: c for i, c in enumerate(coeffs)})

    def as_dict(self) -> dict:
        return dict(self.coefficients)

    def is_zero(self) -> bool:
        return not self.coefficients

    def min_degree(self) -> int:
        return self.coefficients[0][0]

    def max_degree(self) -> int:
        return self.coefficients[-1][0]

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentPolynomial.constant(other)
        return LaurentPolynomial(self.coefficients + other.coefficients)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial(tuple((k, -v) for k, v in self.coefficients))

    def __sub__(self, other):
        if isinstance(other, int):
            other = LaurentPolynomial.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPolynomial(tuple((k, v * other) for k, v in self.coefficients))
        acc = {}
        for k1, v1 in self.coefficients:
            for k2, v2 in other.coefficients:
                acc[k1 + k2] = acc.get(k1 + k2, 0) + v1 * v2
        return LaurentPolynomial(acc)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentPolynomial":
        return LaurentPolynomial(tuple((e + k, v) for e, v in self.coefficients))

    def exact_div(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        """Quotient when ``other`` divides ``self`` in Z[t, t^-1]; ValueError otherwise."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if self.is_zero():
            return self
        a_low, b_low = self.min_degree(), other.min_degree()
        num = [Fraction(0)] * (self.max_degree() - a_low + 1)
        for k, v in self.coefficients:
            num[k - a_low] = Fraction(v)
        den = [0] * (other.max_degree() - b_low + 1)
        for k, v in other.coefficients:
            den[k - b_low] = v
        dn = len(den) - 1
        if len(num) - 1 < dn:
            raise ValueError("not divisible")
        quot = [Fraction(0)] * (len(num) - dn)
        for i in range(len(quot) - 1, -1, -1):
            c = num[i + dn] / den[dn]
            quot[i] = c
            if c:
                for j, d in enumerate(den):
                    num[i + j] -= c * d
        if any(num) or any(c.denominator != 1 for c in quot):
            raise ValueError("not divisible")
        return LaurentPolynomial({a_low - b_low + i: c for i, c in enumerate(quot)})

    def __call__(self, t):
        return sum(v * t ** k for k, v in self.coefficients)

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPolynomial.constant(other)
        return isinstance(other, LaurentPolynomial) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def normalized(self) -> "LaurentPolynomial":
        """Shift so the lowest exponent is 0 and make the constant term positive."""
        if self.is_zero():
            return self
        p = self.shift(-self.min_degree())
        if p.coefficients[0][1] < 0:
            p = -p
        return p

    def __str__(self):
        if not self.coefficients:
            return "0"
        out = ""
        for k, v in self.coefficients:
            if k == 0:
                mono = str(abs(v))
            else:
                var = "t" if k == 1 else f"t^{k}"
                mono = var if abs(v) == 1 else f"{abs(v)}{var}"
            if not out:
                out = ("-" if v < 0 else "") + mono
            else:
                out += (" - " if v < 0 else " + ") + mono
        return out

    def __repr__(self):
        return f"LaurentPolynomial({str(self)!r})"


def evaluate_abelian(e: GroupRingElement, exps) -> LaurentPolynomial:
    acc = {}
    for c, w in e.terms:
        k = sum(exps[g] * x for g, x in w.letters)
        acc[k] = acc.get(k, 0) + c
    return LaurentPolynomial(acc)


def fox_matrix(p: GroupPresentation):
    """``[[d R_i / d S_j]]`` as nested lists of group ring elements."""
    return [[fox_derivative(rel, j) for j in range(p.rank)] for rel in p.relators]


def abelian_fox_matrix(p: GroupPresentation, exps=None):
    if exps is None:
        exps = abelianization_exponents(p)
    return [[evaluate_abelian(e, exps) for e in row] for row in fox_matrix(p)]


def laurent_det(rows) -> LaurentPolynomial:
    return _bareiss.bareiss_det(
        rows,
        LaurentPolynomial(),
        LaurentPolynomial.constant(1),
        lambda a, b: a.exact_div(b),
        is_zero=lambda v: v.is_zero(),
    )


def _cyclotomic_factor(n: int) -> LaurentPolynomial:
    # (t^n - 1) / (t - 1) up to a unit
    n = abs(n)
    return LaurentPolynomial.from_ascending([1] * n)


def alexander_minor(p: GroupPresentation, column: int, exps=None) -> LaurentPolynomial:
    """Normalized Alexander polynomial from the minor deleting ``column``."""
    if exps is None:
        exps = abelianization_exponents(p)
    if exps[column] == 0:
        raise ValueError("cannot delete a generator with zero abelian exponent")
    A = abelian_fox_matrix(p, exps)
    sub = [row[:column] + row[column + 1:] for row in A]
    det = laurent_det(sub)
    if det.is_zero():
        raise NotKnotLike("Alexander minor vanishes")
    return det.exact_div(_cyclotomic_factor(exps[column])).normalized()


def alexander_polynomial(p: GroupPresentation) -> LaurentPolynomial:
    exps = abelianization_exponents(p)
    column = next(j for j, n in enumerate(exps) if n != 0)
    return alexander_minor(p, column, exps)
