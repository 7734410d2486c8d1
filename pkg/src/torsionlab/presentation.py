"""Finitely presented knot groups, a small text DSL for them, and SU(2) representations.

Text format, one item per line (``#`` starts a comment)::

    gens: x, y
    rel: x^2*y^-3
    meridian: x*y^-1
    longitude: x^2*(x*y^-1)^-6
    peripheral: +0 @ x ; -0 @ x*y^-1

Words use ``*`` for products, ``^n`` for integer powers and parentheses.
Generator names are case-insensitive on declaration; in words the all-uppercase
spelling of a generator (``A`` for ``a``) is shorthand for its inverse.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from . import _bareiss
from .errors import (
    DeficiencyMismatch,
    InvalidParameter,
    InvalidRepresentation,
    MissingPeripheralData,
    NotKnotLike,
    ParseError,
    UnknownGenerator,
)
from .su2 import UnitQuaternion, quat_mul

EPS_REP = 1e-9


def _reduce(letters):
    out = []
    for g, e in letters:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            total = out[-1][1] + e
            out.pop()
            if total:
                out.append((g, total))
        else:
            out.append((g, e))
    return tuple(out)


@dataclass(frozen=True)
class Word:
    """A freely reduced word: a tuple of ``(generator_index, exponent)`` letters."""

    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((int(g), int(e)) for g, e in self.letters)
        object.__setattr__(self, "letters", _reduce(letters))

    @classmethod
    def gen(cls, index: int, exponent: int = 1) -> "Word":
        return cls(((index, exponent),))

    @classmethod
    def identity(cls) -> "Word":
        return cls(())

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        if n >= 0:
            return Word(self.letters * n)
        return Word(self.inverse().letters * (-n))

    def __len__(self):
        return sum(abs(e) for _, e in self.letters)

    def __bool__(self):
        return bool(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def conjugate(self, by: "Word") -> "Word":
        """``by * self * by^-1``."""
        return by * self * by.inverse()

    def syllables(self):
        """Unit letters ``(g, +1)`` / ``(g, -1)``, left to right."""
        for g, e in self.letters:
            step = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield g, step

    def exponent_sum(self, gen: int) -> int:
        return sum(e for g, e in self.letters if g == gen)

    def generators(self):
        return {g for g, _ in self.letters}

    def format(self, names: Sequence[str]) -> str:
        if not self.letters:
            return "1"
        parts = []
        for g, e in self.letters:
            parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
        return "*".join(parts)


@dataclass(frozen=True)
class PeripheralTerm:
    """One factor ``conjugator * R_j^sign * conjugator^-1`` of a peripheral identity."""

    conjugator: Word
    sign: int
    relator_index: int


@dataclass(frozen=True)
class GroupPresentation:
    generator_names: tuple
    relators: tuple
    meridian: Optional[Word] = None
    longitude: Optional[Word] = None
    peripheral_identity: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "generator_names", tuple(self.generator_names))
        object.__setattr__(self, "relators", tuple(self.relators))
        if self.peripheral_identity is not None:
            object.__setattr__(self, "peripheral_identity", tuple(self.peripheral_identity))
        r = len(self.generator_names)
        if len(set(self.generator_names)) != r:
            raise ParseError("duplicate generator names")
        if len(self.relators) != r - 1:
            raise DeficiencyMismatch(
                f"{r} generators need {r - 1} relators, got {len(self.relators)}"
            )
        words = list(self.relators)
        words += [w for w in (self.meridian, self.longitude) if w is not None]
        words += [t.conjugator for t in self.peripheral_identity or ()]
        for w in words:
            bad = [g for g in w.generators() if not 0 <= g < r]
            if bad:
                raise UnknownGenerator(f"generator index {bad[0]} out of range")
        for t in self.peripheral_identity or ():
            if t.sign not in (1, -1):
                raise ParseError(f"peripheral sign must be +1 or -1, got {t.sign}")
            if not 0 <= t.relator_index < len(self.relators):
                raise ParseError(f"peripheral relator index {t.relator_index} out of range")

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    def has_peripheral_data(self) -> bool:
        return (
            self.meridian is not None
            and self.longitude is not None
            and self.peripheral_identity is not None
        )

    def peripheral_product(self) -> Word:
        """Free reduction of the product of conjugated relators in the identity sequence."""
        if self.peripheral_identity is None:
            raise MissingPeripheralData("presentation has no peripheral identity sequence")
        w = Word()
        for t in self.peripheral_identity:
            w = w * (self.relators[t.relator_index] ** t.sign).conjugate(t.conjugator)
        return w

    def format(self) -> str:
        return format_presentation(self)


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<int>[+-]?\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[*^()]))")


class _WordParser:
    def __init__(self, text, names, line=None, col0=1):
        self.text = text
        self.names = names
        self.line = line
        self.col0 = col0
        self.tokens = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {stripped[pos]!r}", line, col0 + pos)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), col0 + start))
            pos = m.end()
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, self.col0 + len(self.text))

    def _next(self):
        tok = self._peek()
        self.i += 1
        return tok

    def parse(self) -> Word:
        if not self.tokens:
            raise ParseError("empty word", self.line, self.col0)
        w = self._product()
        kind, val, col = self._peek()
        if kind is not None:
            raise ParseError(f"unexpected token {val!r}", self.line, col)
        return w

    def _product(self):
        w = self._factor()
        while self._peek()[1] == "*":
            self._next()
            w = w * self._factor()
        return w

    def _factor(self):
        w = self._atom()
        if self._peek()[1] == "^":
            self._next()
            kind, val, col = self._next()
            if kind != "int":
                raise ParseError("expected integer exponent after '^'", self.line, col)
            w = w ** int(val)
        return w

    def _atom(self):
        kind, val, col = self._next()
        if kind == "op" and val == "(":
            w = self._product()
            kind2, val2, col2 = self._next()
            if val2 != ")":
                raise ParseError("expected ')'", self.line, col2)
            return w
        if kind == "int" and val.lstrip("+") == "1":
            return Word()
        if kind == "name":
            return Word.gen(*self._resolve(val, col))
        if kind is None:
            raise ParseError("unexpected end of word", self.line, col)
        raise ParseError(f"unexpected token {val!r}", self.line, col)

    def _resolve(self, token, col):
        low = token.lower()
        if low in self.names:
            idx = self.names.index(low)
            if token == low:
                return idx, 1
            if token == token.upper():
                return idx, -1
            raise ParseError(f"ambiguous mixed-case generator {token!r}", self.line, col)
        raise UnknownGenerator(f"unknown generator {token!r}", self.line, col)


def parse_word(text: str, names: Sequence[str], line=None, col0=1) -> Word:
    names = [n.lower() for n in names]
    return _WordParser(text, names, line, col0).parse()


_PERIPHERAL_ITEM = re.compile(r"^\s*(?P<sign>[+-])\s*(?P<idx>\d+)\s*@\s*(?P<word>.+?)\s*$")


def parse_presentation(text: str) -> GroupPresentation:
    """Parse the line-oriented presentation DSL (see module docstring)."""
    names = None
    rel_lines = []
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", lineno, 1)
        key, _, value = line.partition(":")
        key = key.strip().lower()
        col0 = line.index(":") + 2 + (len(value) - len(value.lstrip()))
        value = value.strip()
        if key in ("gens", "generators"):
            if names is not None:
                raise ParseError("generators declared twice", lineno, 1)
            names = [n.strip().lower() for n in value.split(",")] if value else []
            for n in names:
                if not re.fullmatch(r"[a-z_][a-z0-9_']*", n):
                    raise ParseError(f"invalid generator name {n!r}", lineno, col0)
        elif key in ("rel", "relator", "meridian", "longitude", "peripheral"):
            if key == "relator":
                key = "rel"
            if key == "rel":
                rel_lines.append((lineno, col0, value))
            elif key in fields:
                raise ParseError(f"{key} given twice", lineno, 1)
            else:
                fields[key] = (lineno, col0, value)
        else:
            raise ParseError(f"unknown key {key!r}", lineno, 1)
    if names is None:
        raise ParseError("missing 'gens:' line")
    relators = [parse_word(v, names, ln, c) for ln, c, v in rel_lines if v]
    kwargs = {}
    for key in ("meridian", "longitude"):
        if key in fields:
            ln, c, v = fields[key]
            kwargs[key] = parse_word(v, names, ln, c)
    if "peripheral" in fields:
        ln, c, v = fields["peripheral"]
        terms = []
        for item in v.split(";"):
            m = _PERIPHERAL_ITEM.match(item)
            if m is None:
                raise ParseError("peripheral items look like '+0 @ word'", ln, c)
            sign = 1 if m.group("sign") == "+" else -1
            terms.append(PeripheralTerm(parse_word(m.group("word"), names, ln), sign, int(m.group("idx"))))
        kwargs["peripheral_identity"] = tuple(terms)
    return GroupPresentation(tuple(names), tuple(relators), **kwargs)


def format_presentation(p: GroupPresentation) -> str:
    names = p.generator_names
    lines = ["gens: " + ", ".join(names)]
    lines += ["rel: " + r.format(names) for r in p.relators]
    if p.meridian is not None:
        lines.append("meridian: " + p.meridian.format(names))
    if p.longitude is not None:
        lines.append("longitude: " + p.longitude.format(names))
    if p.peripheral_identity is not None:
        items = [
            f"{'+' if t.sign > 0 else '-'}{t.relator_index} @ {t.conjugator.format(names)}"
            for t in p.peripheral_identity
        ]
        lines.append("peripheral: " + " ; ".join(items))
    return "\n".join(lines) + "\n"


def _word_from_json(obj, names):
    if isinstance(obj, str):
        return parse_word(obj, names)
    return Word(tuple((int(g), int(e)) for g, e in obj))


def presentation_from_dict(data: dict) -> GroupPresentation:
    """JSON form: ``generators``, ``relators`` and optional peripheral fields.

    Words are DSL strings or lists of ``[generator_index, exponent]`` pairs.
    """
    try:
        names = [str(n).lower() for n in data["generators"]]
    except KeyError:
        raise ParseError("JSON presentation needs a 'generators' field") from None
    relators = [_word_from_json(w, names) for w in data.get("relators", [])]
    kwargs = {}
    for key in ("meridian", "longitude"):
        if data.get(key) is not None:
            kwargs[key] = _word_from_json(data[key], names)
    if data.get("peripheral_identity") is not None:
        kwargs["peripheral_identity"] = tuple(
            PeripheralTerm(_word_from_json(t["conjugator"], names), int(t["sign"]), int(t["relator"]))
            for t in data["peripheral_identity"]
        )
    return GroupPresentation(tuple(names), tuple(relators), **kwargs)


def presentation_to_dict(p: GroupPresentation) -> dict:
    names = p.generator_names
    out = {"generators": list(names), "relators": [r.format(names) for r in p.relators]}
    if p.meridian is not None:
        out["meridian"] = p.meridian.format(names)
    if p.longitude is not None:
        out["longitude"] = p.longitude.format(names)
    if p.peripheral_identity is not None:
        out["peripheral_identity"] = [
            {"conjugator": t.conjugator.format(names), "sign": t.sign, "relator": t.relator_index}
            for t in p.peripheral_identity
        ]
    return out


def load_presentation(text: str) -> GroupPresentation:
    """Parse either the DSL or its JSON equivalent."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return presentation_from_dict(data)
    return parse_presentation(text)


# -- torus knots -----------------------------------------------------------

def torus_knot_presentation(q: int) -> GroupPresentation:
    """``<x, y | x^2 = y^q>`` for the (2, q) torus knot with full peripheral data."""
    if not isinstance(q, (int, np.integer)) or q < 3 or q % 2 == 0:
        raise InvalidParameter(f"torus knot parameter q must be an odd integer >= 3, got {q!r}")
    q = int(q)
    x, y = Word.gen(0), Word.gen(1)
    r = x ** 2 * y ** (-q)
    m = x * y ** ((1 - q) // 2)
    l = x ** 2 * m ** (-2 * q)
    identity = (PeripheralTerm(x, 1, 0), PeripheralTerm(m, -1, 0))
    return GroupPresentation(("x", "y"), (r,), meridian=m, longitude=l, peripheral_identity=identity)


def verify_peripheral_identity(p: GroupPresentation) -> bool:
    """True iff the identity sequence freely reduces to ``l m l^-1 m^-1``."""
    if not p.has_peripheral_data():
        raise MissingPeripheralData("meridian, longitude and peripheral identity are all required")
    commutator = p.longitude * p.meridian * p.longitude.inverse() * p.meridian.inverse()
    return p.peripheral_product() == commutator


# -- abelianization ----------------------------------------------------------

def exponent_sum_matrix(p: GroupPresentation) -> list:
    return [[rel.exponent_sum(j) for j in range(p.rank)] for rel in p.relators]


def abelianization_exponents(p: GroupPresentation) -> tuple:
    """Images ``n_j`` of the generators under the abelianization ``G -> Z``.

    The maximal minors of the exponent-sum matrix give the kernel up to scale;
    their gcd is 1 exactly when the abelianization is infinite cyclic.  The
    sign is fixed by sending the meridian to +1 (or, without a meridian, by
    making the first nonzero exponent positive).
    """
    E = exponent_sum_matrix(p)
    r = p.rank
    minors = []
    for j in range(r):
        sub = [row[:j] + row[j + 1:] for row in E]
        d = _bareiss.bareiss_det(sub, 0, 1, lambda a, b: a // b)
        minors.append((-1) ** j * d)
    g = reduce(math.gcd, (abs(m) for m in minors), 0)
    if g != 1:
        raise NotKnotLike("abelianization is not infinite cyclic")
    n = list(minors)
    if p.meridian is not None:
        s = sum(n[g_] * e for g_, e in p.meridian.letters)
        if abs(s) != 1:
            raise NotKnotLike(f"meridian maps to {s} in the abelianization, expected +-1")
        if s < 0:
            n = [-v for v in n]
    else:
        first = next(v for v in n if v != 0)
        if first < 0:
            n = [-v for v in n]
    return tuple(n)


# -- representations -----------------------------------------------------------

def evaluate_images(w: Word, images: Sequence[UnitQuaternion]) -> UnitQuaternion:
    result = UnitQuaternion.identity()
    for g, e in w.letters:
        result = quat_mul(result, images[g] ** e)
    return result


@dataclass(frozen=True)
class Representation:
    """Generator images of a homomorphism ``G -> SU(2)``, validated on the relators."""

    images: tuple
    residual: float = field(default=0.0)

    @classmethod
    def create(cls, p: GroupPresentation, images, eps_rep: float = EPS_REP) -> "Representation":
        images = tuple(
            im if isinstance(im, UnitQuaternion) else UnitQuaternion.from_array(im) for im in images
        )
        if len(images) != p.rank:
            raise InvalidRepresentation(f"expected {p.rank} generator images, got {len(images)}")
        res = relator_residual(p, images)
        if res >= eps_rep:
            raise InvalidRepresentation(f"relator residual {res:.3e} exceeds {eps_rep:.1e}")
        return cls(images, res)

    def __call__(self, w: Word) -> UnitQuaternion:
        return evaluate_word(w, self)

    def conjugated(self, a: UnitQuaternion) -> "Representation":
        ai = a.conjugate()
        return Representation(tuple(a * g * ai for g in self.images), self.residual)


def relator_residual(p: GroupPresentation, images) -> float:
    ident = UnitQuaternion.identity()
    return max((evaluate_images(r, images).distance(ident) for r in p.relators), default=0.0)


def evaluate_word(w: Word, rho: Representation) -> UnitQuaternion:
    return evaluate_images(w, rho.images)
