"""Exact ordinal arithmetic below epsilon_0, in Cantor normal form.

An ordinal is a finite sum  w^e1*c1 + w^e2*c2 + ... + w^en*cn  with
strictly decreasing exponents e1 > e2 > ... > en (themselves ordinals of
the same kind) and coefficients ci >= 1.  Zero is the empty sum.  The
representation is canonical: two ordinals are equal iff their term
sequences are structurally equal, so dataclass equality and hashing are
the semantic ones.

Construction does not normalize; the arithmetic below only ever builds
canonical sequences, and parse_ordinal folds arbitrary sums through
`add`, so non-canonical input text is normalized before it is stored.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

__all__ = [
    "CnfOrdinal",
    "ZERO",
    "ONE",
    "OMEGA",
    "cmp",
    "add",
    "omega_pow",
    "rank_sum",
    "parse_ordinal",
    "render_ordinal",
]


@dataclass(frozen=True)
class CnfOrdinal:
    """An ordinal below epsilon_0 as a tuple of (exponent, coefficient) pairs."""

    terms: tuple[tuple["CnfOrdinal", int], ...] = ()

    def __post_init__(self):
        prev = None
        for pair in self.terms:
            exp, coeff = pair
            if not isinstance(exp, CnfOrdinal):
                raise TypeError("exponent must be a CnfOrdinal, got %r" % (exp,))
            if not isinstance(coeff, int) or isinstance(coeff, bool) or coeff < 1:
                raise ValueError("coefficient must be a positive int, got %r" % (coeff,))
            if prev is not None and cmp(prev, exp) <= 0:
                raise ValueError("exponents must be strictly decreasing")
            prev = exp

    @classmethod
    def from_int(cls, n: int) -> "CnfOrdinal":
        if n < 0:
            raise ValueError("ordinals are non-negative")
        if n == 0:
            return cls()
        return cls(((cls(), n),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero)

    def as_int(self) -> int:
        if not self.is_finite:
            raise ValueError("not a finite ordinal: %s" % self)
        return self.terms[0][1] if self.terms else 0

    def __add__(self, other: "CnfOrdinal") -> "CnfOrdinal":
        return add(self, other)

    def __lt__(self, other):
        return cmp(self, other) < 0

    def __le__(self, other):
        return cmp(self, other) <= 0

    def __gt__(self, other):
        return cmp(self, other) > 0

    def __ge__(self, other):
        return cmp(self, other) >= 0

    def __str__(self):
        return render_ordinal(self)

    def __repr__(self):
        return "CnfOrdinal(%s)" % render_ordinal(self)


ZERO = CnfOrdinal()
ONE = CnfOrdinal.from_int(1)
OMEGA = CnfOrdinal(((ONE, 1),))


def cmp(a: CnfOrdinal, b: CnfOrdinal) -> int:
    """Three-way comparison of the total order: -1, 0 or 1.

    Term sequences compare lexicographically by (exponent, coefficient);
    a proper prefix is the smaller ordinal.
    """
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = cmp(ea, eb)
        if c != 0:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    if len(a.terms) != len(b.terms):
        return -1 if len(a.terms) < len(b.terms) else 1
    return 0


def add(a: CnfOrdinal, b: CnfOrdinal) -> CnfOrdinal:
    """Ordinal sum a + b.  Terms of a below b's leading exponent are absorbed."""
    if b.is_zero:
        return a
    if a.is_zero:
        return b
    lead = b.terms[0][0]
    kept = []
    merged_coeff = 0
    for exp, coeff in a.terms:
        c = cmp(exp, lead)
        if c > 0:
            kept.append((exp, coeff))
        elif c == 0:
            merged_coeff = coeff
            break
        else:
            break
    if merged_coeff:
        first = (lead, merged_coeff + b.terms[0][1])
        return CnfOrdinal(tuple(kept) + (first,) + b.terms[1:])
    return CnfOrdinal(tuple(kept) + b.terms)


def omega_pow(a: CnfOrdinal) -> CnfOrdinal:
    """w raised to the ordinal a."""
    return CnfOrdinal(((a, 1),))


def rank_sum(alphas) -> CnfOrdinal:
    """1 + w^a0 + w^a1 + ... for the given sequence of exponents.

    This is the shape every node rank takes; the left 1 is absorbed as
    soon as an infinite power arrives.
    """
    total = ONE
    for alpha in alphas:
        total = add(total, omega_pow(alpha))
    return total


# ---------------------------------------------------------------------------
# Text form.
#
#   ord := prod ("+" prod)*
#   prod := "w" ("^" "(" ord ")" | "^" nat)? ("*" nat)? | nat
#
# Whitespace is insignificant.  render_ordinal emits the canonical text;
# parse_ordinal accepts any well-formed sum and normalizes it.


class _OrdScanner:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def skip_ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.i] if self.i < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ParseError("expected %r" % ch, pos=self.i)
        self.i += 1

    def nat(self) -> int:
        self.skip_ws()
        start = self.i
        while self.i < len(self.text) and self.text[self.i].isdigit():
            self.i += 1
        if self.i == start:
            raise ParseError("expected a natural number", pos=start)
        return int(self.text[start : self.i])


def _parse_prod(sc: _OrdScanner) -> CnfOrdinal:
    ch = sc.peek()
    if ch == "w":
        sc.i += 1
        exp = ONE
        if sc.peek() == "^":
            sc.i += 1
            if sc.peek() == "(":
                sc.i += 1
                exp = _parse_sum(sc)
                sc.expect(")")
            else:
                exp = CnfOrdinal.from_int(sc.nat())
        coeff = 1
        if sc.peek() == "*":
            sc.i += 1
            coeff = sc.nat()
            if coeff == 0:
                raise ParseError("coefficient must be positive", pos=sc.i)
        return CnfOrdinal(((exp, coeff),))
    if ch.isdigit():
        return CnfOrdinal.from_int(sc.nat())
    raise ParseError("expected 'w' or a natural number", pos=sc.i)


def _parse_sum(sc: _OrdScanner) -> CnfOrdinal:
    total = _parse_prod(sc)
    while sc.peek() == "+":
        sc.i += 1
        total = add(total, _parse_prod(sc))
    return total


def parse_ordinal(text: str) -> CnfOrdinal:
    sc = _OrdScanner(text)
    result = _parse_sum(sc)
    sc.skip_ws()
    if sc.i != len(sc.text):
        raise ParseError("trailing input after ordinal", pos=sc.i)
    return result


def render_ordinal(o: CnfOrdinal) -> str:
    """Canonical text; parse_ordinal(render_ordinal(o)) == o."""
    if o.is_zero:
        return "0"
    parts = []
    for exp, coeff in o.terms:
        if exp.is_zero:
            parts.append(str(coeff))
            continue
        if exp == ONE:
            base = "w"
        elif exp.is_finite:
            base = "w^%d" % exp.as_int()
        else:
            base = "w^(%s)" % render_ordinal(exp)
        parts.append(base if coeff == 1 else "%s*%d" % (base, coeff))
    return " + ".join(parts)
