"""Free (noncommuting) polynomials: algebra, evaluation, and text syntax.

A word is a tuple of letters ``(j_1, ..., j_k)`` with ``1 <= j <= d``,
representing the monomial ``x_{j_1} x_{j_2} ... x_{j_k}`` (empty word = 1).
A polynomial is a finite complex combination of words; evaluation replaces
letters with the coordinates of a :class:`~freeball.points.MatrixTuple`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatchError, ParseError
from .points import MatrixTuple

Word = tuple[int, ...]


def _clean_terms(terms: Mapping[Word, complex]) -> dict[Word, complex]:
    out: dict[Word, complex] = {}
    for word, coeff in terms.items():
        c = complex(coeff)
        if c != 0:
            out[tuple(int(j) for j in word)] = c
    return out


@dataclass(frozen=True, eq=False)
class FreePolynomial:
    """Polynomial in ``d`` noncommuting variables with complex coefficients."""

    d: int
    terms: dict[Word, complex]

    def __init__(self, d: int, terms: Mapping[Word, complex]):
        cleaned = _clean_terms(terms)
        max_letter = max((max(w) for w in cleaned if w), default=0)
        if d < max(max_letter, 1):
            raise DimensionMismatchError(f"polynomial uses x{max_letter} but d={d}")
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def zero(cls, d: int) -> "FreePolynomial":
        return cls(d, {})

    @classmethod
    def constant(cls, value: complex, d: int) -> "FreePolynomial":
        return cls(d, {(): complex(value)})

    @classmethod
    def variable(cls, j: int, d: int) -> "FreePolynomial":
        if not 1 <= j <= d:
            raise DimensionMismatchError(f"variable index {j} outside 1..{d}")
        return cls(d, {(j,): 1.0})

    @property
    def degree(self) -> int:
        """Length of the longest word (0 for constants and the zero polynomial)."""
        return max((len(w) for w in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, word: Word) -> complex:
        return self.terms.get(tuple(word), 0.0)

    def with_d(self, d: int) -> "FreePolynomial":
        return FreePolynomial(d, self.terms)

    def __add__(self, other) -> "FreePolynomial":
        other = _as_poly(other, self.d)
        merged = dict(self.terms)
        for w, c in other.terms.items():
            merged[w] = merged.get(w, 0.0) + c
        return FreePolynomial(max(self.d, other.d), merged)

    __radd__ = __add__

    def __neg__(self) -> "FreePolynomial":
        return FreePolynomial(self.d, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other) -> "FreePolynomial":
        return self + (-_as_poly(other, self.d))

    def __rsub__(self, other) -> "FreePolynomial":
        return _as_poly(other, self.d) - self

    def __mul__(self, other) -> "FreePolynomial":
        other = _as_poly(other, self.d)
        product: dict[Word, complex] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                product[w] = product.get(w, 0.0) + c1 * c2
        return FreePolynomial(max(self.d, other.d), product)

    def __rmul__(self, other) -> "FreePolynomial":
        return _as_poly(other, self.d) * self

    def __pow__(self, k: int) -> "FreePolynomial":
        if k < 0 or k != int(k):
            raise ValueError(f"exponent must be a nonnegative integer, got {k}")
        result = FreePolynomial.constant(1.0, self.d)
        for _ in range(int(k)):
            result = result * self
        return result

    def __repr__(self) -> str:
        return f"FreePolynomial({format_polynomial(self)!r}, d={self.d})"


def _as_poly(value, d: int) -> FreePolynomial:
    if isinstance(value, FreePolynomial):
        return value
    if isinstance(value, (int, float, complex)):
        return FreePolynomial.constant(value, d)
    raise TypeError(f"cannot combine FreePolynomial with {type(value).__name__}")


def eval_word(word: Word, x: MatrixTuple) -> np.ndarray:
    """Evaluate a single word at ``x`` (empty word gives the identity)."""
    result = np.eye(x.n, dtype=np.complex128)
    for letter in word:
        if not 1 <= letter <= x.d:
            raise DimensionMismatchError(f"word uses letter {letter} but the point has d={x.d}")
        result = result @ x.coords[letter - 1]
    return result


def eval_poly(p: FreePolynomial, x: MatrixTuple) -> np.ndarray:
    """Evaluate ``p`` at ``x`` with shared-prefix memoization.

    Word values are built suffix-by-suffix and cached, so families of terms
    with common prefixes (typical for parsed input) cost one matrix product
    per distinct prefix instead of one per letter per term.
    """
    if p.d > x.d:
        raise DimensionMismatchError(f"polynomial has d={p.d} but the point has d={x.d}")
    n = x.n
    cache: dict[Word, np.ndarray] = {(): np.eye(n, dtype=np.complex128)}

    def value(word: Word) -> np.ndarray:
        got = cache.get(word)
        if got is None:
            got = value(word[:-1]) @ x.coords[word[-1] - 1]
            cache[word] = got
        return got

    total = np.zeros((n, n), dtype=np.complex128)
    for word, coeff in p.terms.items():
        total += coeff * value(word)
    return total


def szego_kernel_truncated(
    z: MatrixTuple, w: MatrixTuple, t: np.ndarray, order: int
) -> tuple[np.ndarray, float]:
    """Truncated kernel ``sum_{|word| <= order} Z^word T (W^word)*`` plus a tail bound.

    ``t`` must be ``z.n x w.n``. Degree layers satisfy
    ``G_k = sum_j Z_j G_{k-1} W_j*``, so the truncation costs
    ``order * d`` products instead of enumerating ``d**order`` words.
    The reported tail bound is the coarse geometric estimate
    ``|T| * rho^(order+1) / (1 - rho)`` with
    ``rho = d * row_norm(Z) * row_norm(W)``; it is ``inf`` when
    ``rho >= 1``, in which case the truncated value is still returned.
    """
    from .points import row_norm

    if z.d != w.d:
        raise DimensionMismatchError(f"tuple lengths differ: {z.d} vs {w.d}")
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    t = np.asarray(t, dtype=np.complex128)
    if t.shape != (z.n, w.n):
        raise DimensionMismatchError(f"T has shape {t.shape}, expected {(z.n, w.n)}")

    layer = t.copy()
    total = t.copy()
    for _ in range(order):
        layer = sum(zj @ layer @ wj.conj().T for zj, wj in zip(z.coords, w.coords))
        total += layer

    rho = z.d * row_norm(z) * row_norm(w)
    if rho >= 1.0:
        tail = float("inf")
    else:
        tail = float(np.linalg.norm(t, 2) * rho ** (order + 1) / (1.0 - rho))
    return total, tail


# --------------------------------------------------------------------------
# text syntax
#
#   poly   := term (('+' | '-') term)*
#   term   := factor ('*' factor)*
#   factor := ('-' | '+') factor | atom (('^' | '**') INT)?
#   atom   := NUMBER | 'x' INT | '(' poly ')'
#
# NUMBER is a decimal or scientific literal, optionally with a trailing
# 'j' or 'i' for an imaginary part, e.g. 2, 0.5, 1e-3, 2j. Products must
# be written with '*' (no juxtaposition).
# --------------------------------------------------------------------------

_NUMBER_START = set("0123456789.")


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def error(self, message: str) -> ParseError:
        return ParseError(message, position=self.pos)

    def take_number(self) -> complex:
        self.skip_ws()
        start = self.pos
        text = self.text
        while self.pos < len(text) and text[self.pos] in _NUMBER_START:
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(text) and text[self.pos].isdigit():
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark
        literal = text[start : self.pos]
        imaginary = False
        if self.pos < len(text) and text[self.pos] in "ji":
            imaginary = True
            self.pos += 1
        try:
            value = float(literal)
        except ValueError:
            self.pos = start
            raise self.error(f"malformed number {literal!r}") from None
        return value * 1j if imaginary else complex(value)

    def take_variable(self) -> int:
        self.skip_ws()
        start = self.pos
        self.pos += 1  # the 'x'
        digits = ""
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            digits += self.text[self.pos]
            self.pos += 1
        if not digits:
            self.pos = start
            raise self.error("expected a variable index after 'x'")
        index = int(digits)
        if index < 1:
            self.pos = start
            raise self.error(f"variable index must be >= 1, got x{index}")
        return index

    def take_int(self) -> int:
        self.skip_ws()
        digits = ""
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            digits += self.text[self.pos]
            self.pos += 1
        if not digits:
            raise self.error("expected a nonnegative integer exponent")
        return int(digits)


def parse_polynomial(text: str, d: int | None = None) -> FreePolynomial:
    """Parse the text syntax into a polynomial.

    When ``d`` is given, variables beyond ``x{d}`` are rejected; otherwise
    ``d`` is inferred as the largest index used (minimum 1). Raises
    :class:`~freeball.errors.ParseError` with the failing character offset.
    """
    tok = _Tokenizer(text)
    poly = _parse_sum(tok)
    tok.skip_ws()
    if tok.pos != len(text):
        raise tok.error(f"unexpected {text[tok.pos]!r}")
    if d is not None:
        if poly.d > d:
            raise ParseError(f"polynomial uses x{poly.d} but d={d}", position=0)
        poly = poly.with_d(d)
    return poly


def _parse_sum(tok: _Tokenizer) -> FreePolynomial:
    result = _parse_product(tok)
    while tok.peek() in ("+", "-"):
        op = tok.text[tok.pos]
        tok.pos += 1
        rhs = _parse_product(tok)
        result = result + rhs if op == "+" else result - rhs
    return result


def _parse_product(tok: _Tokenizer) -> FreePolynomial:
    result = _parse_factor(tok)
    while tok.peek() == "*" and not tok.text.startswith("**", tok.pos):
        tok.pos += 1
        result = result * _parse_factor(tok)
    return result


def _parse_factor(tok: _Tokenizer) -> FreePolynomial:
    ch = tok.peek()
    if ch in ("+", "-"):
        tok.pos += 1
        inner = _parse_factor(tok)
        return inner if ch == "+" else -inner
    base = _parse_atom(tok)
    tok.skip_ws()
    if tok.text.startswith("**", tok.pos):
        tok.pos += 2
        return base ** tok.take_int()
    if tok.peek() == "^":
        tok.pos += 1
        return base ** tok.take_int()
    return base


def _parse_atom(tok: _Tokenizer) -> FreePolynomial:
    ch = tok.peek()
    if ch == "(":
        tok.pos += 1
        inner = _parse_sum(tok)
        if tok.peek() != ")":
            raise tok.error("expected ')'")
        tok.pos += 1
        return inner
    if ch == "x":
        j = tok.take_variable()
        return FreePolynomial(j, {(j,): 1.0})
    if ch in _NUMBER_START:
        return FreePolynomial.constant(tok.take_number(), 1)
    if ch == "":
        raise tok.error("unexpected end of input")
    raise tok.error(f"unexpected {ch!r}")


def _fmt_coeff(c: complex) -> str:
    def fmt_real(v: float) -> str:
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return repr(v)

    if c.imag == 0:
        return fmt_real(c.real)
    if c.real == 0:
        return f"{fmt_real(c.imag)}j"
    sign = "+" if c.imag > 0 else "-"
    return f"({fmt_real(c.real)}{sign}{fmt_real(abs(c.imag))}j)"


def _fmt_word(word: Word) -> str:
    parts: list[str] = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        run = j - i
        parts.append(f"x{word[i]}" if run == 1 else f"x{word[i]}^{run}")
        i = j
    return "*".join(parts)


def format_polynomial(p: FreePolynomial) -> str:
    """Render ``p`` in the text syntax; ``parse_polynomial`` round-trips it."""
    if not p.terms:
        return "0"
    pieces: list[str] = []
    for word in sorted(p.terms, key=lambda w: (len(w), w)):
        coeff = p.terms[word]
        if not word:
            body = _fmt_coeff(coeff)
        elif coeff == 1:
            body = _fmt_word(word)
        elif coeff == -1:
            body = "-" + _fmt_word(word)
        else:
            body = f"{_fmt_coeff(coeff)}*{_fmt_word(word)}"
        if pieces and not body.startswith("-"):
            pieces.append("+ " + body)
        elif pieces:
            pieces.append("- " + body[1:])
        else:
            pieces.append(body)
    return " ".join(pieces)
