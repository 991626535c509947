"""NC maps between matrix balls and their derivative calculus.

An :class:`NcMap` evaluates on matrix tuples of every size ("graded"), and
respects direct sums and similarities. Four kinds are provided: coordinate
scalings, polynomial coordinate tuples, ball automorphisms (Mobius maps),
and compositions.

The difference-differential operator reads the upper-right block of the map
evaluated at ``[[X, tZ], [0, Y]]``; with ``t = 1`` this is exact for
polynomial kinds, and for maps that are not entire ``t`` is shrunk so the
block point stays inside the domain (exact anyway, by linearity in ``Z``).
Derivatives are returned as dense matrices acting on vectorized tuples in
the package-wide column-stacking, coordinate-major convention.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, child_rng
from .errors import DimensionMismatchError, DomainError, ParseError
from .linalg import hermitian_sqrt
from .points import MatrixTuple, TangentTuple, row_norm
from .polynomials import (
    FreePolynomial,
    Word,
    format_polynomial,
    parse_polynomial,
)


class NcMap:
    """Base class: a graded map on ``d_in``-tuples producing ``d_out``-tuples."""

    d_in: int
    d_out: int
    domain_radius: float = 1.0
    is_entire: bool = False

    def _evaluate(self, x: MatrixTuple) -> MatrixTuple:
        raise NotImplementedError

    def _derivative(self, x: MatrixTuple) -> np.ndarray:
        return _derivative_by_columns(self, x)

    def describe(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.describe()!r})"


class ScalingMap(NcMap):
    """Coordinatewise scaling ``X_j -> c_j X_j`` with ``|c_j| <= 1``."""

    is_entire = True

    def __init__(self, factors: Sequence[complex]):
        factors = np.atleast_1d(np.asarray(factors, dtype=np.complex128))
        if factors.ndim != 1 or factors.size == 0:
            raise ValueError("factors must be a nonempty vector")
        if np.abs(factors).max() > 1 + 1e-12:
            raise ValueError(f"scaling factors must satisfy |c| <= 1, got {factors}")
        self.factors = factors
        self.d_in = self.d_out = factors.size

    def _evaluate(self, x: MatrixTuple) -> MatrixTuple:
        return MatrixTuple([c * mat for c, mat in zip(self.factors, x.coords)])

    def _derivative(self, x: MatrixTuple) -> np.ndarray:
        return np.kron(np.diag(self.factors), np.eye(x.n * x.n))

    def describe(self) -> str:
        return "scale factors=(" + ",".join(_fmt_complex(c) for c in self.factors) + ")"


def identity_map(d: int) -> ScalingMap:
    return ScalingMap(np.ones(d))


class PolynomialMap(NcMap):
    """Map whose coordinates are free polynomials in the input coordinates."""

    is_entire = True

    def __init__(self, coords: Sequence[FreePolynomial], d_in: int | None = None):
        coords = tuple(coords)
        if not coords:
            raise ValueError("a polynomial map needs at least one coordinate")
        inferred = max(p.d for p in coords)
        if d_in is None:
            d_in = inferred
        elif d_in < inferred:
            raise DimensionMismatchError(f"coordinates use x{inferred} but d_in={d_in}")
        self.coords = tuple(p.with_d(d_in) for p in coords)
        self.d_in = d_in
        self.d_out = len(coords)

    def _evaluate(self, x: MatrixTuple) -> MatrixTuple:
        cache = _WordCache(x)
        out = []
        for poly in self.coords:
            total = np.zeros((x.n, x.n), dtype=np.complex128)
            for word, coeff in poly.terms.items():
                total += coeff * cache.value(word)
            out.append(total)
        return MatrixTuple(out)

    def _derivative(self, x: MatrixTuple) -> np.ndarray:
        # The derivative in direction Z replaces one letter of each word by
        # the matching coordinate of Z, summed over positions:
        #   d(X^u X_j X^v)(Z_j) = X^u Z_j X^v,
        # whose vectorized matrix is kron((X^v)^T, X^u).
        n2 = x.n * x.n
        cache = _WordCache(x)
        blocks = np.zeros((self.d_out * n2, self.d_in * n2), dtype=np.complex128)
        eye = np.eye(x.n, dtype=np.complex128)
        for i, poly in enumerate(self.coords):
            for word, coeff in poly.terms.items():
                for pos, letter in enumerate(word):
                    left = cache.value(word[:pos]) if pos else eye
                    right = cache.value(word[pos + 1 :]) if pos + 1 < len(word) else eye
                    j = letter - 1
                    blocks[i * n2 : (i + 1) * n2, j * n2 : (j + 1) * n2] += coeff * np.kron(
                        right.T, left
                    )
        return blocks

    def describe(self) -> str:
        return "; ".join(format_polynomial(p) for p in self.coords)


class _WordCache:
    """Shared word-evaluation cache for one point (call-local)."""

    def __init__(self, x: MatrixTuple):
        self.x = x
        self.cache: dict[Word, np.ndarray] = {(): np.eye(x.n, dtype=np.complex128)}

    def value(self, word: Word) -> np.ndarray:
        got = self.cache.get(word)
        if got is None:
            if word and not 1 <= word[-1] <= self.x.d:
                raise DimensionMismatchError(
                    f"word uses letter {word[-1]} but the point has d={self.x.d}"
                )
            got = self.value(word[:-1]) @ self.x.coords[word[-1] - 1]
            self.cache[word] = got
        return got


class MobiusMap(NcMap):
    """Ball automorphism moving ``a`` (a scalar row vector, ``|a| < 1``) to 0.

    With ``delta = sqrt(1 - |a|^2)`` (scalar) and ``Delta = (I_d - a* a)^{1/2}``,
    the value at ``X`` (treated as the row block ``[X_1 ... X_d]``) is

        a (x) I_n  -  delta * (I_n - X a*)^{-1} X Delta,

    where ``X a* = sum_j conj(a_j) X_j`` and ``X Delta`` mixes coordinates by
    the d x d matrix ``Delta``. It is involutive and ball-preserving; both
    are enforced by tests rather than trusted.
    """

    def __init__(self, a: Sequence[complex]):
        a = np.atleast_1d(np.asarray(a, dtype=np.complex128))
        if a.ndim != 1 or a.size == 0:
            raise ValueError("parameter a must be a nonempty vector")
        norm = float(np.linalg.norm(a))
        if norm >= 1:
            raise ValueError(f"Mobius parameter needs |a| < 1, got |a| = {norm:.6f}")
        if norm == 0:
            raise ValueError("use identity_map / mobius() for a = 0")
        self.a = a
        self.d_in = self.d_out = a.size
        self.delta_scalar = math.sqrt(1.0 - norm * norm)
        outer = np.outer(a.conj(), a)
        self.delta_matrix = hermitian_sqrt(np.eye(a.size) - outer)

    def _resolvent(self, x: MatrixTuple) -> np.ndarray:
        m = np.eye(x.n, dtype=np.complex128) - sum(
            aj.conjugate() * mat for aj, mat in zip(self.a, x.coords)
        )
        try:
            return np.linalg.inv(m)
        except np.linalg.LinAlgError:
            raise DomainError("I - X a* is singular; the point is outside this map's domain") from None

    def _evaluate(self, x: MatrixTuple) -> MatrixTuple:
        r = self._resolvent(x)
        mixed = [
            sum(self.delta_matrix[j, k] * x.coords[j] for j in range(self.d_in))
            for k in range(self.d_in)
        ]
        eye = np.eye(x.n)
        return MatrixTuple(
            [self.a[k] * eye - self.delta_scalar * (r @ mixed[k]) for k in range(self.d_in)]
        )

    def _derivative(self, x: MatrixTuple) -> np.ndarray:
        # d Theta_k (Z) = -delta * [ R (Z a*) R C_k + R (Z Delta)_k ]
        # with R = (I - X a*)^{-1} and C_k = (X Delta)_k; per input coordinate
        # j this vectorizes to the two Kronecker blocks below.
        n = x.n
        n2 = n * n
        r = self._resolvent(x)
        eye_n = np.eye(n, dtype=np.complex128)
        blocks = np.zeros((self.d_out * n2, self.d_in * n2), dtype=np.complex128)
        rc = []
        for k in range(self.d_in):
            c_k = sum(self.delta_matrix[j, k] * x.coords[j] for j in range(self.d_in))
            rc.append(r @ c_k)
        kron_id_r = np.kron(eye_n, r)
        for k in range(self.d_out):
            for j in range(self.d_in):
                block = self.a[j].conjugate() * np.kron(rc[k].T, r) + self.delta_matrix[
                    j, k
                ] * kron_id_r
                blocks[k * n2 : (k + 1) * n2, j * n2 : (j + 1) * n2] = -self.delta_scalar * block
        return blocks

    def describe(self) -> str:
        return "mobius a=(" + ",".join(_fmt_complex(c) for c in self.a) + ")"


class ComposedMap(NcMap):
    """Composition ``outer . inner`` (inner applied first)."""

    def __init__(self, outer: NcMap, inner: NcMap):
        if inner.d_out != outer.d_in:
            raise DimensionMismatchError(
                f"cannot compose: inner produces {inner.d_out}-tuples, outer expects {outer.d_in}"
            )
        self.outer = outer
        self.inner = inner
        self.d_in = inner.d_in
        self.d_out = outer.d_out
        self.domain_radius = inner.domain_radius
        self.is_entire = outer.is_entire and inner.is_entire

    def _evaluate(self, x: MatrixTuple) -> MatrixTuple:
        return self.outer._evaluate(self.inner._evaluate(x))

    def _derivative(self, x: MatrixTuple) -> np.ndarray:
        mid = self.inner._evaluate(x)
        return self.outer._derivative(mid) @ self.inner._derivative(x)

    def describe(self) -> str:
        return f"compose({self.outer.describe()}; {self.inner.describe()})"


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------


def eval_map(f: NcMap, x: MatrixTuple) -> MatrixTuple:
    """Evaluate ``f`` at a point of its ball (strict row contraction)."""
    if x.d != f.d_in:
        raise DimensionMismatchError(f"point has d={x.d}, map expects d_in={f.d_in}")
    rn = row_norm(x)
    if rn >= f.domain_radius:
        raise DomainError(
            f"point outside the map's domain: row_norm = {rn:.6g} >= {f.domain_radius:.6g}"
        )
    return f._evaluate(x)


def diff_diff(f: NcMap, x: MatrixTuple, y: MatrixTuple, z: TangentTuple) -> TangentTuple:
    """The difference-differential ``Df(X, Y)(Z)``, an ``x.n x y.n`` block tuple.

    Computed as the upper-right block of ``f([[X, tZ], [0, Y]]) / t``; the
    result is exactly linear in ``Z``, so the internal rescaling by ``t``
    (needed only for maps that are not entire) introduces no approximation.
    """
    if x.d != f.d_in or y.d != f.d_in:
        raise DimensionMismatchError(f"points have d={x.d},{y.d}, map expects d_in={f.d_in}")
    if z.d != f.d_in or z.shape != (x.n, y.n):
        raise DimensionMismatchError(
            f"direction must be a d={f.d_in} tuple of {x.n}x{y.n} blocks, got d={z.d} {z.shape}"
        )
    rn = max(row_norm(x), row_norm(y))
    if rn >= f.domain_radius:
        raise DomainError(
            f"base points outside the map's domain: row_norm = {rn:.6g} >= {f.domain_radius:.6g}"
        )
    if f.is_entire:
        t = 1.0
    else:
        margin = f.domain_radius - rn
        t = 0.5 * margin / (1.0 + row_norm(z))
    n, m = x.n, y.n
    blocks = []
    for xj, yj, zj in zip(x.coords, y.coords, z.blocks):
        block = np.zeros((n + m, n + m), dtype=np.complex128)
        block[:n, :n] = xj
        block[:n, n:] = t * zj
        block[n:, n:] = yj
        blocks.append(block)
    value = f._evaluate(MatrixTuple(blocks))
    return TangentTuple([c[:n, n:] / t for c in value.coords])


def derivative_superop(f: NcMap, x: MatrixTuple) -> np.ndarray:
    """Matrix of the derivative ``E -> diff_diff(f, X, X, E)`` at ``X``.

    Shape ``(d_out * n^2, d_in * n^2)`` in the column-stacking,
    coordinate-major convention. Each map kind uses its exact closed form
    (scaling: diagonal; polynomial: one Kronecker block per letter
    occurrence; Mobius: resolvent formula; composition: chain rule); the
    generic column-by-column route is available separately as
    :func:`derivative_superop_columns` and the two agree to rounding.
    """
    if x.d != f.d_in:
        raise DimensionMismatchError(f"point has d={x.d}, map expects d_in={f.d_in}")
    rn = row_norm(x)
    if rn >= f.domain_radius:
        raise DomainError(
            f"point outside the map's domain: row_norm = {rn:.6g} >= {f.domain_radius:.6g}"
        )
    return f._derivative(x)


def _derivative_by_columns(f: NcMap, x: MatrixTuple) -> np.ndarray:
    n = x.n
    n2 = n * n
    out = np.zeros((f.d_out * n2, f.d_in * n2), dtype=np.complex128)
    for j in range(f.d_in):
        for col in range(n):
            for rowi in range(n):
                blocks = [np.zeros((n, n), dtype=np.complex128) for _ in range(f.d_in)]
                blocks[j][rowi, col] = 1.0
                image = diff_diff(f, x, x, TangentTuple(blocks))
                out[:, j * n2 + col * n + rowi] = image.to_vector()
    return out


def derivative_superop_columns(f: NcMap, x: MatrixTuple) -> np.ndarray:
    """Assemble the derivative matrix column-by-column from ``diff_diff``.

    Independent of the closed forms in :func:`derivative_superop`; used to
    cross-check them.
    """
    if x.d != f.d_in:
        raise DimensionMismatchError(f"point has d={x.d}, map expects d_in={f.d_in}")
    return _derivative_by_columns(f, x)


def finite_difference_derivative(f: NcMap, x: MatrixTuple, h: float = DEFAULT_TOL.fd_step) -> np.ndarray:
    """Central-difference approximation of :func:`derivative_superop`.

    An oracle: shares no code with the exact routes. Requires the point to
    be interior with margin greater than ``h``.
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    if x.d != f.d_in:
        raise DimensionMismatchError(f"point has d={x.d}, map expects d_in={f.d_in}")
    margin = f.domain_radius - row_norm(x)
    if margin <= h:
        raise DomainError(
            f"point too close to the boundary for step {h:g} (margin {margin:.3g})"
        )
    n = x.n
    n2 = n * n
    out = np.zeros((f.d_out * n2, f.d_in * n2), dtype=np.complex128)
    for j in range(f.d_in):
        for col in range(n):
            for rowi in range(n):
                bump = [c.copy() for c in x.coords]
                bump[j][rowi, col] += h
                plus = f._evaluate(MatrixTuple(bump))
                bump[j][rowi, col] -= 2 * h
                minus = f._evaluate(MatrixTuple(bump))
                column = (plus - minus) * (1.0 / (2 * h))
                out[:, j * n2 + col * n + rowi] = column.to_vector()
    return out


def mobius(a: Sequence[complex]) -> NcMap:
    """The ball automorphism swapping ``0`` and ``a``; identity when ``a = 0``."""
    a = np.atleast_1d(np.asarray(a, dtype=np.complex128))
    if float(np.linalg.norm(a)) >= 1:
        raise ValueError(f"Mobius parameter needs |a| < 1, got |a| = {np.linalg.norm(a):.6f}")
    if not a.any():
        return identity_map(a.size)
    return MobiusMap(a)


def compose(g: NcMap, f: NcMap) -> ComposedMap:
    """The composition ``g . f`` (so ``f`` is applied first)."""
    return ComposedMap(g, f)


def make_test_map(
    kind: str,
    factors: Sequence[complex] | None = None,
    g: FreePolynomial | str | None = None,
    conjugate_a: Sequence[complex] | None = None,
) -> NcMap:
    """Self-maps of the ball with known fixed sets, for verification runs.

    ``kind="scaling"``: coordinate scaling with ``factors`` of the form
    ``(1, ..., 1, c, ..., c')`` where the trailing factors have ``|c| < 1``;
    the fixed points are exactly the leading-axes subspace.

    ``kind="nonlinear"``: the d = 2 family ``(X, Y) -> (X, Y g(X))`` with a
    one-variable polynomial ``g`` satisfying ``|g(X)| <= 1`` whenever
    ``|X| <= 1`` (checked on seeded samples; default ``g = (1 + x1)/2``).
    Its fixed points are exactly ``{(X, 0)}`` at every level.

    ``conjugate_a``: when given, returns the conjugated self-map
    ``Theta_a . f . Theta_a`` (which fixes ``Theta_a(0) = a`` instead of 0).
    """
    if kind == "scaling":
        if factors is None:
            raise ValueError("kind='scaling' needs factors")
        factors = np.atleast_1d(np.asarray(factors, dtype=np.complex128))
        seen_contraction = False
        for c in factors:
            if c == 1:
                if seen_contraction:
                    raise ValueError(
                        "factors must be all-ones followed by strict contractions, "
                        f"got {factors}"
                    )
            elif abs(c) < 1:
                seen_contraction = True
            else:
                raise ValueError(f"trailing factors must satisfy |c| < 1, got {c}")
        base: NcMap = ScalingMap(factors)
    elif kind == "nonlinear":
        if isinstance(g, str):
            g = parse_polynomial(g)
        if g is None:
            g = parse_polynomial("0.5 + 0.5*x1")
        if g.d > 1:
            raise ValueError(f"g must be a polynomial in x1 only, got d={g.d}")
        _check_contractive_on_disc(g)
        x2 = FreePolynomial.variable(2, 2)
        base = PolynomialMap([FreePolynomial.variable(1, 2), x2 * g.with_d(2)], d_in=2)
    else:
        raise ValueError(f"unknown test-map kind {kind!r} (use 'scaling' or 'nonlinear')")

    if conjugate_a is not None:
        theta = mobius(conjugate_a)
        if theta.d_in != base.d_in:
            raise DimensionMismatchError(
                f"conjugation parameter has d={theta.d_in}, map has d={base.d_in}"
            )
        return compose(theta, compose(base, theta))
    return base


def _check_contractive_on_disc(g: FreePolynomial, samples: int = 60) -> None:
    """Reject g unless |g(X)| <= 1 on sampled contractions (operator norm)."""
    rng = child_rng(0, "make_test_map/contractive-check")
    worst = 0.0
    for i in range(samples):
        n = 1 + i % 3
        raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        norm = np.linalg.norm(raw, 2)
        if norm > 0:
            raw *= rng.uniform(0.0, 1.0) / norm
        value = sum(
            coeff * np.linalg.matrix_power(raw, len(word))
            for word, coeff in g.terms.items()
        )
        worst = max(worst, float(np.linalg.norm(value, 2)))
    if worst > 1 + 1e-9:
        raise ValueError(
            f"g is not contractive on the closed disc (sampled |g(X)| up to {worst:.6f})"
        )


# --------------------------------------------------------------------------
# map-spec text format
#
#   spec  := 'compose' '(' spec ';' spec ')'      (outer first)
#          | 'mobius' 'a=(' c ',' ... ')'
#          | 'scale' 'factors=(' c ',' ... ')'
#          | 'testmap' 'kind=' name [key=value ...]
#          | poly (';' poly)*                      (one polynomial per output)
#
# Complex entries use Python literal syntax (0.5, 1e-3, 2j, 0.1+0.2j);
# polynomial-valued parameters are wrapped in braces: g={0.5 + 0.5*x1}.
# --------------------------------------------------------------------------


def parse_map_spec(text: str) -> NcMap:
    """Parse the CLI map-spec format; errors carry character offsets."""
    stripped = text.strip()
    if not stripped:
        raise ParseError("empty map specification", position=0)
    offset = len(text) - len(text.lstrip())
    head = _leading_word(stripped)
    if head == "compose":
        return _parse_compose(text, offset + len("compose"))
    if head in ("mobius", "scale", "testmap"):
        params = _parse_params(text, offset + len(head), head)
        return _build_keyword_map(head, params, offset)
    return _parse_poly_list(text)


def _leading_word(s: str) -> str:
    word = ""
    for ch in s:
        if ch.isalpha():
            word += ch
        else:
            break
    return word


def _parse_compose(text: str, pos: int) -> NcMap:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    if pos >= len(text) or text[pos] != "(":
        raise ParseError("expected '(' after compose", position=pos)
    depth = 0
    split_at = None
    end = None
    for i in range(pos, len(text)):
        ch = text[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
            if depth == 0:
                end = i
                break
        elif ch == ";" and depth == 1 and split_at is None:
            split_at = i
    if end is None:
        raise ParseError("unbalanced parentheses in compose", position=pos)
    if split_at is None:
        raise ParseError("compose needs two ';'-separated specs", position=pos)
    tail = text[end + 1 :].strip()
    if tail:
        raise ParseError(f"unexpected text after compose: {tail!r}", position=end + 1)
    outer = _reoffset(text[pos + 1 : split_at], pos + 1)
    inner = _reoffset(text[split_at + 1 : end], split_at + 1)
    return compose(outer, inner)


def _reoffset(fragment: str, offset: int) -> NcMap:
    try:
        return parse_map_spec(fragment)
    except ParseError as err:
        if isinstance(err.position, int):
            raise ParseError(str(err.args[0]).split(" (at ")[0], position=err.position + offset) from None
        raise


def _parse_params(text: str, pos: int, head: str) -> dict[str, tuple[str, int]]:
    """Parse ``key=value`` pairs; values are (...) or {...} groups or bare tokens."""
    params: dict[str, tuple[str, int]] = {}
    i = pos
    while i < len(text):
        while i < len(text) and text[i].isspace():
            i += 1
        if i >= len(text):
            break
        key = ""
        start = i
        while i < len(text) and (text[i].isalpha() or text[i] == "_"):
            key += text[i]
            i += 1
        if not key or i >= len(text) or text[i] != "=":
            raise ParseError(f"expected key=value in {head} parameters", position=start)
        i += 1
        if i < len(text) and text[i] in "({":
            open_ch = text[i]
            close_ch = ")" if open_ch == "(" else "}"
            depth = 0
            vstart = i
            while i < len(text):
                if text[i] == open_ch:
                    depth += 1
                elif text[i] == close_ch:
                    depth -= 1
                    if depth == 0:
                        i += 1
                        break
                i += 1
            else:
                raise ParseError(f"unbalanced {open_ch!r} in {key} value", position=vstart)
            params[key] = (text[vstart:i], vstart)
        else:
            vstart = i
            while i < len(text) and not text[i].isspace():
                i += 1
            params[key] = (text[vstart:i], vstart)
    return params


def _parse_complex_tuple(raw: str, pos: int) -> np.ndarray:
    inner = raw.strip()
    if not (inner.startswith("(") and inner.endswith(")")):
        raise ParseError(f"expected a parenthesized tuple, got {raw!r}", position=pos)
    body = inner[1:-1]
    parts: list[str] = []
    depth = 0
    current = ""
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(current)
            current = ""
        else:
            current += ch
    parts.append(current)
    values = []
    for part in parts:
        token = part.strip().replace(" ", "")
        if not token:
            raise ParseError("empty entry in tuple", position=pos)
        try:
            values.append(complex(token))
        except ValueError:
            try:
                values.append(complex(token.replace("i", "j")))
            except ValueError:
                raise ParseError(f"malformed complex entry {part.strip()!r}", position=pos) from None
    return np.asarray(values, dtype=np.complex128)


def _build_keyword_map(head: str, params: dict[str, tuple[str, int]], offset: int) -> NcMap:
    def take(key: str, required: bool = True) -> tuple[str, int] | None:
        if key in params:
            return params.pop(key)
        if required:
            raise ParseError(f"{head} needs a {key}=... parameter", position=offset)
        return None

    try:
        if head == "mobius":
            raw, pos = take("a")
            result = mobius(_parse_complex_tuple(raw, pos))
        elif head == "scale":
            raw, pos = take("factors")
            result = ScalingMap(_parse_complex_tuple(raw, pos))
        else:  # testmap
            raw, pos = take("kind")
            kind = raw.strip()
            factors = g = conj = None
            got = take("factors", required=False)
            if got:
                factors = _parse_complex_tuple(*got)
            got = take("g", required=False)
            if got:
                body, gpos = got
                if not (body.startswith("{") and body.endswith("}")):
                    raise ParseError("g must be wrapped in braces: g={...}", position=gpos)
                try:
                    g = parse_polynomial(body[1:-1])
                except ParseError as err:
                    shift = gpos + 1 + (err.position if isinstance(err.position, int) else 0)
                    raise ParseError(str(err.args[0]).split(" (at ")[0], position=shift) from None
            got = take("a", required=False)
            if got:
                conj = _parse_complex_tuple(*got)
            result = make_test_map(kind, factors=factors, g=g, conjugate_a=conj)
    except ValueError as err:
        if isinstance(err, ParseError):
            raise
        raise ParseError(str(err), position=offset) from None
    if params:
        key = next(iter(params))
        raise ParseError(f"unknown {head} parameter {key!r}", position=params[key][1])
    return result


def _parse_poly_list(text: str) -> PolynomialMap:
    pieces: list[tuple[str, int]] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == ";" and depth == 0:
            pieces.append((text[start:i], start))
            start = i + 1
    pieces.append((text[start:], start))
    polys = []
    for fragment, shift in pieces:
        try:
            polys.append(parse_polynomial(fragment))
        except ParseError as err:
            pos = shift + (err.position if isinstance(err.position, int) else 0)
            raise ParseError(str(err.args[0]).split(" (at ")[0], position=pos) from None
    d = max(p.d for p in polys)
    return PolynomialMap([p.with_d(d) for p in polys], d_in=d)


def _fmt_complex(c: complex) -> str:
    c = complex(c)

    def fmt(v: float) -> str:
        return str(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)

    if c.imag == 0:
        return fmt(c.real)
    if c.real == 0:
        return f"{fmt(c.imag)}j"
    sign = "+" if c.imag >= 0 else "-"
    return f"{fmt(c.real)}{sign}{fmt(abs(c.imag))}j"
