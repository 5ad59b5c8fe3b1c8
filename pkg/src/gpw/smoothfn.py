"""Exact profile functions with closed-form derivative towers.

Every profile ``f(y)`` used by the plane-wave metrics lives in one of four
closed classes:

* ``Polynomial``      -- ``c0 + c1*y + c2*y**2 + ...``
* ``ExpSum``          -- ``sum_i a_i * exp(l_i * y)``
* ``PowerTranslate``  -- ``a * (y + b)**c`` (domain ``y + b > 0`` unless ``c``
  is a non-negative integer)
* ``Sum``             -- a finite sum of the above

Differentiation never leaves the class, so derivative towers are evaluated in
closed form with no differencing.

Text form (used by the CLI and test fixtures)::

    poly:0,0,1          y**2
    exp:1@1+1@2         exp(y) + exp(2y)
    pow:12,0,2          12*y**2
    sum:(poly:0,1)|(exp:1@1)
"""

from __future__ import annotations

import abc
import fractions
import functools
import math
import re
from dataclasses import dataclass

import numpy as np
import sympy

__all__ = [
    "DSLParseError",
    "DerivativeTower",
    "DomainError",
    "ExpSum",
    "Polynomial",
    "PowerTranslate",
    "SmoothFunction",
    "Sum",
    "UnrepresentableError",
    "derivative",
    "eval_tower",
    "integration_anchor",
    "parse",
    "primitive",
    "sum_of",
]


class DomainError(ValueError):
    """Evaluation point outside the open interval where the function lives."""


class UnrepresentableError(ValueError):
    """Result would leave the closed function classes (e.g. a logarithm)."""


class DSLParseError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}: {text!r}")


def _fmt(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _is_nonneg_int(c: float) -> bool:
    return float(c).is_integer() and c >= 0


def _rational(v: float) -> sympy.Rational:
    # prefer a short fraction when it rounds to the same double (1/3, not 3333.../10^16)
    short = fractions.Fraction(v).limit_denominator(10**6)
    if float(short) == v:
        return sympy.Rational(short.numerator, short.denominator)
    return sympy.Rational(_fmt(v))


@dataclass(frozen=True)
class DerivativeTower:
    """Values ``[f(y), f'(y), ..., f^(K)(y)]`` at ``base_point``."""

    base_point: float
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("a derivative tower needs at least one entry")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError(f"non-finite tower entry at y={self.base_point}")

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def order(self) -> int:
        return len(self.values) - 1


class SmoothFunction(abc.ABC):
    """Base class of the closed function classes. Instances are immutable."""

    @abc.abstractmethod
    def _derivative1(self) -> "SmoothFunction": ...

    @abc.abstractmethod
    def _evaluate(self, y: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _antiderivative(self) -> "SmoothFunction":
        """Some antiderivative; the constant is fixed by ``primitive``."""

    @abc.abstractmethod
    def to_dsl(self) -> str: ...

    @abc.abstractmethod
    def to_sympy(self, y: sympy.Symbol) -> sympy.Expr: ...

    @abc.abstractmethod
    def scaled(self, s: float) -> "SmoothFunction": ...

    @property
    def domain(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def in_domain(self, y) -> bool:
        lo, hi = self.domain
        y = np.asarray(y, dtype=float)
        return bool(np.all((y > lo) & (y < hi)))

    def __call__(self, y):
        arr = np.asarray(y, dtype=float)
        if not self.in_domain(arr):
            raise DomainError(f"{self.to_dsl()} evaluated outside its domain {self.domain}")
        out = self._evaluate(arr)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, k: int = 1) -> "SmoothFunction":
        return derivative(self, k)

    def tower(self, y: float, K: int) -> DerivativeTower:
        return eval_tower(self, y, K)

    def primitive(self) -> "SmoothFunction":
        return primitive(self)

    def is_zero(self) -> bool:
        return False

    def __add__(self, other: "SmoothFunction") -> "SmoothFunction":
        if not isinstance(other, SmoothFunction):
            return NotImplemented
        return sum_of(self, other)

    def __neg__(self) -> "SmoothFunction":
        return self.scaled(-1.0)

    def __sub__(self, other: "SmoothFunction") -> "SmoothFunction":
        return self + (-other)

    def __str__(self) -> str:
        return self.to_dsl()


@dataclass(frozen=True)
class Polynomial(SmoothFunction):
    """Coefficients in ascending degree; trailing zeros are stripped."""

    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        c = [float(v) for v in self.coefficients]
        while c and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coefficients", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def _derivative1(self):
        c = self.coefficients
        return Polynomial(tuple(i * c[i] for i in range(1, len(c))))

    def _evaluate(self, y):
        if not self.coefficients:
            return np.zeros_like(y)
        return np.polynomial.polynomial.polyval(y, self.coefficients)

    def _antiderivative(self):
        c = self.coefficients
        return Polynomial((0.0,) + tuple(c[i] / (i + 1) for i in range(len(c))))

    def scaled(self, s):
        return Polynomial(tuple(s * v for v in self.coefficients))

    def to_dsl(self):
        if not self.coefficients:
            return "poly:0"
        return "poly:" + ",".join(_fmt(v) for v in self.coefficients)

    def to_sympy(self, y):
        return sympy.Add(*[_rational(c) * y**i for i, c in enumerate(self.coefficients)])


@dataclass(frozen=True)
class ExpSum(SmoothFunction):
    """``sum a*exp(l*y)`` over ``terms = ((a, l), ...)``."""

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(a), float(l)) for a, l in self.terms)
        if not terms:
            raise ValueError("an exponential sum needs at least one term")
        object.__setattr__(self, "terms", terms)

    def is_zero(self):
        return all(a == 0.0 for a, _ in self.terms)

    def _derivative1(self):
        terms = tuple((a * l, l) for a, l in self.terms if a * l != 0.0)
        return ExpSum(terms) if terms else Polynomial(())

    def _evaluate(self, y):
        out = np.zeros_like(y)
        for a, l in self.terms:
            out = out + a * np.exp(l * y)
        return out

    def _antiderivative(self):
        const = sum(a for a, l in self.terms if l == 0.0)
        terms = tuple((a / l, l) for a, l in self.terms if l != 0.0)
        linear = Polynomial((0.0, const))
        if not terms:
            return linear
        if const == 0.0:
            return ExpSum(terms)
        return Sum((linear, ExpSum(terms)))

    def scaled(self, s):
        return ExpSum(tuple((s * a, l) for a, l in self.terms))

    def to_dsl(self):
        return "exp:" + "+".join(f"{_fmt(a)}@{_fmt(l)}" for a, l in self.terms)

    def to_sympy(self, y):
        return sympy.Add(*[_rational(a) * sympy.exp(_rational(l) * y) for a, l in self.terms])


@dataclass(frozen=True)
class PowerTranslate(SmoothFunction):
    """``a * (y + b)**c``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def domain(self):
        if _is_nonneg_int(self.c):
            return (-math.inf, math.inf)
        return (-self.b, math.inf)

    def is_zero(self):
        return self.a == 0.0

    def _derivative1(self):
        if self.a == 0.0 or self.c == 0.0:
            return Polynomial(())
        return PowerTranslate(self.a * self.c, self.b, self.c - 1.0)

    def _evaluate(self, y):
        if self.c == 0.0:
            return np.full_like(y, self.a)
        return self.a * np.power(y + self.b, self.c)

    def _antiderivative(self):
        if self.c == -1.0:
            raise UnrepresentableError(
                "primitive of a*(y+b)**-1 is a logarithm, outside the closed classes"
            )
        return PowerTranslate(self.a / (self.c + 1.0), self.b, self.c + 1.0)

    def scaled(self, s):
        return PowerTranslate(s * self.a, self.b, self.c)

    def to_dsl(self):
        return f"pow:{_fmt(self.a)},{_fmt(self.b)},{_fmt(self.c)}"

    def to_sympy(self, y):
        return _rational(self.a) * (y + _rational(self.b)) ** _rational(self.c)

    def expanded(self) -> Polynomial:
        """Binomial expansion; only for non-negative integer exponents."""
        if not _is_nonneg_int(self.c):
            raise ValueError("only integer exponents expand to a polynomial")
        n = int(self.c)
        return Polynomial(
            tuple(self.a * math.comb(n, k) * self.b ** (n - k) for k in range(n + 1))
        )


@dataclass(frozen=True)
class Sum(SmoothFunction):
    parts: tuple[SmoothFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def domain(self):
        lo, hi = -math.inf, math.inf
        for p in self.parts:
            plo, phi = p.domain
            lo, hi = max(lo, plo), min(hi, phi)
        return (lo, hi)

    def is_zero(self):
        return all(p.is_zero() for p in self.parts)

    def _derivative1(self):
        return sum_of(*[p._derivative1() for p in self.parts])

    def _evaluate(self, y):
        out = np.zeros_like(y)
        for p in self.parts:
            out = out + p._evaluate(y)
        return out

    def _antiderivative(self):
        return sum_of(*[p._antiderivative() for p in self.parts])

    def scaled(self, s):
        return Sum(tuple(p.scaled(s) for p in self.parts))

    def to_dsl(self):
        return "sum:" + "|".join(f"({p.to_dsl()})" for p in self.parts)

    def to_sympy(self, y):
        return sympy.Add(*[p.to_sympy(y) for p in self.parts])


def sum_of(*parts: SmoothFunction) -> SmoothFunction:
    """Canonical sum: flattens, merges like terms, drops zeros.

    Integer-exponent powers are expanded into the polynomial part, exponential
    terms with equal rates are merged and rate-0 terms become constants.
    """
    flat: list[SmoothFunction] = []
    stack = list(parts)
    while stack:
        p = stack.pop(0)
        if isinstance(p, Sum):
            stack = list(p.parts) + stack
        else:
            flat.append(p)

    poly = [0.0]
    rates: dict[float, float] = {}
    powers: dict[tuple[float, float], float] = {}
    for p in flat:
        if isinstance(p, PowerTranslate) and _is_nonneg_int(p.c):
            p = p.expanded()
        if isinstance(p, Polynomial):
            c = p.coefficients
            poly.extend([0.0] * (len(c) - len(poly)))
            for i, v in enumerate(c):
                poly[i] += v
        elif isinstance(p, ExpSum):
            for a, l in p.terms:
                if l == 0.0:
                    poly[0] += a
                else:
                    rates[l] = rates.get(l, 0.0) + a
        elif isinstance(p, PowerTranslate):
            if p.a != 0.0:
                powers[(p.b, p.c)] = powers.get((p.b, p.c), 0.0) + p.a
        else:  # pragma: no cover - closed set of classes
            raise TypeError(f"unknown function class {type(p).__name__}")

    out: list[SmoothFunction] = []
    P = Polynomial(tuple(poly))
    if not P.is_zero():
        out.append(P)
    terms = tuple((a, l) for l, a in sorted(rates.items()) if a != 0.0)
    if terms:
        out.append(ExpSum(terms))
    for (b, c), a in sorted(powers.items()):
        if a != 0.0:
            out.append(PowerTranslate(a, b, c))
    if not out:
        return Polynomial(())
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


@functools.lru_cache(maxsize=4096)
def derivative(f: SmoothFunction, k: int = 1) -> SmoothFunction:
    """Exact ``k``-th derivative; ``k = 0`` returns ``f`` itself."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k == 0:
        return f
    return derivative(f, k - 1)._derivative1()


def eval_tower(f: SmoothFunction, y: float, K: int) -> DerivativeTower:
    """Closed-form values of ``f, f', ..., f^(K)`` at ``y``."""
    if K < 0:
        raise ValueError("tower order must be non-negative")
    y = float(y)
    if not f.in_domain(y):
        raise DomainError(f"y={y} outside domain {f.domain} of {f.to_dsl()}")
    values = tuple(float(derivative(f, k)._evaluate(np.asarray(y))) for k in range(K + 1))
    return DerivativeTower(y, values)


def integration_anchor(f: SmoothFunction) -> float:
    """Point where ``primitive(f)`` vanishes: 0 when inside the domain."""
    lo, hi = f.domain
    if lo < 0.0 < hi:
        return 0.0
    if math.isinf(lo) and math.isinf(hi):  # pragma: no cover - contains 0
        return 0.0
    if math.isinf(hi):
        return lo + 1.0
    if math.isinf(lo):
        return hi - 1.0
    return 0.5 * (lo + hi)


@functools.lru_cache(maxsize=1024)
def primitive(f: SmoothFunction) -> SmoothFunction:
    """Antiderivative ``F`` with ``F' = f`` and ``F(anchor) = 0``."""
    G = sum_of(f._antiderivative())
    y0 = integration_anchor(f)
    g0 = float(G._evaluate(np.asarray(y0)))
    if g0 == 0.0:
        return G
    return sum_of(G, Polynomial((-g0,))) if y0 != 0.0 else _append_constant(G, -g0)


def _append_constant(G: SmoothFunction, c: float) -> SmoothFunction:
    # keep G's own evaluation order so that F(0) == G(0) + c == 0 exactly
    return Sum((G, Polynomial((c,))))


# ----------------------------------------------------------------------------
# text form

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan"
_NUM_RE = re.compile(rf"^(?:{_NUM})$")


def _number(tok: str, text: str, pos: int) -> float:
    tok = tok.strip()
    if not _NUM_RE.match(tok):
        raise DSLParseError(f"expected a number, got {tok!r}", text, pos)
    v = float(tok)
    if not math.isfinite(v):
        raise DSLParseError("numbers must be finite", text, pos)
    return v


def _split_top(body: str, sep: str, text: str, offset: int) -> list[tuple[str, int]]:
    """Split on ``sep`` at parenthesis depth 0; returns (chunk, start) pairs."""
    out, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DSLParseError("unbalanced ')'", text, offset + i)
        elif ch == sep and depth == 0:
            out.append((body[start:i], offset + start))
            start = i + 1
    if depth != 0:
        raise DSLParseError("unbalanced '('", text, offset + len(body))
    out.append((body[start:], offset + start))
    return out


def _parse(text: str, s: str, offset: int) -> SmoothFunction:
    head, colon, body = s.partition(":")
    if not colon:
        raise DSLParseError("missing ':' after function kind", text, offset)
    base = offset + len(head) + 1
    kind = head.strip()
    if kind == "poly":
        if not body.strip():
            raise DSLParseError("polynomial needs at least one coefficient", text, base)
        coeffs, pos = [], base
        for tok in body.split(","):
            coeffs.append(_number(tok, text, pos))
            pos += len(tok) + 1
        return Polynomial(tuple(coeffs))
    if kind == "exp":
        if not body.strip():
            raise DSLParseError("exponential sum needs at least one term", text, base)
        terms = []
        # '+' separates terms unless it is an exponent sign
        pieces = re.split(r"(?<![eE@])\+", body)
        pos = base
        for piece in pieces:
            a, at, l = piece.partition("@")
            if not at:
                raise DSLParseError("exponential term must be 'a@l'", text, pos)
            terms.append((_number(a, text, pos), _number(l, text, pos + len(a) + 1)))
            pos += len(piece) + 1
        return ExpSum(tuple(terms))
    if kind == "pow":
        toks = body.split(",")
        if len(toks) != 3:
            raise DSLParseError("power needs exactly 'a,b,c'", text, base)
        vals, pos = [], base
        for tok in toks:
            vals.append(_number(tok, text, pos))
            pos += len(tok) + 1
        return PowerTranslate(*vals)
    if kind == "sum":
        parts = []
        for chunk, start in _split_top(body, "|", text, base):
            c = chunk.strip()
            if not (c.startswith("(") and c.endswith(")")) or len(c) < 3:
                raise DSLParseError("sum terms must be parenthesised", text, start)
            lead = chunk.index("(")
            parts.append(_parse(text, c[1:-1], start + lead + 1))
        return Sum(tuple(parts))
    raise DSLParseError(f"unknown function kind {kind!r}", text, offset)


def parse(text: str) -> SmoothFunction:
    """Parse the text form; raises :class:`DSLParseError` with a position."""
    return _parse(text, text.strip(), len(text) - len(text.lstrip()))

