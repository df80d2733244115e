"""Alphabets, rational betting vectors, capital values and the s-gale algebra."""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import gmpy2

from .errors import IrrationalScaling, MissingWordError, ParameterError, PrefixSetError

#: absolute tolerance on log2 values whenever exact arithmetic is unavailable
LOG_TOL = 1e-9

#: runs longer than this drop exact rationals and keep only the log2 mirror
EXACT_LIMIT = 10_000

Rational = Union[Fraction, int]
Word = tuple


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or an integer string. Floats are rejected."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        s = text.strip()
        num, slash, den = s.partition("/")
        try:
            if slash:
                return Fraction(int(num), int(den))
            return Fraction(int(s))
        except (ValueError, ZeroDivisionError):
            pass
    raise ParameterError(f"not an exact rational: {text!r} (expected 'p/q')")


def format_rational(x: Rational) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def log2_rational(x: Rational) -> float:
    """log2 of a nonnegative rational of any size; -inf at 0."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("log2 of a negative value")
    if x == 0:
        return -math.inf
    return math.log2(x.numerator) - math.log2(x.denominator)


def rational_power(base: Rational, exponent: Rational) -> Fraction | None:
    """``base ** exponent`` if the result is rational, else None."""
    base = Fraction(base)
    exponent = Fraction(exponent)
    if base < 0:
        raise ValueError("negative base")
    if base == 0:
        if exponent < 0:
            raise ZeroDivisionError("0 to a negative power")
        return Fraction(0) if exponent > 0 else Fraction(1)
    if exponent.denominator == 1:
        return base ** exponent.numerator
    k = exponent.denominator
    num, num_exact = gmpy2.iroot(base.numerator, k)
    den, den_exact = gmpy2.iroot(base.denominator, k)
    if not (num_exact and den_exact):
        return None
    return Fraction(int(num), int(den)) ** exponent.numerator


def power_product(factors: Iterable[tuple[Rational, Rational]]) -> tuple[Fraction, int]:
    """Reduce prod(base ** exp) to an exact pair (value, D) with value == product ** D."""
    factors = [(Fraction(b), Fraction(e)) for b, e in factors]
    D = math.lcm(1, *(e.denominator for _, e in factors))
    value = Fraction(1)
    for b, e in factors:
        value *= b ** int(e * D)
    return value, D


def compare_power_products(lhs, rhs) -> int:
    """Exact sign of prod(lhs) - prod(rhs) for positive bases and rational exponents.

    Both sides are lists of ``(base, exponent)`` pairs.
    """
    lhs = [(Fraction(b), Fraction(e)) for b, e in lhs]
    rhs = [(Fraction(b), Fraction(e)) for b, e in rhs]
    for b, _ in lhs + rhs:
        if b <= 0:
            raise ValueError("bases must be positive")
    D = math.lcm(1, *(e.denominator for _, e in lhs + rhs))
    # move everything to one side: prod(lhs)/prod(rhs) vs 1, raised to D
    ratio = Fraction(1)
    for b, e in lhs:
        ratio *= b ** int(e * D)
    for b, e in rhs:
        ratio /= b ** int(e * D)
    return (ratio > 1) - (ratio < 1)


@dataclass(frozen=True)
class Alphabet:
    """Ordered alphabet. Symbol order fixes lexicographic order everywhere."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise ParameterError("alphabet must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ParameterError(f"alphabet symbols not distinct: {self.symbols}")
        for a in self.symbols:
            if not isinstance(a, str) or not a:
                raise ParameterError(f"alphabet symbols must be nonempty strings, got {a!r}")

    @classmethod
    def binary(cls) -> Alphabet:
        return cls(("0", "1"))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __contains__(self, a) -> bool:
        return a in self.symbols

    def index(self, a: str) -> int:
        return self.symbols.index(a)

    def issubset(self, other: Alphabet) -> bool:
        return set(self.symbols) <= set(other.symbols)

    def words(self, length: int) -> Iterator[Word]:
        return itertools.product(self.symbols, repeat=length)

    def words_upto(self, length: int) -> Iterator[Word]:
        """All words of length 0..length in shortlex order."""
        for n in range(length + 1):
            yield from self.words(n)

    @property
    def single_char(self) -> bool:
        return all(len(a) == 1 for a in self.symbols)


BINARY = Alphabet.binary()


def fmt_word(word: Sequence[str]) -> str:
    if len(word) == 0:
        return "λ"
    if all(len(a) == 1 for a in word):
        return "".join(word)
    return " ".join(word)


def prob_vector_defects(weights: Mapping[str, Rational], alphabet: Alphabet) -> list[str]:
    """Reasons ``weights`` is not a rational probability vector over ``alphabet``."""
    defects = []
    for a, p in weights.items():
        if a not in alphabet:
            defects.append(f"bet on symbol {a!r} outside the alphabet")
        if not isinstance(p, (Fraction, int)) or isinstance(p, bool):
            defects.append(f"bet on {a!r} is not rational: {p!r}")
            continue
        if p < 0 or p > 1:
            defects.append(f"bet on {a!r} is {p} outside [0,1]")
    try:
        total = sum((Fraction(p) for p in weights.values()), Fraction(0))
    except TypeError:
        return defects
    if total != 1:
        defects.append(f"bets sum {total} ≠ 1")
    return defects


class ProbVector(Mapping[str, Fraction]):
    """Immutable rational probability vector; absent symbols carry weight 0."""

    __slots__ = ("_w", "alphabet")

    def __init__(self, weights: Mapping[str, Rational], alphabet: Alphabet):
        w = {a: Fraction(p) for a, p in weights.items()}
        defects = prob_vector_defects(w, alphabet)
        if defects:
            raise ParameterError("; ".join(defects))
        self._w = {a: w.get(a, Fraction(0)) for a in alphabet}
        self.alphabet = alphabet

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> ProbVector:
        p = Fraction(1, alphabet.size)
        return cls({a: p for a in alphabet}, alphabet)

    @classmethod
    def point(cls, alphabet: Alphabet, symbol: str) -> ProbVector:
        return cls({a: Fraction(int(a == symbol)) for a in alphabet}, alphabet)

    def __getitem__(self, a):
        return self._w[a]

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __repr__(self):
        inner = ", ".join(f"{a}: {p}" for a, p in self._w.items())
        return f"ProbVector({{{inner}}})"


@dataclass(frozen=True)
class Capital:
    """A nonnegative capital value: exact rational when known, always a log2 mirror."""

    log2: float
    exact: Fraction | None = None

    def __post_init__(self):
        if self.exact is not None:
            if self.exact < 0:
                raise ValueError("capital must be nonnegative")
            if self.exact == 0:
                if self.log2 != -math.inf:
                    raise ValueError("zero capital must have log2 = -inf")
            elif abs(self.log2 - log2_rational(self.exact)) > LOG_TOL:
                raise ValueError(f"log2 mirror {self.log2} disagrees with exact {self.exact}")
        elif math.isnan(self.log2) or self.log2 == math.inf:
            raise ValueError(f"bad log2 capital {self.log2}")

    @classmethod
    def of(cls, value: Rational) -> Capital:
        value = Fraction(value)
        return cls(log2_rational(value), value)

    @classmethod
    def from_log2(cls, log2: float) -> Capital:
        return cls(float(log2), None)

    @property
    def is_zero(self) -> bool:
        return self.log2 == -math.inf

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def times(self, factor: Rational) -> Capital:
        """Multiply by a rational factor."""
        factor = Fraction(factor)
        if self.exact is not None:
            return Capital.of(self.exact * factor)
        return Capital(self.log2 + log2_rational(factor))

    def shifted(self, log2_factor: float) -> Capital:
        """Multiply by 2**log2_factor in the log domain; drops the exact value."""
        return Capital(self.log2 + log2_factor)

    def inexact(self) -> Capital:
        return Capital(self.log2)

    def __float__(self):
        return 2.0**self.log2

    def __str__(self):
        if self.exact is not None:
            return str(self.exact)
        return f"2^{self.log2:.12g}"


ZERO = Capital.of(0)
ONE = Capital.of(1)


def as_capital(x) -> Capital:
    if isinstance(x, Capital):
        return x
    if isinstance(x, float):
        return Capital(math.log2(x) if x > 0 else -math.inf)
    return Capital.of(x)


def capital_cmp(a: Capital, b: Capital, tol: float = LOG_TOL) -> int:
    """Three-way comparison; exact when both sides are exact, else log2 within ``tol``."""
    if a.exact is not None and b.exact is not None:
        return (a.exact > b.exact) - (a.exact < b.exact)
    if a.log2 == b.log2:
        return 0
    diff = a.log2 - b.log2
    if abs(diff) <= tol:
        return 0
    return 1 if diff > 0 else -1


@dataclass(frozen=True)
class GaleParams:
    """The gale exponent s and the alphabet size it is taken over.

    ``s`` is normally rational; a float is accepted for irrational exponents such as
    those arising from alphabet changes, and forces log-domain evaluation.
    """

    s: Fraction | float
    alphabet_size: int = 2

    def __post_init__(self):
        s = self.s
        if isinstance(s, (int, str)) and not isinstance(s, bool):
            s = parse_rational(s)
        if not isinstance(s, (Fraction, float)):
            raise ParameterError(f"gale exponent must be rational or float, got {s!r}")
        if s < 0 or (isinstance(s, float) and not math.isfinite(s)):
            raise ParameterError(f"gale exponent must be >= 0, got {s}")
        if self.alphabet_size < 1:
            raise ParameterError("alphabet size must be positive")
        object.__setattr__(self, "s", s)

    @property
    def rational(self) -> bool:
        return isinstance(self.s, Fraction)

    def scaling(self, word_len: int) -> Fraction | None:
        """|Σ|^((s-1)·word_len) exactly, or None when irrational."""
        if not self.rational:
            return None
        return rational_power(self.alphabet_size, (self.s - 1) * word_len)

    def scaling_log2(self, word_len: int) -> float:
        return float(self.s - 1) * word_len * math.log2(self.alphabet_size)

    def step_factor(self) -> Fraction | None:
        """|Σ|^s exactly, or None when irrational."""
        if not self.rational:
            return None
        return rational_power(self.alphabet_size, self.s)


def gale_params(s, alphabet_size: int) -> GaleParams:
    if isinstance(s, GaleParams):
        if s.alphabet_size != alphabet_size:
            return GaleParams(s.s, alphabet_size)
        return s
    return GaleParams(s, alphabet_size)


def gale_from_martingale(mart_value, s: GaleParams, word_len: int, mode: str = "auto") -> Capital:
    """Scale a martingale value d(w) to the s-gale value |Σ|^((s-1)|w|)·d(w).

    ``mode="exact"`` raises IrrationalScaling when the factor is irrational;
    ``mode="log"`` never keeps the exact value.
    """
    if word_len < 0:
        raise ParameterError("word length must be nonnegative")
    mart_value = as_capital(mart_value)
    if mode not in ("auto", "exact", "log"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mart_value.is_zero:
        return ZERO if (mart_value.is_exact and mode != "log") else Capital(-math.inf)
    factor = s.scaling(word_len) if mode != "log" else None
    if mode == "exact":
        if mart_value.exact is None:
            raise IrrationalScaling("martingale value has no exact form")
        if factor is None:
            raise IrrationalScaling(
                f"{s.alphabet_size}^(({s.s}-1)*{word_len}) is irrational; use log mode"
            )
    if factor is not None and mart_value.exact is not None:
        return Capital.of(mart_value.exact * factor)
    return mart_value.shifted(s.scaling_log2(word_len))


def _lookup(d, word: Word) -> Capital:
    try:
        value = d(word) if callable(d) else d[word]
    except (KeyError, IndexError) as exc:
        raise MissingWordError(fmt_word(word)) from exc
    if value is None:
        raise MissingWordError(fmt_word(word))
    return as_capital(value)


def _log2_sum(logs: Iterable[float]) -> float:
    logs = [x for x in logs if x != -math.inf]
    if not logs:
        return -math.inf
    top = max(logs)
    return top + math.log2(math.fsum(2.0 ** (x - top) for x in logs))


def check_sgale_condition(
    d: Callable[[Word], Capital] | Mapping[Word, Capital],
    s: GaleParams,
    alphabet: Alphabet,
    max_len: int,
) -> list[Word]:
    """Words w with |w| <= max_len where |Σ|^-s · Σ_a d(wa) != d(w).

    ``d`` maps word tuples to s-gale values and must be defined up to length max_len+1.
    Comparison is exact when every value involved is exact and |Σ|^s is rational,
    otherwise on log2 values within LOG_TOL.
    """
    s = gale_params(s, alphabet.size)
    step = s.step_factor()
    violations = []
    for w in alphabet.words_upto(max_len):
        here = _lookup(d, w)
        children = [_lookup(d, w + (a,)) for a in alphabet]
        if step is not None and here.is_exact and all(c.is_exact for c in children):
            ok = sum(c.exact for c in children) == here.exact * step
        else:
            rhs = _log2_sum(c.log2 for c in children) - float(s.s) * math.log2(alphabet.size)
            if here.is_zero or rhs == -math.inf:
                ok = here.is_zero and rhs == -math.inf
            else:
                ok = abs(rhs - here.log2) <= LOG_TOL
        if not ok:
            violations.append(w)
    return violations


def prefix_set_violation(words: Iterable[Sequence[str]]) -> tuple[Word, Word] | None:
    """First pair (u, w) with u a prefix of w (or a duplicate), else None."""
    seen = set()
    for w in map(tuple, words):
        if w in seen:
            return w, w
        seen.add(w)
    # in sorted order, a prefix immediately precedes one of its extensions
    ws = sorted(seen)
    for u, w in zip(ws, ws[1:]):
        if w[: len(u)] == u:
            return u, w
    return None


def kraft_sum(
    d: Callable[[Word], Capital] | Mapping[Word, Capital],
    s: GaleParams,
    prefix_set: Iterable[Sequence[str]],
    u: Sequence[str] = (),
    alphabet: Alphabet = BINARY,
) -> tuple[Capital, bool]:
    """Σ_{w∈A} |Σ|^(-s|w|) d(uw) and whether it is <= d(u)."""
    words = [tuple(w) for w in prefix_set]
    bad = prefix_set_violation(words)
    if bad is not None:
        a, b = bad
        raise PrefixSetError(f"prefix-set violation: {fmt_word(a)} is a prefix of {fmt_word(b)}")
    s = gale_params(s, alphabet.size)
    u = tuple(u)
    bound = _lookup(d, u)
    terms = []
    for w in words:
        value = _lookup(d, u + w)
        weight = rational_power(alphabet.size, -s.s * len(w)) if s.rational else None
        if weight is not None and value.is_exact:
            terms.append(Capital.of(value.exact * weight))
        else:
            terms.append(value.shifted(-float(s.s) * len(w) * math.log2(alphabet.size)))
    if all(t.is_exact for t in terms):
        total = Capital.of(sum((t.exact for t in terms), Fraction(0)))
    else:
        total = Capital(_log2_sum(t.log2 for t in terms))
    return total, capital_cmp(total, bound) <= 0


@dataclass
class ValidationReport:
    """Outcome of a structural check. ``notes`` are informational only."""

    defects: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.defects

    def __bool__(self):
        return self.ok
