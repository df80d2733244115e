"""Lazy generators for the Champernowne-style constructions and marker machinery.

Binary streams yield the characters ``'0'`` and ``'1'``; block views yield l-bit
strings such as ``'01'``. Every stream replays identically on each iteration.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError, SizeError
from .gales import BINARY, Alphabet, parse_rational

#: largest α_i (in bits) that alpha_block will materialize
MAX_BLOCK_BITS = 1 << 26


@dataclass(frozen=True)
class BlockAlphabet:
    """A ⊆ {0,1}^l − {1^l}, in lexicographic order, with marker c = 1^l."""

    l: int
    members: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if self.l < 1:
            raise ParameterError("block length must be positive")
        if not self.members:
            raise ParameterError("block alphabet must be nonempty")
        for w in self.members:
            if len(w) != self.l or set(w) - {"0", "1"}:
                raise ParameterError(f"{w!r} is not an {self.l}-bit string")
        if self.marker in self.members:
            raise ParameterError(f"marker {self.marker} may not be a member")
        if list(self.members) != sorted(set(self.members)):
            raise ParameterError("members must be distinct and in lexicographic order")

    @property
    def marker(self) -> str:
        return "1" * self.l

    @property
    def size(self) -> int:
        return len(self.members)

    def alphabet(self) -> Alphabet:
        return Alphabet(self.members)

    def with_marker(self) -> Alphabet:
        return Alphabet(self.members + (self.marker,))


def choose_A(d, reduce: bool = True) -> BlockAlphabet:
    """Block alphabet for dimension d = d_n/d_d: l = d_d, the 2^d_n lex-smallest l-bit words.

    With ``reduce=False`` a string ``"p/q"`` keeps its written denominator.
    """
    if not reduce and isinstance(d, str) and "/" in d:
        num, den = (int(x) for x in d.split("/"))
    else:
        frac = parse_rational(d) if not isinstance(d, Fraction) else d
        num, den = frac.numerator, frac.denominator
    if den <= 0 or not 0 < num < den:
        raise ParameterError(f"d must lie strictly between 0 and 1, got {d}")
    members = tuple(format(i, f"0{den}b") for i in range(2**num))
    return BlockAlphabet(den, members)


def alpha_length(A: BlockAlphabet, i: int) -> int:
    return i * A.size**i * A.l


def stage_length(A: BlockAlphabet, k: int) -> int:
    """|α_k^k| in bits."""
    return k * alpha_length(A, k)


def _alpha_chars(A: BlockAlphabet, i: int) -> Iterator[str]:
    for word in itertools.product(A.members, repeat=i):
        yield from word


def _alpha_chars_reversed(A: BlockAlphabet, i: int) -> Iterator[str]:
    """A-characters of α_i in reverse order."""
    rev = A.members[::-1]
    for word in itertools.product(rev, repeat=i):
        yield from reversed(word)


def alpha_block(A: BlockAlphabet, i: int, budget: int = MAX_BLOCK_BITS) -> str:
    """α_i: all length-i strings over A concatenated in lexicographic order."""
    if i < 1:
        raise ParameterError("i must be positive")
    size = alpha_length(A, i)
    if size > budget:
        raise SizeError(f"α_{i} has {size} bits, over the budget of {budget}")
    return "".join(_alpha_chars(A, i))


class SequenceStream:
    """A replayable infinite (or finite) stream over ``alphabet``."""

    def __init__(self, factory: Callable[[], Iterator[str]], alphabet: Alphabet, name: str = ""):
        self._factory = factory
        self.alphabet = alphabet
        self.name = name

    def __iter__(self) -> Iterator[str]:
        return self._factory()

    def prefix(self, n: int) -> str | tuple[str, ...]:
        """First n symbols; a str when every symbol is one character."""
        head = tuple(itertools.islice(self, n))
        if len(head) < n:
            raise SizeError(f"stream {self.name!r} has only {len(head)} symbols")
        return "".join(head) if self.alphabet.single_char else head

    def __repr__(self):
        return f"SequenceStream({self.name!r})"


def stream_of(symbols: Iterable[str], alphabet: Alphabet = BINARY, name: str = "") -> SequenceStream:
    """A stream over a finite, already materialized sequence."""
    data = tuple(symbols)
    return SequenceStream(lambda: iter(data), alphabet, name)


def _bits(chars: Iterable[str]) -> Iterator[str]:
    for w in chars:
        yield from w


def _stage_chars(A: BlockAlphabet, k: int) -> Iterator[str]:
    for _ in range(k):
        yield from _alpha_chars(A, k)


def _stage_bits_reversed(A: BlockAlphabet, k: int) -> Iterator[str]:
    """Bit reversal of α_k^k, i.e. (bit reversal of α_k) repeated k times."""
    for _ in range(k):
        for w in _alpha_chars_reversed(A, k):
            yield from reversed(w)


def _stage_chars_reversed(A: BlockAlphabet, k: int) -> Iterator[str]:
    for _ in range(k):
        yield from _alpha_chars_reversed(A, k)


def _check_view(view: str):
    if view not in ("bits", "blocks"):
        raise ParameterError(f"view must be 'bits' or 'blocks', got {view!r}")


def build_champernowne(A: BlockAlphabet, view: str = "bits") -> SequenceStream:
    """U = α_1 α_2^2 α_3^3 ..."""
    _check_view(view)

    def chars():
        for k in itertools.count(1):
            yield from _stage_chars(A, k)

    if view == "blocks":
        return SequenceStream(chars, A.alphabet(), "champernowne")
    return SequenceStream(lambda: _bits(chars()), BINARY, "champernowne")


def reverse_blocks(A: BlockAlphabet) -> SequenceStream:
    """R = rev(α_1) rev(α_2^2) rev(α_3^3) ..., reversal taken bitwise."""

    def gen():
        for k in itertools.count(1):
            yield from _stage_bits_reversed(A, k)

    return SequenceStream(gen, BINARY, "reversed")


def _alternating(A: BlockAlphabet, marker: bool, reversal: str, view: str) -> SequenceStream:
    _check_view(view)
    if reversal not in ("bits", "chars"):
        raise ParameterError(f"reversal must be 'bits' or 'chars', got {reversal!r}")
    name = "C_prime" if marker else "C"

    if reversal == "chars":

        def chars():
            for k in itertools.count(1):
                yield from _stage_chars(A, k)
                if marker:
                    yield A.marker
                yield from _stage_chars_reversed(A, k)

        if view == "blocks":
            alphabet = A.with_marker() if marker else A.alphabet()
            return SequenceStream(chars, alphabet, name)
        return SequenceStream(lambda: _bits(chars()), BINARY, name)

    def bits():
        for k in itertools.count(1):
            yield from _bits(_stage_chars(A, k))
            if marker:
                yield from A.marker
            yield from _stage_bits_reversed(A, k)

    stream = SequenceStream(bits, BINARY, name)
    if view == "blocks":
        return as_blocks(stream, A.l)
    return stream


def build_C(A: BlockAlphabet, reversal: str = "bits", view: str = "bits") -> SequenceStream:
    """C = α_1 rev(α_1) α_2^2 rev(α_2^2) ...

    ``reversal="bits"`` reverses the bit string of each stage (what a stack replays);
    ``reversal="chars"`` reverses the order of A-characters, keeping C a sequence over A.
    """
    return _alternating(A, False, reversal, view)


def build_C_prime(A: BlockAlphabet, reversal: str = "bits", view: str = "bits") -> SequenceStream:
    """C' = α_1 c rev(α_1) α_2^2 c rev(α_2^2) ... with c = 1^l."""
    return _alternating(A, True, reversal, view)


def c_prime_stage_length(A: BlockAlphabet, k: int) -> int:
    """Bits in α_k^k c rev(α_k^k)."""
    return 2 * stage_length(A, k) + A.l


def c_prime_boundaries(A: BlockAlphabet, k_max: int) -> list[int]:
    """Bit positions at which stages 1..k_max of C' end."""
    return list(itertools.accumulate(c_prime_stage_length(A, k) for k in range(1, k_max + 1)))


def as_blocks(stream: SequenceStream, l: int, alphabet: Alphabet | None = None) -> SequenceStream:
    """Group a binary stream into consecutive l-bit tokens (a trailing partial block is dropped)."""
    if alphabet is None:
        alphabet = Alphabet(tuple(format(i, f"0{l}b") for i in range(2**l)))

    def gen():
        it = iter(stream)
        while True:
            chunk = "".join(itertools.islice(it, l))
            if len(chunk) < l:
                return
            yield chunk

    return SequenceStream(gen, alphabet, f"{stream.name}/blocks{l}")


class MarkerSchedule:
    """Strictly increasing insertion positions i_1 < i_2 < ... generated lazily."""

    def __init__(self, factory: Callable[[], Iterator[int]], name: str = ""):
        self._factory = factory
        self.name = name

    def __iter__(self) -> Iterator[int]:
        return self._factory()

    @classmethod
    def triangular(cls) -> MarkerSchedule:
        """i_j = j(j+1)/2, gaps j+1."""
        return cls(lambda: (j * (j + 1) // 2 for j in itertools.count(1)), "triangular")

    @classmethod
    def explicit(cls, positions: Iterable[int]) -> MarkerSchedule:
        data = tuple(positions)
        return cls(lambda: iter(data), "explicit")

    def head(self, horizon: int) -> list[int]:
        """Positions <= horizon."""
        return list(itertools.takewhile(lambda i: i <= horizon, self))

    def defects(self, horizon: int) -> list[str]:
        """Violations of strict increase or nondecreasing gaps among positions <= horizon."""
        out = []
        pos = self.head(horizon)
        if pos and pos[0] < 1:
            out.append(f"position {pos[0]} < 1")
        gaps = [b - a for a, b in zip(pos, pos[1:])]
        for j, g in enumerate(gaps, 1):
            if g <= 0:
                out.append(f"positions not increasing at index {j}")
        for j, (g0, g1) in enumerate(zip(gaps, gaps[1:]), 1):
            if g1 < g0:
                out.append(f"gap shrinks after index {j + 1}: {g0} -> {g1}")
        return out


def _check_schedule(sched: MarkerSchedule, horizon: int = 10_000):
    bad = sched.defects(horizon)
    if bad:
        raise ParameterError("invalid marker schedule: " + "; ".join(bad))


def splice(S: SequenceStream, T: SequenceStream, sched: MarkerSchedule) -> SequenceStream:
    """S[1..i1] T[1..i1] S[i1+1..i2] T[i1+1..i2] ...; ends when the schedule does."""
    _check_schedule(sched)
    symbols = tuple(dict.fromkeys(S.alphabet.symbols + T.alphabet.symbols))

    def gen():
        s_it, t_it = iter(S), iter(T)
        prev = 0
        for i in sched:
            yield from itertools.islice(s_it, i - prev)
            yield from itertools.islice(t_it, i - prev)
            prev = i

    return SequenceStream(gen, Alphabet(symbols), "spliced")


def insert_markers(S: SequenceStream, m: str, sched: MarkerSchedule) -> SequenceStream:
    """Insert ``m`` right after positions i_1 < i_2 < ... of S (so the j-th m lands at i_j + j)."""
    if m in S.alphabet:
        raise ParameterError(f"marker {m!r} already belongs to the alphabet")
    _check_schedule(sched)

    def gen():
        it = iter(S)
        prev = 0
        for i in sched:
            chunk = list(itertools.islice(it, i - prev))
            yield from chunk
            if len(chunk) < i - prev:
                return
            yield m
            prev = i
        yield from it

    return SequenceStream(gen, Alphabet(S.alphabet.symbols + (m,)), "marked")


def marker_count(sched: MarkerSchedule, n: int) -> int:
    """Markers among the first n output symbols of insert_markers (positions i_j + j <= n)."""
    count = 0
    for j, i in enumerate(sched, 1):
        if i + j > n:
            break
        count += 1
    return count
