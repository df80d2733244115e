"""Sliding-window frequencies, normalized block entropies and normality diagnostics."""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import UndefinedInput
from .gales import BINARY, Alphabet
from .sequences import SequenceStream

#: windows required per possible word before an entropy row is trusted
WINDOWS_PER_WORD = 50


def count_occurrences(w: Sequence[str], prefix: Sequence[str]) -> int:
    """Overlapping occurrences of w in prefix."""
    l = len(w)
    if l < 1:
        raise UndefinedInput("word must be nonempty")
    if isinstance(w, str) and isinstance(prefix, str):
        count, i = 0, prefix.find(w)
        while i != -1:
            count += 1
            i = prefix.find(w, i + 1)
        return count
    w = tuple(w)
    prefix = tuple(prefix)
    return sum(1 for i in range(len(prefix) - l + 1) if prefix[i : i + l] == w)


def frequency(w: Sequence[str], prefix: Sequence[str]) -> Fraction:
    """#(w, S_n) / (n - l + 1)."""
    n, l = len(prefix), len(w)
    if n < l:
        raise UndefinedInput(f"prefix of length {n} is shorter than the word ({l})")
    return Fraction(count_occurrences(w, prefix), n - l + 1)


def _codes(prefix: Sequence[str], alphabet: Alphabet) -> np.ndarray:
    index = {a: i for i, a in enumerate(alphabet)}
    try:
        return np.fromiter((index[a] for a in prefix), dtype=np.int64, count=len(prefix))
    except KeyError as exc:
        raise UndefinedInput(f"symbol {exc.args[0]!r} is not in the alphabet") from None


def _window_counts(codes: np.ndarray, k: int, l: int) -> np.ndarray:
    """Counts of every length-l window, indexed by its base-k code."""
    n = len(codes)
    if k**l > 1 << 26:
        raise UndefinedInput(f"{k}^{l} possible words is too many to tabulate")
    win = np.zeros(n - l + 1, dtype=np.int64)
    for j in range(l):
        win = win * k + codes[j : n - l + 1 + j]
    return np.bincount(win, minlength=k**l)


@dataclass
class FrequencyTable:
    """Sliding-window counts of all length-l words in a length-n prefix."""

    l: int
    n: int
    alphabet: Alphabet
    counts: dict[tuple[str, ...], int]

    @property
    def denominator(self) -> int:
        return self.n - self.l + 1

    def frequency(self, w: Sequence[str]) -> Fraction:
        return Fraction(self.counts.get(tuple(w), 0), self.denominator)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["word", "count"])
        for w in self.alphabet.words(self.l):
            out.writerow(["".join(w) if self.alphabet.single_char else " ".join(w), self.counts.get(w, 0)])
        return buf.getvalue()


def frequency_table(prefix: Sequence[str], l: int, alphabet: Alphabet = BINARY) -> FrequencyTable:
    n = len(prefix)
    if l < 1 or n < l:
        raise UndefinedInput(f"need 1 <= l <= n, got l={l}, n={n}")
    raw = _window_counts(_codes(prefix, alphabet), alphabet.size, l)
    words = alphabet.words(l)
    counts = {w: int(c) for w, c in zip(words, raw) if c}
    return FrequencyTable(l, n, alphabet, counts)


def _entropy_and_deviation(raw: np.ndarray, k: int, l: int) -> tuple[float, float, float]:
    total = raw.sum()
    p = raw[raw > 0] / total
    h = float(-(p * np.log2(p)).sum()) / (l * math.log2(k)) if k > 1 else 0.0
    dev = np.abs(raw / total - float(k) ** -l)
    return min(max(h, 0.0), 1.0), float(dev.max()), float(dev.mean())


def block_entropy(prefix: Sequence[str], l: int, alphabet: Alphabet = BINARY) -> float:
    """Plug-in normalized entropy of the length-l window distribution, in [0, 1]."""
    n = len(prefix)
    if l < 1 or n < l:
        raise UndefinedInput(f"need 1 <= l <= n, got l={l}, n={n}")
    raw = _window_counts(_codes(prefix, alphabet), alphabet.size, l)
    return _entropy_and_deviation(raw, alphabet.size, l)[0]


@dataclass(frozen=True)
class EntropyRow:
    l: int
    n: int
    h: float
    max_dev: float
    flagged: bool


@dataclass
class EntropyReport:
    rows: list[EntropyRow] = field(default_factory=list)

    @property
    def headline(self) -> EntropyRow:
        """The largest-l row: the estimate of finite-state dimension."""
        return self.rows[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["l", "n", "H_l", "max_dev", "flagged"])
        for r in self.rows:
            out.writerow([r.l, r.n, repr(r.h), repr(r.max_dev), int(r.flagged)])
        return buf.getvalue()


def _materialize(source, n: int | None) -> tuple[Sequence[str], Alphabet | None]:
    if isinstance(source, SequenceStream):
        if n is None:
            raise UndefinedInput("a length is required for a stream")
        head = tuple(itertools.islice(source, n))
        if len(head) < n:
            raise UndefinedInput(f"stream ended after {len(head)} symbols")
        return head, source.alphabet
    return (source if n is None else source[:n]), None


def dimension_estimate(
    stream, l_max: int, n: int, alphabet: Alphabet | None = None, windows_per_word: int = WINDOWS_PER_WORD
) -> EntropyReport:
    """H_l for l = 1..l_max over the first n symbols.

    Rows where n is below windows_per_word · |Σ|^l are flagged.
    """
    prefix, found = _materialize(stream, n)
    alphabet = alphabet or found or BINARY
    codes = _codes(prefix, alphabet)
    k = alphabet.size
    report = EntropyReport()
    for l in range(1, l_max + 1):
        if l > len(prefix):
            break
        raw = _window_counts(codes, k, l)
        h, dev, _ = _entropy_and_deviation(raw, k, l)
        flagged = len(prefix) < windows_per_word * k**l
        report.rows.append(EntropyRow(l, len(prefix), h, dev, flagged))
    return report


@dataclass(frozen=True)
class NormalityStats:
    l: int
    n: int
    max_dev: float
    mean_dev: float


def normality_report(stream, l: int, n: int | None = None, alphabet: Alphabet | None = None) -> NormalityStats:
    """Max and mean |freq(w) - |Σ|^-l| over all w ∈ Σ^l."""
    prefix, found = _materialize(stream, n)
    alphabet = alphabet or found or BINARY
    if l < 1 or len(prefix) < l:
        raise UndefinedInput(f"need 1 <= l <= n, got l={l}, n={len(prefix)}")
    raw = _window_counts(_codes(prefix, alphabet), alphabet.size, l)
    _, dev_max, dev_mean = _entropy_and_deviation(raw, alphabet.size, l)
    return NormalityStats(l, len(prefix), dev_max, dev_mean)


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def merge_counts(tables: Iterable[FrequencyTable]) -> dict[tuple[str, ...], int]:
    """Sum counts of tables computed over disjoint shards of the window range."""
    out: dict[tuple[str, ...], int] = {}
    for t in tables:
        for w, c in t.counts.items():
            out[w] = out.get(w, 0) + c
    return out
