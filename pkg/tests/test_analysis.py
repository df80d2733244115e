import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pushdim.analysis import (
    block_entropy,
    count_occurrences,
    dimension_estimate,
    frequency,
    frequency_table,
    merge_counts,
    normality_report,
)
from pushdim.errors import UndefinedInput
from pushdim.gales import Alphabet
from pushdim.sequences import build_C, build_C_prime, build_champernowne, choose_A, stage_length

A2 = choose_A("1/2")
H_QUARTER = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))

bitstrings = st.text(alphabet="01", min_size=1, max_size=200)


def naive_count(w, s):
    return sum(1 for i in range(len(s) - len(w) + 1) if s[i : i + len(w)] == w)


def test_count_overlapping():
    assert count_occurrences("01", "0101") == 2


def test_count_self():
    assert count_occurrences("0110", "0110") == 1


def test_count_absent():
    assert count_occurrences("11", "0000") == 0


def test_count_word_longer_than_prefix_is_zero():
    assert count_occurrences("0101", "01") == 0


@given(st.text(alphabet="01", min_size=1, max_size=5), bitstrings)
def test_count_matches_naive_scan(w, s):
    assert count_occurrences(w, s) == naive_count(w, s)
    assert count_occurrences(tuple(w), tuple(s)) == naive_count(w, s)


def test_frequency_values():
    assert frequency("01", "0101") == Fraction(2, 3)
    assert frequency("0", "0000") == 1


def test_frequency_requires_long_enough_prefix():
    with pytest.raises(UndefinedInput):
        frequency("010", "01")


def test_prefix_changes_frequency_by_a_vanishing_amount():
    S = build_C_prime(A2).prefix(4000)
    u = "1101"
    gaps = [abs(frequency("01", u + S[:n]) - frequency("01", S[:n])) for n in (100, 1000, 4000)]
    assert gaps[0] > gaps[-1]
    for n in (100, 1000, 4000):
        assert abs(count_occurrences("01", u + S[:n]) - count_occurrences("01", S[:n])) <= len(u) + 2


# --- tables ---------------------------------------------------------------------------


@given(bitstrings, st.integers(1, 4))
def test_table_counts_every_window_once(s, l):
    if len(s) < l:
        return
    t = frequency_table(s, l)
    assert sum(t.counts.values()) == len(s) - l + 1 == t.denominator
    assert all(len(w) == l for w in t.counts)
    for w, c in t.counts.items():
        assert c == naive_count("".join(w), s)


def test_table_csv():
    t = frequency_table("0101", 2)
    assert t.to_csv() == "word,count\n00,0\n01,2\n10,1\n11,0\n"


@given(st.text(alphabet="01", min_size=20, max_size=300), st.integers(1, 3), st.integers(1, 6))
def test_sharded_counts_merge_to_whole(s, l, shards):
    # shard the windows: shard i covers windows starting in its slice
    n = len(s)
    cuts = sorted({0, n - l + 1, *[(n - l + 1) * i // shards for i in range(shards)]})
    parts = [frequency_table(s[a : b + l - 1], l) for a, b in zip(cuts, cuts[1:]) if b > a]
    assert merge_counts(parts) == frequency_table(s, l).counts


# --- entropy ---------------------------------------------------------------------------


def test_entropy_balanced():
    assert block_entropy("01010101", 1) == 1.0


def test_entropy_degenerate():
    assert block_entropy("00000000", 1) == 0.0


def test_entropy_alternating_pairs():
    s = "01" * 32
    c = Counter(s[i : i + 2] for i in range(len(s) - 1))
    total = sum(c.values())
    oracle = -sum(v / total * math.log2(v / total) for v in c.values()) / 2
    assert block_entropy(s, 2) == pytest.approx(oracle, abs=1e-12)
    assert block_entropy(s, 2) == pytest.approx(0.5, abs=1e-3)


@given(bitstrings, st.integers(1, 4))
def test_entropy_in_unit_interval(s, l):
    if len(s) < l:
        return
    h = block_entropy(s, l)
    assert 0.0 <= h <= 1.0


def test_entropy_is_one_only_when_equifrequent():
    assert block_entropy("0011", 1) == 1.0
    assert block_entropy("0001", 1) < 1.0


def test_c_prime_bit_entropy_near_quarter():
    report = dimension_estimate(build_C_prime(A2), 1, 100_000)
    assert report.rows[0].h == pytest.approx(H_QUARTER, abs=0.02)


def test_flagging_rule():
    report = dimension_estimate("01" * 100, 4, 200)
    assert [r.flagged for r in report.rows] == [False, False, True, True]
    assert report.headline.l == 4


def test_report_csv_header():
    csv = dimension_estimate("0110" * 50, 2, 200).to_csv()
    assert csv.splitlines()[0] == "l,n,H_l,max_dev,flagged"


def test_champernowne_block_entropy_trends_to_one():
    A = choose_A("1/2")
    U = build_champernowne(A, view="blocks")
    hs = [dimension_estimate(U, 1, n, alphabet=A.alphabet()).rows[0].h for n in (100, 1000, 10_000)]
    assert hs[-1] > 0.999


# --- normality ---------------------------------------------------------------------


def test_periodic_sequence_has_zero_deviation():
    assert normality_report("01" * 50, 1).max_dev == 0


def test_c_in_char_view_has_small_deviation():
    A = A2
    n = sum(2 * stage_length(A, k) // A.l for k in range(1, 7))
    stats = normality_report(build_C(A, reversal="chars", view="blocks"), 1, n)
    assert stats.max_dev == 0  # α blocks use every A-character equally often


def test_c_prime_not_normal_in_base_two():
    stats = normality_report(build_C_prime(A2), 2 * A2.l, 100_000)
    assert stats.max_dev > 0.05


def test_undefined_inputs():
    with pytest.raises(UndefinedInput):
        block_entropy("0", 2)
    with pytest.raises(UndefinedInput):
        frequency_table("0x1", 1)


def test_larger_alphabet():
    rng = random.Random(1)
    s = tuple(rng.choice("abc") for _ in range(5000))
    assert block_entropy(s, 1, Alphabet(("a", "b", "c"))) > 0.99
    assert block_entropy(("a",) * 10, 1, Alphabet(("a", "b", "c"))) == 0.0
