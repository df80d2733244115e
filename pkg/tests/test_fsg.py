import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pushdim.errors import ParameterError, StreamExhausted
from pushdim.fsg import (
    FiniteStateGambler,
    extended_delta,
    fsg_gale,
    run_fsg,
    success_probe,
    validate_fsg,
)
from pushdim.gales import BINARY, LOG_TOL, Capital, GaleParams, check_sgale_condition, gale_from_martingale
from pushdim.pdg import c_prime_params, c_prime_pdg, run_pdg
from pushdim.sequences import build_C_prime, c_prime_boundaries

from conftest import random_fsg

HALF = Fraction(1, 2)
UNIFORM = FiniteStateGambler(("q",), BINARY, {("q", "0"): "q", ("q", "1"): "q"}, {"q": {"0": HALF, "1": HALF}}, "q")
BIASED = FiniteStateGambler(
    ("q",), BINARY, {("q", "0"): "q", ("q", "1"): "q"}, {"q": {"0": Fraction(3, 4), "1": Fraction(1, 4)}}, "q"
)


def test_uniform_bettor_validates():
    assert validate_fsg(UNIFORM).ok


def test_bets_summing_to_three_halves_are_a_defect():
    g = FiniteStateGambler(("q",), BINARY, {}, {"q": {"0": Fraction(3, 4), "1": Fraction(3, 4)}}, "q")
    report = validate_fsg(g)
    assert any("bets sum 3/2 ≠ 1" in d for d in report.defects)


def test_dangling_target_is_named():
    g = FiniteStateGambler(("q",), BINARY, {("q", "0"): "q9"}, {"q": {"0": HALF, "1": HALF}}, "q")
    report = validate_fsg(g)
    assert any("q9" in d for d in report.defects)


def test_undefined_transitions_are_notes_not_defects():
    g = FiniteStateGambler(("q",), BINARY, {("q", "0"): "q"}, {"q": {"0": HALF, "1": HALF}}, "q")
    report = validate_fsg(g)
    assert report.ok and report.notes == ["transition (q, 1) undefined"]


CYCLE = FiniteStateGambler(
    ("q0", "q1"),
    BINARY,
    {("q0", "0"): "q1", ("q1", "0"): "q0", ("q1", "1"): "q1"},
    {"q0": {"0": HALF, "1": HALF}, "q1": {"0": HALF, "1": HALF}},
    "q0",
)


def test_extended_delta_on_empty_word_is_identity():
    for q in CYCLE.states:
        assert extended_delta(CYCLE, q, "") == q


def test_extended_delta_follows_cycle():
    assert extended_delta(CYCLE, "q0", "00") == "q0"
    assert extended_delta(CYCLE, "q0", "0") == "q1"


def test_extended_delta_undefined_is_absorbing():
    assert extended_delta(CYCLE, "q0", "10") is None


def test_uniform_bettor_keeps_capital_one():
    bits = "0110100110" * 3
    trace = run_fsg(UNIFORM, bits, 10)
    assert [t.capital.exact for t in trace] == [1] * 10
    assert [t.position for t in trace] == list(range(1, 11))


def test_biased_bettor_two_zeros():
    trace = run_fsg(BIASED, "00", 2)
    assert trace.final_capital.exact == Fraction(9, 4)


def test_biased_bettor_two_zeros_half_gale():
    trace = run_fsg(BIASED, "00", 2, s=HALF)
    assert trace.final_sgale.exact == Fraction(9, 8)
    assert trace.final_sgale == gale_from_martingale(Fraction(9, 4), GaleParams(HALF), 2)


def test_zero_bet_sends_capital_to_zero_and_keeps_running():
    g = FiniteStateGambler(("q",), BINARY, {("q", "0"): "q", ("q", "1"): "q"}, {"q": {"0": 1, "1": 0}}, "q")
    trace = run_fsg(g, "0100", 4)
    assert [t.capital.exact for t in trace] == [2, 0, 0, 0]
    assert trace.halted_at is None


def test_undefined_transition_truncates_the_trace():
    trace = run_fsg(CYCLE, "0010", 4)
    assert len(trace) == 3 and trace.halted_at == 3 and trace.final_state is None


def test_short_input_raises_with_partial_trace():
    with pytest.raises(StreamExhausted) as err:
        run_fsg(UNIFORM, "010", 5)
    assert len(err.value.trace) == 3


def test_symbol_outside_alphabet_is_rejected():
    with pytest.raises(ParameterError):
        run_fsg(UNIFORM, "01x", 3)


def test_start_override_matches_a_clone():
    bits = "0010110111"
    a = run_fsg(CYCLE, bits, 10, start="q1")
    b = run_fsg(CYCLE.with_start("q1"), bits, 10)
    assert a.core() == b.core()


def test_log_mode_tracks_exact_mode():
    g = random_fsg(random.Random(3))
    bits = "".join(random.Random(4).choice("01") for _ in range(300))
    ex = run_fsg(g, bits, 300, s=Fraction(2, 3), exact=True)
    lg = run_fsg(g, bits, 300, s=Fraction(2, 3), exact=False)
    for a, b in zip(ex, lg):
        assert abs(a.sgale.log2 - b.sgale.log2) <= 1e-9 * max(1, abs(a.sgale.log2)) or a.sgale.log2 == b.sgale.log2


# --- success probe -------------------------------------------------------------------


class _FakeTrace:
    def __init__(self, values):
        from pushdim.fsg import TraceStep

        self.steps = [
            TraceStep(i, "q", "0", HALF, Capital.of(v), Capital.of(v)) for i, v in enumerate(values, 1)
        ]


def test_success_probe_first_crossing():
    assert success_probe(_FakeTrace([1, 2, 4, 8]), 5) == 4


def test_success_probe_none_when_flat():
    assert success_probe(_FakeTrace([1, 1, 1, 1]), 2) is None


def test_success_probe_on_p_matches_exact_oracle():
    params = c_prime_params("1/2", s="9/10", s_prime="7/10", eps="1/8")
    P = c_prime_pdg(params)
    n = c_prime_boundaries(params.A, 4)[-1]
    trace = run_pdg(P, build_C_prime(params.A), n, s=params.t)
    hit = success_probe(trace, 10)
    # oracle: first position whose t-gale value (log2) reaches log2(10)
    oracle = next(t.position for t in trace if t.sgale.log2 >= math.log2(10) - LOG_TOL)
    assert hit == oracle
    assert hit is not None and hit > c_prime_boundaries(params.A, 1)[-1]


# --- properties -------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([Fraction(1), HALF, Fraction(3, 4)]))
def test_two_recurrences_agree(seed, s):
    """The s-gale recurrence with |Σ|^s per step equals the scaled martingale."""
    rng = random.Random(seed)
    g = random_fsg(rng)
    bits = "".join(rng.choice("01") for _ in range(24))
    trace = run_fsg(g, bits, 24, s=s)
    d = Fraction(1)
    gale_log2 = 0.0
    q = g.start
    for step in trace:
        bet = g.bets[q][step.symbol]
        d *= bet * 2
        # d^(s)(wa) = d^(s)(w) · β(a) · 2^s, carried in log2
        gale_log2 = -math.inf if bet == 0 else gale_log2 + math.log2(bet) + float(s)
        q = g.transitions[(q, step.symbol)]
        assert step.capital.exact == d
        if gale_log2 == -math.inf:
            assert step.sgale.is_zero
        else:
            assert abs(step.sgale.log2 - gale_log2) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_fsg_gale_tree_satisfies_gale_condition(seed):
    g = random_fsg(random.Random(seed))
    for s in (1, HALF):
        assert check_sgale_condition(fsg_gale(g, s), s, BINARY, 8) == []


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_runs_are_deterministic(seed):
    rng = random.Random(seed)
    g = random_fsg(rng, partial=True)
    bits = "".join(rng.choice("01") for _ in range(50))
    assert run_fsg(g, bits, 50).core() == run_fsg(g, bits, 50).core()
