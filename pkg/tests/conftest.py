import itertools
import random
from fractions import Fraction

import pytest

from pushdim.fsg import FiniteStateGambler
from pushdim.gales import BINARY, Alphabet

GRID = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))


def bit_row(p0: Fraction) -> dict:
    return {"0": Fraction(p0), "1": 1 - Fraction(p0)}


def enumerate_bit_fsgs(grid=GRID, max_states=2, partial=False):
    """Every 1- and 2-state FSG over {0,1} with bets on ``grid``.

    With ``partial`` set, transitions may also be left undefined.
    """
    for k in range(1, max_states + 1):
        states = tuple(f"q{i}" for i in range(k))
        keys = [(q, a) for q in states for a in "01"]
        targets = states + ((None,) if partial else ())
        for tgt in itertools.product(targets, repeat=len(keys)):
            transitions = {key: t for key, t in zip(keys, tgt) if t is not None}
            for ps in itertools.product(grid, repeat=k):
                bets = {q: bit_row(p) for q, p in zip(states, ps)}
                yield FiniteStateGambler(states, BINARY, transitions, bets, "q0")


def random_fsg(rng: random.Random, alphabet: Alphabet = BINARY, max_states=3, den=8, partial=False):
    k = rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(k))
    transitions = {}
    for q in states:
        for a in alphabet:
            if partial and rng.random() < 0.15:
                continue
            transitions[(q, a)] = rng.choice(states)
    bets = {}
    for q in states:
        cuts = sorted(rng.randint(0, den) for _ in range(alphabet.size - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
        bets[q] = {a: Fraction(p, den) for a, p in zip(alphabet, parts)}
    return FiniteStateGambler(states, alphabet, transitions, bets, states[0])


@pytest.fixture
def rng():
    return random.Random(20240517)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
