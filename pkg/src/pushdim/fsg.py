"""Finite-state gamblers and their s-gales."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import ParameterError, StreamExhausted
from .gales import (
    EXACT_LIMIT,
    LOG_TOL,
    Alphabet,
    Capital,
    GaleParams,
    ValidationReport,
    as_capital,
    capital_cmp,
    gale_from_martingale,
    gale_params,
    log2_rational,
    prob_vector_defects,
)


@dataclass(frozen=True)
class FiniteStateGambler:
    """G = (Q, Σ, δ, β, q0). A (state, symbol) pair missing from ``transitions`` is undefined."""

    states: tuple[str, ...]
    alphabet: Alphabet
    transitions: Mapping[tuple[str, str], str]
    bets: Mapping[str, Mapping[str, Fraction]]
    start: str

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    def delta(self, q: str, a: str) -> str | None:
        return self.transitions.get((q, a))

    def bet(self, q: str, a: str) -> Fraction:
        return Fraction(self.bets.get(q, {}).get(a, 0))

    def with_start(self, q: str) -> FiniteStateGambler:
        return replace(self, start=q)


def validate_fsg(g: FiniteStateGambler) -> ValidationReport:
    report = ValidationReport()
    states = set(g.states)
    if len(states) != len(g.states):
        report.defects.append("duplicate state ids")
    if g.start not in states:
        report.defects.append(f"start state {g.start!r} is not a state")
    for (q, a), target in g.transitions.items():
        if q not in states:
            report.defects.append(f"transition from unknown state {q!r}")
        if a not in g.alphabet:
            report.defects.append(f"transition ({q}, {a}) on symbol outside the alphabet")
        if target not in states:
            report.defects.append(f"transition ({q}, {a}) targets unknown state {target!r}")
    for q in g.bets:
        if q not in states:
            report.defects.append(f"bets given for unknown state {q!r}")
    for q in g.states:
        if q not in g.bets:
            report.defects.append(f"state {q!r} has no bets")
            continue
        for d in prob_vector_defects(g.bets[q], g.alphabet):
            report.defects.append(f"state {q!r}: {d}")
        for a in g.alphabet:
            if (q, a) not in g.transitions:
                report.notes.append(f"transition ({q}, {a}) undefined")
    return report


def extended_delta(g: FiniteStateGambler, q: str | None, word: Iterable[str]) -> str | None:
    """δ*(q, w); None (undefined) is absorbing."""
    for a in word:
        if q is None:
            return None
        q = g.delta(q, a)
    return q


@dataclass(frozen=True)
class TraceStep:
    position: int
    state: str
    symbol: str
    bet: Fraction
    capital: Capital
    sgale: Capital
    stack_depth: int | None = None


@dataclass
class GaleTrace:
    """Per-step record of a gambler run.

    ``halted_at`` is the position whose transition was undefined; the run stops there
    and the gambler's capital counts as 0 on every longer prefix.
    """

    params: GaleParams
    steps: list[TraceStep] = field(default_factory=list)
    halted_at: int | None = None
    final_state: str | None = None
    final_stack: str | None = None

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    @property
    def final_capital(self) -> Capital:
        return self.steps[-1].capital if self.steps else Capital.of(1)

    @property
    def final_sgale(self) -> Capital:
        return self.steps[-1].sgale if self.steps else Capital.of(1)

    def capital_at(self, n: int) -> Capital:
        """d(S_n) for 0 <= n <= len(trace)."""
        if n == 0:
            return Capital.of(1)
        return self.steps[n - 1].capital

    def sgale_at(self, n: int) -> Capital:
        if n == 0:
            return Capital.of(1)
        return self.steps[n - 1].sgale

    def core(self) -> list[tuple]:
        """Steps without stack information, for comparing FSG and PDG runs."""
        return [(t.position, t.state, t.symbol, t.bet, t.capital, t.sgale) for t in self.steps]


class CapitalLedger:
    """Threads the martingale and its s-gale through a run."""

    def __init__(self, params: GaleParams, exact: bool):
        self.params = params
        self.size = params.alphabet_size
        self.log2_size = math.log2(self.size)
        self.exact = exact
        self.n = 0
        self.capital = Capital.of(1) if exact else Capital(0.0)

    def step(self, bet: Fraction) -> tuple[Capital, Capital]:
        self.n += 1
        if self.exact:
            self.capital = Capital.of(self.capital.exact * bet * self.size)
        elif bet == 0:
            self.capital = Capital(-math.inf)
        else:
            self.capital = Capital(self.capital.log2 + log2_rational(bet) + self.log2_size)
        sgale = gale_from_martingale(self.capital, self.params, self.n)
        return self.capital, sgale


def _resolve_exact(exact: bool | None, n: int) -> bool:
    return n <= EXACT_LIMIT if exact is None else exact


def run_fsg(
    g: FiniteStateGambler,
    input: Iterable[str],
    n: int,
    s=1,
    start: str | None = None,
    exact: bool | None = None,
) -> GaleTrace:
    """Run ``g`` on the first ``n`` symbols of ``input`` and record d_G and d_G^(s).

    ``start`` overrides q0 (the gale d_{G,q}). Exact rationals are kept by default
    for n <= EXACT_LIMIT.
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    params = gale_params(s, g.alphabet.size)
    trace = GaleTrace(params)
    q = g.start if start is None else start
    if q not in g.states:
        raise ParameterError(f"unknown start state {q!r}")
    ledger = CapitalLedger(params, _resolve_exact(exact, n))
    it = iter(input)
    for pos in range(1, n + 1):
        try:
            a = next(it)
        except StopIteration:
            trace.final_state = q
            raise StreamExhausted(f"input ended after {pos - 1} of {n} symbols", trace) from None
        if a not in g.alphabet:
            raise ParameterError(f"symbol {a!r} at position {pos} is not in the alphabet")
        bet = g.bet(q, a)
        capital, sgale = ledger.step(bet)
        trace.steps.append(TraceStep(pos, q, a, bet, capital, sgale))
        q = g.delta(q, a)
        if q is None:
            trace.halted_at = pos
            break
    trace.final_state = q
    return trace


def success_probe(trace: GaleTrace, threshold) -> int | None:
    """First position whose s-gale value reaches ``threshold``, or None."""
    threshold = as_capital(threshold)
    for step in trace.steps:
        if capital_cmp(step.sgale, threshold, tol=LOG_TOL) >= 0:
            return step.position
    return None


def fsg_gale(g: FiniteStateGambler, s=1, exact: bool = True):
    """The s-gale of ``g`` as a function on word tuples.

    Words running through an undefined transition get capital 0 past the point
    where the transition failed.
    """
    params = gale_params(s, g.alphabet.size)
    cache: dict[tuple, tuple[Capital, str | None]] = {(): (Capital.of(1) if exact else Capital(0.0), g.start)}

    def walk(word: tuple) -> tuple[Capital, str | None]:
        k = len(word)
        while word[:k] not in cache:
            k -= 1
        cap, q = cache[word[:k]]
        for i in range(k, len(word)):
            a = word[i]
            if q is None:
                cap = Capital.of(0) if exact else Capital(-math.inf)
            else:
                cap, q = cap.times(g.bet(q, a) * g.alphabet.size), g.delta(q, a)
            cache[word[: i + 1]] = (cap, q)
        return cap, q

    def d(word) -> Capital:
        word = tuple(word)
        return gale_from_martingale(walk(word)[0], params, len(word))

    d.state = lambda word: walk(tuple(word))[1]
    return d
