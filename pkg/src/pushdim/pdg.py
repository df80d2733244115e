"""Deterministic pushdown gamblers and the two-stage gambler P that exploits C'."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction

from .errors import LambdaDivergence, ParameterError, StreamExhausted
from .fsg import CapitalLedger, FiniteStateGambler, GaleTrace, TraceStep, _resolve_exact
from .gales import (
    BINARY,
    Alphabet,
    Capital,
    ValidationReport,
    compare_power_products,
    gale_from_martingale,
    gale_params,
    parse_rational,
    prob_vector_defects,
)
from .sequences import BlockAlphabet, choose_A
from .transforms import prefix_closure

#: the empty-input symbol in transition keys
LAMBDA = "λ"

#: default bound on consecutive λ-moves before one consuming step
DEFAULT_FUEL = 10**6


@dataclass(frozen=True)
class PushdownGambler:
    """P = (Q, Σ, Γ, δ, β, q0, z).

    ``transitions`` maps (state, stack_top, symbol or LAMBDA) to (state, replacement);
    the top is popped and replaced by the replacement string, whose first character
    becomes the new top. Missing keys are undefined. Missing bet rows are uniform.
    """

    states: tuple[str, ...]
    alphabet: Alphabet
    stack_alphabet: tuple[str, ...]
    transitions: Mapping[tuple[str, str, str], tuple[str, str]]
    bets: Mapping[tuple[str, str], Mapping[str, Fraction]]
    start: str
    bottom: str = "z"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "stack_alphabet", tuple(self.stack_alphabet))

    def bet(self, q: str, top: str, a: str) -> Fraction:
        row = self.bets.get((q, top))
        if row is None:
            return Fraction(1, self.alphabet.size)
        return Fraction(row.get(a, 0))


@dataclass(frozen=True)
class PdConfig:
    """State plus stack contents, top first; the bottom marker is the last character."""

    state: str
    stack: str

    @property
    def top(self) -> str:
        return self.stack[0]


def initial_config(p: PushdownGambler) -> PdConfig:
    return PdConfig(p.start, p.bottom)


def validate_pdg(p: PushdownGambler) -> ValidationReport:
    report = ValidationReport()
    states = set(p.states)
    gamma = set(p.stack_alphabet)
    z = p.bottom
    if p.start not in states:
        report.defects.append(f"start state {p.start!r} is not a state")
    if z not in gamma:
        report.defects.append(f"bottom marker {z!r} is not in the stack alphabet")
    for g in p.stack_alphabet:
        if len(g) != 1:
            report.defects.append(f"stack symbol {g!r} must be a single character")
    if LAMBDA in p.alphabet:
        report.defects.append(f"input alphabet may not contain {LAMBDA}")

    reads: dict[tuple[str, str], set[str]] = {}
    for (q, top, a), (q2, repl) in p.transitions.items():
        where = f"({q}, {top}, {a})"
        if q not in states:
            report.defects.append(f"transition {where} from unknown state")
        if top not in gamma:
            report.defects.append(f"transition {where} on unknown stack symbol")
        if a != LAMBDA and a not in p.alphabet:
            report.defects.append(f"transition {where} on unknown input symbol")
        if q2 not in states:
            report.defects.append(f"transition {where} targets unknown state {q2!r}")
        if set(repl) - gamma:
            report.defects.append(f"transition {where} pushes symbols outside the stack alphabet")
        if top == z:
            if not repl.endswith(z):
                report.defects.append(f"bottom marker dropped at {where}")
            elif z in repl[:-1]:
                report.defects.append(f"bottom marker pushed above the bottom at {where}")
        elif z in repl:
            report.defects.append(f"bottom marker pushed above the bottom at {where}")
        reads.setdefault((q, top), set()).add(a)
    for (q, top), symbols in reads.items():
        if LAMBDA in symbols and len(symbols) > 1:
            report.defects.append(f"determinism violated at ({q},{top})")

    for (q, top), row in p.bets.items():
        if q not in states or top not in gamma:
            report.defects.append(f"bets given for unknown pair ({q}, {top})")
            continue
        for d in prob_vector_defects(row, p.alphabet):
            report.defects.append(f"bets at ({q}, {top}): {d}")
    for q in p.states:
        for top in p.stack_alphabet:
            if (q, top) not in p.bets:
                report.notes.append(f"no bets at ({q}, {top}); uniform assumed")
    return report


def lambda_closure(p: PushdownGambler, c: PdConfig, fuel: int = DEFAULT_FUEL) -> PdConfig:
    """Apply λ-moves until none is enabled."""
    stack = list(reversed(c.stack))
    q = _close(p, c.state, stack, fuel)
    return PdConfig(q, "".join(reversed(stack)))


def _close(p: PushdownGambler, q: str, stack: list[str], fuel: int) -> str:
    # stack is bottom-first here, so the top is stack[-1]
    steps = 0
    while stack:
        move = p.transitions.get((q, stack[-1], LAMBDA))
        if move is None:
            return q
        steps += 1
        if steps > fuel:
            raise LambdaDivergence(f"more than {fuel} consecutive λ-moves from state {q!r}")
        q, repl = move
        stack.pop()
        stack.extend(reversed(repl))
    return q


def run_pdg(
    p: PushdownGambler,
    input: Iterable[str],
    n: int,
    s=1,
    exact: bool | None = None,
    fuel: int = DEFAULT_FUEL,
    config: PdConfig | None = None,
) -> GaleTrace:
    """Run ``p`` on the first ``n`` symbols of ``input``.

    Before each consuming step the configuration is λ-closed; the bet is then taken
    from (state, stack top). Steps record the stack depth at betting time.
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    params = gale_params(s, p.alphabet.size)
    trace = GaleTrace(params)
    ledger = CapitalLedger(params, _resolve_exact(exact, n))
    config = config or initial_config(p)
    q = config.state
    stack = list(reversed(config.stack))
    it = iter(input)
    for pos in range(1, n + 1):
        q = _close(p, q, stack, fuel)
        if not stack:
            trace.halted_at = pos - 1
            break
        top = stack[-1]
        try:
            a = next(it)
        except StopIteration:
            trace.final_state = q
            raise StreamExhausted(f"input ended after {pos - 1} of {n} symbols", trace) from None
        if a not in p.alphabet:
            raise ParameterError(f"symbol {a!r} at position {pos} is not in the alphabet")
        bet = p.bet(q, top, a)
        capital, sgale = ledger.step(bet)
        trace.steps.append(TraceStep(pos, q, a, bet, capital, sgale, len(stack)))
        move = p.transitions.get((q, top, a))
        if move is None:
            trace.halted_at = pos
            q = None
            break
        q, repl = move
        stack.pop()
        stack.extend(reversed(repl))
    trace.final_state = q
    trace.final_stack = "".join(reversed(stack))
    return trace


def pdg_gale(p: PushdownGambler, s=1, exact: bool = True, fuel: int = DEFAULT_FUEL):
    """The s-gale of ``p`` as a function on word tuples (0 past an undefined transition)."""
    params = gale_params(s, p.alphabet.size)
    start = (Capital.of(1) if exact else Capital(0.0), p.start, p.bottom)
    cache = {(): start}

    def walk(word):
        k = len(word)
        while word[:k] not in cache:
            k -= 1
        cap, q, stack = cache[word[:k]]
        for i in range(k, len(word)):
            a = word[i]
            if q is None:
                cap = Capital.of(0) if exact else Capital(-math.inf)
            else:
                closed = lambda_closure(p, PdConfig(q, stack), fuel)
                q, stack = closed.state, closed.stack
                cap = cap.times(p.bet(q, stack[0], a) * p.alphabet.size)
                move = p.transitions.get((q, stack[0], a))
                if move is None:
                    q = None
                else:
                    q, stack = move[0], move[1] + stack[1:]
            cache[word[: i + 1]] = (cap, q, stack)
        return cap, q

    def d(word):
        word = tuple(word)
        return gale_from_martingale(walk(word)[0], params, len(word))

    d.defined = lambda word: walk(tuple(word))[1] is not None
    return d


def fsg_as_pdg(g: FiniteStateGambler, bottom: str = "z") -> PushdownGambler:
    """A pushdown gambler that never touches its stack and otherwise copies ``g``."""
    transitions = {(q, bottom, a): (t, bottom) for (q, a), t in g.transitions.items()}
    bets = {(q, bottom): dict(g.bets.get(q, {})) for q in g.states}
    return PushdownGambler(g.states, g.alphabet, (bottom,), transitions, bets, g.start, bottom)


@dataclass(frozen=True)
class CPrimeParams:
    d: Fraction
    s: Fraction
    s_prime: Fraction
    eps: Fraction
    A: BlockAlphabet

    @property
    def l(self) -> int:
        return self.A.l

    @property
    def t(self) -> Fraction:
        return self.s / 2


def eps_bound(l: int, s: Fraction, s_prime: Fraction) -> float:
    """1 - 2^(l(s'-s)), the strict upper limit on eps."""
    return 1 - 2.0 ** float(l * (s_prime - s))


def eps_in_range(eps: Fraction, l: int, s: Fraction, s_prime: Fraction) -> bool:
    """0 < eps < 1 - 2^(l(s'-s)), decided exactly."""
    if not 0 < eps < 1:
        return False
    return compare_power_products([(2, l * (s_prime - s))], [(1 - eps, 1)]) < 0


def default_eps(l: int, s: Fraction, s_prime: Fraction) -> Fraction:
    """A small-denominator rational near the midpoint of the legal eps interval."""
    mid = eps_bound(l, s, s_prime) / 2
    for limit in (100, 10**4, 10**6, 10**9):
        eps = Fraction(mid).limit_denominator(limit)
        if eps_in_range(eps, l, s, s_prime):
            return eps
    raise ParameterError(f"could not find a rational eps below {2 * mid}")


def _param(x, name):
    if x is None or (isinstance(x, str) and x == "auto"):
        return None
    try:
        return parse_rational(x)
    except ParameterError as exc:
        raise ParameterError(f"{name}: {exc}") from None


def c_prime_params(d, s=None, s_prime=None, eps=None, reduce: bool = True) -> CPrimeParams:
    """Resolve and check the parameters of P. ``None``/"auto" picks defaults:
    s = (1+d)/2, s' = (d+s)/2, eps near the middle of its legal interval."""
    A = choose_A(d, reduce=reduce)
    d = Fraction(A.size.bit_length() - 1, A.l)
    s = _param(s, "s")
    s_prime = _param(s_prime, "s_prime")
    eps = _param(eps, "eps")
    if s is None:
        s = (1 + d) / 2
    if s_prime is None:
        s_prime = (d + s) / 2
    if not d < s_prime < s:
        raise ParameterError(f"need d < s' < s, got d={d}, s'={s_prime}, s={s}")
    if eps is None:
        eps = default_eps(A.l, s, s_prime)
    if not eps_in_range(eps, A.l, s, s_prime):
        raise ParameterError(
            f"eps={eps} must satisfy 0 < eps < 1 - 2^(l(s'-s)) = "
            f"{eps_bound(A.l, s, s_prime):.4f} (l={A.l}, s={s}, s'={s_prime})"
        )
    return CPrimeParams(d, s, s_prime, eps, A)


def marker_bets(A: BlockAlphabet, eps: Fraction) -> dict[str, Fraction]:
    """B: (1-eps)/|A| on each member of A, eps on the marker 1^l."""
    B = {a: (1 - eps) / A.size for a in A.members}
    B[A.marker] = eps
    return B


def push_state(w: str) -> str:
    return f"push:{w or 'λ'}"


def build_c_prime_pdg(d, eps=None, s=None, s_prime=None, reduce: bool = True) -> PushdownGambler:
    """The gambler P for C' = α_1 c rev(α_1) α_2^2 c rev(α_2^2) ...

    Stage 1 pushes every bit while betting B̃(wb)/B̃(w) inside each l-bit block;
    after the marker 1^l it pops the marker with λ-moves, then stage 2 bets
    everything on the bit at the top of the stack, popping until only z is left.
    """
    params = c_prime_params(d, s=s, s_prime=s_prime, eps=eps, reduce=reduce)
    return c_prime_pdg(params)


def c_prime_pdg(params: CPrimeParams) -> PushdownGambler:
    A, l = params.A, params.l
    c = A.marker
    B = marker_bets(A, params.eps)
    closure = prefix_closure(A.members + (c,))
    gamma = ("0", "1", "z")
    popmark = [f"popmark:{i}" for i in range(l)]
    states = [push_state(w) for w in closure.ppref] + popmark + ["poprev"]
    transitions = {}
    bets = {}
    uniform = {"0": Fraction(1, 2), "1": Fraction(1, 2)}

    for w in closure.ppref:
        q = push_state(w)
        total = closure.mass(w, B)
        row = {b: (closure.mass(w + b, B) / total if total > 0 else Fraction(0)) for b in "01"}
        for top in gamma:
            bets[(q, top)] = row
            for b in "01":
                wb = w + b
                if closure.is_proper_prefix(wb):
                    target = push_state(wb)
                elif wb == c:
                    target = popmark[0]
                elif wb in A.members:
                    target = push_state("")
                else:
                    continue
                transitions[(q, top, b)] = (target, b + top)

    for i, q in enumerate(popmark):
        nxt = popmark[i + 1] if i + 1 < l else "poprev"
        transitions[(q, "1", LAMBDA)] = (nxt, "")
        for top in gamma:
            bets[(q, top)] = uniform

    for top in "01":
        bets[("poprev", top)] = {b: Fraction(int(b == top)) for b in "01"}
        for b in "01":
            transitions[("poprev", top, b)] = ("poprev", "")
    bets[("poprev", "z")] = uniform
    transitions[("poprev", "z", LAMBDA)] = (push_state(""), "z")

    return PushdownGambler(tuple(states), BINARY, gamma, transitions, bets, push_state(""), "z")


def c_prime_stage_factor(A_size: int, l: int, k: int, eps: Fraction) -> Fraction:
    """Closed-form capital multiplier of P over α_k^k c rev(α_k^k):
    eps · 2^(2k²|A|^k l + l) · ((1-eps)/|A|)^(k²|A|^k)."""
    N = k * k * A_size**k
    return eps * Fraction(2) ** (2 * N * l + l) * ((1 - eps) / A_size) ** N


def growth_base_factors(params: CPrimeParams) -> list[tuple[Fraction, Fraction]]:
    """4^(1-s'/s) · (1-eps)^(2/(s l)) as (base, exponent) pairs."""
    s, sp, eps, l = params.s, params.s_prime, params.eps, params.l
    return [(Fraction(4), 1 - sp / s), (1 - eps, Fraction(2) / (s * l))]


def growth_base_log2(params: CPrimeParams) -> float:
    return sum(float(e) * math.log2(b) for b, e in growth_base_factors(params))
