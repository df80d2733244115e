"""Gambler-to-gambler constructions: alphabet lifting/restriction and bit/block conversion."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError
from .fsg import FiniteStateGambler, extended_delta
from .gales import BINARY, Alphabet
from .sequences import BlockAlphabet


@dataclass(frozen=True)
class PrefixClosure:
    """Proper prefixes of a set of binary words and the residual sets A(w) = {u : wu ∈ A}."""

    words: tuple[str, ...]
    ppref: tuple[str, ...]
    residuals: Mapping[str, tuple[str, ...]]

    def is_proper_prefix(self, w: str) -> bool:
        return w in self.residuals

    def mass(self, w: str, weight: Mapping[str, Fraction]) -> Fraction:
        """B̃(w) = Σ_{u ∈ A(w)} weight[wu]; for w in the set itself this is weight[w]."""
        if w in self.residuals:
            return sum((Fraction(weight.get(w + u, 0)) for u in self.residuals[w]), Fraction(0))
        if w in self.words:
            return Fraction(weight.get(w, 0))
        return Fraction(0)


def prefix_closure(words: Iterable[str]) -> PrefixClosure:
    words = tuple(dict.fromkeys(words))
    ppref = {}
    for w in words:
        for i in range(len(w)):
            ppref.setdefault(w[:i], [])
    for w in words:
        for i in range(len(w)):
            ppref[w[:i]].append(w[i:])
    order = sorted(ppref, key=lambda p: (len(p), p))
    return PrefixClosure(words, tuple(order), {p: tuple(ppref[p]) for p in order})


def _as_block_alphabet(A) -> BlockAlphabet:
    if isinstance(A, BlockAlphabet):
        return A
    members = tuple(sorted(A))
    return BlockAlphabet(len(members[0]), members)


def lift_alphabet(g: FiniteStateGambler, target: Alphabet) -> FiniteStateGambler:
    """Same gambler over a larger alphabet: no transitions and zero bets on the new symbols."""
    if not g.alphabet.issubset(target):
        raise ParameterError(f"{g.alphabet.symbols} is not contained in {target.symbols}")
    bets = {q: {a: Fraction(g.bets.get(q, {}).get(a, 0)) for a in target} for q in g.states}
    return FiniteStateGambler(g.states, target, dict(g.transitions), bets, g.start)


def restrict_alphabet(g: FiniteStateGambler, target: Alphabet) -> FiniteStateGambler:
    """Drop symbols outside ``target``, spreading their bet mass uniformly over ``target``."""
    if not target.issubset(g.alphabet):
        raise ParameterError(f"{target.symbols} is not contained in {g.alphabet.symbols}")
    bets = {}
    for q in g.states:
        row = g.bets.get(q, {})
        dropped = sum((Fraction(p) for a, p in row.items() if a not in target), Fraction(0))
        share = dropped / target.size
        bets[q] = {a: Fraction(row.get(a, 0)) + share for a in target}
    transitions = {(q, a): r for (q, a), r in g.transitions.items() if a in target}
    return FiniteStateGambler(g.states, target, transitions, bets, g.start)


def block_mass(g: FiniteStateGambler, q: str, w: str) -> Fraction:
    """B̃(q)(w): product of g's bit bets along w starting from q (0 past an undefined step)."""
    mass = Fraction(1)
    state = q
    for b in w:
        if state is None:
            return Fraction(0)
        mass *= g.bet(state, b)
        state = g.delta(state, b)
    return mass


def bits_to_blocks(g: FiniteStateGambler, A) -> FiniteStateGambler:
    """FSG over A that bets on each l-bit character what g would bet on its bits, renormalized.

    States whose total mass B̃(q)(A) is 0 keep an all-zero bet row.
    """
    if g.alphabet != BINARY:
        raise ParameterError("bits_to_blocks expects a gambler over {0,1}")
    A = _as_block_alphabet(A)
    sigma = A.alphabet()
    transitions = {}
    bets = {}
    for q in g.states:
        masses = {w: block_mass(g, q, w) for w in A.members}
        total = sum(masses.values(), Fraction(0))
        bets[q] = {w: (m / total if total > 0 else Fraction(0)) for w, m in masses.items()}
        for w in A.members:
            target = extended_delta(g, q, w)
            if target is not None:
                transitions[(q, w)] = target
    return FiniteStateGambler(g.states, sigma, transitions, bets, g.start)


def zero_mass_states(g: FiniteStateGambler) -> list[str]:
    """States whose bet row is identically zero (the degenerate branch of bits_to_blocks)."""
    return [q for q in g.states if all(Fraction(p) == 0 for p in g.bets.get(q, {}).values())]


def product_state(q: str, w: str) -> str:
    return f"{q}|{w or 'λ'}"


def blocks_to_bits(g: FiniteStateGambler, A) -> FiniteStateGambler:
    """Bit-level FSG on states Q × ppref(A) whose bit bets telescope to g's block bets."""
    A = _as_block_alphabet(A)
    if set(g.alphabet.symbols) != set(A.members):
        raise ParameterError("gambler alphabet does not match the block alphabet")
    closure = prefix_closure(A.members)
    states = []
    transitions = {}
    bets = {}
    for q in g.states:
        weight = g.bets.get(q, {})
        for w in closure.ppref:
            here = product_state(q, w)
            states.append(here)
            total = closure.mass(w, weight)
            bets[here] = {
                b: (closure.mass(w + b, weight) / total if total > 0 else Fraction(0)) for b in "01"
            }
            for b in "01":
                wb = w + b
                if closure.is_proper_prefix(wb):
                    transitions[(here, b)] = product_state(q, wb)
                elif wb in A.members:
                    nxt = g.delta(q, wb)
                    if nxt is not None:
                        transitions[(here, b)] = product_state(nxt, "")
    return FiniteStateGambler(tuple(states), BINARY, transitions, bets, product_state(g.start, ""))
