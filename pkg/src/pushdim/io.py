"""JSON gambler files and CSV traces.

Rationals cross file boundaries as "p/q" strings. State and symbol order is list
order, so a load/dump round trip reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from .errors import GamblerFormatError, ParameterError
from .fsg import FiniteStateGambler, GaleTrace
from .gales import Alphabet, format_rational, parse_rational
from .pdg import LAMBDA, PushdownGambler


def _rational(text, where: str) -> Fraction:
    if not isinstance(text, str):
        raise GamblerFormatError(f"expected a \"p/q\" string, got {text!r}", where)
    try:
        return parse_rational(text)
    except ParameterError as exc:
        raise GamblerFormatError(str(exc), where) from None


def _require(doc: dict, key: str, kind: type, where: str = ""):
    if key not in doc:
        raise GamblerFormatError(f"missing field {key!r}", where or key)
    value = doc[key]
    if not isinstance(value, kind):
        raise GamblerFormatError(f"field {key!r} must be a {kind.__name__}", where or key)
    return value


def _strings(values, where: str) -> tuple[str, ...]:
    for i, v in enumerate(values):
        if not isinstance(v, str):
            raise GamblerFormatError(f"expected a string, got {v!r}", f"{where}[{i}]")
    return tuple(values)


def fsg_to_dict(g: FiniteStateGambler) -> dict:
    return {
        "kind": "fsg",
        "states": list(g.states),
        "alphabet": list(g.alphabet.symbols),
        "start": g.start,
        "transitions": [[q, a, t] for (q, a), t in g.transitions.items()],
        "bets": {
            q: {a: format_rational(Fraction(p)) for a, p in g.bets[q].items()} for q in g.states if q in g.bets
        },
    }


def fsg_from_dict(doc) -> FiniteStateGambler:
    if not isinstance(doc, dict):
        raise GamblerFormatError("top level must be an object", "$")
    if doc.get("kind", "fsg") != "fsg":
        raise GamblerFormatError(f"expected kind 'fsg', got {doc['kind']!r}", "kind")
    states = _strings(_require(doc, "states", list), "states")
    try:
        alphabet = Alphabet(_strings(_require(doc, "alphabet", list), "alphabet"))
    except ParameterError as exc:
        raise GamblerFormatError(str(exc), "alphabet") from None
    start = _require(doc, "start", str)
    transitions = {}
    for i, row in enumerate(_require(doc, "transitions", list)):
        where = f"transitions[{i}]"
        if not isinstance(row, list) or len(row) != 3:
            raise GamblerFormatError("expected [state, symbol, state]", where)
        q, a, t = _strings(row, where)
        if (q, a) in transitions:
            raise GamblerFormatError(f"duplicate transition ({q}, {a})", where)
        transitions[(q, a)] = t
    bets = {}
    for q, row in _require(doc, "bets", dict).items():
        if not isinstance(row, dict):
            raise GamblerFormatError("expected symbol -> \"p/q\" map", f"bets.{q}")
        bets[q] = {a: _rational(p, f"bets.{q}.{a}") for a, p in row.items()}
    return FiniteStateGambler(states, alphabet, transitions, bets, start)


def pdg_to_dict(p: PushdownGambler) -> dict:
    bets: dict[str, dict] = {}
    for (q, top), row in p.bets.items():
        bets.setdefault(q, {})[top] = {a: format_rational(Fraction(x)) for a, x in row.items()}
    return {
        "kind": "pdg",
        "states": list(p.states),
        "alphabet": list(p.alphabet.symbols),
        "stack_alphabet": list(p.stack_alphabet),
        "bottom": p.bottom,
        "start": p.start,
        "transitions": [[q, top, a, t, repl] for (q, top, a), (t, repl) in p.transitions.items()],
        "bets": bets,
    }


def pdg_from_dict(doc) -> PushdownGambler:
    if not isinstance(doc, dict):
        raise GamblerFormatError("top level must be an object", "$")
    if doc.get("kind") != "pdg":
        raise GamblerFormatError(f"expected kind 'pdg', got {doc.get('kind')!r}", "kind")
    states = _strings(_require(doc, "states", list), "states")
    try:
        alphabet = Alphabet(_strings(_require(doc, "alphabet", list), "alphabet"))
    except ParameterError as exc:
        raise GamblerFormatError(str(exc), "alphabet") from None
    gamma = _strings(_require(doc, "stack_alphabet", list), "stack_alphabet")
    bottom = _require(doc, "bottom", str)
    start = _require(doc, "start", str)
    transitions = {}
    for i, row in enumerate(_require(doc, "transitions", list)):
        where = f"transitions[{i}]"
        if not isinstance(row, list) or len(row) != 5:
            raise GamblerFormatError("expected [state, top, symbol or λ, state, replacement]", where)
        q, top, a, t, repl = _strings(row, where)
        if (q, top, a) in transitions:
            raise GamblerFormatError(f"duplicate transition ({q}, {top}, {a})", where)
        transitions[(q, top, a)] = (t, repl)
    bets = {}
    for q, by_top in _require(doc, "bets", dict).items():
        if not isinstance(by_top, dict):
            raise GamblerFormatError("expected stack-top -> bets map", f"bets.{q}")
        for top, row in by_top.items():
            if not isinstance(row, dict):
                raise GamblerFormatError("expected symbol -> \"p/q\" map", f"bets.{q}.{top}")
            bets[(q, top)] = {a: _rational(x, f"bets.{q}.{top}.{a}") for a, x in row.items()}
    return PushdownGambler(states, alphabet, gamma, transitions, bets, start, bottom)


def gambler_to_json(g: FiniteStateGambler | PushdownGambler) -> str:
    doc = pdg_to_dict(g) if isinstance(g, PushdownGambler) else fsg_to_dict(g)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def gambler_from_json(text: str) -> FiniteStateGambler | PushdownGambler:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GamblerFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if isinstance(doc, dict) and doc.get("kind") == "pdg":
        return pdg_from_dict(doc)
    return fsg_from_dict(doc)


def load_gambler(path) -> FiniteStateGambler | PushdownGambler:
    return gambler_from_json(Path(path).read_text(encoding="utf-8"))


def save_gambler(g, path) -> None:
    Path(path).write_text(gambler_to_json(g), encoding="utf-8")


TRACE_COLUMNS = ["pos", "state", "stack_depth", "bet", "cap_log2", "sgale_log2"]
EXACT_COLUMNS = ["cap_exact", "sgale_exact"]


def _exact_cell(c) -> str:
    return format_rational(c.exact) if c.exact is not None else ""


def trace_to_csv(trace: GaleTrace, exact: bool | None = None) -> str:
    """One row per step; exact columns are included when every capital is exact (or forced)."""
    if exact is None:
        exact = all(t.capital.exact is not None for t in trace.steps)
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(TRACE_COLUMNS + (EXACT_COLUMNS if exact else []))
    for t in trace.steps:
        row = [
            t.position,
            t.state,
            "" if t.stack_depth is None else t.stack_depth,
            format_rational(t.bet),
            repr(t.capital.log2),
            repr(t.sgale.log2),
        ]
        if exact:
            row += [_exact_cell(t.capital), _exact_cell(t.sgale)]
        out.writerow(row)
    return buf.getvalue()


def read_trace_csv(text: str) -> list[dict]:
    """Parse a trace CSV back into typed rows."""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {
            "pos": int(raw["pos"]),
            "state": raw["state"],
            "stack_depth": int(raw["stack_depth"]) if raw["stack_depth"] else None,
            "bet": parse_rational(raw["bet"]),
            "cap_log2": float(raw["cap_log2"]),
            "sgale_log2": float(raw["sgale_log2"]),
        }
        for key in EXACT_COLUMNS:
            if raw.get(key):
                row[key] = parse_rational(raw[key])
        rows.append(row)
    return rows


__all__ = [
    "LAMBDA",
    "gambler_to_json",
    "gambler_from_json",
    "load_gambler",
    "save_gambler",
    "trace_to_csv",
    "read_trace_csv",
    "fsg_to_dict",
    "fsg_from_dict",
    "pdg_to_dict",
    "pdg_from_dict",
]
