"""Command-line front end: generate, run, entropy, transform, verify."""

from __future__ import annotations

import argparse
import itertools
import math
import sys
from collections.abc import Callable
from fractions import Fraction

from . import io as gio
from .analysis import dimension_estimate
from .errors import ParameterError, PushdimError
from .fsg import FiniteStateGambler, run_fsg
from .gales import BINARY, Alphabet, capital_cmp, check_sgale_condition, format_rational, kraft_sum, parse_rational
from .pdg import (
    PushdownGambler,
    build_c_prime_pdg,
    c_prime_params,
    c_prime_pdg,
    c_prime_stage_factor,
    fsg_as_pdg,
    pdg_gale,
    run_pdg,
    validate_pdg,
)
from .sequences import (
    BlockAlphabet,
    MarkerSchedule,
    SequenceStream,
    as_blocks,
    build_C,
    build_C_prime,
    build_champernowne,
    c_prime_boundaries,
    choose_A,
    insert_markers,
    reverse_blocks,
    splice,
)
from .transforms import bits_to_blocks, blocks_to_bits, lift_alphabet, restrict_alphabet

SEQUENCES = ("champernowne", "reversed", "C", "C_prime", "spliced", "marked")

#: exit status of `verify` when a check fails
VERIFY_FAILED = 9

#: how a marker symbol is rendered in token output
MARKER_TOKEN = "m"


def make_stream(name: str, A: BlockAlphabet, view: str = "bits", reversal: str = "bits") -> SequenceStream:
    """Build one of the named sequences over A."""
    if name == "champernowne":
        return build_champernowne(A, view=view)
    if name == "reversed":
        R = reverse_blocks(A)
        return as_blocks(R, A.l, A.alphabet()) if view == "blocks" else R
    if name == "C":
        return build_C(A, reversal=reversal, view=view)
    if name == "C_prime":
        return build_C_prime(A, reversal=reversal, view=view)
    if name == "spliced":
        U, R = build_champernowne(A), reverse_blocks(A)
        S = splice(U, R, MarkerSchedule.triangular())
        return as_blocks(S, A.l) if view == "blocks" else S
    if name == "marked":
        base = build_champernowne(A, view=view)
        return insert_markers(base, MARKER_TOKEN, MarkerSchedule.triangular())
    raise ParameterError(f"unknown sequence {name!r}; choose from {', '.join(SEQUENCES)}")


def render(symbols, alphabet: Alphabet, marker: str | None = None) -> str:
    """ASCII bits for a binary stream, whitespace-separated tokens otherwise."""
    if alphabet == BINARY:
        return "".join(symbols)
    return " ".join(MARKER_TOKEN if s == marker else s for s in symbols)


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _block_alphabet(args) -> BlockAlphabet:
    return choose_A(args.d, reduce=not args.no_reduce)


def cmd_generate(args) -> int:
    A = _block_alphabet(args)
    stream = make_stream(args.sequence, A, view=args.view, reversal=args.reversal)
    head = list(itertools.islice(stream, args.bits))
    _write(render(head, stream.alphabet, A.marker) + "\n", args.out)
    return 0


def _gale_s(text: str, t: Fraction | None):
    if text == "t":
        if t is None:
            raise ParameterError("--gale-s t is only meaningful with --builtin P")
        return t
    return parse_rational(text)


def cmd_run(args) -> int:
    A = _block_alphabet(args)
    t = None
    if args.builtin == "P":
        params = c_prime_params(args.d, s=args.s, s_prime=args.s_prime, eps=args.eps, reduce=not args.no_reduce)
        gambler: FiniteStateGambler | PushdownGambler = c_prime_pdg(params)
        t = params.t
    elif args.gambler:
        gambler = gio.load_gambler(args.gambler)
    else:
        raise ParameterError("give --builtin P or --gambler FILE")

    boundaries = c_prime_boundaries(A, args.stages) if args.stages else []
    n = boundaries[-1] if boundaries and args.bits is None else args.bits
    if n is None:
        raise ParameterError("give --bits or --stages")

    view = "bits" if gambler.alphabet == BINARY else "blocks"
    stream = make_stream(args.seq, A, view=view, reversal=args.reversal)
    s = _gale_s(args.gale_s, t)
    exact = True if args.exact else None
    if isinstance(gambler, PushdownGambler):
        trace = run_pdg(gambler, stream, n, s=s, exact=exact)
    else:
        trace = run_fsg(gambler, stream, n, s=s, exact=exact)

    if args.boundaries:
        if not boundaries:
            boundaries = [b for b in c_prime_boundaries(A, 64) if b <= len(trace)]
        _write(boundary_csv(trace, boundaries), args.out)
    else:
        _write(gio.trace_to_csv(trace), args.out)
    if trace.halted_at is not None:
        print(f"halted: undefined transition at position {trace.halted_at}", file=sys.stderr)
    return 0


def boundary_csv(trace, boundaries: list[int]) -> str:
    lines = ["k,pos,cap_log2,sgale_log2,cap_exact,sgale_exact"]
    for k, pos in enumerate(boundaries, 1):
        if pos > len(trace):
            break
        cap, sg = trace.capital_at(pos), trace.sgale_at(pos)
        ce = format_rational(cap.exact) if cap.exact is not None else ""
        se = format_rational(sg.exact) if sg.exact is not None else ""
        lines.append(f"{k},{pos},{cap.log2!r},{sg.log2!r},{ce},{se}")
    return "\n".join(lines) + "\n"


def cmd_entropy(args) -> int:
    A = _block_alphabet(args)
    stream = make_stream(args.seq, A, view=args.view, reversal=args.reversal)
    report = dimension_estimate(stream, args.lmax, args.bits, windows_per_word=args.windows_per_word)
    _write(report.to_csv(), args.out)
    return 0


def _symbols(text: str) -> Alphabet:
    return Alphabet(tuple(x.strip() for x in text.split(",") if x.strip()))


def cmd_transform(args) -> int:
    g = gio.load_gambler(args.input)
    if not isinstance(g, FiniteStateGambler):
        raise ParameterError("transforms apply to finite-state gamblers only")
    if args.verb in ("lift", "restrict"):
        if not args.target:
            raise ParameterError("--target is required (comma-separated symbols)")
        target = _symbols(args.target)
        out = lift_alphabet(g, target) if args.verb == "lift" else restrict_alphabet(g, target)
    else:
        if args.d is None:
            raise ParameterError("--d is required")
        A = _block_alphabet(args)
        out = bits_to_blocks(g, A) if args.verb == "bits2blocks" else blocks_to_bits(g, A)
    _write(gio.gambler_to_json(out), args.out)
    return 0


def _verify_checks() -> list[tuple[str, Callable[[], bool]]]:
    params = c_prime_params("1/2", s="9/10", s_prime="7/10", eps="1/8")
    P = c_prime_pdg(params)
    A = params.A

    def closed_form():
        stream = build_C_prime(A)
        bounds = c_prime_boundaries(A, 3)
        trace = run_pdg(P, stream, bounds[-1], exact=True)
        prev = Fraction(1)
        for k, b in enumerate(bounds, 1):
            cap = trace.capital_at(b).exact
            if cap / prev != c_prime_stage_factor(A.size, A.l, k, params.eps):
                return False
            prev = cap
        return trace.capital_at(bounds[0]).exact == Fraction(49, 2)

    def t_gale_growth():
        bounds = c_prime_boundaries(A, 4)
        trace = run_pdg(P, build_C_prime(A), bounds[-1], s=params.t, exact=True)
        vals = [trace.sgale_at(b) for b in bounds]
        return all(capital_cmp(b, a) > 0 for a, b in zip(vals, vals[1:]))

    def sgale_condition():
        d = pdg_gale(P, s=1)
        return not check_sgale_condition(d, 1, BINARY, 7)

    def kraft():
        d = pdg_gale(P, s=1)
        return all(kraft_sum(d, 1, BINARY.words(l))[1] for l in range(1, 5))

    def embedding():
        g = FiniteStateGambler(
            ("a", "b"),
            BINARY,
            {("a", "0"): "b", ("a", "1"): "a", ("b", "0"): "a", ("b", "1"): "b"},
            {"a": {"0": Fraction(3, 4), "1": Fraction(1, 4)}, "b": {"0": Fraction(1, 3), "1": Fraction(2, 3)}},
            "a",
        )
        bits = build_C_prime(A).prefix(1000)
        return run_fsg(g, bits, 1000).core() == run_pdg(fsg_as_pdg(g), bits, 1000).core()

    def entropy():
        h = dimension_estimate(build_C_prime(A), 1, 100_000).rows[0].h
        return abs(h - 0.8112781244591328) <= 0.02

    return [
        ("P validates", lambda: validate_pdg(P).ok),
        ("stage capitals match the closed form (k=1..3)", closed_form),
        ("t-gale of P grows across stage boundaries (k=1..4)", t_gale_growth),
        ("s-gale condition for P up to length 7", sgale_condition),
        ("Kraft sums over {0,1}^l for P, l<=4", kraft),
        ("FSG and stack-ignoring PDG traces agree", embedding),
        ("H_1 of C' near H(1/4)", entropy),
    ]


def cmd_verify(args) -> int:
    failed = 0
    for name, check in _verify_checks():
        try:
            ok = bool(check())
        except PushdimError as exc:
            ok = False
            name = f"{name} ({exc})"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return VERIFY_FAILED if failed else 0


def _add_sequence_options(p: argparse.ArgumentParser, seq_flag: bool = True) -> None:
    if seq_flag:
        p.add_argument("--seq", choices=SEQUENCES, default="C_prime", help="input sequence")
    p.add_argument("--d", default="1/2", help="dimension parameter d as p/q (default 1/2)")
    p.add_argument("--no-reduce", action="store_true", help="keep the written denominator of d")
    p.add_argument("--reversal", choices=("bits", "chars"), default="bits", help="stage reversal for C and C'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pushdim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit a prefix of a sequence")
    gen.add_argument("sequence", choices=SEQUENCES)
    _add_sequence_options(gen, seq_flag=False)
    gen.add_argument("--bits", "-n", type=int, required=True, help="number of symbols")
    gen.add_argument("--view", choices=("bits", "blocks"), default="bits")
    gen.add_argument("--out", "-o")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="run a gambler and write its trace as CSV")
    src = run.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=("P",))
    src.add_argument("--gambler", help="gambler JSON file")
    _add_sequence_options(run)
    run.add_argument("--bits", "-n", type=int)
    run.add_argument("--stages", type=int, help="run through the end of stage K of C'")
    run.add_argument("--gale-s", default="1", help="gale exponent as p/q, or 't' for s/2 with P")
    run.add_argument("--s", default="auto")
    run.add_argument("--s-prime", default="auto")
    run.add_argument("--eps", default="auto")
    run.add_argument("--exact", action="store_true", help="keep exact rationals beyond 10^4 steps")
    run.add_argument("--boundaries", action="store_true", help="only emit rows at stage boundaries of C'")
    run.add_argument("--out", "-o")
    run.set_defaults(func=cmd_run)

    ent = sub.add_parser("entropy", help="block-entropy dimension estimate as CSV")
    _add_sequence_options(ent)
    ent.add_argument("--lmax", type=int, default=4)
    ent.add_argument("--bits", "-n", type=int, default=100_000)
    ent.add_argument("--view", choices=("bits", "blocks"), default="bits")
    ent.add_argument("--windows-per-word", type=int, default=50)
    ent.add_argument("--out", "-o")
    ent.set_defaults(func=cmd_entropy)

    tr = sub.add_parser("transform", help="rewrite a finite-state gambler file")
    tr.add_argument("verb", choices=("lift", "restrict", "bits2blocks", "blocks2bits"))
    tr.add_argument("--in", dest="input", required=True)
    tr.add_argument("--out", "-o")
    tr.add_argument("--target", help="comma-separated target alphabet for lift/restrict")
    tr.add_argument("--d", help="block alphabet parameter for bits2blocks/blocks2bits")
    tr.add_argument("--no-reduce", action="store_true")
    tr.set_defaults(func=cmd_transform)

    ver = sub.add_parser("verify", help="run the built-in invariant checks")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PushdimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
