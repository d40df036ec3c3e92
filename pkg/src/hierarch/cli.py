"""Command-line interface.

Exit codes: 0 for a positive verdict (or a successful report), 3 for a
negative verdict, 2 for any error.  A language argument is a DFA JSON file
when such a file exists, a fixture name (``F1`` .. ``F6``, ``coF6``, ...)
otherwise, and a regex as a last resort.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence, TextIO

import numpy as np

from . import logic
from .covering import cover, decide_separation, synthesize_cover
from .deciders import member, parse_class
from .errors import HierarchError, UnsupportedClass
from .fixtures import fixture, is_fixture
from .lang import Dfa, dfa_from_json, regex_dfa
from .monoid import green, monoid_to_json, syntactic_morphism
from .prevariety import parse_oracle, trivial_morphism

EXIT_YES, EXIT_ERROR, EXIT_NO = 0, 2, 3


def load_language(arg: str, alphabet: str = "ab", complete: bool = False) -> Dfa:
    if os.path.isfile(arg):
        with open(arg) as fh:
            return dfa_from_json(fh.read(), complete=complete)
    if is_fixture(arg):
        return fixture(arg)
    return regex_dfa(arg, alphabet)


class _Output:
    def __init__(self, args, out: TextIO):
        self.args = args
        self.out = out

    def emit(self, payload: dict, text: str) -> None:
        if self.args.quiet:
            return
        if self.args.json:
            print(json.dumps(payload, sort_keys=True), file=self.out)
        else:
            print(text, file=self.out)


def _verdict_code(flag: bool) -> int:
    return EXIT_YES if flag else EXIT_NO


def _names(morphism, elems) -> list[str]:
    return [morphism.name(int(s)) for s in elems]


def cmd_syntactic(args, out: _Output) -> int:
    syn = syntactic_morphism(load_language(args.lang, args.alphabet, args.complete))
    m, alpha = syn.monoid, syn.morphism
    g = green(m)
    payload = monoid_to_json(alpha, syn.order)
    payload.update({
        "accept": sorted(int(s) for s in syn.accept),
        "idempotents": [int(e) for e in np.flatnonzero(m.idempotent_mask)],
        "omega": [int(x) for x in m.omega],
        "j_classes": g.j_classes,
    })
    lines = [f"size {m.size}, unit {m.unit}, {len(g.j_classes)} J-classes"]
    for s in range(m.size):
        row = " ".join(str(int(x)) for x in m.table[s])
        mark = " *" if m.idempotent_mask[s] else ""
        lines.append(f"  {s:>3} {alpha.name(s):<8} | {row}{mark}")
    lines.append(f"accepting: {', '.join(_names(alpha, sorted(syn.accept))) or '-'}")
    out.emit(payload, "\n".join(lines))
    return EXIT_YES


def cmd_green(args, out: _Output) -> int:
    syn = syntactic_morphism(load_language(args.lang, args.alphabet, args.complete))
    g = green(syn.monoid)
    payload = {"R": g.r_classes, "L": g.l_classes, "J": g.j_classes, "H": g.h_classes}
    lines = []
    for key, classes in payload.items():
        shown = "  ".join("{" + ", ".join(_names(syn.morphism, c)) + "}" for c in classes)
        lines.append(f"{key}: {shown}")
    out.emit(payload, "\n".join(lines))
    return EXIT_YES


def cmd_kernel(args, out: _Output) -> int:
    oracle = parse_oracle(args.cls)
    alpha = syntactic_morphism(load_language(args.lang, args.alphabet, args.complete)).morphism
    kernel = sorted(oracle.kernel(alpha))
    strict = sorted(oracle.strict_kernel(alpha))
    payload = {"class": oracle.label, "kernel": kernel, "strict_kernel": strict}
    text = (f"kernel: {', '.join(_names(alpha, kernel))}\n"
            f"strict kernel: {', '.join(_names(alpha, strict)) or '-'}")
    out.emit(payload, text)
    return EXIT_YES


def cmd_pairs(args, out: _Output) -> int:
    oracle = parse_oracle(args.cls)
    alpha = syntactic_morphism(load_language(args.lang, args.alphabet, args.complete)).morphism
    pairs = [[int(s), int(t)] for s, t in zip(*np.nonzero(oracle.pairs(alpha)))]
    payload = {"class": oracle.label, "pairs": pairs}
    text = "\n".join(f"({alpha.name(s)}, {alpha.name(t)})" for s, t in pairs)
    out.emit(payload, text)
    return EXIT_YES


def cmd_member(args, out: _Output) -> int:
    parse_class(args.cls)
    verdict = member(load_language(args.lang, args.alphabet, args.complete), args.cls)
    payload = {"class": args.cls, **verdict.to_json()}
    lines = [str(verdict.member).lower()]
    cert = verdict.certificate
    if cert is not None:
        lines.append(f"violated: {cert.to_json()['equation']}")
        for name, s in cert.elements.items():
            lines.append(f"  {name} = {s} (witness {cert.words[name] or 'eps'!r})")
        lines.append(f"  lhs = {cert.lhs}, rhs = {cert.rhs}")
    out.emit(payload, "\n".join(lines))
    return _verdict_code(verdict.member)


def _upol_base(spec: str):
    op, sep, base = spec.partition(":")
    if op.lower() != "upol" or not sep:
        raise UnsupportedClass(f"separation and covering are available for upol:<finite class>, not {spec!r}")
    return parse_oracle(base)


def cmd_separate(args, out: _Output) -> int:
    oracle = _upol_base(args.cls)
    l1 = load_language(args.l1, args.alphabet, args.complete)
    l2 = load_language(args.l2, args.alphabet, args.complete)
    ok = decide_separation(l1, l2, oracle)
    out.emit({"class": args.cls, "separable": ok}, str(ok).lower())
    return _verdict_code(ok)


def cmd_cover(args, out: _Output) -> int:
    oracle = _upol_base(args.cls)
    if args.synthesize:
        synthesize_cover()
    l0 = load_language(args.l0, args.alphabet, args.complete)
    ls = [load_language(x, args.alphabet, args.complete) for x in args.ls]
    result = cover(l0, ls, oracle)
    text = f"{str(result.coverable).lower()} (optimal imprint has {result.opt_size} maxima)"
    out.emit({"class": args.cls, **result.to_json()}, text)
    return _verdict_code(result.coverable)


def _env(args) -> logic.LanguageEnv:
    if args.env:
        return logic.LanguageEnv.load(args.env, args.alphabet if args.alphabet_given else None)
    return logic.default_env(args.alphabet)


def cmd_tl(args, out: _Output) -> int:
    env = _env(args)
    if args.action == "eval":
        phi = logic.parse_tl(args.formula, env)
        pw = logic.PointedWord.parse(args.word)
        value = logic.eval_tl(phi, pw, env)
        out.emit({"formula": logic.tl_to_text(phi), "word": str(pw), "value": value}, str(value).lower())
        return _verdict_code(value)
    if args.action == "compile":
        phi = logic.parse_tl(args.formula, env)
        if not logic.is_tl(phi):
            phi = logic.tlx_to_tl_plus(phi)
        text = logic.fo2_to_text(logic.fo2_sentence(phi))
        out.emit({"formula": logic.tl_to_text(phi), "fo2": text}, text)
        return EXIT_YES
    eta = (syntactic_morphism(load_language(args.eta, args.alphabet, args.complete)).morphism
           if args.eta else trivial_morphism(env.alphabet))
    pw1, pw2 = logic.PointedWord.parse(args.left), logic.PointedWord.parse(args.right)
    value = logic.tl_equiv(args.k, eta, pw1, pw2)
    out.emit({"k": args.k, "left": str(pw1), "right": str(pw2), "equivalent": value}, str(value).lower())
    return _verdict_code(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print one JSON object")
    common.add_argument("--quiet", action="store_true", help="print nothing; use the exit code")
    common.add_argument("--alphabet", default=None, help="alphabet for regex arguments (default: ab)")
    common.add_argument("--complete", action="store_true", help="send missing DFA transitions to a sink")

    p = argparse.ArgumentParser(prog="hierarch", description=__doc__.splitlines()[0])
    p.add_argument("--batch", metavar="FILE", help="run one query per line, in parallel")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("syntactic", parents=[common], help="syntactic monoid report")
    s.add_argument("lang")
    s.set_defaults(func=cmd_syntactic)

    s = sub.add_parser("green", parents=[common], help="Green classes of the syntactic monoid")
    s.add_argument("lang")
    s.set_defaults(func=cmd_green)

    for name, func, helptext in (("kernel", cmd_kernel, "kernel and strict kernel"),
                                 ("pairs", cmd_pairs, "pairs of the syntactic morphism")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--class", dest="cls", required=True, help="st, st+, at, at+, mod, amt, finite:<json>")
        s.add_argument("lang")
        s.set_defaults(func=func)

    s = sub.add_parser("member", parents=[common], help="membership in pol/upol/upol-bpol/fo2/fo2s")
    s.add_argument("--class", dest="cls", required=True, help="for example upol:mod or fo2s:st")
    s.add_argument("lang")
    s.set_defaults(func=cmd_member)

    s = sub.add_parser("separate", parents=[common], help="separation by upol:<finite class>")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("l1")
    s.add_argument("l2")
    s.set_defaults(func=cmd_separate)

    s = sub.add_parser("cover", parents=[common], help="covering by upol:<finite class>")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("--synthesize", action="store_true", help="also build a cover (not available)")
    s.add_argument("l0")
    s.add_argument("ls", nargs="+")
    s.set_defaults(func=cmd_cover)

    tl = sub.add_parser("tl", help="temporal logic tools")
    tl_sub = tl.add_subparsers(dest="action", required=True)
    env_opts = argparse.ArgumentParser(add_help=False, parents=[common])
    env_opts.add_argument("--env", help="JSON file mapping names to regexes or DFAs")
    s = tl_sub.add_parser("eval", parents=[env_opts], help="evaluate a formula at word@position")
    s.add_argument("formula")
    s.add_argument("word")
    s = tl_sub.add_parser("compile", parents=[env_opts], help="print an equivalent FO2 sentence")
    s.add_argument("formula")
    s = tl_sub.add_parser("equiv", parents=[env_opts], help="rank-k equivalence of two pointed words")
    s.add_argument("k", type=int)
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--eta", help="use the syntactic morphism of this language (default: trivial)")
    tl.set_defaults(func=cmd_tl)
    return p


def run(argv: Sequence[str], out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_YES if exc.code == 0 else EXIT_ERROR
    if args.batch:
        return run_batch(args.batch, out, err)
    if not args.command:
        parser.print_usage(err)
        return EXIT_ERROR
    args.alphabet_given = args.alphabet is not None
    if args.alphabet is None:
        args.alphabet = "ab"
    try:
        return args.func(args, _Output(args, out))
    except (HierarchError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=err)
        return EXIT_ERROR


def _run_captured(line: str) -> dict:
    out, err = io.StringIO(), io.StringIO()
    try:
        code = run(shlex.split(line), out, err)
    except Exception as exc:  # a worker must always report back
        code = EXIT_ERROR
        print(f"error: {exc}", file=err)
    return {"query": line, "exit": code, "stdout": out.getvalue(), "stderr": err.getvalue()}


def run_batch(path: str, out: TextIO, err: TextIO) -> int:
    """Run every non-blank, non-comment line of ``path`` as its own invocation.

    Prints one JSON record per query, in file order.  Returns 2 when any
    query failed with an error, 0 otherwise.
    """
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR
    if any(shlex.split(ln)[:1] == ["--batch"] for ln in lines):
        print("error: nested --batch is not allowed", file=err)
        return EXIT_ERROR
    with ProcessPoolExecutor(max_workers=min(len(lines), os.cpu_count() or 1) or 1) as pool:
        results = list(pool.map(_run_captured, lines))
    for r in results:
        print(json.dumps(r, sort_keys=True), file=out)
    return EXIT_ERROR if any(r["exit"] == EXIT_ERROR for r in results) else EXIT_YES


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
