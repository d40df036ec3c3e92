"""Unary temporal logic over a language class, and its two-variable fragment.

Words are evaluated with two extra unlabeled positions: position 0 (``min``)
sits before the first letter and position ``|w|+1`` (``max``) after the last
one, so position ``p`` in between carries ``word[p-1]``.  The infix
``w(i, j)`` is the factor strictly between positions ``i`` and ``j``.

``F[L] p`` holds at ``i`` when some ``j > i`` satisfies ``p`` with
``w(i, j)`` in ``L``; ``P[L] p`` is the mirror image.  ``X`` and ``Y`` move
by one position.  A word satisfies a formula when position 0 does.

Language references inside brackets name languages of an environment:

=============  =============================
``K``          the language named ``K``
``eps``        the singleton of the empty word
``K?``         ``K`` plus the empty word
``K+``         ``K`` minus the empty word
``a\\K``       left quotient by the letter ``a``
``K/a``        right quotient by the letter ``a``
=============  =============================
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    NotWellSuited,
    ParseError,
    TlxNotSupported,
    UnknownLanguage,
    UnknownLetter,
    Unsupported,
)
from .lang import (
    Dfa,
    dfa_from_json,
    intersection,
    left_quotient,
    make_alphabet,
    minimize,
    regex_dfa,
    right_quotient,
    union,
    universal,
)
from .monoid import Morphism

# ---------------------------------------------------------------------------
# Pointed words


@dataclass(frozen=True)
class PointedWord:
    word: str
    position: int = 0

    def __post_init__(self):
        if not 0 <= self.position <= len(self.word) + 1:
            raise ValueError(f"position {self.position} is outside 0..{len(self.word) + 1}")

    @property
    def size(self) -> int:
        """Number of positions, the two unlabeled ones included."""
        return len(self.word) + 2

    def label(self, i: int) -> str:
        """``min``, ``max`` or the letter carried by position ``i``."""
        return position_label(self.word, i)

    def infix(self, i: int, j: int) -> str:
        return self.word[i:max(i, j - 1)]

    @classmethod
    def parse(cls, text: str) -> "PointedWord":
        """Read ``word@position``; the position defaults to 0."""
        word, sep, pos = text.rpartition("@")
        if not sep:
            return cls(text, 0)
        try:
            return cls(word, int(pos))
        except ValueError as exc:
            raise ValueError(f"bad pointed word {text!r}: {exc}") from None

    def __str__(self) -> str:
        return f"{self.word}@{self.position}"


def position_label(word: str, i: int) -> str:
    if i == 0:
        return "min"
    if i == len(word) + 1:
        return "max"
    return word[i - 1]


# ---------------------------------------------------------------------------
# Language references and environments


@dataclass(frozen=True)
class LangRef:
    """A bracketed language reference; ``shape`` is one of
    ``plain``, ``eps``, ``opt``, ``plus``, ``lquot``, ``rquot``."""

    shape: str
    name: str = ""
    letter: str = ""

    def __str__(self) -> str:
        if self.shape == "eps":
            return "eps"
        if self.shape == "opt":
            return f"{self.name}?"
        if self.shape == "plus":
            return f"{self.name}+"
        if self.shape == "lquot":
            return f"{self.letter}\\{self.name}"
        if self.shape == "rquot":
            return f"{self.name}/{self.letter}"
        return self.name

    @property
    def in_base(self) -> bool:
        """True when the reference denotes a language of the base class itself."""
        return self.shape in ("plain", "lquot", "rquot")


def ref(text: str) -> LangRef:
    """Parse a bare language reference such as ``K+`` or ``a\\K``."""
    p = _Parser(text, None)
    out = p.lang_ref()
    p.expect_end()
    return out


class LanguageEnv:
    """Named regular languages over a fixed alphabet.

    ``All`` (every word) is always defined unless overridden.
    """

    def __init__(self, alphabet: Sequence[str] = "ab", languages: Mapping[str, Dfa] | None = None):
        self.alphabet = make_alphabet(alphabet)
        self.languages: dict[str, Dfa] = {"All": universal(self.alphabet)}
        self._cache: dict[LangRef, Dfa] = {}
        for name, d in (languages or {}).items():
            self.define(name, d)

    def define(self, name: str, lang: Dfa | str) -> None:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name == "eps":
            raise ValueError(f"invalid language name {name!r}")
        d = regex_dfa(lang, self.alphabet) if isinstance(lang, str) else lang
        if tuple(d.alphabet) != self.alphabet:
            raise ValueError(f"language {name!r} is over {''.join(d.alphabet)}, not {''.join(self.alphabet)}")
        self.languages[name] = minimize(d)
        self._cache.clear()

    def __contains__(self, name: str) -> bool:
        return name in self.languages

    def check(self, r: LangRef) -> None:
        if r.shape != "eps" and r.name not in self.languages:
            raise UnknownLanguage(f"language {r.name!r} is not defined")
        if r.letter and r.letter not in self.alphabet:
            raise UnknownLetter(f"letter {r.letter!r} is not in the alphabet")

    def resolve(self, r: LangRef) -> Dfa:
        hit = self._cache.get(r)
        if hit is not None:
            return hit
        self.check(r)
        if r.shape == "eps":
            d = regex_dfa("eps", self.alphabet)
        else:
            base = self.languages[r.name]
            if r.shape == "plain":
                d = base
            elif r.shape == "opt":
                d = union(base, regex_dfa("eps", self.alphabet))
            elif r.shape == "plus":
                nonempty = regex_dfa("AA*", self.alphabet)
                d = intersection(base, nonempty)
            elif r.shape == "lquot":
                d = left_quotient(base, r.letter)
            else:
                d = right_quotient(base, r.letter)
        self._cache[r] = d
        return d

    def contains_empty(self, r: LangRef) -> bool:
        d = self.resolve(r)
        return d.initial in d.accepting

    @classmethod
    def from_json(cls, data: Mapping | str, alphabet: Sequence[str] | None = None) -> "LanguageEnv":
        """Each value is a regex string or a DFA object."""
        if isinstance(data, str):
            data = json.loads(data)
        dfas = {k: v for k, v in data.items() if not isinstance(v, str)}
        if alphabet is None:
            alphabet = next((v["alphabet"] for v in dfas.values()), "ab")
        env = cls(alphabet)
        for name, value in data.items():
            env.define(name, value if isinstance(value, str) else dfa_from_json(value))
        return env

    @classmethod
    def load(cls, path: str | Path, alphabet: Sequence[str] | None = None) -> "LanguageEnv":
        return cls.from_json(Path(path).read_text(), alphabet)


def default_env(alphabet: Sequence[str] = "ab") -> LanguageEnv:
    return LanguageEnv(alphabet)


def env_from_morphism(eta: Morphism, prefix: str = "S") -> LanguageEnv:
    """Environment naming each preimage ``eta^-1(s)`` as ``S<s>``."""
    m = eta.monoid
    delta = tuple(tuple(int(m.table[x, eta.letter_image(a)]) for a in eta.alphabet) for x in range(m.size))
    env = LanguageEnv(eta.alphabet)
    for s in range(m.size):
        env.define(f"{prefix}{s}", Dfa(tuple(eta.alphabet), m.size, m.unit, frozenset({s}), delta))
    return env


def infix_matrix(d: Dfa, word: str) -> np.ndarray:
    """``M[i, j]`` is true when ``i < j`` and ``w(i, j)`` is in the language of ``d``."""
    size = len(word) + 2
    out = np.zeros((size, size), dtype=bool)
    letters = [d.index(a) for a in word]
    for i in range(size):
        q = d.initial
        for j in range(i + 1, size):
            out[i, j] = q in d.accepting
            if j <= len(word):
                q = d.delta[q][letters[j - 1]]
    return out


class _WordContext:
    def __init__(self, word: str, env: LanguageEnv):
        for a in word:
            if a not in env.alphabet:
                raise UnknownLetter(f"letter {a!r} is not in the alphabet")
        self.word = word
        self.env = env
        self.size = len(word) + 2
        self.labels = [position_label(word, i) for i in range(self.size)]
        self._infix: dict[LangRef, np.ndarray] = {}

    def infix(self, r: LangRef) -> np.ndarray:
        m = self._infix.get(r)
        if m is None:
            m = self._infix[r] = infix_matrix(self.env.resolve(r), self.word)
        return m

    def label_mask(self, label: str) -> np.ndarray:
        return np.array([x == label for x in self.labels], dtype=bool)


# ---------------------------------------------------------------------------
# Temporal formulas


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Min:
    pass


@dataclass(frozen=True)
class Max:
    pass


@dataclass(frozen=True)
class Letter:
    letter: str


@dataclass(frozen=True)
class Not:
    arg: "TlFormula"


@dataclass(frozen=True)
class And:
    left: "TlFormula"
    right: "TlFormula"


@dataclass(frozen=True)
class Or:
    left: "TlFormula"
    right: "TlFormula"


@dataclass(frozen=True)
class Next:
    arg: "TlFormula"


@dataclass(frozen=True)
class Yesterday:
    arg: "TlFormula"


@dataclass(frozen=True)
class Finally:
    lang: LangRef
    arg: "TlFormula"


@dataclass(frozen=True)
class Previously:
    lang: LangRef
    arg: "TlFormula"


TlFormula = Union[Top, Bottom, Min, Max, Letter, Not, And, Or, Next, Yesterday, Finally, Previously]
_ATOMS = (Top, Bottom, Min, Max, Letter)


def disjunction(parts: Iterable[TlFormula]) -> TlFormula:
    out = None
    for p in parts:
        out = p if out is None else Or(out, p)
    return Bottom() if out is None else out


def conjunction(parts: Iterable[TlFormula]) -> TlFormula:
    out = None
    for p in parts:
        out = p if out is None else And(out, p)
    return Top() if out is None else out


def rank(phi: TlFormula) -> int:
    """Nesting depth of ``F``/``P``.  ``X`` and ``Y`` do not add to it."""
    if isinstance(phi, _ATOMS):
        return 0
    if isinstance(phi, (Not, Next, Yesterday)):
        return rank(phi.arg)
    if isinstance(phi, (And, Or)):
        return max(rank(phi.left), rank(phi.right))
    return 1 + rank(phi.arg)


def is_tl(phi: TlFormula) -> bool:
    """True when ``phi`` uses neither ``X`` nor ``Y``."""
    if isinstance(phi, (Next, Yesterday)):
        return False
    if isinstance(phi, _ATOMS):
        return True
    if isinstance(phi, (And, Or)):
        return is_tl(phi.left) and is_tl(phi.right)
    return is_tl(phi.arg)


def lang_refs(phi: TlFormula) -> set[LangRef]:
    if isinstance(phi, _ATOMS):
        return set()
    if isinstance(phi, (And, Or)):
        return lang_refs(phi.left) | lang_refs(phi.right)
    own = {phi.lang} if isinstance(phi, (Finally, Previously)) else set()
    return own | lang_refs(phi.arg)


def truth_table(phi: TlFormula, word: str, env: LanguageEnv) -> np.ndarray:
    """Truth value of ``phi`` at every position of ``word``."""
    return _truth(phi, _WordContext(word, env))


def _truth(phi: TlFormula, ctx: _WordContext) -> np.ndarray:
    n = ctx.size
    if isinstance(phi, Top):
        return np.ones(n, dtype=bool)
    if isinstance(phi, Bottom):
        return np.zeros(n, dtype=bool)
    if isinstance(phi, Min):
        return ctx.label_mask("min")
    if isinstance(phi, Max):
        return ctx.label_mask("max")
    if isinstance(phi, Letter):
        return ctx.label_mask(phi.letter)
    if isinstance(phi, Not):
        return ~_truth(phi.arg, ctx)
    if isinstance(phi, And):
        return _truth(phi.left, ctx) & _truth(phi.right, ctx)
    if isinstance(phi, Or):
        return _truth(phi.left, ctx) | _truth(phi.right, ctx)
    inner = _truth(phi.arg, ctx)
    out = np.zeros(n, dtype=bool)
    if isinstance(phi, Next):
        out[:-1] = inner[1:]
    elif isinstance(phi, Yesterday):
        out[1:] = inner[:-1]
    elif isinstance(phi, Finally):
        out = (ctx.infix(phi.lang) & inner[None, :]).any(axis=1)
    else:
        out = (ctx.infix(phi.lang) & inner[:, None]).any(axis=0)
    return out


def eval_tl(phi: TlFormula, pw: PointedWord | str, env: LanguageEnv) -> bool:
    """Whether ``phi`` holds at the pointed word (a bare word means position 0)."""
    if isinstance(pw, str):
        pw = PointedWord(pw, 0)
    return bool(truth_table(phi, pw.word, env)[pw.position])


def tl_language(phi: TlFormula, env: LanguageEnv, max_len: int) -> list[str]:
    """Words up to ``max_len`` satisfying ``phi``, in shortlex order."""
    from .lang import words

    return [w for w in words(env.alphabet, max_len) if eval_tl(phi, w, env)]


# ---------------------------------------------------------------------------
# Two-variable first-order formulas

VARIABLES = ("x", "y")
TERMS = ("x", "y", "min", "max")


@dataclass(frozen=True)
class FoTrue:
    pass


@dataclass(frozen=True)
class FoFalse:
    pass


@dataclass(frozen=True)
class FoLabel:
    letter: str
    term: str


@dataclass(frozen=True)
class FoEq:
    left: str
    right: str


@dataclass(frozen=True)
class FoInfix:
    lang: LangRef
    left: str
    right: str


@dataclass(frozen=True)
class FoNot:
    arg: "FoFormula"


@dataclass(frozen=True)
class FoAnd:
    left: "FoFormula"
    right: "FoFormula"


@dataclass(frozen=True)
class FoOr:
    left: "FoFormula"
    right: "FoFormula"


@dataclass(frozen=True)
class FoExists:
    var: str
    arg: "FoFormula"


@dataclass(frozen=True)
class FoForall:
    var: str
    arg: "FoFormula"


FoFormula = Union[FoTrue, FoFalse, FoLabel, FoEq, FoInfix, FoNot, FoAnd, FoOr, FoExists, FoForall]


def free_variables(phi: FoFormula) -> set[str]:
    if isinstance(phi, (FoTrue, FoFalse)):
        return set()
    if isinstance(phi, FoLabel):
        return {phi.term} & set(VARIABLES)
    if isinstance(phi, (FoEq, FoInfix)):
        return {phi.left, phi.right} & set(VARIABLES)
    if isinstance(phi, (FoAnd, FoOr)):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, FoNot):
        return free_variables(phi.arg)
    return free_variables(phi.arg) - {phi.var}


def _grid(term: str, n: int) -> np.ndarray:
    idx = np.arange(n)
    if term == "x":
        return np.broadcast_to(idx[:, None], (n, n))
    if term == "y":
        return np.broadcast_to(idx[None, :], (n, n))
    return np.full((n, n), 0 if term == "min" else n - 1)


def _fo_table(phi: FoFormula, ctx: _WordContext) -> np.ndarray:
    """Truth value for every assignment, indexed ``[x, y]``."""
    n = ctx.size
    if isinstance(phi, FoTrue):
        return np.ones((n, n), dtype=bool)
    if isinstance(phi, FoFalse):
        return np.zeros((n, n), dtype=bool)
    if isinstance(phi, FoLabel):
        return ctx.label_mask(phi.letter)[_grid(phi.term, n)]
    if isinstance(phi, FoEq):
        return _grid(phi.left, n) == _grid(phi.right, n)
    if isinstance(phi, FoInfix):
        return ctx.infix(phi.lang)[_grid(phi.left, n), _grid(phi.right, n)]
    if isinstance(phi, FoNot):
        return ~_fo_table(phi.arg, ctx)
    if isinstance(phi, FoAnd):
        return _fo_table(phi.left, ctx) & _fo_table(phi.right, ctx)
    if isinstance(phi, FoOr):
        return _fo_table(phi.left, ctx) | _fo_table(phi.right, ctx)
    inner = _fo_table(phi.arg, ctx)
    axis = 0 if phi.var == "x" else 1
    red = inner.any(axis=axis, keepdims=True) if isinstance(phi, FoExists) else inner.all(axis=axis, keepdims=True)
    return np.broadcast_to(red, (n, n))


def eval_fo2(phi: FoFormula, w: str, env: LanguageEnv, assignment: Mapping[str, int] | None = None) -> bool:
    """Evaluate ``phi`` on ``w`` with free variables bound by ``assignment``."""
    assignment = dict(assignment or {})
    missing = free_variables(phi) - set(assignment)
    if missing:
        raise ValueError(f"free variables without a value: {', '.join(sorted(missing))}")
    ctx = _WordContext(w, env)
    for v, p in assignment.items():
        if v not in VARIABLES or not 0 <= p < ctx.size:
            raise ValueError(f"bad assignment {v}={p}")
    return bool(_fo_table(phi, ctx)[assignment.get("x", 0), assignment.get("y", 0)])


# ---------------------------------------------------------------------------
# Parsing and printing

_TOKEN = re.compile(r"[A-Za-z0-9_]+|\S")


class _Parser:
    def __init__(self, text: str, env: LanguageEnv | None):
        self.text = text
        self.env = env
        self.tokens = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
        self.i = 0

    def peek(self, offset: int = 0) -> str | None:
        j = self.i + offset
        return self.tokens[j][0] if j < len(self.tokens) else None

    def where(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            raise ParseError(f"expected {tok!r}", self.where())
        self.i += 1

    def expect_end(self) -> None:
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.peek()!r}", self.where())

    def is_letter(self, tok: str | None) -> bool:
        if tok is None:
            return False
        if self.env is None:
            return len(tok) == 1
        return tok in self.env.alphabet

    def letter(self) -> str:
        at = self.where()
        tok = self.take()
        if not self.is_letter(tok):
            raise ParseError(f"{tok!r} is not a letter", at)
        return tok

    def lang_ref(self) -> LangRef:
        at = self.where()
        first = self.take()
        if first == "eps":
            r = LangRef("eps")
        elif self.peek() == "\\":
            self.i += 1
            if not self.is_letter(first):
                raise ParseError(f"{first!r} is not a letter", at)
            r = LangRef("lquot", self._name(), first)
        else:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", first):
                raise ParseError(f"bad language name {first!r}", at)
            nxt = self.peek()
            if nxt == "?":
                self.i += 1
                r = LangRef("opt", first)
            elif nxt == "+":
                self.i += 1
                r = LangRef("plus", first)
            elif nxt == "/":
                self.i += 1
                r = LangRef("rquot", first, self.letter())
            else:
                r = LangRef("plain", first)
        if self.env is not None:
            self.env.check(r)
        return r

    def _name(self) -> str:
        at = self.where()
        tok = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) or tok == "eps":
            raise ParseError(f"bad language name {tok!r}", at)
        return tok

    def bracket_ref(self) -> LangRef:
        self.expect("[")
        r = self.lang_ref()
        self.expect("]")
        return r

    # temporal formulas: '|' binds loosest, then '&', then prefix operators

    def tl(self) -> TlFormula:
        left = self.tl_and()
        while self.peek() == "|":
            self.i += 1
            left = Or(left, self.tl_and())
        return left

    def tl_and(self) -> TlFormula:
        left = self.tl_unary()
        while self.peek() == "&":
            self.i += 1
            left = And(left, self.tl_unary())
        return left

    def tl_unary(self) -> TlFormula:
        at = self.where()
        tok = self.take()
        if tok == "!":
            return Not(self.tl_unary())
        if tok == "X":
            return Next(self.tl_unary())
        if tok == "Y":
            return Yesterday(self.tl_unary())
        if tok in ("F", "P") and self.peek() == "[":
            r = self.bracket_ref()
            return (Finally if tok == "F" else Previously)(r, self.tl_unary())
        if tok == "(":
            inner = self.tl()
            self.expect(")")
            return inner
        if tok == "T":
            return Top()
        if tok == "F":
            return Bottom()
        if tok == "min":
            return Min()
        if tok == "max":
            return Max()
        if self.is_letter(tok):
            return Letter(tok)
        raise ParseError(f"unexpected {tok!r}", at)

    # first-order formulas

    def fo(self) -> FoFormula:
        left = self.fo_and()
        while self.peek() == "|":
            self.i += 1
            left = FoOr(left, self.fo_and())
        return left

    def fo_and(self) -> FoFormula:
        left = self.fo_unary()
        while self.peek() == "&":
            self.i += 1
            left = FoAnd(left, self.fo_unary())
        return left

    def term(self) -> str:
        at = self.where()
        tok = self.take()
        if tok not in TERMS:
            raise ParseError(f"expected a term (x, y, min, max), got {tok!r}", at)
        return tok

    def fo_unary(self) -> FoFormula:
        at = self.where()
        tok = self.peek()
        if tok in ("Ex", "Ax", "Ey", "Ay") and self.peek(1) == ".":
            self.i += 2
            cls = FoExists if tok[0] == "E" else FoForall
            return cls(tok[1], self.fo_unary())
        if tok == "!":
            self.i += 1
            return FoNot(self.fo_unary())
        if tok == "(":
            self.i += 1
            inner = self.fo()
            self.expect(")")
            return inner
        if tok in TERMS and self.peek(1) == "=":
            left = self.term()
            self.expect("=")
            return FoEq(left, self.term())
        if tok == "I" and self.peek(1) == "[":
            self.i += 1
            r = self.bracket_ref()
            self.expect("(")
            left = self.term()
            self.expect(",")
            right = self.term()
            self.expect(")")
            return FoInfix(r, left, right)
        if tok == "T":
            self.i += 1
            return FoTrue()
        if tok == "F":
            self.i += 1
            return FoFalse()
        if self.is_letter(tok) and self.peek(1) == "(":
            self.i += 2
            t = self.term()
            self.expect(")")
            return FoLabel(tok, t)
        raise ParseError(f"unexpected {tok!r}" if tok else "unexpected end of input", at)


def parse_tl(text: str, env: LanguageEnv | None = None) -> TlFormula:
    """Parse a temporal formula; references are checked against ``env``.

    Keywords (``T F X Y P min max eps``) take priority over letters of the
    same spelling.
    """
    p = _Parser(text, env or default_env())
    out = p.tl()
    p.expect_end()
    return out


def parse_fo2(text: str, env: LanguageEnv | None = None) -> FoFormula:
    p = _Parser(text, env or default_env())
    out = p.fo()
    p.expect_end()
    return out


def tl_to_text(phi: TlFormula) -> str:
    return _tl_text(phi, 0)


def _tl_text(phi: TlFormula, ctx: int) -> str:
    # ctx: 0 top level, 1 inside '|', 2 inside '&', 3 operand of a prefix operator
    if isinstance(phi, Top):
        return "T"
    if isinstance(phi, Bottom):
        return "F"
    if isinstance(phi, Min):
        return "min"
    if isinstance(phi, Max):
        return "max"
    if isinstance(phi, Letter):
        return phi.letter
    if isinstance(phi, Or):
        s = f"{_tl_text(phi.left, 1)} | {_tl_text(phi.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(phi, And):
        s = f"{_tl_text(phi.left, 2)} & {_tl_text(phi.right, 3)}"
        return f"({s})" if ctx > 2 else s
    if isinstance(phi, Not):
        head = "!"
    elif isinstance(phi, Next):
        head = "X "
    elif isinstance(phi, Yesterday):
        head = "Y "
    else:
        head = f"{'F' if isinstance(phi, Finally) else 'P'}[{phi.lang}] "
    return head + _tl_text(phi.arg, 3)


def fo2_to_text(phi: FoFormula) -> str:
    return _fo_text(phi, 0)


def _fo_text(phi: FoFormula, ctx: int) -> str:
    if isinstance(phi, FoTrue):
        return "T"
    if isinstance(phi, FoFalse):
        return "F"
    if isinstance(phi, FoLabel):
        return f"{phi.letter}({phi.term})"
    if isinstance(phi, FoEq):
        return f"{phi.left}={phi.right}"
    if isinstance(phi, FoInfix):
        return f"I[{phi.lang}]({phi.left},{phi.right})"
    if isinstance(phi, FoOr):
        s = f"{_fo_text(phi.left, 1)} | {_fo_text(phi.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(phi, FoAnd):
        s = f"{_fo_text(phi.left, 2)} & {_fo_text(phi.right, 3)}"
        return f"({s})" if ctx > 2 else s
    if isinstance(phi, FoNot):
        return "!" + _fo_text(phi.arg, 3)
    q = "E" if isinstance(phi, FoExists) else "A"
    return f"{q}{phi.var}.{_fo_text(phi.arg, 3)}"


# ---------------------------------------------------------------------------
# Translations


def tlx_to_tl_plus(phi: TlFormula) -> TlFormula:
    """Replace ``X`` by ``F[eps]`` and ``Y`` by ``P[eps]``.

    The input may only reference languages of the base class, so ``eps``,
    ``K?`` and ``K+`` are rejected.
    """
    if isinstance(phi, _ATOMS):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(tlx_to_tl_plus(phi.left), tlx_to_tl_plus(phi.right))
    if isinstance(phi, Not):
        return Not(tlx_to_tl_plus(phi.arg))
    if isinstance(phi, Next):
        return Finally(LangRef("eps"), tlx_to_tl_plus(phi.arg))
    if isinstance(phi, Yesterday):
        return Previously(LangRef("eps"), tlx_to_tl_plus(phi.arg))
    if not phi.lang.in_base:
        raise NotWellSuited(f"{phi.lang} is not a language of the base class")
    return type(phi)(phi.lang, tlx_to_tl_plus(phi.arg))


def tl_plus_to_tlx(phi: TlFormula, alphabet: Sequence[str]) -> TlFormula:
    """Rewrite a formula over the well-suited extension using ``X``/``Y`` and base languages.

    ``eps`` becomes ``X``/``Y``; ``K?`` splits into a ``X`` case and ``F[K]``;
    ``K+`` reads the first (or last) letter with ``X`` (or ``Y``) and continues
    with the quotient.
    """
    if isinstance(phi, _ATOMS):
        return phi
    if isinstance(phi, (And, Or)):
        return type(phi)(tl_plus_to_tlx(phi.left, alphabet), tl_plus_to_tlx(phi.right, alphabet))
    if isinstance(phi, (Not, Next, Yesterday)):
        return type(phi)(tl_plus_to_tlx(phi.arg, alphabet))
    inner = tl_plus_to_tlx(phi.arg, alphabet)
    r = phi.lang
    forward = isinstance(phi, Finally)
    step = Next if forward else Yesterday
    if r.in_base:
        return type(phi)(r, inner)
    if r.shape == "eps":
        return step(inner)
    if r.shape == "opt":
        return Or(step(inner), type(phi)(LangRef("plain", r.name), inner))
    if r.shape == "plus":
        shape = "lquot" if forward else "rquot"
        return step(disjunction(And(Letter(a), type(phi)(LangRef(shape, r.name, a), inner)) for a in alphabet))
    raise NotWellSuited(f"cannot rewrite the reference {r}")


def tl_to_fo2(phi: TlFormula, var: str = "x") -> FoFormula:
    """Two-variable formula with one free variable ``var`` equivalent to ``phi`` at that position."""
    other = "y" if var == "x" else "x"
    if isinstance(phi, Top):
        return FoTrue()
    if isinstance(phi, Bottom):
        return FoFalse()
    if isinstance(phi, Min):
        return FoEq(var, "min")
    if isinstance(phi, Max):
        return FoEq(var, "max")
    if isinstance(phi, Letter):
        return FoLabel(phi.letter, var)
    if isinstance(phi, Not):
        return FoNot(tl_to_fo2(phi.arg, var))
    if isinstance(phi, And):
        return FoAnd(tl_to_fo2(phi.left, var), tl_to_fo2(phi.right, var))
    if isinstance(phi, Or):
        return FoOr(tl_to_fo2(phi.left, var), tl_to_fo2(phi.right, var))
    if isinstance(phi, (Next, Yesterday)):
        raise TlxNotSupported("X and Y have no direct translation; apply tlx_to_tl_plus first")
    if isinstance(phi, Finally):
        link = FoInfix(phi.lang, var, other)
    else:
        link = FoInfix(phi.lang, other, var)
    return FoExists(other, FoAnd(link, tl_to_fo2(phi.arg, other)))


def fo2_sentence(phi: TlFormula) -> FoFormula:
    """A sentence defining the language of ``phi``: ``Ex.(x=min & <phi>(x))``."""
    return FoExists("x", FoAnd(FoEq("x", "min"), tl_to_fo2(phi, "x")))


def fo2_to_tl(phi: FoFormula) -> TlFormula:
    """Not implemented: the converse translation is an optional feature."""
    raise Unsupported("translating FO2 sentences into temporal formulas is not implemented")


def build_xi(parts: Sequence[str | LangRef], side: str = "suffix") -> TlFormula:
    """Formula testing that the suffix (or prefix) at the current position lies in ``K0 a1 K1 ... an Kn``.

    ``parts`` alternates language references and letters, starting and
    ending with a reference.
    """
    if len(parts) % 2 == 0:
        raise ValueError("a marked product alternates languages and letters: K0 a1 K1 ... an Kn")
    langs = [p if isinstance(p, LangRef) else ref(p) for p in parts[0::2]]
    letters = list(parts[1::2])
    if side == "suffix":
        out: TlFormula = Finally(langs[-1], Max())
        for a, k in zip(reversed(letters), reversed(langs[:-1])):
            out = Finally(k, And(Letter(a), out))
        return out
    if side == "prefix":
        out = Previously(langs[0], Min())
        for a, k in zip(letters, langs[1:]):
            out = Previously(k, And(Letter(a), out))
        return out
    raise ValueError("side must be 'prefix' or 'suffix'")


# ---------------------------------------------------------------------------
# Rank-k equivalence


def tl_types(k: int, eta: Morphism, words: Sequence[str]) -> list[list[int]]:
    """Rank-``k`` type of every position of every word, as shared integer ids.

    Two pointed words get the same id exactly when the back-and-forth
    conditions of the ``k``-round game hold between them: same label, and
    every move left or right is answered by a move with the same infix
    image and a ``(k-1)``-equivalent target.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    table = eta.monoid.table
    unit = eta.monoid.unit
    images = [[eta.letter_image(a) for a in w] for w in words]
    ids: dict = {}

    def intern(key) -> int:
        return ids.setdefault(key, len(ids))

    level = [[intern(("label", position_label(w, i))) for i in range(len(w) + 2)] for w in words]
    for _ in range(k):
        ids = {}
        nxt = []
        for w, img, prev in zip(words, images, level):
            size = len(w) + 2
            fwd = [set() for _ in range(size)]
            bwd = [set() for _ in range(size)]
            for i in range(size):
                x = unit
                for j in range(i + 1, size):
                    fwd[i].add((x, prev[j]))
                    bwd[j].add((x, prev[i]))
                    if j <= len(w):
                        x = int(table[x, img[j - 1]])
            nxt.append([intern((prev[i], frozenset(fwd[i]), frozenset(bwd[i]))) for i in range(size)])
        level = nxt
    return level


def tl_equiv(k: int, eta: Morphism, pw1: PointedWord, pw2: PointedWord) -> bool:
    """Whether no formula of rank at most ``k`` over ``eta``-languages tells the two apart."""
    t1, t2 = tl_types(k, eta, [pw1.word, pw2.word])
    return t1[pw1.position] == t2[pw2.position]


__all__ = [
    "PointedWord", "LangRef", "LanguageEnv", "default_env", "env_from_morphism", "ref", "infix_matrix", "position_label",
    "Top", "Bottom", "Min", "Max", "Letter", "Not", "And", "Or", "Next", "Yesterday", "Finally",
    "Previously", "TlFormula", "FoTrue", "FoFalse", "FoLabel", "FoEq", "FoInfix", "FoNot", "FoAnd",
    "FoOr", "FoExists", "FoForall", "FoFormula", "parse_tl", "parse_fo2", "tl_to_text", "fo2_to_text",
    "eval_tl", "truth_table", "tl_language", "eval_fo2", "free_variables", "rank", "is_tl", "lang_refs",
    "tlx_to_tl_plus", "tl_plus_to_tlx", "tl_to_fo2", "fo2_sentence", "fo2_to_tl", "build_xi",
    "tl_types", "tl_equiv", "disjunction", "conjunction",
]
