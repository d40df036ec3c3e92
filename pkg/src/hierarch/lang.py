"""Regular languages: regex parsing, DFA construction, minimization and products.

Every DFA produced by this module is complete.  Minimized DFAs are
renumbered in breadth-first order from the initial state (letters taken in
alphabet order), so two minimal DFAs of the same language are identical
values and serialize to identical JSON.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import AlphabetMismatch, InvalidDfa, ParseError, UnknownLetter

Word = str

_RESERVED = set("()|* \t\n")


def make_alphabet(letters: Iterable[str]) -> tuple[str, ...]:
    """Validate and freeze an alphabet, keeping the given order."""
    letters = tuple(letters)
    if not letters:
        raise ValueError("alphabet must be nonempty")
    for x in letters:
        if not isinstance(x, str) or len(x) != 1:
            raise ValueError(f"alphabet symbols must be single characters, got {x!r}")
        if x in _RESERVED:
            raise ValueError(f"symbol {x!r} is reserved")
    if len(set(letters)) != len(letters):
        raise ValueError("alphabet contains duplicate symbols")
    return letters


# ---------------------------------------------------------------------------
# Regex syntax


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class Letter:
    symbol: str


@dataclass(frozen=True)
class Union:
    left: "Regex"
    right: "Regex"


@dataclass(frozen=True)
class Concat:
    left: "Regex"
    right: "Regex"


@dataclass(frozen=True)
class Star:
    inner: "Regex"


Regex = Empty | Epsilon | Letter | Union | Concat | Star


class _RegexParser:
    def __init__(self, text: str, alphabet: Sequence[str]):
        self.text = text
        self.alphabet = tuple(alphabet)
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str | None:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self) -> Regex:
        if self._peek() is None:
            raise ParseError("empty regex (write 'eps' for the empty word)", self.pos)
        node = self._union()
        if self._peek() is not None:
            raise ParseError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return node

    def _union(self) -> Regex:
        node = self._concat()
        while self._peek() == "|":
            self.pos += 1
            node = Union(node, self._concat())
        return node

    def _concat(self) -> Regex:
        items = []
        while (c := self._peek()) is not None and c not in "|)":
            items.append(self._starred())
        if not items:
            raise ParseError("expected an expression", self.pos)
        node = items[0]
        for item in items[1:]:
            node = Concat(node, item)
        return node

    def _starred(self) -> Regex:
        node = self._atom()
        while self._peek() == "*":
            self.pos += 1
            node = Star(node)
        return node

    def _atom(self) -> Regex:
        c = self._peek()
        start = self.pos
        if c == "(":
            self.pos += 1
            node = self._union()
            if self._peek() != ")":
                raise ParseError("missing ')'", self.pos)
            self.pos += 1
            return node
        if c == "*":
            raise ParseError("'*' without operand", start)
        for word, node in (("empty", Empty()), ("eps", Epsilon())):
            if self.text.startswith(word, self.pos):
                self.pos += len(word)
                return node
        self.pos += 1
        if c in self.alphabet:
            return Letter(c)
        if c == "A":
            node: Regex = Letter(self.alphabet[0])
            for x in self.alphabet[1:]:
                node = Union(node, Letter(x))
            return node
        if c.isalnum():
            raise UnknownLetter(f"letter {c!r} at position {start} is not in the alphabet")
        raise ParseError(f"unexpected {c!r}", start)


def parse_regex(text: str, alphabet: Sequence[str]) -> Regex:
    """Parse ``text``.  Precedence: star, then concatenation, then union."""
    return _RegexParser(text, make_alphabet(alphabet)).parse()


# ---------------------------------------------------------------------------
# Automata


@dataclass(frozen=True)
class Dfa:
    alphabet: tuple[str, ...]
    states: int
    initial: int
    accepting: frozenset[int]
    delta: tuple[tuple[int, ...], ...]  # delta[q][letter index]

    def __post_init__(self):
        if self.states < 1:
            raise InvalidDfa("a DFA needs at least one state")
        if not 0 <= self.initial < self.states:
            raise InvalidDfa("initial state out of range")
        if any(not 0 <= q < self.states for q in self.accepting):
            raise InvalidDfa("accepting state out of range")
        if len(self.delta) != self.states:
            raise InvalidDfa("transition table has the wrong number of rows")
        for row in self.delta:
            if len(row) != len(self.alphabet):
                raise InvalidDfa("transition table is not complete")
            if any(not 0 <= q < self.states for q in row):
                raise InvalidDfa("transition target out of range")

    def index(self, letter: str) -> int:
        try:
            return self.alphabet.index(letter)
        except ValueError:
            raise UnknownLetter(f"letter {letter!r} is not in the alphabet") from None

    def run(self, word: Iterable[str], state: int | None = None) -> int:
        q = self.initial if state is None else state
        for x in word:
            q = self.delta[q][self.index(x)]
        return q

    def accepts(self, word: Iterable[str]) -> bool:
        return self.run(word) in self.accepting

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "states": self.states,
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "transitions": [
                {"from": q, "on": x, "to": self.delta[q][i]}
                for q in range(self.states)
                for i, x in enumerate(self.alphabet)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def dfa_from_json(data: dict | str, complete: bool = False) -> Dfa:
    """Load a DFA from its JSON form.

    Partial transition tables are rejected unless ``complete`` is set, in
    which case missing transitions go to a fresh sink state.
    """
    if isinstance(data, str):
        data = json.loads(data)
    try:
        alphabet = make_alphabet(data["alphabet"])
        n = int(data["states"])
        initial = int(data["initial"])
        accepting = frozenset(int(q) for q in data["accepting"])
        transitions = data["transitions"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDfa(f"malformed DFA JSON: {exc}") from exc
    table: dict[tuple[int, int], int] = {}
    for t in transitions:
        src, letter, dst = int(t["from"]), t["on"], int(t["to"])
        if letter not in alphabet:
            raise UnknownLetter(f"transition on unknown letter {letter!r}")
        if not (0 <= src < n and 0 <= dst < n):
            raise InvalidDfa("transition endpoint out of range")
        key = (src, alphabet.index(letter))
        if key in table and table[key] != dst:
            raise InvalidDfa(f"nondeterministic transition from {src} on {letter!r}")
        table[key] = dst
    missing = [(q, i) for q in range(n) for i in range(len(alphabet)) if (q, i) not in table]
    sink = n
    if missing:
        if not complete:
            raise InvalidDfa(f"DFA is partial ({len(missing)} missing transitions); use --complete")
        n += 1
        for q, i in missing:
            table[q, i] = sink
        for i in range(len(alphabet)):
            table[sink, i] = sink
    delta = tuple(tuple(table[q, i] for i in range(len(alphabet))) for q in range(n))
    return Dfa(alphabet, n, initial, accepting, delta)


def minimize(d: Dfa) -> Dfa:
    """Minimal complete DFA, states numbered in BFS order."""
    k = len(d.alphabet)
    reach = _bfs_order(d)
    index = {q: i for i, q in enumerate(reach)}
    # Moore refinement on the reachable part.
    block = [1 if q in d.accepting else 0 for q in reach]
    while True:
        sigs = {}
        new = []
        for i, q in enumerate(reach):
            sig = (block[i],) + tuple(block[index[d.delta[q][x]]] for x in range(k))
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == len(set(block)):
            block = new
            break
        block = new
    # Quotient automaton, then canonical BFS renumbering.
    nb = len(set(block))
    rep = {}
    for i, q in enumerate(reach):
        rep.setdefault(block[i], q)
    delta = [None] * nb
    for b, q in rep.items():
        delta[b] = tuple(block[index[d.delta[q][x]]] for x in range(k))
    accepting = {block[i] for i, q in enumerate(reach) if q in d.accepting}
    quotient = Dfa(d.alphabet, nb, block[0], frozenset(accepting), tuple(delta))
    return _renumber(quotient)


def _bfs_order(d: Dfa) -> list[int]:
    seen = {d.initial}
    order = [d.initial]
    queue = deque(order)
    while queue:
        q = queue.popleft()
        for r in d.delta[q]:
            if r not in seen:
                seen.add(r)
                order.append(r)
                queue.append(r)
    return order


def _renumber(d: Dfa) -> Dfa:
    order = _bfs_order(d)
    pos = {q: i for i, q in enumerate(order)}
    delta = tuple(tuple(pos[r] for r in d.delta[q]) for q in order)
    accepting = frozenset(pos[q] for q in d.accepting if q in pos)
    return Dfa(d.alphabet, len(order), 0, accepting, delta)


def same_language(d1: Dfa, d2: Dfa) -> bool:
    _check_alphabets(d1, d2)
    return minimize(d1) == minimize(d2)


def is_empty(d: Dfa) -> bool:
    return not any(q in d.accepting for q in _bfs_order(d))


# ---------------------------------------------------------------------------
# NFAs (internal) and the regex compiler


class _Nfa:
    """Epsilon-NFA with integer states, used only as a construction device."""

    def __init__(self, alphabet: tuple[str, ...]):
        self.alphabet = alphabet
        self.moves: list[dict[int, set[int]]] = []
        self.eps: list[set[int]] = []

    def new(self) -> int:
        self.moves.append({})
        self.eps.append(set())
        return len(self.moves) - 1

    def add(self, src: int, letter: int, dst: int) -> None:
        self.moves[src].setdefault(letter, set()).add(dst)

    def closure(self, states: Iterable[int]) -> frozenset[int]:
        out = set(states)
        stack = list(out)
        while stack:
            q = stack.pop()
            for r in self.eps[q]:
                if r not in out:
                    out.add(r)
                    stack.append(r)
        return frozenset(out)

    def embed(self, d: Dfa) -> list[int]:
        """Copy a DFA in; returns the new state ids indexed by old state."""
        ids = [self.new() for _ in range(d.states)]
        for q in range(d.states):
            for x, r in enumerate(d.delta[q]):
                self.add(ids[q], x, ids[r])
        return ids

    def determinize(self, initial: Iterable[int], accepting: set[int]) -> Dfa:
        start = self.closure(initial)
        index = {start: 0}
        subsets = [start]
        delta = []
        i = 0
        while i < len(subsets):
            cur = subsets[i]
            row = []
            for x in range(len(self.alphabet)):
                nxt = set()
                for q in cur:
                    nxt |= self.moves[q].get(x, set())
                nxt = self.closure(nxt)
                if nxt not in index:
                    index[nxt] = len(subsets)
                    subsets.append(nxt)
                row.append(index[nxt])
            delta.append(tuple(row))
            i += 1
        acc = frozenset(j for j, s in enumerate(subsets) if s & accepting)
        return minimize(Dfa(self.alphabet, len(subsets), 0, acc, tuple(delta)))


def compile_regex(regex: Regex, alphabet: Sequence[str]) -> Dfa:
    """Thompson construction, subset construction, then minimization."""
    alphabet = make_alphabet(alphabet)
    nfa = _Nfa(alphabet)

    def build(node: Regex) -> tuple[int, int]:
        s, f = nfa.new(), nfa.new()
        if isinstance(node, Empty):
            pass
        elif isinstance(node, Epsilon):
            nfa.eps[s].add(f)
        elif isinstance(node, Letter):
            if node.symbol not in alphabet:
                raise UnknownLetter(f"letter {node.symbol!r} is not in the alphabet")
            nfa.add(s, alphabet.index(node.symbol), f)
        elif isinstance(node, Union):
            for part in (node.left, node.right):
                ps, pf = build(part)
                nfa.eps[s].add(ps)
                nfa.eps[pf].add(f)
        elif isinstance(node, Concat):
            ls, lf = build(node.left)
            rs, rf = build(node.right)
            nfa.eps[s].add(ls)
            nfa.eps[lf].add(rs)
            nfa.eps[rf].add(f)
        elif isinstance(node, Star):
            ps, pf = build(node.inner)
            nfa.eps[s] |= {ps, f}
            nfa.eps[pf] |= {ps, f}
        else:
            raise TypeError(f"not a regex node: {node!r}")
        return s, f

    s, f = build(regex)
    return nfa.determinize([s], {f})


def compile(regex: Regex | str, alphabet: Sequence[str]) -> Dfa:
    """Minimal complete DFA for a regex (string or AST)."""
    if isinstance(regex, str):
        regex = parse_regex(regex, alphabet)
    return compile_regex(regex, alphabet)


def regex_dfa(text: str, alphabet: Sequence[str] = "ab") -> Dfa:
    return compile(text, tuple(alphabet))


# ---------------------------------------------------------------------------
# Boolean operations and concatenations


def _check_alphabets(*ds: Dfa) -> None:
    if len({d.alphabet for d in ds}) > 1:
        raise AlphabetMismatch("operands are over different alphabets")


def _product(d1: Dfa, d2: Dfa, keep) -> Dfa:
    _check_alphabets(d1, d2)
    k = len(d1.alphabet)
    index = {(d1.initial, d2.initial): 0}
    pairs = [(d1.initial, d2.initial)]
    delta = []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        row = []
        for x in range(k):
            nxt = (d1.delta[p][x], d2.delta[q][x])
            if nxt not in index:
                index[nxt] = len(pairs)
                pairs.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
        i += 1
    acc = frozenset(j for j, (p, q) in enumerate(pairs) if keep(p in d1.accepting, q in d2.accepting))
    return minimize(Dfa(d1.alphabet, len(pairs), 0, acc, tuple(delta)))


def complement(d: Dfa) -> Dfa:
    return minimize(Dfa(d.alphabet, d.states, d.initial,
                        frozenset(range(d.states)) - d.accepting, d.delta))


def union(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda x, y: x or y)


def intersection(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda x, y: x and y)


def difference(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda x, y: x and not y)


def combine(op: str, d1: Dfa, d2: Dfa | None = None) -> Dfa:
    """Boolean combination: ``union``, ``intersection``, ``complement`` or ``difference``."""
    if op == "complement":
        return complement(d1)
    if d2 is None:
        raise ValueError(f"operation {op!r} needs two operands")
    ops = {"union": union, "intersection": intersection, "difference": difference}
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    return ops[op](d1, d2)


def universal(alphabet: Sequence[str]) -> Dfa:
    alphabet = make_alphabet(alphabet)
    return Dfa(alphabet, 1, 0, frozenset({0}), ((0,) * len(alphabet),))


def empty_language(alphabet: Sequence[str]) -> Dfa:
    alphabet = make_alphabet(alphabet)
    return Dfa(alphabet, 1, 0, frozenset(), ((0,) * len(alphabet),))


def concat(*parts: Dfa | str) -> Dfa:
    """Concatenation of DFAs; a string part stands for that single word."""
    dfas = [p for p in parts if isinstance(p, Dfa)]
    if not dfas:
        raise ValueError("concat needs at least one DFA operand")
    _check_alphabets(*dfas)
    alphabet = dfas[0].alphabet
    nfa = _Nfa(alphabet)
    start = cur = nfa.new()
    for part in parts:
        if isinstance(part, str):
            for x in part:
                nxt = nfa.new()
                nfa.add(cur, alphabet.index(x) if x in alphabet else _unknown(x), nxt)
                cur = nxt
        else:
            ids = nfa.embed(part)
            nfa.eps[cur].add(ids[part.initial])
            end = nfa.new()
            for q in part.accepting:
                nfa.eps[ids[q]].add(end)
            cur = end
    return nfa.determinize([start], {cur})


def _unknown(x: str) -> int:
    raise UnknownLetter(f"letter {x!r} is not in the alphabet")


def marked_concat(k: Dfa, a: str, l: Dfa) -> Dfa:
    """The language ``K a L``."""
    return concat(k, a, l)


def left_quotient(d: Dfa, word: Word) -> Dfa:
    """``word^{-1} L``: shift the initial state."""
    return minimize(Dfa(d.alphabet, d.states, d.run(word), d.accepting, d.delta))


def right_quotient(d: Dfa, word: Word) -> Dfa:
    """``L word^{-1}``: states that reach acceptance by reading ``word``."""
    acc = frozenset(q for q in range(d.states) if d.run(word, q) in d.accepting)
    return minimize(Dfa(d.alphabet, d.states, d.initial, acc, d.delta))


def word_in(d: Dfa, w: Word) -> bool:
    return d.accepts(w)


def words(alphabet: Sequence[str], max_len: int, min_len: int = 0) -> Iterator[str]:
    """All words up to ``max_len`` in shortlex order."""
    layer = [""]
    for n in range(max_len + 1):
        if n >= min_len:
            yield from layer
        layer = [w + x for w in layer for x in alphabet]


# ---------------------------------------------------------------------------
# Marked concatenation: determinism and unambiguity


def is_marked_concat_unambiguous(k: Dfa, a: str, l: Dfa, mode: str = "unambiguous") -> bool:
    """Test a marked concatenation ``K a L``.

    ``left_det``: K and KaA* are disjoint.  ``right_det``: L and A*aL are
    disjoint.  ``unambiguous``: no word of KaL has two factorizations,
    decided by running two guesses of the cut position side by side.
    """
    _check_alphabets(k, l)
    if a not in k.alphabet:
        raise UnknownLetter(f"letter {a!r} is not in the alphabet")
    full = universal(k.alphabet)
    if mode == "left_det":
        return is_empty(intersection(k, marked_concat(k, a, full)))
    if mode == "right_det":
        return is_empty(intersection(l, marked_concat(full, a, l)))
    if mode != "unambiguous":
        raise ValueError(f"unknown mode {mode!r}")

    ai = k.index(a)
    # A track is ("K", state) before its cut and ("L", state) after it.
    def moves(track, x):
        side, q = track
        if side == "L":
            return [(("L", l.delta[q][x]), False)]
        out = [(("K", k.delta[q][x]), False)]
        if x == ai and q in k.accepting:
            out.append((("L", l.initial), True))
        return out

    start = (("K", k.initial), ("K", k.initial), False)
    seen = {start}
    stack = [start]
    while stack:
        t1, t2, diff = stack.pop()
        if diff and t1[0] == t2[0] == "L" and t1[1] in l.accepting and t2[1] in l.accepting:
            return False
        for x in range(len(k.alphabet)):
            for n1, c1 in moves(t1, x):
                for n2, c2 in moves(t2, x):
                    state = (n1, n2, diff or c1 != c2)
                    if state not in seen:
                        seen.add(state)
                        stack.append(state)
    return True


def accepted_words(d: Dfa, max_len: int) -> list[str]:
    return [w for w in words(d.alphabet, max_len) if d.accepts(w)]
