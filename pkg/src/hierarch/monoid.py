"""Finite monoids, morphisms from free monoids, syntactic monoids and Green's relations.

Elements are integers.  Monoids generated from letters number their
elements in shortlex order of their least witness word, so the unit is
always element 0 and every element carries a canonical name.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidDfa, NotSurjective, UnknownLetter
from .lang import Dfa, make_alphabet, minimize


@dataclass(frozen=True, eq=False)
class FiniteMonoid:
    """Multiplication table with a unit and an optional compatible order.

    ``order[i, j]`` is true when ``i <= j``.
    """

    table: np.ndarray
    unit: int
    order: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise ValueError("multiplication table must be a nonempty square")
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise ValueError("table entry out of range")
        if not 0 <= self.unit < n:
            raise ValueError("unit out of range")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.order is not None:
            o = np.asarray(self.order, dtype=bool)
            o.setflags(write=False)
            object.__setattr__(self, "order", o)

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def mul(self, *xs: int) -> int:
        out = self.unit
        for x in xs:
            out = int(self.table[out, x])
        return out

    def leq(self, s: int, t: int) -> bool:
        if self.order is None:
            raise ValueError("monoid carries no order")
        return bool(self.order[s, t])

    def with_order(self, order: np.ndarray) -> "FiniteMonoid":
        return FiniteMonoid(self.table, self.unit, order)

    # -- omega powers -------------------------------------------------------

    @cached_property
    def omega(self) -> np.ndarray:
        """``omega[s]`` is the unique idempotent power of ``s``."""
        out = np.empty(self.size, dtype=np.int64)
        t = self.table
        for s in range(self.size):
            seen = {}
            x, k = s, 1
            while x not in seen:
                seen[x] = k
                x = int(t[x, s])
                k += 1
            # powers from seen[x] onward cycle with period k - seen[x]
            start, period = seen[x], k - seen[x]
            # the idempotent is s^m for the multiple m of period with m >= start
            m = max(period, ((start + period - 1) // period) * period)
            out[s] = self._power(s, m)
        out.setflags(write=False)
        return out

    @cached_property
    def omega_plus(self) -> np.ndarray:
        out = self.table[self.omega, np.arange(self.size)]
        out.setflags(write=False)
        return out

    def _power(self, s: int, m: int) -> int:
        result, base = self.unit, s
        while m:
            if m & 1:
                result = int(self.table[result, base])
            base = int(self.table[base, base])
            m >>= 1
        return result

    def power(self, s: int, m: int) -> int:
        return self._power(s, m)

    def omega_power(self, s: int) -> int:
        return int(self.omega[s])

    def omega_plus_one(self, s: int) -> int:
        return int(self.omega_plus[s])

    @cached_property
    def idempotent_mask(self) -> np.ndarray:
        ar = np.arange(self.size)
        return self.table[ar, ar] == ar

    def idempotents(self) -> list[int]:
        return [int(e) for e in np.flatnonzero(self.idempotent_mask)]

    def is_group(self) -> bool:
        if self.idempotents() != [self.unit]:
            return False
        t = self.table
        return all(
            any(t[x, y] == self.unit and t[y, x] == self.unit for y in range(self.size))
            for x in range(self.size)
        )

    def is_associative(self) -> bool:
        return _associative(self.table)

    # -- closures -----------------------------------------------------------

    def closure(self, gens: Iterable[int], with_unit: bool = True) -> frozenset[int]:
        """Submonoid (or subsemigroup) generated by ``gens``."""
        gens = list(dict.fromkeys(int(g) for g in gens))
        out = set(gens)
        if with_unit:
            out.add(self.unit)
        queue = deque(out)
        while queue:
            x = queue.popleft()
            for g in gens:
                y = int(self.table[x, g])
                if y not in out:
                    out.add(y)
                    queue.append(y)
        return frozenset(out)

    def is_closed(self, subset: Iterable[int]) -> bool:
        sub = np.fromiter(sorted(set(subset)), dtype=np.int64)
        if sub.size == 0:
            return True
        return bool(np.isin(self.table[np.ix_(sub, sub)], sub).all())

    def check_order(self) -> bool:
        """Whether ``order`` is a partial order compatible with multiplication."""
        o = self.order
        if o is None:
            return True
        n = self.size
        if not o.diagonal().all():
            return False
        if (o & o.T & ~np.eye(n, dtype=bool)).any():
            return False
        if not _transitive(o):
            return False
        t = self.table
        # i <= j implies ik <= jk and ki <= kj
        i, j = np.nonzero(o)
        return bool(o[t[i, :], t[j, :]].all() and o[t[:, i], t[:, j]].all())


def _associative(t: np.ndarray) -> bool:
    """Exhaustive check of (xy)z = x(yz) over all triples."""
    n = t.shape[0]
    for x in range(n):
        left = t[t[x, :], :]          # left[y, z] = (xy)z
        right = t[x, t]               # right[y, z] = x(yz)
        if not np.array_equal(left, right):
            return False
    return True


def _transitive(o: np.ndarray) -> bool:
    m = o.astype(np.float32)
    return bool(((m @ m) > 0)[~o].sum() == 0)


@dataclass(frozen=True, eq=False)
class Morphism:
    """A morphism from ``alphabet*`` into ``monoid`` given by letter images."""

    alphabet: tuple[str, ...]
    monoid: FiniteMonoid
    letters: tuple[int, ...]

    def __post_init__(self):
        if len(self.letters) != len(self.alphabet):
            raise ValueError("one image per letter is required")

    def letter_image(self, a: str) -> int:
        try:
            return self.letters[self.alphabet.index(a)]
        except ValueError:
            raise UnknownLetter(f"letter {a!r} is not in the alphabet") from None

    def image(self, word: Iterable[str]) -> int:
        m = self.monoid
        x = m.unit
        for a in word:
            x = int(m.table[x, self.letter_image(a)])
        return x

    __call__ = image

    @cached_property
    def witness(self) -> tuple[str | None, ...]:
        """Shortlex-least word mapped to each element, ``None`` if unreachable."""
        m = self.monoid
        out: list[str | None] = [None] * m.size
        out[m.unit] = ""
        queue = deque([m.unit])
        while queue:
            x = queue.popleft()
            for a, g in zip(self.alphabet, self.letters):
                y = int(m.table[x, g])
                if out[y] is None:
                    out[y] = out[x] + a
                    queue.append(y)
        return tuple(out)

    @property
    def surjective(self) -> bool:
        return all(w is not None for w in self.witness)

    def require_surjective(self) -> None:
        if not self.surjective:
            raise NotSurjective("morphism does not reach every element of its codomain")

    def name(self, s: int) -> str:
        w = self.witness[s]
        if w is None:
            return f"#{s}"
        return w if w else "1"

    @cached_property
    def plus_image(self) -> frozenset[int]:
        """Images of nonempty words."""
        return self.monoid.closure(self.letters, with_unit=False)

    @cached_property
    def right_cayley(self) -> np.ndarray:
        """``right_cayley[s, i]`` is ``s`` times the image of letter ``i``."""
        return self.monoid.table[:, list(self.letters)]

    def restrict_to_image(self) -> "Morphism":
        """Corestriction onto the reachable elements (renumbered in shortlex order)."""
        return morphism_from_action(self.alphabet, self.right_cayley, self.monoid.unit,
                                    order=self.monoid.order)


def morphism_from_action(alphabet: Sequence[str], step, start, order=None) -> Morphism:
    """Build the monoid generated by letters acting on some set.

    ``step(x, i)`` gives the action of letter ``i`` on an element ``x``
    (any hashable) and ``start`` is the unit.  When ``step`` is an array it is
    read as a right Cayley table.  Elements are numbered by BFS from the unit,
    which is shortlex order of their least witnesses.
    """
    alphabet = make_alphabet(alphabet)
    if isinstance(step, np.ndarray):
        arr = step
        step = lambda x, i: int(arr[x, i])  # noqa: E731
        start = int(start)
    index = {start: 0}
    elems = [start]
    k = len(alphabet)
    cayley = []
    i = 0
    while i < len(elems):
        x = elems[i]
        row = []
        for a in range(k):
            y = step(x, a)
            if y not in index:
                index[y] = len(elems)
                elems.append(y)
            row.append(index[y])
        cayley.append(row)
        i += 1
    n = len(elems)
    right = np.array(cayley, dtype=np.int64).reshape(n, k)
    # BFS parents: every non-unit element is parent * letter.
    parent = np.full(n, -1, dtype=np.int64)
    via = np.full(n, -1, dtype=np.int64)
    for x in range(n):
        for a in range(k):
            y = right[x, a]
            if y != 0 and parent[y] < 0 and y > x:
                parent[y], via[y] = x, a
    table = np.empty((n, n), dtype=np.int64)
    table[:, 0] = np.arange(n)
    for y in range(1, n):
        table[:, y] = right[table[:, parent[y]], via[y]]
    letters = tuple(int(right[0, a]) for a in range(k))
    new_order = None
    if order is not None:
        ids = np.array(elems, dtype=np.int64)
        new_order = np.asarray(order)[np.ix_(ids, ids)]
    return Morphism(alphabet, FiniteMonoid(table, 0, new_order), letters)


def transition_monoid(d: Dfa) -> Morphism:
    """Transformation monoid of a complete DFA with its natural morphism."""
    states = d.states

    def step(f, a):
        return tuple(d.delta[q][a] for q in f)

    m = morphism_from_action(d.alphabet, step, tuple(range(states)))
    return m


def transformations(d: Dfa, morphism: Morphism) -> np.ndarray:
    """``out[s, q]`` is the state reached from ``q`` by reading a witness of ``s``."""
    out = np.empty((morphism.monoid.size, d.states), dtype=np.int64)
    for s, w in enumerate(morphism.witness):
        out[s] = [d.run(w, q) for q in range(d.states)]
    return out


@dataclass(frozen=True, eq=False)
class SyntacticData:
    """Syntactic morphism of a language with its accepting set and order."""

    morphism: Morphism
    accept: frozenset[int]
    dfa: Dfa = field(repr=False)

    @property
    def monoid(self) -> FiniteMonoid:
        return self.morphism.monoid

    @cached_property
    def order(self) -> np.ndarray:
        """``order[s, t]``: every accepting context of ``s`` accepts ``t``."""
        d = self.dfa
        incl = _state_inclusion(d)
        f = transformations(d, self.morphism)
        n = f.shape[0]
        out = np.ones((n, n), dtype=bool)
        for q in range(d.states):
            col = f[:, q]
            out &= incl[col[:, None], col[None, :]]
        out.setflags(write=False)
        return out

    def ordered(self) -> FiniteMonoid:
        return self.monoid.with_order(self.order)

    def leq(self, s: int, t: int) -> bool:
        return bool(self.order[s, t])


def _state_inclusion(d: Dfa) -> np.ndarray:
    """``incl[p, q]`` is true when the language of ``p`` is included in that of ``q``."""
    acc = np.zeros(d.states, dtype=bool)
    acc[list(d.accepting)] = True
    incl = ~acc[:, None] | acc[None, :]
    delta = np.array(d.delta, dtype=np.int64).reshape(d.states, len(d.alphabet))
    while True:
        new = incl.copy()
        for a in range(len(d.alphabet)):
            col = delta[:, a]
            new &= incl[col[:, None], col[None, :]]
        if np.array_equal(new, incl):
            return incl
        incl = new


def syntactic_morphism(d: Dfa) -> SyntacticData:
    """Syntactic morphism, read off the transition monoid of the minimal DFA."""
    d = minimize(d)
    m = transition_monoid(d)
    f = transformations(d, m)
    accept = frozenset(int(s) for s in np.flatnonzero(np.isin(f[:, d.initial], list(d.accepting))))
    return SyntacticData(m, accept, d)


def omega_power(m: FiniteMonoid, s: int) -> int:
    return m.omega_power(s)


def omega_plus_one(m: FiniteMonoid, s: int) -> int:
    return m.omega_plus_one(s)


def idempotents(m: FiniteMonoid) -> list[int]:
    return m.idempotents()


def is_group(m: FiniteMonoid) -> bool:
    return m.is_group()


# ---------------------------------------------------------------------------
# Green's relations


@dataclass(frozen=True, eq=False)
class GreenData:
    """Green preorders as boolean matrices: ``r_le[s, t]`` means s <=_R t."""

    r_le: np.ndarray
    l_le: np.ndarray
    j_le: np.ndarray

    @cached_property
    def r_eq(self) -> np.ndarray:
        return self.r_le & self.r_le.T

    @cached_property
    def l_eq(self) -> np.ndarray:
        return self.l_le & self.l_le.T

    @cached_property
    def j_eq(self) -> np.ndarray:
        return self.j_le & self.j_le.T

    @cached_property
    def h_eq(self) -> np.ndarray:
        return self.r_eq & self.l_eq

    def r_lt(self, s: int, t: int) -> bool:
        return bool(self.r_le[s, t] and not self.r_le[t, s])

    def l_lt(self, s: int, t: int) -> bool:
        return bool(self.l_le[s, t] and not self.l_le[t, s])

    def j_lt(self, s: int, t: int) -> bool:
        return bool(self.j_le[s, t] and not self.j_le[t, s])

    @staticmethod
    def _classes(eq: np.ndarray) -> list[list[int]]:
        seen: set[int] = set()
        out = []
        for s in range(eq.shape[0]):
            if s not in seen:
                cls = [int(t) for t in np.flatnonzero(eq[s])]
                seen.update(cls)
                out.append(cls)
        return out

    @property
    def r_classes(self) -> list[list[int]]:
        return self._classes(self.r_eq)

    @property
    def l_classes(self) -> list[list[int]]:
        return self._classes(self.l_eq)

    @property
    def j_classes(self) -> list[list[int]]:
        return self._classes(self.j_eq)

    @property
    def h_classes(self) -> list[list[int]]:
        return self._classes(self.h_eq)


def green(m: FiniteMonoid) -> GreenData:
    """Green preorders: s <=_R t iff s in tM, s <=_L t iff s in Mt, s <=_J t iff s in MtM."""
    n = m.size
    t = m.table
    cols = np.broadcast_to(np.arange(n)[:, None], (n, n))
    r_le = np.zeros((n, n), dtype=bool)
    r_le[t, cols] = True            # t[x, y] lies in xM
    l_le = np.zeros((n, n), dtype=bool)
    l_le[t, cols.T] = True          # t[x, y] lies in My
    # s <=_J t iff s <=_L u <=_R t for some u, i.e. s in M(tM)
    j_le = (l_le.astype(np.float32) @ r_le.astype(np.float32)) > 0
    for a in (r_le, l_le, j_le):
        a.setflags(write=False)
    return GreenData(r_le, l_le, j_le)


# ---------------------------------------------------------------------------
# Serialization


def monoid_to_json(morphism: Morphism, order: np.ndarray | None = None) -> dict:
    m = morphism.monoid
    if order is None:
        order = m.order
    return {
        "size": m.size,
        "unit": m.unit,
        "table": m.table.tolist(),
        "order": [] if order is None else [[int(i), int(j)] for i, j in zip(*np.nonzero(order))],
        "letters": {a: int(g) for a, g in zip(morphism.alphabet, morphism.letters)},
        "witness": list(morphism.witness),
    }


def monoid_from_json(data: dict | str) -> Morphism:
    """Load a morphism from the monoid JSON form (``order`` and ``witness`` optional)."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        table = np.array(data["table"], dtype=np.int64)
        unit = int(data["unit"])
        letters = data["letters"]
        alphabet = make_alphabet(list(letters))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDfa(f"malformed monoid JSON: {exc}") from exc
    if "size" in data and int(data["size"]) != table.shape[0]:
        raise ValueError("declared size does not match the table")
    order = None
    if data.get("order"):
        order = np.zeros(table.shape, dtype=bool)
        for i, j in data["order"]:
            order[i, j] = True
    mono = FiniteMonoid(table, unit, order)
    if not _associative(mono.table):
        raise ValueError("multiplication table is not associative")
    t = mono.table
    if not ((t[unit] == np.arange(mono.size)).all() and (t[:, unit] == np.arange(mono.size)).all()):
        raise ValueError("unit is not a two-sided identity")
    return Morphism(alphabet, mono, tuple(int(letters[a]) for a in alphabet))
