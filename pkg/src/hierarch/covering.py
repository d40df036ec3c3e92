"""Covering and separation for unambiguous polynomial closures of finite classes.

A covering instance ``(L0, [L1, ..., Ln])`` asks for a cover of ``L0`` by
languages of the class such that every block misses some ``Li``.  The
decision goes through rating maps: each ``Li`` gives a powerset semiring
``2^Mi`` and the product of those rates every language.  The optimal
imprint is read off the least set ``S`` of pairs (element of ``N``, rating)
closed under four rules:

* trivial elements ``(eta(w), rho(w))``,
* downsets in the rating order,
* products,
* the unambiguous closure rule: for multiplicative idempotent pairs
  ``(e1, f1)``, ``(e2, f2)`` in ``S`` and ``s`` with ``e1 <=_R s e2`` and
  ``e2 <=_L e1 s``, add ``(e1 s e2, f1 rho(eta^-1(s)) f2)``.

``S`` is kept as one antichain of maximal ratings per element of ``N``.
The last rule only needs to fire on ``(e, g^w)`` for ``e`` idempotent and
``g`` maximal: every idempotent ``f <= g`` satisfies ``f <= g^w``, and
``(e, g^w)`` is already in ``S`` by closure under products.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlphabetMismatch, SizeGuard, Unsupported, UnsupportedClass
from .lang import Dfa
from .monoid import FiniteMonoid, Morphism, green, syntactic_morphism
from .prevariety import PrevarietyOracle

DEFAULT_GUARD = 1 << 16
POWERSET_LIMIT = 16


def size_guard() -> int:
    """Cap on the number of generated pairs, overridable with ``HIERARCH_SIZE_GUARD``."""
    value = os.environ.get("HIERARCH_SIZE_GUARD")
    return int(value) if value else DEFAULT_GUARD


# ---------------------------------------------------------------------------
# semirings
#
# A semiring is any object with ``zero``, ``one``, ``add``, ``mul``, ``leq``
# and ``size``.  Addition is idempotent and ``leq(r, s)`` means ``r + s = s``.


class _OmegaMixin:
    def omega(self, r):
        """The idempotent power of ``r``."""
        cache = self.__dict__.setdefault("_omega_cache", {})
        out = cache.get(r)
        if out is None:
            seen = {r: 1}
            x, n = r, 1
            while True:
                x = self.mul(x, r)
                n += 1
                if x in seen:
                    break
                seen[x] = n
            start, period = seen[x], n - seen[x]
            m = period * -(-start // period)
            out = r
            for _ in range(m - 1):
                out = self.mul(out, r)
            cache[r] = out
        return out

    def is_idempotent(self, r) -> bool:
        return self.mul(r, r) == r

    def sum(self, items):
        out = self.zero
        for r in items:
            out = self.add(out, r)
        return out


class PowersetSemiring(_OmegaMixin):
    """Subsets of a finite monoid as bitmasks; union and pointwise product."""

    def __init__(self, monoid: FiniteMonoid, limit: int | None = POWERSET_LIMIT):
        n = monoid.size
        if limit is not None and n > limit:
            raise SizeGuard(f"powerset semiring of a monoid with {n} > {limit} elements")
        self.monoid = monoid
        self.n = n
        self.zero = 0
        self.one = 1 << monoid.unit
        table = monoid.table
        # chunks[x][c][b]: x times the elements encoded by byte b of chunk c
        self._chunks = []
        for x in range(n):
            per_x = []
            for c in range(0, n, 8):
                row = [0] * 256
                for b in range(1, 256):
                    low = b & -b
                    y = c + low.bit_length() - 1
                    rest = row[b ^ low]
                    row[b] = rest | (1 << int(table[x, y])) if y < n else rest
                per_x.append(row)
            self._chunks.append(per_x)

    @property
    def size(self) -> int:
        return 1 << self.n

    def add(self, x: int, y: int) -> int:
        return x | y

    def mul(self, x: int, y: int) -> int:
        out = 0
        chunks = self._chunks
        while x:
            low = x & -x
            per_x = chunks[low.bit_length() - 1]
            rest, c = y, 0
            while rest:
                out |= per_x[c][rest & 255]
                rest >>= 8
                c += 1
            x ^= low
        return out

    def leq(self, x: int, y: int) -> bool:
        return x & ~y == 0

    def singleton(self, s: int) -> int:
        return 1 << s

    def members(self, x: int) -> list[int]:
        return [i for i in range(self.n) if x >> i & 1]


def powerset_semiring(m: FiniteMonoid) -> PowersetSemiring:
    return PowersetSemiring(m)


class ProductSemiring(_OmegaMixin):
    """Componentwise product; elements are tuples."""

    def __init__(self, parts: Sequence):
        if not parts:
            raise ValueError("a product needs at least one factor")
        self.parts = tuple(parts)
        self.zero = tuple(p.zero for p in self.parts)
        self.one = tuple(p.one for p in self.parts)

    @property
    def size(self) -> int:
        out = 1
        for p in self.parts:
            out *= p.size
        return out

    def add(self, x, y):
        return tuple(p.add(a, b) for p, a, b in zip(self.parts, x, y))

    def mul(self, x, y):
        return tuple(p.mul(a, b) for p, a, b in zip(self.parts, x, y))

    def leq(self, x, y) -> bool:
        return all(p.leq(a, b) for p, a, b in zip(self.parts, x, y))


def product_semiring(rs: Sequence) -> ProductSemiring:
    return ProductSemiring(rs)


class TableSemiring(_OmegaMixin):
    """A semiring on ``0..size-1`` given by addition and multiplication tables."""

    def __init__(self, add_table, mul_table, zero: int, one: int):
        self.add_table = np.asarray(add_table, dtype=np.int64)
        self.mul_table = np.asarray(mul_table, dtype=np.int64)
        self.zero, self.one = zero, one

    @property
    def size(self) -> int:
        return self.add_table.shape[0]

    def add(self, x: int, y: int) -> int:
        return int(self.add_table[x, y])

    def mul(self, x: int, y: int) -> int:
        return int(self.mul_table[x, y])

    def leq(self, x: int, y: int) -> bool:
        return self.add(x, y) == y

    def check_axioms(self) -> bool:
        """Idempotent commutative addition, associative multiplication, units, distributivity, zero law."""
        a, m, n = self.add_table, self.mul_table, self.size
        r = np.arange(n)
        ok = (a == a.T).all() and (a[r, r] == r).all() and (a[self.zero] == r).all()
        ok &= (m[self.one] == r).all() and (m[:, self.one] == r).all()
        ok &= (m[self.zero] == self.zero).all() and (m[:, self.zero] == self.zero).all()
        for x in range(n):
            ok &= (a[a[x, :], :] == a[x, a]).all()
            ok &= (m[m[x, :], :] == m[x, m]).all()
            ok &= (m[x, a] == a[m[x, :][:, None], m[x, :][None, :]]).all()
            ok &= (m[a, x] == a[m[:, x][:, None], m[:, x][None, :]]).all()
        return bool(ok)


def boolean_semiring() -> TableSemiring:
    return TableSemiring([[0, 1], [1, 1]], [[0, 0], [0, 1]], 0, 1)


# ---------------------------------------------------------------------------
# rating maps


@dataclass(frozen=True, eq=False)
class RatingMap:
    """A multiplicative rating map given by the ratings of single letters."""

    semiring: object
    alphabet: tuple[str, ...]
    letters: tuple

    def word(self, w: str):
        out = self.semiring.one
        for a in w:
            out = self.semiring.mul(out, self.letters[self.alphabet.index(a)])
        return out

    def language(self, d: Dfa):
        """Sum of the ratings of the words of ``L(d)``, by a reachability closure."""
        if d.alphabet != self.alphabet:
            raise AlphabetMismatch("rating map and language use different alphabets")
        sr = self.semiring
        start = (d.initial, sr.one)
        seen = {start}
        stack = [start]
        while stack:
            q, r = stack.pop()
            for i, g in enumerate(self.letters):
                nxt = (d.delta[q][i], sr.mul(r, g))
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return sr.sum(r for q, r in seen if q in d.accepting)


def canonical_rating_map(alpha: Morphism) -> RatingMap:
    """``K -> alpha(K)`` into the powerset semiring of the codomain."""
    sr = powerset_semiring(alpha.monoid)
    return RatingMap(sr, alpha.alphabet, tuple(sr.singleton(g) for g in alpha.letters))


def product_rating_map(maps: Sequence[RatingMap]) -> RatingMap:
    alphabet = maps[0].alphabet
    if any(m.alphabet != alphabet for m in maps):
        raise AlphabetMismatch("rating maps use different alphabets")
    sr = ProductSemiring([m.semiring for m in maps])
    return RatingMap(sr, alphabet, tuple(zip(*(m.letters for m in maps))))


def trivial_elements(eta: Morphism, rho: RatingMap, guard: int | None = None) -> set:
    """All pairs ``(eta(w), rho(w))``."""
    if eta.alphabet != rho.alphabet:
        raise AlphabetMismatch("morphism and rating map use different alphabets")
    guard = size_guard() if guard is None else guard
    sr, table = rho.semiring, eta.monoid.table
    start = (eta.monoid.unit, sr.one)
    seen = {start}
    stack = [start]
    steps = list(zip(eta.letters, rho.letters))
    while stack:
        x, r = stack.pop()
        for g, h in steps:
            nxt = (int(table[x, g]), sr.mul(r, h))
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > guard:
                    raise SizeGuard(f"more than {guard} trivial elements")
                stack.append(nxt)
    return seen


def rho_of_preimage(rho: RatingMap, eta: Morphism, s: int | None = None, trivial: set | None = None):
    """``rho(eta^-1(s))``; with ``s=None`` a list indexed by every element of ``N``."""
    eta.require_surjective()
    if trivial is None:
        trivial = trivial_elements(eta, rho)
    sr = rho.semiring
    out = [sr.zero] * eta.monoid.size
    for x, r in trivial:
        out[x] = sr.add(out[x], r)
    return out if s is None else out[s]


# ---------------------------------------------------------------------------
# saturation


@dataclass(eq=False)
class SaturatedSet:
    """Downward closed ``S`` in ``N x R`` stored as antichains of maximal ratings."""

    eta: Morphism
    rho: RatingMap
    maxima: dict[int, list] = field(default_factory=dict)
    complete: bool = False

    def __contains__(self, pair) -> bool:
        s, r = pair
        leq = self.rho.semiring.leq
        return any(leq(r, g) for g in self.maxima.get(s, ()))

    def at(self, s: int) -> list:
        """Maximal elements of ``S(s)``."""
        return list(self.maxima.get(s, ()))

    def add(self, s: int, r) -> bool:
        """Insert ``(s, r)``; false when it was already covered."""
        leq = self.rho.semiring.leq
        current = self.maxima.setdefault(s, [])
        if any(leq(r, g) for g in current):
            return False
        current[:] = [g for g in current if not leq(g, r)]
        current.append(r)
        return True

    def pairs(self) -> list[tuple[int, object]]:
        return [(s, g) for s in sorted(self.maxima) for g in self.maxima[s]]

    def __len__(self) -> int:
        return sum(len(v) for v in self.maxima.values())

    def opt_maxima(self) -> list:
        """Maximal elements of the union of all ``S(t)``."""
        leq = self.rho.semiring.leq
        out: list = []
        for g in {g for gs in self.maxima.values() for g in gs}:
            if any(leq(g, h) for h in out):
                continue
            out = [h for h in out if not leq(h, g)]
            out.append(g)
        return out


class _Context:
    def __init__(self, eta: Morphism, rho: RatingMap, guard: int):
        self.eta, self.rho, self.guard = eta, rho, guard
        self.sr = rho.semiring
        self.n = eta.monoid
        self.trivial = trivial_elements(eta, rho, guard)
        self.preimage = rho_of_preimage(rho, eta, trivial=self.trivial)
        g = green(self.n)
        self.r_le, self.l_le = g.r_le, g.l_le
        self.idem = self.n.idempotent_mask


def _upol_candidates(ctx: _Context, left, right):
    """Outputs of the unambiguous closure rule for idempotent pairs from ``left`` x ``right``."""
    tab = ctx.n.table
    sr = ctx.sr
    for e1, f1 in left:
        for e2, f2 in right:
            # e1 <=_R s e2 and e2 <=_L e1 s
            se2 = tab[:, e2]
            e1s = tab[e1, :]
            ok = ctx.r_le[e1, se2] & ctx.l_le[e2, e1s]
            for s in np.nonzero(ok)[0]:
                yield int(tab[e1s[s], e2]), sr.mul(sr.mul(f1, ctx.preimage[s]), f2)


def saturate_upol(eta: Morphism, rho: RatingMap, guard: int | None = None) -> SaturatedSet:
    """Least set closed under the four saturation rules."""
    eta.require_surjective()
    guard = size_guard() if guard is None else guard
    ctx = _Context(eta, rho, guard)
    sat = SaturatedSet(eta, rho)
    tab = ctx.n.table
    sr = ctx.sr
    pending = [pair for pair in ctx.trivial]
    idem_pairs: list = []
    seen_idem: set = set()
    generated = 0
    while True:
        # products, worklist style
        while pending:
            s, r = pending.pop()
            if not sat.add(s, r):
                continue
            generated += 1
            if generated > guard:
                raise SizeGuard(f"saturation generated more than {guard} pairs; raise HIERARCH_SIZE_GUARD to continue")
            for t, g in sat.pairs():
                pending.append((int(tab[s, t]), sr.mul(r, g)))
                pending.append((int(tab[t, s]), sr.mul(g, r)))
        # idempotent pairs (e, g^w) from the current maxima
        fresh = []
        for s, g in sat.pairs():
            if ctx.idem[s]:
                pair = (s, sr.omega(g))
                if pair not in seen_idem:
                    seen_idem.add(pair)
                    fresh.append(pair)
        if not fresh:
            break
        old = idem_pairs
        idem_pairs = old + fresh
        for cand in _upol_candidates(ctx, fresh, idem_pairs):
            if cand not in sat:
                pending.append(cand)
        for cand in _upol_candidates(ctx, old, fresh):
            if cand not in sat:
                pending.append(cand)
        if not pending:
            break
    sat.complete = True
    return sat


def check_saturated(sat: SaturatedSet) -> list[str]:
    """Violations of the four rules (empty when ``sat`` is saturated).

    The unambiguous closure rule is checked on ``(e, g^w)`` for maximal ``g``,
    which dominates every other instance.
    """
    ctx = _Context(sat.eta, sat.rho, size_guard())
    sr, tab, leq = ctx.sr, ctx.n.table, ctx.sr.leq
    problems = []
    for s, r in ctx.trivial:
        if (s, r) not in sat:
            problems.append(f"trivial element missing at {s}")
    for s, gs in sat.maxima.items():
        for i, g in enumerate(gs):
            if any(i != j and leq(g, h) for j, h in enumerate(gs)):
                problems.append(f"maxima at {s} are not an antichain")
    pairs = sat.pairs()
    for s, r in pairs:
        for t, g in pairs:
            if (int(tab[s, t]), sr.mul(r, g)) not in sat:
                problems.append(f"product of ({s}, ...) and ({t}, ...) missing")
    idem = [(s, sr.omega(g)) for s, g in pairs if ctx.idem[s]]
    for cand in _upol_candidates(ctx, idem, idem):
        if cand not in sat:
            problems.append(f"unambiguous closure output missing at {cand[0]}")
    return problems


# ---------------------------------------------------------------------------
# covering and separation


@dataclass(frozen=True)
class CoverResult:
    coverable: bool
    opt_size: int
    witness: tuple | None = None
    # kept so callers can audit the fixpoint with check_saturated
    saturated: SaturatedSet | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        out = {"coverable": self.coverable, "opt_size": self.opt_size}
        if self.witness is not None:
            out["witness_f_element"] = [list(x) for x in self.witness]
        return out


def _require_finite(oracle: PrevarietyOracle) -> None:
    if not oracle.is_finite:
        raise UnsupportedClass(f"covering needs a finite base class, not {oracle.label}")


def cover(l0: Dfa, ls: Sequence[Dfa], oracle: PrevarietyOracle, guard: int | None = None) -> CoverResult:
    """Decide whether ``l0`` has a cover by the closure of ``oracle`` whose blocks each miss some language of ``ls``."""
    _require_finite(oracle)
    langs = [l0, *ls]
    alphabet = l0.alphabet
    if any(d.alphabet != alphabet for d in langs):
        raise AlphabetMismatch("all languages must share one alphabet")
    eta = oracle.canonical_morphism(alphabet)
    syns = [syntactic_morphism(d) for d in langs]
    rho = product_rating_map([canonical_rating_map(s.morphism) for s in syns])
    accept = [sum(1 << f for f in s.accept) for s in syns]
    sat = saturate_upol(eta, rho, guard)
    opt = sat.opt_maxima()
    # F is upward closed, so it meets the downset of Opt iff it meets a maximum
    for g in opt:
        if all(x & f for x, f in zip(g, accept)):
            parts = rho.semiring.parts
            witness = tuple(tuple(p.members(x)) for p, x in zip(parts, g))
            return CoverResult(False, len(opt), witness, sat)
    return CoverResult(True, len(opt), saturated=sat)


def decide_cover(l0: Dfa, ls: Sequence[Dfa], oracle: PrevarietyOracle, guard: int | None = None) -> bool:
    return cover(l0, ls, oracle, guard).coverable


def decide_separation(l1: Dfa, l2: Dfa, oracle: PrevarietyOracle, guard: int | None = None) -> bool:
    """Whether some language of the closure contains ``l1`` and misses ``l2``."""
    return decide_cover(l1, [l2], oracle, guard)


def synthesize_cover(*args, **kwargs):
    """Cover synthesis is not implemented; only the decision procedure is available."""
    raise Unsupported("cover synthesis is not available")


__all__ = [
    "PowersetSemiring", "ProductSemiring", "TableSemiring", "RatingMap", "SaturatedSet", "CoverResult",
    "powerset_semiring", "product_semiring", "boolean_semiring", "canonical_rating_map",
    "product_rating_map", "trivial_elements", "rho_of_preimage", "saturate_upol", "check_saturated",
    "cover", "decide_cover", "decide_separation", "synthesize_cover", "size_guard",
]
