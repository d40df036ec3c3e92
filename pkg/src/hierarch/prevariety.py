"""Base classes of languages and the data the deciders need from them.

For a surjective morphism ``alpha`` into ``M`` and a base class C this
module computes

* the C-pairs: ``(s, t)`` such that ``alpha^-1(s)`` and ``alpha^-1(t)`` cannot
  be separated by a language of C,
* the C-kernel: elements ``s`` with ``alpha^-1(s)`` inseparable from ``{eps}``,
* the strict kernel (kernel elements reached by nonempty words),
* the canonical preorder (reflexive transitive closure of the pairs).

Pair relations and preorders are ``M.size x M.size`` boolean numpy arrays.
Kernels are frozensets of element indices.

Supported classes: ST (trivial), AT (alphabet testable), MOD (length
modulo), AMT (letter counts modulo), and any finite class given by a
surjective morphism.  Finite classes also have a well-suited variant that
can tell the empty word apart.
"""
from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlphabetMismatch, UnsupportedClass
from .lang import Dfa, make_alphabet
from .monoid import FiniteMonoid, Morphism, morphism_from_action, monoid_from_json


# ---------------------------------------------------------------------------
# finite classes


def trivial_morphism(alphabet: Sequence[str]) -> Morphism:
    """Morphism onto the one-element monoid; recognizes ``{}`` and ``A*``."""
    alphabet = make_alphabet(alphabet)
    return Morphism(alphabet, FiniteMonoid(np.zeros((1, 1), dtype=np.int64), 0),
                    (0,) * len(alphabet))


def canonical_morphism_AT(alphabet: Sequence[str]) -> Morphism:
    """Send each word to its set of letters, in the monoid ``(2^A, union)``."""
    alphabet = make_alphabet(alphabet)
    return morphism_from_action(alphabet, lambda x, i: x | (1 << i), 0)


def wellsuited(eta: Morphism) -> Morphism:
    """Lift ``eta`` so that it also records whether the word is empty.

    The codomain is the image of ``w -> (eta(w), w nonempty)`` inside
    ``N x U1``.  The recognized class adds ``L & A+`` and ``L | {eps}`` to the
    languages recognized by ``eta``.
    """
    m = eta.monoid
    letters = eta.letters

    def step(x, i):
        return (int(m.table[x[0], letters[i]]), True)

    return morphism_from_action(eta.alphabet, step, (m.unit, False))


def reachable_pairs(eta: Morphism, alpha: Morphism) -> np.ndarray:
    """Boolean array ``P[x, s]``: some word ``w`` has ``eta(w) = x`` and ``alpha(w) = s``."""
    if eta.alphabet != alpha.alphabet:
        raise AlphabetMismatch(f"alphabets differ: {eta.alphabet} vs {alpha.alphabet}")
    n, m = eta.monoid, alpha.monoid
    seen = np.zeros((n.size, m.size), dtype=bool)
    start = (n.unit, m.unit)
    seen[start] = True
    queue = deque([start])
    steps = list(zip(eta.letters, alpha.letters))
    while queue:
        x, s = queue.popleft()
        for g, h in steps:
            y, t = int(n.table[x, g]), int(m.table[s, h])
            if not seen[y, t]:
                seen[y, t] = True
                queue.append((y, t))
    return seen


def pairs_finite(eta: Morphism, alpha: Morphism) -> np.ndarray:
    """Pairs for the finite class of languages recognized by ``eta``."""
    alpha.require_surjective()
    p = reachable_pairs(eta, alpha).astype(np.float32)
    return (p.T @ p) > 0


def kernel_finite(eta: Morphism, alpha: Morphism) -> frozenset[int]:
    alpha.require_surjective()
    p = reachable_pairs(eta, alpha)
    return frozenset(int(s) for s in np.nonzero(p[eta.monoid.unit])[0])


def pairs_ST(alpha: Morphism) -> np.ndarray:
    alpha.require_surjective()
    n = alpha.monoid.size
    return np.ones((n, n), dtype=bool)


def strict_kernel(alpha: Morphism, kernel) -> frozenset[int]:
    """Kernel elements that are images of nonempty words."""
    return frozenset(kernel) & alpha.plus_image


# ---------------------------------------------------------------------------
# MOD: length modulo


@dataclass(frozen=True)
class StabilityData:
    """The sets ``T_n = alpha(A^n)`` for ``n < i0 + p``; ``T_{n+p} = T_n`` once ``n >= i0``."""

    t_seq: tuple[frozenset[int], ...]
    i0: int
    p: int
    unit: int

    def t(self, n: int) -> frozenset[int]:
        if n >= self.i0:
            n = self.i0 + (n - self.i0) % self.p
        return self.t_seq[n]

    @property
    def index(self) -> int:
        """Least ``d >= 1`` with ``T_d = T_2d``."""
        d = self.p
        while d < self.i0:
            d += self.p
        return d

    @property
    def stable_semigroup(self) -> frozenset[int]:
        return self.t(self.index)

    @property
    def stable_monoid(self) -> frozenset[int]:
        return self.stable_semigroup | {self.unit}


def stability(alpha: Morphism) -> StabilityData:
    alpha.require_surjective()
    m = alpha.monoid
    gens = np.array(alpha.letters, dtype=np.int64)
    current = frozenset([m.unit])
    seen: dict[frozenset[int], int] = {}
    seq = []
    while current not in seen:
        seen[current] = len(seq)
        seq.append(current)
        idx = np.fromiter(current, dtype=np.int64)
        current = frozenset(int(x) for x in np.unique(m.table[np.ix_(idx, gens)]))
    i0 = seen[current]
    return StabilityData(tuple(seq), i0, len(seq) - i0, m.unit)


def pairs_MOD(alpha: Morphism) -> np.ndarray:
    """Pairs for length-modulo languages.

    ``(s, t)`` is a pair when there are lengths ``m, n`` (folded into the first
    ``i0 + p`` values) with ``s`` in ``T_m``, ``t`` in ``T_n`` and either
    ``m = n`` or ``m = n mod p`` with one of them in the periodic part.
    """
    st = stability(alpha)
    size = alpha.monoid.size
    out = np.zeros((size, size), dtype=bool)
    masks = []
    for ts in st.t_seq:
        v = np.zeros(size, dtype=bool)
        v[list(ts)] = True
        masks.append(v)
    for m_, vm in enumerate(masks):
        for n_, vn in enumerate(masks):
            ok = m_ == n_ or ((m_ - n_) % st.p == 0 and max(m_, n_) >= st.i0)
            if ok:
                out |= np.outer(vm, vn)
    return out


def kernel_MOD(alpha: Morphism) -> frozenset[int]:
    """The stable monoid of ``alpha``."""
    return stability(alpha).stable_monoid


# ---------------------------------------------------------------------------
# integer lattices and Parikh images


class Lattice:
    """A subgroup of ``Z^dim`` given by generators, with canonical coset representatives."""

    def __init__(self, generators: Sequence[Sequence[int]], dim: int):
        self.dim = dim
        gens = [tuple(int(x) for x in g) for g in generators if any(g)]
        self.basis: list[tuple[int, list[int]]] = []
        if not gens:
            return
        from sympy import Matrix
        from sympy.matrices.normalforms import hermite_normal_form

        h = hermite_normal_form(Matrix(gens).T)
        cols = []
        for j in range(h.shape[1]):
            col = [int(h[i, j]) for i in range(dim)]
            nz = [i for i, x in enumerate(col) if x]
            if not nz:
                continue
            piv = nz[-1]
            if col[piv] < 0:
                col = [-x for x in col]
            cols.append((piv, col))
        cols.sort(key=lambda pc: -pc[0])
        pivots = [p for p, _ in cols]
        if len(set(pivots)) != len(pivots):
            raise AssertionError("normal form has repeated pivots")
        self.basis = cols

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of ``v`` modulo the lattice."""
        r = [int(x) for x in v]
        for piv, col in self.basis:
            q = r[piv] // col[piv]
            if q:
                for i in range(piv + 1):
                    r[i] -= q * col[i]
        return tuple(r)

    @property
    def key(self) -> tuple:
        return tuple(tuple(col) for _, col in self.basis)

    def __contains__(self, v) -> bool:
        return not any(self.reduce(v))

    @property
    def generators(self) -> list[tuple[int, ...]]:
        return [tuple(col) for _, col in self.basis]

    def join(self, other: "Lattice") -> "Lattice":
        return Lattice(self.generators + other.generators, self.dim)


def lattice_contains(v: Sequence[int], periods: Sequence[Sequence[int]]) -> bool:
    """True when ``v`` is an integer combination of ``periods``."""
    return v in Lattice(periods, len(v))


@dataclass(frozen=True)
class SemilinearSet:
    """Finite union of linear sets ``base + N*periods``; vectors are indexed by letter."""

    alphabet: tuple[str, ...]
    components: tuple[tuple[tuple[int, ...], tuple[tuple[int, ...], ...]], ...]

    def contains(self, v: Sequence[int]) -> bool:
        v = tuple(v)
        return any(_linear_contains(v, b, ps) for b, ps in self.components)


def _linear_contains(v, base, periods) -> bool:
    # small search for a nonnegative combination; callers use this on tiny inputs
    rest = tuple(x - y for x, y in zip(v, base))
    if any(x < 0 for x in rest):
        return False
    periods = [p for p in periods if any(p)]

    def go(rem, i):
        if not any(rem):
            return True
        if i == len(periods):
            return False
        p = periods[i]
        while all(x >= 0 for x in rem):
            if go(rem, i + 1):
                return True
            rem = tuple(x - y for x, y in zip(rem, p))
        return False

    return go(rest, 0)


def _unit_vector(k: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(k))


def _add(u, v):
    return tuple(x + y for x, y in zip(u, v))


def _simple_cycles(delta: Sequence[Sequence[int]], k: int) -> list[tuple[frozenset[int], tuple[int, ...]]]:
    """All (state set, Parikh vector) of simple cycles of a letter-labelled graph."""
    n = len(delta)
    out = set()
    for root in range(n):
        stack = [(root, frozenset([root]), (0,) * k)]
        while stack:
            q, seen, vec = stack.pop()
            for a in range(k):
                r = delta[q][a]
                v = _add(vec, _unit_vector(k, a))
                if r == root:
                    out.add((seen, v))
                elif r > root and r not in seen:
                    stack.append((r, seen | {r}, v))
    return sorted(out, key=lambda c: (sorted(c[0]), c[1]))


def parikh(d: Dfa) -> SemilinearSet:
    """Parikh image of ``L(d)`` as a semilinear set.

    Every accepting run splits into a short run visiting the same set of
    states plus simple cycles inside that set, and any simple cycle inside
    the set can be inserted back.  Short runs have length at most
    ``(|T| + 1) * |Q|`` for visited set ``T``.
    """
    k = len(d.alphabet)
    n = d.states
    cycles = _simple_cycles(d.delta, k)
    bound = (n + 1) * n
    frontier = {(d.initial, frozenset([d.initial]), (0,) * k)}
    seen = set(frontier)
    for _ in range(bound):
        nxt = set()
        for q, vis, vec in frontier:
            for a in range(k):
                r = d.delta[q][a]
                st = (r, vis | {r}, _add(vec, _unit_vector(k, a)))
                if st not in seen:
                    seen.add(st)
                    nxt.add(st)
        frontier = nxt
    comps = set()
    for q, vis, vec in seen:
        if q in d.accepting and sum(vec) <= (len(vis) + 1) * n:
            periods = tuple(sorted({v for s, v in cycles if s <= vis}))
            comps.add((vec, periods))
    return SemilinearSet(d.alphabet, _prune(comps))


def _prune(comps) -> tuple:
    """Drop linear sets contained in another one with at least the same periods."""
    ordered = sorted(comps, key=lambda c: (-len(c[1]), sum(c[0]), c))
    kept: list = []
    for base, periods in ordered:
        ps = set(periods)
        if not any(ps <= set(p2) and _linear_contains(base, b2, p2) for b2, p2 in kept):
            kept.append((base, periods))
    return tuple(sorted(kept))


# ---------------------------------------------------------------------------
# AMT: letter counts modulo


class _CayleyClasses:
    """Reachable classes ``(s, L, v mod L)`` of runs of the right Cayley graph.

    A run from the unit to ``s`` with Parikh vector ``v`` passes through some
    strongly connected components; ``L`` is the sum of their cycle lattices.
    Padding the run with a closed walk that covers each component it meets
    only shifts ``v`` by an element of ``L`` and then allows any cycle of
    those components to be pumped.  So the closure of the Parikh vectors of
    ``alpha^-1(s)`` modulo every integer is the union of the cosets ``v + L``
    over the reachable classes.  ``L`` only grows along a run, so the class
    of a run determines the classes of its extensions.
    """

    def __init__(self, alpha: Morphism):
        alpha.require_surjective()
        self.alpha = alpha
        self.k = len(alpha.alphabet)
        self.right = alpha.right_cayley
        size = alpha.monoid.size
        comps = _scc(range(size), lambda x: [int(y) for y in self.right[x]])
        self.comp_of = np.empty(size, dtype=np.int64)
        for i, members in enumerate(comps):
            self.comp_of[list(members)] = i
        self.comp_gens = [self._cycle_space(members) for members in comps]
        self.lattices: dict[tuple, Lattice] = {}
        self._grow: dict[tuple[tuple, int], Lattice] = {}
        self._joins: dict[tuple, Lattice] = {}
        self.classes = self._explore()

    def _register(self, lat: Lattice) -> Lattice:
        return self.lattices.setdefault(lat.key, lat)

    def grow(self, lat: Lattice, comp: int) -> Lattice:
        """``lat`` plus the cycle lattice of component ``comp``."""
        key = (lat.key, comp)
        out = self._grow.get(key)
        if out is None:
            gens = self.comp_gens[comp]
            out = lat if not gens else self._register(Lattice(lat.generators + gens, self.k))
            self._grow[key] = out
        return out

    def join(self, k1: tuple, k2: tuple) -> Lattice:
        key = (k1, k2) if k1 <= k2 else (k2, k1)
        lat = self._joins.get(key)
        if lat is None:
            lat = self._joins[key] = self.lattices[k1].join(self.lattices[k2])
        return lat

    def _cycle_space(self, members: frozenset[int]) -> list[tuple[int, ...]]:
        # Spanning tree potentials; every closed walk inside the component
        # telescopes into the edge defects below.
        k = self.k
        right = self.right
        root = min(members)
        potential = {root: (0,) * k}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for a in range(k):
                y = int(right[x, a])
                if y in members and y not in potential:
                    potential[y] = _add(potential[x], _unit_vector(k, a))
                    queue.append(y)
        gens = set()
        for x in members:
            for a in range(k):
                y = int(right[x, a])
                if y in members:
                    gen = tuple(p + e - q for p, e, q in
                                zip(potential[x], _unit_vector(k, a), potential[y]))
                    if any(gen):
                        gens.add(gen)
        return sorted(gens)

    def _explore(self) -> dict[int, dict[tuple, set[tuple[int, ...]]]]:
        """For each element, its reachable representatives grouped by lattice key."""
        k = self.k
        unit = self.alpha.monoid.unit
        lat0 = self.grow(self._register(Lattice([], k)), int(self.comp_of[unit]))
        start = (unit, lat0.key, (0,) * k)
        seen = {start}
        queue = deque([(unit, lat0, (0,) * k)])
        while queue:
            x, lat, rep = queue.popleft()
            cx = self.comp_of[x]
            for a in range(k):
                y = int(self.right[x, a])
                cy = self.comp_of[y]
                lat2 = lat if cy == cx else self.grow(lat, int(cy))
                rep2 = lat2.reduce(_add(rep, _unit_vector(k, a)))
                state = (y, lat2.key, rep2)
                if state not in seen:
                    seen.add(state)
                    queue.append((y, lat2, rep2))
        out: dict[int, dict[tuple, set[tuple[int, ...]]]] = {}
        for x, key, rep in seen:
            out.setdefault(x, {}).setdefault(key, set()).add(rep)
        return out


def _scc(nodes, succ) -> list[frozenset[int]]:
    """Strongly connected components (iterative Tarjan)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                members = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    members.add(w)
                    if w == v:
                        break
                out.append(frozenset(members))
    return out


def kernel_AMT(alpha: Morphism) -> frozenset[int]:
    """Elements ``s`` such that for every modulus some word of ``alpha^-1(s)`` has all letter counts 0."""
    cc = _CayleyClasses(alpha)
    zero = (0,) * cc.k
    out = set()
    for s, by_lat in cc.classes.items():
        if any(zero in reps for reps in by_lat.values()):
            out.add(s)
    return frozenset(out)


def pairs_AMT(alpha: Morphism) -> np.ndarray:
    """Pairs for letter-count-modulo languages.

    ``(s, t)`` is a pair when some classes ``v + L`` of ``s`` and ``v' + L'`` of
    ``t`` satisfy ``v - v'`` in ``L + L'``.
    """
    cc = _CayleyClasses(alpha)
    size = alpha.monoid.size
    out = np.zeros((size, size), dtype=bool)
    by_lat: dict[tuple, list[tuple[int, set]]] = {}
    for s, d in cc.classes.items():
        for key, reps in d.items():
            by_lat.setdefault(key, []).append((s, reps))
    keys = sorted(by_lat)
    for i, k1 in enumerate(keys):
        for k2 in keys[i:]:
            lat = cc.join(k1, k2)
            left = _bucket(lat, by_lat[k1])
            right = left if k1 == k2 else _bucket(lat, by_lat[k2])
            for key, ss in left.items():
                ts = right.get(key)
                if ts:
                    rows, cols = list(ss), list(ts)
                    out[np.ix_(rows, cols)] = True
                    out[np.ix_(cols, rows)] = True
    return out


def _bucket(lat: Lattice, entries) -> dict[tuple[int, ...], set[int]]:
    out: dict[tuple[int, ...], set[int]] = {}
    for s, reps in entries:
        for r in reps:
            out.setdefault(lat.reduce(r), set()).add(s)
    return out


# ---------------------------------------------------------------------------
# preorders


def canonical_preorder(pairs: np.ndarray) -> np.ndarray:
    """Reflexive transitive closure of a pair relation."""
    r = np.array(pairs, dtype=bool)
    np.fill_diagonal(r, True)
    for k in range(r.shape[0]):
        r |= np.outer(r[:, k], r[k, :])
    return r


def canonical_equiv(pairs: np.ndarray) -> np.ndarray:
    r = canonical_preorder(pairs)
    return r & r.T


def pairs_to_set(pairs: np.ndarray) -> set[tuple[int, int]]:
    return {(int(s), int(t)) for s, t in zip(*np.nonzero(pairs))}


# ---------------------------------------------------------------------------
# oracles

GROUP_KINDS = ("st", "mod", "amt")
FINITE_KINDS = ("st", "at", "finite")


@dataclass(frozen=True, eq=False)
class PrevarietyOracle:
    """One base class together with how to compute its pairs and kernels.

    ``kind`` is one of ``st``, ``at``, ``mod``, ``amt`` or ``finite`` (the
    class recognized by ``eta``).  ``plus`` selects the well-suited
    extension, available for finite kinds.
    """

    kind: str
    plus: bool = False
    eta: Morphism | None = None
    label: str = field(default="")

    def __post_init__(self):
        if self.kind not in GROUP_KINDS + FINITE_KINDS:
            raise UnsupportedClass(f"unknown base class {self.kind!r}")
        if self.kind == "finite" and self.eta is None:
            raise ValueError("a finite class needs a morphism")
        if self.kind == "finite":
            self.eta.require_surjective()
        if self.plus and self.kind not in FINITE_KINDS:
            raise UnsupportedClass(f"well-suited extension of {self.kind!r} is not supported")
        if not self.label:
            object.__setattr__(self, "label", self.kind + ("+" if self.plus else ""))

    @property
    def is_group(self) -> bool:
        return self.kind in GROUP_KINDS and not self.plus

    @property
    def is_finite(self) -> bool:
        return self.kind in FINITE_KINDS

    @property
    def capabilities(self) -> dict[str, bool]:
        return {"pairs": True, "kernel": True, "strict_kernel": True,
                "canonical_morphism": self.is_finite}

    def canonical_morphism(self, alphabet: Sequence[str]) -> Morphism:
        alphabet = make_alphabet(alphabet)
        if self.kind == "st":
            eta = trivial_morphism(alphabet)
        elif self.kind == "at":
            eta = canonical_morphism_AT(alphabet)
        elif self.kind == "finite":
            if self.eta.alphabet != alphabet:
                raise AlphabetMismatch(f"class is over {self.eta.alphabet}, language over {alphabet}")
            eta = self.eta
        else:
            raise UnsupportedClass(f"{self.label} is not a finite class")
        return wellsuited(eta) if self.plus else eta

    def pairs(self, alpha: Morphism) -> np.ndarray:
        if self.kind == "st" and not self.plus:
            return pairs_ST(alpha)
        if self.kind == "mod":
            return pairs_MOD(alpha)
        if self.kind == "amt":
            return pairs_AMT(alpha)
        return pairs_finite(self.canonical_morphism(alpha.alphabet), alpha)

    def kernel(self, alpha: Morphism) -> frozenset[int]:
        if self.kind == "mod":
            return kernel_MOD(alpha)
        if self.kind == "amt":
            return kernel_AMT(alpha)
        return kernel_finite(self.canonical_morphism(alpha.alphabet), alpha)

    def strict_kernel(self, alpha: Morphism) -> frozenset[int]:
        return strict_kernel(alpha, self.kernel(alpha))

    def preorder(self, alpha: Morphism) -> np.ndarray:
        return canonical_preorder(self.pairs(alpha))


def parse_oracle(spec: str) -> PrevarietyOracle:
    """Parse ``st``, ``st+``, ``at``, ``at+``, ``mod``, ``amt``, ``finite:<json>`` or ``finite+:<json>``.

    The part after ``finite:`` is a path to a monoid JSON file or inline JSON.
    """
    spec = spec.strip()
    head, sep, rest = spec.partition(":")
    plus = head.endswith("+")
    kind = head[:-1] if plus else head
    kind = kind.lower()
    if kind == "gr":
        raise UnsupportedClass("group languages (GR) are not supported")
    if kind == "finite":
        if not sep or not rest:
            raise ValueError("finite class needs a monoid: finite:<monoid.json>")
        if os.path.isfile(rest):
            with open(rest) as fh:
                data = json.load(fh)
        else:
            data = json.loads(rest)
        return PrevarietyOracle("finite", plus, monoid_from_json(data), spec)
    if sep:
        raise UnsupportedClass(f"unexpected argument in class {spec!r}")
    return PrevarietyOracle(kind, plus)


__all__ = [
    "PrevarietyOracle", "StabilityData", "SemilinearSet", "Lattice",
    "parse_oracle", "trivial_morphism", "canonical_morphism_AT", "wellsuited",
    "reachable_pairs", "pairs_finite", "kernel_finite", "pairs_ST", "strict_kernel",
    "stability", "pairs_MOD", "kernel_MOD", "parikh", "lattice_contains",
    "kernel_AMT", "pairs_AMT", "canonical_preorder", "canonical_equiv", "pairs_to_set",
]
