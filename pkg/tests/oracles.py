"""Brute-force reference implementations used to check the closed forms.

These search words or residues directly and share no code with the
package beyond evaluating morphisms on letters.
"""
from itertools import product

import numpy as np

MODULI = tuple(range(1, 13)) + (24,)


def lengths_by_element(alpha, max_len=24):
    """For each element, the set of word lengths up to ``max_len`` reaching it."""
    m = alpha.monoid
    out = {s: set() for s in range(m.size)}
    layer = {m.unit}
    for n in range(max_len + 1):
        for s in layer:
            out[s].add(n)
        layer = {int(m.table[s, g]) for s in layer for g in alpha.letters}
    return out


def mod_pairs(alpha, max_len=24, moduli=range(1, 13)):
    lens = lengths_by_element(alpha, max_len)
    n = alpha.monoid.size
    out = np.zeros((n, n), dtype=bool)
    for s, t in product(range(n), repeat=2):
        out[s, t] = all(
            any((x - y) % q == 0 for x in lens[s] for y in lens[t]) for q in moduli
        )
    return out


def mod_kernel(alpha, max_len=24, moduli=range(1, 13)):
    lens = lengths_by_element(alpha, max_len)
    return frozenset(s for s, ls in lens.items() if all(any(x % q == 0 for x in ls) for q in moduli))


def count_residues(alpha, q):
    """Reachable ``(element, letter counts mod q)`` pairs."""
    m = alpha.monoid
    k = len(alpha.letters)
    start = (m.unit, (0,) * k)
    seen = {start}
    stack = [start]
    while stack:
        s, v = stack.pop()
        for i, g in enumerate(alpha.letters):
            nv = tuple((x + (j == i)) % q for j, x in enumerate(v))
            nxt = (int(m.table[s, g]), nv)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def amt_kernel(alpha, moduli=MODULI):
    k = len(alpha.letters)
    out = set(range(alpha.monoid.size))
    for q in moduli:
        reach = count_residues(alpha, q)
        out &= {s for s, v in reach if v == (0,) * k}
    return frozenset(out)


def amt_pairs(alpha, moduli=MODULI):
    n = alpha.monoid.size
    out = np.ones((n, n), dtype=bool)
    for q in moduli:
        by_vec = {}
        for s, v in count_residues(alpha, q):
            by_vec.setdefault(v, set()).add(s)
        cur = np.zeros((n, n), dtype=bool)
        for ss in by_vec.values():
            idx = list(ss)
            cur[np.ix_(idx, idx)] = True
        out &= cur
    return out


def words(alphabet, max_len):
    for n in range(max_len + 1):
        for w in product(alphabet, repeat=n):
            yield "".join(w)


def finite_pairs(eta, alpha, max_len=8):
    """Pairs of a finite class by enumerating words (enough for tiny monoids)."""
    seen = set()
    for w in words(alpha.alphabet, max_len):
        seen.add((eta(w), alpha(w)))
    n = alpha.monoid.size
    out = np.zeros((n, n), dtype=bool)
    for x, s in seen:
        for y, t in seen:
            if x == y:
                out[s, t] = True
    return out


def parikh_vectors(dfa, max_len):
    """Parikh vectors of accepted words up to ``max_len``."""
    out = set()
    for w in words(dfa.alphabet, max_len):
        if dfa.accepts(w):
            out.add(tuple(w.count(a) for a in dfa.alphabet))
    return out


def game_equiv(k, eta, w1, i1, w2, i2):
    """Rank-k equivalence by direct recursion on the back-and-forth conditions."""
    from functools import lru_cache

    from hierarch.logic import position_label

    n1, n2 = len(w1) + 2, len(w2) + 2

    def img(w, i, j):
        return eta.image(w[i:j - 1])

    @lru_cache(maxsize=None)
    def eq(i, j, r):
        if position_label(w1, i) != position_label(w2, j):
            return False
        if r == 0:
            return True
        for a in range(i + 1, n1):
            if not any(img(w1, i, a) == img(w2, j, b) and eq(a, b, r - 1) for b in range(j + 1, n2)):
                return False
        for b in range(j + 1, n2):
            if not any(img(w1, i, a) == img(w2, j, b) and eq(a, b, r - 1) for a in range(i + 1, n1)):
                return False
        for a in range(i):
            if not any(img(w1, a, i) == img(w2, b, j) and eq(a, b, r - 1) for b in range(j)):
                return False
        for b in range(j):
            if not any(img(w1, a, i) == img(w2, b, j) and eq(a, b, r - 1) for a in range(i)):
                return False
        return True

    return eq(i1, i2, k)


def rank1_signature(eta, word, i):
    """Truth values at ``(word, i)`` of every rank-1 formula ``F_K l`` / ``P_K l``
    with ``K`` a preimage class of ``eta`` and ``l`` a position label.

    Every rank-1 formula is a Boolean combination of these and the label itself.
    """
    from hierarch.logic import Finally, Letter, Max, Min, Previously, PointedWord, env_from_morphism, eval_tl, ref

    env = env_from_morphism(eta)
    labels = [Min(), Max()] + [Letter(a) for a in eta.alphabet]
    sig = [PointedWord(word, i).label(i)]
    for s in range(eta.monoid.size):
        for lab in labels:
            for op in (Finally, Previously):
                sig.append(eval_tl(op(ref(f"S{s}"), lab), PointedWord(word, i), env))
    return tuple(sig)


def all_ratings(semiring):
    """Every element of a powerset semiring or a product of them."""
    parts = getattr(semiring, "parts", None)
    if parts is None:
        return list(range(semiring.size))
    return list(product(*(range(p.size) for p in parts)))


def naive_saturation(eta, rho):
    """Least set closed under the four saturation rules, stored explicitly.

    The downset rule is applied literally by enumerating the whole semiring,
    so this only suits tiny instances.
    """
    sr = rho.semiring
    tab = eta.monoid.table
    n = eta.monoid.size
    everything = all_ratings(sr)

    trivial = {(eta.monoid.unit, sr.one)}
    frontier = list(trivial)
    while frontier:
        x, r = frontier.pop()
        for g, h in zip(eta.letters, rho.letters):
            nxt = (int(tab[x, g]), sr.mul(r, h))
            if nxt not in trivial:
                trivial.add(nxt)
                frontier.append(nxt)
    pre = [sr.zero] * n
    for x, r in trivial:
        pre[x] = sr.add(pre[x], r)
    right = [{int(tab[s, t]) for t in range(n)} for s in range(n)]  # sN
    left = [{int(tab[t, s]) for t in range(n)} for s in range(n)]   # Ns

    S = set(trivial)
    while True:
        new = {(s, q) for s, r in S for q in everything if sr.leq(q, r)}
        new |= {(int(tab[s, t]), sr.mul(r, q)) for s, r in S for t, q in S}
        idem = [(e, f) for e, f in S if tab[e, e] == e and sr.mul(f, f) == f]
        for e1, f1 in idem:
            for e2, f2 in idem:
                for s in range(n):
                    if e1 in right[int(tab[s, e2])] and e2 in left[int(tab[e1, s])]:
                        new.add((int(tab[tab[e1, s], e2]), sr.mul(sr.mul(f1, pre[s]), f2)))
        if new <= S:
            return S
        S |= new


def nerode_classes(dfa, max_word=4, max_ctx=4):
    """Syntactic classes of all words up to ``max_word`` by their sets of contexts.

    Returns ``{word: frozenset of (x, y) with x word y accepted}`` for every
    word, with ``x`` and ``y`` ranging over words of length at most ``max_ctx``.
    """
    ctx = list(product(words(dfa.alphabet, max_ctx), repeat=2))
    return {w: frozenset((x, y) for x, y in ctx if dfa.accepts(x + w + y)) for w in words(dfa.alphabet, max_word)}
