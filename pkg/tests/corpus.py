"""Fixture languages and seeded random corpora shared by the tests."""
import random

from hierarch.fixtures import FIXTURES, fixture
from hierarch.lang import Dfa, minimize
from hierarch.monoid import syntactic_morphism

__all__ = ["FIXTURES", "fixture", "fixture_syn", "random_dfa", "random_corpus", "random_tl"]


def fixture_syn(name):
    return syntactic_morphism(fixture(name))


def random_dfa(rng, states, alphabet="ab"):
    delta = tuple(tuple(rng.randrange(states) for _ in alphabet) for _ in range(states))
    accepting = frozenset(q for q in range(states) if rng.random() < 0.5)
    return minimize(Dfa(tuple(alphabet), states, 0, accepting, delta))


def random_corpus(seed, count, max_states=5, alphabet="ab", max_monoid=None):
    """Nontrivial minimal DFAs, optionally with a cap on the syntactic monoid size.

    Returns ``(dfa, syntactic data)`` pairs.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        d = random_dfa(rng, rng.randint(2, max_states), alphabet)
        if d.states < 2:
            continue
        syn = syntactic_morphism(d)
        if max_monoid is None or syn.monoid.size <= max_monoid:
            out.append((d, syn))
    return out


TL_ENV_LANGS = {"All": "(a|b)*", "Bst": "b*", "Apl": "aa*"}


def random_tl(rng, depth, refs, alphabet="ab", next_ops=False):
    """A random temporal formula of nesting depth at most ``depth``.

    ``refs`` lists the language references allowed under ``F``/``P``;
    ``next_ops`` also allows ``X`` and ``Y``.
    """
    from hierarch import logic as L

    atoms = [L.Top(), L.Bottom(), L.Min(), L.Max()] + [L.Letter(a) for a in alphabet]
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(atoms)
    ops = ["not", "and", "or", "F", "P"] + (["X", "Y"] if next_ops else [])
    op = rng.choice(ops)
    sub = lambda: random_tl(rng, depth - 1, refs, alphabet, next_ops)
    if op == "not":
        return L.Not(sub())
    if op == "and":
        return L.And(sub(), sub())
    if op == "or":
        return L.Or(sub(), sub())
    if op == "X":
        return L.Next(sub())
    if op == "Y":
        return L.Yesterday(sub())
    r = L.ref(rng.choice(refs))
    return (L.Finally if op == "F" else L.Previously)(r, sub())
