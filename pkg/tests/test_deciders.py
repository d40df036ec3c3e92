import json
from itertools import product

import numpy as np
import pytest

from hierarch.deciders import (
    check_da,
    check_lda,
    check_pol,
    check_upol,
    check_upol_bpol,
    check_upol_via_preorder,
    member,
    parse_class,
)
from hierarch.errors import MissingOrder, NotSubmonoid, NotSubsemigroup, UnsupportedClass
from hierarch.lang import Dfa, minimize, regex_dfa, words
from hierarch.monoid import FiniteMonoid, Morphism, syntactic_morphism
from hierarch.prevariety import parse_oracle

from corpus import FIXTURES, fixture, fixture_syn, random_corpus


def pairs(kind, syn):
    return parse_oracle(kind).pairs(syn.morphism)


def replay(syn, cert):
    """Evaluate the violated equation again from the certificate alone."""
    m = syn.monoid
    el = {k: syn.morphism.image(w) for k, w in cert.words.items()}
    assert el == cert.elements
    t, w = m.table, m.omega
    if cert.equation in ("pol", "upol"):
        s, u = el["s"], el["t"]
        return int(m.omega_plus[s]), int(t[t[w[s], u], w[s]])
    if cert.equation == "upol-bpol":
        x = m.mul(el["e"], el["s"], el["e"], el["t"])
        return int(m.omega_plus[x]), m.mul(w[x], el["e"], el["t"], w[x])
    if cert.equation == "da":
        x = w[m.mul(el["s"], el["t"])]
        return int(x), m.mul(x, el["t"], x)
    e = el["e"]
    x = w[m.mul(e, el["s"], e, e, el["t"], e)]
    return int(x), m.mul(x, e, el["t"], e, x)


def test_pol_examples():
    f1 = fixture_syn("F1")
    assert check_pol(f1, pairs("st", f1))
    f2 = fixture_syn("F2")
    v = check_pol(f2, pairs("st", f2))
    assert not v
    assert v.certificate.words == {"s": "", "t": "a"}
    assert f2.morphism.image("b") == v.certificate.elements["s"]
    trivial = syntactic_morphism(regex_dfa("A*"))
    assert check_pol(trivial, pairs("at", trivial))


def test_pol_needs_an_order():
    m = fixture_syn("F1").monoid
    with pytest.raises(MissingOrder):
        check_pol(m, np.ones((2, 2), dtype=bool))


def test_upol_examples():
    f1 = fixture_syn("F1")
    assert not check_upol(f1, pairs("st", f1))
    f4 = fixture_syn("F4")
    assert check_upol(f4, pairs("mod", f4))
    f6 = fixture_syn("F6")
    v = check_upol(f6, pairs("at", f6))
    assert not v
    one, a = f6.morphism.image(""), f6.morphism.image("a")
    assert v.certificate.elements == {"s": one, "t": a}
    # the pair (a, 1) fails as well: a^(w+1) = a but a^w 1 a^w = 1
    assert not check_upol(f6, [(a, one)])


def test_upol_via_preorder_agrees():
    for kind in ("st", "at", "st+", "at+", "mod", "amt"):
        for name in FIXTURES:
            syn = fixture_syn(name)
            p = pairs(kind, syn)
            pre = parse_oracle(kind).preorder(syn.morphism)
            assert check_upol_via_preorder(syn, pre).member == check_upol(syn, p).member
    assert check_upol_via_preorder(fixture_syn("F3"), np.eye(6, dtype=bool))


def test_upol_via_preorder_on_chained_pairs():
    table = np.array([[0, 1, 2, 3], [1, 3, 3, 3], [2, 3, 3, 3], [3, 3, 3, 3]])
    alpha = Morphism(("a", "b"), FiniteMonoid(table, 0), (1, 2))
    oracle = parse_oracle("at")
    raw = oracle.pairs(alpha)
    pre = oracle.preorder(alpha)
    assert pre[1, 2] and not raw[1, 2]
    assert check_upol_via_preorder(alpha, pre).member == check_upol(alpha, raw).member


def test_upol_bpol_examples():
    f3 = fixture_syn("F3")
    assert not check_upol_bpol(f3, pairs("st", f3))
    f1 = fixture_syn("F1")
    assert check_upol_bpol(f1, pairs("st", f1))
    trivial = syntactic_morphism(regex_dfa("A*"))
    assert check_upol_bpol(trivial, pairs("st", trivial))


def test_da_examples():
    f1 = fixture_syn("F1")
    assert check_da(f1, parse_oracle("st").kernel(f1.morphism))
    f3 = fixture_syn("F3")
    v = check_da(f3, parse_oracle("st").kernel(f3.morphism))
    assert not v
    assert v.certificate.words == {"s": "a", "t": "b"}
    f4 = fixture_syn("F4")
    assert check_da(f4, parse_oracle("mod").kernel(f4.morphism))


def test_lda_examples():
    f3 = fixture_syn("F3")
    assert check_lda(f3, parse_oracle("st").strict_kernel(f3.morphism))
    assert check_lda(f3, [])
    # the strict kernel of (aa)* is the whole group Z/2, which is not aperiodic
    f6 = fixture_syn("F6")
    v = check_lda(f6, parse_oracle("st").strict_kernel(f6.morphism))
    assert not v
    assert v.certificate.words == {"e": "", "s": "", "t": "a"}


def test_subset_preconditions():
    f3 = fixture_syn("F3")
    a, b = f3.morphism.image("a"), f3.morphism.image("b")
    with pytest.raises(NotSubmonoid):
        check_da(f3, [a, b])
    with pytest.raises(NotSubmonoid):
        check_da(f3, [f3.morphism.image("ab")])
    with pytest.raises(NotSubsemigroup):
        check_lda(f3, [a])


def test_member_examples():
    assert member(fixture("F1"), "fo2:st")
    assert not member(fixture("F3"), "fo2:st")
    assert member(fixture("F3"), "fo2s:st")
    assert member(fixture("F4"), "fo2:mod")
    assert member(fixture("F1"), "pol:st")
    assert not member(fixture("F2"), "pol:st")
    assert not member(fixture("F1"), "upol:st")
    assert member(fixture("F4"), "upol:mod")
    assert not member(fixture("F6"), "upol:at")


def test_member_rejects_bad_classes():
    for spec in ("fo2:at", "fo2s:st+", "nope:st", "upol", "upol:gr", "pol:mod+"):
        with pytest.raises(UnsupportedClass):
            parse_class(spec)


def test_certificates_replay():
    checks = [("pol", "st"), ("upol", "st"), ("upol", "at"), ("upol-bpol", "st"), ("fo2", "st"), ("fo2s", "mod")]
    negatives = 0
    for (d, syn), (op, base) in product(random_corpus(4, 30), checks):
        v = member(syn, f"{op}:{base}")
        assert (v.certificate is None) == v.member
        if not v.member:
            negatives += 1
            lhs, rhs = replay(syn, v.certificate)
            assert (lhs, rhs) == (v.certificate.lhs, v.certificate.rhs)
            if op == "pol":
                assert not syn.order[lhs, rhs]
            else:
                assert lhs != rhs
    assert negatives > 20


def test_verdict_json():
    v = member(fixture("F3"), "fo2:st")
    data = json.loads(v.dumps())
    assert data["member"] is False
    assert data["witnesses"] == ["a", "b"]
    assert data["equation"] == "(st)^w = (st)^w t (st)^w"


def mod_language(d, max_len=8):
    """Whether membership up to ``max_len`` depends only on the length modulo some q <= 12."""
    ws = list(words(d.alphabet, max_len))
    for q in range(1, 13):
        by_residue = {}
        if all(by_residue.setdefault(len(w) % q, d.accepts(w)) == d.accepts(w) for w in ws):
            return True
    return False


def test_upol_mod_collapses_to_mod_on_cyclic_groups():
    seen = {True: 0, False: 0}
    for k in range(1, 5):
        for ga, gb in product(range(k), repeat=2):
            for mask in range(1, 1 << k):
                delta = tuple(((q + ga) % k, (q + gb) % k) for q in range(k))
                acc = frozenset(q for q in range(k) if mask >> q & 1)
                d = minimize(Dfa(("a", "b"), k, 0, acc, delta))
                expected = mod_language(d)
                assert member(d, "upol:mod").member == expected
                seen[expected] += 1
    assert seen[True] and seen[False]


def test_upol_implies_pol():
    for _, syn in random_corpus(6, 40):
        for kind in ("st", "at", "mod"):
            p = pairs(kind, syn)
            if check_upol(syn, p):
                assert check_pol(syn, p)
