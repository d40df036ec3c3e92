"""Membership tests for polynomial and unambiguous polynomial closures.

Each checker evaluates an equation on the syntactic monoid over every
quantified tuple and returns a :class:`Verdict`.  A negative verdict
carries the first violating tuple together with shortlex witness words,
so the failure can be replayed from the language alone.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingOrder, NotSubmonoid, NotSubsemigroup, UnsupportedClass
from .lang import Dfa
from .monoid import FiniteMonoid, Morphism, SyntacticData, syntactic_morphism
from .prevariety import PrevarietyOracle, canonical_preorder, parse_oracle

EQUATIONS = {
    "pol": "s^(w+1) <= s^w t s^w",
    "upol": "s^(w+1) = s^w t s^w",
    "upol-bpol": "(eset)^(w+1) = (eset)^w et (eset)^w",
    "da": "(st)^w = (st)^w t (st)^w",
    "lda": "(esete)^w = (esete)^w ete (esete)^w",
}


@dataclass(frozen=True)
class Certificate:
    """A violated equation instance: named elements and the two sides."""

    equation: str
    elements: dict[str, int]
    words: dict[str, str]
    lhs: int
    rhs: int

    def to_json(self) -> dict:
        return {
            "equation": EQUATIONS[self.equation],
            "elements": self.elements,
            "witnesses": [self.words[k] for k in self.elements],
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass(frozen=True)
class Verdict:
    member: bool
    certificate: Certificate | None = field(default=None)

    def __bool__(self) -> bool:
        return self.member

    def to_json(self) -> dict:
        out: dict = {"member": self.member}
        if self.certificate is not None:
            out.update(self.certificate.to_json())
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _unpack(syn) -> tuple[Morphism | None, FiniteMonoid, np.ndarray | None]:
    if isinstance(syn, SyntacticData):
        return syn.morphism, syn.monoid, syn.order
    if isinstance(syn, Morphism):
        return syn, syn.monoid, syn.monoid.order
    if isinstance(syn, FiniteMonoid):
        return None, syn, syn.order
    raise TypeError(f"expected syntactic data, a morphism or a monoid, got {type(syn).__name__}")


def _fail(equation: str, morphism: Morphism | None, lhs: int, rhs: int, **elements: int) -> Verdict:
    elements = {k: int(v) for k, v in elements.items()}
    if morphism is not None:
        words = {k: morphism.witness[v] or "" for k, v in elements.items()}
    else:
        words = {k: f"#{v}" for k, v in elements.items()}
    return Verdict(False, Certificate(equation, elements, words, int(lhs), int(rhs)))


def _pair_arrays(pairs) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(pairs)
    if arr.dtype == bool:
        s, t = np.nonzero(arr)
    else:
        arr = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        s, t = arr[:, 0], arr[:, 1]
    return s.astype(np.int64), t.astype(np.int64)


def _pair_sides(m: FiniteMonoid, s: np.ndarray, t: np.ndarray):
    w = m.omega[s]
    return m.omega_plus[s], m.table[m.table[w, t], w]


def check_pol(syn, pairs) -> Verdict:
    """``s^(w+1) <= s^w t s^w`` for every pair ``(s, t)``, in the syntactic order."""
    morphism, m, order = _unpack(syn)
    if order is None:
        raise MissingOrder("polynomial closure needs the syntactic order")
    s, t = _pair_arrays(pairs)
    lhs, rhs = _pair_sides(m, s, t)
    bad = np.nonzero(~order[lhs, rhs])[0]
    if bad.size:
        i = bad[0]
        return _fail("pol", morphism, lhs[i], rhs[i], s=s[i], t=t[i])
    return Verdict(True)


def check_upol(syn, pairs) -> Verdict:
    """``s^(w+1) = s^w t s^w`` for every pair ``(s, t)``."""
    morphism, m, _ = _unpack(syn)
    s, t = _pair_arrays(pairs)
    lhs, rhs = _pair_sides(m, s, t)
    bad = np.nonzero(lhs != rhs)[0]
    if bad.size:
        i = bad[0]
        return _fail("upol", morphism, lhs[i], rhs[i], s=s[i], t=t[i])
    return Verdict(True)


def check_upol_via_preorder(syn, preorder) -> Verdict:
    """Same equation, quantified over the canonical preorder instead of the raw pairs."""
    return check_upol(syn, np.asarray(preorder, dtype=bool))


def check_upol_bpol(syn, pairs) -> Verdict:
    """``(eset)^(w+1) = (eset)^w et (eset)^w`` for idempotent ``e``, pairs ``(e, s)`` and all ``t``."""
    morphism, m, _ = _unpack(syn)
    tab = m.table
    pairs = _to_matrix(pairs, m.size)
    every_t = np.arange(m.size)
    for e in np.nonzero(m.idempotent_mask)[0]:
        ss = np.nonzero(pairs[e])[0]
        if not ss.size:
            continue
        ese_values, first = np.unique(tab[tab[e, ss], e], return_index=True)
        et = tab[e, every_t]
        for ese, s in zip(ese_values, ss[first]):
            x = tab[ese, every_t]  # e s e t
            w = m.omega[x]
            lhs = m.omega_plus[x]
            rhs = tab[tab[w, et], w]
            bad = np.nonzero(lhs != rhs)[0]
            if bad.size:
                i = bad[0]
                return _fail("upol-bpol", morphism, lhs[i], rhs[i], e=e, s=s, t=every_t[i])
    return Verdict(True)


def _to_matrix(pairs, n: int) -> np.ndarray:
    arr = np.asarray(pairs)
    if arr.dtype == bool:
        return arr
    out = np.zeros((n, n), dtype=bool)
    for s, t in pairs:
        out[s, t] = True
    return out


def _as_index(sub) -> np.ndarray:
    return np.array(sorted(int(x) for x in sub), dtype=np.int64)


def check_da(syn, sub) -> Verdict:
    """``(st)^w = (st)^w t (st)^w`` for all ``s, t`` in the submonoid ``sub``."""
    morphism, m, _ = _unpack(syn)
    idx = _as_index(sub)
    if m.unit not in set(idx.tolist()) or not m.is_closed(idx.tolist()):
        raise NotSubmonoid("subset is not a submonoid")
    s, t = np.meshgrid(idx, idx, indexing="ij")
    s, t = s.ravel(), t.ravel()
    w = m.omega[m.table[s, t]]
    rhs = m.table[m.table[w, t], w]
    bad = np.nonzero(w != rhs)[0]
    if bad.size:
        i = bad[0]
        return _fail("da", morphism, w[i], rhs[i], s=s[i], t=t[i])
    return Verdict(True)


def check_lda(syn, sub) -> Verdict:
    """``(esete)^w = (esete)^w ete (esete)^w`` for ``s, t`` and idempotent ``e`` in the subsemigroup ``sub``."""
    morphism, m, _ = _unpack(syn)
    idx = _as_index(sub)
    if idx.size and not m.is_closed(idx.tolist()):
        raise NotSubsemigroup("subset is not closed under product")
    tab = m.table
    s, t = np.meshgrid(idx, idx, indexing="ij")
    s, t = s.ravel(), t.ravel()
    for e in idx[m.idempotent_mask[idx]]:
        ese = tab[tab[e, s], e]
        ete = tab[tab[e, t], e]
        w = m.omega[tab[ese, ete]]
        rhs = tab[tab[w, ete], w]
        bad = np.nonzero(w != rhs)[0]
        if bad.size:
            i = bad[0]
            return _fail("lda", morphism, w[i], rhs[i], e=e, s=s[i], t=t[i])
    return Verdict(True)


OPERATORS = ("pol", "upol", "upol-bpol", "fo2", "fo2s")


def parse_class(spec: str) -> tuple[str, PrevarietyOracle]:
    """Split ``op:base`` into the operator and the base class oracle."""
    op, sep, base = spec.strip().partition(":")
    op = op.lower()
    if not sep or op not in OPERATORS:
        raise UnsupportedClass(f"class must be one of {', '.join(o + ':<base>' for o in OPERATORS)}; got {spec!r}")
    oracle = parse_oracle(base)
    if op in ("fo2", "fo2s") and not oracle.is_group:
        raise UnsupportedClass(f"{op} needs a class of group languages (st, mod, amt), not {base!r}")
    return op, oracle


def member(lang: Dfa | SyntacticData, spec: str) -> Verdict:
    """Decide membership of a regular language in the class named by ``spec``.

    ``spec`` is ``pol:C``, ``upol:C``, ``upol-bpol:C``, ``fo2:G`` or ``fo2s:G``.
    ``fo2:G`` means two-variable first-order logic with order and
    ``G``-predicates, ``fo2s:G`` adds the successor.
    """
    op, oracle = parse_class(spec)
    syn = lang if isinstance(lang, SyntacticData) else syntactic_morphism(lang)
    alpha = syn.morphism
    if op == "pol":
        return check_pol(syn, oracle.pairs(alpha))
    if op == "upol":
        return check_upol(syn, oracle.pairs(alpha))
    if op == "upol-bpol":
        return check_upol_bpol(syn, oracle.pairs(alpha))
    if op == "fo2":
        return check_da(syn, oracle.kernel(alpha))
    return check_lda(syn, oracle.strict_kernel(alpha))


__all__ = [
    "Verdict", "Certificate", "EQUATIONS", "check_pol", "check_upol", "check_upol_via_preorder",
    "check_upol_bpol", "check_da", "check_lda", "member", "parse_class", "canonical_preorder",
]
