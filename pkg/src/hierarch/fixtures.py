"""Named example languages used in the documentation and tests.

``co`` in front of a name denotes the complement, so ``coF6`` is the set of
odd-length words over ``{a}``.
"""
from __future__ import annotations

from .lang import Dfa, complement, regex_dfa

FIXTURES = {
    "F1": ("A*aA*", "ab"),
    "F2": ("b*", "ab"),
    "F3": ("(ab)*", "ab"),
    "F4": ("(AA)*", "ab"),
    "F5": ("ab*", "ab"),
    "F6": ("(aa)*", "a"),
}


def is_fixture(name: str) -> bool:
    return name in FIXTURES or (name.startswith("co") and name[2:] in FIXTURES)


def fixture(name: str) -> Dfa:
    if name.startswith("co") and name[2:] in FIXTURES:
        return complement(fixture(name[2:]))
    try:
        text, alphabet = FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}") from None
    return regex_dfa(text, alphabet)
