"""Standard example distributions (logic gates and friends).

Unless stated otherwise the sources are independent uniform bits and the
target is a deterministic function of them.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction

from .errors import InputError
from .prob import Alphabet, JointDistribution, to_fraction

__all__ = ["FIXTURES", "generate_fixture", "parse_fixture_name"]

FIXTURES = ("and", "or", "xor", "sum", "copy", "unq", "and3", "sum3", "overlap", "lemma1")

BIT = ("0", "1")


def _gate(n: int, fn, target_labels) -> JointDistribution:
    alphabets = [Alphabet("Y", tuple(target_labels))] + [Alphabet(f"X{i + 1}", BIT) for i in range(n)]
    p = Fraction(1, 2**n)
    probs = {}
    for bits in itertools.product((0, 1), repeat=n):
        probs[(str(fn(bits)),) + tuple(str(b) for b in bits)] = p
    return JointDistribution.from_outcomes(alphabets, probs)


def _copy() -> JointDistribution:
    ys = tuple(a + b for a in BIT for b in BIT)
    alphabets = [Alphabet("Y", ys), Alphabet("X1", BIT), Alphabet("X2", BIT)]
    probs = {(a + b, a, b): Fraction(1, 4) for a in BIT for b in BIT}
    return JointDistribution.from_outcomes(alphabets, probs)


def _unq(eps: Fraction) -> JointDistribution:
    if not 0 <= eps <= 1:
        raise InputError("flip probability must lie in [0, 1]")
    alphabets = [Alphabet("Y", BIT), Alphabet("X1", BIT), Alphabet("X2", BIT)]
    probs = {}
    for x1 in BIT:
        for x2 in BIT:
            probs[(x1, x1, x2)] = Fraction(1, 2) * (1 - eps if x1 == x2 else eps)
    return JointDistribution.from_outcomes(alphabets, probs)


def _overlap() -> JointDistribution:
    pairs = tuple(a + b for a in BIT for b in BIT)
    ys = []
    probs = {}
    for a, b, c, d in itertools.product(BIT, repeat=4):
        y = f"{a}{b}|{a}{c}|{a}{d}"
        ys.append(y)
        probs[(y, a + b, a + c, a + d)] = Fraction(1, 16)
    alphabets = [Alphabet("Y", tuple(ys))] + [Alphabet(f"X{i}", pairs) for i in (1, 2, 3)]
    return JointDistribution.from_outcomes(alphabets, probs)


def _lemma1() -> JointDistribution:
    ys = []
    probs = {}
    for a, b in itertools.product(BIT, repeat=2):
        c = str(int(a) ^ int(b))
        ys.append(a + b + c)
        probs[(a + b + c, a, b, c)] = Fraction(1, 4)
    alphabets = [Alphabet("Y", tuple(ys))] + [Alphabet(f"X{i}", BIT) for i in (1, 2, 3)]
    return JointDistribution.from_outcomes(alphabets, probs)


def parse_fixture_name(name: str) -> tuple[str, dict]:
    """Split ``"unq(0.1)"`` into ``("unq", {"epsilon": Fraction(1, 10)})``."""
    m = re.fullmatch(r"\s*([a-z0-9]+)\s*(?:\(\s*([^)]*)\s*\))?\s*", name.lower())
    if not m or m.group(1) not in FIXTURES:
        raise InputError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    params = {}
    if m.group(2):
        if m.group(1) != "unq":
            raise InputError(f"fixture {m.group(1)!r} takes no parameter")
        params["epsilon"] = to_fraction(m.group(2))
    return m.group(1), params


def generate_fixture(name: str, epsilon="1/10") -> JointDistribution:
    """Build a named example distribution exactly.

    Parameters
    ----------
    name : str
        One of :data:`FIXTURES`, optionally with a parameter as in ``"unq(0.2)"``.
    epsilon : str or Fraction
        Flip probability for ``unq`` (``Y = X1``, ``X2`` is ``X1`` flipped
        with this probability).
    """
    base, params = parse_fixture_name(name)
    eps = params.get("epsilon", to_fraction(epsilon))
    if base == "and":
        return _gate(2, lambda b: b[0] & b[1], BIT)
    if base == "or":
        return _gate(2, lambda b: b[0] | b[1], BIT)
    if base == "xor":
        return _gate(2, lambda b: b[0] ^ b[1], BIT)
    if base == "sum":
        return _gate(2, sum, ("0", "1", "2"))
    if base == "copy":
        return _copy()
    if base == "unq":
        return _unq(eps)
    if base == "and3":
        return _gate(3, lambda b: b[0] & b[1] & b[2], BIT)
    if base == "sum3":
        return _gate(3, sum, ("0", "1", "2", "3"))
    if base == "overlap":
        return _overlap()
    return _lemma1()
