"""JSON distribution and channel files.

A distribution file looks like::

    {
      "variables": {"Y": ["0", "1"], "X1": ["0", "1"], "X2": ["0", "1"]},
      "pmf": [{"outcomes": ["0", "0", "0"], "p": "1/4"}, ...]
    }

The first variable is the target.  Probabilities are strings holding a
decimal or a fraction so they parse exactly.  A channel file has the same
layout plus ``"kind": "channel"``; its first variable is the input, its
second the output, and ``p`` is ``kappa(output | input)``.
"""

from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InputError
from .prob import Alphabet, Channel, JointDistribution, to_fraction

__all__ = [
    "load",
    "load_channel",
    "parse_document",
    "parse_channel_document",
    "joint_to_document",
    "channel_to_document",
    "dumps",
]

logger = logging.getLogger(__name__)


def dumps(doc) -> str:
    """Stable serialization used for every file and report the package writes."""
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _read(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return doc


def _parse_table(doc: dict, where: str):
    variables = doc.get("variables")
    if not isinstance(variables, dict) or not variables:
        raise InputError(f"{where}: field 'variables' must be a non-empty object")
    alphabets = []
    for name, labels in variables.items():
        if not isinstance(labels, list) or not labels:
            raise InputError(f"{where}: variables.{name} must be a non-empty list of labels")
        try:
            alphabets.append(Alphabet(name, tuple(str(l) for l in labels)))
        except InputError as exc:
            raise InputError(f"{where}: variables.{name}: {exc}") from None
    rows = doc.get("pmf")
    if not isinstance(rows, list):
        raise InputError(f"{where}: field 'pmf' must be a list")
    table = np.full(tuple(len(a) for a in alphabets), Fraction(0), dtype=object)
    seen = set()
    for k, rec in enumerate(rows):
        field = f"{where}: pmf[{k}]"
        if not isinstance(rec, dict) or "outcomes" not in rec or "p" not in rec:
            raise InputError(f"{field} must be an object with 'outcomes' and 'p'")
        outcomes = rec["outcomes"]
        if not isinstance(outcomes, list) or len(outcomes) != len(alphabets):
            raise InputError(f"{field}.outcomes must list one label per variable ({len(alphabets)})")
        try:
            idx = tuple(a.index(str(o)) for a, o in zip(alphabets, outcomes))
        except InputError as exc:
            raise InputError(f"{field}.outcomes: {exc}") from None
        if idx in seen:
            raise InputError(f"{field}: duplicate outcome tuple {outcomes}")
        seen.add(idx)
        try:
            p = to_fraction(rec["p"])
        except InputError as exc:
            raise InputError(f"{field}.p: {exc}") from None
        if p < 0:
            raise InputError(f"{field}.p is negative")
        table[idx] = p
    return alphabets, table


def parse_document(doc: dict, where: str = "<document>") -> JointDistribution:
    """Exact joint from a parsed distribution document (not canonicalized)."""
    if doc.get("kind", "distribution") != "distribution":
        raise InputError(f"{where}: expected a distribution, got kind {doc.get('kind')!r}")
    alphabets, table = _parse_table(doc, where)
    if len(alphabets) < 2:
        raise InputError(f"{where}: need a target and at least one source")
    total = sum(table.flat, Fraction(0))
    if total != 1:
        raise InputError(f"{where}: probabilities sum to {total}, deficit {1 - total}")
    return JointDistribution(alphabets, table)


def load(path, *, return_pruned: bool = False):
    """Read a distribution file and canonicalize it.

    Returns the joint, or ``(joint, pruned)`` where ``pruned`` maps variable
    names to the zero-probability labels that were removed.
    """
    joint = parse_document(_read(path), str(path))
    joint, pruned = joint.canonical()
    for name, labels in pruned.items():
        logger.info("pruned zero-probability outcomes %s of %s", labels, name)
    return (joint, pruned) if return_pruned else joint


def parse_channel_document(doc: dict, where: str = "<document>") -> Channel:
    if doc.get("kind") != "channel":
        raise InputError(f"{where}: expected \"kind\": \"channel\"")
    alphabets, table = _parse_table(doc, where)
    if len(alphabets) != 2:
        raise InputError(f"{where}: a channel has exactly two variables (input, output)")
    return Channel(alphabets[0], alphabets[1], table.T)


def load_channel(path) -> Channel:
    return parse_channel_document(_read(path), str(path))


def _labels(alphabets):
    return {a.name: list(a.labels) for a in alphabets}


def joint_to_document(joint: JointDistribution) -> dict:
    """Support rows in row-major order, probabilities as exact strings."""
    rows = [
        {"outcomes": [a.labels[i] for a, i in zip(joint.alphabets, idx)], "p": str(p)}
        for idx, p in joint.support()
    ]
    return {"variables": _labels(joint.alphabets), "pmf": rows}


def channel_to_document(ch: Channel) -> dict:
    rows = []
    for i, il in enumerate(ch.in_alphabet.labels):
        for o, ol in enumerate(ch.out_alphabet.labels):
            if ch.matrix[o, i] != 0:
                rows.append({"outcomes": [il, ol], "p": str(ch.matrix[o, i])})
    return {"kind": "channel", "variables": _labels([ch.in_alphabet, ch.out_alphabet]), "pmf": rows}
