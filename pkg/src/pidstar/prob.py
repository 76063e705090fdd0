"""Exact joint distributions, channels and information functionals.

Probabilities are stored as :class:`fractions.Fraction` inside numpy object
arrays.  Floating point only appears when a logarithm is taken, so every
marginal, conditional and composition is exact.  All information quantities
are in bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError, InvariantError

__all__ = [
    "Alphabet",
    "JointDistribution",
    "Channel",
    "to_fraction",
    "marginalize",
    "condition",
    "compose",
    "entropy",
    "mutual_information",
    "conditional_mutual_information",
    "channel_mutual_information",
]


def to_fraction(value) -> Fraction:
    """Convert a probability-like value to an exact :class:`Fraction`.

    Strings may be decimals (``"0.25"``) or fractions (``"1/3"``); both are
    parsed exactly.  Floats go through their shortest ``repr`` so that
    ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise InputError(f"non-finite probability {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse probability {value!r}") from exc
    raise InputError(f"unsupported probability type {type(value).__name__}")


def _fraction_array(values, shape=None) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def _as_names(group) -> tuple[str, ...]:
    if isinstance(group, str):
        return (group,)
    names = tuple(group)
    if not names:
        raise InputError("variable group must be non-empty")
    return names


@dataclass(frozen=True)
class Alphabet:
    """A named variable together with its ordered outcome labels."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise InputError(f"alphabet {self.name!r} is empty")
        if len(set(labels)) != len(labels):
            raise InputError(f"alphabet {self.name!r} has duplicate labels")

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InputError(
                f"unknown outcome {label!r} for variable {self.name!r}"
            ) from None


class JointDistribution:
    """Exact pmf over an ordered tuple of named variables.

    The first variable plays the role of the target ``Y``; the remaining
    ones are the sources ``X1..Xn``.  ``pmf`` is a dense object array of
    Fractions with one axis per variable.
    """

    def __init__(self, alphabets: Sequence[Alphabet], pmf, *, validate: bool = True):
        self.alphabets = tuple(alphabets)
        names = [a.name for a in self.alphabets]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names in {names}")
        shape = tuple(len(a) for a in self.alphabets)
        self.pmf = _fraction_array(pmf, shape)
        self.pmf.flags.writeable = False
        if validate:
            for idx, v in np.ndenumerate(self.pmf):
                if v < 0:
                    raise InputError(f"negative probability {v} at {idx}")
            total = sum(self.pmf.flat, Fraction(0))
            if total != 1:
                raise InputError(
                    f"probabilities sum to {total}, deficit {1 - total}"
                )

    # -- construction helpers -------------------------------------------
    @classmethod
    def from_outcomes(cls, alphabets: Sequence[Alphabet], probs: Mapping) -> "JointDistribution":
        """Build from a mapping ``outcome tuple -> probability``."""
        alphabets = tuple(alphabets)
        pmf = np.full(tuple(len(a) for a in alphabets), Fraction(0), dtype=object)
        for outcome, p in probs.items():
            if len(outcome) != len(alphabets):
                raise InputError(f"outcome {outcome!r} has wrong arity")
            idx = tuple(a.index(o) for a, o in zip(alphabets, outcome))
            pmf[idx] += to_fraction(p)
        return cls(alphabets, pmf)

    # -- basic accessors ------------------------------------------------
    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.alphabets)

    @property
    def target(self) -> Alphabet:
        return self.alphabets[0]

    @property
    def sources(self) -> tuple[Alphabet, ...]:
        return self.alphabets[1:]

    @property
    def n_sources(self) -> int:
        return len(self.alphabets) - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.pmf.shape

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown variable {name!r}; have {list(self.names)}") from None

    def alphabet(self, name: str) -> Alphabet:
        return self.alphabets[self.axis(name)]

    def to_float(self) -> np.ndarray:
        return self.pmf.astype(float)

    def support(self):
        """Yield ``(index_tuple, probability)`` for every positive entry."""
        for idx, v in np.ndenumerate(self.pmf):
            if v > 0:
                yield idx, v

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.alphabets == other.alphabets and bool(np.all(self.pmf == other.pmf))

    def __hash__(self):
        return hash((self.alphabets, tuple(self.pmf.flat)))

    def __repr__(self):
        return f"JointDistribution({list(self.names)}, support={sum(1 for _ in self.support())})"

    # -- transformations --------------------------------------------------
    def canonical(self) -> tuple["JointDistribution", dict[str, list[str]]]:
        """Drop outcomes of zero marginal probability.

        Returns the pruned joint and a mapping of variable name to the labels
        that were removed (variables with nothing removed are omitted).
        """
        keep = []
        pruned: dict[str, list[str]] = {}
        for ax, alph in enumerate(self.alphabets):
            other = tuple(a for a in range(self.pmf.ndim) if a != ax)
            marg = np.sum(self.pmf, axis=other) if other else self.pmf
            k = [i for i in range(len(alph)) if marg[i] > 0]
            if len(k) < len(alph):
                pruned[alph.name] = [alph.labels[i] for i in range(len(alph)) if marg[i] == 0]
            keep.append(k)
        if not pruned:
            return self, {}
        pmf = self.pmf[np.ix_(*keep)]
        alphabets = [
            Alphabet(a.name, tuple(a.labels[i] for i in k)) for a, k in zip(self.alphabets, keep)
        ]
        return JointDistribution(alphabets, pmf, validate=False), pruned

    def is_canonical(self) -> bool:
        return not self.canonical()[1]

    def reorder(self, names: Sequence[str]) -> "JointDistribution":
        """Permute variables into the given order (must be a permutation)."""
        names = tuple(names)
        if sorted(names) != sorted(self.names):
            raise InputError(f"{names} is not a permutation of {self.names}")
        axes = [self.axis(n) for n in names]
        return JointDistribution(
            [self.alphabets[a] for a in axes], np.transpose(self.pmf, axes), validate=False
        )

    def add_variable(self, alphabet: Alphabet, channel: "Channel", given) -> "JointDistribution":
        """Append a new variable drawn from ``channel`` applied to ``given``.

        ``given`` may be a variable name or a group of names; the channel's
        input alphabet must then enumerate the group's joint outcomes in
        row-major order.
        """
        given = _as_names(given)
        if alphabet.name in self.names:
            raise InputError(f"variable {alphabet.name!r} already present")
        axes = [self.axis(g) for g in given]
        group_size = int(np.prod([self.shape[a] for a in axes]))
        if len(channel.in_alphabet) != group_size:
            raise InputError("channel input alphabet does not match the conditioning group")
        if len(channel.out_alphabet) != len(alphabet):
            raise InputError("channel output alphabet does not match the new variable")
        new = np.empty(self.shape + (len(alphabet),), dtype=object)
        strides = np.cumprod([1] + [self.shape[a] for a in axes[::-1]])[:-1][::-1]
        for idx, v in np.ndenumerate(self.pmf):
            col = sum(int(idx[a]) * int(s) for a, s in zip(axes, strides))
            for z in range(len(alphabet)):
                new[idx + (z,)] = v * channel.matrix[z, col]
        return JointDistribution(self.alphabets + (alphabet,), new, validate=False)


class Channel:
    """Column-stochastic map ``kappa(out | in)`` with exact entries.

    ``matrix[o, i]`` is the probability of output ``o`` given input ``i``.
    """

    def __init__(self, in_alphabet: Alphabet, out_alphabet: Alphabet, matrix, *, validate: bool = True):
        self.in_alphabet = in_alphabet
        self.out_alphabet = out_alphabet
        self.matrix = _fraction_array(matrix, (len(out_alphabet), len(in_alphabet)))
        self.matrix.flags.writeable = False
        if validate:
            for idx, v in np.ndenumerate(self.matrix):
                if v < 0:
                    raise InputError(f"negative channel entry {v} at {idx}")
            for i, label in enumerate(in_alphabet.labels):
                s = sum(self.matrix[:, i], Fraction(0))
                if s != 1:
                    raise InputError(f"channel column {label!r} sums to {s}, not 1")

    @classmethod
    def identity(cls, alphabet: Alphabet, out_name: str | None = None) -> "Channel":
        out = Alphabet(out_name or alphabet.name, alphabet.labels)
        k = len(alphabet)
        m = np.full((k, k), Fraction(0), dtype=object)
        for i in range(k):
            m[i, i] = Fraction(1)
        return cls(alphabet, out, m, validate=False)

    @classmethod
    def constant(cls, in_alphabet: Alphabet, out_alphabet: Alphabet, dist=None) -> "Channel":
        """Channel whose output ignores the input (``dist`` defaults to a point mass on the first label)."""
        if dist is None:
            dist = [1] + [0] * (len(out_alphabet) - 1)
        col = [to_fraction(d) for d in dist]
        m = np.empty((len(out_alphabet), len(in_alphabet)), dtype=object)
        for i in range(len(in_alphabet)):
            m[:, i] = col
        return cls(in_alphabet, out_alphabet, m)

    @property
    def shape(self):
        return self.matrix.shape

    def to_float(self) -> np.ndarray:
        return self.matrix.astype(float)

    def apply(self, prior) -> np.ndarray:
        """Push an input pmf through the channel (exact)."""
        prior = _fraction_array(prior)
        if prior.shape != (len(self.in_alphabet),):
            raise InputError("prior length does not match channel input alphabet")
        return self.matrix.dot(prior)

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return self.shape == other.shape and bool(np.all(self.matrix == other.matrix))

    def __hash__(self):
        return hash((self.shape, tuple(self.matrix.flat)))

    def __repr__(self):
        return f"Channel({self.in_alphabet.name}->{self.out_alphabet.name}, {self.shape[1]}->{self.shape[0]})"


def _group_label(joint: JointDistribution, names: Sequence[str]) -> Alphabet:
    alphs = [joint.alphabet(n) for n in names]
    if len(alphs) == 1:
        return alphs[0]
    labels = tuple(",".join(t) for t in itertools.product(*(a.labels for a in alphs)))
    return Alphabet(",".join(names), labels)


def marginalize(joint: JointDistribution, vars) -> JointDistribution:
    """Sum out every variable not in ``vars``; kept variables retain joint order."""
    names = _as_names(vars)
    keep = sorted({joint.axis(n) for n in names})
    drop = tuple(a for a in range(len(joint.alphabets)) if a not in keep)
    pmf = np.sum(joint.pmf, axis=drop) if drop else joint.pmf
    return JointDistribution([joint.alphabets[a] for a in keep], pmf, validate=False)


def _grouped(joint: JointDistribution, groups: Sequence[Sequence[str]]) -> np.ndarray:
    """Exact array with one axis per group (groups flattened row-major)."""
    axes = [joint.axis(n) for g in groups for n in g]
    if len(set(axes)) != len(axes):
        raise InputError("variable groups overlap")
    drop = tuple(a for a in range(len(joint.alphabets)) if a not in axes)
    pmf = np.sum(joint.pmf, axis=drop) if drop else joint.pmf
    remaining = [a for a in range(len(joint.alphabets)) if a in axes]
    pmf = np.transpose(pmf, [remaining.index(a) for a in axes])
    sizes = [int(np.prod([joint.shape[joint.axis(n)] for n in g])) for g in groups]
    return pmf.reshape(sizes)


def condition(joint: JointDistribution, given: str, of) -> Channel:
    """Channel ``p(of | given)``; ``of`` may be a single name or a group."""
    of = _as_names(of)
    if given in of:
        raise InputError("conditioning variable also appears in the output group")
    pair = _grouped(joint, [(given,), of])
    out_alph = _group_label(joint, of)
    in_alph = joint.alphabet(given)
    m = np.empty((pair.shape[1], pair.shape[0]), dtype=object)
    for g in range(pair.shape[0]):
        pg = sum(pair[g, :], Fraction(0))
        if pg == 0:
            raise InvariantError(
                f"outcome {in_alph.labels[g]!r} of {given!r} has zero probability; joint not canonical"
            )
        for o in range(pair.shape[1]):
            m[o, g] = pair[g, o] / pg
    return Channel(in_alph, out_alph, m, validate=False)


def compose(outer: Channel, inner: Channel) -> Channel:
    """Exact composition ``outer o inner`` (``inner`` applied first)."""
    if outer.in_alphabet.labels != inner.out_alphabet.labels:
        raise InputError(
            f"cannot compose: outer input {outer.in_alphabet.labels} != inner output {inner.out_alphabet.labels}"
        )
    return Channel(inner.in_alphabet, outer.out_alphabet, outer.matrix.dot(inner.matrix), validate=False)


def entropy(dist) -> float:
    """Shannon entropy in bits; zero entries contribute nothing."""
    p = np.asarray(dist, dtype=object).ravel()
    total = 0.0
    for v in p:
        if v < 0:
            raise InputError("negative probability")
        if v > 0:
            fv = float(v)
            total -= fv * math.log2(fv)
    return max(total, 0.0)


def _entropy_float(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def mutual_information(joint: JointDistribution, group_a, group_b) -> float:
    """``I(A;B)`` in bits for disjoint variable groups."""
    a, b = _as_names(group_a), _as_names(group_b)
    pair = _grouped(joint, [a, b]).astype(float)
    h = _entropy_float(pair.sum(1)) + _entropy_float(pair.sum(0)) - _entropy_float(pair)
    return max(h, 0.0)


def conditional_mutual_information(joint: JointDistribution, group_a, group_b, given) -> float:
    """``I(A;B|C)`` in bits for pairwise-disjoint groups."""
    a, b, c = _as_names(group_a), _as_names(group_b), _as_names(given)
    t = _grouped(joint, [a, b, c]).astype(float)
    h = (
        _entropy_float(t.sum(1))
        + _entropy_float(t.sum(0))
        - _entropy_float(t)
        - _entropy_float(t.sum((0, 1)))
    )
    return max(h, 0.0)


def channel_mutual_information(prior, channel: Channel) -> float:
    """Mutual information between a channel's input and output under ``prior``."""
    prior = np.asarray([float(to_fraction(p)) for p in prior])
    k = channel.to_float() * prior[None, :]
    return max(_entropy_float(k.sum(1)) + _entropy_float(prior) - _entropy_float(k), 0.0)
