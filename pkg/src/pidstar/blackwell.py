"""The Blackwell order on channels sharing an input alphabet.

``is_garbling(A, B)`` asks whether ``A = L o B`` for some channel ``L``.
The question is a pure feasibility LP, answered exactly.  Decision-problem
utilities give the operational side of the order and are used to check it
empirically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, InvariantError
from .geometry import HPolytope, LinearProgram, lp_solve
from .prob import Alphabet, Channel, compose, to_fraction

__all__ = [
    "GarblingResult",
    "DecisionProblem",
    "ConsistencyReport",
    "is_garbling",
    "best_response_utility",
    "blackwell_consistency_check",
    "random_decision_problem",
]


@dataclass(frozen=True)
class GarblingResult:
    """Outcome of :func:`is_garbling`.

    ``witness`` is a channel ``L`` from B's outputs to A's outputs with
    ``compose(L, chB) == chA``; it is present exactly when ``holds``.
    """

    holds: bool
    witness: Channel | None = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class DecisionProblem:
    """A prior over states, a set of actions and a utility table ``utility[a][z]``."""

    states: Alphabet
    actions: Alphabet
    prior: tuple
    utility: tuple

    def __post_init__(self):
        prior = tuple(to_fraction(p) for p in self.prior)
        if len(prior) != len(self.states):
            raise InputError("prior length differs from the state alphabet")
        if any(p < 0 for p in prior) or sum(prior) != 1:
            raise InputError("prior must be a probability vector")
        util = tuple(tuple(to_fraction(u) for u in row) for row in self.utility)
        if len(util) != len(self.actions) or any(len(r) != len(self.states) for r in util):
            raise InputError("utility table must have one row per action and one column per state")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "utility", util)


def _check_same_input(chA: Channel, chB: Channel):
    if chA.in_alphabet.labels != chB.in_alphabet.labels:
        raise InputError(
            f"channels have different input alphabets: {chA.in_alphabet.labels} vs {chB.in_alphabet.labels}"
        )


def is_garbling(chA: Channel, chB: Channel) -> GarblingResult:
    """Decide exactly whether ``chA`` is a garbling of ``chB``.

    Parameters
    ----------
    chA, chB : Channel
        Channels ``Z -> A`` and ``Z -> B`` on the same input alphabet.

    Returns
    -------
    GarblingResult
        With a witness ``p(a|b)`` when the relation holds.
    """
    _check_same_input(chA, chB)
    nA, nZ = chA.shape
    nB = chB.shape[0]
    MA, MB = chA.matrix, chB.matrix
    # outputs of B that never occur carry no constraint; give them a fixed column later
    live = [b for b in range(nB) if any(MB[b, z] != 0 for z in range(nZ))]
    nL = len(live)
    dim = nA * nL

    def var(a, k):
        return a * nL + k

    ineq = []
    for j in range(dim):
        row = [0] * dim
        row[j] = -1
        ineq.append((row, 0))
    eq = []
    for k in range(nL):
        row = [0] * dim
        for a in range(nA):
            row[var(a, k)] = 1
        eq.append((row, 1))
    for a in range(nA):
        for z in range(nZ):
            row = [Fraction(0)] * dim
            for k, b in enumerate(live):
                row[var(a, k)] = MB[b, z]
            eq.append((row, MA[a, z]))
    res = lp_solve(LinearProgram(HPolytope.build(dim, ineq, eq), [0] * dim))
    if not res.feasible:
        return GarblingResult(False)
    W = np.full((nA, nB), Fraction(0), dtype=object)
    W[0, :] = Fraction(1)
    for k, b in enumerate(live):
        W[:, b] = [res.x[var(a, k)] for a in range(nA)]
    witness = Channel(chB.out_alphabet, chA.out_alphabet, W, validate=False)
    if compose(witness, chB) != chA:
        raise InvariantError("garbling witness does not reproduce the channel")
    return GarblingResult(True, witness)


def best_response_utility(ch: Channel, problem: DecisionProblem) -> Fraction:
    """Maximum expected utility achievable by acting on the channel output.

    Each output symbol ``c`` is answered by the action maximizing
    ``sum_z p(z) ch(c|z) u(a,z)``; the result is exact.
    """
    if ch.in_alphabet.labels != problem.states.labels:
        raise InputError("channel input alphabet differs from the decision problem's states")
    nC, nZ = ch.shape
    total = Fraction(0)
    for c in range(nC):
        joint = [problem.prior[z] * ch.matrix[c, z] for z in range(nZ)]
        total += max(sum((j * u for j, u in zip(joint, row)), Fraction(0)) for row in problem.utility)
    return total


def random_decision_problem(states: Alphabet, rng: np.random.Generator) -> DecisionProblem:
    """Draw a decision problem with small-denominator rational prior and utilities.

    The action count is uniform on ``{2, ..., |Z|+1}``; each utility is
    ``k/q`` with ``q`` uniform on ``1..64`` and ``k`` uniform on ``0..q``.
    """
    nZ = len(states)
    n_act = int(rng.integers(2, nZ + 2))
    weights = [int(w) for w in rng.integers(1, 65, size=nZ)]
    prior = [Fraction(w, sum(weights)) for w in weights]
    util = []
    for _ in range(n_act):
        row = []
        for _ in range(nZ):
            q = int(rng.integers(1, 65))
            row.append(Fraction(int(rng.integers(0, q + 1)), q))
        util.append(row)
    actions = Alphabet("action", tuple(f"a{i}" for i in range(n_act)))
    return DecisionProblem(states, actions, prior, util)


@dataclass
class ConsistencyReport:
    """Result of :func:`blackwell_consistency_check`.

    ``violations`` lists problems where a garbling did strictly better than
    the channel it garbles (always empty when the garbling relation holds).
    ``separating`` is the first sampled problem on which ``chA`` beats
    ``chB``, searched only when ``chA`` is not a garbling of ``chB``.
    """

    garbling: bool
    problems_checked: int
    violations: list = field(default_factory=list)
    separating: DecisionProblem | None = None
    separating_utilities: tuple | None = None

    @property
    def consistent(self) -> bool:
        return not self.violations


def blackwell_consistency_check(
    chA: Channel,
    chB: Channel,
    num_problems: int = 1000,
    rng_seed: int = 0,
    problems: Sequence[DecisionProblem] | None = None,
) -> ConsistencyReport:
    """Compare the garbling verdict with best-response utilities on random problems.

    Parameters
    ----------
    chA, chB : Channel
        Channels on a shared input alphabet.
    num_problems : int
        How many random decision problems to draw.
    rng_seed : int
        Seed for :func:`numpy.random.default_rng`.
    problems : sequence of DecisionProblem, optional
        Extra problems checked before the random ones.
    """
    _check_same_input(chA, chB)
    holds = is_garbling(chA, chB).holds
    rng = np.random.default_rng(rng_seed)
    pool = list(problems or ())
    report = ConsistencyReport(holds, 0)
    for k in range(len(pool) + num_problems):
        d = pool[k] if k < len(pool) else random_decision_problem(chA.in_alphabet, rng)
        ua, ub = best_response_utility(chA, d), best_response_utility(chB, d)
        report.problems_checked += 1
        if holds and ua > ub:
            report.violations.append(d)
        if not holds and report.separating is None and ua > ub:
            report.separating = d
            report.separating_utilities = (ua, ub)
    return report
