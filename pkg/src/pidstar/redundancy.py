"""Redundancy measures: the Blackwell redundancy, Gacs-Korner common information,
the wedge redundancy and the Griffith-Ho style redundancy.

The Blackwell redundancy is the largest ``I(Q;Y)`` over channels ``s(q|y)``
that are garblings of every source channel ``p(x_i|y)``.  Writing the
garbling maps ``s(q|x_i)`` as unknowns gives the polytope built by
:func:`build_lambda_system`, and the objective is convex on it, so the
maximum sits at a vertex.

Two solvers are offered.

``method="vertices"`` enumerates every vertex of that polytope for a fixed
``|Q|`` and evaluates the objective on each.  It is the literal procedure and
is used for cross-checks, but the vertex count grows like ``|Q|!``.

``method="rays"`` (default) exploits the row structure.  Each row ``r_q`` of a
feasible point lies in the cone ``K`` cut out by the consistency equalities,
the rows add up to the all-ones vector, and the objective is a sum of
per-row terms that are convex and positively homogeneous.  Splitting a row
into extreme rays of ``K`` can therefore only raise the objective, and the
problem collapses to an exact LP over non-negative ray weights.  A basic
optimal solution uses at most ``rank`` rays, which is the cardinality bound
``sum_i |X_i| - n + 1``.  The optimum is the same as the vertex method's at
that cardinality.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError, InvariantError, ResourceError
from .geometry import HPolytope, LinearProgram, enumerate_vertices, lp_solve
from .prob import (
    Alphabet,
    Channel,
    JointDistribution,
    compose,
    condition,
    entropy,
    marginalize,
    mutual_information,
)

__all__ = [
    "RedundancyResult",
    "CommonPartition",
    "cardinality_bound",
    "source_channels",
    "build_lambda_system",
    "redundancy_star",
    "gk_common_information",
    "common_partition",
    "redundancy_wedge",
    "redundancy_gh",
    "unique_information",
]

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


@dataclass
class RedundancyResult:
    """Optimum of a redundancy program together with its certificate.

    Attributes
    ----------
    value : float
        Bits, evaluated on an exactly feasible channel.
    channel_given_target : Channel
        ``s(q|y)``.
    channels_given_sources : list of Channel
        ``s(q|x_i)`` for each source (empty for the Griffith-Ho measure, whose
        channel conditions on the full outcome instead).
    q_cardinality : int
        Size of the ``Q`` alphabet.  Unused outcomes have all-zero rows.
    vertices_examined : int
        Vertices (``"vertices"``) or extreme rays (``"rays"``) enumerated.
    optimal_vertex_count : int or None
        Number of vertices within the tie tolerance of the best value, when
        vertices were enumerated.
    """

    value: float
    channel_given_target: Channel
    channels_given_sources: list
    q_cardinality: int
    vertices_examined: int
    method: str = "rays"
    optimal_vertex_count: int | None = None
    caveats: list = field(default_factory=list)

    @property
    def effective_cardinality(self) -> int:
        """Number of ``Q`` outcomes with positive mass under some target value."""
        m = self.channel_given_target.matrix
        return sum(1 for q in range(m.shape[0]) if any(v != 0 for v in m[q]))


@dataclass(frozen=True)
class CommonPartition:
    """Connected components of the co-occurrence graph of the source outcomes.

    ``labels[i][k]`` is the component of the ``k``-th outcome of source ``i``.
    """

    labels: tuple
    count: int


# ---------------------------------------------------------------------------
# helpers


def _canonical(joint: JointDistribution) -> JointDistribution:
    if joint.n_sources < 1:
        raise InputError("need at least one source")
    return joint.canonical()[0]


def cardinality_bound(joint: JointDistribution) -> int:
    """``sum_i |X_i| - n + 1`` for the (canonicalized) joint."""
    joint = _canonical(joint)
    return sum(len(a) for a in joint.sources) - joint.n_sources + 1


def source_channels(joint: JointDistribution) -> list[Channel]:
    """The source channels ``p(x_i | y)``."""
    y = joint.target.name
    return [condition(joint, y, a.name) for a in joint.sources]


def _target_prior(joint: JointDistribution) -> list[Fraction]:
    return list(marginalize(joint, joint.target.name).pmf)


def _information(prior: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``I(Q;Y)`` for stacked channels ``s[..., q, y]`` under ``prior[y]``.

    Rows of zero mass contribute nothing; the result is positively homogeneous
    in ``s`` when ``s`` is a single row.
    """
    joint = s * prior
    sq = joint.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(joint > 0, s / np.where(sq > 0, sq, 1.0), 1.0)
        terms = np.where(joint > 0, joint * np.log2(np.where(ratio > 0, ratio, 1.0)), 0.0)
    return terms.sum(axis=(-1, -2)) if s.ndim >= 2 else terms.sum(axis=-1)


def _q_alphabet(k: int) -> Alphabet:
    return Alphabet("Q", tuple(f"q{j}" for j in range(k)))


def _neg(dim: int, j: int) -> list[int]:
    row = [0] * dim
    row[j] = -1
    return row


# ---------------------------------------------------------------------------
# the polytope


def build_lambda_system(prior: Sequence, channels: Sequence[Channel], q_card: int) -> HPolytope:
    """Polytope of garbling maps ``s(q|x_i)`` whose induced ``s(q|y)`` agree.

    Variables are laid out source by source; inside a source block the index
    of ``s(q|x_i)`` is ``q * |X_i| + x_i``.  The channel ``s(q|y)`` itself is
    not a variable: it is the image of source 1's block.

    Parameters
    ----------
    prior : sequence
        ``p(y)``, used only to validate the alphabet size.
    channels : sequence of Channel
        ``p(x_i|y)`` for each source.
    q_card : int
        Size of the ``Q`` alphabet.
    """
    if q_card < 1:
        raise InputError("q_card must be at least 1")
    if not channels:
        raise InputError("need at least one source channel")
    ny = len(channels[0].in_alphabet)
    if len(prior) != ny or any(ch.in_alphabet.labels != channels[0].in_alphabet.labels for ch in channels):
        raise InputError("channels must share the target alphabet")
    sizes = [len(ch.out_alphabet) for ch in channels]
    offsets = np.concatenate([[0], np.cumsum([q_card * s for s in sizes])]).astype(int)
    dim = int(offsets[-1])

    def var(i, q, x):
        return int(offsets[i]) + q * sizes[i] + x

    ineq = [(_neg(dim, j), 0) for j in range(dim)]
    eq = []
    for i, s in enumerate(sizes):
        for x in range(s):
            row = [0] * dim
            for q in range(q_card):
                row[var(i, q, x)] = 1
            eq.append((row, 1))
    K1 = channels[0].matrix
    for i in range(1, len(channels)):
        Ki = channels[i].matrix
        for q in range(q_card):
            for y in range(ny):
                row = [Fraction(0)] * dim
                for x in range(sizes[i]):
                    row[var(i, q, x)] += Ki[x, y]
                for x in range(sizes[0]):
                    row[var(0, q, x)] -= K1[x, y]
                eq.append((row, 0))
    return HPolytope.build(dim, ineq, eq)


def _cone_rays(dim: int, cone_eq: list, cap: int | None):
    """Extreme rays of ``{r >= 0 : cone_eq r = 0}``, scaled to coordinate sum 1."""
    ineq = [(_neg(dim, j), 0) for j in range(dim)]
    eq = [(row, 0) for row in cone_eq] + [([1] * dim, 1)]
    return list(enumerate_vertices(HPolytope.build(dim, ineq, eq), cap))


def _best_ray_combination(rays: list, values: np.ndarray, dim: int) -> list[Fraction]:
    """Exact LP: maximize ``sum_j w_j values_j`` s.t. ``sum_j w_j ray_j = 1``, ``w >= 0``."""
    m = len(rays)
    ineq = [(_neg(m, j), 0) for j in range(m)]
    eq = [([rays[j][k] for j in range(m)], 1) for k in range(dim)]
    lp = LinearProgram(
        HPolytope.build(m, ineq, eq), [Fraction(float(v)) for v in values], "maximize"
    )
    res = lp_solve(lp)
    if not res.feasible:
        raise InvariantError("ray program infeasible; the identity channel should always be feasible")
    return list(res.x)


# ---------------------------------------------------------------------------
# Blackwell redundancy


def _source_blocks(joint: JointDistribution):
    chans = source_channels(joint)
    sizes = [len(c.out_alphabet) for c in chans]
    return chans, sizes


def _channels_from_rows(rows: list[list[Fraction]], chans, sizes, q_card: int):
    """Turn per-outcome rows (each concatenating s(q|x_i) over sources) into channels."""
    qa = _q_alphabet(q_card)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    per_source = []
    for i, ch in enumerate(chans):
        M = np.full((q_card, sizes[i]), Fraction(0), dtype=object)
        for q, r in enumerate(rows):
            M[q, :] = r[offs[i]:offs[i + 1]]
        per_source.append(Channel(ch.out_alphabet, qa, M))
    given_y = compose(per_source[0], chans[0])
    for i in range(1, len(chans)):
        if compose(per_source[i], chans[i]) != given_y:
            raise InvariantError("optimal garbling maps disagree on s(q|y)")
    return given_y, per_source


def _wedge_lower_bound(joint):
    try:
        return redundancy_wedge(joint)
    except Exception:  # pragma: no cover - best effort only
        return None


def _redundancy_vertices(joint, chans, sizes, q_card, cap) -> RedundancyResult:
    prior = _target_prior(joint)
    poly = build_lambda_system(prior, chans, q_card)
    V = enumerate_vertices(poly, cap)
    if not len(V):
        raise InvariantError("redundancy polytope is empty")
    pts = np.array(V.points, dtype=float)
    n1 = sizes[0]
    S1 = pts[:, : q_card * n1].reshape(len(V), q_card, n1)
    sY = S1 @ chans[0].to_float()
    vals = _information(np.array(prior, dtype=float), sY)
    best = float(vals.max())
    ties = np.flatnonzero(vals >= best - TIE_TOLERANCE)
    v = V.points[int(ties[0])]  # vertices are sorted, so this is the lexicographic minimum
    rows = []
    offs = np.concatenate([[0], np.cumsum([q_card * s for s in sizes])]).astype(int)
    for q in range(q_card):
        row = []
        for i, s in enumerate(sizes):
            row.extend(v[offs[i] + q * s: offs[i] + (q + 1) * s])
        rows.append(row)
    given_y, per_source = _channels_from_rows(rows, chans, sizes, q_card)
    value = float(_information(np.array(prior, float), given_y.to_float()))
    return RedundancyResult(
        value, given_y, per_source, q_card, len(V), "vertices", optimal_vertex_count=len(ties)
    )


def _redundancy_rays(joint, chans, sizes, cap):
    prior = np.array(_target_prior(joint), dtype=float)
    dim = sum(sizes)
    ny = len(joint.target)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    cone_eq = []
    K1 = chans[0].matrix
    for i in range(1, len(chans)):
        Ki = chans[i].matrix
        for y in range(ny):
            row = [Fraction(0)] * dim
            for x in range(sizes[i]):
                row[offs[i] + x] = Ki[x, y]
            for x in range(sizes[0]):
                row[offs[0] + x] = -K1[x, y]
            cone_eq.append(row)
    rays = _cone_rays(dim, cone_eq, cap)
    R = np.array(rays, dtype=float)
    vals = _information(prior, (R[:, : sizes[0]] @ chans[0].to_float())[:, None, :])
    w = _best_ray_combination(rays, vals, dim)
    rows = [[w[j] * x for x in rays[j]] for j in range(len(rays)) if w[j] != 0]
    return rows, len(rays)


def redundancy_star(
    joint: JointDistribution,
    *,
    q_card: int | None = None,
    method: str = "rays",
    vertex_cap: int | None = None,
) -> RedundancyResult:
    """Blackwell redundancy: the most informative common garbling of all sources.

    Parameters
    ----------
    joint : JointDistribution
        Target first, then the sources.  Zero-probability outcomes are pruned.
    q_card : int, optional
        Size of the ``Q`` alphabet.  Defaults to ``sum_i |X_i| - n + 1``,
        which is always sufficient.  Larger values are accepted (with a
        warning) and padded; smaller ones restrict the search.
    method : {"rays", "vertices"}
        Solver, see the module docstring.
    vertex_cap : int, optional
        Enumeration cap; defaults to ``PID_VERTEX_CAP`` or 5,000,000.

    Raises
    ------
    ResourceError
        If enumeration exceeds the cap.  ``partial`` then carries the wedge
        redundancy, a lower bound that is not certified optimal.
    """
    joint = _canonical(joint)
    bound = cardinality_bound(joint)
    chans, sizes = _source_blocks(joint)
    caveats = []
    if q_card is None:
        q_card = bound
    elif q_card < 1:
        raise InputError("q_card must be at least 1")
    elif q_card > bound:
        logger.warning("q_card=%d exceeds the sufficient cardinality %d; extra outcomes stay unused", q_card, bound)
        caveats.append(f"q_card {q_card} exceeds the sufficient cardinality {bound}")
    if method not in ("rays", "vertices"):
        raise InputError(f"unknown method {method!r}")
    try:
        if method == "rays":
            rows, n_rays = _redundancy_rays(joint, chans, sizes, vertex_cap)
            if len(rows) > q_card:
                caveats.append(
                    f"optimum needs {len(rows)} outcomes of Q but q_card={q_card}; enumerating vertices instead"
                )
                method = "vertices"
        if method == "vertices":
            res = _redundancy_vertices(joint, chans, sizes, q_card, vertex_cap)
            res.caveats.extend(caveats)
            return res
    except ResourceError as exc:
        raise ResourceError(
            f"{exc} (wedge redundancy {_wedge_lower_bound(joint)} bits is a non-certified lower bound)",
            cap=exc.cap,
            partial=_wedge_lower_bound(joint),
        ) from exc
    dim = sum(sizes)
    rows = rows + [[Fraction(0)] * dim for _ in range(q_card - len(rows))]
    given_y, per_source = _channels_from_rows(rows, chans, sizes, q_card)
    value = float(_information(np.array(_target_prior(joint), float), given_y.to_float()))
    return RedundancyResult(value, given_y, per_source, q_card, n_rays, "rays", caveats=caveats)


def unique_information(joint: JointDistribution, source, **kwargs) -> float:
    """``I(Y;X_i)`` minus the Blackwell redundancy.

    ``source`` is a 0-based position among the sources or a variable name.
    """
    joint = _canonical(joint)
    name = _source_name(joint, source)
    mi = mutual_information(joint, joint.target.name, name)
    return mi - redundancy_star(joint, **kwargs).value


def _source_name(joint: JointDistribution, source) -> str:
    names = [a.name for a in joint.sources]
    if isinstance(source, str):
        if source not in names:
            raise InputError(f"{source!r} is not a source; sources are {names}")
        return source
    if not isinstance(source, (int, np.integer)) or not 0 <= source < len(names):
        raise InputError(f"source index {source!r} out of range for {len(names)} sources")
    return names[int(source)]


# ---------------------------------------------------------------------------
# common-information style measures


def common_partition(joint: JointDistribution, names: Sequence[str] | None = None) -> CommonPartition:
    """Connected components linking outcomes of ``names`` that co-occur.

    Nodes are the outcomes of each listed variable; every positive-probability
    joint outcome links all of its coordinates.
    """
    names = list(names) if names is not None else [a.name for a in joint.sources]
    marg = marginalize(joint, names).reorder(names)
    sizes = [len(a) for a in marg.alphabets]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    rows, cols = [], []
    for idx, _ in marg.support():
        for k in range(1, len(idx)):
            rows.append(offs[0] + idx[0])
            cols.append(offs[k] + idx[k])
    total = int(offs[-1])
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(total, total))
    count, comp = connected_components(graph, directed=False)
    labels = tuple(tuple(int(c) for c in comp[offs[i]:offs[i + 1]]) for i in range(len(sizes)))
    return CommonPartition(labels, int(count))


def gk_common_information(pair: JointDistribution) -> tuple[float, CommonPartition]:
    """Gacs-Korner common information of a two-variable joint, in bits.

    Returns the entropy of the component label together with the partition.
    """
    if len(pair.alphabets) != 2:
        raise InputError("Gacs-Korner common information needs exactly two variables")
    pair = pair.canonical()[0]
    part = common_partition(pair, list(pair.names))
    return _component_entropy(pair, part), part


def _component_entropy(joint: JointDistribution, part: CommonPartition) -> float:
    first = marginalize(joint, joint.names[0]).pmf
    mass = [Fraction(0)] * part.count
    for k, p in enumerate(first):
        mass[part.labels[0][k]] += p
    return entropy(mass)


def redundancy_wedge(joint: JointDistribution) -> float:
    """``I(Y;Q)`` for ``Q`` the finest common deterministic function of all sources."""
    joint = _canonical(joint)
    part = common_partition(joint)
    y = joint.target.name
    pair = marginalize(joint, [y, joint.sources[0].name]).reorder([y, joint.sources[0].name])
    table = np.full((len(joint.target), part.count), Fraction(0), dtype=object)
    for (iy, ix), p in pair.support():
        table[iy, part.labels[0][ix]] += p
    qa = _q_alphabet(part.count)
    return mutual_information(JointDistribution([joint.target, qa], table, validate=False), y, "Q")


def _gh_system(joint: JointDistribution):
    """Homogeneous constraints making ``Q`` independent of ``Y`` given each source.

    Variables are ``s(q|y,x)`` for one ``q`` over the support of ``p``; the
    returned rows express ``s(q|y,x_i) - s(q|x_i) = 0`` for every source and
    every ``(y, x_i)`` with positive mass.
    """
    support = [(idx, p) for idx, p in joint.support()]
    dim = len(support)
    rows = []
    for i in range(1, len(joint.alphabets)):
        p_yx: dict = {}
        p_x: dict = {}
        for idx, p in support:
            p_yx[(idx[0], idx[i])] = p_yx.get((idx[0], idx[i]), Fraction(0)) + p
            p_x[idx[i]] = p_x.get(idx[i], Fraction(0)) + p
        for (y, x), pyx in sorted(p_yx.items()):
            row = [Fraction(0)] * dim
            for k, (idx, p) in enumerate(support):
                if idx[i] != x:
                    continue
                if idx[0] == y:
                    row[k] += p / pyx
                row[k] -= p / p_x[x]
            if any(row):
                rows.append(row)
    return support, dim, rows


def redundancy_gh(
    joint: JointDistribution,
    *,
    q_card: int | None = None,
    method: str = "rays",
    vertex_cap: int | None = None,
) -> RedundancyResult:
    """Largest ``I(Y;Q)`` with ``Q - X_i - Y`` a Markov chain for every source.

    ``Q`` is generated from the full outcome ``(y, x_1..x_n)``.  With the
    default ``method="rays"`` the supremum over all cardinalities of ``Q`` is
    computed; if the optimum needs more outcomes than ``q_card`` the vertex
    method is used at ``q_card`` instead and a caveat is recorded.
    """
    joint = _canonical(joint)
    bound = cardinality_bound(joint)
    caveats = []
    if q_card is None:
        q_card = bound
        caveats.append(f"q_card defaults to {bound}; no cardinality bound is known for this measure")
    support, dim, cone_eq = _gh_system(joint)
    ny = len(joint.target)
    prior = np.array(_target_prior(joint), dtype=float)
    # s(q|y) = sum_x p(x|y) s(q|y,x)
    lift = np.zeros((dim, ny))
    for k, (idx, p) in enumerate(support):
        lift[k, idx[0]] = float(p) / prior[idx[0]]
    qa = _q_alphabet(q_card)
    if method not in ("rays", "vertices"):
        raise InputError(f"unknown method {method!r}")
    try:
        if method == "rays":
            rays = _cone_rays(dim, cone_eq, vertex_cap)
            vals = _information(prior, (np.array(rays, float) @ lift)[:, None, :])
            w = _best_ray_combination(rays, vals, dim)
            rows = [[w[j] * x for x in rays[j]] for j in range(len(rays)) if w[j] != 0]
            examined = len(rays)
            if len(rows) > q_card:
                caveats.append(f"optimum needs {len(rows)} outcomes of Q; enumerating vertices at q_card={q_card}")
                method = "vertices"
            ties = None
        if method == "vertices":
            ineq = [(_neg(dim * q_card, j), 0) for j in range(dim * q_card)]
            eq = []
            for k in range(dim):
                eq.append(([int(j % dim == k) for j in range(dim * q_card)], 1))
            for q in range(q_card):
                for row in cone_eq:
                    full = [Fraction(0)] * (dim * q_card)
                    full[q * dim:(q + 1) * dim] = row
                    eq.append((full, 0))
            V = enumerate_vertices(HPolytope.build(dim * q_card, ineq, eq), vertex_cap)
            pts = np.array(V.points, float).reshape(len(V), q_card, dim)
            vals = _information(prior, pts @ lift)
            ties = np.flatnonzero(vals >= vals.max() - TIE_TOLERANCE)
            v = V.points[int(ties[0])]
            rows = [list(v[q * dim:(q + 1) * dim]) for q in range(q_card)]
            examined = len(V)
    except ResourceError as exc:
        raise ResourceError(str(exc), cap=exc.cap, partial=_wedge_lower_bound(joint)) from exc
    rows = rows + [[Fraction(0)] * dim for _ in range(q_card - len(rows))]
    M = np.full((q_card, ny), Fraction(0), dtype=object)
    for q, r in enumerate(rows):
        for k, (idx, p) in enumerate(support):
            M[q, idx[0]] += r[k] * p
    py = _target_prior(joint)
    for y in range(ny):
        for q in range(q_card):
            M[q, y] /= py[y]
    given_y = Channel(joint.target, qa, M)
    value = float(_information(prior, given_y.to_float()))
    return RedundancyResult(
        value,
        given_y,
        [],
        q_card,
        examined,
        method,
        optimal_vertex_count=None if ties is None else len(ties),
        caveats=caveats,
    )
