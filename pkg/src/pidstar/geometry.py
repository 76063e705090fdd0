"""Exact polyhedral computation over the rationals.

Two kernels live here:

* :func:`enumerate_vertices` -- the double description method.  Equalities
  are eliminated first by restricting to the affine solution space, then the
  remaining inequalities are processed one at a time on the homogenized cone.
  Rays are kept as primitive integer vectors, so no rounding ever happens.
* :func:`lp_solve` -- a dense two-phase primal simplex on Fractions with
  Bland's anti-cycling rule.

Both are deterministic: constraints are put in a canonical order before
processing, and Bland's rule fixes the pivot path.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .errors import InputError, InvariantError, ResourceError

__all__ = [
    "HPolytope",
    "VertexSet",
    "LinearProgram",
    "LPResult",
    "enumerate_vertices",
    "lp_solve",
    "DEFAULT_VERTEX_CAP",
    "default_vertex_cap",
]

logger = logging.getLogger(__name__)

DEFAULT_VERTEX_CAP = 5_000_000
_PRIME = (1 << 61) - 1


def default_vertex_cap() -> int:
    """Vertex cap from ``PID_VERTEX_CAP`` if set, else :data:`DEFAULT_VERTEX_CAP`."""
    env = os.environ.get("PID_VERTEX_CAP")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise InputError(f"PID_VERTEX_CAP={env!r} is not an integer") from None
        if cap < 1:
            raise InputError("PID_VERTEX_CAP must be positive")
        return cap
    return DEFAULT_VERTEX_CAP


def _frac_vec(v) -> tuple[Fraction, ...]:
    return tuple(x if isinstance(x, Fraction) else Fraction(x) for x in v)


@dataclass(frozen=True)
class HPolytope:
    """``{x : A x <= b, C x = e}`` in ``dim`` rational coordinates."""

    dim: int
    A: tuple = ()
    b: tuple = ()
    C: tuple = ()
    e: tuple = ()

    def __post_init__(self):
        A = tuple(_frac_vec(r) for r in self.A)
        C = tuple(_frac_vec(r) for r in self.C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "b", _frac_vec(self.b))
        object.__setattr__(self, "e", _frac_vec(self.e))
        if len(self.A) != len(self.b) or len(self.C) != len(self.e):
            raise InputError("row/right-hand-side count mismatch")
        for r in A + C:
            if len(r) != self.dim:
                raise InputError(f"constraint row of length {len(r)} in dimension {self.dim}")

    @classmethod
    def build(cls, dim: int, inequalities=(), equalities=()) -> "HPolytope":
        """Build from ``[(a, b), ...]`` and ``[(c, e), ...]`` pairs."""
        ineq = list(inequalities)
        eq = list(equalities)
        return cls(
            dim,
            tuple(a for a, _ in ineq),
            tuple(b for _, b in ineq),
            tuple(c for c, _ in eq),
            tuple(e for _, e in eq),
        )

    def contains(self, x) -> bool:
        x = _frac_vec(x)
        return all(_dot(a, x) <= b for a, b in zip(self.A, self.b)) and all(
            _dot(c, x) == e for c, e in zip(self.C, self.e)
        )

    def tight_rows(self, x) -> list[int]:
        x = _frac_vec(x)
        return [i for i, (a, b) in enumerate(zip(self.A, self.b)) if _dot(a, x) == b]


@dataclass(frozen=True)
class VertexSet:
    """Lexicographically sorted, pairwise distinct rational points."""

    dim: int
    points: tuple = ()

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]


@dataclass(frozen=True)
class LinearProgram:
    polytope: HPolytope
    objective: tuple
    sense: str = "minimize"

    def __post_init__(self):
        obj = _frac_vec(self.objective)
        object.__setattr__(self, "objective", obj)
        if len(obj) != self.polytope.dim:
            raise InputError("objective length differs from polytope dimension")
        if self.sense not in ("minimize", "maximize"):
            raise InputError(f"sense must be 'minimize' or 'maximize', got {self.sense!r}")


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible"
    x: tuple | None = None
    value: Fraction | None = None
    pivots: int = field(default=0, compare=False)

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _idot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _primitive(v) -> tuple[int, ...]:
    g = reduce(math.gcd, v, 0)
    if g > 1:
        return tuple(x // g for x in v)
    return tuple(v)


def _integerize(row: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to a primitive integer vector (same direction)."""
    den = reduce(lambda a, f: a * f.denominator // math.gcd(a, f.denominator), row, 1)
    return _primitive([int(f * den) for f in row])


def _rref(rows: list[list[Fraction]], ncols: int):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        if pv != 1:
            M[r] = [x / pv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def _affine_solution_space(C, e, dim):
    """Solve ``C x = e``: return ``(x0, N)`` with columns of N spanning the null space,
    or ``None`` if inconsistent."""
    if not C:
        x0 = [Fraction(0)] * dim
        N = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
        return x0, N
    aug = [list(c) + [ei] for c, ei in zip(C, e)]
    R, piv = _rref(aug, dim + 1)
    if dim in piv:
        return None
    x0 = [Fraction(0)] * dim
    for row, c in zip(R, piv):
        x0[c] = row[dim]
    free = [j for j in range(dim) if j not in piv]
    N = [[Fraction(0)] * len(free) for _ in range(dim)]
    for k, f in enumerate(free):
        N[f][k] = Fraction(1)
        for row, c in zip(R, piv):
            N[c][k] = -row[f]
    return x0, N


def _rank_mod_p(rows) -> int:
    M = [[x % _PRIME for x in r] for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], _PRIME - 2, _PRIME)
        M[rank] = [(x * inv) % _PRIME for x in M[rank]]
        for i in range(rank + 1, len(M)):
            if M[i][c]:
                f = M[i][c]
                M[i] = [(x - f * y) % _PRIME for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def _rank_exact(rows) -> int:
    if not rows:
        return 0
    return len(_rref([[Fraction(x) for x in r] for r in rows], len(rows[0]))[1])


def _rank(rows) -> int:
    # rank mod p never exceeds the rational rank; fall back to exact when they could differ
    return _rank_mod_p(rows)


# ---------------------------------------------------------------------------
# double description


def _dd_cone(H: list[tuple[int, ...]], D: int, cap: int):
    """Extreme rays and lineality of ``{z in R^D : h . z >= 0 for h in H}``.

    Returns ``(lineality, rays)`` as lists of primitive integer tuples.
    """
    lineality = [tuple(int(i == j) for j in range(D)) for i in range(D)]
    rays: list[tuple[int, ...]] = []
    masks: list[int] = []
    processed: list[tuple[int, ...]] = []

    for j, h in enumerate(H):
        bit = 1 << j
        # absorb into lineality if possible
        piv = next((l for l in lineality if _idot(h, l) != 0), None)
        if piv is not None:
            hp = _idot(h, piv)
            if hp < 0:
                piv = tuple(-x for x in piv)
                hp = -hp
            new_lin = []
            for l in lineality:
                if l is piv or l == tuple(-x for x in piv):
                    continue
                hl = _idot(h, l)
                if hl:
                    l = _primitive([hp * a - hl * b for a, b in zip(l, piv)])
                new_lin.append(l)
            all_prev = bit - 1
            new_rays, new_masks = [], []
            for r, m in zip(rays, masks):
                hr = _idot(h, r)
                if hr:
                    r = _primitive([hp * a - hr * b for a, b in zip(r, piv)])
                new_rays.append(r)
                new_masks.append(m | bit)
            new_rays.append(piv)
            new_masks.append(all_prev)
            lineality, rays, masks = new_lin, new_rays, new_masks
            processed.append(h)
            continue

        vals = [_idot(h, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        processed.append(h)
        if not neg:
            for i in zero:
                masks[i] |= bit
            continue

        need = D - 2 - len(lineality)
        new_rays = [rays[i] for i in pos] + [rays[i] for i in zero]
        new_masks = [masks[i] for i in pos] + [masks[i] | bit for i in zero]
        all_masks = masks
        for p in pos:
            mp = masks[p]
            for n in neg:
                common = mp & masks[n]
                if bin(common).count("1") < need:
                    continue
                # combinatorial filter: another ray tight on all common constraints
                if any(
                    (all_masks[k] & common) == common
                    for k in range(len(rays))
                    if k != p and k != n
                ):
                    continue
                rows = [processed[k] for k in range(j) if common >> k & 1]
                rk = _rank(rows) if rows else 0
                if rk != need and rows:
                    rk = _rank_exact(rows)
                if rk != need:
                    continue
                vp, vn = vals[p], -vals[n]
                r = _primitive([vp * a + vn * b for a, b in zip(rays[n], rays[p])])
                new_rays.append(r)
                new_masks.append(common | bit)
                if len(new_rays) > cap:
                    raise ResourceError(
                        f"vertex enumeration exceeded the cap of {cap} rays", cap=cap
                    )
        rays, masks = new_rays, new_masks
    return lineality, rays


def enumerate_vertices(poly: HPolytope, cap: int | None = None) -> VertexSet:
    """All vertices of a bounded polytope, exactly, in lexicographic order.

    Parameters
    ----------
    poly : HPolytope
        The system ``A x <= b, C x = e``.  Must describe a bounded set.
    cap : int, optional
        Maximum number of (intermediate) rays before giving up with
        :class:`~pidstar.errors.ResourceError`.  Defaults to
        :func:`default_vertex_cap`.

    Returns
    -------
    VertexSet
        Empty when the system is infeasible.

    Raises
    ------
    InputError
        If the polytope is unbounded.
    ResourceError
        If the cap is exceeded.
    """
    cap = default_vertex_cap() if cap is None else cap
    d = poly.dim
    sol = _affine_solution_space(poly.C, poly.e, d)
    if sol is None:
        return VertexSet(d, ())
    x0, N = sol
    k = len(N[0]) if N else 0

    def lift(z):
        return tuple(x0[i] + sum((N[i][j] * z[j] for j in range(k)), Fraction(0)) for i in range(d))

    # inequalities in reduced coordinates: a'.z <= b'
    H = set()
    for a, b in zip(poly.A, poly.b):
        ar = [sum((a[i] * N[i][j] for i in range(d) if a[i]), Fraction(0)) for j in range(k)]
        br = b - _dot(a, x0)
        if not any(ar):
            if br < 0:
                return VertexSet(d, ())
            continue
        H.add(_integerize([br] + [-x for x in ar]))
    if k == 0:
        return VertexSet(d, (tuple(x0),))

    H = [tuple(int(i == 0) for i in range(k + 1))] + sorted(H)
    lineality, rays = _dd_cone(H, k + 1, cap)

    verts = [r for r in rays if r[0] > 0]
    if not verts:
        return VertexSet(d, ())
    if lineality or any(r[0] == 0 for r in rays):
        raise InputError("polytope is unbounded")
    points = sorted({lift([Fraction(x, r[0]) for x in r[1:]]) for r in verts})
    if len(points) > cap:
        raise ResourceError(f"vertex count {len(points)} exceeds the cap of {cap}", cap=cap)
    return VertexSet(d, tuple(points))


# ---------------------------------------------------------------------------
# simplex


def _pivot(T, basis, r, c):
    row = T[r]
    pv = row[c]
    if pv != 1:
        row = [x / pv for x in row]
        T[r] = row
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                T[i] = [x - f * y for x, y in zip(other, row)]
    basis[r] = c


def _run_simplex(T, basis, allowed):
    """Bland's rule on tableau ``T``.

    The last column is the rhs and the last row holds reduced costs
    (minimization: enter on a negative reduced cost).
    """
    pivots = 0
    m = len(T) - 1
    while True:
        cost = T[m]
        enter = next((j for j in allowed if cost[j] < 0), None)
        if enter is None:
            return pivots
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise InvariantError("linear program is unbounded (polytope assumed bounded)")
        _pivot(T, basis, best[1], enter)
        pivots += 1


def lp_solve(lp: LinearProgram) -> LPResult:
    """Solve a linear program exactly.

    Returns an :class:`LPResult` with status ``"optimal"`` (exact optimal
    basic solution and value) or ``"infeasible"``.  Bland's rule guarantees
    termination and makes the reported solution deterministic.
    """
    poly = lp.polytope
    d = poly.dim
    # detect explicit non-negativity rows  -c * x_j <= 0
    nonneg = set()
    general = []
    for a, b in zip(poly.A, poly.b):
        nz = [i for i, v in enumerate(a) if v != 0]
        if len(nz) == 1 and b == 0 and a[nz[0]] < 0:
            nonneg.add(nz[0])
        else:
            general.append((a, b))
    # variable layout: per original coordinate either one column (x>=0) or two (x+, x-)
    cols = []  # (orig index, sign)
    for i in range(d):
        cols.append((i, 1))
        if i not in nonneg:
            cols.append((i, -1))
    nx = len(cols)
    ns = len(general)
    rows = []
    for k, (a, b) in enumerate(general):
        r = [a[i] * s for i, s in cols] + [Fraction(int(k == t)) for t in range(ns)]
        rows.append((r, b))
    for c, e in zip(poly.C, poly.e):
        rows.append(([c[i] * s for i, s in cols] + [Fraction(0)] * ns, e))
    nvar = nx + ns

    # phase 1: artificials where no slack can serve as the initial basis
    T = []
    basis = []
    art_cols = []
    n_art = sum(1 for k, (r, rhs) in enumerate(rows) if not (k < ns and rhs >= 0))
    width = nvar + n_art
    a_idx = nvar
    for k, (r, rhs) in enumerate(rows):
        if rhs < 0:
            r = [-x for x in r]
            rhs = -rhs
        row = r + [Fraction(0)] * n_art + [rhs]
        if k < ns and row[nx + k] == 1:
            basis.append(nx + k)
        else:
            row[a_idx] = Fraction(1)
            basis.append(a_idx)
            art_cols.append(a_idx)
            a_idx += 1
        T.append(row)
    total_pivots = 0
    if art_cols:
        cost = [Fraction(0)] * (width + 1)
        for c in art_cols:
            cost[c] = Fraction(1)
        for i, bvar in enumerate(basis):
            if bvar in art_cols:
                cost = [x - y for x, y in zip(cost, T[i])]
        T.append(cost)
        total_pivots += _run_simplex(T, basis, range(width))
        phase1 = T.pop()
        if -phase1[-1] > 0:
            return LPResult("infeasible", pivots=total_pivots)
        # drive artificials out of the basis, dropping redundant rows
        art = set(art_cols)
        i = 0
        while i < len(T):
            if basis[i] in art:
                c = next((j for j in range(nvar) if T[i][j] != 0), None)
                if c is None:
                    del T[i]
                    del basis[i]
                    continue
                _pivot(T, basis, i, c)
            i += 1
        T = [row[:nvar] + [row[-1]] for row in T]

    obj = lp.objective if lp.sense == "minimize" else tuple(-x for x in lp.objective)
    cost = [obj[i] * s for i, s in cols] + [Fraction(0)] * ns + [Fraction(0)]
    for i, bvar in enumerate(basis):
        if cost[bvar]:
            f = cost[bvar]
            cost = [x - f * y for x, y in zip(cost, T[i])]
    T.append(cost)
    total_pivots += _run_simplex(T, basis, range(nvar))
    T.pop()
    y = [Fraction(0)] * nvar
    for i, bvar in enumerate(basis):
        y[bvar] = T[i][-1]
    x = [Fraction(0)] * d
    for (i, s), v in zip(cols, y[:nx]):
        x[i] += s * v
    x = _purify(poly, x)
    return LPResult("optimal", x, _dot(lp.objective, x), total_pivots)


def _purify(poly: HPolytope, x: list[Fraction]) -> tuple[Fraction, ...]:
    """Walk an optimal point to a vertex of the same optimal face.

    A basic solution with a split free variable parked at zero need not be a
    vertex.  Any direction in the null space of the active rows can be followed
    both ways, so the objective is constant along it; stepping until a new row
    becomes active strictly raises the active rank.
    """
    d = poly.dim
    while True:
        active = [list(poly.A[i]) for i in poly.tight_rows(x)] + [list(c) for c in poly.C]
        sol = _affine_solution_space(active, [Fraction(0)] * len(active), d) if active else None
        if active:
            N = sol[1]
            k = len(N[0]) if N else 0
        else:
            N = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
            k = d
        if k == 0:
            return tuple(x)
        v = [N[i][0] for i in range(d)]
        steps = [
            (b - _dot(a, x)) / av
            for a, b in zip(poly.A, poly.b)
            if (av := _dot(a, v)) > 0
        ]
        if not steps:
            v = [-t for t in v]
            steps = [
                (b - _dot(a, x)) / av
                for a, b in zip(poly.A, poly.b)
                if (av := _dot(a, v)) > 0
            ]
        if not steps:
            raise InvariantError("optimal face contains a line (polytope assumed bounded)")
        t = min(steps)
        x = [xi + t * vi for xi, vi in zip(x, v)]
