"""Union information and the quantities derived from it.

The union information is the smallest ``I_s(Y; X1..Xn)`` over couplings
``s`` whose pairwise marginals ``s(y, x_i)`` equal ``p(y, x_i)``.  The
feasible set splits into one transportation polytope per target value, and
the objective is convex, so the solver is Frank-Wolfe on that set.

Two additions make it converge to a certified tolerance in practice.

* A warm start from a conic solver (Clarabel through cvxpy).  Its float
  output is repaired into an exactly feasible coupling, the *anchor*, by an
  exact marginal correction followed by the smallest blend with the
  conditionally independent coupling that restores non-negativity.
* A Lagrangian lower bound.  For any multipliers ``lam_i(y, x_i)``

      U >= sum lam p  -  log2 max_x sum_y p(y) 2^(sum_i lam_i(y, x_i)),

  which turns the distance to the optimum into a computable certificate.
  Multipliers come from the conic solver's duals and from a weighted
  least-squares fit of the Frank-Wolfe gradient.  ``max_i I(Y;X_i)`` is a
  lower bound as well.

Every iterate is a convex combination of the anchor and exact vertices of
the polytope, so the returned coupling is exact and its pairwise marginals
match ``p`` as rationals.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, NonConvergenceError
from .geometry import HPolytope, LinearProgram, _rref, lp_solve
from .prob import JointDistribution, mutual_information

__all__ = [
    "UnionResult",
    "union_star",
    "synergy",
    "excluded_information",
    "broja_redundancy",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 100_000
GRADIENT_FLOOR = -60.0
LINE_SEARCH_STEPS = 60


@dataclass
class UnionResult:
    """Optimum of the union program.

    Attributes
    ----------
    value : float
        ``I_s(Y; X1..Xn)`` of the returned coupling, in bits.
    optimal_coupling : JointDistribution
        Exact coupling over ``(Y, X1..Xn)`` with the prescribed pairwise marginals.
    fw_gap : float
        Certified bound on ``value - optimum``.
    iterations : int
        Frank-Wolfe iterations performed after the warm start.
    lower_bound : float
        The best certified lower bound on the optimum.
    """

    value: float
    optimal_coupling: JointDistribution
    fw_gap: float
    iterations: int
    lower_bound: float
    warm_start: bool = True


class _Problem:
    """Index bookkeeping for the per-target transportation slices."""

    def __init__(self, joint: JointDistribution):
        self.joint = joint
        self.pmf = joint.pmf
        self.shape = joint.shape
        self.ny = self.shape[0]
        self.src_shape = self.shape[1:]
        self.n = len(self.src_shape)
        self.mx = int(np.prod(self.src_shape))
        exact_py = [sum(self.pmf[y].flat, Fraction(0)) for y in range(self.ny)]
        self.exact_py = exact_py
        self.py = np.array([float(v) for v in exact_py])
        # pairwise marginals p(y, x_i), exact
        self.pyx = []
        for i in range(self.n):
            axes = tuple(a for a in range(1, self.n + 1) if a != i + 1)
            m = np.sum(self.pmf, axis=axes) if axes else self.pmf
            self.pyx.append(m)
        self.slices = []
        y_of, x_of = [], []
        for y in range(self.ny):
            supp = [[x for x in range(self.src_shape[i]) if self.pyx[i][y, x] > 0] for i in range(self.n)]
            cells = list(itertools.product(*supp))
            flat = [int(np.ravel_multi_index(c, self.src_shape)) for c in cells]
            rows, rhs = [], []
            for i in range(self.n):
                for x in supp[i]:
                    rows.append([int(c[i] == x) for c in cells])
                    rhs.append(self.pyx[i][y, x])
            start = len(y_of)
            y_of.extend([y] * len(cells))
            x_of.extend(flat)
            self.slices.append(
                dict(
                    cells=cells,
                    start=start,
                    stop=len(y_of),
                    A=np.array(rows, dtype=float),
                    A_exact=rows,
                    b_exact=rhs,
                    b=np.array([float(v) for v in rhs]),
                    supp=supp,
                )
            )
        self.y_of = np.array(y_of)
        self.x_of = np.array(x_of)
        self.N = len(y_of)

    # -- objective ---------------------------------------------------------
    def value(self, s: np.ndarray) -> float:
        sx = np.bincount(self.x_of, weights=s, minlength=self.mx)
        pos = s > 0
        den = self.py[self.y_of[pos]] * sx[self.x_of[pos]]
        return max(float(np.sum(s[pos] * np.log2(s[pos] / den))), 0.0)

    def gradient(self, s: np.ndarray) -> np.ndarray:
        sx = np.bincount(self.x_of, weights=s, minlength=self.mx)
        g = np.full(self.N, GRADIENT_FLOOR)
        pos = s > 0
        g[pos] = np.log2(s[pos] / (self.py[self.y_of[pos]] * sx[self.x_of[pos]]))
        return np.maximum(g, GRADIENT_FLOOR)

    # -- exact helpers -------------------------------------------------------
    def independent_coupling(self) -> list[Fraction]:
        """``p(y) prod_i p(x_i|y)`` on every slice."""
        out = []
        for y, sl in enumerate(self.slices):
            py = self.exact_py[y]
            for c in sl["cells"]:
                v = py
                for i, x in enumerate(c):
                    v *= self.pyx[i][y, x] / py
                out.append(v)
        return out

    def repair(self, approx: np.ndarray, s0: list[Fraction]) -> list[Fraction]:
        """Exactly feasible coupling close to a float approximation."""
        out = []
        for y, sl in enumerate(self.slices):
            py = self.exact_py[y]
            cells = sl["cells"]
            t = [Fraction(max(float(v), 0.0)) for v in approx[sl["start"]:sl["stop"]]]
            base = s0[sl["start"]:sl["stop"]]
            total = sum(t, Fraction(0))
            if total == 0:
                out.extend(base)
                continue
            t = [v * py / total for v in t]
            # marginal defects, spread along the conditional product measure
            defects = []
            for i in range(self.n):
                marg = {x: Fraction(0) for x in sl["supp"][i]}
                for v, c in zip(t, cells):
                    marg[c[i]] += v
                defects.append({x: self.pyx[i][y, x] - marg[x] for x in marg})
            cond = [{x: self.pyx[i][y, x] / py for x in sl["supp"][i]} for i in range(self.n)]
            u = []
            for v, c in zip(t, cells):
                corr = Fraction(0)
                for i in range(self.n):
                    term = defects[i][c[i]]
                    if term:
                        for j in range(self.n):
                            if j != i:
                                term *= cond[j][c[j]]
                        corr += term
                u.append(v + corr)
            theta = Fraction(0)
            for uk, bk in zip(u, base):
                if uk < 0:
                    theta = max(theta, -uk / (bk - uk))
            out.extend((1 - theta) * uk + theta * bk for uk, bk in zip(u, base))
        return out

    def coupling(self, s: list[Fraction]) -> JointDistribution:
        table = np.full(self.shape, Fraction(0), dtype=object)
        for k, v in enumerate(s):
            idx = (int(self.y_of[k]),) + tuple(int(i) for i in np.unravel_index(int(self.x_of[k]), self.src_shape))
            table[idx] = v
        return JointDistribution(self.joint.alphabets, table, validate=False)

    # -- certificates --------------------------------------------------------
    def lagrangian_bound(self, lam: list[np.ndarray]) -> float:
        """Dual bound for multipliers ``lam[i][y, x_i]`` (entries off the support are ignored)."""
        total = 0.0
        log_terms = np.full((self.ny,) + self.src_shape, -np.inf)
        for y, sl in enumerate(self.slices):
            for i in range(self.n):
                for x in sl["supp"][i]:
                    total += lam[i][y, x] * float(self.pyx[i][y, x])
            if self.py[y] == 0:
                continue
            grid = np.full(self.src_shape, math.log2(self.py[y]))
            mask = np.ones(self.src_shape, dtype=bool)
            for i in range(self.n):
                shape = [1] * self.n
                shape[i] = self.src_shape[i]
                li = np.full(self.src_shape[i], -np.inf)
                li[sl["supp"][i]] = lam[i][y, sl["supp"][i]]
                grid = grid + li.reshape(shape)
                m = np.zeros(self.src_shape[i], dtype=bool)
                m[sl["supp"][i]] = True
                mask &= m.reshape(shape)
            log_terms[y] = np.where(mask, grid, -np.inf)
        per_x = np.logaddexp2.reduce(log_terms, axis=0)
        return total - float(np.max(per_x))

    def fitted_multipliers(self, s: np.ndarray, g: np.ndarray) -> list[np.ndarray]:
        """Weighted least-squares fit ``g(y, x) ~ sum_i lam_i(y, x_i)`` per slice."""
        lam = [np.zeros((self.ny, k)) for k in self.src_shape]
        for y, sl in enumerate(self.slices):
            seg = slice(sl["start"], sl["stop"])
            w = np.sqrt(np.maximum(s[seg], 0.0))
            cols = [(i, x) for i in range(self.n) for x in sl["supp"][i]]
            M = np.array([[float(c[i] == x) for (i, x) in cols] for c in sl["cells"]])
            sol, *_ = np.linalg.lstsq(M * w[:, None], g[seg] * w, rcond=None)
            for (i, x), v in zip(cols, sol):
                lam[i][y, x] = v
        return lam


def _conic_warm_start(prob: _Problem):
    """Float optimum and equality duals from Clarabel, or ``(None, [])`` on failure."""
    try:
        import cvxpy as cp
        from scipy.sparse import csr_matrix
    except ImportError:  # pragma: no cover
        return None, []
    N = prob.N
    s = cp.Variable(N, nonneg=True)
    # q_k = p(y_k) * s(x_k)
    rows, cols, vals = [], [], []
    members: dict[int, list[int]] = {}
    for k, x in enumerate(prob.x_of):
        members.setdefault(int(x), []).append(k)
    for k in range(N):
        for j in members[int(prob.x_of[k])]:
            rows.append(k)
            cols.append(j)
            vals.append(prob.py[prob.y_of[k]])
    B = csr_matrix((vals, (rows, cols)), shape=(N, N))
    cons = []
    for sl in prob.slices:
        seg = s[sl["start"]:sl["stop"]]
        cons.append(sl["A"] @ seg == sl["b"])
    objective = cp.Minimize(cp.sum(cp.rel_entr(s, B @ s)) / math.log(2))
    problem = cp.Problem(objective, cons)
    try:
        problem.solve(solver=cp.CLARABEL)
    except Exception as exc:  # solver failures only cost the warm start
        logger.debug("conic warm start failed: %s", exc)
        return None, []
    if s.value is None:
        return None, []
    duals = []
    for sign in (1.0, -1.0):
        lam = [np.zeros((prob.ny, k)) for k in prob.src_shape]
        ok = True
        for y, (sl, con) in enumerate(zip(prob.slices, cons)):
            dv = con.dual_value
            if dv is None:
                ok = False
                break
            dv = np.atleast_1d(dv)
            r = 0
            for i in range(prob.n):
                for x in sl["supp"][i]:
                    lam[i][y, x] = sign * float(dv[r])
                    r += 1
        if ok:
            duals.append(lam)
    return np.maximum(np.asarray(s.value, dtype=float), 0.0), duals


class _VertexOracle:
    """Exact minimizer of a linear function over one transportation slice."""

    def __init__(self, sl):
        self.sl = sl
        self.cache: dict[tuple, tuple] = {}

    def _exact_from_support(self, support: tuple):
        if support in self.cache:
            return self.cache[support]
        A, b = self.sl["A_exact"], self.sl["b_exact"]
        rows = [[Fraction(r[k]) for k in support] + [rhs] for r, rhs in zip(A, b)]
        R, piv = _rref(rows, len(support) + 1)
        if len(support) in piv or len(piv) < len(support):
            return None
        z = [Fraction(0)] * len(support)
        for row, c in zip(R, piv):
            z[c] = row[-1]
        if any(v < 0 for v in z):
            return None
        full = [Fraction(0)] * len(self.sl["cells"])
        for k, v in zip(support, z):
            full[k] = v
        key = tuple(k for k, v in zip(support, z) if v != 0)
        out = (key, tuple(full))
        self.cache[support] = out
        return out

    def minimize(self, cost: np.ndarray):
        sl = self.sl
        if len(sl["cells"]) == 1:
            return self._exact_from_support((0,))
        res = linprog(cost, A_eq=sl["A"], b_eq=sl["b"], bounds=(0, None), method="highs-ds")
        if res.status == 0:
            support = tuple(int(k) for k in np.flatnonzero(res.x > 1e-13))
            got = self._exact_from_support(support)
            if got is not None:
                return got
        # exact fallback
        d = len(sl["cells"])
        ineq = [([-int(j == k) for k in range(d)], 0) for j in range(d)]
        eq = list(zip(sl["A_exact"], sl["b_exact"]))
        lp = LinearProgram(HPolytope.build(d, ineq, eq), [Fraction(float(c)) for c in cost])
        sol = lp_solve(lp)
        key = tuple(k for k, v in enumerate(sol.x) if v != 0)
        return key, tuple(sol.x)


def _line_search(prob: _Problem, x: np.ndarray, d: np.ndarray) -> float:
    def slope(gamma):
        return float(np.dot(prob.gradient(x + gamma * d), d))

    if slope(1.0) <= 0:
        return 1.0
    if slope(0.0) >= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(LINE_SEARCH_STEPS):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo


def union_star(
    joint: JointDistribution,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    warm_start: bool = True,
) -> UnionResult:
    """Union information ``min I_s(Y; X1..Xn)`` subject to ``s(y, x_i) = p(y, x_i)``.

    Parameters
    ----------
    joint : JointDistribution
        Target first, then sources.  Zero-probability outcomes are pruned.
    tol : float
        Required certified gap, in bits.
    max_iter : int
        Frank-Wolfe iteration budget after the start point.
    warm_start : bool
        Start from the repaired conic solution (default) instead of the
        conditionally independent coupling.

    Raises
    ------
    NonConvergenceError
        If the certified gap is still above ``tol`` after ``max_iter``
        iterations.  The error carries the best value and gap.
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    if max_iter < 0:
        raise InputError("max_iter must be non-negative")
    joint = joint.canonical()[0]
    if joint.n_sources < 1:
        raise InputError("need at least one source")
    prob = _Problem(joint)
    y = joint.target.name
    lower = max(mutual_information(joint, y, a.name) for a in joint.sources)

    s0 = prob.independent_coupling()
    anchor = s0
    if warm_start:
        approx, duals = _conic_warm_start(prob)
        if approx is not None:
            anchor = prob.repair(approx, s0)
        for lam in duals:
            lower = max(lower, prob.lagrangian_bound(lam))
    anchor_f = np.array([float(v) for v in anchor])
    oracles = [_VertexOracle(sl) for sl in prob.slices]
    vertices: dict[tuple, np.ndarray] = {}
    exact_vertices: dict[tuple, list] = {}
    weights: dict = {"anchor": 1.0}

    def lmo(g):
        key, parts = [], []
        for sl, oracle in zip(prob.slices, oracles):
            k, v = oracle.minimize(g[sl["start"]:sl["stop"]])
            key.append(k)
            parts.append(v)
        key = tuple(key)
        if key not in vertices:
            exact_vertices[key] = [v for part in parts for v in part]
            vertices[key] = np.array([float(v) for v in exact_vertices[key]])
        return key

    x = anchor_f.copy()
    best = (prob.value(x), dict(weights), x)
    gap = math.inf
    it = 0
    while True:
        fx = prob.value(x)
        if fx < best[0]:
            best = (fx, dict(weights), x)
        g = prob.gradient(x)
        lower = max(lower, prob.lagrangian_bound(prob.fitted_multipliers(x, g)))
        gap = max(best[0] - lower, 0.0)
        if gap <= tol or it >= max_iter:
            break
        key = lmo(g)
        v = vertices[key]
        d = v - x
        if float(np.dot(g, -d)) <= 0:
            # no descent direction left; the certificate decides convergence
            it += 1
            break
        gamma = _line_search(prob, x, d)
        it += 1
        if gamma == 0.0:
            break
        x = x + gamma * d
        weights = {k: (1 - gamma) * w for k, w in weights.items()}
        weights[key] = weights.get(key, 0.0) + gamma

    fbest, wbest, xbest = best
    if gap <= tol:
        # the optimum is often attained at a single vertex; prefer it when it is no worse
        key = lmo(prob.gradient(xbest))
        if prob.value(vertices[key]) <= fbest:
            wbest = {key: 1.0}
    exact_w = {k: Fraction(w) for k, w in wbest.items() if w > 0}
    total = sum(exact_w.values(), Fraction(0))
    coupling = [Fraction(0)] * prob.N
    for k, w in exact_w.items():
        pts = anchor if k == "anchor" else exact_vertices[k]
        w = w / total
        for j in range(prob.N):
            if pts[j]:
                coupling[j] += w * pts[j]
    value = prob.value(np.array([float(v) for v in coupling]))
    gap = max(value - lower, 0.0)
    if gap > tol:
        raise NonConvergenceError(
            f"union information did not reach gap {tol:g} within {max_iter} iterations (gap {gap:.3g})",
            value=value,
            gap=gap,
            iterations=it,
        )
    return UnionResult(value, prob.coupling(coupling), gap, it, lower, warm_start)


def _total_information(joint: JointDistribution) -> float:
    joint = joint.canonical()[0]
    return mutual_information(joint, joint.target.name, [a.name for a in joint.sources])


def synergy(joint: JointDistribution, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """``I(Y; X1..Xn)`` minus the union information."""
    return _total_information(joint) - union_star(joint, tol, max_iter).value


def excluded_information(
    joint: JointDistribution, source, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> float:
    """Union information minus ``I(Y; X_i)``; ``source`` is a 0-based index or a name."""
    from .redundancy import _source_name

    joint = joint.canonical()[0]
    name = _source_name(joint, source)
    return union_star(joint, tol, max_iter).value - mutual_information(joint, joint.target.name, name)


def broja_redundancy(joint: JointDistribution, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    """``I(Y;X1) + I(Y;X2)`` minus the union information (two sources only)."""
    joint = joint.canonical()[0]
    if joint.n_sources != 2:
        raise InputError("this redundancy is defined for exactly two sources")
    y = joint.target.name
    mi = sum(mutual_information(joint, y, a.name) for a in joint.sources)
    return mi - union_star(joint, tol, max_iter).value
