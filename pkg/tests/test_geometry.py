import itertools
from fractions import Fraction

import numpy as np
import pytest

from generators import random_polytope
from pidstar.errors import InputError, ResourceError
from pidstar.geometry import (
    HPolytope,
    LinearProgram,
    _rank_exact,
    _rref,
    default_vertex_cap,
    enumerate_vertices,
    lp_solve,
)


def unit_box(d):
    ineq = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        ineq += [(e, 1), ([-v for v in e], 0)]
    return HPolytope.build(d, ineq)


def brute_force_vertices(poly):
    """Every feasible point fixed by a full-rank choice of active rows."""
    d = poly.dim
    rows = list(zip(poly.A, poly.b))
    eqs = [list(c) + [e] for c, e in zip(poly.C, poly.e)]
    found = set()
    for k in range(0, d + 1):
        for S in itertools.combinations(range(len(rows)), k):
            M = [list(rows[i][0]) + [rows[i][1]] for i in S] + eqs
            if not M:
                continue
            R, piv = _rref(M, d + 1)
            if d in piv or len(piv) < d:
                continue
            x = [Fraction(0)] * d
            for row, c in zip(R, piv):
                x[c] = row[d]
            if poly.contains(x):
                found.add(tuple(x))
    return sorted(found)


class TestVertexEnumeration:
    def test_unit_square(self):
        V = enumerate_vertices(unit_box(2))
        assert [tuple(map(int, v)) for v in V] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_simplex_with_equality(self):
        poly = HPolytope.build(3, [([-1, 0, 0], 0), ([0, -1, 0], 0), ([0, 0, -1], 0)], [([1, 1, 1], 1)])
        assert len(enumerate_vertices(poly)) == 3

    def test_infeasible_is_empty(self):
        poly = HPolytope.build(1, [([1], 0), ([-1], -1)])
        assert len(enumerate_vertices(poly)) == 0
        assert not lp_solve(LinearProgram(poly, [1])).feasible

    def test_inconsistent_equalities_are_empty(self):
        poly = HPolytope.build(2, [([-1, 0], 0)], [([1, 1], 1), ([1, 1], 2)])
        assert len(enumerate_vertices(poly)) == 0

    def test_unbounded_rejected(self):
        poly = HPolytope.build(2, [([-1, 0], 0), ([0, -1], 0)])
        with pytest.raises(InputError):
            enumerate_vertices(poly)

    def test_point_polytope(self):
        poly = HPolytope.build(2, [([1, 0], 5)], [([1, 0], 1), ([0, 1], 2)])
        assert list(enumerate_vertices(poly)) == [(Fraction(1), Fraction(2))]

    def test_cap_enforced(self):
        with pytest.raises(ResourceError) as info:
            enumerate_vertices(unit_box(4), cap=5)
        assert info.value.cap == 5

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("PID_VERTEX_CAP", "7")
        assert default_vertex_cap() == 7
        with pytest.raises(ResourceError):
            enumerate_vertices(unit_box(4))
        monkeypatch.setenv("PID_VERTEX_CAP", "zero")
        with pytest.raises(InputError):
            default_vertex_cap()

    def test_degenerate_pyramid(self):
        # apex of a square pyramid lies on four facets
        ineq = [([-1, 0, 0], 0), ([0, -1, 0], 0), ([0, 0, -1], 0), ([1, 0, 1], 2), ([0, 1, 1], 2)]
        ineq += [([-1, 0, 1], 0), ([0, -1, 1], 0)]
        poly = HPolytope.build(3, ineq)
        assert list(enumerate_vertices(poly)) == brute_force_vertices(poly)

    def test_deterministic_under_row_order(self):
        rng = np.random.default_rng(3)
        poly = random_polytope(rng, 3)
        perm = list(zip(poly.A, poly.b))[::-1]
        shuffled = HPolytope(poly.dim, [a for a, _ in perm], [b for _, b in perm], poly.C, poly.e)
        assert enumerate_vertices(poly) == enumerate_vertices(shuffled)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(100 + seed)
        for _ in range(25):
            poly = random_polytope(rng, 3)
            assert list(enumerate_vertices(poly)) == brute_force_vertices(poly)


class TestLinearProgramming:
    def test_box_maximum(self):
        res = lp_solve(LinearProgram(unit_box(2), [1, 1], "maximize"))
        assert res.value == 2 and res.x == (1, 1)

    def test_free_variable_solution_is_a_vertex(self):
        # the optimum face is an edge; the reported point must be one of its ends
        poly = HPolytope.build(2, [([0, 1], 2), ([0, -1], 2), ([1, 0], 3), ([-1, 0], 3)])
        res = lp_solve(LinearProgram(poly, [0, 1], "maximize"))
        assert res.x in enumerate_vertices(poly).points

    def test_degenerate_cycling_example(self):
        # Beale's classic cycling instance; Bland's rule must terminate
        c = [Fraction(-3, 4), 150, Fraction(-1, 50), 6]
        A = [[Fraction(1, 4), -60, Fraction(-1, 25), 9], [Fraction(1, 2), -90, Fraction(-1, 50), 3], [0, 0, 1, 0]]
        b = [0, 0, 1]
        ineq = list(zip(A, b)) + [([-int(i == j) for j in range(4)], 0) for i in range(4)]
        ineq.append(([1, 1, 1, 1], 1000))
        res = lp_solve(LinearProgram(HPolytope.build(4, ineq), c))
        assert res.value == Fraction(-1, 20)

    def test_redundant_equalities(self):
        poly = HPolytope.build(2, [([-1, 0], 0), ([0, -1], 0)], [([1, 1], 1), ([2, 2], 2)])
        res = lp_solve(LinearProgram(poly, [1, 2]))
        assert res.value == 1 and res.x == (1, 0)


def test_vertex_lp_cross_validation():
    """LP optimum equals the best vertex, the LP point is a vertex, feasibility agrees."""
    rng = np.random.default_rng(2024)
    for _ in range(200):
        poly = random_polytope(rng)
        V = enumerate_vertices(poly)
        c = [int(v) for v in rng.integers(-5, 6, size=poly.dim)]
        res = lp_solve(LinearProgram(poly, c, "maximize"))
        assert res.feasible == (len(V) > 0)
        if not len(V):
            continue
        best = max(sum(Fraction(a) * b for a, b in zip(c, v)) for v in V)
        assert res.value == best
        assert res.x in V.points
        for v in V:
            assert poly.contains(v)
            active = [list(poly.A[i]) for i in poly.tight_rows(v)] + [list(r) for r in poly.C]
            assert _rank_exact(active) == poly.dim
