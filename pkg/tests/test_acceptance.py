"""Acceptance criteria, each run at its stated tolerance.

Every test carries a ``criterion`` mark; the terminal summary prints one
PASS/FAIL line per criterion with a short detail string.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from generators import (
    append_source,
    labels,
    random_channel,
    random_joint,
    random_pair_joint,
    random_pmf,
    random_polytope,
    random_unstructured,
)
from pidstar import (
    Alphabet,
    Channel,
    JointDistribution,
    broja_redundancy,
    condition,
    enumerate_vertices,
    generate_fixture,
    gk_common_information,
    is_garbling,
    marginalize,
    mutual_information,
    redundancy_gh,
    redundancy_star,
    redundancy_wedge,
    synergy,
    union_star,
)
from pidstar.geometry import LinearProgram, _rank_exact, lp_solve
from pidstar.redundancy import cardinality_bound, source_channels


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def check(record, results):
    """``results`` is a list of ``(label, got, want, tol)``; records a detail line and asserts."""
    bad = [(l, g, w, t) for l, g, w, t in results if not abs(g - w) <= t]
    record("detail", f"{len(results) - len(bad)}/{len(results)} values within tolerance")
    assert not bad, "; ".join(f"{l}: got {g:.6g}, want {w:.6g} (tol {t:g})" for l, g, w, t in bad)


def sources(joint):
    return [a.name for a in joint.sources]


def block_copy():
    """Y = (X1, X2) with a two-block support, so the common information is nonzero."""
    alphs = [Alphabet("Y", ("00", "01", "22")), Alphabet("X1", ("0", "2")), Alphabet("X2", ("0", "1", "2"))]
    q = Fraction(1, 4)
    return JointDistribution.from_outcomes(alphs, {("00", "0", "0"): q, ("01", "0", "1"): q, ("22", "2", "2"): 2 * q})


@pytest.mark.criterion(1, "two-source gate values")
def test_two_source_gates(record_property):
    AND, SUM, COPY = generate_fixture("and"), generate_fixture("sum"), generate_fixture("copy")
    cc = block_copy()
    gk_cc, _ = gk_common_information(marginalize(cc, ["X1", "X2"]))
    gk_copy, _ = gk_common_information(marginalize(COPY, ["X1", "X2"]))
    check(
        record_property,
        [
            ("R*(AND)", redundancy_star(AND).value, 0.311, 1e-3),
            ("R*(SUM)", redundancy_star(SUM).value, 0.5, 1e-3),
            ("R*(UNQ)", redundancy_star(generate_fixture("unq(0.1)")).value, 1 - h2(0.1), 1e-6),
            ("R*(COPY)", redundancy_star(COPY).value, 0.0, 1e-3),
            ("R^(AND)", redundancy_wedge(AND), 0.0, 1e-3),
            ("R^(COPY)", redundancy_wedge(COPY), gk_copy, 1e-3),
            ("R^(block COPY)", redundancy_wedge(cc), gk_cc, 1e-3),
            ("R_GH(AND)", redundancy_gh(AND).value, 0.123, 1e-3),
            ("R_GH(SUM)", redundancy_gh(SUM).value, 0.0, 1e-3),
            ("R_BROJA(AND)", broja_redundancy(AND), 0.311, 1e-3),
            ("R_BROJA(SUM)", broja_redundancy(SUM), 0.5, 1e-3),
        ],
    )


@pytest.mark.criterion(2, "three-source gate values")
def test_three_source_gates(record_property):
    check(
        record_property,
        [
            ("R*(AND3)", redundancy_star(generate_fixture("and3")).value, 0.138, 1e-3),
            ("R*(SUM3)", redundancy_star(generate_fixture("sum3")).value, 0.311, 1e-3),
            ("R*(overlap)", redundancy_star(generate_fixture("overlap")).value, 1.0, 1e-3),
            ("R^(overlap)", redundancy_wedge(generate_fixture("overlap")), 1.0, 1e-3),
        ],
    )


@pytest.mark.criterion(3, "union and synergy values")
def test_union_values(record_property):
    check(
        record_property,
        [
            ("U*(COPY)", union_star(generate_fixture("copy")).value, 2.0, 1e-6),
            ("U*(XOR)", union_star(generate_fixture("xor")).value, 0.0, 1e-6),
            ("S(AND)", synergy(generate_fixture("and")), 0.5, 1e-3),
            ("S(COPY)", synergy(generate_fixture("copy")), 0.0, 1e-6),
            ("U*(AND)", union_star(generate_fixture("and")).value, 0.3113, 1e-3),
        ],
    )


@pytest.mark.criterion(4, "zero unique / zero excluded information iff garbling (200 joints)")
def test_garbling_characterization(record_property):
    rng = np.random.default_rng(20240501)
    violations, held_r, held_u, n_cases = [], 0, 0, 0
    for t in range(200):
        j = random_joint(rng)
        chans = source_channels(j)
        r = redundancy_star(j, method="rays").value
        u = union_star(j).value
        for i, name in enumerate(sources(j)):
            n_cases += 1
            mi = mutual_information(j, "Y", name)
            others = [k for k in range(len(chans)) if k != i]
            below = all(is_garbling(chans[i], chans[k]).holds for k in others)
            above = all(is_garbling(chans[k], chans[i]).holds for k in others)
            held_r += below
            held_u += above
            if (abs(mi - r) <= 1e-9) != below:
                violations.append(f"joint {t} source {name}: redundancy gap {mi - r:.3g}, garbling {below}")
            if (abs(mi - u) <= 1e-6) != above:
                violations.append(f"joint {t} source {name}: union gap {u - mi:.3g}, garbling {above}")
    record_property(
        "detail",
        f"{n_cases} (joint, source) cases, {len(violations)} violations; "
        f"garbling held {held_r}x (redundancy side), {held_u}x (union side)",
    )
    assert not violations, violations[:5]


def _split_channel(rng, alph: Alphabet, name: str) -> Channel:
    """x -> (x, b) with a random bit b, so the input is a deterministic function of the output."""
    out = Alphabet(name, tuple(f"{x}.{b}" for x in alph.labels for b in "01"))
    m = np.full((len(out), len(alph)), Fraction(0), dtype=object)
    for i in range(len(alph)):
        w = Fraction(int(rng.integers(0, 5)), 4)
        m[2 * i, i], m[2 * i + 1, i] = w, 1 - w
    return Channel(alph, out, m)


def _random_out(rng, alph: Alphabet, name: str, k: int) -> Channel:
    return random_channel(rng, alph, Alphabet(name, labels(k)))


def _independent_source(joint: JointDistribution, rng) -> JointDistribution:
    y = joint.target
    col = random_pmf(rng, 2)
    m = np.array([[col[0]] * len(y), [col[1]] * len(y)], dtype=object)
    return append_source(joint, "Z", Channel(y, Alphabet("Z", ("0", "1")), m), "Y")


@pytest.mark.criterion(5, "axioms, target equality and null equality (100 joints)")
def test_axioms(record_property):
    rng = np.random.default_rng(7)
    fails = []

    def expect(ok, what):
        if not ok:
            fails.append(what)

    for t in range(100):
        j = random_joint(rng, n=int(rng.integers(2, 4)), max_card=3)
        srcs = sources(j)
        y = "Y"
        r = redundancy_star(j).value
        u = union_star(j).value
        mi = {s: mutual_information(j, y, s) for s in srcs}

        perm = j.reorder([y] + srcs[::-1])
        expect(abs(redundancy_star(perm).value - r) <= 1e-9, f"{t}: redundancy symmetry")
        expect(abs(union_star(perm).value - u) <= 1e-6, f"{t}: union symmetry")

        single = marginalize(j, [y, srcs[0]])
        expect(abs(redundancy_star(single).value - mi[srcs[0]]) <= 1e-9, f"{t}: self-redundancy")
        expect(abs(union_star(single).value - mi[srcs[0]]) <= 1e-6, f"{t}: self-union")

        base = srcs[int(rng.integers(len(srcs)))]
        extra = append_source(j, "N", _random_out(rng, j.alphabet(base), "N", 2), base)
        expect(redundancy_star(extra).value <= r + 1e-9, f"{t}: redundancy monotonicity")
        expect(union_star(extra).value >= u - 1e-6, f"{t}: union monotonicity")

        finer = append_source(j, "F", _split_channel(rng, j.alphabet(base), "F"), base)
        expect(abs(redundancy_star(finer).value - r) <= 1e-9, f"{t}: redundancy garbling equality")
        coarser = append_source(j, "G", _random_out(rng, j.alphabet(base), "G", 2), base)
        expect(abs(union_star(coarser).value - u) <= 1e-6, f"{t}: union garbling equality")

        target_copy = append_source(j, "T", Channel.identity(j.target, "T"), y)
        expect(abs(redundancy_star(target_copy).value - r) <= 1e-9, f"{t}: target equality")

        null = _independent_source(j, rng)
        expect(abs(union_star(null).value - u) <= 1e-6, f"{t}: null equality")
    record_property("detail", f"100 joints x 11 checks, {len(fails)} violations")
    assert not fails, fails[:5]


@pytest.mark.criterion(6, "redundancy about the pair equals common information (50 joints)")
def test_common_information(record_property):
    rng = np.random.default_rng(6)
    worst, nonzero = 0.0, 0
    for _ in range(50):
        j = random_pair_joint(rng)
        gk, _ = gk_common_information(marginalize(j, ["X1", "X2"]))
        worst = max(worst, abs(redundancy_star(j).value - gk))
        nonzero += gk > 0
    record_property("detail", f"max |R* - C| = {worst:.2e} bits, {nonzero}/50 with nonzero common information")
    assert worst <= 1e-9


@pytest.mark.criterion(7, "Q cardinality within the bound")
def test_cardinality_bound(record_property):
    rng = np.random.default_rng(77)
    joints = [generate_fixture(n) for n in ("and", "or", "xor", "sum", "copy", "unq", "and3", "sum3", "overlap", "lemma1")]
    joints += [random_joint(rng) for _ in range(100)]
    bad, tight = [], 0
    for k, j in enumerate(joints):
        res = redundancy_star(j)
        bound = cardinality_bound(j)
        tight += res.effective_cardinality == bound
        if res.q_cardinality > bound or res.effective_cardinality > bound:
            bad.append((k, res.q_cardinality, res.effective_cardinality, bound))
    record_property("detail", f"{len(joints)} results, {len(bad)} over the bound, {tight} use it fully")
    assert not bad, bad[:5]


@pytest.mark.criterion(8, "inclusion-exclusion fails on the XOR-triple construction")
def test_inclusion_exclusion_violation(record_property):
    j = generate_fixture("lemma1")
    srcs = sources(j)
    iep = sum(mutual_information(j, "Y", s) for s in srcs)
    for a, b in itertools.combinations(srcs, 2):
        iep -= redundancy_star(marginalize(j, ["Y", a, b])).value
    iep += redundancy_star(j).value
    u = union_star(j).value
    total = mutual_information(j, "Y", srcs)
    record_property("detail", f"inclusion-exclusion gives {iep:.6f} bits, U* = {u:.6f} <= I(Y;X) = {total:.6f}")
    assert iep == pytest.approx(3.0, abs=1e-9)
    assert u <= total + 1e-9 and total == pytest.approx(2.0)
    assert iep - u >= 0.9


@pytest.mark.criterion(9, "optimal coupling dominates every source channel (50 joints)")
def test_coupling_dominates_sources(record_property):
    rng = np.random.default_rng(99)
    fails = []
    for t in range(50):
        j = random_joint(rng)
        res = union_star(j)
        # the coupling is exact, so the garbling test runs on it directly
        joint_channel = condition(res.optimal_coupling, "Y", sources(j))
        for name, ch in zip(sources(j), source_channels(j)):
            if not is_garbling(ch, joint_channel).holds:
                fails.append(f"{t}:{name} not a garbling")
        if res.value < max(mutual_information(j, "Y", s) for s in sources(j)) - 1e-6:
            fails.append(f"{t}: below max_i I(Y;Xi)")
    record_property("detail", f"50 joints, {len(fails)} failures")
    assert not fails, fails[:5]


def _channel_information(prior: np.ndarray, M: np.ndarray) -> np.ndarray:
    """I(Q;Y) in bits for a batch of channels ``M[n, q, y]``."""
    joint = M * prior[None, None, :]
    pq = joint.sum(2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log2(joint / (pq * prior[None, None, :])), 0.0)
    return terms.sum((1, 2))


def _simplex_grid(k: int, steps: int) -> np.ndarray:
    pts = [c for c in itertools.product(range(steps + 1), repeat=k) if sum(c) == steps]
    return np.array(pts, dtype=float) / steps


def _search_lambda(rng, prior, k1, k2, n_random: int) -> tuple[float, int]:
    """Best I(Q;Y) over sampled s(q|x1) with s(q|x2) solved from the consistency equation."""
    best, feasible = 0.0, 0
    if abs(np.linalg.det(k2)) < 1e-12:
        return best, feasible
    inv2 = np.linalg.inv(k2)
    batches = []
    for alpha in (0.05, 0.2, 1.0):
        n = n_random // 3
        batches.append(np.stack([rng.dirichlet([alpha] * 3, size=n) for _ in range(2)], axis=2))
    grid = _simplex_grid(3, 12)
    pairs = np.array([[a, b] for a in grid for b in grid])  # (m, 2, 3)
    batches.append(np.transpose(pairs, (0, 2, 1)))
    for A in batches:
        M = A @ k1
        B = M @ inv2
        ok = (B >= -1e-12).all(axis=(1, 2))
        feasible += int(ok.sum())
        if ok.any():
            best = max(best, float(_channel_information(prior, M[ok]).max()))
    return best, feasible


def _binary_joint(rng):
    while True:
        j = random_unstructured(rng, 2, max_card=2).canonical()[0]
        if j.shape == (2, 2, 2):
            return j


@pytest.mark.criterion(10, "sampling over feasible channel pairs never beats the exact optimum (20 joints)")
def test_sampling_oracle(record_property):
    rng = np.random.default_rng(10)
    worst_excess, closest, total_feasible = -math.inf, -math.inf, 0
    for _ in range(20):
        j = _binary_joint(rng)
        exact = redundancy_star(j, method="vertices").value
        prior = np.array([float(v) for v in marginalize(j, "Y").pmf])
        k1, k2 = (c.to_float() for c in source_channels(j))
        best = 0.0
        for a, b in ((k1, k2), (k2, k1)):
            found, feas = _search_lambda(rng, prior, a, b, 50_000)
            best = max(best, found)
            total_feasible += feas
        worst_excess = max(worst_excess, best - exact)
        closest = max(closest, exact - best)
    record_property(
        "detail",
        f"{total_feasible} feasible samples; max excess over exact {worst_excess:.2e} bits, "
        f"worst shortfall {closest:.2e} bits",
    )
    assert worst_excess <= 1e-6


@pytest.mark.criterion(11, "vertex enumeration and LP agree (200 systems)")
def test_geometry_cross_validation(record_property):
    rng = np.random.default_rng(2024)
    fails, vertices = [], 0
    for t in range(200):
        poly = random_polytope(rng)
        V = enumerate_vertices(poly)
        vertices += len(V)
        c = [int(v) for v in rng.integers(-5, 6, size=poly.dim)]
        res = lp_solve(LinearProgram(poly, c, "maximize"))
        if res.feasible != (len(V) > 0):
            fails.append(f"{t}: feasibility disagrees")
            continue
        if not len(V):
            continue
        best = max(sum(Fraction(a) * b for a, b in zip(c, v)) for v in V)
        if res.value != best or res.x not in V.points:
            fails.append(f"{t}: LP optimum {res.value} vs best vertex {best}")
        for v in V:
            active = [list(poly.A[i]) for i in poly.tight_rows(v)] + [list(r) for r in poly.C]
            if not poly.contains(v) or _rank_exact(active) != poly.dim:
                fails.append(f"{t}: {v} is not a vertex")
    record_property("detail", f"200 systems, {vertices} vertices, {len(fails)} disagreements")
    assert not fails, fails[:5]
