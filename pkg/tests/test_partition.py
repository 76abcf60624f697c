"""Star forests, the g ratio, and the m-level facility partition."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bipoint.instances import MetricInstance, BiPointSolution, \
    synthesize_random_bipoint
from bipoint.partition import (
    SecondaryStarsUnavailable,
    build_partition,
    build_stars,
    class_aggregates,
    classify_clients,
    g_value,
)


def line_solution():
    """Facilities on a line: F1 = {3, 4}, F2 = {0, 1, 2, 5} at positions
    chosen so primary/secondary assignments are hand-checkable."""
    pos = {0: 0, 1: 10, 2: 20, 3: 1, 4: 19, 5: 30, 6: 2, 7: 18}
    n = len(pos)
    dist = [[Fraction(abs(pos[i] - pos[j])) for j in range(n)]
            for i in range(n)]
    inst = MetricInstance(n_points=n, dist=dist, clients=[6, 7],
                          facilities=[0, 1, 2, 3, 4, 5], k=3)
    return BiPointSolution(instance=inst, F1=[3, 4], F2=[0, 1, 2, 5],
                           a=Fraction(1, 2), b=Fraction(1, 2))


def test_build_stars_hand_trace():
    sol = line_solution()
    forest = build_stars(sol)
    # 3 sits at 1 (nearest F2 member: 0), 4 sits at 19 (nearest: 2 at 20)
    assert forest.sigmaB == {3: 0, 4: 2}
    assert forest.B == [0, 2]
    assert forest.C == [1, 5]
    # secondary centers come from C = {1 at 10, 5 at 30}
    assert forest.sigmaC == {3: 1, 4: 1}


def test_g_value_hand_trace():
    sol = line_solution()
    forest = build_stars(sol)
    inst = sol.instance
    # facility 3: primary distance 1, secondary distance 9
    assert g_value(inst, 3, forest) == Fraction(1, 9)
    assert g_value(inst, 4, forest) == Fraction(1, 9)


def test_g_zero_over_zero_convention():
    # facility collocated with an F2 point and a C point at distance 0
    dist = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    inst = MetricInstance(n_points=3, dist=dist, clients=[], facilities=[0, 1, 2], k=1)
    sol = BiPointSolution(instance=inst, F1=[0], F2=[1, 2],
                          a=Fraction(1), b=Fraction(0), D1=0, D2=0)
    forest = build_stars(sol)
    assert g_value(inst, 0, forest) == 1


def test_partition_thresholds_validated():
    sol = line_solution()
    forest = build_stars(sol)
    with pytest.raises(ValueError):
        build_partition(sol, forest, [Fraction(2)])
    with pytest.raises(ValueError):
        build_partition(sol, forest, [Fraction(1, 2), Fraction(1, 3)])


def test_partition_hand_trace():
    sol = line_solution()
    forest = build_stars(sol)
    part = build_partition(sol, forest, [Fraction(1, 2)])
    # both g values are 1/9 <= 1/2, so everything lands in level 1
    assert part.A == [[3, 4], []]
    assert part.B == [[0, 2], []]
    assert sorted(part.C[0] + part.C[1]) == [1, 5]
    assert part.gammaA == [Fraction(1), Fraction(0)]
    assert sum(part.gammaC) == 1


def test_secondary_unavailable():
    pos = [0, 1, 5, 6]
    dist = [[Fraction(abs(p - q)) for q in pos] for p in pos]
    inst = MetricInstance(n_points=4, dist=dist, clients=[0], facilities=[1, 2, 3], k=2)
    sol = BiPointSolution(instance=inst, F1=[1, 2], F2=[2, 3],
                          a=Fraction(0), b=Fraction(1))
    forest = build_stars(sol)
    assert not forest.has_secondary
    with pytest.raises(SecondaryStarsUnavailable):
        g_value(inst, 1, forest)
    part = build_partition(sol, forest, [])
    assert part.m == 1 and part.A == [[1, 2]]
    with pytest.raises(SecondaryStarsUnavailable):
        build_partition(sol, forest, [Fraction(1, 2)])


def check_partition_invariants(sol, part, forest):
    m = part.m
    allA = [i for At in part.A for i in At]
    allB = [i for Bt in part.B for i in Bt]
    allC = [i for Ct in part.C for i in Ct]
    assert sorted(allA) == sorted(sol.F1)
    assert sorted(allB) == sorted(forest.B)
    assert sorted(allC) == sorted(forest.C)
    assert len(allB) == len(set(allB)) and len(allC) == len(set(allC))
    for t in range(m):
        assert len(part.A[t]) == len(part.B[t])
    bounds = part.g_thresholds
    for t, At in enumerate(part.A):
        for i in At:
            g = g_value(sol.instance, i, forest)
            assert g <= bounds[t + 1]
            if t:
                assert g > bounds[t - 1 + 1] or g > bounds[t]
    nC = len(forest.C)
    assert part.gammaA == [Fraction(len(part.A[t]), nC) for t in range(m)]
    assert sum(part.gammaC) == 1
    # at most one level has |C_t| != |A_t| among t >= 2 (padding exhausts C)
    short = [t for t in range(1, m) if len(part.C[t]) != len(part.A[t])]
    assert len(short) <= 1


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=9999),
       st.sampled_from([(), (Fraction(6586, 10000),),
                        (Fraction(642, 1000), Fraction(833, 1000))]))
def test_partition_invariants_random(seed, inner):
    sol = synthesize_random_bipoint(12, 3, 9, 5, seed=seed)
    forest = build_stars(sol)
    if not inner:
        return
    part = build_partition(sol, forest, inner)
    check_partition_invariants(sol, part, forest)


def test_classify_clients_and_aggregates():
    sol = synthesize_random_bipoint(25, 3, 9, 5, seed=5)
    forest = build_stars(sol)
    part = build_partition(sol, forest, (Fraction(6586, 10000),))
    classified = classify_clients(sol, forest, part)
    assert len(classified) == 25
    for c in classified:
        assert c.i1 in sol.F1 and c.i2 in sol.F2
        assert c.i3 == forest.sigmaB[c.i1]
        assert c.d1 == sol.instance.d(c.client, c.i1)
        assert c.d2 == sol.instance.d(c.client, c.i2)
        assert c.zone in "BC" and 1 <= c.x <= 2 and 1 <= c.y <= 2
    agg = class_aggregates(sol.instance, classified, part.m)
    d1_total = sum(v[0] for v in agg.values())
    d2_total = sum(v[1] for v in agg.values())
    assert d1_total == pytest.approx(float(sol.D1))
    assert d2_total == pytest.approx(float(sol.D2))
