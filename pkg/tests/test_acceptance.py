"""Acceptance checks, one test per criterion, each at its stated tolerance and
time budget.  Run with ``pytest tests/test_acceptance.py -v``; the terminal
summary prints one PASS/FAIL line per criterion."""

import itertools
import sys
import time

import numpy as np
import pytest

from macwt.channel import channel_from_marginals, degenerate_eve
from macwt.cli import export_slice
from macwt.infomeasures import MIEngine, X, Y, Z
from macwt.polytope import contains, polytope_equal, union_contains, vertex_array
from macwt.regions import (RateTuple, build_legacy_region, build_mac_region, build_region,
                           build_secrecy_region, compare_secrecy_regions, elimination_counts,
                           find_garbage_rates, max_open_at_max_secrecy, max_sum_secrecy,
                           reduce_partition, verify_fm_projection)
from macwt.simplex import INFEASIBLE, OPTIMAL, check_certificate, solve

from helpers import (exterior_points, face_lp_oracle, fuzz_channels, garbage_violation, hull_samples,
                     joint_table, lp_vertex_oracle, mi_oracle, random_bounded_lp, random_channel,
                     satisfies_hypothesis, shrunk_vertices, user_axes)

USERS = (1, 2, 3)


def all_fuzzed():
    return [ch for K in USERS for ch in fuzz_channels(K)]


@pytest.fixture(scope="module", autouse=True)
def warm_channels():
    # channel generation (with its rejection sampling) stays outside the timed sections
    for K in USERS:
        fuzz_channels(K)


@pytest.mark.criterion(1, "elimination bound counts for three users")
def test_c01_elimination_counts():
    t0 = time.perf_counter()
    expected = [("R1g", 4, 5, 20), ("R2g", 8, 7, 56), ("R3g", 9, 7, 63)]
    for ch in fuzz_channels(3)[:10]:
        steps = elimination_counts(ch)
        assert [(s.var, s.upper, s.lower, s.pairs) for s in steps] == expected
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion(2, "garbage-rate projection equals the direct region")
def test_c02_projection_equality():
    t0 = time.perf_counter()
    failures = []
    for K in USERS:
        for i, ch in enumerate(fuzz_channels(K)):
            for kp in range(1, 1 << K):
                if not verify_fm_projection(ch, kp).match:
                    failures.append((K, i, kp))
    elapsed = time.perf_counter() - t0
    assert failures == []
    assert elapsed < 60.0, f"took {elapsed:.1f} s"


def _region_cases():
    """(channel, partition) pairs cycling over users, channels and partitions."""
    for i in itertools.count():
        K = USERS[i % 3]
        chans = fuzz_channels(K)
        ch = chans[(i // 3) % len(chans)]
        kp = 1 + (i // 3) % ((1 << K) - 1)
        yield ch, kp


@pytest.mark.criterion(3, "garbage-rate LP on interior and exterior points")
def test_c03_garbage_lp():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    inside = outside = 0
    for ch, kp in _region_cases():
        if inside >= 1000 and outside >= 1000:
            break
        eng = MIEngine(ch)
        desc = build_region(eng, kp)
        for x in shrunk_vertices(desc.polytope)[: max(0, 1000 - inside)]:
            res = find_garbage_rates(eng, kp, RateTuple.from_vector(np.maximum(x, 0.0)))
            assert res.feasible, (kp, x)
            assert garbage_violation(eng, kp, np.maximum(x, 0.0), res.rates) <= 1e-9
            inside += 1
        if outside < 1000:
            for x in exterior_points(desc.polytope, desc.forced_zero, rng, min(4, 1000 - outside)):
                assert not find_garbage_rates(eng, kp, RateTuple.from_vector(x)).feasible, (kp, x)
                outside += 1
    elapsed = time.perf_counter() - t0
    assert inside == 1000 and outside == 1000
    assert elapsed < 60.0, f"took {elapsed:.1f} s"


def _open_only_channel():
    """Two uniform binary users; Bob sees X1 through a BSC(0.25) and X2
    cleanly, Eve sees X1 perfectly."""
    bsc = np.array([[0.75, 0.25], [0.25, 0.75]])
    p_y = np.zeros((2, 2, 4))
    p_z = np.zeros((2, 2, 2))
    for x1, x2 in itertools.product(range(2), repeat=2):
        for y1 in range(2):
            p_y[x1, x2, 2 * y1 + x2] = bsc[x1, y1]
        p_z[x1, x2, x1] = 1.0
    return channel_from_marginals([[0.5, 0.5], [0.5, 0.5]], p_y, p_z)


@pytest.mark.criterion(4, "partition union contains the legacy region and can be larger")
def test_c04_union_improves_legacy():
    for ch in all_fuzzed():
        union = [d.polytope for d in (build_region(ch, kp) for kp in range(ch.full_mask + 1))]
        for v in vertex_array(build_legacy_region(ch).polytope):
            assert union_contains(union, v, 1e-7)
    ch = _open_only_channel()
    legacy = build_legacy_region(ch).polytope
    V = vertex_array(build_region(ch, 0).polytope)
    excess = (V @ legacy.A.T - legacy.b).max(axis=1)
    assert np.all(V[:, 0::2] == 0)
    assert excess.max() >= 1e-3


@pytest.mark.criterion(5, "empty partition gives the multiple-access region")
def test_c05_mac_degeneration():
    for ch in all_fuzzed():
        assert polytope_equal(build_region(ch, 0).polytope, build_mac_region(ch).polytope)


@pytest.mark.criterion(6, "maximum sum secrecy and open rate at the maximum")
def test_c06_max_secrecy():
    checked_open = 0
    for K in (2, 3):
        for ch in fuzz_channels(K):
            top = max(vertex_array(build_region(ch, kp).polytope)[:, 0::2].sum(axis=1).max()
                      for kp in range(1 << K))
            best = max_sum_secrecy(ch)
            assert abs(top - best.value) <= 1e-6
            if best.value > 0:
                assert abs(face_lp_oracle(ch, best.value) - max_open_at_max_secrecy(ch)) <= 1e-6
                checked_open += 1
    assert checked_open > 0


def _two_user_fixture(condition, seed):
    rng = np.random.default_rng(seed)
    for i in range(20000):
        ch = random_channel(rng, 2, degraded=i % 2 == 0)
        if not satisfies_hypothesis(ch):
            continue
        rep = compare_secrecy_regions(ch)
        if rep.condition == condition and min(rep.differences.values()) > 1e-3:
            return ch, rep
    raise AssertionError(f"no {condition} channel found")


def _axis_intercepts(poly):
    """Largest R1s on the R2s = 0 axis and largest R2s on the R1s = 0 axis."""
    P = export_slice(poly, ("R1s", "R2s"), {})
    on1 = P[np.abs(P[:, 1]) <= 1e-9, 0]
    on2 = P[np.abs(P[:, 0]) <= 1e-9, 1]
    return on1.max(), on2.max()


@pytest.mark.criterion(7, "two-user secrecy dichotomy with slice intercepts")
def test_c07_two_user_dichotomy():
    ch, rep = _two_user_fixture("geq_max", seed=92)
    assert rep.relation == "equal"
    ch, rep = _two_user_fixture("leq_min", seed=94)
    assert rep.relation == "strict" and rep.witness is not None
    legacy = build_secrecy_region(ch, legacy=True).polytope
    assert not contains(legacy, rep.witness, 1e-7)
    assert union_contains([build_secrecy_region(ch, kp).polytope for kp in range(4)], rep.witness, 1e-7)

    # intercepts from the nested-loop oracle; Y is axis 2 and Z axis 3
    t = joint_table(ch)
    a = mi_oracle(t, [0], [2], [1]) - mi_oracle(t, [0], [3], [1])
    b = mi_oracle(t, [1], [2], [0]) - mi_oracle(t, [1], [3], [0])
    c = mi_oracle(t, [0, 1], [2]) - mi_oracle(t, [0, 1], [3])
    a_leg = mi_oracle(t, [0], [2], [1]) - mi_oracle(t, [0], [3])
    b_leg = mi_oracle(t, [1], [2], [0]) - mi_oracle(t, [1], [3])
    assert c < min(a, b)
    r1, r2 = _axis_intercepts(build_secrecy_region(ch, 0b01).polytope)
    assert abs(r1 - a) <= 1e-6 and abs(r2) <= 1e-6
    r1, r2 = _axis_intercepts(build_secrecy_region(ch, 0b10).polytope)
    assert abs(r1) <= 1e-6 and abs(r2 - b) <= 1e-6
    r1, r2 = _axis_intercepts(build_secrecy_region(ch, 0b11).polytope)
    assert abs(r1 - min(a_leg, c)) <= 1e-6 and abs(r2 - min(b_leg, c)) <= 1e-6
    # the witness sits on the R1s axis beyond the sum bound
    assert rep.witness[0] > c + 1e-6


def _single_violation_fixtures(count, seed=78):
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        ch = random_channel(rng, 3, degraded=False)
        for kp in range(1, 8):
            if bin(kp).count("1") < 2:
                continue
            red = reduce_partition(ch, kp)
            if len(red.violating) == 1 and red.k2:
                found.append((ch, kp, red))
                break
    return found


@pytest.mark.criterion(8, "membership transfers to the reduced partition")
def test_c08_partition_reduction():
    rng = np.random.default_rng(8)
    for ch, kp, red in _single_violation_fixtures(5):
        eng = MIEngine(ch)
        k2 = red.k2
        comp2 = 7 & ~k2
        # every bound of the reduced region is strictly positive
        for s in range(8):
            for sp in range(8):
                for t in range(8):
                    if s & ~k2 or sp & ~s or t & ~comp2 or not s | t:
                        continue
                    assert eng.region_rhs(k2, s, sp, t)[0] > 0
        target = build_region(eng, k2).polytope
        for x in hull_samples(build_region(eng, kp).polytope, rng, 500):
            assert contains(target, x, 1e-9)


@pytest.mark.criterion(9, "simplex optimum and certificates")
def test_c09_simplex():
    rng = np.random.default_rng(9)
    statuses = {OPTIMAL: 0, INFEASIBLE: 0}
    for _ in range(500):
        lp = random_bounded_lp(rng)
        sol = solve(lp)
        assert check_certificate(lp, sol)
        best = lp_vertex_oracle(lp.objective, lp.A_ub, lp.b_ub, lp.A_eq, lp.b_eq, lp.lower, lp.upper)
        if best is None:
            assert sol.status == INFEASIBLE
        else:
            assert sol.status == OPTIMAL
            assert abs(sol.objective - best) <= 1e-8
        statuses[sol.status] += 1
    assert statuses[OPTIMAL] and statuses[INFEASIBLE]


@pytest.mark.criterion(10, "information-measure identities and inequalities")
def test_c10_information_measures():
    for ch in all_fuzzed() + [degenerate_eve(c) for c in fuzz_channels(2)[:10]]:
        eng = MIEngine(ch)
        full = eng.full_mask
        for kp in range(full + 1):
            comp = full & ~kp
            for s in range(1, full + 1):
                if s & ~kp:
                    continue
                for sp in range(s + 1):
                    if sp & ~s:
                        continue
                    assert eng.eve(s, comp) >= eng.eve(sp, comp) - 1e-9
                for t in range(comp + 1):
                    if t & ~comp:
                        continue
                    lhs = eng.bob(s, (kp & ~s) | comp)
                    rhs = eng.bob(s | t, (kp & ~s) | (comp & ~t))
                    assert lhs <= rhs + 1e-9
        # chain rule over every split of every user set, with every conditioning set
        for a, g in itertools.product(range(1, full + 1), range(full + 1)):
            if a & g:
                continue
            for s in range(1, a):
                if s & ~a:
                    continue
                t = a & ~s
                joint = eng.mi(X(s | t), Y, X(g))
                split = eng.mi(X(s), Y, X(t | g)) + eng.mi(X(t), Y, X(g))
                assert abs(joint - split) <= 1e-9
                assert abs(eng.mi(X(a), Z, X(g)) - eng.mi(X(s), Z, X(t | g)) - eng.mi(X(t), Z, X(g))) <= 1e-9


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
